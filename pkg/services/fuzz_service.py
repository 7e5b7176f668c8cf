from concurrent.futures import ProcessPoolExecutor
from typing import Iterator, List, Optional, Sequence, Tuple

import typer
from pydantic import BaseModel, Field

from calculus.terms import NIL, Nil, replace_at, subterms
from core import console
from core.config import RunConfig
from core.errors import StateLimitExceeded
from services.generator import TermGenerator
from services.laws import LAWS_BY_NAME, Case, Law, laws_in

SKIPPED = "skipped"


class Violation(BaseModel):
    law: str
    index: int
    message: str
    case: str
    shrunk: str


class LawReport(BaseModel):
    law: str
    cases: int = 0
    skipped: int = 0
    violations: List[Violation] = Field(default_factory=list)


class FuzzReport(BaseModel):
    suite: str
    seed: int
    size: int
    laws: List[LawReport] = Field(default_factory=list)

    @property
    def violation_count(self) -> int:
        return sum(len(r.violations) for r in self.laws)


# (law name, case index, None | SKIPPED | Violation)
CaseOutcome = Tuple[str, int, object]


def case_seed(seed: int, law: str, index: int) -> str:
    """Per-case seed; a case can be regenerated without replaying earlier ones."""
    return f"{seed}:{law}:{index}"


def _verdict(law: Law, case: Case, bound: Optional[int]) -> Optional[str]:
    try:
        return law.check(case, bound)
    except StateLimitExceeded:
        raise
    except Exception as e:
        return f"crashed with {type(e).__name__}: {e}"


def _candidates(case: Case) -> Iterator[Case]:
    for i, t in enumerate(case.terms):
        for path, node in subterms(t):
            if isinstance(node, Nil):
                continue
            terms = list(case.terms)
            terms[i] = replace_at(t, path, NIL)
            yield case.with_terms(tuple(terms))


def shrink(law: Law, case: Case, bound: Optional[int]) -> Tuple[Case, str]:
    """Greedily replaces subterms by 0 while the case keeps failing."""
    message = _verdict(law, case, bound)
    if message is None:
        raise ValueError("shrink needs a failing case")
    progress = True
    while progress:
        progress = False
        for candidate in _candidates(case):
            try:
                found = _verdict(law, candidate, bound)
            except StateLimitExceeded:
                continue
            if found is not None:
                case, message, progress = candidate, found, True
                break
    return case, message


def run_case(law_name: str, seed: int, index: int, size: int,
             alphabet: Sequence[str], bound: Optional[int]) -> CaseOutcome:
    """One generated case of one law; module level so worker processes can run it."""
    law = LAWS_BY_NAME[law_name]
    case = law.generate(TermGenerator(case_seed(seed, law_name, index), alphabet), size)
    try:
        message = _verdict(law, case, bound)
    except StateLimitExceeded:
        return law_name, index, SKIPPED
    if message is None:
        return law_name, index, None
    shrunk, message = shrink(law, case, bound)
    return law_name, index, Violation(law=law_name, index=index, message=message,
                                      case=case.describe(), shrunk=shrunk.describe())


class FuzzService:
    """
    Runs the law catalogue on generated cases.
    Cases are independent; with several workers they run in a process pool and
    the report is assembled in (law, case index) order either way.
    """
    def __init__(self, config: RunConfig):
        self.config = config
        self.count = config.fuzz_count
        self.size = config.fuzz_size
        self.seed = config.fuzz_seed
        self.workers = config.fuzz_workers
        console.trace("FUZZ", f"Harness initialized. count={self.count} size={self.size} "
                              f"seed={self.seed} workers={self.workers}", fg=typer.colors.GREEN)

    def _jobs(self, laws: Sequence[Law]):
        alphabet = tuple(self.config.alphabet)
        for law in laws:
            for index in range(self.count):
                yield (law.name, self.seed, index, self.size, alphabet, self.config.state_bound)

    def _outcomes(self, laws: Sequence[Law]) -> List[CaseOutcome]:
        jobs = list(self._jobs(laws))
        if self.workers == 1:
            return [run_case(*job) for job in jobs]
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(run_case, *zip(*jobs))) if jobs else []

    def run_sweep(self, suite: str = "all") -> FuzzReport:
        """Runs every law of `suite` on `count` cases each."""
        laws = laws_in(suite)
        console.trace("FUZZ", f"Running sweep over {len(laws)} law(s)...", fg=typer.colors.CYAN)
        reports = {law.name: LawReport(law=law.name) for law in laws}
        for name, index, outcome in sorted(self._outcomes(laws), key=lambda o: (o[0], o[1])):
            report = reports[name]
            report.cases += 1
            if outcome == SKIPPED:
                report.skipped += 1
            elif isinstance(outcome, Violation):
                report.violations.append(outcome)
                console.info("FUZZ", f"{name} #{index}: {outcome.message}", fg=typer.colors.RED)
        for report in reports.values():
            colour = typer.colors.RED if report.violations else typer.colors.GREEN
            console.trace("FUZZ", f"{report.law}: {report.cases} case(s), {report.skipped} skipped, "
                                  f"{len(report.violations)} violation(s)", fg=colour)
        return FuzzReport(suite=suite, seed=self.seed, size=self.size,
                          laws=[reports[law.name] for law in laws])
