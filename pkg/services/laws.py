"""
Catalogue of semantic laws checked by the fuzz harness.

Each law draws a `Case` from a `TermGenerator` and returns a violation message,
or None when the law holds (or its precondition does not apply to the case).
Preconditions are re-checked inside `check` because shrinking rewrites cases.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from axioms.checker import check_proof
from axioms.schemas import expansion
from calculus.terms import (
    BOTTOM, NIL, TAU, Action, Bottom, Conj, Disj, ExtChoice, Nil, Par, Prefix, Term,
    as_guarded_sum, fold_choice, is_basic, is_injective_in_prefixes, is_normal_form, prefix_set,
    subterms,
)
from normalizer.normalize import normalize
from prover.completeness import prove_leq
from refinement.simulation import check_refinement, refines, replay_witness, rs_equiv, uniform
from semantics.lts import build_lts, check_llts, weak_eps_stable
from services.generator import Context, TermGenerator

Bound = Optional[int]


@dataclass(frozen=True)
class Case:
    terms: Tuple[Term, ...]
    sync: FrozenSet[Action] = frozenset()
    action: Optional[Action] = None
    context: Optional[Context] = None

    def with_terms(self, terms: Tuple[Term, ...]) -> "Case":
        return Case(terms, self.sync, self.action, self.context)

    def describe(self) -> str:
        parts = [str(t) for t in self.terms]
        if self.sync:
            parts.append("A={" + ",".join(sorted(a.name for a in self.sync)) + "}")
        if self.action is not None:
            parts.append(f"action={self.action}")
        if self.context is not None:
            parts.append(f"context={self.context.frame} at {list(self.context.path)}")
        return "; ".join(parts)


@dataclass(frozen=True)
class Law:
    name: str
    groups: Tuple[str, ...]
    generate: Callable[[TermGenerator, int], Case]
    check: Callable[[Case, Bound], Optional[str]]
    doc: str = field(default="", compare=False)


def _terms(count: int, basic_only: bool = False) -> Callable[[TermGenerator, int], Case]:
    def generate(g: TermGenerator, size: int) -> Case:
        return Case(tuple(g.term(size, basic_only) for _ in range(count)), g.sync())
    return generate


def _equiv(left: Term, right: Term, bound: Bound, label: str) -> Optional[str]:
    if rs_equiv(left, right, bound):
        return None
    return f"{label}: {left} and {right} are not equivalent"


def _first(*results: Optional[str]) -> Optional[str]:
    return next((r for r in results if r is not None), None)


# --- LLTS laws ---

def _lts_invariants(case: Case, bound: Bound) -> Optional[str]:
    t = case.terms[0]
    l = build_lts(t, bound)
    violations = check_llts(l)
    if violations:
        return violations[0]
    if isinstance(t, (ExtChoice, Par, Conj)):
        lp, lq = build_lts(t.left, bound), build_lts(t.right, bound)
        left, right = weak_eps_stable(lp, t.left), weak_eps_stable(lq, t.right)
        for s in weak_eps_stable(l, t):
            if type(s) is not type(t) or s.left not in left or s.right not in right:
                return f"stable descendant {s} of {t} does not decompose"
    return None


def _lemma1(case: Case, bound: Bound) -> Optional[str]:
    memo: Dict[Term, bool] = {}

    def bad(u: Term) -> bool:
        if u not in memo:
            memo[u] = u in build_lts(u, bound).inconsistent
        return memo[u]

    for _, u in subterms(case.terms[0]):
        if isinstance(u, Nil) and bad(u):
            return "0 is inconsistent"
        if isinstance(u, Bottom) and not bad(u):
            return "bot is consistent"
        if isinstance(u, Prefix) and bad(u) != bad(u.body):
            return f"prefix clause fails at {u}"
        if isinstance(u, Disj) and bad(u) != (bad(u.left) and bad(u.right)):
            return f"disjunction clause fails at {u}"
        if isinstance(u, (ExtChoice, Par)) and bad(u) != (bad(u.left) or bad(u.right)):
            return f"choice/parallel clause fails at {u}"
        if isinstance(u, Conj) and (bad(u.left) or bad(u.right)) and not bad(u):
            return f"conjunction clause fails at {u}"
    return None


def _basic_consistent(case: Case, bound: Bound) -> Optional[str]:
    t = case.terms[0]
    if is_basic(t) and t in build_lts(t, bound).inconsistent:
        return f"basic term {t} is inconsistent"
    return None


def _f_characterization(case: Case, bound: Bound) -> Optional[str]:
    t = case.terms[0]
    if (t in build_lts(t, bound).inconsistent) != refines(t, BOTTOM, bound):
        return f"inconsistency of {t} disagrees with refining bot"
    return None


# --- Algebraic laws ---

def _reflexive(case: Case, bound: Bound) -> Optional[str]:
    p = case.terms[0]
    return None if refines(p, p, bound) else f"{p} does not refine itself"


def _gen_chain(g: TermGenerator, size: int) -> Case:
    p = g.term(size)
    q = g.rng.choice([g.term(size), Disj(p, g.term(size)), Conj(g.term(size), p)])
    r = g.rng.choice([g.term(size), Disj(g.term(size), q), q])
    return Case((p, q, r))


def _transitive(case: Case, bound: Bound) -> Optional[str]:
    p, q, r = case.terms
    if refines(p, q, bound) and refines(q, r, bound) and not refines(p, r, bound):
        return f"{p} <= {q} <= {r} but not {p} <= {r}"
    return None


def _commutative(case: Case, bound: Bound) -> Optional[str]:
    p, q = case.terms
    return _first(*(
        _equiv(build(p, q), build(q, p), bound, "commutativity")
        for build in (ExtChoice, Disj, Conj, lambda x, y: Par(x, y, case.sync))
    ))


def _associative(case: Case, bound: Bound) -> Optional[str]:
    p, q, r = case.terms
    return _first(*(
        _equiv(kind(kind(p, q), r), kind(p, kind(q, r)), bound, "associativity")
        for kind in (ExtChoice, Disj, Conj)
    ))


def _idempotent(case: Case, bound: Bound) -> Optional[str]:
    p = case.terms[0]
    return _first(*(_equiv(kind(p, p), p, bound, "idempotence") for kind in (ExtChoice, Conj, Disj)))


def _units(case: Case, bound: Bound) -> Optional[str]:
    p = case.terms[0]
    return _first(_equiv(ExtChoice(p, NIL), p, bound, "unit"), _equiv(Disj(p, BOTTOM), p, bound, "unit"))


def _zeros(case: Case, bound: Bound) -> Optional[str]:
    p = case.terms[0]
    return _first(*(
        _equiv(build(p, BOTTOM), BOTTOM, bound, "zero")
        for build in (ExtChoice, Conj, lambda x, y: Par(x, y, case.sync))
    ))


def _tau_identity(case: Case, bound: Bound) -> Optional[str]:
    p = case.terms[0]
    return _equiv(Prefix(TAU, p), p, bound, "tau identity")


def _gen_with_action(g: TermGenerator, size: int) -> Case:
    return Case((g.term(size), g.term(size)), action=g.action())


def _prefix_bottom(case: Case, bound: Bound) -> Optional[str]:
    return _equiv(Prefix(case.action, BOTTOM), BOTTOM, bound, "prefix of bot")


def _distributive(case: Case, bound: Bound) -> Optional[str]:
    p, q, r = case.terms
    builds = (ExtChoice, Conj, lambda x, y: Par(x, y, case.sync))
    return _first(*(
        _equiv(build(p, Disj(q, r)), Disj(build(p, q), build(p, r)), bound, "distributivity")
        for build in builds
    ))


def _absorption(case: Case, bound: Bound) -> Optional[str]:
    p, q = case.terms
    return _first(_equiv(Conj(p, Disj(p, q)), p, bound, "absorption"),
                  _equiv(Disj(p, Conj(p, q)), p, bound, "absorption"))


def _fp(case: Case, bound: Bound) -> Optional[str]:
    p, q, r = case.terms
    if refines(p, Conj(q, r), bound) != (refines(p, q, bound) and refines(p, r, bound)):
        return f"{p} against the conjunction of {q} and {r}"
    return None


def _special_i(case: Case, bound: Bound) -> Optional[str]:
    p, q = case.terms
    a = case.action
    left, right = ExtChoice(Prefix(a, p), Prefix(a, q)), Prefix(a, Disj(p, q))
    return None if refines(left, right, bound) else f"{left} does not refine {right}"


def _special_uniform(case: Case, bound: Bound) -> Optional[str]:
    p, q = case.terms
    a = case.action
    if a is None or a.is_tau:
        return None
    left, right = Prefix(a, Disj(p, q)), ExtChoice(Prefix(a, p), Prefix(a, q))
    if refines(left, right, bound) != uniform(p, q, bound):
        return f"refinement of {left} by {right} disagrees with uniformity"
    return None


def _gen_context(g: TermGenerator, size: int) -> Case:
    p = g.term(size)
    q = g.rng.choice([Disj(p, g.term(size)), Disj(g.term(size), p), g.term(size), p])
    p = g.rng.choice([p, Conj(p, g.term(size)), BOTTOM])
    return Case((p, q), context=g.context(size))


def _precongruence(case: Case, bound: Bound) -> Optional[str]:
    p, q = case.terms
    ctx = case.context
    if ctx is None or not refines(p, q, bound):
        return None
    left, right = ctx.fill(p), ctx.fill(q)
    return None if refines(left, right, bound) else f"{left} does not refine {right}"


# --- Axiom schemas ---

def _gen_sums(shared: bool, injective: bool = False, basic_only: bool = False):
    def generate(g: TermGenerator, size: int) -> Case:
        n = g.rng.randint(1, min(3, len(g.alphabet)) if injective else 3)
        first = g.actions(n, distinct=injective)
        second = list(first) if shared else g.actions(g.rng.randint(0, 3))
        inner = max(1, size // 3)
        return Case((g.guarded_sum(first, inner, basic_only), g.guarded_sum(second, inner, basic_only)), g.sync())
    return generate


def _ecc1(case: Case, bound: Bound) -> Optional[str]:
    s1, s2 = (as_guarded_sum(t) for t in case.terms)
    if s1 is None or s2 is None or prefix_set(s1) == prefix_set(s2):
        return None
    return _equiv(Conj(s1.term, s2.term), BOTTOM, bound, "conjunction of mismatched sums")


def _zipped(case: Case):
    s1, s2 = (as_guarded_sum(t) for t in case.terms)
    if s1 is None or s2 is None or s1.actions != s2.actions:
        return None
    zipped = fold_choice([Prefix(a, Conj(x, y)) for (a, x), (_, y) in zip(s1.summands, s2.summands)])
    return s1, s2, zipped


def _ecc2(case: Case, bound: Bound) -> Optional[str]:
    found = _zipped(case)
    if found is None:
        return None
    s1, s2, zipped = found
    conj = Conj(s1.term, s2.term)
    return None if refines(zipped, conj, bound) else f"{zipped} does not refine {conj}"


def _ecc3(case: Case, bound: Bound) -> Optional[str]:
    found = _zipped(case)
    if found is None or not is_injective_in_prefixes(found[0]):
        return None
    s1, s2, zipped = found
    conj = Conj(s1.term, s2.term)
    return None if refines(conj, zipped, bound) else f"{conj} does not refine {zipped}"


def _exp(case: Case, bound: Bound, forward: bool) -> Optional[str]:
    s1, s2 = (as_guarded_sum(t) for t in case.terms)
    if s1 is None or s2 is None:
        return None
    if not forward and not all(is_basic(body) for _, body in s1.summands + s2.summands):
        return None
    par = Par(s1.term, s2.term, case.sync)
    expanded = expansion(s1.term, s2.term, case.sync)
    left, right = (par, expanded) if forward else (expanded, par)
    return None if refines(left, right, bound) else f"{left} does not refine {right}"


# --- Normal forms and the prover ---

def _normalize(case: Case, bound: Bound) -> Optional[str]:
    t = case.terms[0]
    nf, eq = normalize(t)
    out = nf.term
    if not is_normal_form(out):
        return f"{out} is not a normal form"
    for pf, lhs, rhs in ((eq.fwd, t, out), (eq.bwd, out, t)):
        verdict = check_proof(pf)
        if not verdict.accepted:
            return f"normalization proof rejected at {list(verdict.path)}: {verdict.reason}"
        if (pf.lhs, pf.rhs) != (lhs, rhs):
            return "normalization proof proves the wrong claim"
    if not rs_equiv(t, out, bound):
        return f"{t} is not equivalent to its normal form {out}"
    if normalize(out)[0] != nf:
        return f"normalizing {out} again changes it"
    if (out in build_lts(out, bound).inconsistent) != nf.is_bottom:
        return f"normal form {out} is inconsistent without being bot"
    return None


def _oracle(case: Case, bound: Bound) -> Optional[str]:
    p, q = case.terms
    result = check_refinement(p, q, bound)
    verdict = prove_leq(p, q, bound)
    if bool(verdict) != result.holds:
        return f"prover and refinement disagree on {p} <= {q}"
    if verdict:
        checked = check_proof(verdict.proof)
        if not checked.accepted or (checked.lhs, checked.rhs) != (p, q):
            return f"proof of {p} <= {q} is rejected: {checked.reason}"
    elif not replay_witness(verdict.witness, build_lts(p, bound), build_lts(q, bound)):
        return f"witness for {p} <= {q} does not replay"
    return None


LAWS: Tuple[Law, ...] = (
    Law("lts-invariants", ("llts",), _terms(1), _lts_invariants, "LLTS conditions and stable decomposition"),
    Law("lemma1", ("llts",), _terms(1), _lemma1, "inconsistency of composite terms"),
    Law("basic-consistent", ("llts",), _terms(1, basic_only=True), _basic_consistent, "basic terms are consistent"),
    Law("f-characterization", ("llts",), _terms(1), _f_characterization, "p inconsistent iff p <= bot"),
    Law("reflexive", ("algebra",), _terms(1), _reflexive),
    Law("transitive", ("algebra",), _gen_chain, _transitive),
    Law("commutative", ("algebra",), _terms(2), _commutative),
    Law("associative", ("algebra",), _terms(3), _associative),
    Law("idempotent", ("algebra",), _terms(1), _idempotent),
    Law("units", ("algebra",), _terms(1), _units),
    Law("zeros", ("algebra",), _terms(1), _zeros),
    Law("tau-identity", ("algebra",), _terms(1), _tau_identity),
    Law("prefix-bottom", ("algebra",), _gen_with_action, _prefix_bottom),
    Law("distributive", ("algebra",), _terms(3), _distributive),
    Law("absorption", ("algebra",), _terms(2), _absorption),
    Law("fp", ("algebra",), _terms(3), _fp, "refining a conjunction means refining both conjuncts"),
    Law("special-i", ("algebra",), _gen_with_action, _special_i),
    Law("special-uniform", ("algebra",), _gen_with_action, _special_uniform,
        "a.(p \\/ q) <= a.p [] a.q iff p and q are uniform"),
    Law("precongruence", ("algebra",), _gen_context, _precongruence),
    Law("ecc1", ("axioms",), _gen_sums(shared=False), _ecc1),
    Law("ecc2", ("axioms",), _gen_sums(shared=True), _ecc2),
    Law("ecc3", ("axioms",), _gen_sums(shared=True, injective=True), _ecc3),
    Law("exp1", ("axioms",), _gen_sums(shared=False), lambda c, b: _exp(c, b, True)),
    Law("exp2", ("axioms",), _gen_sums(shared=False, basic_only=True), lambda c, b: _exp(c, b, False)),
    Law("normalize", ("normal",), _terms(1), _normalize, "normal form, proof and idempotence"),
    Law("oracle", ("normal",), _terms(2), _oracle, "prover agrees with refinement"),
)

LAWS_BY_NAME: Dict[str, Law] = {law.name: law for law in LAWS}

GROUPS: Tuple[str, ...] = ("llts", "algebra", "axioms", "normal", "all")


def laws_in(suite: str) -> List[Law]:
    """Laws of a group, or the single law of that name."""
    if suite == "all":
        return list(LAWS)
    if suite in LAWS_BY_NAME:
        return [LAWS_BY_NAME[suite]]
    selected = [law for law in LAWS if suite in law.groups]
    if not selected:
        raise KeyError(suite)
    return selected
