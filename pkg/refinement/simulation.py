"""
Stable ready simulation and the ready simulation preorder.

The largest stable ready simulation between two LTSs is computed by deleting
pairs from an initial candidate set until every remaining pair can match the
weak visible steps of its left state. Each deletion keeps its reason, so a
negative verdict can be explained by a `RefusalWitness`.
"""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field

from calculus.terms import Action, Term, term_key
from core import console
from semantics.lts import (
    Lts, build_lts, ready_set, stable_states, weak_act_stable, weak_eps_stable,
)

Pair = Tuple[Term, Term]


class WitnessKind(str, Enum):
    INCONSISTENCY_GAP = "InconsistencyGap"
    READY_SET_MISMATCH = "ReadySetMismatch"
    UNMATCHED_WEAK_STEP = "UnmatchedWeakStep"
    NO_STABLE_MATCH = "NoStableMatch"


@dataclass(frozen=True)
class WeakStep:
    """A decorated weak transition; label None stands for epsilon."""
    source: Term
    label: Optional[Action]
    target: Term

    @property
    def label_name(self) -> str:
        return "eps" if self.label is None else self.label.name


@dataclass(frozen=True)
class Removal:
    """Why a candidate pair left the relation."""
    kind: WitnessKind
    action: Optional[Action] = None
    target: Optional[Term] = None


@dataclass(frozen=True, eq=False)
class SimRelation:
    pairs: FrozenSet[Pair]
    left: Lts
    right: Lts
    removed: Dict[Pair, Removal] = field(default_factory=dict, repr=False)

    def __contains__(self, pair: Pair) -> bool:
        return pair in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class RefusalWitness:
    kind: WitnessKind
    path: Tuple[WeakStep, ...]
    left: Term
    right: Term
    action: Optional[Action] = None

    def describe(self) -> str:
        text = f"{self.kind.value}: {self.left} vs {self.right}"
        if self.action is not None:
            text += f" on {self.action}"
        return text


@dataclass(frozen=True, eq=False)
class RefinementResult:
    holds: bool
    sim: SimRelation
    witness: Optional[RefusalWitness] = None

    def __bool__(self) -> bool:
        return self.holds


def _weak_map(l: Lts, states: Iterable[Term]) -> Dict[Term, Dict[Action, FrozenSet[Term]]]:
    return {p: {a: weak_act_stable(l, p, a) for a in ready_set(l, p)} for p in states}


def largest_stable_sim(l1: Lts, l2: Lts) -> SimRelation:
    """Greatest stable ready simulation contained in stable(l1) x stable(l2)."""
    left_states, right_states = stable_states(l1), stable_states(l2)
    wa1 = _weak_map(l1, (p for p in left_states if p not in l1.inconsistent))
    wa2 = _weak_map(l2, (q for q in right_states if q not in l2.inconsistent))

    removed: Dict[Pair, Removal] = {}
    relation: Set[Pair] = set()
    for p in left_states:
        p_bad = p in l1.inconsistent
        for q in right_states:
            if p_bad:
                relation.add((p, q))
            elif q in l2.inconsistent:
                removed[(p, q)] = Removal(WitnessKind.INCONSISTENCY_GAP)
            elif ready_set(l1, p) != ready_set(l2, q):
                removed[(p, q)] = Removal(WitnessKind.READY_SET_MISMATCH)
            else:
                relation.add((p, q))

    # reverse weak steps: target -> sources, per action
    rev1: Dict[Tuple[Term, Action], List[Term]] = {}
    for p, steps in wa1.items():
        for a, targets in steps.items():
            for p2 in targets:
                rev1.setdefault((p2, a), []).append(p)
    rev2: Dict[Tuple[Term, Action], List[Term]] = {}
    for q, steps in wa2.items():
        for a, targets in steps.items():
            for q2 in targets:
                rev2.setdefault((q2, a), []).append(q)

    # support[(p, q, a, p2)] counts the q2 with (p2, q2) still related
    support: Dict[Tuple[Term, Term, Action, Term], int] = {}
    queue: deque = deque()

    def drop(pair: Pair, reason: Removal):
        relation.discard(pair)
        removed[pair] = reason
        queue.append(pair)

    unsupported: List[Tuple[Pair, Removal]] = []
    for p, q in sorted(relation, key=lambda pq: (term_key(pq[0]), term_key(pq[1]))):
        if p in l1.inconsistent:
            continue
        reason = None
        for a, targets in sorted(wa1[p].items(), key=lambda item: item[0].sort_key()):
            answers = wa2[q].get(a, frozenset())
            for p2 in sorted(targets, key=term_key):
                count = sum(1 for q2 in answers if (p2, q2) in relation)
                support[(p, q, a, p2)] = count
                if count == 0 and reason is None:
                    reason = Removal(WitnessKind.UNMATCHED_WEAK_STEP, a, p2)
        if reason is not None:
            unsupported.append(((p, q), reason))
    for pair, reason in unsupported:
        drop(pair, reason)

    labels1: Dict[Term, Set[Action]] = {}
    for p2, a in rev1:
        labels1.setdefault(p2, set()).add(a)

    while queue:
        p2, q2 = queue.popleft()
        for a in sorted(labels1.get(p2, ()), key=Action.sort_key):
            if (q2, a) not in rev2:
                continue
            for p in rev1.get((p2, a), ()):
                for q in rev2.get((q2, a), ()):
                    key = (p, q, a, p2)
                    if (p, q) not in relation or key not in support:
                        continue
                    support[key] -= 1
                    if support[key] == 0:
                        drop((p, q), Removal(WitnessKind.UNMATCHED_WEAK_STEP, a, p2))

    console.trace("SIM", f"{len(relation)} pairs retained, {len(removed)} removed")
    return SimRelation(pairs=frozenset(relation), left=l1, right=l2, removed=removed)


def _candidates(sim: SimRelation, q: Term) -> List[Term]:
    return sorted(weak_eps_stable(sim.right, q), key=term_key)


def _explain(sim: SimRelation, p: Term, q: Term, path: Tuple[WeakStep, ...]) -> RefusalWitness:
    """Witness for a stable pair (p, q) outside the relation."""
    reason = sim.removed.get((p, q))
    if reason is None or reason.kind is not WitnessKind.UNMATCHED_WEAK_STEP:
        kind = reason.kind if reason is not None else WitnessKind.READY_SET_MISMATCH
        return RefusalWitness(kind, path, p, q)
    step = WeakStep(p, reason.action, reason.target)
    return RefusalWitness(WitnessKind.UNMATCHED_WEAK_STEP, path + (step,), p, q, reason.action)


def _depth(sim: SimRelation, pair: Pair) -> int:
    reason = sim.removed.get(pair)
    return 1 if reason is not None and reason.kind is WitnessKind.UNMATCHED_WEAK_STEP else 0


def check_refinement(p: Term, q: Term, state_bound: Optional[int] = None) -> RefinementResult:
    """Decides p below q in the ready simulation preorder, with a witness when it fails."""
    l1, l2 = build_lts(p, state_bound), build_lts(q, state_bound)
    return refinement_between(l1, l2)


def refinement_between(l1: Lts, l2: Lts) -> RefinementResult:
    sim = largest_stable_sim(l1, l2)
    p, q = l1.root, l2.root
    answers = _candidates(sim, q)
    for p2 in sorted(weak_eps_stable(l1, p), key=term_key):
        if any((p2, q2) in sim for q2 in answers):
            continue
        path = (WeakStep(p, None, p2),)
        if not answers:
            witness = RefusalWitness(WitnessKind.NO_STABLE_MATCH, path, p2, q)
        else:
            q2 = min(answers, key=lambda t: (_depth(sim, (p2, t)), term_key(t)))
            witness = _explain(sim, p2, q2, path)
        console.trace("SIM", witness.describe(), fg="yellow")
        return RefinementResult(False, sim, witness)
    return RefinementResult(True, sim)


def refines(p: Term, q: Term, state_bound: Optional[int] = None) -> bool:
    return check_refinement(p, q, state_bound).holds


def rs_equiv(p: Term, q: Term, state_bound: Optional[int] = None) -> bool:
    return refines(p, q, state_bound) and refines(q, p, state_bound)


def stably_simulates(p: Term, q: Term, state_bound: Optional[int] = None) -> RefinementResult:
    """The stable preorder on two stable terms."""
    l1, l2 = build_lts(p, state_bound), build_lts(q, state_bound)
    if not (l1.is_stable(p) and l2.is_stable(q)):
        raise ValueError("the stable preorder relates stable terms only")
    sim = largest_stable_sim(l1, l2)
    if (p, q) in sim:
        return RefinementResult(True, sim)
    return RefinementResult(False, sim, _explain(sim, p, q, ()))


def uniform(p: Term, q: Term, state_bound: Optional[int] = None) -> bool:
    """Whether p and q agree on membership of the inconsistency predicate."""
    return (p in build_lts(p, state_bound).inconsistent) == (q in build_lts(q, state_bound).inconsistent)


# --- Checking relations and witnesses ---

def is_stable_ready_simulation(pairs: Iterable[Pair], l1: Lts, l2: Lts) -> bool:
    """Checks the four defining conditions pointwise."""
    relation = set(pairs)
    for p, q in relation:
        if p not in l1 or q not in l2 or not (l1.is_stable(p) and l2.is_stable(q)):
            return False
        if p in l1.inconsistent:
            continue
        if q in l2.inconsistent or ready_set(l1, p) != ready_set(l2, q):
            return False
        for a in ready_set(l1, p):
            answers = weak_act_stable(l2, q, a)
            for p2 in weak_act_stable(l1, p, a):
                if not any((p2, q2) in relation for q2 in answers):
                    return False
    return True


def _step_holds(l: Lts, s: WeakStep) -> bool:
    if s.source not in l:
        return False
    if s.label is None:
        return s.target in weak_eps_stable(l, s.source)
    return s.target in weak_act_stable(l, s.source, s.label)


def replay_witness(w: RefusalWitness, l1: Lts, l2: Lts, sim: Optional[SimRelation] = None) -> bool:
    """Re-checks a witness against the two LTSs."""
    sim = sim or largest_stable_sim(l1, l2)
    if not all(_step_holds(l1, s) for s in w.path):
        return False
    p, q = w.left, w.right
    if w.path and w.path[0].label is None:
        if w.path[0].source != l1.root or w.path[0].target != p:
            return False
        answers = weak_eps_stable(l2, l2.root)
        if any((p, q2) in sim for q2 in answers):
            return False
        if w.kind is WitnessKind.NO_STABLE_MATCH:
            return not answers
        if q not in answers:
            return False
    if w.kind is WitnessKind.INCONSISTENCY_GAP:
        return p not in l1.inconsistent and q in l2.inconsistent
    if w.kind is WitnessKind.READY_SET_MISMATCH:
        return p not in l1.inconsistent and ready_set(l1, p) != ready_set(l2, q)
    if w.kind is WitnessKind.UNMATCHED_WEAK_STEP:
        last = w.path[-1]
        if last.source != p or last.label != w.action:
            return False
        return not any((last.target, q2) in sim for q2 in weak_act_stable(l2, q, w.action))
    return False


# --- JSON ---

class WeakStepModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    source: str = Field(alias="from")
    label: str
    target: str = Field(alias="to")


class WitnessDetail(BaseModel):
    left: str
    right: str
    action: Optional[str] = None


class WitnessDocument(BaseModel):
    kind: str
    path: List[WeakStepModel]
    detail: WitnessDetail


def witness_to_json(w: RefusalWitness) -> str:
    doc = WitnessDocument(
        kind=w.kind.value,
        path=[WeakStepModel(source=str(s.source), label=s.label_name, target=str(s.target)) for s in w.path],
        detail=WitnessDetail(left=str(w.left), right=str(w.right),
                             action=w.action.name if w.action is not None else None),
    )
    return doc.model_dump_json(by_alias=True, exclude_none=True, indent=2)
