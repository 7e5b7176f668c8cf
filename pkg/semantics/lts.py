"""
Reachable state graphs with the inconsistency predicate.

An `Lts` is built once from a root term and is immutable afterwards; weak
transition queries are memoised on the instance.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field

from calculus.terms import Action, Bottom, Conj, Disj, ExtChoice, Par, Prefix, Term, TAU
from core import console
from core.errors import StateLimitExceeded, UnknownStateError
from semantics.transitions import Step, step

DEFAULT_STATE_BOUND = 100000

Transition = Tuple[Term, Action, Term]


@dataclass(frozen=True, eq=False)
class Lts:
    root: Term
    order: Tuple[Term, ...]
    successors: Dict[Term, Tuple[Step, ...]]
    inconsistent: FrozenSet[Term]
    _eps: Dict[Term, FrozenSet[Term]] = field(default_factory=dict, repr=False)

    @property
    def states(self) -> FrozenSet[Term]:
        return frozenset(self.order)

    @property
    def transitions(self) -> FrozenSet[Transition]:
        return frozenset((p, a, q) for p in self.order for a, q in self.successors[p])

    def __contains__(self, p: Term) -> bool:
        return p in self.successors

    def __len__(self) -> int:
        return len(self.order)

    def succ(self, p: Term) -> Tuple[Step, ...]:
        try:
            return self.successors[p]
        except KeyError:
            raise UnknownStateError(p) from None

    def is_stable(self, p: Term) -> bool:
        return all(a.is_visible for a, _ in self.succ(p))

    def is_inconsistent(self, p: Term) -> bool:
        self.succ(p)
        return p in self.inconsistent


def build_lts(t: Term, state_bound: Optional[int] = None) -> Lts:
    """Explores every state reachable from t, then computes F over them."""
    bound = state_bound or DEFAULT_STATE_BOUND
    successors: Dict[Term, Tuple[Step, ...]] = {}
    order: List[Term] = []
    queue = deque([t])
    successors[t] = ()
    while queue:
        p = queue.popleft()
        order.append(p)
        steps = step(p)
        successors[p] = steps
        for _, q in steps:
            if q not in successors:
                if len(successors) >= bound:
                    raise StateLimitExceeded(bound, len(successors))
                successors[q] = ()
                queue.append(q)

    transitions = [(p, a, q) for p in order for a, q in successors[p]]
    inconsistent = compute_f(order, transitions)
    console.trace("LTS", f"{len(order)} states, {len(transitions)} transitions, {len(inconsistent)} inconsistent")
    return Lts(root=t, order=tuple(order), successors=successors, inconsistent=frozenset(inconsistent))


# --- Inconsistency predicate ---

def _stable_descendants(p: Term, succ, memo: Dict[Term, FrozenSet[Term]]) -> FrozenSet[Term]:
    """Stable ends of plain tau-paths from p, F ignored."""
    stack = [p]
    while stack:
        node = stack[-1]
        if node in memo:
            stack.pop()
            continue
        taus = [q for a, q in succ(node) if a.is_tau]
        pending = [q for q in taus if q not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        memo[node] = frozenset([node]) if not taus else frozenset().union(*(memo[q] for q in taus))
    return memo[p]


def compute_f(states: Iterable[Term], transitions: Iterable[Transition]) -> Set[Term]:
    """Least set closed under the predicative rules, restricted to `states`.

    Syntactic rules look at immediate subterms, which need not be reachable
    from any given state, so the fixpoint runs over the closure of `states`
    under both transitions and subterms. Terms outside the given graph take
    their transitions from `step`.
    """
    states = list(states)
    given: Dict[Term, List[Step]] = {p: [] for p in states}
    for p, a, q in transitions:
        given.setdefault(p, []).append((a, q))

    def succ(p: Term):
        return given[p] if p in given else step(p)

    universe: Set[Term] = set()
    parents: Dict[Term, Set[Term]] = {}
    preds: Dict[Term, Set[Term]] = {}
    frontier = list(given)
    while frontier:
        p = frontier.pop()
        if p in universe:
            continue
        universe.add(p)
        for child in p.children():
            parents.setdefault(child, set()).add(p)
            frontier.append(child)
        for _, q in succ(p):
            preds.setdefault(q, set()).add(p)
            frontier.append(q)

    # conjunctions with a tau-step are watched by their stable descendants
    memo: Dict[Term, FrozenSet[Term]] = {}
    watchers: Dict[Term, Set[Term]] = {}
    descendants: Dict[Term, FrozenSet[Term]] = {}
    for p in universe:
        if isinstance(p, Conj) and any(a.is_tau for a, _ in succ(p)):
            descendants[p] = _stable_descendants(p, succ, memo)
            for s in descendants[p]:
                watchers.setdefault(s, set()).add(p)

    inconsistent: Set[Term] = set()

    def fires(p: Term) -> bool:
        if isinstance(p, Bottom):
            return True
        if isinstance(p, Prefix):
            return p.body in inconsistent
        if isinstance(p, Disj):
            return p.left in inconsistent and p.right in inconsistent
        if isinstance(p, (ExtChoice, Par)):
            return p.left in inconsistent or p.right in inconsistent
        if isinstance(p, Conj):
            return _conj_fires(p)
        return False

    def _conj_fires(p: Conj) -> bool:
        if p.left in inconsistent or p.right in inconsistent:
            return True
        steps = succ(p)
        left_steps, right_steps = succ(p.left), succ(p.right)
        left_stable = all(a.is_visible for a, _ in left_steps)
        right_stable = all(a.is_visible for a, _ in right_steps)
        if left_stable and right_stable and {a for a, _ in left_steps} != {a for a, _ in right_steps}:
            return True
        by_label: Dict[Action, List[Term]] = {}
        for a, q in steps:
            by_label.setdefault(a, []).append(q)
        if any(all(q in inconsistent for q in targets) for targets in by_label.values()):
            return True
        if p in descendants:
            return all(s in inconsistent for s in descendants[p])
        return False

    queue = deque(universe)
    queued = set(universe)
    while queue:
        p = queue.popleft()
        queued.discard(p)
        if p in inconsistent or not fires(p):
            continue
        inconsistent.add(p)
        for dependent in parents.get(p, set()) | preds.get(p, set()) | watchers.get(p, set()):
            if dependent not in inconsistent and dependent not in queued:
                queued.add(dependent)
                queue.append(dependent)

    return {p for p in given if p in inconsistent}


# --- Queries ---

def ready_set(l: Lts, p: Term) -> FrozenSet[Action]:
    return frozenset(a for a, _ in l.succ(p))


def stable_states(l: Lts) -> Tuple[Term, ...]:
    return tuple(p for p in l.order if l.is_stable(p))


def weak_eps_stable(l: Lts, p: Term) -> FrozenSet[Term]:
    """Stable q reachable from p along a tau-path that avoids F throughout."""
    l.succ(p)
    if p in l.inconsistent:
        return frozenset()
    cached = l._eps.get(p)
    if cached is not None:
        return cached
    stack = [p]
    while stack:
        node = stack[-1]
        if node in l._eps:
            stack.pop()
            continue
        taus = [q for a, q in l.successors[node] if a.is_tau and q not in l.inconsistent]
        pending = [q for q in taus if q not in l._eps]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        if l.is_stable(node):
            l._eps[node] = frozenset([node])
        else:
            l._eps[node] = frozenset().union(*(l._eps[q] for q in taus))
    return l._eps[p]


def weak_act_stable(l: Lts, p: Term, a: Action) -> FrozenSet[Term]:
    """Stable q with p =eps=> r -a-> s =eps=> q, every state consistent."""
    out: Set[Term] = set()
    for r in weak_eps_stable(l, p):
        for label, s in l.successors[r]:
            if label == a:
                out.update(weak_eps_stable(l, s))
    return frozenset(out)


def weak_tau_stable(l: Lts, p: Term) -> FrozenSet[Term]:
    """Like weak_eps_stable, but at least one tau-step must be taken."""
    steps = l.succ(p)
    if p in l.inconsistent:
        return frozenset()
    out: Set[Term] = set()
    for label, q in steps:
        if label.is_tau:
            out.update(weak_eps_stable(l, q))
    return frozenset(out)


# --- LLTS conditions ---

def check_llts(l: Lts) -> List[str]:
    """Violated well-formedness conditions of l, as readable messages."""
    violations: List[str] = []
    for p in l.order:
        labels = ready_set(l, p)
        if TAU in labels and len(labels) > 1:
            violations.append(f"tau-purity: {p} has tau and visible transitions")
        targets: Dict[Action, List[Term]] = {}
        for a, q in l.successors[p]:
            targets.setdefault(a, []).append(q)
        inconsistent = p in l.inconsistent
        for a, qs in targets.items():
            if not inconsistent and all(q in l.inconsistent for q in qs):
                violations.append(f"LTS1: every {a}-target of {p} is inconsistent but {p} is not")
        if not inconsistent and not weak_eps_stable(l, p):
            violations.append(f"LTS2: {p} has no consistent stable eps-descendant")
        if inconsistent and TAU in targets and not all(q in l.inconsistent for q in targets[TAU]):
            violations.append(f"tau-targets of inconsistent {p} are not all inconsistent")
    if not _tau_acyclic(l):
        violations.append("tau-subgraph has a cycle")
    return violations


def _tau_acyclic(l: Lts) -> bool:
    indegree = {p: 0 for p in l.order}
    for p in l.order:
        for a, q in l.successors[p]:
            if a.is_tau:
                indegree[q] += 1
    ready = deque(p for p, d in indegree.items() if d == 0)
    seen = 0
    while ready:
        p = ready.popleft()
        seen += 1
        for a, q in l.successors[p]:
            if a.is_tau:
                indegree[q] -= 1
                if indegree[q] == 0:
                    ready.append(q)
    return seen == len(l.order)


# --- Export ---

class StateModel(BaseModel):
    id: int
    term: str
    stable: bool
    inconsistent: bool


class TransitionModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    source: int = Field(alias="from")
    label: str
    target: int = Field(alias="to")


class LtsDocument(BaseModel):
    root: int
    states: List[StateModel]
    transitions: List[TransitionModel]


def _ids(l: Lts) -> Dict[Term, int]:
    return {p: i for i, p in enumerate(l.order)}


def lts_to_json(l: Lts) -> str:
    ids = _ids(l)
    doc = LtsDocument(
        root=ids[l.root],
        states=[StateModel(id=ids[p], term=str(p), stable=l.is_stable(p), inconsistent=p in l.inconsistent)
                for p in l.order],
        transitions=[TransitionModel(source=ids[p], label=a.name, target=ids[q])
                     for p in l.order for a, q in l.successors[p]],
    )
    return doc.model_dump_json(by_alias=True, indent=2)


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def lts_to_dot(l: Lts) -> str:
    ids = _ids(l)
    lines = ["digraph lts {", "  node [shape=ellipse];", "  init [shape=point];", f"  init -> s{ids[l.root]};"]
    for p in l.order:
        attrs = [f'label="{_dot_escape(str(p))}"']
        if p in l.inconsistent:
            attrs.append("peripheries=2")
        lines.append(f"  s{ids[p]} [{', '.join(attrs)}];")
    for p in l.order:
        for a, q in l.successors[p]:
            style = ", style=dashed" if a.is_tau else ""
            lines.append(f'  s{ids[p]} -> s{ids[q]} [label="{a.name}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def is_consistent(t: Term, state_bound: Optional[int] = None) -> bool:
    """Whether t is outside the inconsistency predicate."""
    return t not in build_lts(t, state_bound).inconsistent
