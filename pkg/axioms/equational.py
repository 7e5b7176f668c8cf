"""
Equational reasoning on top of raw proof nodes.

An `Equation` pairs the two inequality proofs of `lhs = rhs`. The derived
lemmas here are the building blocks the normalizer and the prover share.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

from axioms.proofs import Direction, Proof, Refl, axiom, context, refl, trans, trans_chain
from axioms.schemas import expansion, is_equational, match_axiom, nary_arity, try_match
from calculus.terms import (
    BOTTOM, Action, Conj, Disj, ExtChoice, Operator, Par, Prefix, Term, flatten, fold_left, operator_of,
    term_at,
)
from core.errors import AxiomMismatch, InternalInvariantError

COMMUTATIVITY = {ExtChoice: "EC1", Disj: "DI1", Conj: "CO1", Par: "PA1"}
DISTRIBUTIVITY = {ExtChoice: "DS1", Conj: "DS2", Par: "DS3"}


@dataclass(frozen=True, eq=False)
class Equation:
    fwd: Proof
    bwd: Proof

    @property
    def lhs(self) -> Term:
        return self.fwd.lhs

    @property
    def rhs(self) -> Term:
        return self.fwd.rhs

    @classmethod
    def refl(cls, t: Term) -> "Equation":
        r = refl(t)
        return cls(r, r)

    @property
    def is_trivial(self) -> bool:
        return isinstance(self.fwd, Refl) and isinstance(self.bwd, Refl)

    def then(self, other: "Equation") -> "Equation":
        if self.rhs != other.lhs:
            raise InternalInvariantError(f"equations do not compose: {self.rhs} vs {other.lhs}")
        return Equation(trans(self.fwd, other.fwd), trans(other.bwd, self.bwd))

    def flipped(self) -> "Equation":
        return Equation(self.bwd, self.fwd)


def chain(equations: Sequence[Equation], start: Optional[Term] = None) -> Equation:
    """Composes consecutive equations as balanced TRANS trees."""
    eqs = [e for e in equations if not e.is_trivial]
    if not eqs:
        return Equation.refl(start if start is not None else equations[0].lhs)
    for a, b in zip(eqs, eqs[1:]):
        if a.rhs != b.lhs:
            raise InternalInvariantError(f"equations do not compose: {a.rhs} vs {b.lhs}")
    return Equation(trans_chain([e.fwd for e in eqs]), trans_chain([e.bwd for e in reversed(eqs)]))


def axiom_step(name: str, lhs: Term, rhs: Term) -> Proof:
    """A single checked axiom instance lhs <= rhs, direction detected."""
    arity = None
    for direction in (Direction.L2R, Direction.R2L):
        if try_match(name, direction, lhs, rhs) is not None:
            if name in ("ECC1", "ECC2", "ECC3", "EXP1", "EXP2"):
                arity = nary_arity(name, lhs, rhs, direction)
            return axiom(name, lhs, rhs, direction, arity)
    try:
        match_axiom(name, Direction.L2R, lhs, rhs)
    except AxiomMismatch as e:
        raise InternalInvariantError(f"generated step is not an instance: {e}") from None
    raise InternalInvariantError(f"{name}: {lhs} <= {rhs} is not an instance")


def by_axiom(name: str, lhs: Term, rhs: Term) -> Equation:
    """lhs = rhs by one equational axiom."""
    if not is_equational(name):
        raise InternalInvariantError(f"{name} is inequational")
    return Equation(axiom_step(name, lhs, rhs), axiom_step(name, rhs, lhs))


def within(operator: Operator, parts: Sequence[Equation]) -> Equation:
    """One CONTEXT layer over both directions."""
    return Equation(context(operator, [e.fwd for e in parts]), context(operator, [e.bwd for e in parts]))


def at(t: Term, index: int, eq: Equation) -> Equation:
    """Rewrites child `index` of t's top operator."""
    parts = [Equation.refl(c) for c in t.children()]
    if parts[index].lhs != eq.lhs:
        raise InternalInvariantError("rewritten child does not match")
    parts[index] = eq
    return within(operator_of(t), parts)


def at_path(t: Term, path: Sequence[int], eq: Equation) -> Equation:
    """Rewrites the subterm of t at `path`, one CONTEXT layer per step."""
    spine = [t]
    for index in path[:-1]:
        spine.append(spine[-1].children()[index])
    for node, index in zip(reversed(spine), reversed(path)):
        eq = at(node, index, eq)
    return eq


def rebuild_with(t: Term, parts: Sequence[Equation]) -> Equation:
    return within(operator_of(t), parts)


# --- Derived lemmas ---

def commute(t: Term) -> Equation:
    """x op y = y op x."""
    return by_axiom(COMMUTATIVITY[type(t)], t, operator_of(t).apply([t.right, t.left]))


def upper_bound(x: Term, y: Term, right: bool = False) -> Proof:
    """x <= x \\/ y, or with `right` y <= x \\/ y."""
    if not right:
        return axiom_step("DI5", x, Disj(x, y))
    return trans(axiom_step("DI5", y, Disj(y, x)), axiom_step("DI1", Disj(y, x), Disj(x, y)))


def join(left: Proof, right: Proof) -> Proof:
    """From p <= r and q <= r derive p \\/ q <= r."""
    if left.rhs != right.rhs:
        raise InternalInvariantError("join needs a common upper bound")
    r = left.rhs
    return trans(context(Operator(Disj), [left, right]), axiom_step("DI3", Disj(r, r), r))


def bottom_leq(t: Term) -> Proof:
    """bot <= t."""
    return trans_chain([
        axiom_step("DI5", BOTTOM, Disj(BOTTOM, t)),
        axiom_step("DI1", Disj(BOTTOM, t), Disj(t, BOTTOM)),
        axiom_step("DI4", Disj(t, BOTTOM), t),
    ])


def disjunct_leq(items: Sequence[Term], index: int) -> Proof:
    """items[index] <= the left-nested disjunction of items."""
    prefix = fold_left(items[:index + 1], Disj)
    steps = [refl(items[index])] if index == 0 else \
        [upper_bound(fold_left(items[:index], Disj), items[index], right=True)]
    for k in range(index + 1, len(items)):
        steps.append(axiom_step("DI5", prefix, Disj(prefix, items[k])))
        prefix = Disj(prefix, items[k])
    return trans_chain(steps)


def _sync_op(kind: type, t: Term) -> Operator:
    return Operator(Par, sync=t.sync) if kind is Par else Operator(kind)


def distribute(t: Term) -> Equation:
    """x op (y \\/ z) = (x op y) \\/ (x op z) for op in choice, conjunction, parallel."""
    kind = type(t)
    op = _sync_op(kind, t)
    x, y, z = t.left, t.right.left, t.right.right
    xy, xz = op.apply([x, y]), op.apply([x, z])
    fwd = axiom_step(DISTRIBUTIVITY[kind], t, Disj(xy, xz))
    bwd = join(context(op, [refl(x), upper_bound(y, z)]), context(op, [refl(x), upper_bound(y, z, right=True)]))
    return Equation(fwd, bwd)


def distribute_left(t: Term) -> Equation:
    """(y \\/ z) op x = (y op x) \\/ (z op x)."""
    swapped = commute(t)
    spread = distribute(swapped.rhs)
    back = within(Operator(Disj), [commute(spread.rhs.left), commute(spread.rhs.right)])
    return chain([swapped, spread, back])


def distribute_all(t: Term) -> Equation:
    """Spreads a binary operator over all disjuncts of both operands."""
    if isinstance(t.right, Disj):
        first = distribute(t)
    elif isinstance(t.left, Disj):
        first = distribute_left(t)
    else:
        return Equation.refl(t)
    spread = first.rhs
    return first.then(within(Operator(Disj), [distribute_all(spread.left), distribute_all(spread.right)]))


def merge_prefixes(a: Action, x: Term, y: Term) -> Equation:
    """a.x [] a.y = a.(x \\/ y), with x and y basic."""
    xy = Disj(x, y)
    prefix = Operator(Prefix, action=a)
    lifted = context(Operator(ExtChoice), [context(prefix, [upper_bound(x, y)]),
                                          context(prefix, [upper_bound(x, y, right=True)])])
    target = Prefix(a, xy)
    fwd = trans(lifted, axiom_step("EC3", ExtChoice(target, target), target))
    bwd = axiom_step("DS4", target, ExtChoice(Prefix(a, x), Prefix(a, y)))
    return Equation(fwd, bwd)


def expand(t: Par) -> Equation:
    """Expansion of a parallel composition of two basic guarded sums."""
    rhs = expansion(t.left, t.right, t.sync)
    return Equation(axiom_step("EXP1", t, rhs), axiom_step("EXP2", rhs, t))


def map_leaves(t: Term, kind: type, f: Callable[[Term], Equation]) -> Equation:
    """Rewrites every maximal non-`kind` operand of a `kind` nest."""
    done: Dict[int, Equation] = {}
    stack = [t]
    while stack:
        node = stack[-1]
        if type(node) is not kind:
            done[id(stack.pop())] = f(node)
        elif id(node.left) in done and id(node.right) in done:
            stack.pop()
            done[id(node)] = rebuild_with(node, [done[id(node.left)], done[id(node.right)]])
        else:
            stack.extend(c for c in (node.right, node.left) if id(c) not in done)
    return done[id(t)]


# --- Reordering under associativity and commutativity ---

ASSOCIATIVITY = {ExtChoice: "EC2", Disj: "DI2"}


def left_nest(t: Term, kind: type) -> Equation:
    """t = the left-nested `kind` nest of its flattened operands."""
    if type(t) is not kind:
        return Equation.refl(t)
    lhs = rebuild_with(t, [left_nest(t.left, kind), left_nest(t.right, kind)])
    return lhs.then(_append(lhs.rhs, kind))


def _append(t: Term, kind: type) -> Equation:
    """A op R = fold(A's operands + R's operands) for left-nested A and R."""
    right = t.right
    if type(right) is not kind:
        return Equation.refl(t)
    # A op (B op r) = (A op B) op r
    regrouped = kind(kind(t.left, right.left), right.right)
    step = by_axiom(ASSOCIATIVITY[kind], t, regrouped)
    return step.then(at(regrouped, 0, _append(regrouped.left, kind)))


def _swap(items: List[Term], i: int, kind: type) -> Equation:
    """Swaps operands i and i+1 of the left-nested nest of items."""
    whole = fold_left(items, kind)
    depth = len(items) - (i + 2)
    local = term_at(whole, (0,) * depth)
    if i == 0:
        eq = commute(local)
    else:
        f, x, y = local.left.left, local.left.right, local.right
        grouped = kind(f, kind(x, y))
        eq = chain([
            by_axiom(ASSOCIATIVITY[kind], local, grouped),
            at(grouped, 1, commute(grouped.right)),
            by_axiom(ASSOCIATIVITY[kind], kind(f, kind(y, x)), kind(kind(f, y), x)),
        ])
    return at_path(whole, (0,) * depth, eq)


def permute(items: Sequence[Term], target: Sequence[Term], kind: type) -> Equation:
    """fold(items) = fold(target) by adjacent swaps; target must be a permutation."""
    current = list(items)
    # stable assignment of target positions to equal operands
    slots = {}
    for pos, t in enumerate(target):
        slots.setdefault(t, []).append(pos)
    rank = [slots[t].pop(0) for t in current]
    steps = [Equation.refl(fold_left(current, kind))]
    changed = True
    while changed:
        changed = False
        for i in range(len(current) - 1):
            if rank[i] > rank[i + 1]:
                steps.append(_swap(current, i, kind))
                current[i], current[i + 1] = current[i + 1], current[i]
                rank[i], rank[i + 1] = rank[i + 1], rank[i]
                changed = True
    return chain(steps)


def reorder_proof(src: Term, dst: Term) -> Optional[Equation]:
    """src = dst by commutativity and associativity of [] or \\/ alone.

    Absent unless the flattened operands of src and dst agree as multisets.
    """
    if src == dst:
        return Equation.refl(src)
    for kind in (ExtChoice, Disj):
        items, target = flatten(src, kind), flatten(dst, kind)
        if len(items) < 2 or Counter(items) != Counter(target):
            continue
        return chain([left_nest(src, kind), permute(items, target, kind), left_nest(dst, kind).flipped()])
    return None


def collapse_adjacent(items: Sequence[Term], i: int, kind: type, idempotence: str) -> Equation:
    """Merges equal operands i and i+1 of a left-nested nest."""
    whole = fold_left(items, kind)
    depth = len(items) - (i + 2)
    local = term_at(whole, (0,) * depth)
    if i == 0:
        eq = by_axiom(idempotence, local, local.left)
    else:
        f, x = local.left.left, local.right
        grouped = kind(f, kind(x, x))
        eq = by_axiom(ASSOCIATIVITY[kind], local, grouped).then(at(grouped, 1, by_axiom(idempotence, kind(x, x), x)))
    return at_path(whole, (0,) * depth, eq)


def drop_last(items: Sequence[Term], kind: type, unit: str) -> Equation:
    """fold(items) = fold(items[:-1]) when the last operand is a unit."""
    whole = fold_left(items, kind)
    return by_axiom(unit, whole, whole.left)
