"""
Normalization with proofs.

Every step rewrites a term into its canonical normal form and returns the
`Equation` that justifies it. Subterms are normalized first, so whenever two
continuations are merged under one prefix they are already basic.
"""

from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from axioms.equational import (
    Equation, at, at_path, axiom_step, by_axiom, chain, collapse_adjacent, commute, distribute_all,
    drop_last, expand, map_leaves, merge_prefixes, rebuild_with, reorder_proof,
)
from calculus.terms import (
    BOTTOM, NIL, Action, Bottom, Conj, Disj, ExtChoice, GuardedSum, Nil, Par, Prefix, Term,
    as_guarded_sum, flatten, fold_choice, fold_left, prefix_set, term_at, term_key,
)
from core import console
from core.errors import InternalInvariantError
from normalizer.normal_form import NormalForm

_ZEROS = {ExtChoice: "EC5", Conj: "CO3", Par: "PA2"}


def _contains_bottom(t: Term) -> bool:
    return any(isinstance(x, Bottom) for x in flatten(t, ExtChoice))


def _summand_key(p: Term) -> tuple:
    return (p.action.sort_key(), term_key(p.body))


class Normalizer:
    """Proof-producing normalizer; results are cached per term."""

    def __init__(self):
        self._cache: Dict[Term, Equation] = {}

    def normalize(self, t: Term) -> Equation:
        stack = [t]
        while stack:
            node = stack[-1]
            if node in self._cache:
                stack.pop()
                continue
            pending = [c for c in node.children() if c not in self._cache]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            self._cache[node] = self._rewrite(node)
        return self._cache[t]

    def _rewrite(self, t: Term) -> Equation:
        """t's operands are already in the cache."""
        if isinstance(t, (Nil, Bottom)):
            return Equation.refl(t)
        if isinstance(t, Prefix):
            return self._prefix(t)
        lifted = rebuild_with(t, [self._cache[t.left], self._cache[t.right]])
        return lifted.then(self._binary(lifted.rhs))

    def _prefix(self, t: Prefix) -> Equation:
        lifted = at(t, 0, self._cache[t.body])
        u = lifted.rhs
        if isinstance(u.body, Bottom):
            return lifted.then(by_axiom("PR1" if u.action.is_visible else "PR2", u, BOTTOM))
        if u.action.is_tau:
            return lifted.then(by_axiom("PR2", u, u.body))
        return lifted

    def _binary(self, u: Term) -> Equation:
        """u has canonical operands."""
        if isinstance(u, Disj):
            return self.canon_disjunction(u)
        zero = _ZEROS[type(u)]
        if isinstance(u.right, Bottom):
            return by_axiom(zero, u, BOTTOM)
        if isinstance(u.left, Bottom):
            swapped = commute(u)
            return swapped.then(by_axiom(zero, swapped.rhs, BOTTOM))
        if isinstance(u, ExtChoice):
            return self._spread(u, self.merge_sums)
        if isinstance(u, Conj):
            return self._spread(u, self._conj_pair)
        return self._spread(u, self._par_pair)

    def _spread(self, u: Term, pair: Callable[[Term], Equation]) -> Equation:
        spread = distribute_all(u)
        paired = map_leaves(spread.rhs, Disj, pair)
        return chain([spread, paired, self.canon_disjunction(paired.rhs)], start=u)

    # --- disjunctions ---

    def canon_disjunction(self, u: Term) -> Equation:
        """Sorts, deduplicates and drops bot from a disjunction of canonical sums."""
        leaves = flatten(u, Disj)
        if len(leaves) == 1:
            return Equation.refl(u)
        sums = sorted((x for x in leaves if not isinstance(x, Bottom)), key=term_key)
        items = sums + [BOTTOM] * (len(leaves) - len(sums))
        reorder = reorder_proof(u, fold_left(items, Disj))
        if reorder is None:
            raise InternalInvariantError(f"cannot reorder {u}")
        steps = [reorder]
        while len(items) > 1 and isinstance(items[-1], Bottom):
            steps.append(drop_last(items, Disj, "DI4"))
            items = items[:-1]
        i = 0
        while i < len(items) - 1:
            if items[i] == items[i + 1]:
                steps.append(collapse_adjacent(items, i, Disj, "DI3"))
                del items[i + 1]
            else:
                i += 1
        return chain(steps, start=u)

    # --- external choice ---

    def merge_sums(self, u: Term) -> Equation:
        """A choice of canonical prefixes and zeros as one canonical guarded sum."""
        leaves = flatten(u, ExtChoice)
        prefixes = sorted((p for p in leaves if isinstance(p, Prefix)), key=_summand_key)
        if len(prefixes) + sum(isinstance(p, Nil) for p in leaves) != len(leaves):
            raise InternalInvariantError(f"not a choice of prefixes: {u}")
        items: List[Term] = prefixes + [NIL] * (len(leaves) - len(prefixes))
        steps = []
        if len(leaves) > 1:
            reorder = reorder_proof(u, fold_left(items, ExtChoice))
            if reorder is None:
                raise InternalInvariantError(f"cannot reorder {u}")
            steps.append(reorder)
        while len(items) > 1 and isinstance(items[-1], Nil):
            steps.append(drop_last(items, ExtChoice, "EC4"))
            items = items[:-1]
        i = 0
        while i < len(items) - 1:
            if items[i].action == items[i + 1].action:
                eq, merged = self._merge_at(items, i)
                steps.append(eq)
                items[i] = merged
                del items[i + 1]
            else:
                i += 1
        return chain(steps, start=u)

    def _merge_at(self, items: List[Term], i: int) -> Tuple[Equation, Term]:
        whole = fold_left(items, ExtChoice)
        depth = len(items) - (i + 2)
        local = term_at(whole, (0,) * depth)
        if i == 0:
            eq = self._merge_pair(local)
        else:
            grouped = ExtChoice(local.left.left, ExtChoice(local.left.right, local.right))
            eq = by_axiom("EC2", local, grouped).then(at(grouped, 1, self._merge_pair(grouped.right)))
        return at_path(whole, (0,) * depth, eq), term_at(eq.rhs, (1,) if i else ())

    def _merge_pair(self, pair: ExtChoice) -> Equation:
        # a.x [] a.y = a.(x \/ y) needs basic x and y; both are canonical here
        a, x, y = pair.left.action, pair.left.body, pair.right.body
        merged = merge_prefixes(a, x, y)
        return merged.then(at(merged.rhs, 0, self.canon_disjunction(merged.rhs.body)))

    # --- conjunction ---

    def _conj_pair(self, u: Conj) -> Equation:
        s1, s2 = as_guarded_sum(u.left), as_guarded_sum(u.right)
        if prefix_set(s1) != prefix_set(s2):
            return by_axiom("ECC1", u, BOTTOM)
        if not s1.summands:
            return by_axiom("CO2", u, u.left)
        zipped = fold_choice([Prefix(a, Conj(x, y)) for (a, x), (_, y) in zip(s1.summands, s2.summands)])
        zip_eq = Equation(axiom_step("ECC3", u, zipped), axiom_step("ECC2", zipped, u))
        inner = map_leaves(zipped, ExtChoice, lambda p: at(p, 0, self.normalize(p.body)))
        steps = [zip_eq, inner]
        result = inner.rhs
        if any(isinstance(p.body, Bottom) for p in flatten(result, ExtChoice)):
            lifted = map_leaves(result, ExtChoice,
                                lambda p: by_axiom("PR1", p, BOTTOM) if isinstance(p.body, Bottom) else Equation.refl(p))
            steps += [lifted, self._collapse_bottom(lifted.rhs)]
        return chain(steps, start=u)

    def _collapse_bottom(self, t: Term) -> Equation:
        """A choice with a bot operand equals bot."""
        if isinstance(t, Bottom):
            return Equation.refl(t)
        if _contains_bottom(t.right):
            inner = at(t, 1, self._collapse_bottom(t.right))
            return inner.then(by_axiom("EC5", inner.rhs, BOTTOM))
        inner = at(t, 0, self._collapse_bottom(t.left))
        swapped = commute(inner.rhs)
        return chain([inner, swapped, by_axiom("EC5", swapped.rhs, BOTTOM)])

    # --- parallel composition ---

    def _par_pair(self, u: Par) -> Equation:
        expanded = expand(u)

        def continuation(p: Term) -> Equation:
            if isinstance(p, Nil):
                return Equation.refl(p)
            body = self.normalize(p.body)
            if isinstance(body.rhs, Bottom):
                raise InternalInvariantError(f"parallel continuation of basic terms became bot: {p.body}")
            return at(p, 0, body)

        inner = map_leaves(expanded.rhs, ExtChoice, continuation)
        return chain([expanded, inner, self.merge_sums(inner.rhs)], start=u)


def normalize(t: Term, normalizer: Optional[Normalizer] = None) -> Tuple[NormalForm, Equation]:
    """Canonical normal form of t with the proof of t = term(nf)."""
    eq = (normalizer or Normalizer()).normalize(t)
    nf = NormalForm.from_term(eq.rhs)
    console.trace("NF", f"{t} = {nf}")
    return nf, eq


def conj_nf(x: NormalForm, y: NormalForm) -> Tuple[NormalForm, Equation]:
    """Normal form of the conjunction of two consistent normal forms.

    Works on terms: the conjunction is rebuilt and put through a fresh
    Normalizer, whose operands are already canonical. Raises ValueError on bot.
    """
    if x.is_bottom or y.is_bottom:
        raise ValueError("conj_nf takes two consistent normal forms")
    return normalize(Conj(x.term, y.term))


def par_nf(x: NormalForm, y: NormalForm, sync: FrozenSet[Action]) -> Tuple[NormalForm, Equation]:
    """Like conj_nf, for the parallel composition synchronising on `sync`."""
    if x.is_bottom or y.is_bottom:
        raise ValueError("par_nf takes two consistent normal forms")
    return normalize(Par(x.term, y.term, frozenset(sync)))


def choice_nf(x: GuardedSum, y: GuardedSum) -> Tuple[GuardedSum, Equation]:
    """Merges two guarded sums with canonical continuations into one.

    Runs the normalizer's sum-merging pass on the rebuilt choice, not the
    whole normalizer.
    """
    eq = Normalizer().merge_sums(ExtChoice(x.term, y.term))
    return as_guarded_sum(eq.rhs), eq
