import random
from dataclasses import dataclass
from typing import FrozenSet, List, Sequence, Tuple, Union

from calculus.terms import (
    BOTTOM, NIL, TAU, Action, Conj, Disj, ExtChoice, Par, Prefix, Term, act, fold_choice,
    replace_at, subterms,
)


@dataclass(frozen=True)
class Context:
    """A term with one designated position to plug another term into."""
    frame: Term
    path: Tuple[int, ...]

    def fill(self, t: Term) -> Term:
        return replace_at(self.frame, self.path, t)


class TermGenerator:
    """
    Seeded source of random terms over a fixed alphabet.
    Every draw goes through one `random.Random`, so equal seeds give equal terms.
    """
    def __init__(self, seed: Union[int, str], alphabet: Sequence[str]):
        if not alphabet:
            raise ValueError("alphabet must not be empty")
        self.rng = random.Random(seed)
        self.alphabet: Tuple[Action, ...] = tuple(act(name) for name in sorted(set(alphabet)))

    def action(self, allow_tau: bool = True) -> Action:
        if allow_tau and self.rng.random() < 0.2:
            return TAU
        return self.rng.choice(self.alphabet)

    def sync(self) -> FrozenSet[Action]:
        return frozenset(a for a in self.alphabet if self.rng.random() < 0.5)

    def term(self, size: int, basic_only: bool = False) -> Term:
        """A term of at most `size` operator symbols."""
        if size < 1:
            raise ValueError("size must be at least 1")
        return self._exact(self.rng.randint(1, size), basic_only)

    def _exact(self, n: int, basic_only: bool) -> Term:
        if n == 1:
            if basic_only or self.rng.random() < 0.75:
                return NIL
            return BOTTOM
        if n == 2:
            return Prefix(self.action(), self._exact(1, basic_only))
        kinds = ["prefix", "prefix", "choice", "disj", "par"]
        if not basic_only:
            kinds.append("conj")
        kind = self.rng.choice(kinds)
        if kind == "prefix":
            return Prefix(self.action(), self._exact(n - 1, basic_only))
        k = self.rng.randint(1, n - 2)
        left, right = self._exact(k, basic_only), self._exact(n - 1 - k, basic_only)
        if kind == "choice":
            return ExtChoice(left, right)
        if kind == "disj":
            return Disj(left, right)
        if kind == "conj":
            return Conj(left, right)
        return Par(left, right, self.sync())

    def guarded_sum(self, actions: Sequence[Action], size: int, basic_only: bool = False) -> Term:
        """Left-nested choice of `actions`-prefixes with random continuations."""
        return fold_choice([Prefix(a, self.term(size, basic_only)) for a in actions])

    def actions(self, count: int, distinct: bool = False) -> List[Action]:
        if distinct:
            pool = list(self.alphabet)
            self.rng.shuffle(pool)
            return pool[:count]
        return [self.action(allow_tau=False) for _ in range(count)]

    def context(self, size: int) -> Context:
        frame = self.term(max(size, 1))
        positions = [path for path, _ in subterms(frame)]
        return Context(frame, self.rng.choice(positions))


def gen_term(seed: int, size: int, alphabet: Sequence[str], basic_only: bool = False) -> Term:
    """Deterministic random term of at most `size` operators."""
    return TermGenerator(seed, alphabet).term(size, basic_only)
