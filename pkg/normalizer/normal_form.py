from dataclasses import dataclass
from typing import Tuple

from calculus.terms import (
    Action, Bottom, Prefix, Term, as_guarded_sum, disjuncts_of, is_normal_form, term_key, walk,
)

Summand = Tuple[Action, "NormalForm"]
Disjunct = Tuple[Summand, ...]


@dataclass(frozen=True)
class NormalForm:
    """A term in normal form, read as a disjunction of guarded sums.

    Bottom has no disjuncts. Continuations are read lazily, one layer at a time.
    """
    term: Term

    @property
    def is_bottom(self) -> bool:
        return isinstance(self.term, Bottom)

    @property
    def disjuncts(self) -> Tuple[Disjunct, ...]:
        if self.is_bottom:
            return ()
        return tuple(tuple((a, NormalForm(body)) for a, body in as_guarded_sum(d).summands)
                     for d in disjuncts_of(self.term))

    @classmethod
    def from_term(cls, t: Term) -> "NormalForm":
        if not is_normal_form(t):
            raise ValueError(f"not a normal form: {t}")
        return cls(t)

    def is_canonical(self) -> bool:
        """Disjuncts strictly ordered, summands strictly ordered by action, at every depth."""
        if self.is_bottom:
            return True
        pending = [self.term]
        while pending:
            ds = disjuncts_of(pending.pop())
            keys = [term_key(d) for d in ds]
            if any(k1 >= k2 for k1, k2 in zip(keys, keys[1:])):
                return False
            for d in ds:
                summands = as_guarded_sum(d).summands
                actions = [a.sort_key() for a, _ in summands]
                if any(a1 >= a2 for a1, a2 in zip(actions, actions[1:])):
                    return False
                pending.extend(body for _, body in summands)
        return True

    def __str__(self) -> str:
        return str(self.term)


def normal_form_size(nf: NormalForm) -> int:
    """Number of prefixes in the normal form, counted through all continuations."""
    return sum(isinstance(node, Prefix) for node in walk(nf.term))
