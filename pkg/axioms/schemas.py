"""
Axiom schemas and their ground-instance matcher.

Single-operator schemas are written as small pattern trees over the
metavariables `x`, `y`, `z`, a visible-action metavariable `a` and one
synchronisation-set metavariable per schema. The n-ary schemas over general
external choices are matched against the left-nested grouping with the
declared summand counts.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

from calculus.terms import (
    Action, Bottom, Conj, Disj, ExtChoice, GuardedSum, Nil, Par, Prefix, Term,
    as_guarded_sum, fold_choice, is_basic, is_injective_in_prefixes, prefix_set,
)
from axioms.proofs import Direction
from core.errors import AxiomMismatch

Instantiation = Dict[str, Any]

TERM_METAS = ("x", "y", "z")


@dataclass(frozen=True)
class Schema:
    name: str
    lhs: Any
    rhs: Any
    equational: bool
    side_condition: Optional[Tuple[str, Callable[[Instantiation], bool]]] = None


def _basic_xy(inst: Instantiation) -> bool:
    return is_basic(inst["x"]) and is_basic(inst["y"])


SCHEMAS: Dict[str, Schema] = {s.name: s for s in [
    Schema("EC1", ("[]", "x", "y"), ("[]", "y", "x"), True),
    Schema("EC2", ("[]", ("[]", "x", "y"), "z"), ("[]", "x", ("[]", "y", "z")), True),
    Schema("EC3", ("[]", "x", "x"), "x", True),
    Schema("EC4", ("[]", "x", "0"), "x", True),
    Schema("EC5", ("[]", "x", "bot"), "bot", True),
    Schema("DI1", ("\\/", "x", "y"), ("\\/", "y", "x"), True),
    Schema("DI2", ("\\/", "x", ("\\/", "y", "z")), ("\\/", ("\\/", "x", "y"), "z"), True),
    Schema("DI3", ("\\/", "x", "x"), "x", True),
    Schema("DI4", ("\\/", "x", "bot"), "x", True),
    Schema("DI5", "x", ("\\/", "x", "y"), False),
    Schema("CO1", ("/\\", "x", "y"), ("/\\", "y", "x"), True),
    Schema("CO2", ("/\\", "x", "x"), "x", True),
    Schema("CO3", ("/\\", "x", "bot"), "bot", True),
    Schema("PR1", ("a.", "bot"), "bot", True),
    Schema("PR2", ("tau.", "x"), "x", True),
    Schema("PA1", ("||", "x", "y"), ("||", "y", "x"), True),
    Schema("PA2", ("||", "x", "bot"), "bot", True),
    Schema("DS1", ("[]", "x", ("\\/", "y", "z")), ("\\/", ("[]", "x", "y"), ("[]", "x", "z")), False),
    Schema("DS2", ("/\\", "x", ("\\/", "y", "z")), ("\\/", ("/\\", "x", "y"), ("/\\", "x", "z")), False),
    Schema("DS3", ("||", "x", ("\\/", "y", "z")), ("\\/", ("||", "x", "y"), ("||", "x", "z")), False),
    Schema("DS4", ("a.", ("\\/", "x", "y")), ("[]", ("a.", "x"), ("a.", "y")), False,
           ("x, y must be basic terms", _basic_xy)),
]}

NARY_AXIOMS = ("ECC1", "ECC2", "ECC3", "EXP1", "EXP2")
EQUATIONAL_NARY = ("ECC1",)
AXIOM_NAMES: Tuple[str, ...] = tuple(SCHEMAS) + NARY_AXIOMS

_BINARY = {"[]": ExtChoice, "\\/": Disj, "/\\": Conj, "||": Par}


def is_equational(name: str) -> bool:
    if name in SCHEMAS:
        return SCHEMAS[name].equational
    return name in EQUATIONAL_NARY


def _match(pattern: Any, t: Term, inst: Instantiation) -> bool:
    if pattern in TERM_METAS:
        if pattern in inst:
            return inst[pattern] == t
        inst[pattern] = t
        return True
    if pattern == "0":
        return isinstance(t, Nil)
    if pattern == "bot":
        return isinstance(t, Bottom)
    op = pattern[0]
    if op in ("a.", "tau."):
        if not isinstance(t, Prefix):
            return False
        if op == "tau.":
            if not t.action.is_tau:
                return False
        else:
            if t.action.is_tau:
                return False
            if "a" in inst and inst["a"] != t.action:
                return False
            inst["a"] = t.action
        return _match(pattern[1], t.body, inst)
    kind = _BINARY[op]
    if type(t) is not kind:
        return False
    if kind is Par:
        if "A" in inst and inst["A"] != t.sync:
            return False
        inst["A"] = t.sync
    return _match(pattern[1], t.left, inst) and _match(pattern[2], t.right, inst)


def _oriented(name: str, direction: Direction, lhs: Term, rhs: Term) -> Tuple[Term, Term]:
    """The pair as the schema's own left and right sides."""
    if direction is Direction.L2R:
        return lhs, rhs
    if not is_equational(name):
        raise AxiomMismatch(name, "inequational axiom cannot be used right-to-left")
    return rhs, lhs


# --- n-ary helpers ---

def _sum(name: str, t: Term, declared: Optional[int], role: str) -> GuardedSum:
    s = as_guarded_sum(t)
    if s is None:
        raise AxiomMismatch(name, f"{role} is not a left-nested sum of visible prefixes")
    if declared is not None and len(s) != declared:
        raise AxiomMismatch(name, f"{role} has {len(s)} summands, declared {declared}")
    return s


def _arity(name: str, arity: Optional[Sequence[int]], expected: int) -> List[Optional[int]]:
    if arity is None:
        return [None] * expected
    if len(arity) != expected:
        raise AxiomMismatch(name, f"arity must list {expected} summand count(s)")
    return list(arity)


def expansion(s1: Term, s2: Term, sync: FrozenSet[Action]) -> Term:
    """Right side of the expansion schemas for two guarded sums.

    Interleaved moves of the left sum come first, then those of the right sum,
    then the synchronised pairs in lexicographic index order; each group is a
    left-nested choice and an empty group is 0.
    """
    g1, g2 = as_guarded_sum(s1), as_guarded_sum(s2)
    if g1 is None or g2 is None:
        raise ValueError("expansion needs two guarded sums")
    left = [Prefix(a, Par(x, s2, sync)) for a, x in g1.summands if a not in sync]
    right = [Prefix(b, Par(s1, y, sync)) for b, y in g2.summands if b not in sync]
    both = [Prefix(a, Par(x, y, sync)) for a, x in g1.summands for b, y in g2.summands
            if a == b and a in sync]
    return ExtChoice(ExtChoice(fold_choice(left), fold_choice(right)), fold_choice(both))


def _conj_sums(name: str, t: Term, arity: List[Optional[int]]) -> Tuple[GuardedSum, GuardedSum]:
    if not isinstance(t, Conj):
        raise AxiomMismatch(name, "expected a conjunction of two sums")
    return _sum(name, t.left, arity[0], "left sum"), _sum(name, t.right, arity[-1], "right sum")


def _match_ecc1(lhs: Term, rhs: Term, arity) -> Instantiation:
    counts = _arity("ECC1", arity, 2)
    if not isinstance(rhs, Bottom):
        raise AxiomMismatch("ECC1", "right side must be bot")
    s1, s2 = _conj_sums("ECC1", lhs, counts)
    if prefix_set(s1) == prefix_set(s2):
        raise AxiomMismatch("ECC1", "prefix sets coincide", "prefix sets must differ")
    return {"n": len(s1), "m": len(s2), "left": s1, "right": s2}


def _zip(name: str, s1: GuardedSum, s2: GuardedSum) -> List[Tuple[Action, Term, Term]]:
    if s1.actions != s2.actions:
        raise AxiomMismatch(name, "the two sums must carry the same action sequence")
    return [(a, x, y) for (a, x), (_, y) in zip(s1.summands, s2.summands)]


def _zipped(triples) -> Term:
    return fold_choice([Prefix(a, Conj(x, y)) for a, x, y in triples])


def _match_ecc2(lhs: Term, rhs: Term, arity) -> Instantiation:
    counts = _arity("ECC2", arity, 1)
    s1, s2 = _conj_sums("ECC2", rhs, counts)
    triples = _zip("ECC2", s1, s2)
    if lhs != _zipped(triples):
        raise AxiomMismatch("ECC2", "left side is not the summand-wise conjunction")
    return {"n": len(s1), "left": s1, "right": s2}


def _match_ecc3(lhs: Term, rhs: Term, arity) -> Instantiation:
    counts = _arity("ECC3", arity, 1)
    s1, s2 = _conj_sums("ECC3", lhs, counts)
    triples = _zip("ECC3", s1, s2)
    if rhs != _zipped(triples):
        raise AxiomMismatch("ECC3", "right side is not the summand-wise conjunction")
    if not is_injective_in_prefixes(s1):
        raise AxiomMismatch("ECC3", "left sum repeats a prefix", "left sum must be injective in prefixes")
    return {"n": len(s1), "left": s1, "right": s2}


def _par_sums(name: str, t: Term, arity) -> Tuple[Par, GuardedSum, GuardedSum]:
    counts = _arity(name, arity, 2)
    if not isinstance(t, Par):
        raise AxiomMismatch(name, "expected a parallel composition of two sums")
    return t, _sum(name, t.left, counts[0], "left sum"), _sum(name, t.right, counts[1], "right sum")


def _match_exp1(lhs: Term, rhs: Term, arity) -> Instantiation:
    par, s1, s2 = _par_sums("EXP1", lhs, arity)
    if rhs != expansion(par.left, par.right, par.sync):
        raise AxiomMismatch("EXP1", "right side is not the expansion of the left")
    return {"n": len(s1), "m": len(s2), "A": par.sync}


def _match_exp2(lhs: Term, rhs: Term, arity) -> Instantiation:
    par, s1, s2 = _par_sums("EXP2", rhs, arity)
    if lhs != expansion(par.left, par.right, par.sync):
        raise AxiomMismatch("EXP2", "left side is not the expansion of the right")
    if not all(is_basic(body) for _, body in s1.summands + s2.summands):
        raise AxiomMismatch("EXP2", "a continuation is not basic", "continuations must be basic terms")
    return {"n": len(s1), "m": len(s2), "A": par.sync}


_NARY_MATCHERS = {
    "ECC1": _match_ecc1, "ECC2": _match_ecc2, "ECC3": _match_ecc3,
    "EXP1": _match_exp1, "EXP2": _match_exp2,
}


def match_axiom(name: str, direction: Direction, lhs: Term, rhs: Term,
                arity: Optional[Sequence[int]] = None) -> Instantiation:
    """Instantiation under which lhs <= rhs is an instance of the axiom.

    Raises AxiomMismatch naming the reason, and the side condition when the
    shape matched but the condition failed.
    """
    if name not in SCHEMAS and name not in _NARY_MATCHERS:
        raise AxiomMismatch(name, "unknown axiom")
    left, right = _oriented(name, Direction(direction), lhs, rhs)
    if name in _NARY_MATCHERS:
        return _NARY_MATCHERS[name](left, right, arity)
    if arity is not None:
        raise AxiomMismatch(name, "arity given for a fixed-arity axiom")
    schema = SCHEMAS[name]
    inst: Instantiation = {}
    if not (_match(schema.lhs, left, inst) and _match(schema.rhs, right, inst)):
        raise AxiomMismatch(name, "claim is not an instance of the schema")
    if schema.side_condition is not None:
        label, holds = schema.side_condition
        if not holds(inst):
            raise AxiomMismatch(name, "side condition violated", label)
    return inst


def try_match(name: str, direction: Direction, lhs: Term, rhs: Term,
              arity: Optional[Sequence[int]] = None) -> Optional[Instantiation]:
    try:
        return match_axiom(name, direction, lhs, rhs, arity)
    except AxiomMismatch:
        return None


def nary_arity(name: str, lhs: Term, rhs: Term, direction: Direction = Direction.L2R) -> Tuple[int, ...]:
    """Summand counts to declare for an n-ary instance."""
    inst = match_axiom(name, direction, lhs, rhs)
    if name in ("ECC2", "ECC3"):
        return (inst["n"],)
    return (inst["n"], inst["m"])
