"""
Deciding and deriving inequalities between finite terms.

A query is first settled semantically. Only when the refinement holds is a
derivation built: both sides are normalized and every disjunct on the left is
matched, through the stable ready simulation, against a disjunct on the right.
"""

from dataclasses import dataclass
from typing import List, Optional, Union

from axioms.checker import check_proof
from axioms.equational import bottom_leq, disjunct_leq, join, reorder_proof
from axioms.proofs import Proof, context, refl, trans, trans_chain
from calculus.terms import (
    Bottom, Disj, ExtChoice, Nil, Operator, Prefix, Term, as_guarded_sum, flatten, fold_choice,
    size,
)
from core import console
from core.errors import InternalInvariantError
from normalizer.normalize import Normalizer, normalize
from refinement.simulation import RefusalWitness, SimRelation, check_refinement, largest_stable_sim
from semantics.lts import build_lts


@dataclass(frozen=True, eq=False)
class Derivable:
    proof: Proof
    converse: Optional[Proof] = None

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True, eq=False)
class NotDerivable:
    witness: RefusalWitness

    def __bool__(self) -> bool:
        return False


Verdict = Union[Derivable, NotDerivable]


def _join_all(proofs: List[Proof]) -> Proof:
    """From d_i <= r for each disjunct of a left-nested disjunction, derive it <= r."""
    acc = proofs[0]
    for pf in proofs[1:]:
        acc = join(acc, pf)
    return acc


def _match_disjunct(sim: SimRelation, d: Term, candidates: List[Term]) -> int:
    for index, e in enumerate(candidates):
        if (d, e) in sim:
            return index
    raise InternalInvariantError(f"no disjunct simulates {d}")


def _sum_context(summands: List[Proof]) -> Proof:
    """Lifts per-summand proofs through the left-nested choice."""
    acc = summands[0]
    for pf in summands[1:]:
        acc = context(Operator(ExtChoice), [acc, pf])
    return acc


def prove_nf_leq(n1: Term, n2: Term, sim: SimRelation) -> Optional[Proof]:
    """n1 <= n2 for single normal-form disjuncts related by `sim`."""
    if isinstance(n1, Bottom):
        return bottom_leq(n2)
    if n1 == n2:
        return refl(n1)
    if (n1, n2) not in sim:
        return None
    if isinstance(n1, Nil):
        return refl(n1) if isinstance(n2, Nil) else None
    s1, s2 = as_guarded_sum(n1), as_guarded_sum(n2)
    if s1 is None or s2 is None:
        return None
    steps: List[Proof] = []
    if s1.actions != s2.actions:
        order = {a: i for i, a in enumerate(s2.actions)}
        aligned = fold_choice([Prefix(a, x) for a, x in sorted(s1.summands, key=lambda s: order[s[0]])])
        reorder = reorder_proof(n1, aligned)
        if reorder is None:
            return None
        steps.append(reorder.fwd)
        s1 = as_guarded_sum(aligned)
    lifted = []
    for (a, x), (_, y) in zip(s1.summands, s2.summands):
        right = flatten(y, Disj)
        parts = []
        for d in flatten(x, Disj):
            if size(d) >= size(n1):
                raise InternalInvariantError("completeness recursion does not decrease")
            index = _match_disjunct(sim, d, right)
            sub = prove_nf_leq(d, right[index], sim)
            if sub is None:
                return None
            parts.append(trans(sub, disjunct_leq(right, index)))
        lifted.append(context(Operator(Prefix, action=a), [_join_all(parts)]))
    steps.append(_sum_context(lifted))
    return trans_chain(steps)


def _prove_normal_forms(n1: Term, n2: Term, state_bound: Optional[int]) -> Proof:
    if isinstance(n1, Bottom):
        return bottom_leq(n2)
    sim = largest_stable_sim(build_lts(n1, state_bound), build_lts(n2, state_bound))
    right = flatten(n2, Disj)
    parts = []
    for d in flatten(n1, Disj):
        index = _match_disjunct(sim, d, right)
        sub = prove_nf_leq(d, right[index], sim)
        if sub is None:
            raise InternalInvariantError(f"no derivation for {d} <= {right[index]}")
        parts.append(trans(sub, disjunct_leq(right, index)))
    return _join_all(parts)


def prove_leq(t1: Term, t2: Term, state_bound: Optional[int] = None, verify: bool = False) -> Verdict:
    """Derivation of t1 <= t2, or a refusal witness when none exists."""
    result = check_refinement(t1, t2, state_bound)
    if not result.holds:
        console.trace("PROVER", f"{t1} <= {t2} refused: {result.witness.describe()}")
        return NotDerivable(result.witness)
    normalizer = Normalizer()
    nf1, eq1 = normalize(t1, normalizer)
    nf2, eq2 = normalize(t2, normalizer)
    core = _prove_normal_forms(nf1.term, nf2.term, state_bound)
    proof = trans_chain([eq1.fwd, core, eq2.bwd])
    if verify:
        verdict = check_proof(proof)
        if not verdict.accepted:
            raise InternalInvariantError(f"generated proof rejected at {verdict.path}: {verdict.reason}")
    console.trace("PROVER", f"{t1} <= {t2} derived")
    return Derivable(proof)


def prove_equal(t1: Term, t2: Term, state_bound: Optional[int] = None, verify: bool = False) -> Verdict:
    """Both derivations of t1 = t2, or the witness of the failing direction."""
    forward = prove_leq(t1, t2, state_bound, verify)
    if not forward:
        return forward
    backward = prove_leq(t2, t1, state_bound, verify)
    if not backward:
        return backward
    return Derivable(forward.proof, backward.proof)
