from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from axioms.proofs import AxiomStep, Context, Proof, Refl, Trans
from axioms.schemas import match_axiom
from calculus.terms import Term
from core.errors import AxiomMismatch


@dataclass(frozen=True)
class ProofVerdict:
    """Outcome of checking a proof; `path` locates the first bad node by child indices."""
    accepted: bool
    lhs: Term
    rhs: Term
    path: Tuple[int, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


def _node_error(node: Proof) -> Optional[str]:
    if isinstance(node, Refl):
        return None if node.lhs == node.rhs else "REF claims two different terms"
    if isinstance(node, AxiomStep):
        try:
            match_axiom(node.name, node.direction, node.lhs, node.rhs, node.arity)
        except AxiomMismatch as e:
            if e.side_condition:
                return f"{e} (side condition: {e.side_condition})"
            return str(e)
        return None
    if isinstance(node, Trans):
        if node.left.lhs != node.lhs:
            return "TRANS: left premise does not start at the claimed left side"
        if node.right.rhs != node.rhs:
            return "TRANS: right premise does not end at the claimed right side"
        if node.left.rhs != node.right.lhs:
            return "TRANS: premises do not compose"
        return None
    if isinstance(node, Context):
        op = node.operator
        if len(node.premises) != op.arity:
            return f"CONTEXT: {op.kind.__name__} takes {op.arity} premise(s), got {len(node.premises)}"
        if op.apply([p.lhs for p in node.premises]) != node.lhs:
            return "CONTEXT: left side is not the operator applied to the premises' left sides"
        if op.apply([p.rhs for p in node.premises]) != node.rhs:
            return "CONTEXT: right side is not the operator applied to the premises' right sides"
        return None
    return f"unknown proof node {type(node).__name__}"


def check_proof(pf: Proof) -> ProofVerdict:
    """Validates every node; shared subproofs are checked once."""
    checked: Dict[int, bool] = {}
    stack = [(pf, ())]
    while stack:
        node, path = stack.pop()
        if id(node) in checked:
            continue
        checked[id(node)] = True
        reason = _node_error(node)
        if reason is not None:
            return ProofVerdict(False, pf.lhs, pf.rhs, path, reason)
        for index in reversed(range(len(node.children()))):
            stack.append((node.children()[index], path + (index,)))
    return ProofVerdict(True, pf.lhs, pf.rhs)
