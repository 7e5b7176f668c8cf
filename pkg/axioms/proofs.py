"""
Proof objects for the inequational axiom system.

Every node carries its claim `lhs <= rhs`. Nodes are immutable and compared
by identity, so one subproof may be shared by several parents; the JSON
encoding is a node table that stores every shared node once.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from calculus.syntax import format_sync, format_term, parse
from calculus.terms import Action, Conj, Disj, ExtChoice, Operator, Par, Prefix, Term
from core.errors import ProofFormatError, TermSyntaxError


class Direction(str, Enum):
    L2R = "L2R"
    R2L = "R2L"


@dataclass(frozen=True, eq=False)
class Proof:
    lhs: Term
    rhs: Term

    @property
    def rule(self) -> str:
        raise NotImplementedError

    def children(self) -> Tuple["Proof", ...]:
        return ()

    def claim(self) -> str:
        return f"{self.lhs} <= {self.rhs}"


@dataclass(frozen=True, eq=False)
class Refl(Proof):
    @property
    def rule(self) -> str:
        return "REF"


@dataclass(frozen=True, eq=False)
class AxiomStep(Proof):
    name: str = ""
    direction: Direction = Direction.L2R
    arity: Optional[Tuple[int, ...]] = None

    @property
    def rule(self) -> str:
        return "AXIOM"


@dataclass(frozen=True, eq=False)
class Trans(Proof):
    left: Optional[Proof] = None
    right: Optional[Proof] = None

    @property
    def rule(self) -> str:
        return "TRANS"

    def children(self) -> Tuple[Proof, ...]:
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Context(Proof):
    operator: Optional[Operator] = None
    premises: Tuple[Proof, ...] = ()

    @property
    def rule(self) -> str:
        return "CONTEXT"

    def children(self) -> Tuple[Proof, ...]:
        return self.premises


# --- Constructors ---

def refl(t: Term) -> Refl:
    return Refl(t, t)


def axiom(name: str, lhs: Term, rhs: Term, direction: Direction = Direction.L2R,
          arity: Optional[Sequence[int]] = None) -> AxiomStep:
    return AxiomStep(lhs, rhs, name=name, direction=direction,
                     arity=tuple(arity) if arity is not None else None)


def trans(left: Proof, right: Proof) -> Proof:
    """Composes two proofs; reflexive steps are absorbed."""
    if isinstance(left, Refl):
        return right
    if isinstance(right, Refl):
        return left
    return Trans(left.lhs, right.rhs, left=left, right=right)


def trans_chain(proofs: Sequence[Proof]) -> Proof:
    """Balanced TRANS tree over consecutive steps."""
    steps = [p for p in proofs if not isinstance(p, Refl)]
    if not steps:
        return proofs[0]
    while len(steps) > 1:
        paired = [trans(steps[i], steps[i + 1]) for i in range(0, len(steps) - 1, 2)]
        if len(steps) % 2:
            paired.append(steps[-1])
        steps = paired
    return steps[0]


def context(operator: Operator, premises: Sequence[Proof]) -> Proof:
    if all(isinstance(p, Refl) for p in premises):
        return refl(operator.apply([p.lhs for p in premises]))
    return Context(operator.apply([p.lhs for p in premises]), operator.apply([p.rhs for p in premises]),
                   operator=operator, premises=tuple(premises))


def walk(pf: Proof):
    """Each distinct node once, parents before children."""
    seen = set()
    stack = [pf]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(reversed(node.children()))


def proof_size(pf: Proof) -> Tuple[int, int]:
    """Node count as a DAG and as the fully unfolded tree."""
    tree: Dict[int, int] = {}
    nodes = list(walk(pf))
    for node in reversed(nodes):
        tree[id(node)] = 1 + sum(tree[id(c)] for c in node.children())
    return len(nodes), tree[id(pf)]


# --- JSON ---

_OPERATOR_SYMBOLS = {ExtChoice: "[]", Conj: "/\\", Disj: "\\/"}
_SYMBOL_OPERATORS = {symbol: kind for kind, symbol in _OPERATOR_SYMBOLS.items()}


def format_operator(op: Operator) -> str:
    if op.kind is Prefix:
        return f"{op.action}."
    if op.kind is Par:
        return format_sync(op.sync)
    return _OPERATOR_SYMBOLS[op.kind]


def parse_operator(text: str) -> Operator:
    if text in _SYMBOL_OPERATORS:
        return Operator(_SYMBOL_OPERATORS[text])
    try:
        if text.endswith("."):
            return Operator(Prefix, action=Action(text[:-1]))
        if text.startswith("|[") and text.endswith("]|"):
            names = [n.strip() for n in text[2:-2].split(",") if n.strip()]
            return Operator(Par, sync=frozenset(Action(n) for n in names))
    except ValueError as e:
        raise ProofFormatError(f"bad operator {text!r}: {e}") from None
    raise ProofFormatError(f"unknown operator {text!r}")


class ProofNodeModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    id: int
    rule: str
    axiom: Optional[str] = None
    direction: Optional[Direction] = None
    arity: Optional[List[int]] = None
    operator: Optional[str] = None
    claim_lhs: str = Field(alias="claimLhs")
    claim_rhs: str = Field(alias="claimRhs")
    children: List[int] = []


class ProofDocument(BaseModel):
    root: int
    nodes: List[ProofNodeModel]


def proof_to_document(pf: Proof) -> ProofDocument:
    nodes = list(walk(pf))
    ids = {id(node): index for index, node in enumerate(nodes)}
    rendered: Dict[int, str] = {}

    def text(t: Term) -> str:
        key = id(t)
        if key not in rendered:
            rendered[key] = format_term(t)
        return rendered[key]

    models = []
    for node in nodes:
        model = ProofNodeModel(id=ids[id(node)], rule=node.rule, claim_lhs=text(node.lhs),
                               claim_rhs=text(node.rhs), children=[ids[id(c)] for c in node.children()])
        if isinstance(node, AxiomStep):
            model.axiom = node.name
            model.direction = node.direction
            model.arity = list(node.arity) if node.arity is not None else None
        elif isinstance(node, Context):
            model.operator = format_operator(node.operator)
        models.append(model)
    return ProofDocument(root=0, nodes=models)


def proof_to_json(pf: Proof) -> str:
    return proof_to_document(pf).model_dump_json(by_alias=True, exclude_none=True, indent=2)


def proof_from_json(text: str) -> Proof:
    try:
        doc = ProofDocument.model_validate_json(text)
    except ValidationError as e:
        raise ProofFormatError(f"malformed proof document: {e.error_count()} validation error(s)") from None
    return proof_from_document(doc)


def proof_from_document(doc: ProofDocument) -> Proof:
    table = {node.id: node for node in doc.nodes}
    if len(table) != len(doc.nodes):
        raise ProofFormatError("duplicate node ids")
    terms: Dict[str, Term] = {}
    built: Dict[int, Proof] = {}

    def term(text: str) -> Term:
        if text not in terms:
            try:
                terms[text] = parse(text)
            except TermSyntaxError as e:
                raise ProofFormatError(f"claim {text!r} does not parse: {e}") from None
        return terms[text]

    # children first; the node table must be acyclic
    order: List[int] = []
    state: Dict[int, int] = {}
    stack = [(doc.root, False)]
    while stack:
        node_id, expanded = stack.pop()
        if node_id not in table:
            raise ProofFormatError(f"unknown node id {node_id}")
        if expanded:
            state[node_id] = 2
            order.append(node_id)
            continue
        if state.get(node_id) == 2:
            continue
        if state.get(node_id) == 1:
            raise ProofFormatError(f"cycle through node {node_id}")
        state[node_id] = 1
        stack.append((node_id, True))
        for child in reversed(table[node_id].children):
            if state.get(child) != 2:
                stack.append((child, False))

    for node_id in order:
        node = table[node_id]
        lhs, rhs = term(node.claim_lhs), term(node.claim_rhs)
        kids = [built[c] for c in node.children]
        if node.rule == "REF":
            built[node_id] = Refl(lhs, rhs)
        elif node.rule == "AXIOM":
            if node.axiom is None:
                raise ProofFormatError(f"node {node_id}: AXIOM without axiom name")
            built[node_id] = AxiomStep(lhs, rhs, name=node.axiom, direction=node.direction or Direction.L2R,
                                       arity=tuple(node.arity) if node.arity is not None else None)
        elif node.rule == "TRANS":
            if len(kids) != 2:
                raise ProofFormatError(f"node {node_id}: TRANS needs two children")
            built[node_id] = Trans(lhs, rhs, left=kids[0], right=kids[1])
        elif node.rule == "CONTEXT":
            if node.operator is None:
                raise ProofFormatError(f"node {node_id}: CONTEXT without operator")
            built[node_id] = Context(lhs, rhs, operator=parse_operator(node.operator), premises=tuple(kids))
        else:
            raise ProofFormatError(f"node {node_id}: unknown rule {node.rule!r}")
    return built[doc.root]


class EquationDocument(BaseModel):
    """Both halves of a derived equality `lhs = rhs`."""
    lhs: str
    rhs: str
    forward: ProofDocument
    backward: ProofDocument


def equation_to_json(forward: Proof, backward: Proof) -> str:
    doc = EquationDocument(lhs=format_term(forward.lhs), rhs=format_term(forward.rhs),
                           forward=proof_to_document(forward), backward=proof_to_document(backward))
    return doc.model_dump_json(by_alias=True, exclude_none=True, indent=2)


_DOCUMENTS = TypeAdapter(Union[EquationDocument, ProofDocument])


def proofs_from_json(text: str) -> List[Proof]:
    """The proofs in a single-proof or an equation document."""
    try:
        doc = _DOCUMENTS.validate_json(text)
    except ValidationError as e:
        raise ProofFormatError(f"malformed proof document: {e.error_count()} validation error(s)") from None
    if isinstance(doc, EquationDocument):
        return [proof_from_document(doc.forward), proof_from_document(doc.backward)]
    return [proof_from_document(doc)]
