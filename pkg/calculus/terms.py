"""
Abstract syntax of the finite, recursion-free fragment of the calculus.

Terms are immutable and compared structurally. Every term is closed; the
general external choice and the general disjunction are the explicit
left-nested binary trees built by `fold_choice` and `fold_disj`.
"""

import re
from dataclasses import dataclass
from typing import Callable, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

_NAME = re.compile(r"[a-z][a-zA-Z0-9_]*")
RESERVED_NAMES = frozenset({"tau", "bot"})


@dataclass(frozen=True)
class Action:
    """An action label; the name `tau` denotes the internal action."""
    name: str

    def __post_init__(self):
        if not _NAME.fullmatch(self.name) or (self.name == "bot"):
            raise ValueError(f"invalid action name: {self.name!r}")

    @property
    def is_tau(self) -> bool:
        return self.name == "tau"

    @property
    def is_visible(self) -> bool:
        return not self.is_tau

    def sort_key(self) -> Tuple[int, str]:
        return (0, "") if self.is_tau else (1, self.name)

    def __lt__(self, other: "Action") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return self.name


TAU = Action("tau")


def act(name: str) -> Action:
    return Action(name)


class Term:
    """Base of all term constructors.

    Equality is structural. The hash is taken when a node is built, from its
    children's stored hashes, so neither hashing nor comparing recurses.
    """

    TAG = 0

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.TAG, self.label()) + tuple(c._hash for c in self.children())))

    def children(self) -> Tuple["Term", ...]:
        return ()

    def label(self):
        """The non-term data of the top constructor."""
        return None

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        pending = [(self, other)]
        while pending:
            x, y = pending.pop()
            if x is y:
                continue
            if type(x) is not type(y) or x._hash != y._hash or x.label() != y.label():
                return False
            pending.extend(zip(x.children(), y.children()))
        return True

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        from calculus.syntax import format_term
        return format_term(self)


@dataclass(frozen=True, eq=False)
class Nil(Term):
    TAG = 0


@dataclass(frozen=True, eq=False)
class Bottom(Term):
    TAG = 1


@dataclass(frozen=True, eq=False)
class Prefix(Term):
    TAG = 2
    action: Action
    body: Term

    def label(self):
        return self.action

    def children(self) -> Tuple[Term, ...]:
        return (self.body,)


@dataclass(frozen=True, eq=False)
class ExtChoice(Term):
    TAG = 3
    left: Term
    right: Term

    def children(self) -> Tuple[Term, ...]:
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Conj(Term):
    TAG = 4
    left: Term
    right: Term

    def children(self) -> Tuple[Term, ...]:
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Disj(Term):
    TAG = 5
    left: Term
    right: Term

    def children(self) -> Tuple[Term, ...]:
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Par(Term):
    TAG = 6
    left: Term
    right: Term
    sync: FrozenSet[Action] = frozenset()

    def __post_init__(self):
        sync = frozenset(self.sync)
        if any(a.is_tau for a in sync):
            raise ValueError("tau cannot be a synchronisation action")
        object.__setattr__(self, "sync", sync)
        super().__post_init__()

    def children(self) -> Tuple[Term, ...]:
        return (self.left, self.right)

    def label(self):
        return self.sync


NIL = Nil()
BOTTOM = Bottom()

BINARY = (ExtChoice, Conj, Disj, Par)


@dataclass(frozen=True)
class Operator:
    """One operator layer: what a CONTEXT step rewrites under."""
    kind: type
    action: Optional[Action] = None
    sync: FrozenSet[Action] = frozenset()

    @property
    def arity(self) -> int:
        return 1 if self.kind is Prefix else 2

    def apply(self, operands: Sequence[Term]) -> Term:
        if len(operands) != self.arity:
            raise ValueError(f"{self.kind.__name__} takes {self.arity} operands")
        if self.kind is Prefix:
            return Prefix(self.action, operands[0])
        if self.kind is Par:
            return Par(operands[0], operands[1], self.sync)
        return self.kind(operands[0], operands[1])


def operator_of(t: Term) -> Operator:
    if isinstance(t, Prefix):
        return Operator(Prefix, action=t.action)
    if isinstance(t, Par):
        return Operator(Par, sync=t.sync)
    if isinstance(t, BINARY):
        return Operator(type(t))
    raise ValueError(f"constant has no operator layer: {t}")


def rebuild(t: Term, new_children: Sequence[Term]) -> Term:
    if not new_children:
        return t
    return operator_of(t).apply(new_children)


# --- Structural helpers ---

def walk(t: Term) -> Iterator[Term]:
    """Every node of t, pre-order."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def size(t: Term) -> int:
    """Number of operator symbols in t, constants included."""
    return sum(1 for _ in walk(t))


def subterms(t: Term) -> Iterator[Tuple[Tuple[int, ...], Term]]:
    """Pre-order walk yielding (position, subterm)."""
    stack: List[Tuple[Tuple[int, ...], Term]] = [((), t)]
    while stack:
        path, node = stack.pop()
        yield path, node
        for index in reversed(range(len(node.children()))):
            stack.append((path + (index,), node.children()[index]))


def replace_at(t: Term, path: Sequence[int], replacement: Term) -> Term:
    spine = [t]
    for index in path[:-1]:
        spine.append(spine[-1].children()[index])
    for node, index in zip(reversed(spine), reversed(path)):
        kids = list(node.children())
        kids[index] = replacement
        replacement = rebuild(node, kids)
    return replacement


def term_at(t: Term, path: Sequence[int]) -> Term:
    for index in path:
        t = t.children()[index]
    return t


def term_key(t: Term) -> tuple:
    """Total syntactic order: constructor tag, then labels, then children.

    The key is the flat pre-order token sequence. Every constructor has a fixed
    arity, so no key is a proper prefix of another and the flat order agrees
    with comparing tag, labels and children in turn.
    """
    out = []
    for node in walk(t):
        out.append(node.TAG)
        if isinstance(node, Prefix):
            out.append(node.action.sort_key())
        elif isinstance(node, Par):
            out.append(tuple(sorted(a.name for a in node.sync)))
    return tuple(out)


def sort_terms(ts: Iterable[Term]) -> List[Term]:
    return sorted(ts, key=term_key)


def actions_of(t: Term) -> FrozenSet[Action]:
    found = set()
    for node in walk(t):
        if isinstance(node, Prefix):
            found.add(node.action)
        elif isinstance(node, Par):
            found.update(node.sync)
    return frozenset(found)


def flatten(t: Term, kind: type) -> List[Term]:
    """Maximal operands of a nest of `kind` nodes, left to right."""
    if type(t) is not kind:
        return [t]
    out: List[Term] = []
    stack = [t]
    while stack:
        node = stack.pop()
        if type(node) is kind:
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def fold_left(items: Sequence[Term], build: Callable[[Term, Term], Term]) -> Term:
    acc = items[0]
    for item in items[1:]:
        acc = build(acc, item)
    return acc


def fold_choice(items: Sequence[Term]) -> Term:
    """Left-nested general external choice; the empty choice is 0."""
    if not items:
        return NIL
    return fold_left(items, ExtChoice)


def fold_disj(items: Sequence[Term]) -> Term:
    if not items:
        raise ValueError("general disjunction needs at least one disjunct")
    return fold_left(items, Disj)


# --- Guarded sums ---

@dataclass(frozen=True)
class GuardedSum:
    """View of a left-nested choice of visible prefixes; () is 0."""
    summands: Tuple[Tuple[Action, Term], ...] = ()

    @property
    def term(self) -> Term:
        return fold_choice([Prefix(a, body) for a, body in self.summands])

    @property
    def actions(self) -> Tuple[Action, ...]:
        return tuple(a for a, _ in self.summands)

    def __len__(self) -> int:
        return len(self.summands)


def _visible_prefix(t: Term) -> Optional[Tuple[Action, Term]]:
    if isinstance(t, Prefix) and t.action.is_visible:
        return (t.action, t.body)
    return None


def as_guarded_sum(t: Term) -> Optional[GuardedSum]:
    if isinstance(t, Nil):
        return GuardedSum(())
    summands: List[Tuple[Action, Term]] = []
    node = t
    while isinstance(node, ExtChoice):
        last = _visible_prefix(node.right)
        if last is None:
            return None
        summands.append(last)
        node = node.left
    first = _visible_prefix(node)
    if first is None:
        return None
    summands.append(first)
    return GuardedSum(tuple(reversed(summands)))


def is_injective_in_prefixes(s: GuardedSum) -> bool:
    return len(set(s.actions)) == len(s.summands)


def prefix_set(s: GuardedSum) -> FrozenSet[Action]:
    return frozenset(s.actions)


# --- Syntactic classes ---

def is_basic(t: Term) -> bool:
    """Member of the basic terms: no bottom and no conjunction anywhere."""
    return not any(isinstance(node, (Bottom, Conj)) for node in walk(t))


def disjuncts_of(t: Term) -> List[Term]:
    """Operands of a left-nested disjunction, left to right."""
    out = []
    while isinstance(t, Disj):
        out.append(t.right)
        t = t.left
    out.append(t)
    return out[::-1]


def _is_nf_b(t: Term) -> bool:
    pending = [t]
    while pending:
        for d in disjuncts_of(pending.pop()):
            s = as_guarded_sum(d)
            if s is None or not is_injective_in_prefixes(s):
                return False
            pending.extend(body for _, body in s.summands)
    return True


def is_normal_form(t: Term) -> bool:
    return isinstance(t, Bottom) or _is_nf_b(t)


def is_normal_form_b(t: Term) -> bool:
    return _is_nf_b(t)
