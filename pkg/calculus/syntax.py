"""
Concrete text syntax and JSON encoding of terms.

Precedence, tightest first: prefix `a.`, parallel `|[A]|`, external choice
`[]`, conjunction `/\\`, disjunction `\\/`. Binary operators associate to the
left, so printed normal forms re-parse to the same left-nested trees.
"""

from functools import lru_cache
from typing import Annotated, List, Literal, Union

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken
from pydantic import BaseModel, Field, TypeAdapter

from calculus.terms import (
    BOTTOM, NIL, Action, Bottom, Conj, Disj, ExtChoice, Nil, Par, Prefix, Term,
)
from core.errors import TermSyntaxError

GRAMMAR = r"""
?start: disj

?disj: conj
     | disj OR conj           -> disj
?conj: choice
     | conj AND choice        -> conj
?choice: par
       | choice CHOICE par    -> choice
?par: pre
    | par LSYNC actlist RSYNC pre -> par
?pre: action DOT pre          -> prefix
    | atom
?atom: ZERO                   -> nil
     | BOT                    -> bottom
     | LPAR disj RPAR

action: TAU | NAME
actlist: (NAME (COMMA NAME)*)?

OR: "\\/"
AND: "/\\"
CHOICE: "[]"
LSYNC: "|["
RSYNC: "]|"
DOT: "."
COMMA: ","
LPAR: "("
RPAR: ")"
ZERO: "0"
BOT: "bot"
TAU: "tau"
NAME: /[a-z][a-zA-Z0-9_]*/

%import common.WS
%ignore WS
"""

_TOKEN_NAMES = {
    "OR": "'\\/'", "AND": "'/\\'", "CHOICE": "'[]'", "LSYNC": "'|['", "RSYNC": "']|'",
    "DOT": "'.'", "COMMA": "','", "LPAR": "'('", "RPAR": "')'", "ZERO": "'0'",
    "BOT": "'bot'", "TAU": "'tau'", "NAME": "action name", "$END": "end of input",
}


@v_args(inline=True)
class _TermBuilder(Transformer):
    def nil(self, _tok):
        return NIL

    def bottom(self, _tok):
        return BOTTOM

    def action(self, tok: Token):
        return Action(str(tok))

    def actlist(self, *toks: Token):
        return frozenset(Action(str(t)) for t in toks if t.type == "NAME")

    def prefix(self, action: Action, _dot, body: Term):
        return Prefix(action, body)

    def par(self, left, _open, sync, _close, right):
        return Par(left, right, sync)

    def choice(self, left, _op, right):
        return ExtChoice(left, right)

    def conj(self, left, _op, right):
        return Conj(left, right)

    def disj(self, left, _op, right):
        return Disj(left, right)

    def atom(self, _open, inner, _close):
        return inner


@lru_cache(maxsize=1)
def _parser() -> Lark:
    # terms are built on each reduction, so deep input never becomes a parse tree
    return Lark(GRAMMAR, parser="lalr", lexer="basic", maybe_placeholders=False, transformer=_TermBuilder())


def _friendly(expected) -> frozenset:
    return frozenset(_TOKEN_NAMES.get(name, name) for name in expected)


def parse(text: str) -> Term:
    """Parses a term; raises TermSyntaxError with position and expected tokens."""
    try:
        term = _parser().parse(text)
    except UnexpectedToken as e:
        found = "end of input" if e.token.type == "$END" else repr(str(e.token))
        raise TermSyntaxError(f"unexpected {found}", e.line, e.column, _friendly(e.expected)) from None
    except UnexpectedCharacters as e:
        raise TermSyntaxError(f"unexpected character {text[e.pos_in_stream]!r}", e.line, e.column,
                              _friendly(e.allowed or ())) from None
    except UnexpectedEOF as e:
        line, column = _end_position(text)
        raise TermSyntaxError("unexpected end of input", line, column, _friendly(e.expected)) from None
    except UnexpectedInput as e:
        raise TermSyntaxError("malformed term", e.line, e.column) from None
    return term


def _end_position(text: str):
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


# --- Printing ---

_LEVEL = {Disj: 1, Conj: 2, ExtChoice: 3, Par: 4}
_SYMBOL = {Disj: "\\/", Conj: "/\\", ExtChoice: "[]"}
_ATOMIC = 5


def _level(t: Term) -> int:
    return _LEVEL.get(type(t), _ATOMIC)


def format_sync(sync) -> str:
    return "|[" + ",".join(sorted(a.name for a in sync)) + "]|"


def format_term(t: Term) -> str:
    out: List[str] = []
    # items are pending text or (term, parenthesise) pairs, popped in print order
    pending: list = [(t, False)]
    while pending:
        item = pending.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        node, wrap = item
        if wrap:
            pending += [")", (node, False), "("]
        elif isinstance(node, Nil):
            out.append("0")
        elif isinstance(node, Bottom):
            out.append("bot")
        elif isinstance(node, Prefix):
            pending += [(node.body, _level(node.body) < _ATOMIC), f"{node.action}."]
        else:
            level = _level(node)
            symbol = format_sync(node.sync) if isinstance(node, Par) else _SYMBOL[type(node)]
            pending += [(node.right, _level(node.right) <= level), f" {symbol} ",
                        (node.left, _level(node.left) < level)]
    return "".join(out)


# --- JSON encoding ---

class NilModel(BaseModel):
    kind: Literal["nil"] = "nil"


class BottomModel(BaseModel):
    kind: Literal["bottom"] = "bottom"


class PrefixModel(BaseModel):
    kind: Literal["prefix"] = "prefix"
    action: str
    body: "TermModel"


class ExtChoiceModel(BaseModel):
    kind: Literal["extchoice"] = "extchoice"
    left: "TermModel"
    right: "TermModel"


class ConjModel(BaseModel):
    kind: Literal["conj"] = "conj"
    left: "TermModel"
    right: "TermModel"


class DisjModel(BaseModel):
    kind: Literal["disj"] = "disj"
    left: "TermModel"
    right: "TermModel"


class ParModel(BaseModel):
    kind: Literal["par"] = "par"
    left: "TermModel"
    right: "TermModel"
    sync: List[str] = []


TermModel = Annotated[
    Union[NilModel, BottomModel, PrefixModel, ExtChoiceModel, ConjModel, DisjModel, ParModel],
    Field(discriminator="kind"),
]

for _model in (PrefixModel, ExtChoiceModel, ConjModel, DisjModel, ParModel):
    _model.model_rebuild()

_TERM_ADAPTER = TypeAdapter(TermModel)
_BINARY_MODELS = {ExtChoice: ExtChoiceModel, Conj: ConjModel, Disj: DisjModel}
_BINARY_TERMS = {ExtChoiceModel: ExtChoice, ConjModel: Conj, DisjModel: Disj}


def to_model(t: Term):
    if isinstance(t, Nil):
        return NilModel()
    if isinstance(t, Bottom):
        return BottomModel()
    if isinstance(t, Prefix):
        return PrefixModel(action=t.action.name, body=to_model(t.body))
    if isinstance(t, Par):
        return ParModel(left=to_model(t.left), right=to_model(t.right),
                        sync=sorted(a.name for a in t.sync))
    return _BINARY_MODELS[type(t)](left=to_model(t.left), right=to_model(t.right))


def from_model(m) -> Term:
    if isinstance(m, NilModel):
        return NIL
    if isinstance(m, BottomModel):
        return BOTTOM
    if isinstance(m, PrefixModel):
        return Prefix(Action(m.action), from_model(m.body))
    if isinstance(m, ParModel):
        return Par(from_model(m.left), from_model(m.right), frozenset(Action(a) for a in m.sync))
    return _BINARY_TERMS[type(m)](from_model(m.left), from_model(m.right))


def term_to_json(t: Term) -> str:
    return _TERM_ADAPTER.dump_json(to_model(t)).decode()


def term_from_json(text: str) -> Term:
    return from_model(_TERM_ADAPTER.validate_json(text))
