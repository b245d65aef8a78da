"""A small arithmetic expression language over the variables x1..xn.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

``^`` is right-associative and binds tighter than a leading minus, so
``-x1^2`` is ``-(x1^2)`` while ``2^-1`` is ``2^(-1)``.

Evaluation is vectorized: a point set of shape ``(m, n)`` evaluates to ``m``
values in one pass, and a single point of shape ``(n,)`` to a float.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArityMismatch,
    DomainError,
    ExpressionSyntaxError,
    UnknownIdentifier,
    VariableOutOfRange,
)

__all__ = [
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "parse",
    "eval_ast",
    "to_source",
    "max_variable",
]


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written in the source


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Const | Var | Neg | BinOp | Call

# name -> (min arity, max arity); None means unbounded
FUNCTIONS = {
    "abs": (1, 1),
    "sqrt": (1, 1),
    "exp": (1, 1),
    "log": (1, 1),
    "sin": (1, 1),
    "cos": (1, 1),
    "max": (2, None),
    "min": (2, None),
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)
_VAR_RE = re.compile(r"x([0-9]+)")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int  # byte offset into the UTF-8 encoded source


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExpressionSyntaxError(
                f"unexpected character {src[pos]!r}", _byte_offset(src, pos)
            )
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), _byte_offset(src, pos)))
        pos = m.end()
    tokens.append(_Token("end", "", len(src.encode("utf-8"))))
    return tokens


def _byte_offset(src: str, pos: int) -> int:
    return len(src[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, src: str, dimension: int):
        self.tokens = _tokenize(src)
        self.pos = 0
        self.dimension = dimension

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _at(self, text: str) -> bool:
        tok = self.current
        return tok.kind == "op" and tok.text == text

    def _expect(self, text: str) -> _Token:
        if not self._at(text):
            self._unexpected(f"expected {text!r}")
        tok = self.current
        self.pos += 1
        return tok

    def _unexpected(self, what: str = "unexpected token"):
        tok = self.current
        shown = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExpressionSyntaxError(f"{what}, found {shown}", tok.offset)

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "end":
            self._unexpected()
        return node

    def expr(self) -> Node:
        node = self.term()
        while self._at("+") or self._at("-"):
            op = self.current.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self._at("*") or self._at("/"):
            op = self.current.text
            self.pos += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self._at("-"):
            self.pos += 1
            return Neg(self.factor())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self._at("^"):
            self.pos += 1
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Node:
        tok = self.current
        if tok.kind == "number":
            self.pos += 1
            return Const(float(tok.text))
        if tok.kind == "ident":
            self.pos += 1
            if self._at("("):
                return self._call(tok)
            return self._variable(tok)
        if self._at("("):
            self.pos += 1
            node = self.expr()
            self._expect(")")
            return node
        self._unexpected()

    def _variable(self, tok: _Token) -> Var:
        m = _VAR_RE.fullmatch(tok.text)
        if m is None:
            if tok.text in FUNCTIONS:
                raise ArityMismatch(f"function {tok.text!r} used without arguments", tok.offset)
            raise UnknownIdentifier(f"unknown identifier {tok.text!r}", tok.offset)
        index = int(m.group(1))
        if not 1 <= index <= self.dimension:
            raise VariableOutOfRange(
                f"variable {tok.text!r} outside x1..x{self.dimension}", tok.offset
            )
        return Var(index)

    def _call(self, tok: _Token) -> Call:
        if tok.text not in FUNCTIONS:
            raise UnknownIdentifier(f"unknown function {tok.text!r}", tok.offset)
        self._expect("(")
        args = [self.expr()]
        while self._at(","):
            self.pos += 1
            args.append(self.expr())
        self._expect(")")
        lo, hi = FUNCTIONS[tok.text]
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise ArityMismatch(
                f"{tok.text}() takes {lo if lo == hi else f'at least {lo}'} argument(s), got {len(args)}",
                tok.offset,
            )
        return Call(tok.text, tuple(args))


def parse(src: str, dimension: int) -> Node:
    """Parse ``src`` into an immutable AST over variables ``x1..x{dimension}``."""
    if dimension < 1:
        raise ValueError("dimension must be positive")
    return _Parser(src, dimension).parse()


def max_variable(node: Node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Const):
        return 0
    if isinstance(node, Neg):
        return max_variable(node.operand)
    if isinstance(node, BinOp):
        return max(max_variable(node.left), max_variable(node.right))
    return max(max_variable(a) for a in node.args)


def to_source(node: Node) -> str:
    """Fully parenthesized source text; reparsing it gives back ``node``."""
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    return f"{node.name}({', '.join(to_source(a) for a in node.args)})"


def eval_ast(node: Node, p):
    """Evaluate ``node`` at a point (shape ``(n,)``) or a point set (``(m, n)``).

    Raises DomainError naming the offending subexpression when any point hits
    a square root of a negative, a log of a nonpositive number, a division by
    zero, or a power with no real value.
    """
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    pts = p[np.newaxis, :] if single else p
    need = max_variable(node)
    if pts.shape[1] < need:
        raise ValueError(f"point has {pts.shape[1]} coordinates, expression uses x{need}")
    with np.errstate(all="ignore"):
        out = _eval(node, pts)
    out = np.broadcast_to(out, (pts.shape[0],))
    return float(out[0]) if single else np.array(out)


def _eval(node: Node, pts: np.ndarray):
    if isinstance(node, Const):
        return np.float64(node.value)
    if isinstance(node, Var):
        return pts[:, node.index - 1]
    if isinstance(node, Neg):
        return np.negative(_eval(node.operand, pts))
    if isinstance(node, BinOp):
        a = _eval(node.left, pts)
        b = _eval(node.right, pts)
        if node.op == "+":
            return np.add(a, b)
        if node.op == "-":
            return np.subtract(a, b)
        if node.op == "*":
            return np.multiply(a, b)
        if node.op == "/":
            if np.any(b == 0):
                raise DomainError("division by zero", to_source(node))
            return np.divide(a, b)
        out = np.power(a, b)
        if np.any(np.isnan(out) & ~np.isnan(a) & ~np.isnan(b)):
            raise DomainError("power has no real value", to_source(node))
        if np.any((a == 0) & (b < 0)):
            raise DomainError("division by zero", to_source(node))
        return out
    args = [_eval(a, pts) for a in node.args]
    name = node.name
    if name == "sqrt":
        if np.any(args[0] < 0):
            raise DomainError("square root of a negative number", to_source(node))
        return np.sqrt(args[0])
    if name == "log":
        if np.any(args[0] <= 0):
            raise DomainError("logarithm of a nonpositive number", to_source(node))
        return np.log(args[0])
    if name == "abs":
        return np.abs(args[0])
    if name == "exp":
        return np.exp(args[0])
    if name == "sin":
        return np.sin(args[0])
    if name == "cos":
        return np.cos(args[0])
    fold = np.maximum if name == "max" else np.minimum
    out = args[0]
    for a in args[1:]:
        out = fold(out, a)
    return out
