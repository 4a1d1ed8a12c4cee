"""A tiny arithmetic language for analytic forward maps.

Grammar, loosest binding first::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | power
    power    := primary ("^" exponent)*
    exponent := "-" exponent | primary
    primary  := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"

with ``FUNC`` one of ``log``, ``exp``, ``sqrt``.  All binary operators,
``^`` included, associate to the left, and ``^`` binds tighter than unary
minus, so ``-2^2 == -4`` and ``2^3^2 == 64``.

Evaluation works on floats or on numpy arrays of equal shape (one entry per
particle).  Operations that leave the reals -- division by zero, log of a
nonpositive number, sqrt of a negative number, non-finite powers or
overflow -- raise :class:`~measurecalc.errors.MappingDomainError` instead of
producing NaN or infinity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import ExprSyntaxError, MappingDomainError, UnboundVariable

__all__ = ["Expr", "parse_expr", "eval_expr", "FUNCTIONS"]

FUNCTIONS = ("log", "exp", "sqrt")

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


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
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r} after complete expression", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.primary()
        while self.peek()[:2] == ("op", "^"):
            self.take()
            node = BinOp("^", node, self.exponent())
        return node

    def exponent(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.exponent())
        return self.primary()

    def primary(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            return Var(text)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"expected a number, name or '(', found {found}", pos)


def _free_vars(node, acc):
    if isinstance(node, Var):
        acc.add(node.name)
    elif isinstance(node, Neg):
        _free_vars(node.operand, acc)
    elif isinstance(node, BinOp):
        _free_vars(node.left, acc)
        _free_vars(node.right, acc)
    elif isinstance(node, Call):
        _free_vars(node.arg, acc)
    return acc


class Expr:
    """Parsed expression.  Construct with :func:`parse_expr`."""

    __slots__ = ("source", "root", "variables")

    def __init__(self, source: str, root: Node):
        self.source = source
        self.root = root
        self.variables = frozenset(_free_vars(root, set()))

    def __repr__(self):
        return f"Expr({self.source!r})"

    def __call__(self, **bindings):
        return eval_expr(self, bindings)

    def evaluate(self, bindings: Mapping[str, object]):
        """Evaluate over scalars or equal-shape arrays; see module docs."""
        missing = self.variables - set(bindings)
        if missing:
            raise UnboundVariable(f"unbound variable(s): {', '.join(sorted(missing))}")
        env = {k: np.asarray(v, dtype=float) for k, v in bindings.items() if k in self.variables}
        for k, v in env.items():
            _guard(np.isfinite(v), f"variable {k} is not finite")
        with np.errstate(all="ignore"):
            return _eval(self.root, env)


def _guard(ok, message):
    ok = np.asarray(ok)
    if ok.ndim == 0:
        if not ok:
            raise MappingDomainError(message)
    elif not ok.all():
        raise MappingDomainError(message, index=int(np.argmin(ok)))


def _eval(node, env):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        x = _eval(node.arg, env)
        if node.func == "log":
            _guard(x > 0, "log of a nonpositive number")
            return np.log(x)
        if node.func == "sqrt":
            _guard(x >= 0, "sqrt of a negative number")
            return np.sqrt(x)
        out = np.exp(x)
        _guard(np.isfinite(out), "exp overflow")
        return out
    a = _eval(node.left, env)
    b = _eval(node.right, env)
    if node.op == "+":
        out = a + b
    elif node.op == "-":
        out = a - b
    elif node.op == "*":
        out = a * b
    elif node.op == "/":
        _guard(b != 0, "division by zero")
        out = a / b
    else:
        out = np.power(a, b)
        _guard(np.isfinite(out), "power is undefined or overflows")
        return out
    _guard(np.isfinite(out), f"overflow in {node.op!r}")
    return out


def parse_expr(text: str) -> Expr:
    """Parse ``text``; raises ExprSyntaxError with a 0-based column position."""
    if not isinstance(text, str):
        raise TypeError("expression source must be a string")
    return Expr(text, _Parser(text).parse())


def eval_expr(e, bindings: Mapping[str, float]) -> float:
    """Evaluate ``e`` (source text or :class:`Expr`) at scalar bindings."""
    if isinstance(e, str):
        e = parse_expr(e)
    return float(e.evaluate(bindings))
