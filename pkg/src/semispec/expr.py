"""Expressions in one variable ``t``: parsing, evaluation and symbolic derivatives.

Grammar (EBNF)::

    expr     = term , { ("+" | "-") , term } ;
    term     = unary , { ("*" | "/") , unary } ;
    unary    = ("-" | "+") , unary | power ;
    power    = atom , [ "^" , unary ] ;
    atom     = number | "t" | "pi" | "e" | func , "(" , expr , ")" | "(" , expr , ")" ;
    func     = "sin" | "cos" | "exp" | "log" | "sqrt" | "tanh" | "abs" | "sign" ;
    number   = digits , [ "." , [ digits ] ] , [ ("e" | "E") , [ "+" | "-" ] , digits ]
             | "." , digits , [ ("e" | "E") , [ "+" | "-" ] , digits ] ;

``^`` binds tighter than unary minus (``-t^2`` is ``-(t^2)``) and is
right-associative; its exponent must fold to a constant.  ``sign`` is accepted
so that printed derivatives of ``abs`` re-parse; ``d/dt abs(u)`` is
``sign(u)*u'`` with ``sign(0) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

__all__ = [
    "Const",
    "NamedConst",
    "Var",
    "Unary",
    "Binary",
    "ExprAst",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "NonConstantExponentError",
    "ExprDomainError",
    "parse_expression",
    "differentiate",
    "evaluate",
    "compile_expr",
    "to_source",
    "contains_abs",
    "FUNCTIONS",
]


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class NonConstantExponentError(ExprSyntaxError):
    def __init__(self, offset: int):
        super().__init__("exponent depends on t", offset)


class ExprDomainError(ExprError, ArithmeticError):
    def __init__(self, node: "ExprAst", detail: str):
        super().__init__(f"{detail} in {to_source(node)}")
        self.node = node


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class NamedConst:
    name: str  # "pi" or "e"

    @property
    def value(self) -> float:
        return NAMED_CONSTANTS[self.name]


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # neg or a name from FUNCTIONS
    arg: "ExprAst"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    left: "ExprAst"
    right: "ExprAst"


ExprAst = Union[Const, NamedConst, Var, Unary, Binary]

NAMED_CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "tanh", "abs", "sign")

# ---------------------------------------------------------------- tokenizer

_NUM, _IDENT, _OP, _END = "num", "ident", "op", "end"


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == ".":
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            # exponent only when digits follow, so "2e" stays 2 * e
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    while k < n and source[k].isdigit():
                        k += 1
                    j = k
            tokens.append(_Token(_NUM, source[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token(_IDENT, source[i:j], i))
            i = j
            continue
        if c in "+-*/^()":
            tokens.append(_Token(_OP, c, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(_Token(_END, "", n))
    return tokens


# ------------------------------------------------------------------- parser


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.tok.kind != _OP or self.tok.text != text:
            found = self.tok.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", self.tok.offset)
        return self.advance()

    def parse(self) -> ExprAst:
        node = self.expr()
        if self.tok.kind != _END:
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while self.tok.kind == _OP and self.tok.text in "+-":
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> ExprAst:
        node = self.unary()
        while self.tok.kind == _OP and self.tok.text in "*/":
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> ExprAst:
        if self.tok.kind == _OP and self.tok.text == "-":
            self.advance()
            return Unary("neg", self.unary())
        if self.tok.kind == _OP and self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        if self.tok.kind == _OP and self.tok.text == "^":
            self.advance()
            start = self.tok.offset
            exponent = self.unary()
            if not _is_constant(exponent):
                raise NonConstantExponentError(start)
            return Binary("^", base, exponent)
        return base

    def atom(self) -> ExprAst:
        tok = self.tok
        if tok.kind == _NUM:
            self.advance()
            return Const(float(tok.text))
        if tok.kind == _IDENT:
            self.advance()
            if tok.text == "t":
                return Var()
            if tok.text in NAMED_CONSTANTS:
                return NamedConst(tok.text)
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(tok.text, arg)
            raise UnknownIdentifierError(tok.text, tok.offset)
        if tok.kind == _OP and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", tok.offset)


def parse_expression(source: str) -> ExprAst:
    """Parse ``source`` into an AST; errors carry the offending offset."""
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(source).parse()


# ------------------------------------------------------------ printing


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_source(node: ExprAst) -> str:
    """Print ``node`` so that :func:`parse_expression` rebuilds the same tree."""
    if isinstance(node, Const):
        text = repr(float(node.value))
        return f"({text})" if node.value < 0 or text[0] == "-" else text
    if isinstance(node, NamedConst):
        return node.name
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = to_source(node.arg)
            if _needs_parens(node.arg, 3, right=True):
                inner = f"({inner})"
            return f"-{inner}"
        return f"{node.op}({to_source(node.arg)})"
    prec = _PREC[node.op]
    left = to_source(node.left)
    right = to_source(node.right)
    if node.op == "^":
        # base binds tighter than anything but atoms; exponent is a unary
        if not _is_atom(node.left):
            left = f"({left})"
        if isinstance(node.right, Binary) and node.right.op != "^":
            right = f"({right})"
        return f"{left}^{right}"
    if _needs_parens(node.left, prec, right=False):
        left = f"({left})"
    if _needs_parens(node.right, prec, right=True):
        right = f"({right})"
    return f"{left} {node.op} {right}"


def _is_atom(node: ExprAst) -> bool:
    if isinstance(node, Const):
        return node.value >= 0
    return isinstance(node, (NamedConst, Var)) or (isinstance(node, Unary) and node.op != "neg")


def _needs_parens(child: ExprAst, parent_prec: int, right: bool) -> bool:
    if isinstance(child, Binary):
        cp = _PREC[child.op]
        return cp < parent_prec or (right and cp == parent_prec and child.op != "^")
    if isinstance(child, Unary) and child.op == "neg":
        return parent_prec > 3
    return False


# ------------------------------------------------------- constant folding


def _is_constant(node: ExprAst) -> bool:
    if isinstance(node, Var):
        return False
    if isinstance(node, (Const, NamedConst)):
        return True
    if isinstance(node, Unary):
        return _is_constant(node.arg)
    return _is_constant(node.left) and _is_constant(node.right)


def _const_value(node: ExprAst) -> float:
    return float(compile_expr(node)(0.0))


def _c(value: float) -> ExprAst:
    # folded constants keep the parser's shape: Const >= 0, negatives as neg(Const)
    value = float(value)
    if value < 0:
        return Unary("neg", Const(-value))
    return Const(value + 0.0)


def _num(node: ExprAst) -> float | None:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Unary) and node.op == "neg" and isinstance(node.arg, Const):
        return -node.arg.value
    return None


def _add(a: ExprAst, b: ExprAst) -> ExprAst:
    va, vb = _num(a), _num(b)
    if va is not None and vb is not None:
        return _c(va + vb)
    if va == 0.0:
        return b
    if vb == 0.0:
        return a
    return Binary("+", a, b)


def _sub(a: ExprAst, b: ExprAst) -> ExprAst:
    va, vb = _num(a), _num(b)
    if va is not None and vb is not None:
        return _c(va - vb)
    if vb == 0.0:
        return a
    if va == 0.0:
        return _neg(b)
    return Binary("-", a, b)


def _mul(a: ExprAst, b: ExprAst) -> ExprAst:
    va, vb = _num(a), _num(b)
    if va is not None and vb is not None:
        return _c(va * vb)
    if va == 0.0 or vb == 0.0:
        return _c(0.0)
    if va == 1.0:
        return b
    if vb == 1.0:
        return a
    if va == -1.0:
        return _neg(b)
    if vb == -1.0:
        return _neg(a)
    return Binary("*", a, b)


def _div(a: ExprAst, b: ExprAst) -> ExprAst:
    va, vb = _num(a), _num(b)
    if va is not None and vb is not None and vb != 0.0:
        return _c(va / vb)
    if va == 0.0:
        return _c(0.0)
    if vb == 1.0:
        return a
    return Binary("/", a, b)


def _neg(a: ExprAst) -> ExprAst:
    va = _num(a)
    if va is not None:
        return _c(-va)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def _pow(a: ExprAst, exponent: float) -> ExprAst:
    if exponent == 0.0:
        return _c(1.0)
    if exponent == 1.0:
        return a
    va = _num(a)
    if va is not None:
        return _c(va**exponent)
    return Binary("^", a, _c(exponent))


def _fn(op: str, a: ExprAst) -> ExprAst:
    if _num(a) is not None:
        return _c(_const_value(Unary(op, a)))
    return Unary(op, a)


def _fold(node: ExprAst) -> ExprAst:
    if isinstance(node, (Var, NamedConst)):
        return node
    if isinstance(node, Const):
        return node
    if _is_constant(node):
        return _c(_const_value(node))
    if isinstance(node, Unary):
        arg = _fold(node.arg)
        return _neg(arg) if node.op == "neg" else _fn(node.op, arg)
    left, right = _fold(node.left), _fold(node.right)
    if node.op == "+":
        return _add(left, right)
    if node.op == "-":
        return _sub(left, right)
    if node.op == "*":
        return _mul(left, right)
    if node.op == "/":
        return _div(left, right)
    return _pow(left, _const_value(right))


# ------------------------------------------------------------ derivative


def differentiate(node: ExprAst) -> ExprAst:
    """Exact derivative in ``t`` with constant folding."""
    return _d(_fold(node))


def _d(node: ExprAst) -> ExprAst:
    if isinstance(node, (Const, NamedConst)):
        return _c(0.0)
    if isinstance(node, Var):
        return _c(1.0)
    if isinstance(node, Unary):
        u = node.arg
        du = _d(u)
        if node.op == "neg":
            return _neg(du)
        if _num(du) == 0.0:
            return _c(0.0)
        if node.op == "sin":
            outer = _fn("cos", u)
        elif node.op == "cos":
            outer = _neg(_fn("sin", u))
        elif node.op == "exp":
            outer = node
        elif node.op == "log":
            return _div(du, u)
        elif node.op == "sqrt":
            return _div(du, _mul(_c(2.0), node))
        elif node.op == "tanh":
            outer = _sub(_c(1.0), _pow(node, 2.0))
        elif node.op == "abs":
            outer = _fn("sign", u)
        elif node.op == "sign":
            return _c(0.0)
        else:  # pragma: no cover - guarded by the parser
            raise ExprError(f"unknown function {node.op}")
        return _mul(outer, du)
    a, b = node.left, node.right
    if node.op == "+":
        return _add(_d(a), _d(b))
    if node.op == "-":
        return _sub(_d(a), _d(b))
    if node.op == "*":
        return _add(_mul(_d(a), b), _mul(a, _d(b)))
    if node.op == "/":
        return _div(_sub(_mul(_d(a), b), _mul(a, _d(b))), _pow(b, 2.0))
    c = _const_value(b)
    return _mul(_mul(_c(c), _pow(a, c - 1.0)), _d(a))


def contains_abs(node: ExprAst) -> bool:
    if isinstance(node, Unary):
        return node.op in ("abs", "sign") or contains_abs(node.arg)
    if isinstance(node, Binary):
        return contains_abs(node.left) or contains_abs(node.right)
    return False


# ------------------------------------------------------------ evaluation


def _checked(node: ExprAst, bad: np.ndarray | bool, detail: str) -> None:
    if np.any(bad):
        raise ExprDomainError(node, detail)


@lru_cache(maxsize=1024)
def compile_expr(node: ExprAst) -> Callable[[float | np.ndarray], float | np.ndarray]:
    """Turn an AST into a numpy-aware callable of ``t``.

    Domain violations raise :class:`ExprDomainError` naming the node.
    """
    if isinstance(node, (Const, NamedConst)):
        value = node.value
        return lambda t: np.full(np.shape(t), value) if np.ndim(t) else value
    if isinstance(node, Var):
        return lambda t: np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    if isinstance(node, Unary):
        f = compile_expr(node.arg)
        op = node.op
        if op == "neg":
            return lambda t: -f(t)
        if op == "log":
            def log_(t):
                u = f(t)
                _checked(node, np.asarray(u) <= 0, "log of nonpositive value")
                return np.log(u)
            return log_
        if op == "sqrt":
            def sqrt_(t):
                u = f(t)
                _checked(node, np.asarray(u) < 0, "sqrt of negative value")
                return np.sqrt(u)
            return sqrt_
        fn = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "tanh": np.tanh,
              "abs": np.abs, "sign": np.sign}[op]
        return lambda t: fn(f(t))
    fl, fr = compile_expr(node.left), compile_expr(node.right)
    op = node.op
    if op == "+":
        return lambda t: fl(t) + fr(t)
    if op == "-":
        return lambda t: fl(t) - fr(t)
    if op == "*":
        return lambda t: fl(t) * fr(t)
    if op == "/":
        def div_(t):
            den = fr(t)
            _checked(node, np.asarray(den) == 0, "division by zero")
            return fl(t) / den
        return div_
    exponent = float(fr(0.0))
    integral = exponent.is_integer()

    def pow_(t):
        base = fl(t)
        if not integral:
            _checked(node, np.asarray(base) < 0, "non-integer power of negative value")
        if exponent < 0:
            _checked(node, np.asarray(base) == 0, "negative power of zero")
        return np.power(base, exponent)
    return pow_


def evaluate(node: ExprAst, t: float | np.ndarray) -> float | np.ndarray:
    """Evaluate ``node`` at ``t`` (scalar or array)."""
    value = compile_expr(node)(t)
    return float(value) if np.ndim(value) == 0 else value
