"""Small expression language for chart component functions.

Grammar (precedence climbing, all binary operators left-associative):

    expr    :=  expr ('+'|'-') expr      lowest
             |  expr ('*'|'/') expr
             |  '-' expr                 unary minus, binds above '*'
             |  expr '^' expr            highest; exponent must be constant
             |  'sin'|'cos'|'exp'|'sqrt' '(' expr ')'
             |  NUMBER | IDENT | '(' expr ')'

Coordinates are named x1..xn (1-based in source text, 0-based in the AST);
every other identifier is a named parameter bound at evaluation time.
Syntax errors carry the byte offset of the offending token.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from . import jets

_FUNCTIONS = ("sin", "cos", "exp", "sqrt")
_COORD_RE = re.compile(r"^x([1-9][0-9]*)$")
_NUMBER_RE = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW = 1, 2, 3, 4
_BINARY_PREC = {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL,
                "^": _PREC_POW}
_OP_NAME = {"+": "add", "-": "sub", "*": "mul", "/": "div", "^": "pow"}
_OP_SYMBOL = {v: k for k, v in _OP_NAME.items()}


class ExprError(ValueError):
    """Parse or evaluation failure; `offset` is the byte position if known."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Coord:
    index: int  # 0-based


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # neg | sin | cos | exp | sqrt
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # add | sub | mul | div | pow
    left: "Expr"
    right: "Expr"


Expr = Const | Coord | Param | Unary | Binary


def tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        m = _NUMBER_RE.match(text, i)
        if m:
            tokens.append(("num", float(m.group(0)), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(("ident", m.group(0), i))
            i = m.end()
            continue
        raise ExprError(f"unexpected character {ch!r}", i)
    tokens.append(("eof", None, n))
    return tokens


def parse(text: str, dim: int | None = None,
          param_names: set[str] | None = None) -> Expr:
    """Parse `text` into an AST.

    When `dim` is given, coordinate indices are range-checked against it;
    when `param_names` is given, identifiers outside it are rejected.
    """
    tokens = tokenize(text)
    pos = 0

    def peek():
        return tokens[pos]

    def advance():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def expect(kind):
        tok = advance()
        if tok[0] != kind:
            raise ExprError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        return tok

    def parse_atom() -> Expr:
        kind, value, offset = advance()
        if kind == "num":
            return Const(value)
        if kind == "-":
            arg = parse_expr(_PREC_UNARY)
            if isinstance(arg, Const):
                return Const(-arg.value)  # fold so printing round-trips
            return Unary("neg", arg)
        if kind == "(":
            inner = parse_expr(1)
            expect(")")
            return inner
        if kind == "ident":
            if value in _FUNCTIONS:
                expect("(")
                arg = parse_expr(1)
                expect(")")
                return Unary(value, arg)
            m = _COORD_RE.match(value)
            if m:
                index = int(m.group(1)) - 1
                if dim is not None and index >= dim:
                    raise ExprError(
                        f"coordinate {value} out of range for dimension {dim}", offset
                    )
                return Coord(index)
            if param_names is not None and value not in param_names:
                raise ExprError(f"unknown identifier {value!r}", offset)
            return Param(value)
        raise ExprError(f"unexpected token {kind!r}", offset)

    def parse_expr(min_prec: int) -> Expr:
        left = parse_atom()
        while True:
            kind, _, offset = peek()
            prec = _BINARY_PREC.get(kind)
            if prec is None or prec < min_prec:
                return left
            advance()
            right = parse_expr(prec + 1)  # left-associative
            if kind == "^" and not is_constant(right):
                raise ExprError(
                    "power exponent must be a constant expression", offset
                )
            left = Binary(_OP_NAME[kind], left, right)

    result = parse_expr(1)
    kind, _, offset = peek()
    if kind != "eof":
        raise ExprError(f"trailing input starting with {kind!r}", offset)
    return result


def is_constant(e: Expr) -> bool:
    """True when the subtree references no coordinates and no parameters."""
    match e:
        case Const():
            return True
        case Coord() | Param():
            return False
        case Unary(_, arg):
            return is_constant(arg)
        case Binary(_, left, right):
            return is_constant(left) and is_constant(right)
    raise TypeError(f"not an expression node: {e!r}")


def eval_float(e: Expr, point, params: dict | None = None) -> float:
    """Evaluate at a plain point; parameters taken from `params`."""
    params = params or {}
    match e:
        case Const(v):
            return v
        case Coord(i):
            if i >= len(point):
                raise ExprError(f"coordinate x{i + 1} outside point of dim {len(point)}")
            return float(point[i])
        case Param(name):
            if name not in params:
                raise ExprError(f"unbound parameter {name!r}")
            return float(params[name])
        case Unary(op, arg):
            v = eval_float(arg, point, params)
            if op == "neg":
                return -v
            if op == "sqrt":
                if v < 0:
                    raise ExprError(f"sqrt of negative value {v}")
                return math.sqrt(v)
            return getattr(math, op)(v)
        case Binary(op, left, right):
            a = eval_float(left, point, params)
            if op == "pow":
                r = eval_float(right, (), params)
                if float(r).is_integer():
                    return a ** int(r)
                if a <= 0:
                    raise ExprError(f"fractional power of non-positive base {a}")
                return a**r
            b = eval_float(right, point, params)
            if op == "add":
                return a + b
            if op == "sub":
                return a - b
            if op == "mul":
                return a * b
            if b == 0.0:
                raise ExprError("division by zero")
            return a / b
    raise TypeError(f"not an expression node: {e!r}")


def eval_jet(e: Expr, coords: list[jets.Jet], params: dict | None = None) -> jets.Jet:
    """Evaluate on coordinate jets; the result lives in their space."""
    params = params or {}
    space = coords[0].space

    def rec(node: Expr) -> jets.Jet:
        match node:
            case Const(v):
                return space.constant(v)
            case Coord(i):
                if i >= len(coords):
                    raise ExprError(f"coordinate x{i + 1} outside chart of dim {len(coords)}")
                return coords[i]
            case Param(name):
                if name not in params:
                    raise ExprError(f"unbound parameter {name!r}")
                return space.constant(float(params[name]))
            case Unary(op, arg):
                v = rec(arg)
                if op == "neg":
                    return -v
                return getattr(jets, op)(v)
            case Binary("pow", left, right):
                base = rec(left)
                r = eval_float(right, (), params)
                return jets.power(base, r)
            case Binary(op, left, right):
                a = rec(left)
                b = rec(right)
                if op == "add":
                    return a + b
                if op == "sub":
                    return a - b
                if op == "mul":
                    return a * b
                return a / b
        raise TypeError(f"not an expression node: {node!r}")

    return rec(e)


def pretty(e: Expr) -> str:
    """Render with minimal parentheses; `parse(pretty(e)) == e`."""

    def fmt_number(v: float) -> str:
        if v == int(v) and abs(v) < 1e16:
            return str(int(v))
        return repr(v)

    def rec(node: Expr, min_prec: int) -> str:
        match node:
            case Const(v):
                s = fmt_number(abs(v)) if v < 0 else fmt_number(v)
                if v < 0:
                    s = "-" + s
                    return s if min_prec <= _PREC_UNARY else f"({s})"
                return s
            case Coord(i):
                return f"x{i + 1}"
            case Param(name):
                return name
            case Unary("neg", arg):
                s = "-" + rec(arg, _PREC_UNARY + 1)
                return s if min_prec <= _PREC_UNARY else f"({s})"
            case Unary(op, arg):
                return f"{op}({rec(arg, 1)})"
            case Binary(op, left, right):
                prec = _BINARY_PREC[_OP_SYMBOL[op]]
                sym = _OP_SYMBOL[op]
                sep = f" {sym} " if prec == _PREC_ADD else sym
                s = rec(left, prec) + sep + rec(right, prec + 1)
                return s if prec >= min_prec else f"({s})"
        raise TypeError(f"not an expression node: {node!r}")

    return rec(e, 1)


def shift_coordinates(e: Expr, offset: int) -> Expr:
    """Renumber coordinates x_i -> x_(i+offset); used by product charts."""
    match e:
        case Const() | Param():
            return e
        case Coord(i):
            return Coord(i + offset)
        case Unary(op, arg):
            return Unary(op, shift_coordinates(arg, offset))
        case Binary(op, left, right):
            return Binary(op, shift_coordinates(left, offset),
                          shift_coordinates(right, offset))
    raise TypeError(f"not an expression node: {e!r}")


def substitute(e: Expr, values: dict) -> Expr:
    """Replace named parameters with numeric constants; others pass through."""
    match e:
        case Const() | Coord():
            return e
        case Param(name):
            return Const(float(values[name])) if name in values else e
        case Unary(op, arg):
            return Unary(op, substitute(arg, values))
        case Binary(op, left, right):
            return Binary(op, substitute(left, values), substitute(right, values))
    raise TypeError(f"not an expression node: {e!r}")


def coordinates_used(e: Expr) -> set[int]:
    match e:
        case Const() | Param():
            return set()
        case Coord(i):
            return {i}
        case Unary(_, arg):
            return coordinates_used(arg)
        case Binary(_, left, right):
            return coordinates_used(left) | coordinates_used(right)
    raise TypeError(f"not an expression node: {e!r}")
