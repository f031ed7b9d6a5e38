"""Symbolic scalar expressions.

Small immutable expression trees over real constants and named variables,
closed under exact differentiation.  Trees are hashable, so derivative
tables and compiled evaluators can be cached by structure.

    >>> e = parse("x^2*y")
    >>> str(differentiate(e, "x"))
    '2 * x * y'
    >>> evaluate(e, {"x": 3.0, "y": 2.0})
    18.0
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence

__all__ = [
    "Expr", "Const", "Var", "Add", "Sub", "Mul", "Div", "Pow", "Neg", "Func",
    "DomainError", "ParseError", "FUNCTIONS",
    "parse", "differentiate", "evaluate", "simplify", "free_vars",
    "compile_expr", "as_expr", "random_expression",
]

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt")


class DomainError(ArithmeticError):
    """Evaluation left the domain of an operation (x/0, ln(x<=0), sqrt(x<0))."""

    def __init__(self, message, subexpr=None, point=None):
        super().__init__(message)
        self.subexpr = subexpr
        self.point = dict(point) if point is not None else None


class ParseError(ValueError):
    def __init__(self, message, column, text=""):
        super().__init__(f"{message} at column {column}")
        self.column = column
        self.text = text


class Expr:
    """Base node.  Subclasses are frozen dataclasses."""

    __slots__ = ()
    precedence = 100

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k):
        if isinstance(k, float) and k.is_integer():
            k = int(k)
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        return Pow(self, k)

    def children(self) -> tuple:
        return ()


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float

    def __str__(self):
        v = self.value
        if v.is_integer() and abs(v) < 1e15:
            s = str(int(v))
        else:
            s = repr(v)
        return f"({s})" if v < 0 else s


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=True)
class _Binary(Expr):
    left: Expr
    right: Expr
    symbol = "?"

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        lhs = _wrap(self.left, self.precedence, right_side=False)
        rhs = _wrap(self.right, self.precedence, right_side=True)
        return f"{lhs} {self.symbol} {rhs}"


class Add(_Binary):
    symbol = "+"
    precedence = 1


class Sub(_Binary):
    symbol = "-"
    precedence = 1


class Mul(_Binary):
    symbol = "*"
    precedence = 2


class Div(_Binary):
    symbol = "/"
    precedence = 2


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int
    precedence = 4

    def children(self):
        return (self.base,)

    def __str__(self):
        b = str(self.base)
        if not isinstance(self.base, (Var, Func)) or (
                isinstance(self.base, Const) and self.base.value < 0):
            b = f"({b})"
        k = str(self.exponent) if self.exponent >= 0 else f"({self.exponent})"
        return f"{b}^{k}"


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr
    precedence = 3

    def children(self):
        return (self.arg,)

    def __str__(self):
        if isinstance(self.arg, Const) and self.arg.value >= 0:
            return f"-({self.arg})"  # keep it distinct from a negative literal
        return f"-{_wrap(self.arg, self.precedence, right_side=True)}"


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")

    def children(self):
        return (self.arg,)

    def __str__(self):
        return f"{self.name}({self.arg})"


def _wrap(e, prec, right_side):
    s = str(e)
    p = e.precedence
    if isinstance(e, Const) and e.value < 0:
        return s  # already parenthesised
    if p < prec or (right_side and p == prec and isinstance(e, _Binary)):
        return f"({s})"
    return s


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, (int, float)):
        return Const(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


ZERO = Const(0.0)
ONE = Const(1.0)


# ---------------------------------------------------------------------------
# evaluation

def _div(a, b):
    if b == 0.0:
        raise ZeroDivisionError
    return a / b


def _ln(a):
    if a <= 0.0:
        raise ValueError
    return math.log(a)


def _sqrt(a):
    if a < 0.0:
        raise ValueError
    return math.sqrt(a)


def _pow(a, k):
    if k < 0 and a == 0.0:
        raise ZeroDivisionError
    return a ** k


_FUNC_IMPL = {"sin": math.sin, "cos": math.cos, "exp": math.exp,
              "ln": _ln, "sqrt": _sqrt}


def evaluate(e: Expr, point: Mapping[str, float]) -> float:
    """Evaluate ``e`` at ``point`` (a map from variable name to value).

    Raises DomainError naming the innermost offending subexpression.
    """
    return _eval(e, point)


def _eval(e, p):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return float(p[e.name])
        except KeyError:
            raise KeyError(f"variable {e.name!r} is not assigned") from None
    if isinstance(e, Neg):
        return -_eval(e.arg, p)
    if isinstance(e, Pow):
        b = _eval(e.base, p)
        try:
            return _pow(b, e.exponent)
        except (ZeroDivisionError, OverflowError):
            raise DomainError(f"{e} is undefined at the given point", e, p) from None
    if isinstance(e, Func):
        a = _eval(e.arg, p)
        try:
            return _FUNC_IMPL[e.name](a)
        except (ValueError, OverflowError):
            raise DomainError(f"{e} is undefined for argument {a!r}", e, p) from None
    a = _eval(e.left, p)
    b = _eval(e.right, p)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    if isinstance(e, Div):
        if b == 0.0:
            raise DomainError(f"division by zero in {e}", e, p)
        return a / b
    raise TypeError(f"unknown node {type(e).__name__}")


def _codegen(e, index):
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return f"v[{index[e.name]}]"
    if isinstance(e, Neg):
        return f"(-{_codegen(e.arg, index)})"
    if isinstance(e, Pow):
        return f"_pow({_codegen(e.base, index)}, {e.exponent})"
    if isinstance(e, Func):
        return f"_{e.name}({_codegen(e.arg, index)})"
    a, b = _codegen(e.left, index), _codegen(e.right, index)
    if isinstance(e, Div):
        return f"_div({a}, {b})"
    return f"({a} {e.symbol} {b})"


_COMPILE_NS = {"_div": _div, "_ln": _ln, "_sqrt": _sqrt, "_pow": _pow,
               "_sin": math.sin, "_cos": math.cos, "_exp": math.exp}


@lru_cache(maxsize=None)
def _compiled(e: Expr, names: tuple) -> Callable:
    index = {n: i for i, n in enumerate(names)}
    missing = free_vars(e) - set(names)
    if missing:
        raise KeyError(f"variables {sorted(missing)} are not in {names}")
    return eval(f"lambda v: {_codegen(e, index)}", dict(_COMPILE_NS))


def compile_expr(e: Expr, names: Sequence[str]) -> Callable[[Sequence[float]], float]:
    """Compile ``e`` into ``f(values)`` where values follow ``names``.

    Performs the same floating-point operations in the same order as
    :func:`evaluate`, so results are bit-identical.  Domain violations are
    re-run through the interpreter to get a precise DomainError.
    """
    names = tuple(names)
    fn = _compiled(e, names)

    def run(values):
        try:
            return fn(values)
        except (ZeroDivisionError, ValueError, OverflowError):
            evaluate(e, dict(zip(names, values)))
            raise  # pragma: no cover - interpreter raised already
    return run


@lru_cache(maxsize=None)
def free_vars(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    out = frozenset()
    for c in e.children():
        out |= free_vars(c)
    return out


# ---------------------------------------------------------------------------
# smart constructors; these implement the simplifier's rewrite rules

def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def _fold(node):
    try:
        return Const(float(_eval(node, {})))
    except (DomainError, OverflowError):
        return node


def mk_add(a, b):
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if isinstance(b, Neg):
        return mk_sub(a, b.arg)
    return Add(a, b)


def mk_sub(a, b):
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return mk_neg(b)
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if isinstance(b, Neg):
        return mk_add(a, b.arg)
    return Sub(a, b)


def mk_mul(a, b):
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, -1.0):
        return mk_neg(b)
    if _is_const(b, -1.0):
        return mk_neg(a)
    if _is_const(b):
        a, b = b, a
    if _is_const(a) and isinstance(b, Mul) and _is_const(b.left):
        return mk_mul(Const(a.value * b.left.value), b.right)
    return Mul(a, b)


def mk_div(a, b):
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return ZERO
    if _is_const(a) and _is_const(b):
        return _fold(Div(a, b))
    return Div(a, b)


def mk_pow(a, k):
    if k == 0:
        return ONE
    if k == 1:
        return a
    if _is_const(a):
        return _fold(Pow(a, k))
    return Pow(a, k)


def mk_neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mk_func(name, a):
    if _is_const(a):
        return _fold(Func(name, a))
    return Func(name, a)


def simplify(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the rewrite rules.

    Rules: 0+e, e+0, e-0 -> e; 0*e -> 0; 1*e -> e; e^0 -> 1; e^1 -> e;
    --e -> e; constant folding (skipped when folding would hit a domain
    error).  Idempotent by construction.
    """
    return _simplify(e)


@lru_cache(maxsize=None)
def _simplify(e):
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Neg):
        return mk_neg(_simplify(e.arg))
    if isinstance(e, Pow):
        return mk_pow(_simplify(e.base), e.exponent)
    if isinstance(e, Func):
        return mk_func(e.name, _simplify(e.arg))
    a, b = _simplify(e.left), _simplify(e.right)
    return {Add: mk_add, Sub: mk_sub, Mul: mk_mul, Div: mk_div}[type(e)](a, b)


# ---------------------------------------------------------------------------
# differentiation

def differentiate(e: Expr, v: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to variable ``v``."""
    if not isinstance(v, str) or not v:
        raise ValueError(f"bad variable name {v!r}")
    return _diff(e, v)


@lru_cache(maxsize=None)
def _diff(e, v):
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if v not in free_vars(e):
        return ZERO
    if isinstance(e, Neg):
        return mk_neg(_diff(e.arg, v))
    if isinstance(e, Add):
        return mk_add(_diff(e.left, v), _diff(e.right, v))
    if isinstance(e, Sub):
        return mk_sub(_diff(e.left, v), _diff(e.right, v))
    if isinstance(e, Mul):
        a, b = e.left, e.right
        return mk_add(mk_mul(_diff(a, v), b), mk_mul(a, _diff(b, v)))
    if isinstance(e, Div):
        a, b = e.left, e.right
        num = mk_sub(mk_mul(_diff(a, v), b), mk_mul(a, _diff(b, v)))
        return mk_div(num, mk_pow(b, 2))
    if isinstance(e, Pow):
        k = e.exponent
        return mk_mul(mk_mul(Const(float(k)), mk_pow(e.base, k - 1)),
                      _diff(e.base, v))
    if isinstance(e, Func):
        a = e.arg
        da = _diff(a, v)
        if e.name == "sin":
            outer = mk_func("cos", a)
        elif e.name == "cos":
            outer = mk_neg(mk_func("sin", a))
        elif e.name == "exp":
            outer = e
        elif e.name == "ln":
            return mk_div(da, a)
        else:  # sqrt
            return mk_div(da, mk_mul(Const(2.0), e))
        return mk_mul(outer, da)
    raise TypeError(f"unknown node {type(e).__name__}")


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
""", re.VERBOSE)


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos + 1, text)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            out.append(("op" if kind == "op" else kind,
                        "^" if tok == "**" else tok, pos + 1))
        pos = m.end()
    out.append(("end", "", len(text) + 1))
    return out


class _Parser:
    # expr   := term (('+'|'-') term)*
    # term   := unary (('*'|'/') unary)*
    # unary  := '-' number | '-' unary | '+' unary | power
    # power  := atom ('^' unary)?        (right associative)
    # atom   := number | name | name '(' expr ')' | '(' expr ')'

    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {value!r}, found {what}", tok[2], self.text)
        self.i += 1
        return tok

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2], self.text)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            nxt, after = self.toks[self.i], self.toks[min(self.i + 1, len(self.toks) - 1)]
            if nxt[0] == "num" and not (after[0] == "op" and after[1] == "^"):
                self.take()
                return Const(-float(nxt[1]))  # negative literal, as printed
            return Neg(self.unary())
        if tok[0] == "op" and tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            col = self.peek()[2]
            exponent = simplify(self.unary())
            if not (isinstance(exponent, Const) and exponent.value.is_integer()):
                raise ParseError("exponent must be an integer constant", col, self.text)
            return Pow(base, int(exponent.value))
        return base

    def atom(self):
        kind, value, col = self.take()
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if value == "log":
                    value = "ln"
                if value not in FUNCTIONS:
                    raise ParseError(f"unknown function {value!r}", col, self.text)
                self.take("(")
                arg = self.expr()
                self.take(")")
                return Func(value, arg)
            if value in FUNCTIONS:
                raise ParseError(f"function {value!r} needs an argument", col, self.text)
            return Var(value)
        if kind == "op" and value == "(":
            e = self.expr()
            self.take(")")
            return e
        what = "end of input" if kind == "end" else repr(value)
        raise ParseError(f"unexpected {what}", col, self.text)


def parse(text: str) -> Expr:
    """Parse infix text such as ``"u1*sin(x2) + 3"``.

    ``^`` and ``**`` are integer powers; ``log`` is accepted for ``ln``.
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# random expressions for self-tests

def random_expression(rng, names: Sequence[str], depth: int = 3) -> Expr:
    """Draw a random tree that is defined everywhere on a bounded box.

    Division, ln and sqrt only appear guarded (``a / (c + b^2)``,
    ``ln(c + a^2)``, ``sqrt(c + a^2)`` with c >= 0.5) and exp arguments
    are wrapped in sin, so values stay moderate for |x| <= 2.
    """
    names = list(names)

    def leaf():
        if rng.random() < 0.7:
            return Var(names[int(rng.integers(len(names)))])
        return Const(float(round(rng.uniform(-2.0, 2.0), 3)))

    def guard(a):
        return Add(Const(float(round(rng.uniform(0.5, 2.0), 3))), Pow(a, 2))

    def build(d):
        if d == 0:
            return leaf()
        r = rng.random()
        if r < 0.15:
            return leaf()
        a = build(d - 1)
        if r < 0.30:
            return Add(a, build(d - 1))
        if r < 0.42:
            return Sub(a, build(d - 1))
        if r < 0.57:
            return Mul(a, build(d - 1))
        if r < 0.64:
            return Div(a, guard(build(d - 1)))
        if r < 0.70:
            return Pow(a, int(rng.integers(0, 4)))
        if r < 0.74:
            return Neg(a)
        if r < 0.81:
            return Func("sin", a)
        if r < 0.87:
            return Func("cos", a)
        if r < 0.91:
            return Func("exp", Func("sin", a))
        if r < 0.96:
            return Func("ln", guard(a))
        return Func("sqrt", guard(a))

    return build(depth)
