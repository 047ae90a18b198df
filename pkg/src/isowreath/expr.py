"""Expression language for surface definitions and second-order forward AD.

Grammar (whitespace is insignificant, no implicit multiplication)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right-associative
    atom   := number | name | func "(" expr ")" | "(" expr ")"

``u`` and ``v`` are the surface parameters, every other bare name is a
parameter bound at evaluation time (``pi`` is predefined).  ``-u^2`` parses as
``-(u^2)``.

Evaluation uses :class:`Jet2`, a truncated second-order Taylor number in two
directions.  Jet components may themselves be numpy arrays (vectorized grid
evaluation) or Jet2 instances (nested jets give derivatives up to order four).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "abs")
CONSTANTS = {"pi": math.pi}


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownFunctionError(ExprSyntaxError):
    pass


class UnboundParameterError(ExprError):
    pass


class DomainError(ExprError):
    pass


class NonDifferentiableError(DomainError):
    pass


# ---------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "u" or "v"


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Param, Neg, Bin, Call]


def Add(a, b):
    return Bin("+", a, b)


def Sub(a, b):
    return Bin("-", a, b)


def Mul(a, b):
    return Bin("*", a, b)


def Div(a, b):
    return Bin("/", a, b)


def Pow(a, b):
    return Bin("^", a, b)


# ---------------------------------------------------------------- lexer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)
_ATOM_START = frozenset({"number", "identifier", "(", "-"})


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, name, op, end
    text: str
    offset: int  # byte offset


def _tokenize(source: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(source)
    byte_at = lambda i: len(source[:i].encode("utf-8"))
    while True:
        while pos < n and source[pos].isspace():
            pos += 1
        if pos >= n:
            toks.append(_Tok("end", "", byte_at(n)))
            return toks
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", byte_at(pos), _ATOM_START | {"+", "*", "/", "^", ")"})
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), byte_at(m.start(kind))))
        pos = m.end()


class _Parser:
    def __init__(self, source: str):
        self.toks = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _error(self, expected):
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {what}", t.offset, frozenset(expected))

    def _is_op(self, *ops) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self._error({"+", "-", "*", "/", "^", "end of input"})
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self._is_op("+", "-"):
            op = self.tok.text
            self.i += 1
            e = Bin(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self._is_op("*", "/"):
            op = self.tok.text
            self.i += 1
            e = Bin(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self._is_op("-"):
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self._is_op("^"):
            self.i += 1
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(float(t.text))
        if t.kind == "name":
            self.i += 1
            if self._is_op("("):
                if t.text not in FUNCTIONS:
                    raise UnknownFunctionError(f"unknown function {t.text!r}", t.offset, frozenset(FUNCTIONS))
                self.i += 1
                arg = self.expr()
                if not self._is_op(")"):
                    self._error({")"})
                self.i += 1
                return Call(t.text, arg)
            if t.text in FUNCTIONS:
                self._error({"("})
            if t.text in ("u", "v"):
                return Var(t.text)
            return Param(t.text)
        if self._is_op("("):
            self.i += 1
            e = self.expr()
            if not self._is_op(")"):
                self._error({")"})
            self.i += 1
            return e
        self._error(_ATOM_START)


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree."""
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0, _ATOM_START)
    return _Parser(source).parse()


# ---------------------------------------------------------------- printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_num(x: float) -> str:
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def to_string(e: Expr) -> str:
    """Render with minimal parentheses; ``parse(to_string(e)) == e`` for parsed trees."""
    return _show(e, 0)


def _show(e: Expr, ctx: int) -> str:
    # ctx: 0 any, 1 sum operand, 2 product operand, 3 unary operand, 4 power base
    if isinstance(e, Num):
        s = _fmt_num(e.value)
        return f"({s})" if e.value < 0 else s
    if isinstance(e, (Var, Param)):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({_show(e.arg, 0)})"
    if isinstance(e, Neg):
        s = "-" + _show(e.arg, 3)
        return f"({s})" if ctx >= 4 else s
    if e.op == "^":
        s = f"{_show(e.left, 4)}^{_show(e.right, 3)}"
        return f"({s})" if ctx >= 4 else s
    p = _PREC[e.op]
    s = f"{_show(e.left, p)} {e.op} {_show(e.right, p + 1)}"
    return f"({s})" if ctx > p else s


def free_params(e: Expr) -> set[str]:
    if isinstance(e, Param):
        return {e.name}
    if isinstance(e, Neg) or isinstance(e, Call):
        return free_params(e.arg)
    if isinstance(e, Bin):
        return free_params(e.left) | free_params(e.right)
    return set()


# ---------------------------------------------------------------- Jet2


def _val(x):
    """Innermost value of a (possibly nested) jet."""
    while isinstance(x, Jet2):
        x = x.value
    return x


@dataclass(frozen=True)
class Jet2:
    """Value and partial derivatives up to second order in (u, v)."""

    value: object
    du: object = 0.0
    dv: object = 0.0
    duu: object = 0.0
    duv: object = 0.0
    dvv: object = 0.0

    __array_ufunc__ = None  # keep numpy from broadcasting over jets

    @staticmethod
    def const(c) -> "Jet2":
        return Jet2(c, 0.0, 0.0, 0.0, 0.0, 0.0)

    @staticmethod
    def var_u(u) -> "Jet2":
        return Jet2(u, 1.0, 0.0, 0.0, 0.0, 0.0)

    @staticmethod
    def var_v(v) -> "Jet2":
        return Jet2(v, 0.0, 1.0, 0.0, 0.0, 0.0)

    def parts(self) -> tuple:
        return (self.value, self.du, self.dv, self.duu, self.duv, self.dvv)

    def chain(self, f0, f1, f2) -> "Jet2":
        """Compose with a scalar function whose value and derivatives at ``self.value`` are given."""
        return Jet2(
            f0,
            f1 * self.du,
            f1 * self.dv,
            f2 * (self.du * self.du) + f1 * self.duu,
            f2 * (self.du * self.dv) + f1 * self.duv,
            f2 * (self.dv * self.dv) + f1 * self.dvv,
        )

    def __add__(self, o):
        if isinstance(o, Jet2):
            return Jet2(self.value + o.value, self.du + o.du, self.dv + o.dv,
                        self.duu + o.duu, self.duv + o.duv, self.dvv + o.dvv)
        return Jet2(self.value + o, self.du, self.dv, self.duu, self.duv, self.dvv)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.du, -self.dv, -self.duu, -self.duv, -self.dvv)

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, Jet2):
            a, b = self, o
            return Jet2(
                a.value * b.value,
                a.du * b.value + a.value * b.du,
                a.dv * b.value + a.value * b.dv,
                a.duu * b.value + 2.0 * (a.du * b.du) + a.value * b.duu,
                a.duv * b.value + a.du * b.dv + a.dv * b.du + a.value * b.duv,
                a.dvv * b.value + 2.0 * (a.dv * b.dv) + a.value * b.dvv,
            )
        return Jet2(self.value * o, self.du * o, self.dv * o, self.duu * o, self.duv * o, self.dvv * o)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        x = self.value
        if np.any(_val(x) == 0):
            raise DomainError("division by zero")
        r = 1.0 / x
        r2 = r * r
        return self.chain(r, -r2, 2.0 * r2 * r)

    def __truediv__(self, o):
        if isinstance(o, Jet2):
            return self * o.reciprocal()
        if np.any(_val(o) == 0):
            raise DomainError("division by zero")
        return self * (1.0 / o)

    def __rtruediv__(self, o):
        return self.reciprocal() * o

    def __pow__(self, o):
        return jet_pow(self, o)


def _is_jet(x) -> bool:
    return isinstance(x, Jet2)


def _int_pow(x, n: int):
    """x**n for integer n >= 0 by repeated squaring."""
    result = None
    base = x
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return 1.0 if result is None else result


def _all_zero(p) -> bool:
    if _is_jet(p):
        return all(_all_zero(q) for q in p.parts())
    return bool(np.all(np.asarray(p) == 0))


def _integral_exponent(e) -> int | None:
    if _is_jet(e):
        if not all(_all_zero(p) for p in e.parts()[1:]):
            return None
        return _integral_exponent(e.value)
    arr = np.asarray(e)
    if arr.ndim != 0:
        return None
    f = float(arr)
    if f.is_integer() and abs(f) < 2**31:
        return int(f)
    return None


def jet_pow(x, e):
    n = _integral_exponent(e)
    if n is not None:
        if n >= 0:
            return _int_pow(x, n)
        return _reciprocal(_int_pow(x, -n))
    if np.any(_val(x) <= 0):
        raise DomainError("non-integer power requires a positive base")
    return fexp(e * flog(x))


def _reciprocal(x):
    if _is_jet(x):
        return x.reciprocal()
    if np.any(x == 0):
        raise DomainError("division by zero")
    return 1.0 / x


# Elementary functions written against the jet interface so that nested jets work.


def fsin(x):
    if _is_jet(x):
        s, c = fsin(x.value), fcos(x.value)
        return x.chain(s, c, -s)
    return np.sin(x)


def fcos(x):
    if _is_jet(x):
        s, c = fsin(x.value), fcos(x.value)
        return x.chain(c, -s, -c)
    return np.cos(x)


def ftan(x):
    if _is_jet(x):
        t = ftan(x.value)
        d1 = 1.0 + t * t
        return x.chain(t, d1, 2.0 * t * d1)
    if np.any(np.abs(np.cos(x)) < 1e-300):
        raise DomainError("tan pole")
    return np.tan(x)


def fsinh(x):
    if _is_jet(x):
        s, c = fsinh(x.value), fcosh(x.value)
        return x.chain(s, c, s)
    return np.sinh(x)


def fcosh(x):
    if _is_jet(x):
        s, c = fsinh(x.value), fcosh(x.value)
        return x.chain(c, s, c)
    return np.cosh(x)


def ftanh(x):
    if _is_jet(x):
        t = ftanh(x.value)
        d1 = 1.0 - t * t
        return x.chain(t, d1, -2.0 * t * d1)
    return np.tanh(x)


def fexp(x):
    if _is_jet(x):
        e = fexp(x.value)
        return x.chain(e, e, e)
    return np.exp(x)


def flog(x):
    if np.any(_val(x) <= 0):
        raise DomainError("log of non-positive argument")
    if _is_jet(x):
        r = _reciprocal(x.value)
        return x.chain(flog(x.value), r, -(r * r))
    return np.log(x)


def fsqrt(x):
    xv = _val(x)
    if np.any(xv < 0):
        raise DomainError("sqrt of negative argument")
    if _is_jet(x):
        if np.any(xv == 0):
            raise NonDifferentiableError("sqrt is not differentiable at 0")
        s = fsqrt(x.value)
        r = _reciprocal(s)
        d1 = 0.5 * r
        return x.chain(s, d1, -0.25 * r * r * r)
    return np.sqrt(x)


def fabs(x):
    xv = _val(x)
    if _is_jet(x):
        if np.any(xv == 0):
            raise NonDifferentiableError("abs is not differentiable at 0")
        sgn = np.sign(xv)
        return x.chain(fabs(x.value), sgn, 0.0)
    return np.abs(x)


_FUNC_IMPL = {
    "sin": fsin, "cos": fcos, "tan": ftan, "sinh": fsinh, "cosh": fcosh,
    "tanh": ftanh, "exp": fexp, "log": flog, "sqrt": fsqrt, "abs": fabs,
}


# ---------------------------------------------------------------- evaluation


def _bind(e: Expr, params: Mapping[str, float] | None) -> dict:
    env = dict(CONSTANTS)
    if params:
        env.update(params)
    missing = free_params(e) - set(env)
    if missing:
        raise UnboundParameterError(f"unbound parameter(s): {', '.join(sorted(missing))}")
    return env


def _eval(e: Expr, u, v, env):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return u if e.name == "u" else v
    if isinstance(e, Param):
        return env[e.name]
    if isinstance(e, Neg):
        return -_eval(e.arg, u, v, env)
    if isinstance(e, Call):
        return _FUNC_IMPL[e.func](_eval(e.arg, u, v, env))
    a = _eval(e.left, u, v, env)
    b = _eval(e.right, u, v, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        if _is_jet(b):
            return a * b.reciprocal()
        if np.any(b == 0):
            raise DomainError("division by zero")
        return a / b
    return jet_pow(a, b)


def evaluate(e: Expr, u, v, params: Mapping[str, float] | None = None):
    """Plain value of ``e`` at (u, v); u, v may be arrays or jets."""
    return _eval(e, u, v, _bind(e, params))


def eval_jet2(e: Expr, u, v, params: Mapping[str, float] | None = None) -> Jet2:
    """Value and all partials up to order two of ``e`` at (u, v)."""
    env = _bind(e, params)
    r = _eval(e, Jet2.var_u(u), Jet2.var_v(v), env)
    if not _is_jet(r):
        r = Jet2.const(r)
    return _broadcast(r, u, v)


def eval_jet2_nested(e: Expr, u, v, params: Mapping[str, float] | None = None) -> Jet2:
    """Jet of jets: component ``X`` of the result is the Jet2 of the partial ``f_X``.

    Gives every partial derivative up to order four, which the duality and wreath
    constructions need for curvature of derived surfaces.
    """
    env = _bind(e, params)
    zero = Jet2.const(0.0)
    one = Jet2.const(1.0)
    U = Jet2(Jet2.var_u(u), one, zero, zero, zero, zero)
    V = Jet2(Jet2.var_v(v), zero, one, zero, zero, zero)
    r = _eval(e, U, V, env)
    if not _is_jet(r):
        r = Jet2.const(r)
    parts = []
    for p in r.parts():
        if not _is_jet(p):
            p = Jet2.const(p)
        parts.append(_broadcast(p, u, v))
    return Jet2(*parts)


def _broadcast(j: Jet2, u, v) -> Jet2:
    """Give every component the common shape of (u, v) as float arrays or floats."""
    shape = np.broadcast(np.asarray(u), np.asarray(v)).shape
    if shape == ():
        return Jet2(*(float(np.asarray(p)) for p in j.parts()))
    return Jet2(*(np.broadcast_to(np.asarray(p, dtype=float), shape).copy() for p in j.parts()))
