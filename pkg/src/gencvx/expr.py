"""A small piecewise expression language for candidate functions.

Grammar (EBNF)::

    expr      = term , { ("+" | "-") , term } ;
    term      = unary , { ("*" | "/") , unary } ;
    unary     = "-" , unary | power ;
    power     = primary , [ "^" , [ "-" ] , INTEGER ] ;
    primary   = NUMBER | "pi" | "e" | VARIABLE | "t"
              | FUNC , "(" , expr , ")"
              | "piecewise" , "(" , { branch , "," } , "else" , "->" , expr , ")"
              | "integral0" , "(" , expr , "," , expr , ")"
              | "(" , expr , ")" ;
    branch    = expr , RELOP , expr , "->" , expr ;
    RELOP     = "<" | "<=" | "=" | ">" | ">=" | "≤" | "≥" ;
    FUNC      = "sin" | "cos" | "log" | "exp" | "abs" | "sign" | "sqrt" ;
    VARIABLE  = "x" , DIGIT , { DIGIT } ;          (* x1, x2, ... *)
    NUMBER    = DIGIT , { DIGIT } , [ "." , { DIGIT } ] , [ ("e" | "E") , [ "+" | "-" ] , DIGIT , { DIGIT } ]
              | "." , DIGIT , { DIGIT } , [ exponent ] ;

Precedence, tightest first: ``^``, unary minus, ``* /``, ``+ -``.  So
``-x1^2`` is ``-(x1^2)``.  ``integral0(f, a)`` is the integral of ``f`` over
``[0, a]``; ``f`` may only use the bound variable ``t``.  Branches of
``piecewise`` are tried in order and the ``else`` branch is mandatory.

Evaluation is vectorised: a batch of points of shape ``(m, n)`` yields ``m``
values.  Piecewise branches are only evaluated on the rows that select them,
so guards such as ``piecewise(t > 0 -> sin(1/t), else -> 0)`` never raise.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import quadrature
from .errors import DomainError, ParseError

FUNCTIONS = ("sin", "cos", "log", "exp", "abs", "sign", "sqrt")
RELOPS = ("<", "<=", "=", ">", ">=")
CONSTANTS = {"pi": math.pi, "e": math.e}
MAX_DEPTH = 100  # bracket / unary nesting
MAX_HEIGHT = 250  # operator chains plus nesting; bounds recursion in eval and printing


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str

    @property
    def value(self) -> float:
        return CONSTANTS[self.name]


@dataclass(frozen=True)
class Var:
    index: int  # zero based; printed as x{index + 1}


@dataclass(frozen=True)
class BoundVar:
    """The integration variable ``t`` inside ``integral0``."""


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Piecewise:
    branches: tuple[tuple[Compare, "Expr"], ...]
    otherwise: "Expr"


@dataclass(frozen=True)
class Integral0:
    integrand: "Expr"
    upper: "Expr"


Expr = Union[Num, Const, Var, BoundVar, Neg, BinOp, Pow, Call, Piecewise, Integral0]


# --------------------------------------------------------------------------
# Tokenizer
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<relop><=|>=|<|>|=|≤|≥)
  | (?P<op>[-+*/^(),−])
    """,
    re.VERBOSE,
)

_UNICODE_OPS = {"≤": "<=", "≥": ">=", "−": "-"}


@dataclass(frozen=True)
class _Token:
    kind: str  # number, ident, arrow, relop, op, end
    text: str
    offset: int  # byte offset


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            ch = source[pos]
            raise ParseError(byte_pos, "unexpected character", ch)
        text = m.group()
        kind = m.lastgroup
        if kind != "ws":
            text = _UNICODE_OPS.get(text, text)
            tokens.append(_Token(kind, text, byte_pos))
        byte_pos += len(m.group().encode("utf-8"))
        pos = m.end()
    tokens.append(_Token("end", "", byte_pos))
    return tokens


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

class _Parser:
    def __init__(self, source: str, dimension: int | None):
        self.tokens = _tokenize(source)
        self.i = 0
        self.dimension = dimension
        self.in_integrand = False
        self.depth = 0
        self.height = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        if t.kind != "end":
            self.i += 1
        return t

    def fail(self, message: str, tok: _Token | None = None):
        tok = tok or self.tok
        raise ParseError(tok.offset, message, tok.text)

    def expect(self, text: str) -> _Token:
        if self.tok.text != text or self.tok.kind == "number":
            self.fail(f"expected {text!r}")
        return self.advance()

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.fail("expression nested too deeply")
        self.grow(1)

    def leave(self):
        self.depth -= 1
        self.height -= 1

    def grow(self, k: int):
        self.height += k
        if self.height > MAX_HEIGHT:
            self.fail("expression too long or nested too deeply")

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.fail("unexpected trailing input")
        return e

    def expr(self) -> Expr:
        self.enter()
        e = self.term()
        chain = 0
        while self.tok.kind == "op" and self.tok.text in "+-":
            self.grow(1)
            chain += 1
            op = self.advance().text
            e = BinOp(op, e, self.term())
        self.height -= chain
        self.leave()
        return e

    def term(self) -> Expr:
        e = self.unary()
        chain = 0
        while self.tok.kind == "op" and self.tok.text in "*/":
            self.grow(1)
            chain += 1
            op = self.advance().text
            e = BinOp(op, e, self.unary())
        self.height -= chain
        return e

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            self.enter()
            e = Neg(self.unary())
            self.leave()
            return e
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            sign = 1
            if self.tok.kind == "op" and self.tok.text == "-":
                self.advance()
                sign = -1
            tok = self.tok
            if tok.kind != "number" or not tok.text.isdigit():
                self.fail("integer exponent expected")
            self.advance()
            return Pow(base, sign * int(tok.text))
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                self.fail("numeric literal out of range", tok)
            return Num(value)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind != "ident":
            self.fail("expected an operand")
        name = tok.text
        self.advance()
        if name in CONSTANTS:
            return Const(name)
        if name == "t":
            if not self.in_integrand:
                self.fail("bound variable 't' used outside integral0", tok)
            return BoundVar()
        if re.fullmatch(r"x\d+", name):
            index = int(name[1:]) - 1
            if index < 0:
                self.fail("variables are numbered from x1", tok)
            if self.in_integrand:
                self.fail("integral0 integrand may only use 't'", tok)
            if self.dimension is not None and index >= self.dimension:
                self.fail(f"variable {name} exceeds dimension {self.dimension}", tok)
            return Var(index)
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Call(name, arg)
        if name == "piecewise":
            return self.piecewise()
        if name == "integral0":
            return self.integral0(tok)
        self.fail("unknown identifier", tok)

    def piecewise(self) -> Piecewise:
        self.expect("(")
        branches = []
        while True:
            if self.tok.kind == "ident" and self.tok.text == "else":
                self.advance()
                self.expect("->")
                otherwise = self.expr()
                self.expect(")")
                return Piecewise(tuple(branches), otherwise)
            if self.tok.kind == "end" or (self.tok.kind == "op" and self.tok.text == ")"):
                self.fail("piecewise requires an else branch")
            left = self.expr()
            if self.tok.kind != "relop":
                self.fail("comparison operator expected in piecewise condition")
            op = self.advance().text
            right = self.expr()
            self.expect("->")
            value = self.expr()
            branches.append((Compare(op, left, right), value))
            if self.tok.kind == "op" and self.tok.text == ",":
                self.advance()
            else:
                self.fail("piecewise requires an else branch")

    def integral0(self, tok: _Token) -> Integral0:
        if self.in_integrand:
            self.fail("nested integral0 is not supported", tok)
        self.expect("(")
        self.in_integrand = True
        integrand = self.expr()
        self.in_integrand = False
        self.expect(",")
        upper = self.expr()
        self.expect(")")
        return Integral0(integrand, upper)


def parse(source: str, dimension: int | None = None) -> Expr:
    """Parse ``source`` into an expression tree.

    When ``dimension`` is given, variables beyond ``x{dimension}`` are
    rejected.

    Raises:
        ParseError: on any malformed input.
    """
    if not isinstance(source, str):
        raise TypeError("source must be str")
    return _Parser(source, dimension).parse()


# --------------------------------------------------------------------------
# Printer
# --------------------------------------------------------------------------

_ATOMIC = (Const, Var, BoundVar, Call, Piecewise, Integral0)
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Num) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return 0  # prints with a leading minus
    return 4


def _wrap(e: Expr, need: bool) -> str:
    s = to_source(e)
    return f"({s})" if need else s


def to_source(e: Expr) -> str:
    """Print ``e`` so that ``parse(to_source(e)) == e``, with minimal brackets."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return f"x{e.index + 1}"
    if isinstance(e, BoundVar):
        return "t"
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _prec(e.operand) < 3)
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = _wrap(e.left, _prec(e.left) < p)
        right = _wrap(e.right, _prec(e.right) <= p)
        return f"{left} {e.op} {right}"
    if isinstance(e, Pow):
        bare = isinstance(e.base, _ATOMIC) or (isinstance(e.base, Num) and _prec(e.base) == 4)
        base = _wrap(e.base, not bare)
        return f"{base}^{e.exponent}"
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Compare):
        return f"{to_source(e.left)} {e.op} {to_source(e.right)}"
    if isinstance(e, Piecewise):
        parts = [f"{to_source(c)} -> {to_source(v)}" for c, v in e.branches]
        parts.append(f"else -> {to_source(e.otherwise)}")
        return "piecewise(" + ", ".join(parts) + ")"
    if isinstance(e, Integral0):
        return f"integral0({to_source(e.integrand)}, {to_source(e.upper)})"
    raise TypeError(f"not an expression node: {e!r}")


def max_variable_index(e: Expr) -> int:
    """Largest zero-based variable index used in ``e`` (-1 if none)."""
    if isinstance(e, Var):
        return e.index
    if isinstance(e, (Neg,)):
        return max_variable_index(e.operand)
    if isinstance(e, (BinOp, Compare)):
        return max(max_variable_index(e.left), max_variable_index(e.right))
    if isinstance(e, Pow):
        return max_variable_index(e.base)
    if isinstance(e, Call):
        return max_variable_index(e.arg)
    if isinstance(e, Piecewise):
        idx = [max_variable_index(e.otherwise)]
        for c, v in e.branches:
            idx += [max_variable_index(c), max_variable_index(v)]
        return max(idx)
    if isinstance(e, Integral0):
        return max_variable_index(e.upper)
    return -1


def has_integral(e: Expr) -> bool:
    if isinstance(e, Integral0):
        return True
    if isinstance(e, Neg):
        return has_integral(e.operand)
    if isinstance(e, (BinOp, Compare)):
        return has_integral(e.left) or has_integral(e.right)
    if isinstance(e, Pow):
        return has_integral(e.base)
    if isinstance(e, Call):
        return has_integral(e.arg)
    if isinstance(e, Piecewise):
        return has_integral(e.otherwise) or any(
            has_integral(c) or has_integral(v) for c, v in e.branches
        )
    return False


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

class _Ctx:
    """Row-aligned evaluation inputs: variables, bound variable, tangent seeds."""

    __slots__ = ("X", "T", "dX", "tol")

    def __init__(self, X, T, dX, tol):
        self.X = X
        self.T = T
        self.dX = dX
        self.tol = tol

    @property
    def m(self) -> int:
        return (self.X if self.X is not None else self.T).shape[0]

    def take(self, idx: np.ndarray) -> "_Ctx":
        return _Ctx(
            None if self.X is None else self.X[idx],
            None if self.T is None else self.T[idx],
            None if self.dX is None else self.dX[idx],
            self.tol,
        )


def _zeros_tan(ctx: _Ctx):
    if ctx.dX is None:
        return None
    return np.zeros((ctx.m, ctx.dX.shape[2]))


def _eval(e: Expr, ctx: _Ctx):
    """Return ``(values, tangents)``; tangents is None unless seeds were given."""
    want = ctx.dX is not None
    if isinstance(e, Num):
        return np.full(ctx.m, e.value), _zeros_tan(ctx)
    if isinstance(e, Const):
        return np.full(ctx.m, e.value), _zeros_tan(ctx)
    if isinstance(e, Var):
        return ctx.X[:, e.index].copy(), (ctx.dX[:, e.index, :].copy() if want else None)
    if isinstance(e, BoundVar):
        return ctx.T.copy(), _zeros_tan(ctx)
    if isinstance(e, Neg):
        v, d = _eval(e.operand, ctx)
        return -v, (-d if want else None)
    if isinstance(e, BinOp):
        a, da = _eval(e.left, ctx)
        b, db = _eval(e.right, ctx)
        if e.op == "+":
            return a + b, (da + db if want else None)
        if e.op == "-":
            return a - b, (da - db if want else None)
        if e.op == "*":
            return a * b, (da * b[:, None] + a[:, None] * db if want else None)
        if np.any(b == 0):
            raise DomainError("division by zero")
        v = a / b
        return v, ((da - v[:, None] * db) / b[:, None] if want else None)
    if isinstance(e, Pow):
        a, da = _eval(e.base, ctx)
        p = e.exponent
        if p < 0 and np.any(a == 0):
            raise DomainError("division by zero in negative power")
        v = a ** float(p)
        if not want:
            return v, None
        if p == 0:
            return v, np.zeros_like(da)
        return v, (p * a ** float(p - 1))[:, None] * da
    if isinstance(e, Call):
        return _eval_call(e.func, *_eval(e.arg, ctx), want)
    if isinstance(e, Piecewise):
        return _eval_piecewise(e, ctx)
    if isinstance(e, Integral0):
        return _eval_integral(e, ctx)
    raise TypeError(f"cannot evaluate {e!r}")


def _eval_call(func: str, a, da, want: bool):
    if func == "sin":
        return np.sin(a), (np.cos(a)[:, None] * da if want else None)
    if func == "cos":
        return np.cos(a), (-np.sin(a)[:, None] * da if want else None)
    if func == "exp":
        v = np.exp(a)
        return v, (v[:, None] * da if want else None)
    if func == "log":
        if np.any(a <= 0):
            raise DomainError("log of non-positive argument")
        return np.log(a), (da / a[:, None] if want else None)
    if func == "sqrt":
        if np.any(a < 0):
            raise DomainError("sqrt of negative argument")
        v = np.sqrt(a)
        return v, (da / (2.0 * v)[:, None] if want else None)
    if func == "abs":
        return np.abs(a), (np.sign(a)[:, None] * da if want else None)
    if func == "sign":
        return np.sign(a), (np.zeros_like(da) if want else None)
    raise TypeError(f"unknown function {func}")


def _compare(op: str, a, b):
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == "=":
        return a == b
    if op == ">":
        return a > b
    return a >= b


def _eval_piecewise(e: Piecewise, ctx: _Ctx):
    m = ctx.m
    out = np.empty(m)
    tan = _zeros_tan(ctx)
    pending = np.arange(m)
    for cond, value in e.branches:
        if pending.size == 0:
            break
        sub = ctx.take(pending)
        a, _ = _eval(cond.left, _Ctx(sub.X, sub.T, None, sub.tol))
        b, _ = _eval(cond.right, _Ctx(sub.X, sub.T, None, sub.tol))
        hit = _compare(cond.op, a, b)
        if np.any(hit):
            rows = pending[hit]
            v, d = _eval(value, ctx.take(rows))
            out[rows] = v
            if tan is not None:
                tan[rows] = d
        pending = pending[~hit]
    if pending.size:
        v, d = _eval(e.otherwise, ctx.take(pending))
        out[pending] = v
        if tan is not None:
            tan[pending] = d
    return out, tan


def _eval_integral(e: Integral0, ctx: _Ctx):
    upper, du = _eval(e.upper, ctx)

    def integrand(t):
        v, _ = _eval(e.integrand, _Ctx(None, t, None, ctx.tol))
        return v

    values = quadrature.integrate_from_zero(integrand, upper, abs_tol=ctx.tol)
    if du is None:
        return values, None
    # d/dx int_0^{a(x)} f = f(a(x)) a'(x)
    return values, integrand(upper)[:, None] * du


def _as_batch(points, dimension: int | None = None) -> np.ndarray:
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError("points must be a vector or an (m, n) array")
    if dimension is not None and X.shape[1] != dimension:
        raise ValueError(f"expected points of dimension {dimension}, got {X.shape[1]}")
    return X


def evaluate_batch(e: Expr, points, quad_tol: float = quadrature.DEFAULT_ABS_TOL) -> np.ndarray:
    """Evaluate ``e`` at each row of ``points`` (shape ``(m, n)``)."""
    X = _as_batch(points)
    if max_variable_index(e) >= X.shape[1]:
        raise ValueError("expression uses more variables than the points provide")
    with np.errstate(all="ignore"):
        v, _ = _eval(e, _Ctx(X, None, None, quad_tol))
    return v


def evaluate(e: Expr, point, quad_tol: float = quadrature.DEFAULT_ABS_TOL) -> float:
    """Evaluate ``e`` at a single point.

    ``sign(0)`` is 0.  Raises DomainError for log/sqrt out of range and
    division by zero; QuadratureError propagates from ``integral0``.
    """
    return float(evaluate_batch(e, np.atleast_1d(np.asarray(point, dtype=float)), quad_tol)[0])


def evaluate_with_gradient(
    e: Expr, points, quad_tol: float = quadrature.DEFAULT_ABS_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Values and forward-mode derivatives with respect to every variable.

    Derivatives follow the selected piecewise branch, ``abs'(0) = 0`` and
    ``sign' = 0``, so they are exact wherever the expression is
    differentiable and a one-sided or arbitrary choice elsewhere.

    Returns:
        ``(values, jac)`` with shapes ``(m,)`` and ``(m, n)``.
    """
    X = _as_batch(points)
    if max_variable_index(e) >= X.shape[1]:
        raise ValueError("expression uses more variables than the points provide")
    m, n = X.shape
    seeds = np.broadcast_to(np.eye(n), (m, n, n)).copy()
    with np.errstate(all="ignore"):
        v, d = _eval(e, _Ctx(X, None, seeds, quad_tol))
    return v, d
