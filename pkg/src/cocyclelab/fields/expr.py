"""Expression trees for scalar and 2x2-matrix fields on the torus.

Every field object exposes ``evaluate(x1, x2)``, vectorised over numpy arrays.
Scalar fields return arrays of the broadcast shape, matrix fields append a
trailing ``(2, 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SINGULAR_TOL = 1e-14


class FieldError(ValueError):
    pass


class SingularEvaluationError(FieldError):
    """A division node met a denominator below ``SINGULAR_TOL`` in magnitude."""


class PeriodicityError(FieldError):
    pass


class NotRepresentableError(FieldError):
    """The expression has no exact finite Fourier expansion."""


def _arr(x):
    return np.asarray(x, dtype=float)


class ScalarExpr:
    """Base class of scalar expression nodes."""

    holder_exponent: float = 1.0
    is_matrix = False

    def evaluate(self, x1, x2) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x1, x2):
        return self.evaluate(x1, x2)

    def children(self) -> tuple:
        return ()

    def is_constant(self) -> bool:
        return all(c.is_constant() for c in self.children())

    # arithmetic sugar, used by gallery constructors and tests
    def __add__(self, other):
        return BinOp("+", self, as_expr(other))

    def __radd__(self, other):
        return BinOp("+", as_expr(other), self)

    def __sub__(self, other):
        return BinOp("-", self, as_expr(other))

    def __rsub__(self, other):
        return BinOp("-", as_expr(other), self)

    def __mul__(self, other):
        return BinOp("*", self, as_expr(other))

    def __rmul__(self, other):
        return BinOp("*", as_expr(other), self)

    def __truediv__(self, other):
        return BinOp("/", self, as_expr(other))

    def __rtruediv__(self, other):
        return BinOp("/", as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k):
        return BinOp("**", self, as_expr(k))


def as_expr(v) -> ScalarExpr:
    if isinstance(v, ScalarExpr):
        return v
    if hasattr(v, "evaluate") and not getattr(v, "is_matrix", False):
        return Wrapped(v)
    return Const(float(v))


@dataclass(frozen=True, eq=False)
class Const(ScalarExpr):
    value: float
    name: str | None = None

    def evaluate(self, x1, x2):
        shape = np.broadcast(_arr(x1), _arr(x2)).shape
        return np.full(shape, self.value)

    def is_constant(self):
        return True

    def __repr__(self):
        return self.name or repr(self.value)


PI = Const(math.pi, "pi")


@dataclass(frozen=True, eq=False)
class Coord(ScalarExpr):
    index: int  # 0 for x1, 1 for x2

    def evaluate(self, x1, x2):
        x1, x2 = np.broadcast_arrays(_arr(x1), _arr(x2))
        return (x1 if self.index == 0 else x2).copy()

    def is_constant(self):
        return False

    def __repr__(self):
        return f"x{self.index + 1}"


X1 = Coord(0)
X2 = Coord(1)


@dataclass(eq=False)
class BinOp(ScalarExpr):
    op: str
    left: ScalarExpr
    right: ScalarExpr
    # for "/" nodes: smallest |denominator| seen on the validation grid
    min_denominator: float | None = field(default=None, compare=False)

    def children(self):
        return (self.left, self.right)

    def evaluate(self, x1, x2):
        a = self.left.evaluate(x1, x2)
        b = self.right.evaluate(x1, x2)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            if np.any(np.abs(b) < SINGULAR_TOL):
                raise SingularEvaluationError(f"denominator of {self!r} vanishes")
            return a / b
        if self.op == "**":
            return a**b
        raise FieldError(f"unknown operator {self.op}")

    def __repr__(self):
        return f"({self.left!r} {self.op} {self.right!r})"


@dataclass(frozen=True, eq=False)
class Neg(ScalarExpr):
    arg: ScalarExpr

    def children(self):
        return (self.arg,)

    def evaluate(self, x1, x2):
        return -self.arg.evaluate(x1, x2)

    def __repr__(self):
        return f"-{self.arg!r}"


FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log, "sqrt": np.sqrt}


@dataclass(frozen=True, eq=False)
class Func(ScalarExpr):
    name: str
    arg: ScalarExpr

    def children(self):
        return (self.arg,)

    def evaluate(self, x1, x2):
        return FUNCS[self.name](self.arg.evaluate(x1, x2))

    def __repr__(self):
        return f"{self.name}({self.arg!r})"


def sin(e):
    return Func("sin", as_expr(e))


def cos(e):
    return Func("cos", as_expr(e))


def exp(e):
    return Func("exp", as_expr(e))


def log(e):
    return Func("log", as_expr(e))


@dataclass(frozen=True, eq=False)
class Compose(ScalarExpr):
    """``expr(F x)``: precomposition with a lattice automorphism matrix."""

    arg: Any
    F: tuple

    def children(self):
        return (self.arg,) if isinstance(self.arg, ScalarExpr) else ()

    def is_constant(self):
        return isinstance(self.arg, ScalarExpr) and self.arg.is_constant()

    def evaluate(self, x1, x2):
        F = self.F
        x1, x2 = _arr(x1), _arr(x2)
        return self.arg.evaluate(F[0][0] * x1 + F[0][1] * x2, F[1][0] * x1 + F[1][1] * x2)

    def __repr__(self):
        return f"({self.arg!r})∘{self.F}"


@dataclass(frozen=True, eq=False)
class Wrapped(ScalarExpr):
    """Adapter for any object with ``evaluate`` (TrigPoly, GridField, bump fields)."""

    inner: Any

    def evaluate(self, x1, x2):
        return np.asarray(self.inner.evaluate(x1, x2), dtype=float)

    def is_constant(self):
        return False

    def __repr__(self):
        return f"<{type(self.inner).__name__}>"


# matrix fields -------------------------------------------------------------------


def _stack(a, b, c, d):
    a, b, c, d = np.broadcast_arrays(a, b, c, d)
    return np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)


def rotation(theta) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return _stack(c, -s, s, c)


def reflection(theta) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return _stack(c, s, s, -c)


class MatrixExpr:
    is_matrix = True

    def evaluate(self, x1, x2) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x1, x2):
        return self.evaluate(x1, x2)

    def __matmul__(self, other):
        return Product((self, other))

    def __mul__(self, other):
        if isinstance(other, MatrixExpr):
            return Product((self, other))
        return Product((self, ScalarMatrix(as_expr(other))))

    def __rmul__(self, other):
        return Product((ScalarMatrix(as_expr(other)), self))

    def __add__(self, other):
        return MatrixSum((self, other), (1, 1))

    def __sub__(self, other):
        return MatrixSum((self, other), (1, -1))

    def children(self) -> tuple:
        return ()


@dataclass(frozen=True, eq=False)
class MatrixLiteral(MatrixExpr):
    entries: tuple  # (a, b, c, d) scalar fields, row-major

    def children(self):
        return tuple(self.entries)

    def evaluate(self, x1, x2):
        x1, x2 = _arr(x1), _arr(x2)
        vals = [as_expr(e).evaluate(x1, x2) for e in self.entries]
        shape = np.broadcast(x1, x2).shape
        return _stack(*[np.broadcast_to(v, shape) for v in vals])

    def __repr__(self):
        a, b, c, d = self.entries
        return f"[[{a!r}, {b!r}], [{c!r}, {d!r}]]"


@dataclass(frozen=True, eq=False)
class Rotation(MatrixExpr):
    theta: ScalarExpr

    def children(self):
        return (self.theta,)

    def evaluate(self, x1, x2):
        return rotation(as_expr(self.theta).evaluate(x1, x2))

    def __repr__(self):
        return f"R({self.theta!r})"


@dataclass(frozen=True, eq=False)
class Reflection(MatrixExpr):
    theta: ScalarExpr

    def children(self):
        return (self.theta,)

    def evaluate(self, x1, x2):
        return reflection(as_expr(self.theta).evaluate(x1, x2))

    def __repr__(self):
        return f"Q({self.theta!r})"


@dataclass(frozen=True, eq=False)
class Diagonal(MatrixExpr):
    a: ScalarExpr
    b: ScalarExpr

    def children(self):
        return (self.a, self.b)

    def evaluate(self, x1, x2):
        x1, x2 = _arr(x1), _arr(x2)
        a = np.broadcast_to(as_expr(self.a).evaluate(x1, x2), np.broadcast(x1, x2).shape)
        b = np.broadcast_to(as_expr(self.b).evaluate(x1, x2), a.shape)
        z = np.zeros(a.shape)
        return _stack(a, z, z, b)

    def __repr__(self):
        return f"diag({self.a!r}, {self.b!r})"


@dataclass(frozen=True, eq=False)
class ScalarMatrix(MatrixExpr):
    k: ScalarExpr

    def children(self):
        return (self.k,)

    def evaluate(self, x1, x2):
        x1, x2 = _arr(x1), _arr(x2)
        k = np.broadcast_to(as_expr(self.k).evaluate(x1, x2), np.broadcast(x1, x2).shape)
        z = np.zeros(k.shape)
        return _stack(k, z, z, k)

    def __repr__(self):
        return f"scalar({self.k!r})"


@dataclass(frozen=True, eq=False)
class Product(MatrixExpr):
    factors: tuple

    def children(self):
        return tuple(self.factors)

    def evaluate(self, x1, x2):
        out = self.factors[0].evaluate(x1, x2)
        for fac in self.factors[1:]:
            out = out @ fac.evaluate(x1, x2)
        return out

    def __repr__(self):
        return " * ".join(repr(f) for f in self.factors)


@dataclass(frozen=True, eq=False)
class MatrixSum(MatrixExpr):
    """``sum(sign_i * M_i)``."""

    terms: tuple
    signs: tuple

    def children(self):
        return tuple(self.terms)

    def evaluate(self, x1, x2):
        out = self.signs[0] * self.terms[0].evaluate(x1, x2)
        for s, t in zip(self.signs[1:], self.terms[1:]):
            out = out + s * t.evaluate(x1, x2)
        return out

    def __repr__(self):
        return " ".join(("+ " if s > 0 else "- ") + repr(t) for s, t in zip(self.signs, self.terms))


@dataclass(frozen=True, eq=False)
class ConjugateBy(MatrixExpr):
    """``C(F x) B(x) C(x)^{-1}``."""

    C: MatrixExpr
    B: MatrixExpr
    F: tuple

    def children(self):
        return (self.C, self.B)

    def evaluate(self, x1, x2):
        x1, x2 = _arr(x1), _arr(x2)
        F = self.F
        y1 = F[0][0] * x1 + F[0][1] * x2
        y2 = F[1][0] * x1 + F[1][1] * x2
        return self.C.evaluate(y1, y2) @ self.B.evaluate(x1, x2) @ np.linalg.inv(self.C.evaluate(x1, x2))

    def __repr__(self):
        return f"conj({self.C!r}, {self.B!r})"


@dataclass(frozen=True, eq=False)
class MatrixFunction(MatrixExpr):
    """Matrix field backed by a plain vectorised callable ``(x1, x2) -> (..., 2, 2)``."""

    fn: Any
    label: str = "matrix-function"

    def evaluate(self, x1, x2):
        return np.asarray(self.fn(_arr(x1), _arr(x2)), dtype=float)

    def __repr__(self):
        return f"<{self.label}>"


def constant_matrix(M) -> MatrixLiteral:
    M = np.asarray(M, dtype=float)
    return MatrixLiteral((Const(M[0, 0]), Const(M[0, 1]), Const(M[1, 0]), Const(M[1, 1])))


def walk(node):
    yield node
    for c in node.children():
        if hasattr(c, "children"):
            yield from walk(c)


# validation -------------------------------------------------------------------------


def sample_grid(cover=(1, 1), n: int = 64, offset: float = 0.0):
    q1, q2 = cover
    g1 = (np.arange(n * q1) + offset) / n
    g2 = (np.arange(n * q2) + offset) / n
    return np.meshgrid(g1, g2, indexing="ij")


def certify_divisions(expr, cover=(1, 1), n: int = 64) -> None:
    """Record the smallest denominator magnitude of every ``/`` node on a sample grid."""
    x1, x2 = sample_grid(cover, n, offset=0.37)
    for node in walk(expr):
        if isinstance(node, BinOp) and node.op == "/":
            den = np.abs(node.right.evaluate(x1, x2))
            node.min_denominator = float(den.min())
            if node.min_denominator < SINGULAR_TOL:
                raise SingularEvaluationError(f"denominator of {node!r} vanishes on the sample grid")


def check_periodic(expr, cover=(1, 1), n: int = 64, tol: float = 1e-9) -> None:
    """Raise :class:`PeriodicityError` unless ``expr`` is periodic on the cover lattice."""
    q1, q2 = cover
    x1, x2 = sample_grid(cover, n, offset=0.5)
    v = expr.evaluate(x1, x2)
    scale = max(1.0, float(np.max(np.abs(v))))
    for name, (s1, s2) in (("first", (q1, 0)), ("second", (0, q2))):
        w = expr.evaluate(x1 + s1, x2 + s2)
        err = float(np.max(np.abs(w - v)))
        if err > tol * scale:
            raise PeriodicityError(
                f"{expr!r} is not periodic along the {name} coordinate loop of the "
                f"{q1}x{q2} cover (max change {err:.3g})"
            )


def orientation_sign(expr, cover=(1, 1), n: int = 64) -> int:
    """Sign of det over a sample grid; raises if it changes sign or vanishes."""
    x1, x2 = sample_grid(cover, n, offset=0.25)
    d = np.linalg.det(expr.evaluate(x1, x2))
    if np.all(d > 0):
        return 1
    if np.all(d < 0):
        return -1
    raise FieldError("determinant vanishes or changes sign on the sample grid")
