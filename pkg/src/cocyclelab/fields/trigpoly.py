"""Exact finite Fourier sums on the torus and its rectangular covers.

A :class:`TrigPoly` on the cover ``(q1, q2)`` stores complex coefficients
``c[k]`` of ``exp(2 pi i (k1 x1 / q1 + k2 x2 / q2))``, keyed by the integer
pair ``k``.  Real-valuedness means ``c[-k] == conj(c[k])``.  The frequency
vector of key ``k`` is ``(k1/q1, k2/q2)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import expr as E


def _neg(k):
    return (-k[0], -k[1])


def _cis(phase: float) -> complex:
    """``exp(i phase)``, exact at multiples of pi/2."""
    q = phase / (math.pi / 2)
    if abs(q - round(q)) < 1e-15:
        return (1, 1j, -1, -1j)[round(q) % 4]
    return complex(math.cos(phase), math.sin(phase))


def _powers(z: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """``z[:, None] ** ks`` for unit-modulus ``z`` and integer ``ks``, by cumulative products."""
    top = int(np.max(np.abs(ks))) if len(ks) else 0
    table = np.empty((len(z), top + 1), dtype=complex)
    table[:, 0] = 1.0
    if top:
        table[:, 1:] = np.cumprod(np.broadcast_to(z[:, None], (len(z), top)), axis=1)
    out = table[:, np.abs(ks)]
    neg = ks < 0
    out[:, neg] = out[:, neg].conj()
    return out


@dataclass(frozen=True, eq=False)
class TrigPoly:
    coeffs: dict = field(default_factory=dict)
    cover: tuple = (1, 1)
    holder_exponent: float = 1.0
    is_matrix = False

    def __post_init__(self):
        clean = {}
        for k, c in self.coeffs.items():
            k = (int(k[0]), int(k[1]))
            c = complex(c)
            if c != 0:
                clean[k] = clean.get(k, 0) + c
        # enforce exact conjugate symmetry
        sym = {}
        for k, c in clean.items():
            partner = clean.get(_neg(k), 0)
            v = 0.5 * (c + partner.conjugate()) if k != (0, 0) else complex(c.real, 0.0)
            if v != 0:
                sym[k] = v
                sym[_neg(k)] = v.conjugate()
        object.__setattr__(self, "coeffs", sym)
        object.__setattr__(self, "cover", (int(self.cover[0]), int(self.cover[1])))

    # construction -------------------------------------------------------------------

    @classmethod
    def constant(cls, c: float, cover=(1, 1)):
        return cls({(0, 0): c}, cover)

    @classmethod
    def cos(cls, k, amplitude=1.0, phase=0.0, cover=(1, 1)):
        """``amplitude * cos(2 pi (k1 x1/q1 + k2 x2/q2) + phase)``."""
        k = (int(k[0]), int(k[1]))
        if k == (0, 0):
            return cls.constant(amplitude * _cis(phase).real, cover)
        z = 0.5 * amplitude * _cis(phase)
        return cls({k: z, _neg(k): z.conjugate()}, cover)

    @classmethod
    def sin(cls, k, amplitude=1.0, cover=(1, 1)):
        return cls.cos(k, amplitude, -math.pi / 2, cover)

    @classmethod
    def from_hartley(cls, rows, cover=(1, 1)):
        """Inverse of :meth:`hartley`: ``r_k = Re c_k - Im c_k``."""
        r = {(int(k[0]), int(k[1])): float(v) for k, v in rows}
        coeffs = {}
        for k, v in r.items():
            w = r.get(_neg(k), 0.0)
            # r_k = a - b, r_-k = a + b where c_k = a + i b
            coeffs[k] = complex(0.5 * (v + w), 0.5 * (w - v))
        return cls(coeffs, cover)

    # algebra ------------------------------------------------------------------------

    def _check_cover(self, other):
        if self.cover != other.cover:
            raise E.FieldError(f"cover mismatch {self.cover} vs {other.cover}")

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(float(other), self.cover)
        self._check_cover(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return TrigPoly(out, self.cover)

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly({k: -c for k, c in self.coeffs.items()}, self.cover)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TrigPoly):
            s = float(other)
            return TrigPoly({k: s * c for k, c in self.coeffs.items()}, self.cover)
        self._check_cover(other)
        out: dict = {}
        for k, c in self.coeffs.items():
            for j, d in other.coeffs.items():
                key = (k[0] + j[0], k[1] + j[1])
                out[key] = out.get(key, 0) + c * d
        return TrigPoly(out, self.cover)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / float(s))

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise E.NotRepresentableError("only nonnegative integer powers are polynomial")
        out = TrigPoly.constant(1.0, self.cover)
        for _ in range(int(n)):
            out = out * self
        return out

    # queries ------------------------------------------------------------------------

    def mean(self) -> float:
        return float(self.coeffs.get((0, 0), 0).real)

    def support(self) -> list:
        return sorted(self.coeffs)

    def frequency(self, k) -> tuple:
        return (Fraction(k[0], self.cover[0]), Fraction(k[1], self.cover[1]))

    def degree(self) -> int:
        return max((max(abs(k[0]), abs(k[1])) for k in self.coeffs), default=0)

    def l1_norm(self) -> float:
        return float(sum(abs(c) for c in self.coeffs.values()))

    def prune(self, tol: float = 0.0):
        return TrigPoly({k: c for k, c in self.coeffs.items() if abs(c) > tol}, self.cover)

    def allclose(self, other, tol: float = 1e-12) -> bool:
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self.coeffs.get(k, 0) - other.coeffs.get(k, 0)) <= tol for k in keys)

    def map_key(self, F, k):
        """Key of the frequency ``F^T m`` where ``m`` is the frequency of ``k``."""
        q1, q2 = self.cover
        a, b = F[1][0] * k[1] * q1, F[0][1] * k[0] * q2
        if a % q2 or b % q1:
            raise E.FieldError("automorphism does not preserve the cover lattice")
        return (F[0][0] * k[0] + a // q2, b // q1 + F[1][1] * k[1])

    def compose(self, F):
        """Precomposition ``p(F x)``; frequency ``m`` moves to ``F^T m`` exactly."""
        return TrigPoly({self.map_key(F, k): c for k, c in self.coeffs.items()}, self.cover, self.holder_exponent)

    # evaluation ---------------------------------------------------------------------

    def evaluate(self, x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        out = np.zeros(x1.shape)
        if not self.coeffs:
            return out
        q1, q2 = self.cover
        keys = np.array(list(self.coeffs), dtype=np.int64)
        vals = np.array(list(self.coeffs.values()))
        # only half the spectrum is needed: 2 Re over k > 0 plus the mean
        upper = (keys[:, 0] > 0) | ((keys[:, 0] == 0) & (keys[:, 1] > 0))
        zero = (keys[:, 0] == 0) & (keys[:, 1] == 0)
        out = out + (vals[zero].real.sum() if zero.any() else 0.0)
        keys, vals = keys[upper], vals[upper]
        if len(keys) == 0:
            return out
        # separable: one exp per distinct component, then products
        u1, i1 = np.unique(keys[:, 0], return_inverse=True)
        u2, i2 = np.unique(keys[:, 1], return_inverse=True)
        C = np.zeros((len(u1), len(u2)), dtype=complex)
        np.add.at(C, (i1, i2), vals)
        e1 = _powers(np.exp(2j * np.pi * x1.ravel() / q1), u1)
        e2 = _powers(np.exp(2j * np.pi * x2.ravel() / q2), u2)
        acc = ((e1 @ C) * e2).sum(axis=-1).reshape(x1.shape)
        return out + 2.0 * acc.real

    def __call__(self, x1, x2):
        return self.evaluate(x1, x2)

    def sample_grid(self, shape) -> np.ndarray:
        """Exact values on the grid ``x_i = q_i j / n_i`` by folding keys mod ``n_i``."""
        n1, n2 = shape
        spec = np.zeros((n1, n2), dtype=complex)
        if self.coeffs:
            keys = np.array(list(self.coeffs), dtype=np.int64)
            np.add.at(spec, (keys[:, 0] % n1, keys[:, 1] % n2), np.array(list(self.coeffs.values())))
        return np.fft.ifft2(spec).real * (n1 * n2)

    # serialisation ------------------------------------------------------------------

    def hartley(self) -> list:
        """Real coefficients ``r_k = Re c_k - Im c_k``: one real number per key."""
        return [(k, float(c.real - c.imag)) for k, c in sorted(self.coeffs.items())]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m1", "m2", "coeff"])
        for k, r in self.hartley():
            m1, m2 = self.frequency(k)
            w.writerow([str(m1), str(m2), repr(r)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, cover=(1, 1)):
        rows = list(csv.reader(io.StringIO(text)))
        body = rows[1:] if rows and rows[0][:1] == ["m1"] else rows
        out = []
        for m1, m2, r in body:
            out.append(((Fraction(m1) * cover[0], Fraction(m2) * cover[1]), float(r)))
        return cls.from_hartley(out, cover)

    def to_json(self) -> dict:
        return {
            "node": "trigpoly",
            "cover": list(self.cover),
            "coeffs": [[k[0], k[1], c.real, c.imag] for k, c in sorted(self.coeffs.items())],
        }

    def __repr__(self):
        return f"TrigPoly({len(self.coeffs)} terms, cover={self.cover})"


# conversion from expression trees -------------------------------------------------------


def _const(e) -> float:
    return float(e.evaluate(0.0, 0.0))


def linear_form(e) -> tuple:
    """Return ``(c0, c1, c2)`` with ``e == c0 + c1 x1 + c2 x2`` or raise."""
    if e.is_constant():
        return (_const(e), 0.0, 0.0)
    if isinstance(e, E.Coord):
        return (0.0, 1.0, 0.0) if e.index == 0 else (0.0, 0.0, 1.0)
    if isinstance(e, E.Neg):
        return tuple(-v for v in linear_form(e.arg))
    if isinstance(e, E.BinOp):
        if e.op in "+-":
            a, b = linear_form(e.left), linear_form(e.right)
            s = 1.0 if e.op == "+" else -1.0
            return tuple(u + s * v for u, v in zip(a, b))
        if e.op == "*":
            if e.left.is_constant():
                return tuple(_const(e.left) * v for v in linear_form(e.right))
            if e.right.is_constant():
                return tuple(_const(e.right) * v for v in linear_form(e.left))
        if e.op == "/" and e.right.is_constant():
            return tuple(v / _const(e.right) for v in linear_form(e.left))
    if isinstance(e, E.Compose):
        c0, c1, c2 = linear_form(e.arg)
        F = e.F
        return (c0, c1 * F[0][0] + c2 * F[1][0], c1 * F[0][1] + c2 * F[1][1])
    raise E.NotRepresentableError(f"{e!r} is not an affine function of the coordinates")


def _key_from_linear(c1, c2, cover, tol=1e-9):
    k = []
    for c, q in ((c1, cover[0]), (c2, cover[1])):
        v = c * q / (2 * math.pi)
        r = round(v)
        if abs(v - r) > tol:
            raise E.NotRepresentableError(
                f"frequency {c / (2 * math.pi):.6g} is not a multiple of 1/{q}"
            )
        k.append(int(r))
    return tuple(k)


def to_trigpoly(e, cover=(1, 1)) -> TrigPoly:
    """Exact Fourier expansion of a polynomial-in-trig expression."""
    cover = (int(cover[0]), int(cover[1]))
    if isinstance(e, TrigPoly):
        return e
    if isinstance(e, E.Wrapped) and isinstance(e.inner, TrigPoly):
        return e.inner
    if e.is_constant():
        return TrigPoly.constant(_const(e), cover)
    if isinstance(e, E.Neg):
        return -to_trigpoly(e.arg, cover)
    if isinstance(e, E.BinOp):
        if e.op == "+":
            return to_trigpoly(e.left, cover) + to_trigpoly(e.right, cover)
        if e.op == "-":
            return to_trigpoly(e.left, cover) - to_trigpoly(e.right, cover)
        if e.op == "*":
            return to_trigpoly(e.left, cover) * to_trigpoly(e.right, cover)
        if e.op == "/" and e.right.is_constant():
            return to_trigpoly(e.left, cover) / _const(e.right)
        if e.op == "**" and e.right.is_constant():
            return to_trigpoly(e.left, cover) ** int(_const(e.right))
        raise E.NotRepresentableError(f"operator {e.op!r} is not polynomial")
    if isinstance(e, E.Func) and e.name in ("sin", "cos"):
        c0, c1, c2 = linear_form(e.arg)
        k = _key_from_linear(c1, c2, cover)
        if e.name == "cos":
            return TrigPoly.cos(k, 1.0, c0, cover)
        return TrigPoly.cos(k, 1.0, c0 - math.pi / 2, cover)
    if isinstance(e, E.Compose):
        p = to_trigpoly(e.arg, cover)
        return p.compose(e.F)
    raise E.NotRepresentableError(f"{e!r} has no finite Fourier expansion")
