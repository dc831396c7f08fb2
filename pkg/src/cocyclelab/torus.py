"""Exact arithmetic for hyperbolic automorphisms of the 2-torus and its finite covers.

Points of finite order are stored as integer numerators over a common
denominator, so iteration and periodic-point enumeration never touch floating
point.  The cover ``(q1, q2)`` is the torus ``R^2 / (q1 Z x q2 Z)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

INT_BOUND = 2**127  # checked 128-bit range for exact scalar arithmetic
NP_BOUND = 2**62  # headroom for vectorised int64 paths
DEFAULT_PERIOD_CAP = 14


class TorusError(ValueError):
    """Base class for errors raised by this module."""


class NotUnimodularError(TorusError):
    """The matrix does not define a torus automorphism (|det| != 1)."""


class NotHyperbolicError(TorusError):
    """The automorphism has an eigenvalue of modulus one."""


class CoverError(TorusError):
    """The automorphism does not preserve the requested cover lattice."""


def _check(value: int) -> int:
    if abs(value) >= INT_BOUND:
        raise OverflowError(f"integer {value} exceeds the 128-bit working range")
    return value


Mat = tuple[tuple[int, int], tuple[int, int]]


def as_int_matrix(F) -> Mat:
    rows = [[int(v) for v in row] for row in F]
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise TorusError("expected a 2x2 integer matrix")
    for r, orig in zip(rows, F):
        for v, o in zip(r, orig):
            if v != o:
                raise TorusError(f"non-integer entry {o!r}")
    return ((rows[0][0], rows[0][1]), (rows[1][0], rows[1][1]))


def matmul(A: Mat, B: Mat) -> Mat:
    return tuple(
        tuple(_check(A[i][0] * B[0][j] + A[i][1] * B[1][j]) for j in range(2))
        for i in range(2)
    )  # type: ignore[return-value]


def matpow(A: Mat, n: int) -> Mat:
    if n < 0:
        A, n = inverse(A), -n
    result: Mat = ((1, 0), (0, 1))
    base = A
    while n:
        if n & 1:
            result = matmul(result, base)
        n >>= 1
        if n:
            base = matmul(base, base)
    return result


def det(A: Mat) -> int:
    return A[0][0] * A[1][1] - A[0][1] * A[1][0]


def inverse(A: Mat) -> Mat:
    d = det(A)
    if abs(d) != 1:
        raise NotUnimodularError(f"matrix {A} has determinant {d}")
    return ((A[1][1] * d, -A[0][1] * d), (-A[1][0] * d, A[0][0] * d))


def check_hyperbolic(F) -> bool:
    """True iff ``F`` is a unimodular integer matrix with no eigenvalue on the unit circle.

    Raises :class:`NotUnimodularError` when ``|det F| != 1``.
    """
    F = as_int_matrix(F)
    d = det(F)
    if abs(d) != 1:
        raise NotUnimodularError(f"det = {d}; not a torus automorphism")
    t = F[0][0] + F[1][1]
    if d == 1:
        return abs(t) > 2
    # det = -1: eigenvalues (t +- sqrt(t^2 + 4)) / 2 are real; modulus one only when t = 0
    return t != 0


def smith_normal_form(M: Mat) -> tuple[Mat, tuple[int, int], Mat]:
    """Return ``(U, (d1, d2), V)`` with ``U @ M @ V = diag(d1, d2)``, U and V unimodular.

    ``d1 | d2`` and both are non-negative.
    """
    A = [list(M[0]), list(M[1])]
    U = [[1, 0], [0, 1]]
    V = [[1, 0], [0, 1]]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for R in (A, V):
            for row in R:
                row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):  # row_dst += k * row_src
        for R in (A, U):
            R[dst] = [R[dst][c] + k * R[src][c] for c in range(2)]

    def add_col(src, dst, k):
        for R in (A, V):
            for row in R:
                row[dst] += k * row[src]

    while True:
        entries = [(abs(A[i][j]), i, j) for i in range(2) for j in range(2) if A[i][j]]
        if not entries:
            break
        _, i, j = min(entries)
        if i:
            swap_rows(0, 1)
        if j:
            swap_cols(0, 1)
        p = A[0][0]
        done = True
        if A[1][0]:
            add_row(0, 1, -(A[1][0] // p))
            done = done and A[1][0] == 0
        if A[0][1]:
            add_col(0, 1, -(A[0][1] // p))
            done = done and A[0][1] == 0
        if not done:
            continue
        if A[1][1] % p:
            add_row(1, 0, 1)  # bring the remainder into the pivot row
            continue
        break
    for k in range(2):
        if A[k][k] < 0:
            U[k] = [-u for u in U[k]]
            A[k] = [-a for a in A[k]]
    Um: Mat = ((U[0][0], U[0][1]), (U[1][0], U[1][1]))
    Vm: Mat = ((V[0][0], V[0][1]), (V[1][0], V[1][1]))
    return Um, (A[0][0], A[1][1]), Vm


@dataclass(frozen=True, order=False)
class RationalPoint:
    """Point ``(a/d, b/d)`` on a cover torus, in canonical reduced form."""

    a: int
    b: int
    d: int

    @classmethod
    def make(cls, a: int, b: int, d: int, cover: tuple[int, int] = (1, 1)) -> "RationalPoint":
        if d <= 0:
            raise TorusError("denominator must be positive")
        a %= d * cover[0]
        b %= d * cover[1]
        g = math.gcd(math.gcd(a, b), d)
        return cls(a // g, b // g, d // g)

    @classmethod
    def from_fractions(cls, x1, x2, cover=(1, 1)) -> "RationalPoint":
        f1, f2 = Fraction(x1), Fraction(x2)
        d = math.lcm(f1.denominator, f2.denominator)
        return cls.make(int(f1 * d), int(f2 * d), d, cover)

    @property
    def key(self) -> tuple[Fraction, Fraction]:
        return (Fraction(self.a, self.d), Fraction(self.b, self.d))

    def __lt__(self, other: "RationalPoint") -> bool:
        return self.key < other.key

    def to_float(self) -> tuple[float, float]:
        return (self.a / self.d, self.b / self.d)

    def __repr__(self) -> str:
        return f"({Fraction(self.a, self.d)}, {Fraction(self.b, self.d)})"


@dataclass(frozen=True)
class PeriodicOrbit:
    base: RationalPoint
    period: int
    points: tuple[RationalPoint, ...]

    def to_float(self) -> np.ndarray:
        return np.array([p.to_float() for p in self.points])


def torus_distance(x, y, cover=(1, 1)):
    """Max of per-coordinate circle distances; vectorised over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q = np.asarray(cover, dtype=float)
    d = np.abs(x - y) % q
    return np.max(np.minimum(d, q - d), axis=-1)


@dataclass(frozen=True)
class LatticeAutomorphism:
    """Integer matrix ``F`` acting on ``R^2 / (q1 Z x q2 Z)``."""

    F: Mat
    cover: tuple[int, int] = (1, 1)
    period_cap: int = field(default=DEFAULT_PERIOD_CAP, compare=False)

    def __post_init__(self):
        F = as_int_matrix(self.F)
        object.__setattr__(self, "F", F)
        q1, q2 = (int(q) for q in self.cover)
        if q1 <= 0 or q2 <= 0:
            raise CoverError("cover multiplicities must be positive")
        object.__setattr__(self, "cover", (q1, q2))
        if not check_hyperbolic(F):
            raise NotHyperbolicError(f"{F} has an eigenvalue of modulus one")
        if not preserves_lattice(F, (q1, q2)):
            raise CoverError(
                f"{F} does not preserve {q1}Z x {q2}Z; for the (2,1) cover F11 must be odd "
                "and F12 even"
            )

    @cached_property
    def det(self) -> int:
        return det(self.F)

    @cached_property
    def trace(self) -> int:
        return self.F[0][0] + self.F[1][1]

    @cached_property
    def G(self) -> Mat:
        """The automorphism in coordinates y = Q^-1 x on the standard torus."""
        (a, b), (c, d) = self.F
        q1, q2 = self.cover
        return ((a, b * q2 // q1), (c * q1 // q2, d))

    @cached_property
    def inverse_matrix(self) -> Mat:
        return inverse(self.F)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.F, dtype=np.int64)

    def power(self, n: int) -> Mat:
        return matpow(self.F, n)

    # exact point maps -------------------------------------------------
    def apply(self, x: RationalPoint, n: int = 1) -> RationalPoint:
        M = self.power(n)
        a = _check(M[0][0] * x.a + M[0][1] * x.b)
        b = _check(M[1][0] * x.a + M[1][1] * x.b)
        return RationalPoint.make(a, b, x.d, self.cover)

    def orbit(self, x: RationalPoint, n: int) -> list[RationalPoint]:
        pts = [x]
        for _ in range(n - 1):
            pts.append(self.apply(pts[-1]))
        return pts

    def least_period(self, x: RationalPoint, n: int) -> int:
        """Least period of ``x`` given that ``f^n x = x``."""
        for k in sorted(_divisors(n)):
            if self.apply(x, k) == x:
                return k
        raise TorusError(f"{x} is not fixed by f^{n}")

    def apply_numerators(self, a: np.ndarray, b: np.ndarray, D: int, n: int = 1):
        """Vectorised exact map on numerator arrays over the common denominator ``D``."""
        M = self.power(n)
        bound = (abs(M[0][0]) + abs(M[0][1]) + abs(M[1][0]) + abs(M[1][1])) * D * max(self.cover)
        if bound >= NP_BOUND:
            raise OverflowError("numerators would exceed the int64 working range")
        q1, q2 = self.cover
        a2 = (M[0][0] * a + M[0][1] * b) % (q1 * D)
        b2 = (M[1][0] * a + M[1][1] * b) % (q2 * D)
        return a2, b2

    # float orbits via dyadic snapping -----------------------------------
    def dyadic_bits(self) -> int:
        row = max(abs(self.F[0][0]) + abs(self.F[0][1]), abs(self.F[1][0]) + abs(self.F[1][1]))
        irow = max(
            abs(self.inverse_matrix[0][0]) + abs(self.inverse_matrix[0][1]),
            abs(self.inverse_matrix[1][0]) + abs(self.inverse_matrix[1][1]),
        )
        head = math.ceil(math.log2(max(row, irow) * max(self.cover))) + 1
        return min(52, 62 - head)

    def float_orbit(self, x, n: int) -> np.ndarray:
        """Orbit ``x, f x, ..., f^{n-1} x`` (or backwards for ``n < 0``) of float points.

        Points are snapped to the dyadic grid ``2^-k`` and iterated exactly, so
        ``float_orbit(x, n+m)[m:]`` equals ``float_orbit(f^m x, n)`` bit for bit.
        Leading axes of ``x`` are vectorised; output shape ``(|n|, ..., 2)``.
        """
        k = self.dyadic_bits()
        D = 1 << k
        x = np.asarray(x, dtype=float)
        q1, q2 = self.cover
        a = np.round(np.mod(x[..., 0], q1) * D).astype(np.int64) % (q1 * D)
        b = np.round(np.mod(x[..., 1], q2) * D).astype(np.int64) % (q2 * D)
        step = 1 if n >= 0 else -1
        M = self.F if step == 1 else self.inverse_matrix
        out = np.empty((abs(n),) + a.shape + (2,))
        for i in range(abs(n)):
            out[i, ..., 0] = a / D
            out[i, ..., 1] = b / D
            a, b = (M[0][0] * a + M[0][1] * b) % (q1 * D), (M[1][0] * a + M[1][1] * b) % (q2 * D)
        return out

    def float_apply(self, x, n: int = 1) -> np.ndarray:
        """``f^n x`` for float points, through the same dyadic snapping as :meth:`float_orbit`."""
        if n == 0:
            return self.float_orbit(x, 1)[0]
        orb = self.float_orbit(x, n + (1 if n > 0 else -1))
        return orb[-1]

    def map_float(self, x1, x2, n: int = 1):
        """Plain float image ``F^n x`` reduced mod the cover (for grid resampling)."""
        M = np.array(self.power(n), dtype=float)
        q1, q2 = self.cover
        y1 = M[0, 0] * x1 + M[0, 1] * x2
        y2 = M[1, 0] * x1 + M[1, 1] * x2
        return np.mod(y1, q1), np.mod(y2, q2)

    def lift(self, cover: tuple[int, int]) -> "LatticeAutomorphism":
        return lift_to_cover(self, cover)


def preserves_lattice(F: Mat, cover: tuple[int, int]) -> bool:
    (a, b), (c, d) = F
    q1, q2 = cover
    # F (q1, 0) = (a q1, c q1) and F (0, q2) = (b q2, d q2) must lie in q1 Z x q2 Z
    return (c * q1) % q2 == 0 and (b * q2) % q1 == 0


def lift_to_cover(f: LatticeAutomorphism, cover: tuple[int, int]) -> LatticeAutomorphism:
    q1, q2 = (int(q) for q in cover)
    if (q1 % f.cover[0]) or (q2 % f.cover[1]):
        raise CoverError(f"{cover} is not a cover of {f.cover}")
    if not preserves_lattice(f.F, (q1, q2)):
        raise CoverError(
            f"F = {f.F} does not preserve {q1}Z x {q2}Z (need F11 odd and F12 even for the "
            "(2,1) double cover)"
        )
    return LatticeAutomorphism(f.F, (q1, q2), f.period_cap)


def project_point(x, cover: tuple[int, int] = (1, 1)):
    """Project a point of a cover to the torus ``R^2 / (cover)``; works on RationalPoint or floats."""
    if isinstance(x, RationalPoint):
        return RationalPoint.make(x.a, x.b, x.d, cover)
    x = np.asarray(x, dtype=float)
    return np.mod(x, np.asarray(cover, dtype=float))


def lift_point(x, cover: tuple[int, int]):
    """Canonical lift (same coordinates in the larger fundamental domain)."""
    if isinstance(x, RationalPoint):
        return RationalPoint.make(x.a, x.b, x.d, cover)
    return np.asarray(x, dtype=float).copy()


def preimages(x: RationalPoint, base_cover, cover) -> list[RationalPoint]:
    """All points of ``cover`` projecting to ``x`` on ``base_cover``."""
    r1, r2 = cover[0] // base_cover[0], cover[1] // base_cover[1]
    out = [
        RationalPoint.make(x.a + i * base_cover[0] * x.d, x.b + j * base_cover[1] * x.d, x.d, cover)
        for i in range(r1)
        for j in range(r2)
    ]
    return sorted(out)


def _divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


# periodic points --------------------------------------------------------------


class PeriodicPointSet(Sequence):
    """All fixed points of ``f^n``, enumerated lazily in lexicographic order.

    The solution set of ``(F^n - I) x in lattice`` is described by the Smith
    form of ``G^n - I``: ``x = Q V w`` with ``w`` on the grid
    ``(1/d1) Z x (1/d2) Z`` modulo ``Z^2``.
    """

    def __init__(self, f: LatticeAutomorphism, n: int):
        if n < 1:
            raise TorusError("period must be positive")
        if n > f.period_cap:
            raise TorusError(f"period {n} exceeds the configured cap {f.period_cap}")
        self.f = f
        self.n = n
        Gn = matpow(f.G, n)
        M = ((Gn[0][0] - 1, Gn[0][1]), (Gn[1][0], Gn[1][1] - 1))
        self.U, (self.d1, self.d2), self.V = smith_normal_form(M)
        if self.d1 == 0 or self.d2 == 0:
            raise NotHyperbolicError("F^n - I is singular")
        self.denominator = self.d2
        self._cache: list[RationalPoint] | None = None

    def __len__(self) -> int:
        return self.d1 * self.d2

    def iter_numerators(self, chunk: int = 1 << 22) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield unsorted numerator chunks ``(a, b)`` over the denominator ``self.denominator``."""
        d1, d2 = self.d1, self.d2
        D = d2
        r = d2 // d1
        V = self.V
        q1, q2 = self.f.cover
        vmax = max(abs(v) for row in V for v in row)
        if 2 * vmax * D * D >= NP_BOUND:
            raise OverflowError(f"period {self.n} enumeration exceeds the int64 working range")
        total = d1 * d2
        for start in range(0, total, chunk):
            idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
            i = idx // d2
            j = idx % d2
            u = i * r
            y1 = (V[0][0] * u + V[0][1] * j) % D
            y2 = (V[1][0] * u + V[1][1] * j) % D
            yield y1 * q1, y2 * q2

    def arrays(self) -> tuple[np.ndarray, np.ndarray, int]:
        """All points as sorted numerator arrays over a common denominator."""
        parts = list(self.iter_numerators(chunk=len(self) or 1))
        a = np.concatenate([p[0] for p in parts])
        b = np.concatenate([p[1] for p in parts])
        order = np.lexsort((b, a))
        return a[order], b[order], self.denominator

    def to_list(self) -> list[RationalPoint]:
        if self._cache is None:
            a, b, D = self.arrays()
            cover = self.f.cover
            self._cache = [RationalPoint.make(int(x), int(y), D, cover) for x, y in zip(a, b)]
        return self._cache

    def __iter__(self):
        return iter(self.to_list())

    def __getitem__(self, i):
        return self.to_list()[i]

    def __contains__(self, x) -> bool:
        if not isinstance(x, RationalPoint):
            return False
        return self.f.apply(x, self.n) == x


def periodic_points(f: LatticeAutomorphism, n: int) -> PeriodicPointSet:
    """Complete set of fixed points of ``f^n``."""
    return PeriodicPointSet(f, n)


def least_period_mask(f: LatticeAutomorphism, a: np.ndarray, b: np.ndarray, D: int, n: int) -> np.ndarray:
    """Boolean mask of points (fixed by f^n) whose least period is exactly ``n``."""
    mask = np.ones(a.shape, dtype=bool)
    for k in _divisors(n)[:-1]:
        ak, bk = f.apply_numerators(a, b, D, k)
        mask &= ~((ak == a) & (bk == b))
    return mask


@dataclass
class OrbitTable:
    """Periodic orbits of least period ``<= n_max`` laid out contiguously.

    ``reps_a/reps_b`` (over ``denominators``) are the lexicographically minimal
    representatives; ``points`` holds float coordinates of every orbit point in
    forward order starting at the representative; ``offsets`` delimit orbits.
    """

    f: LatticeAutomorphism
    n_max: int
    periods: np.ndarray
    reps_a: np.ndarray
    reps_b: np.ndarray
    denominators: np.ndarray
    points: np.ndarray
    offsets: np.ndarray

    def __len__(self) -> int:
        return len(self.periods)

    def orbit(self, i: int) -> PeriodicOrbit:
        n = int(self.periods[i])
        base = RationalPoint.make(int(self.reps_a[i]), int(self.reps_b[i]), int(self.denominators[i]), self.f.cover)
        return PeriodicOrbit(base, n, tuple(self.f.orbit(base, n)))

    def orbit_points(self, i: int) -> np.ndarray:
        return self.points[self.offsets[i] : self.offsets[i + 1]]

    def orbit_sums(self, values: np.ndarray) -> np.ndarray:
        """Sum per-point values along each orbit."""
        return np.add.reduceat(values, self.offsets[:-1]) if len(self) else np.zeros(0)


@lru_cache(maxsize=32)
def orbit_table(f: LatticeAutomorphism, n_max: int) -> OrbitTable:
    periods, ra, rb, dens, pts, counts = [], [], [], [], [], []
    for n in range(1, n_max + 1):
        a, b, D = periodic_points(f, n).arrays()
        keep = least_period_mask(f, a, b, D, n)
        a, b = a[keep], b[keep]
        if not len(a):
            continue
        orb_a = [a]
        orb_b = [b]
        for _ in range(n - 1):
            na, nb = f.apply_numerators(orb_a[-1], orb_b[-1], D)
            orb_a.append(na)
            orb_b.append(nb)
        A = np.stack(orb_a)  # (n, N)
        B = np.stack(orb_b)
        is_rep = np.ones(a.shape, dtype=bool)
        for k in range(1, n):
            is_rep &= (A[0] < A[k]) | ((A[0] == A[k]) & (B[0] < B[k]))
        A, B = A[:, is_rep], B[:, is_rep]
        m = A.shape[1]
        periods.append(np.full(m, n))
        ra.append(A[0])
        rb.append(B[0])
        dens.append(np.full(m, D, dtype=np.int64))
        pts.append(np.stack([A.T / D, B.T / D], axis=-1).reshape(-1, 2))
        counts.append(np.full(m, n))
    if periods:
        periods_a = np.concatenate(periods)
        counts_a = np.concatenate(counts)
        offsets = np.concatenate([[0], np.cumsum(counts_a)])
        table = OrbitTable(
            f, n_max, periods_a, np.concatenate(ra), np.concatenate(rb), np.concatenate(dens),
            np.concatenate(pts), offsets,
        )
    else:
        e = np.zeros(0, dtype=np.int64)
        table = OrbitTable(f, n_max, e, e, e, e, np.zeros((0, 2)), np.zeros(1, dtype=np.int64))
    return table


def periodic_orbits(f: LatticeAutomorphism, n_max: int) -> list[PeriodicOrbit]:
    table = orbit_table(f, n_max)
    return [table.orbit(i) for i in range(len(table))]


# neighbourhood search -----------------------------------------------------------


def _gauss_reduce(b1: list[int], b2: list[int]) -> tuple[list[int], list[int]]:
    def dot(u, v):
        return u[0] * v[0] + u[1] * v[1]

    if dot(b1, b1) > dot(b2, b2):
        b1, b2 = b2, b1
    while True:
        mu = round(Fraction(dot(b1, b2), dot(b1, b1)))
        b2 = [b2[0] - mu * b1[0], b2[1] - mu * b1[1]]
        if dot(b2, b2) >= dot(b1, b1):
            return b1, b2
        b1, b2 = b2, b1


def ball_points(f: LatticeAutomorphism, center, radius: float, n: int):
    """Numerators ``(a, b, D)`` of all fixed points of ``f^n`` within ``radius`` of ``center``.

    Enumerates the lattice ``Q (G^n - I)^{-1} Z^2`` inside the box around the
    centre using a Gauss-reduced basis, so the cost scales with the number of
    points found rather than with ``|det(F^n - I)|``.
    """
    q1, q2 = f.cover
    if not 0 < radius < min(q1, q2) / 2:
        raise TorusError("radius must be positive and below half the cover period")
    Gn = matpow(f.G, n)
    M = ((Gn[0][0] - 1, Gn[0][1]), (Gn[1][0], Gn[1][1] - 1))
    N = abs(det(M))
    adj = ((M[1][1], -M[0][1]), (-M[1][0], M[0][0]))  # M^{-1} = adj / det
    # lattice N * Q M^{-1} Z^2 spanned by the columns of Q adj
    b1 = [adj[0][0] * q1, adj[1][0] * q2]
    b2 = [adj[0][1] * q1, adj[1][1] * q2]
    b1, b2 = _gauss_reduce(b1, b2)
    B = np.array([[b1[0], b2[0]], [b1[1], b2[1]]], dtype=float)
    Binv = np.linalg.inv(B)
    c = np.asarray(center, dtype=float) * N
    r = radius * N
    corners = np.array([[c[0] + s * r, c[1] + t * r] for s in (-1, 1) for t in (-1, 1)])
    kc = corners @ Binv.T
    lo = np.floor(kc.min(axis=0)) - 1
    hi = np.ceil(kc.max(axis=0)) + 1
    if N * max(q1, q2) * 4 >= NP_BOUND or max(abs(v) for v in b1 + b2) * (hi - lo).max() >= NP_BOUND:
        raise OverflowError("ball search exceeds the int64 working range")
    k1 = np.arange(int(lo[0]), int(hi[0]) + 1, dtype=np.int64)
    a_out, b_out = [], []
    step = max(1, (1 << 22) // max(1, int(hi[1] - lo[1] + 1)))
    for s in range(0, len(k1), step):
        K1, K2 = np.meshgrid(k1[s : s + step], np.arange(int(lo[1]), int(hi[1]) + 1, dtype=np.int64), indexing="ij")
        X = K1 * b1[0] + K2 * b2[0]
        Y = K1 * b1[1] + K2 * b2[1]
        keep = (np.abs(X - c[0]) <= r) & (np.abs(Y - c[1]) <= r)
        a_out.append(X[keep])
        b_out.append(Y[keep])
    a = np.concatenate(a_out) % (q1 * N)
    b = np.concatenate(b_out) % (q2 * N)
    # exact distance filter (the float box test above is only a prefilter)
    pts = np.stack([a / N, b / N], axis=-1)
    d = torus_distance(pts, center, f.cover)
    keep = d < radius
    a, b = a[keep], b[keep]
    key = np.unique(np.stack([a, b], axis=-1), axis=0)
    return key[:, 0], key[:, 1], N


def ball_periodic_search(f: LatticeAutomorphism, center, radius: float, n_max: int):
    """All periodic points of least period ``<= n_max`` within ``radius`` of ``center``.

    Returns ``[(PeriodicOrbit, distance), ...]`` sorted by period then distance.
    """
    if n_max > f.period_cap:
        raise TorusError(f"n_max {n_max} exceeds the configured cap {f.period_cap}")
    out = []
    for n in range(1, n_max + 1):
        a, b, N = ball_points(f, center, radius, n)
        keep = least_period_mask(f, a, b, N, n)
        a, b = a[keep], b[keep]
        dist = torus_distance(np.stack([a / N, b / N], axis=-1), center, f.cover)
        order = np.lexsort((b, a, dist))
        for i in order:
            base = RationalPoint.make(int(a[i]), int(b[i]), N, f.cover)
            out.append((PeriodicOrbit(base, n, tuple(f.orbit(base, n))), float(dist[i])))
    return out
