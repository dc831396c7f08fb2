"""Invariant line fields and conformal structures, and the geometry of SPD(2).

Conformal structures are symmetric positive definite 2x2 matrices of
determinant one, stored in log coordinates ``(a, b)`` with
``S = exp([[a, b], [b, -a]])``.  Line fields are angles modulo ``pi``.

Grids.  A field on the cover ``(q1, q2)`` is sampled at ``x = (i, j) / N``.
The integer matrix ``F`` permutes these points exactly, so the graph
transform decouples into independent cycles (periodic orbits of ``f``).  The
default solvers compute the limit of the transform on each cycle in closed
form: an eigenvector of the cycle product for lines, the fixed point of the
cycle product for conformal structures.  Cycles whose product is degenerate
(near scalar) are seeded from their grid neighbours and propagated.  The
plain iterative schemes are available as ``method="iterate"`` and
``method="mann"``.  The contract is the residual measured off the grid with
spline interpolation.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cocycle import Cocycle
from .fields import GridField
from .torus import orbit_table


class StructureError(ValueError):
    pass


class FieldTooRoughError(StructureError):
    pass


class TransversalityError(StructureError):
    pass


# SPD(2) geometry -------------------------------------------------------------------------


def det2(M):
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def inv2(M):
    d = det2(M)
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 1, 1] = M[..., 0, 0]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    return out / d[..., None, None]


def symmetrize(S):
    return 0.5 * (S + np.swapaxes(S, -1, -2))


def normalize_det(S):
    return S / np.sqrt(np.abs(det2(S)))[..., None, None]


def pushforward(A, S):
    """``A[S] = |det A| (A^{-1})^T S A^{-1}``, which has determinant one for ``det S = 1``.

    The scale factor makes the action projective: ``(tA)[S] = A[S]``.
    """
    A = np.asarray(A, dtype=float)
    S = np.asarray(S, dtype=float)
    Ai = inv2(A)
    out = np.abs(det2(A))[..., None, None] * (np.swapaxes(Ai, -1, -2) @ S @ Ai)
    return symmetrize(out)


def sqrt_spd(S):
    """Principal square root of an SPD 2x2 matrix (any determinant)."""
    S = np.asarray(S, dtype=float)
    s = np.sqrt(det2(S))
    t = np.sqrt(S[..., 0, 0] + S[..., 1, 1] + 2 * s)
    return (S + s[..., None, None] * np.eye(2)) / t[..., None, None]


def spd_log(S):
    """Log coordinates ``(a, b)`` of a det-one SPD matrix, accurate near the identity."""
    S = np.asarray(S, dtype=float)
    h = 0.5 * (S[..., 0, 0] - S[..., 1, 1])
    b = 0.5 * (S[..., 0, 1] + S[..., 1, 0])
    rho = np.hypot(h, b)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(rho > 1e-300, np.arcsinh(rho) / rho, 1.0)
    return np.stack([k * h, k * b], axis=-1)


def spd_exp(ab):
    """Inverse of :func:`spd_log`."""
    ab = np.asarray(ab, dtype=float)
    a, b = ab[..., 0], ab[..., 1]
    r = np.hypot(a, b)
    c = np.cosh(r)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(r > 1e-300, np.sinh(r) / r, 1.0)
    out = np.empty(ab.shape[:-1] + (2, 2))
    out[..., 0, 0] = c + k * a
    out[..., 1, 1] = c - k * a
    out[..., 0, 1] = out[..., 1, 0] = k * b
    return out


def inv_sqrt_spd(S):
    return inv2(sqrt_spd(S))


def hyp_distance(S1, S2):
    """``|| log(S1^{-1/2} S2 S1^{-1/2}) ||_F``."""
    R = inv_sqrt_spd(S1)
    M = symmetrize(R @ np.asarray(S2, dtype=float) @ R)
    # eigenvalues 1 + m +- r of the symmetric M, via log1p for accuracy near Id
    m = 0.5 * (M[..., 0, 0] + M[..., 1, 1]) - 1.0
    r = np.hypot(0.5 * (M[..., 0, 0] - M[..., 1, 1]), M[..., 0, 1])
    return np.hypot(np.log1p(m + r), np.log1p(m - r))


def midpoint(S1, S2):
    """Geometric mean ``S1 # S2``.

    For 2x2 matrices of equal determinant the mean is the normalised sum,
    ``(S1 + S2) sqrt(det S1 / det(S1 + S2))``.
    """
    S1 = np.asarray(S1, dtype=float)
    S2 = np.asarray(S2, dtype=float)
    d1, d2 = det2(S1), det2(S2)
    # rescale to equal determinants, average, restore the geometric-mean determinant
    T2 = S2 * np.sqrt(d1 / d2)[..., None, None]
    M = S1 + T2
    M = M * np.sqrt(d1 / det2(M))[..., None, None]
    return symmetrize(M * (d2 / d1)[..., None, None] ** 0.25)


def geometric_mean(S1, S2):
    """General-formula geometric mean ``S1^{1/2} (S1^{-1/2} S2 S1^{-1/2})^{1/2} S1^{1/2}`` (test oracle)."""
    R = sqrt_spd(S1)
    Ri = inv2(R)
    return symmetrize(R @ sqrt_spd(symmetrize(Ri @ S2 @ Ri)) @ R)


# grids and cycles ---------------------------------------------------------------------------


@dataclass
class TorusGrid:
    """The grid ``(i, j) / N`` on the cover, with the exact action of ``F``."""

    F: tuple
    cover: tuple
    N: int

    def __post_init__(self):
        q1, q2 = self.cover
        self.shape = (self.N * q1, self.N * q2)
        n1, n2 = self.shape
        i, j = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
        self.i, self.j = i.ravel(), j.ravel()
        F = self.F
        fi = (F[0][0] * self.i + F[0][1] * self.j) % n1
        fj = (F[1][0] * self.i + F[1][1] * self.j) % n2
        self.fwd = fi * n2 + fj
        self.bwd = np.empty_like(self.fwd)
        self.bwd[self.fwd] = np.arange(len(self.fwd))
        self.points = np.stack([self.i / self.N, self.j / self.N], axis=-1)

    @property
    def size(self):
        return len(self.fwd)

    def cycles(self) -> list[np.ndarray]:
        """Cycles of the permutation, each in forward order from its smallest index."""
        if not hasattr(self, "_cycles"):
            seen = np.zeros(self.size, dtype=bool)
            out = []
            for start in range(self.size):
                if seen[start]:
                    continue
                cyc = [start]
                k = self.fwd[start]
                while k != start:
                    cyc.append(k)
                    k = self.fwd[k]
                cyc = np.array(cyc)
                seen[cyc] = True
                out.append(cyc)
            self._cycles = out
        return self._cycles

    def cycles_by_length(self):
        groups: dict[int, list] = {}
        for c in self.cycles():
            groups.setdefault(len(c), []).append(c)
        return {n: np.array(cs) for n, cs in groups.items()}

    def neighbours(self, k):
        n1, n2 = self.shape
        i, j = divmod(int(k), n2)
        return [((i + di) % n1) * n2 + (j + dj) % n2 for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1))]


def cycle_products(gen: np.ndarray, cycles: np.ndarray) -> np.ndarray:
    """Products around cycles of equal length; ``gen`` holds A at every grid point.

    Products are rescaled to unit Frobenius norm each step; only directions and
    conformal classes are read from them.
    """
    P = gen[cycles[:, 0]]
    P = P / np.sqrt(np.sum(P * P, axis=(1, 2)))[:, None, None]
    for t in range(1, cycles.shape[1]):
        P = gen[cycles[:, t]] @ P
        P = P / np.sqrt(np.sum(P * P, axis=(1, 2)))[:, None, None]
    return P


def validation_points(cover, n: int = 97):
    q1, q2 = cover
    g1 = q1 * (np.arange(n * q1) + 0.3183) / (n * q1)
    g2 = q2 * (np.arange(n * q2) + 0.6180) / (n * q2)
    x1, x2 = np.meshgrid(g1, g2, indexing="ij")
    return np.stack([x1.ravel(), x2.ravel()], axis=-1)


# line fields -------------------------------------------------------------------------------


def line_vectors(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def line_angle(v):
    """Angle of the line spanned by ``v``, in ``[0, pi)``."""
    return np.mod(np.arctan2(v[..., 1], v[..., 0]), np.pi)


def angle_between_lines(u, v):
    """Angle in ``[0, pi/2]`` between the lines spanned by ``u`` and ``v``."""
    cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    dot = u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]
    return np.arctan2(np.abs(cross), np.abs(dot))


def eigendirections(P, which: str = "dominant"):
    """Eigen-direction of real-spectrum 2x2 matrices; NaN where the spectrum is complex.

    ``which`` is ``dominant`` (larger modulus) or ``recessive``.  Near-parabolic
    matrices (discriminant within roundoff of ``||P||^2``) get the kernel of
    ``P - (tr/2) I``.
    """
    P = np.asarray(P, dtype=float)
    tr = P[..., 0, 0] + P[..., 1, 1]
    det = det2(P)
    disc = tr * tr - 4 * det
    r = np.sqrt(np.maximum(disc, 0.0))
    sgn = np.where(tr >= 0, 1.0, -1.0)
    big = (tr + sgn * r) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, det / big, (tr - sgn * r) / 2)
    lam = big if which == "dominant" else small
    scale = np.maximum(np.sum(P * P, axis=(-2, -1)), 1e-300)
    lam = np.where(np.abs(disc) <= 1e-12 * scale, tr / 2, lam)
    K = P - lam[..., None, None] * np.eye(2)
    r0 = np.stack([-K[..., 0, 1], K[..., 0, 0]], -1)
    r1 = np.stack([-K[..., 1, 1], K[..., 1, 0]], -1)
    n0 = np.hypot(r0[..., 0], r0[..., 1])
    n1 = np.hypot(r1[..., 0], r1[..., 1])
    v = np.where((n0 >= n1)[..., None], r0, r1)
    v = v / np.maximum(np.hypot(v[..., 0], v[..., 1]), 1e-300)[..., None]
    v[disc < -1e-12 * scale] = np.nan
    return v


@dataclass
class LineField:
    theta: np.ndarray  # (n1, n2) angles in [0, pi)
    cover: tuple
    N: int
    residual: float  # off-grid, interpolated
    grid_residual: float
    direction: str = "forward"
    method: str = "periodic"
    degenerate: int = 0  # cycles seeded from neighbours
    history: list = field(default_factory=list)
    order: int = 5

    def __post_init__(self):
        self._interp = GridField(np.stack([np.cos(2 * self.theta), np.sin(2 * self.theta)], -1), self.cover, self.order)

    def angle_at(self, x1, x2):
        w = self._interp.evaluate(x1, x2)
        return np.mod(0.5 * np.arctan2(w[..., 1], w[..., 0]), np.pi)

    def vector_at(self, x1, x2):
        return line_vectors(self.angle_at(x1, x2))

    def grid_points(self):
        n1, n2 = self.theta.shape
        x1, x2 = np.meshgrid(np.arange(n1) / self.N, np.arange(n2) / self.N, indexing="ij")
        return x1, x2

    def holonomy(self) -> tuple[int, int]:
        return holonomy(self)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x1", "x2", "theta", "residual"])
        x1, x2 = self.grid_points()
        for a, b, t in zip(x1.ravel(), x2.ravel(), self.theta.ravel()):
            w.writerow([repr(float(a)), repr(float(b)), repr(float(t)), repr(self.residual)])
        return buf.getvalue()


def line_residual(A: Cocycle, angle_fn, pts) -> float:
    """Sup angle between ``A(x) v(x)`` and ``v(f x)`` at the given points."""
    y1, y2 = A.base.map_float(pts[:, 0], pts[:, 1])
    v = line_vectors(angle_fn(pts[:, 0], pts[:, 1]))
    w = line_vectors(angle_fn(y1, y2))
    Av = (A(pts) @ v[..., None])[..., 0]
    return float(np.max(angle_between_lines(Av, w)))


def _fill_degenerate(grid: TorusGrid, values: np.ndarray, valid: np.ndarray, degenerate_cycles, seed_fn, propagate_fn):
    """Seed degenerate cycles from valid grid neighbours, then propagate around the cycle."""
    pending = list(degenerate_cycles)
    passes = 0
    while pending:
        passes += 1
        if passes > 10 * len(degenerate_cycles) + 10:
            raise StructureError("could not seed degenerate cycles from neighbours")
        rest = []
        for cyc in pending:
            counts = [sum(valid[nb] for nb in grid.neighbours(k)) for k in cyc]
            best = int(np.argmax(counts))
            if counts[best] == 0:
                rest.append(cyc)
                continue
            k = cyc[best]
            nbs = [nb for nb in grid.neighbours(k) if valid[nb]]
            values[k] = seed_fn(values[nbs])
            order = np.roll(cyc, -best)
            propagate_fn(order)
            valid[cyc] = True
        if len(rest) == len(pending):
            if not valid.any():
                # nothing to seed from: pick a default at one cycle and continue
                cyc = rest.pop(0)
                values[cyc[0]] = seed_fn(None)
                propagate_fn(cyc)
                valid[cyc] = True
            else:
                raise StructureError("degenerate cycles isolated from every valid cell")
        pending = rest


def find_line(A: Cocycle, N: int = 128, direction: str = "forward", method: str = "periodic",
              iterations: int = 2000, cesaro: float = 0.25, degenerate_tol: float = 1e-9,
              order: int = 5) -> LineField:
    """Invariant line field ``L(f x) = A(x) L(x)`` on the grid.

    ``forward`` is the line attracting under forward iteration (dominant
    eigen-direction on each cycle); ``backward`` the recessive one.  With
    ``method="iterate"`` the projective graph transform
    ``theta(x) <- angle(A(f^-1 x) v(theta(f^-1 x)))`` is swept ``iterations``
    times from ``theta = 0`` and the last ``cesaro`` fraction of the iterates is
    averaged (in doubled angle) for the sublinear parabolic case.
    """
    if direction not in ("forward", "backward"):
        raise ValueError(direction)
    grid = TorusGrid(A.base.F, A.cover, N)
    gen = A(grid.points)
    # the followed line is dominant for the chosen dynamics; gen_d maps fiber k to fiber perm[k]
    if direction == "forward":
        gen_d, perm = gen, grid.fwd
    else:
        gen_d, perm = inv2(gen[grid.bwd]), grid.bwd
    history: list = []
    if method == "iterate":
        theta = _iterate_lines(gen_d, perm, iterations, cesaro, history).reshape(grid.shape)
        degenerate = 0
    elif method == "periodic":
        v = np.full((grid.size, 2), np.nan)
        valid = np.zeros(grid.size, dtype=bool)
        degenerate_cycles = []

        def propagate(order):
            for t in range(1, len(order)):
                w = gen_d[order[t - 1]] @ v[order[t - 1]]
                v[order[t]] = w / np.hypot(*w)

        for n, cycles in grid.cycles_by_length().items():
            if direction == "backward":
                cycles = cycles[:, ::-1]
            P = cycle_products(gen_d, cycles)
            d = eigendirections(P, "dominant")
            tr = P[:, 0, 0] + P[:, 1, 1]
            scale = np.sum(P * P, axis=(1, 2))
            disc = tr * tr - 4 * det2(P)
            with np.errstate(divide="ignore", invalid="ignore"):
                nil = np.sqrt(np.sum((P / (tr / 2)[:, None, None] - np.eye(2)) ** 2, axis=(1, 2)))
            degen = (np.abs(disc) <= degenerate_tol * scale) & (nil <= 1e-9)
            degen |= np.isnan(d).any(axis=1)
            d[degen] = (1.0, 0.0)
            cur = d
            v[cycles[:, 0]] = cur
            for t in range(1, n):
                w = (gen_d[cycles[:, t - 1]] @ cur[..., None])[..., 0]
                cur = w / np.hypot(w[:, 0], w[:, 1])[:, None]
                v[cycles[:, t]] = cur
            valid[cycles[~degen].ravel()] = True
            degenerate_cycles.extend(list(cycles[degen]))

        def seed(nb):
            if nb is None:
                return np.array([1.0, 0.0])
            t = 0.5 * np.angle(np.exp(2j * line_angle(nb)).mean())
            return np.array([np.cos(t), np.sin(t)])

        _fill_degenerate(grid, v, valid, degenerate_cycles, seed, propagate)
        theta = line_angle(v).reshape(grid.shape)
        degenerate = len(degenerate_cycles)
    else:
        raise ValueError(method)
    # grid residual through the exact permutation
    vv = line_vectors(theta.ravel())
    Av = (gen @ vv[..., None])[..., 0]
    grid_res = float(np.max(angle_between_lines(Av, vv[grid.fwd])))
    L = LineField(theta, A.cover, N, np.nan, grid_res, direction, method, degenerate, history, order)
    L.residual = line_residual(A, L.angle_at, validation_points(A.cover))
    return L


def _iterate_lines(gen_d, perm, iterations, cesaro, history):
    v = np.tile([1.0, 0.0], (len(perm), 1))
    acc = np.zeros(len(perm), dtype=complex)
    start = int(iterations * (1 - cesaro))
    for it in range(iterations):
        w = (gen_d @ v[..., None])[..., 0]
        if it % 100 == 0:
            history.append(float(np.max(angle_between_lines(w, v[perm]))))
        nxt = np.empty_like(v)
        nxt[perm] = w / np.hypot(w[:, 0], w[:, 1])[:, None]
        v = nxt
        if it >= start:
            acc += np.exp(2j * line_angle(v))
    return np.mod(0.5 * np.angle(acc), np.pi)


def holonomy(L: LineField) -> tuple[int, int]:
    """Twist signs of the line field along the two coordinate loops of its cover.

    The doubled angle is unwrapped along every grid row (first loop) and
    column (second loop); a total twist of ``k pi`` gives the sign ``(-1)^k``.
    """
    th = 2 * L.theta
    signs = []
    for axis in (0, 1):
        d = np.diff(np.concatenate([th, th.take([0], axis=axis)], axis=axis), axis=axis)
        d = np.angle(np.exp(1j * d))
        if np.max(np.abs(d)) > np.pi / 2:
            raise FieldTooRoughError(f"angle jump {np.max(np.abs(d)) / 2:.3g} rad between adjacent cells")
        k = np.rint(d.sum(axis=axis) / (2 * np.pi)).astype(int)
        par = np.unique(k % 2)
        if len(par) != 1:
            raise FieldTooRoughError("holonomy differs between parallel loops")
        signs.append(1 if par[0] == 0 else -1)
    return tuple(signs)


def line_field_from_function(theta_fn, cover=(1, 1), N: int = 128) -> LineField:
    """Sample a closed-form angle field (no cocycle; residuals left as NaN)."""
    n1, n2 = N * cover[0], N * cover[1]
    x1, x2 = np.meshgrid(np.arange(n1) / N, np.arange(n2) / N, indexing="ij")
    return LineField(np.mod(theta_fn(x1, x2), np.pi), cover, N, np.nan, np.nan, method="sampled")


@dataclass
class PeriodicLines:
    points: np.ndarray  # (m, 2) all orbit points
    period: np.ndarray  # (m,)
    dominant: np.ndarray  # (m, 2) unit vectors
    recessive: np.ndarray  # (m, 2); NaN where the product is parabolic
    kind: np.ndarray  # jordan type per point


def line_from_periodic(A: Cocycle, n_max: int = 5) -> PeriodicLines:
    """Eigen-directions of periodic products, propagated along each orbit."""
    from .cocycle import JORDAN_TYPES, jordan_types

    scan = A.periodic_scan(n_max)
    code, *_ = jordan_types(scan.products)
    ell = np.nonzero(code == 3)[0]
    if len(ell):
        raise StructureError(f"elliptic product at orbit {scan.table.orbit(int(ell[0]))}")
    table = scan.table
    pts, per, dom, rec, kinds = [], [], [], [], []
    for n in range(1, n_max + 1):
        idx = np.nonzero(table.periods == n)[0]
        if not len(idx):
            continue
        lo, hi = table.offsets[idx[0]], table.offsets[idx[-1] + 1]
        P = table.points[lo:hi].reshape(len(idx), n, 2)
        mats = A.evaluate_orbit(P)
        prod = scan.products[idx]
        d = eigendirections(prod, "dominant")
        r = eigendirections(prod, "recessive")
        r[code[idx] != 2] = np.nan
        ds, rs = [d], [r]
        for t in range(1, n):
            d = (mats[:, t - 1] @ d[..., None])[..., 0]
            d /= np.hypot(d[:, 0], d[:, 1])[:, None]
            r = (mats[:, t - 1] @ r[..., None])[..., 0]
            r /= np.hypot(r[:, 0], r[:, 1])[:, None]
            ds.append(d)
            rs.append(r)
        pts.append(P.reshape(-1, 2))
        per.append(np.full(len(idx) * n, n))
        dom.append(np.stack(ds, 1).reshape(-1, 2))
        rec.append(np.stack(rs, 1).reshape(-1, 2))
        kinds.append(np.repeat(np.array(JORDAN_TYPES)[code[idx]], n))
    return PeriodicLines(np.concatenate(pts), np.concatenate(per), np.concatenate(dom), np.concatenate(rec),
                         np.concatenate(kinds))


# conformal structures ----------------------------------------------------------------------


@dataclass
class ConformalField:
    log_coords: np.ndarray  # (n1, n2, 2)
    cover: tuple
    N: int
    residual: float  # off-grid, interpolated, hyperbolic distance
    grid_residual: float
    method: str = "periodic"
    degenerate: int = 0
    found: bool = True
    history: list = field(default_factory=list)
    order: int = 5
    obstructed: int = 0  # cycles whose product preserves no conformal structure

    def __post_init__(self):
        self._interp = GridField(self.log_coords, self.cover, self.order)

    def at(self, x1, x2):
        return spd_exp(self._interp.evaluate(x1, x2))

    def grid_values(self):
        return spd_exp(self.log_coords)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x1", "x2", "S11", "S12", "S22"])
        S = self.grid_values()
        n1, n2 = S.shape[:2]
        for i in range(n1):
            for j in range(n2):
                s = S[i, j]
                w.writerow([repr(i / self.N), repr(j / self.N), repr(float(s[0, 0])), repr(float(s[0, 1])), repr(float(s[1, 1]))])
        return buf.getvalue()


def _sup(d) -> float:
    """Sup of a residual array; non-finite entries count as infinite."""
    d = np.asarray(d, dtype=float)
    return float(np.max(np.where(np.isfinite(d), d, np.inf)))


def _conformal_pair(A, S_fn, pts):
    y1, y2 = A.base.map_float(pts[:, 0], pts[:, 1])
    return S_fn(y1, y2), pushforward(A(pts), S_fn(pts[:, 0], pts[:, 1]))


def conformal_residual(A: Cocycle, S_fn, pts) -> float:
    """Sup of ``d(S(f x), A(x)[S(x)])`` over the given points."""
    with np.errstate(all="ignore"):
        return _sup(hyp_distance(*_conformal_pair(A, S_fn, pts)))


def invariant_form(P):
    """SPD det-one ``S`` with ``P[S] = S`` for elliptic ``P``; NaN otherwise.

    ``S`` is the Gram matrix of the quadratic form ``v -> v ^ P v``, which
    Cayley-Hamilton makes invariant up to ``det P``.
    """
    P = np.asarray(P, dtype=float)
    a, b, c, d = P[..., 0, 0], P[..., 0, 1], P[..., 1, 0], P[..., 1, 1]
    S = np.empty(P.shape)
    S[..., 0, 0] = c
    S[..., 1, 1] = -b
    S[..., 0, 1] = S[..., 1, 0] = 0.5 * (d - a)
    sign = np.where(c + (-b) >= 0, 1.0, -1.0)
    S = S * sign[..., None, None]
    dt = det2(S)
    with np.errstate(invalid="ignore"):
        S = S / np.sqrt(dt)[..., None, None]
    S[dt <= 0] = np.nan
    return S


def _fourier_basis(x, cover, K):
    """Real Fourier modes ``cos``/``sin`` of ``2 pi (k1 x1 / q1 + k2 x2 / q2)`` with ``|k| <= K``."""
    q1, q2 = cover
    k1, k2 = np.meshgrid(np.arange(-K, K + 1), np.arange(0, K + 1), indexing="ij")
    keep = (k2 > 0) | (k1 > 0)
    k1, k2 = np.r_[0, k1[keep]], np.r_[0, k2[keep]]
    ph = 2 * np.pi * (np.outer(x[:, 0], k1 / q1) + np.outer(x[:, 1], k2 / q2))
    nz = (k1 != 0) | (k2 != 0)
    return np.concatenate([np.cos(ph), np.sin(ph[:, nz])], axis=1)


def spectral_conformal(A: Cocycle, K: int = 8, samples: int = 48, null_tol: float = 1e-6):
    """Smooth solution of ``A(x)^T S(f x) A(x) = |det A(x)| S(x)`` by least squares in Fourier modes.

    The equation is linear in ``S``.  Among right singular vectors whose singular
    value is below ``null_tol`` times the largest, the one nearest the identity
    field is returned (the smallest one when none is that small).  Returns a
    callable ``x -> S(x)`` normalised to determinant one, or None when the
    solution is not positive definite at the sample points.
    """
    grid = TorusGrid(A.base.F, A.cover, samples)
    x = grid.points
    y = x[grid.fwd]
    g = A(x)
    g = g / np.sqrt(np.abs(det2(g)))[:, None, None]
    Phi, Phif = _fourier_basis(x, A.cover, K), _fourier_basis(y, A.cover, K)
    nb = Phi.shape[1]
    # (A^T T A)_ij in terms of (t11, t12, t22)
    rows = []
    for i, j in ((0, 0), (0, 1), (1, 1)):
        c = (g[:, 0, i] * g[:, 0, j], g[:, 0, i] * g[:, 1, j] + g[:, 1, i] * g[:, 0, j], g[:, 1, i] * g[:, 1, j])
        blocks = [c[e][:, None] * Phif for e in range(3)]
        e_out = {(0, 0): 0, (0, 1): 1, (1, 1): 2}[(i, j)]
        blocks[e_out] = blocks[e_out] - Phi
        rows.append(np.concatenate(blocks, axis=1))
    M = np.concatenate(rows, axis=0)
    # QR first keeps the SVD small and well conditioned
    R = np.linalg.qr(M, mode="r")
    _, sv, Vt = scipy.linalg.svd(R, full_matrices=False, lapack_driver="gesvd")
    null = sv <= null_tol * sv[0]
    if not null.any():
        null = sv == sv[-1]
    V = Vt[null]
    ident = np.zeros(3 * nb)
    ident[0] = ident[2 * nb] = 1.0  # column 0 is the constant mode
    coef = V.T @ (V @ ident)
    if np.linalg.norm(coef) < 1e-12:
        coef = V[0]
    c11, c12, c22 = coef[:nb], coef[nb:2 * nb], coef[2 * nb:]
    if c11[0] + c22[0] < 0:
        c11, c12, c22 = -c11, -c12, -c22

    def S_of(p):
        P = _fourier_basis(np.asarray(p, dtype=float).reshape(-1, 2), A.cover, K)
        S = np.empty((len(P), 2, 2))
        S[:, 0, 0], S[:, 1, 1] = P @ c11, P @ c22
        S[:, 0, 1] = S[:, 1, 0] = P @ c12
        dt = det2(S)
        with np.errstate(invalid="ignore", divide="ignore"):
            S = S / np.sqrt(dt)[:, None, None]
        S[(dt <= 0) | (S[:, 0, 0] <= 0)] = np.nan
        return S

    if np.isnan(S_of(x)).any():
        return None
    return S_of


def find_conformal(A: Cocycle, N: int = 128, method: str = "periodic", iterations: int = 2000,
                   seed=None, degenerate_tol: float = 1e-9, order: int = 5,
                   found_tol: float = 1e-3) -> ConformalField:
    """Invariant conformal structure ``A(x)[S(x)] = S(f x)`` on the grid.

    ``method="mann"`` runs ``S <- S # T S`` with ``(T S)(f x) = A(x)[S(x)]`` from
    the seed (identity by default).  ``found`` is False when the residual
    stays above ``found_tol``; that is a failure to find, not a proof of
    nonexistence.
    """
    grid = TorusGrid(A.base.F, A.cover, N)
    gen = A(grid.points)
    history: list = []
    S0 = np.eye(2) if seed is None else np.asarray(seed, dtype=float)
    if method == "mann":
        S = np.broadcast_to(S0, (grid.size, 2, 2)).copy()
        for it in range(iterations):
            TS = np.empty_like(S)
            TS[grid.fwd] = pushforward(gen, S)
            S = midpoint(S, TS)
            if it % 100 == 0 or it == iterations - 1:
                history.append(float(np.max(hyp_distance(S[grid.fwd], pushforward(gen, S)))))
        degenerate = obstructed = 0
    elif method == "periodic":
        S = np.full((grid.size, 2, 2), np.nan)
        valid = np.zeros(grid.size, dtype=bool)
        degenerate_cycles = []
        obstructed = 0

        def propagate(order):
            for t in range(1, len(order)):
                S[order[t]] = pushforward(gen[order[t - 1]], S[order[t - 1]])

        for n, cycles in grid.cycles_by_length().items():
            P = cycle_products(gen, cycles)
            tr = P[:, 0, 0] + P[:, 1, 1]
            disc = tr * tr - 4 * det2(P)
            Sc = invariant_form(P)
            scalar = np.abs(disc) <= degenerate_tol * np.maximum(tr * tr, 1e-300)
            blocked = np.isnan(Sc).any(axis=(1, 2)) & ~scalar
            degen = scalar | blocked
            Sc[degen] = np.eye(2)
            cur = Sc
            S[cycles[:, 0]] = cur
            for t in range(1, n):
                cur = pushforward(gen[cycles[:, t - 1]], cur)
                S[cycles[:, t]] = cur
            # no invariant structure on these cycles: leave the seed, the residual will show it
            S[cycles[blocked].ravel()] = S0
            valid[cycles[~degen].ravel()] = True
            degenerate_cycles.extend(list(cycles[scalar]))
            obstructed += int(blocked.sum())

        def seed_fn(nb):
            if nb is None:
                return S0
            return spd_exp(spd_log(nb).mean(axis=0))

        _fill_degenerate(grid, S, valid, degenerate_cycles, seed_fn, propagate)
        degenerate = len(degenerate_cycles)
    elif method == "spectral":
        S_of = spectral_conformal(A)
        S = np.full((grid.size, 2, 2), np.nan) if S_of is None else S_of(grid.points)
        degenerate = obstructed = 0
    else:
        raise ValueError(method)
    with np.errstate(all="ignore"):
        grid_res = _sup(hyp_distance(S[grid.fwd], pushforward(gen, S)))
        C = ConformalField(spd_log(S).reshape(grid.shape + (2,)), A.cover, N, np.nan, grid_res, method, degenerate,
                           True, history, order, obstructed)
        C.residual = _sup(hyp_distance(*_conformal_pair(A, C.at, validation_points(A.cover))))
    C.found = bool(C.residual <= found_tol)
    return C
