"""Coboundary equations over a toral automorphism: obstruction scans and solvers.

The additive equation is ``alpha = phi o f - phi``.  Periodic sums
``alpha^+(p, n) = alpha(p) + ... + alpha(f^{n-1} p)`` are its obstructions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import fields as fl
from .fields import GridField, TrigPoly
from .torus import LatticeAutomorphism, PeriodicOrbit, orbit_table, torus_distance

OBSTRUCTION_TOL = 1e-8
ORBIT_BASE_POINT = (math.sqrt(2) - 1, math.sqrt(3) - 1)


class LivsicError(ValueError):
    pass


class PreconditionError(LivsicError):
    pass


class PartialCoverageError(LivsicError):
    pass


def reduce_mod(v, modulus: float):
    """Representative of ``v`` modulo ``modulus`` in ``(-modulus/2, modulus/2]``."""
    v = np.asarray(v, dtype=float)
    return v - modulus * np.ceil(v / modulus - 0.5)


# scans ---------------------------------------------------------------------------------


@dataclass
class ObstructionReport:
    kind: str  # additive | multiplicative | circle
    n_max: int
    table: object
    values: np.ndarray  # per orbit, in table order
    tol: float = OBSTRUCTION_TOL

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0

    @property
    def witness_index(self) -> int | None:
        """Largest obstruction among the shortest orbits beating the margin ``10 tol``.

        Falls back to the overall largest value when nothing beats the margin.
        """
        if not len(self.values):
            return None
        a = np.abs(self.values)
        bad = a > 10 * self.tol
        if not bad.any():
            return int(np.argmax(a))
        n0 = self.table.periods[bad].min()
        return int(np.argmax(np.where(bad & (self.table.periods == n0), a, -1.0)))

    @property
    def witness(self) -> PeriodicOrbit | None:
        i = self.witness_index
        return None if i is None else self.table.orbit(i)

    @property
    def verdict(self) -> bool:
        """True when every scanned obstruction vanishes to ``tol``."""
        return self.max_abs <= self.tol

    @property
    def margin(self) -> float:
        return abs(self.max_abs - self.tol) / self.tol

    def entries(self, limit: int | None = None):
        for i in range(len(self.values) if limit is None else min(limit, len(self.values))):
            yield self.table.orbit(i), float(self.values[i])

    def to_csv(self, limit: int | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["period", "point", "obstruction"])
        for o, v in self.entries(limit):
            b = o.base
            w.writerow([o.period, f"{b.a}/{b.d} {b.b}/{b.d}", repr(v)])
        return buf.getvalue()

    def to_json(self) -> dict:
        w = self.witness
        return {
            "kind": self.kind,
            "n_max": self.n_max,
            "orbits": len(self.values),
            "max_abs": self.max_abs,
            "tol": self.tol,
            "verdict": self.verdict,
            "witness": None if w is None else {"period": w.period, "point": [f"{w.base.a}/{w.base.d}", f"{w.base.b}/{w.base.d}"],
                                                "value": float(self.values[self.witness_index])},
        }


def periodic_sums(field_, f: LatticeAutomorphism, n_max: int) -> tuple[object, np.ndarray]:
    table = orbit_table(f, n_max)
    if not len(table):
        return table, np.zeros(0)
    pts = table.points
    vals = np.asarray(field_.evaluate(pts[:, 0], pts[:, 1]), dtype=float)
    return table, table.orbit_sums(vals)


def scan_additive(alpha, f: LatticeAutomorphism, n_max: int = 6, tol: float = OBSTRUCTION_TOL) -> ObstructionReport:
    table, sums = periodic_sums(alpha, f, n_max)
    return ObstructionReport("additive", n_max, table, sums, tol)


def _check_sign(k, cover) -> int:
    x1, x2 = fl.expr.sample_grid(cover, 64, offset=0.5)
    v = np.asarray(k.evaluate(x1, x2), dtype=float)
    if np.any(np.abs(v) < fl.expr.SINGULAR_TOL):
        raise LivsicError("multiplicative data vanishes on the sample grid")
    if np.all(v > 0):
        return 1
    if np.all(v < 0):
        return -1
    raise LivsicError("multiplicative data changes sign")


class _LogAbs:
    def __init__(self, k):
        self.k = k

    def evaluate(self, x1, x2):
        return np.log(np.abs(self.k.evaluate(x1, x2)))


def scan_multiplicative(k, f: LatticeAutomorphism, n_max: int = 6, tol: float = OBSTRUCTION_TOL) -> ObstructionReport:
    """Obstructions ``ln |k^x(p, n)|`` of ``k = phi o f / phi``."""
    _check_sign(k, f.cover)
    table, sums = periodic_sums(_LogAbs(k), f, n_max)
    return ObstructionReport("multiplicative", n_max, table, sums, tol)


def scan_circle(delta, f: LatticeAutomorphism, n_max: int = 6, modulus: float = 2 * math.pi,
                tol: float = OBSTRUCTION_TOL) -> ObstructionReport:
    """Periodic sums reduced to ``(-modulus/2, modulus/2]``."""
    table, sums = periodic_sums(delta, f, n_max)
    return ObstructionReport("circle", n_max, table, reduce_mod(sums, modulus), tol)


def scan_additive_batch(polys, f: LatticeAutomorphism, n_max: int, chunk: int = 1 << 17) -> np.ndarray:
    """Max periodic obstruction for many trig polys at once, shape ``(len(polys),)``.

    Orbit sums of each basis exponential are computed once, so the cost is one
    pass over the orbit table plus a matrix product.
    """
    table = orbit_table(f, n_max)
    keys = sorted({k for p in polys for k in p.coeffs if k > (0, 0) or (k[0] == 0 and k[1] > 0)} | {(0, 0)})
    ka = np.array(keys, dtype=float)
    q1, q2 = f.cover
    coef = np.zeros((len(keys), len(polys)), dtype=complex)
    for j, p in enumerate(polys):
        for i, k in enumerate(keys):
            c = p.coeffs.get(k, 0)
            coef[i, j] = c if k == (0, 0) else 2 * c
    out = np.zeros(len(polys))
    starts = table.offsets
    n_orb = len(table)
    i = 0
    while i < n_orb:
        j = int(np.searchsorted(starts, starts[i] + chunk, side="right")) - 1
        j = max(j, i + 1)
        lo, hi = starts[i], starts[j]
        pts = table.points[lo:hi]
        phase = 2 * np.pi * (np.outer(pts[:, 0], ka[:, 0] / q1) + np.outer(pts[:, 1], ka[:, 1] / q2))
        basis = np.exp(1j * phase)
        sums = np.add.reduceat(basis, starts[i:j] - lo, axis=0)
        vals = (sums @ coef).real
        out = np.maximum(out, np.abs(vals).max(axis=0))
        i = j
    return out


# Fourier solver ------------------------------------------------------------------------


@dataclass
class CoboundaryCertificate:
    phi: object
    residual: float
    tol: float
    representation: str  # trigpoly | grid
    normalization: str = "mean-zero"
    modulus: float | None = None  # for circle-valued solutions
    log_phi: object = None  # multiplicative solutions: phi = exp(log_phi)

    @property
    def valid(self) -> bool:
        return self.residual <= self.tol

    def to_json(self) -> dict:
        return {
            "representation": self.representation,
            "phi": _phi_json(self.phi if self.log_phi is None else self.log_phi),
            "residual": self.residual,
            "tol": self.tol,
            "normalization": self.normalization,
            "modulus": self.modulus,
        }


def _phi_json(phi):
    if hasattr(phi, "to_json"):
        return phi.to_json()
    return fl.to_json(phi)


@dataclass
class FourierObstruction:
    orbit_keys: list  # frequency keys of the violated F^T-orbit segment
    value: complex  # coefficient sum along the orbit

    def to_json(self) -> dict:
        return {"orbit": [list(k) for k in self.orbit_keys], "sum": [self.value.real, self.value.imag]}


@dataclass
class FourierSolution:
    certificate: CoboundaryCertificate | None
    witness: FourierObstruction | None
    orbit_sums: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.certificate is not None


def frequency_map(F, cover) -> np.ndarray:
    """Integer matrix ``K`` with ``key(F^T m) = K key(m)`` on the cover."""
    q1, q2 = cover
    q = (q1, q2)
    K = [[0, 0], [0, 0]]
    for i in range(2):
        for j in range(2):
            num = q[i] * F[j][i]
            if num % q[j]:
                raise LivsicError("automorphism does not preserve the cover lattice")
            K[i][j] = num // q[j]
    return np.array(K, dtype=np.int64)


class _EigenNorm:
    """``|a| + |b|`` for ``m = a v_u + b v_s``; convex along every orbit of ``K``."""

    def __init__(self, K):
        w, V = np.linalg.eig(K.astype(float))
        self.Vinv = np.linalg.inv(V.real)

    def __call__(self, k) -> float:
        c = self.Vinv @ np.asarray(k, dtype=float)
        return float(np.abs(c).sum())


def frequency_orbits(support, K) -> list[list[tuple]]:
    """Group keys into ``K``-orbit segments containing every support key.

    Along an orbit the eigen-norm is convex in the step index, so the keys with
    norm below the support maximum form one contiguous segment, found by walking
    both ways until the norm exceeds it.
    """
    Kinv = np.rint(np.linalg.inv(K)).astype(np.int64)
    norm = _EigenNorm(K)
    support = [k for k in support if k != (0, 0)]
    if not support:
        return []
    R = max(norm(k) for k in support) * (1 + 1e-9) + 1e-9
    seen: set = set()
    out = []
    for k in sorted(support):
        if k in seen:
            continue
        back = []
        m = np.array(k)
        while True:
            m = Kinv @ m
            if norm(m) > R:
                break
            back.append(tuple(int(v) for v in m))
        seg = back[::-1] + [k]
        m = np.array(k)
        while True:
            m = K @ m
            if norm(m) > R:
                break
            seg.append(tuple(int(v) for v in m))
        seen.update(seg)
        out.append(seg)
    return out


def validation_residual(alpha, phi, f: LatticeAutomorphism, n: int = 257, modulus: float | None = None) -> float:
    """Sup of ``|alpha - (phi o f - phi)|`` on a fresh offset grid."""
    x1, x2 = fl.expr.sample_grid(f.cover, n, offset=0.3183)
    y1, y2 = f.map_float(x1, x2)
    r = np.asarray(alpha.evaluate(x1, x2)) - (np.asarray(phi.evaluate(y1, y2)) - np.asarray(phi.evaluate(x1, x2)))
    if modulus is not None:
        r = reduce_mod(r, modulus)
    return float(np.max(np.abs(r)))


def solve_fourier(alpha: TrigPoly, f: LatticeAutomorphism, tol: float = 1e-10,
                  certify: bool = True, cert_tol: float = 1e-9) -> FourierSolution:
    """Exact-in-frequency solve of ``alpha = phi o f - phi``.

    In coefficients, ``phi_hat(K^{-1} m) - phi_hat(m) = alpha_hat(m)`` with
    ``K = F^T``.  Along an orbit ``m_j = K^j m_0`` this gives
    ``phi_hat(m_j) = -sum_{i <= j} alpha_hat(m_i)``, which has finite support
    iff each orbit sum vanishes.  The mean is the trivial-orbit obstruction.
    """
    if tuple(alpha.cover) != tuple(f.cover):
        raise LivsicError(f"field cover {alpha.cover} differs from base cover {f.cover}")
    scale = max(1.0, alpha.l1_norm())
    mean = alpha.coeffs.get((0, 0), 0)
    if abs(mean) > tol * scale:
        return FourierSolution(None, FourierObstruction([(0, 0)], complex(mean)), [((0, 0), complex(mean))])
    K = frequency_map(f.F, f.cover)
    phi: dict = {}
    sums = []
    worst = None
    for seg in frequency_orbits(alpha.coeffs, K):
        # phi_hat vanishes before the first support key and from the last one on
        last = max(i for i, k in enumerate(seg) if k in alpha.coeffs)
        acc = 0j
        for i, k in enumerate(seg):
            acc += alpha.coeffs.get(k, 0)
            if i < last:
                phi[k] = -acc
        sums.append((seg[0], acc))
        if abs(acc) > tol * scale and (worst is None or abs(acc) > abs(worst.value)):
            worst = FourierObstruction(seg, acc)
    if worst is not None:
        return FourierSolution(None, worst, sums)
    sol = TrigPoly(phi, f.cover, alpha.holder_exponent)
    res = validation_residual(alpha, sol, f) if certify else 0.0
    return FourierSolution(CoboundaryCertificate(sol, res, cert_tol, "trigpoly"), None, sums)


def project(field_, cover=(1, 1), n: int = 256, rel_cut: float = 1e-15) -> TrigPoly:
    """FFT projection of a smooth field onto a trig poly, dropping negligible modes."""
    g = GridField.sample(field_, (n * cover[0], n * cover[1]), cover)
    p = g.to_trigpoly()
    top = max((abs(c) for c in p.coeffs.values()), default=0.0)
    # relative cut, floored at unit scale so pure roundoff is not kept as signal
    return p.prune(rel_cut * max(top, 1.0))


def solve_spectral(alpha, f: LatticeAutomorphism, n: int = 256, tol: float = 1e-6,
                   orbit_tol: float = 1e-9) -> FourierSolution:
    """Solve for a smooth (non trig-poly) ``alpha`` via FFT projection.

    The projection is exact only up to aliasing and truncation, so the
    certificate residual on a fresh grid is the contract.
    """
    if isinstance(alpha, TrigPoly):
        return solve_fourier(alpha, f, cert_tol=tol)
    try:
        p = fl.to_trigpoly(alpha, f.cover)
    except (fl.NotRepresentableError, AttributeError):
        p = project(alpha, f.cover, n)
    sol = solve_fourier(p, f, tol=orbit_tol, certify=False)
    if not sol.success:
        return sol
    phi = sol.certificate.phi
    res = validation_residual(alpha, phi, f)
    return FourierSolution(CoboundaryCertificate(phi, res, tol, "trigpoly"), None, sol.orbit_sums)


def solve_grid(values: np.ndarray, f: LatticeAutomorphism, alpha=None, order: int = 5,
               orbit_tol: float = 1e-8, tol: float = 1e-6) -> FourierSolution:
    """Solve for data sampled on the grid ``x_i = q_i j / n_i`` of the cover.

    The FFT interpolant is solved exactly in frequency and the solution is
    sampled back on the same grid (keys fold exactly onto grid nodes), giving
    a spline :class:`GridField`.  ``alpha``, when given, is the off-grid
    function used for the certificate; otherwise the residual is measured at
    the grid nodes, which ``F`` permutes exactly.
    """
    values = np.asarray(values, dtype=float)
    g = GridField(values, f.cover, order)
    p = g.to_trigpoly()
    sol = solve_fourier(p, f, tol=orbit_tol, certify=False)
    if not sol.success:
        return sol
    phi = GridField(sol.certificate.phi.sample_grid(values.shape), f.cover, order)
    if alpha is not None:
        res = validation_residual(alpha, phi, f)
    else:
        x1, x2 = fl.grid_points(values.shape, f.cover)
        y1, y2 = f.map_float(x1, x2)
        n1, n2 = values.shape
        i = np.rint(y1 * n1 / f.cover[0]).astype(int) % n1
        j = np.rint(y2 * n2 / f.cover[1]).astype(int) % n2
        res = float(np.max(np.abs(values - (phi.values[i, j] - phi.values))))
    return FourierSolution(CoboundaryCertificate(phi, res, tol, "grid"), None, sol.orbit_sums)


def solve(alpha, f: LatticeAutomorphism, tol: float = 1e-6) -> FourierSolution:
    """Dispatch: exact Fourier solve for trig polys, spectral otherwise."""
    if isinstance(alpha, TrigPoly):
        return solve_fourier(alpha, f, cert_tol=tol)
    return solve_spectral(alpha, f, tol=tol)


class _Exp:
    def __init__(self, s, sign=1.0):
        self.s, self.sign = s, sign

    def evaluate(self, x1, x2):
        return self.sign * np.exp(self.s.evaluate(x1, x2))


def solve_multiplicative(k, f: LatticeAutomorphism, tol: float = 1e-6) -> FourierSolution:
    """Positive ``phi`` with ``k = phi o f / phi`` (``k > 0``), via ``log k``."""
    sign = _check_sign(k, f.cover)
    if sign < 0:
        raise LivsicError("k < 0 is never phi o f / phi for a positive phi")
    sol = solve(_LogAbs(k), f, tol)
    if not sol.success:
        return sol
    s = sol.certificate.phi
    phi = _Exp(s)
    x1, x2 = fl.expr.sample_grid(f.cover, 257, offset=0.3183)
    y1, y2 = f.map_float(x1, x2)
    kv = k.evaluate(x1, x2)
    res = float(np.max(np.abs(kv - phi.evaluate(y1, y2) / phi.evaluate(x1, x2)) / np.abs(kv)))
    cert = CoboundaryCertificate(phi, res, tol, "exp-" + sol.certificate.representation, "log mean-zero", log_phi=s)
    return FourierSolution(cert, None, sol.orbit_sums)


# orbit solver ----------------------------------------------------------------------------


def solve_orbit(alpha, f: LatticeAutomorphism, x0=ORBIT_BASE_POINT, iterations: int = 1_000_000,
                grid: int = 128, n_check: int = 4, tol: float = OBSTRUCTION_TOL,
                max_unvisited: float = 0.0) -> CoboundaryCertificate:
    """Realise ``phi`` along one dense orbit: ``phi(f^k x0) = alpha^+(x0, k)``.

    Each grid node takes the value of the first orbit point that lands in its
    cell (nearest-node rounding); unvisited nodes are filled from the nearest
    visited node.  The result is approximate and carries its residual.
    """
    rep = scan_additive(alpha, f, n_check, tol)
    if not rep.verdict:
        raise PreconditionError(f"periodic obstruction {rep.max_abs:.3g} at {rep.witness}")
    q1, q2 = f.cover
    n1, n2 = grid * q1, grid * q2
    values = np.full((n1, n2), np.nan)
    x = np.mod(np.asarray(x0, dtype=float), (q1, q2))
    total = 0.0
    done = 0
    block = 1 << 16
    while done < iterations:
        m = min(block, iterations - done)
        orb = f.float_orbit(x, m + 1)
        pts, x = orb[:-1], orb[-1]
        a = np.asarray(alpha.evaluate(pts[:, 0], pts[:, 1]), dtype=float)
        partial = total + np.concatenate([[0.0], np.cumsum(a[:-1])])
        total = partial[-1] + a[-1]
        i = np.rint(pts[:, 0] * grid).astype(np.int64) % n1
        j = np.rint(pts[:, 1] * grid).astype(np.int64) % n2
        flat = i * n2 + j
        uniq, first = np.unique(flat, return_index=True)
        fresh = np.isnan(values.ravel()[uniq])
        values.ravel()[uniq[fresh]] = partial[first[fresh]]
        done += m
    visited = ~np.isnan(values)
    frac = 1.0 - visited.mean()
    if frac > max_unvisited and frac > 0.05:
        raise PartialCoverageError(f"{frac:.1%} of grid nodes unvisited after {iterations} iterations")
    if not visited.all():
        from scipy import ndimage

        # periodic nearest fill: tile 3x3, fill, take the centre
        tiled = np.tile(values, (3, 3))
        idx = ndimage.distance_transform_edt(np.isnan(tiled), return_distances=False, return_indices=True)
        filled = tiled[tuple(idx)]
        values = filled[n1 : 2 * n1, n2 : 2 * n2]
    values = values - values.mean()
    phi = GridField(values, f.cover, order=1)
    res = validation_residual(alpha, phi, f)
    return CoboundaryCertificate(phi, res, res, "grid", "mean-zero")


# pair and circle solvers -------------------------------------------------------------------


@dataclass
class PairResult:
    verdict: str  # cohomologous | not-cohomologous | undetermined
    c: float | None
    certificate: CoboundaryCertificate | None
    witnesses: list  # (orbit, alpha^+, beta^+)
    max_deviation: float
    note: str = ""


class _Lin:
    """``a - c b`` for fields with ``evaluate``."""

    def __init__(self, a, b, c):
        self.a, self.b, self.c = a, b, c

    def evaluate(self, x1, x2):
        return np.asarray(self.a.evaluate(x1, x2)) - self.c * np.asarray(self.b.evaluate(x1, x2))


def _as_poly(e, cover):
    if isinstance(e, TrigPoly):
        return e
    try:
        return fl.to_trigpoly(e, cover)
    except (fl.NotRepresentableError, AttributeError, fl.FieldError):
        return None


def solve_pair_scalar(alpha, beta, f: LatticeAutomorphism, n_max: int = 6, tol: float = OBSTRUCTION_TOL,
                      solve_tol: float = 1e-6) -> PairResult:
    """Find ``c`` with ``alpha - c beta`` a coboundary, or witness orbits.

    ``c`` is read off the first orbit with usable ``beta^+``; the verdict needs
    ``|alpha^+ - c beta^+| <= tol`` on every scanned orbit.  On failure the
    witnesses are the orbits of extreme ratio ``alpha^+ / beta^+``, which no
    single ``c`` can reconcile.
    """
    table, a = periodic_sums(alpha, f, n_max)
    _, b = periodic_sums(beta, f, n_max)
    usable = np.abs(b) > 10 * tol
    if not usable.any():
        if np.max(np.abs(a)) <= tol:
            return PairResult("undetermined", None, None, [], 0.0, "beta^+ vanishes on every scanned orbit")
        i = int(np.argmax(np.abs(a)))
        return PairResult("not-cohomologous", None, None, [(table.orbit(i), float(a[i]), float(b[i]))],
                          float(abs(a[i])), "alpha^+ nonzero where beta^+ vanishes")
    i0 = int(np.argmax(usable))
    c = float(a[i0] / b[i0])
    dev = np.abs(a - c * b)
    worst = float(dev.max())
    if worst > tol:
        # extreme ratios among usable orbits; orbits with beta^+ ~ 0 but alpha^+ != 0 also qualify
        ratio = np.where(usable, a / np.where(usable, b, 1.0), np.nan)
        lo, hi = int(np.nanargmin(ratio)), int(np.nanargmax(ratio))
        bad_zero = (~usable) & (np.abs(a) > 10 * tol)
        pair = (lo, hi) if ratio[hi] - ratio[lo] > 0 else (i0, int(np.argmax(dev)))
        if bad_zero.any():
            pair = (i0, int(np.argmax(np.where(bad_zero, np.abs(a), -1))))
        wit = [(table.orbit(j), float(a[j]), float(b[j])) for j in pair]
        verdict = "not-cohomologous" if worst > 10 * tol else "undetermined"
        return PairResult(verdict, c, None, wit, worst)
    diff = _Lin(alpha, beta, c)
    pa, pb = _as_poly(alpha, f.cover), _as_poly(beta, f.cover)
    sol = solve_fourier(pa - c * pb, f, cert_tol=solve_tol) if pa is not None and pb is not None else solve_spectral(diff, f, tol=solve_tol)
    if not sol.success:
        return PairResult("undetermined", c, None, [], worst, "periodic data consistent but the solver found an obstruction "
                          f"{abs(sol.witness.value):.3g}")
    cert = sol.certificate
    if not cert.valid:
        return PairResult("undetermined", c, cert, [], worst, f"certificate residual {cert.residual:.3g} above {cert.tol:.3g}")
    return PairResult("cohomologous", c, cert, [], worst)


@dataclass
class AngleField:
    """Circle-valued field ``2 pi (l1 x1 / q1 + l2 x2 / q2) + periodic(x)`` modulo ``modulus``.

    ``winding`` counts full turns of the real lift along each coordinate loop of
    the cover (for a mod-pi field, turns of pi are counted as half-turns).
    """

    winding: tuple
    periodic: object
    cover: tuple = (1, 1)
    is_matrix = False

    def linear(self, x1, x2):
        q1, q2 = self.cover
        return 2 * np.pi * (self.winding[0] * np.asarray(x1) / q1 + self.winding[1] * np.asarray(x2) / q2)

    def evaluate(self, x1, x2):
        return self.linear(x1, x2) + np.asarray(self.periodic.evaluate(x1, x2))

    def to_json(self) -> dict:
        return {"node": "angle", "winding": list(self.winding), "cover": list(self.cover),
                "periodic": fl.to_json(self.periodic) if not isinstance(self.periodic, AngleField) else None}


def angle_field_from_grid(theta: np.ndarray, cover=(1, 1), order: int = 5) -> AngleField:
    """Split sampled angles into winding and a periodic spline field.

    ``theta`` is a real lift known only modulo ``2 pi`` per sample; the lift is
    unwrapped along each axis (rows first) and the total change along each
    coordinate loop gives the winding.
    """
    n1, n2 = theta.shape
    th = np.unwrap(theta, axis=0)
    th = np.unwrap(th, axis=1)
    # unwrapping axis 1 per row may introduce a jump between rows; recentre on column 0
    th = th - (th[:, :1] - np.unwrap(theta[:, 0])[:, None])
    w1 = (th[-1, 0] + (np.angle(np.exp(1j * (theta[0, 0] - theta[-1, 0])))) - th[0, 0]) / (2 * np.pi)
    w2 = (th[0, -1] + (np.angle(np.exp(1j * (theta[0, 0] - theta[0, -1])))) - th[0, 0]) / (2 * np.pi)
    l1, l2 = int(round(w1)), int(round(w2))
    q1, q2 = cover
    g1 = q1 * np.arange(n1) / n1
    g2 = q2 * np.arange(n2) / n2
    x1, x2 = np.meshgrid(g1, g2, indexing="ij")
    per = th - 2 * np.pi * (l1 * x1 / q1 + l2 * x2 / q2)
    per = per - 2 * np.pi * np.round(per[0, 0] / (2 * np.pi))
    return AngleField((l1, l2), GridField(per, cover, order), cover)


@dataclass
class CircleSolution:
    success: bool
    s: AngleField | None
    residual: float
    sigma: tuple | None  # linear part of s in units of the modulus
    obstruction: float  # worst periodic obstruction mod the circle
    witness: PeriodicOrbit | None
    note: str = ""


def solve_circle(delta, f: LatticeAutomorphism, n_max: int = 6, modulus: float = 2 * math.pi,
                 tol: float = OBSTRUCTION_TOL, solve_tol: float = 1e-6) -> CircleSolution:
    """Solve ``delta = s o f - s`` with ``s`` valued in ``R / modulus Z``.

    ``delta`` is a real lift, either a plain periodic field (zero winding) or an
    :class:`AngleField`.  A winding ``l`` forces ``s`` to have linear part
    ``modulus * sigma . x`` with ``(F^T - I) sigma = (2 pi / modulus) l``; the
    equation is solvable only when ``sigma`` is integral.  The periodic
    remainder is then solved in the reals after removing a multiple of the
    modulus from its mean.
    """
    rep = scan_circle(delta, f, n_max, modulus, tol)
    wit = rep.witness if not rep.verdict else None
    if not rep.verdict:
        return CircleSolution(False, None, np.inf, None, rep.max_abs, wit, "periodic obstruction")
    q1, q2 = f.cover
    if isinstance(delta, AngleField):
        winding, per = delta.winding, delta.periodic
    else:
        winding, per = (0, 0), delta
    # work in cover units: y = (x1/q1, x2/q2) on the unit torus; the map there is K^T
    K = frequency_map(f.F, f.cover)  # integer, acts on keys like F^T acts on frequencies
    rhs = (2 * math.pi / modulus) * np.array(winding, dtype=float)
    sigma = np.linalg.solve(K - np.eye(2), rhs)
    if np.max(np.abs(sigma - np.round(sigma))) > 1e-9:
        return CircleSolution(False, None, np.inf, tuple(sigma), 0.0, None,
                              "winding not matched by any continuous circle-valued s")
    sigma = tuple(int(v) for v in np.round(sigma))

    mean = float(np.mean(per.evaluate(*fl.expr.sample_grid(f.cover, 64, 0.5))))
    shift = modulus * round(mean / modulus)
    rest = _Lin(per, fl.Const(1.0), shift)
    p = _as_poly(per, f.cover)
    sol = solve_fourier(p - shift, f, cert_tol=solve_tol) if p is not None else solve_spectral(rest, f, tol=solve_tol)
    if not sol.success:
        return CircleSolution(False, None, np.inf, sigma, 0.0, None,
                              f"periodic part not a coboundary (orbit sum {abs(sol.witness.value):.3g})")
    s0 = sol.certificate.phi
    lin = (sigma[0] * modulus / (2 * math.pi), sigma[1] * modulus / (2 * math.pi))
    s = AngleField(lin, s0, f.cover)
    res = validation_residual(delta, s, f, modulus=modulus)
    return CircleSolution(res <= solve_tol, s, res, sigma, rep.max_abs, None,
                          "" if res <= solve_tol else "certificate residual too large")


# orbit-gap diagnostic --------------------------------------------------------------------


@dataclass
class GapReport:
    gap: float
    eps: float
    sigma: float
    gamma: float  # fitted constant gap / eps^sigma


def close_orbit_gap(alpha, f: LatticeAutomorphism, x, y, n: int, sigma: float | None = None) -> GapReport:
    """Compare ``alpha^+(x, n)`` and ``alpha^+(y, n)`` for orbits that stay close."""
    sigma = float(getattr(alpha, "holder_exponent", 1.0) if sigma is None else sigma)
    M = np.array(f.F, dtype=float)
    xs, ys = [np.asarray(x, dtype=float)], [np.asarray(y, dtype=float)]
    q = np.array(f.cover, dtype=float)
    for _ in range(n - 1):
        xs.append(np.mod(M @ xs[-1], q))
        ys.append(np.mod(M @ ys[-1], q))
    X, Y = np.array(xs), np.array(ys)
    eps = float(np.max(torus_distance(X, Y, f.cover)))
    if eps > 0.25:
        raise LivsicError(f"orbits separate to distance {eps:.3g} > 0.25")
    ax = float(np.sum(alpha.evaluate(X[:, 0], X[:, 1])))
    ay = float(np.sum(alpha.evaluate(Y[:, 0], Y[:, 1])))
    gap = abs(ax - ay)
    gamma = gap / eps**sigma if eps > 0 else 0.0
    return GapReport(gap, eps, sigma, gamma)
