"""Matrix cocycles over toral automorphisms: products, periodic data, coarse types."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import fields as fl
from .torus import LatticeAutomorphism, PeriodicOrbit, RationalPoint, orbit_table

DEFAULT_PRODUCT_CAP = 60
JORDAN_TYPES = ("scalar", "parabolic", "real-split", "elliptic")


class CocycleError(ValueError):
    pass


class ProductCapError(CocycleError):
    pass


class NotConjugateError(CocycleError):
    pass


@dataclass(frozen=True)
class Tolerances:
    disc_rel: float = 1e-9  # tol_disc = disc_rel * max(tr^2, 4|det|)
    nil: float = 1e-6  # on ||P/s - I||
    data: float = 1e-8  # tr/det agreement and one-exponent gap


DEFAULT_TOLS = Tolerances()


def _points(x) -> np.ndarray:
    if isinstance(x, RationalPoint):
        return np.array(x.to_float())
    return np.asarray(x, dtype=float)


@dataclass(eq=False)
class Cocycle:
    """Generator ``A(x)`` over the automorphism ``base``; ``A(x, n)`` its products."""

    base: LatticeAutomorphism
    generator: object
    name: str = ""
    product_cap: int = DEFAULT_PRODUCT_CAP
    check: bool = True
    orientation: int = field(default=1, init=False)
    _scans: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.check:
            fl.check_periodic(self.generator, self.base.cover)
            self.orientation = fl.orientation_sign(self.generator, self.base.cover)
            if self.orientation != 1:
                raise CocycleError("generator reverses orientation; only det > 0 cocycles are supported")

    @classmethod
    def from_text(cls, F, text: str, cover=(1, 1), name: str = "", **kw):
        base = LatticeAutomorphism(F, tuple(cover))
        return cls(base, fl.parse(text, cover=cover, F=base.F), name or text, **kw)

    @property
    def cover(self):
        return self.base.cover

    def lift(self, cover) -> "Cocycle":
        """Same generator over the lift of the base to a finite cover."""
        return Cocycle(self.base.lift(cover), self.generator, self.name, self.product_cap, self.check)

    def __call__(self, x) -> np.ndarray:
        p = _points(x)
        return self.generator.evaluate(p[..., 0], p[..., 1])

    def evaluate_orbit(self, pts: np.ndarray) -> np.ndarray:
        return self.generator.evaluate(pts[..., 0], pts[..., 1])

    def product(self, x, n: int) -> np.ndarray:
        """``A(x, n) = A(f^{n-1} x) ... A(x)``; ``A(x, -n) = A(f^{-n} x, n)^{-1}``.

        ``x`` may carry leading axes.  Base points are snapped to the dyadic grid
        of :meth:`LatticeAutomorphism.float_orbit`, so orbits are exact.
        """
        n = int(n)
        if abs(n) > self.product_cap:
            raise ProductCapError(f"|n| = {abs(n)} exceeds the product cap {self.product_cap}")
        p = _points(x)
        eye = np.broadcast_to(np.eye(2), p.shape[:-1] + (2, 2)).copy()
        if n == 0:
            return eye
        if n > 0:
            mats = self.evaluate_orbit(self.base.float_orbit(p, n))
            out = mats[0]
            for M in mats[1:]:
                out = M @ out
            return out
        back = self.base.float_orbit(p, n - 1)  # x, f^-1 x, ..., f^n x
        mats = self.evaluate_orbit(back[1:])  # A(f^-1 x), ..., A(f^n x)
        out = mats[-1]
        for M in mats[-2::-1]:
            out = M @ out
        return np.linalg.inv(out)

    # periodic data -------------------------------------------------------------------

    def periodic_scan(self, n_max: int) -> "PeriodicScan":
        if n_max > self.product_cap:
            raise ProductCapError(f"n_max = {n_max} exceeds the product cap {self.product_cap}")
        if n_max not in self._scans:
            self._scans[n_max] = PeriodicScan.compute(self, n_max)
        return self._scans[n_max]


def orbit_products(A, pts: np.ndarray, period: int) -> np.ndarray:
    """Products ``A(p, n)`` for orbits laid out as ``pts`` of shape ``(m, n, 2)``."""
    mats = A.evaluate_orbit(pts)  # (m, n, 2, 2)
    out = mats[:, 0]
    for i in range(1, period):
        out = mats[:, i] @ out
    return out


# Jordan classification -------------------------------------------------------------


def jordan_types(P: np.ndarray, tols: Tolerances = DEFAULT_TOLS):
    """Vectorised Jordan type codes (index into ``JORDAN_TYPES``) and margins.

    The margin is the distance of the deciding statistic from its threshold,
    relative to the threshold; larger is more certain.
    """
    P = np.asarray(P, dtype=float)
    tr = P[..., 0, 0] + P[..., 1, 1]
    det = P[..., 0, 0] * P[..., 1, 1] - P[..., 0, 1] * P[..., 1, 0]
    disc = tr * tr - 4 * det
    tol_disc = tols.disc_rel * np.maximum(tr * tr, 4 * np.abs(det))
    s = tr / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        N = P / s[..., None, None] - np.eye(2)
    nil = np.sqrt((N * N).sum(axis=(-1, -2)))
    code = np.where(disc < -tol_disc, 3, np.where(disc > tol_disc, 2, np.where(nil > tols.nil, 1, 0)))
    with np.errstate(divide="ignore", invalid="ignore"):
        m_disc = np.abs(np.abs(disc) - tol_disc) / tol_disc
        m_nil = np.abs(nil - tols.nil) / tols.nil
    margin = np.where(code >= 2, m_disc, np.minimum(m_disc, m_nil))
    return code, margin, tr, det, disc


def eigenvalues(P: np.ndarray) -> tuple[complex, complex]:
    """Eigenvalue pair ordered by decreasing modulus."""
    tr = P[0, 0] + P[1, 1]
    det = P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0]
    r = np.sqrt(complex(tr * tr - 4 * det))
    # stable quadratic formula
    big = (tr + r) / 2 if abs(tr + r) >= abs(tr - r) else (tr - r) / 2
    small = det / big if big != 0 else (tr - r) / 2
    if abs(small) > abs(big):
        big, small = small, big
    return complex(big), complex(small)


def modulus_gap(P: np.ndarray, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """``| |l| - |m| | / max(|l|, |m|)`` for eigenvalues ``l, m``.

    Complex pairs have gap 0.  When the discriminant is within ``tol_disc`` of
    zero the eigenvalues coincide to working precision and the gap is reported
    as 0 rather than the square root of rounding noise.
    """
    code, _, tr, det, disc = jordan_types(P, tols)
    r = np.sqrt(np.maximum(disc, 0.0))
    big = (np.abs(tr) + r) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.abs(det) / big
        gap = np.where(big > 0, (big - small) / big, 0.0)
    return np.where(code == 2, gap, 0.0)


@dataclass
class PeriodicDatum:
    orbit: PeriodicOrbit
    product: np.ndarray
    tr: float
    det: float
    eigenvalues: tuple
    jordan_type: str
    lyapunov: tuple
    margin: float

    @property
    def period(self) -> int:
        return self.orbit.period


def classify_matrix(P: np.ndarray, tols: Tolerances = DEFAULT_TOLS) -> tuple[str, float]:
    code, margin, *_ = jordan_types(np.asarray(P)[None], tols)
    return JORDAN_TYPES[int(code[0])], float(margin[0])


def periodic_datum(A: Cocycle, orbit: PeriodicOrbit, tols: Tolerances = DEFAULT_TOLS) -> PeriodicDatum:
    pts = orbit.to_float()[None]
    P = orbit_products(A, pts, orbit.period)[0]
    return _datum(orbit, P, tols)


def _datum(orbit, P, tols):
    jt, margin = classify_matrix(P, tols)
    lam, mu = eigenvalues(P)
    n = orbit.period
    with np.errstate(divide="ignore"):
        lyap = (float(np.log(abs(lam)) / n), float(np.log(abs(mu)) / n))
    det = float(P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0])
    return PeriodicDatum(orbit, P, float(P[0, 0] + P[1, 1]), det, (lam, mu), jt, lyap, margin)


@dataclass
class PeriodicScan:
    """All periodic products of a cocycle up to least period ``n_max``."""

    cocycle: Cocycle
    n_max: int
    table: object
    products: np.ndarray  # (num_orbits, 2, 2), orbit order of ``table``

    @classmethod
    def compute(cls, A: Cocycle, n_max: int) -> "PeriodicScan":
        table = orbit_table(A.base, n_max)
        prods = np.empty((len(table), 2, 2))
        for n in range(1, n_max + 1):
            idx = np.nonzero(table.periods == n)[0]
            if not len(idx):
                continue
            lo, hi = table.offsets[idx[0]], table.offsets[idx[-1] + 1]
            pts = table.points[lo:hi].reshape(len(idx), n, 2)
            # chunk to bound memory on large tables
            for s in range(0, len(idx), 1 << 16):
                prods[idx[s : s + (1 << 16)]] = orbit_products(A, pts[s : s + (1 << 16)], n)
        return cls(A, n_max, table, prods)

    def __len__(self):
        return len(self.products)

    def datum(self, i: int, tols: Tolerances = DEFAULT_TOLS) -> PeriodicDatum:
        return _datum(self.table.orbit(i), self.products[i], tols)

    def types(self, tols: Tolerances = DEFAULT_TOLS):
        return jordan_types(self.products, tols)

    def to_csv(self, tols: Tolerances = DEFAULT_TOLS, limit: int | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["period", "point", "tr", "det", "jordan_type", "lambda_p", "mu_p"])
        for i in range(len(self) if limit is None else min(limit, len(self))):
            d = self.datum(i, tols)
            b = d.orbit.base
            w.writerow([d.period, f"{b.a}/{b.d} {b.b}/{b.d}", repr(d.tr), repr(d.det), d.jordan_type,
                        repr(d.lyapunov[0]), repr(d.lyapunov[1])])
        return buf.getvalue()


# periodic-data conditions ----------------------------------------------------------------


@dataclass
class ConditionReport:
    condition: str
    n_max: int
    worst: float
    witness: PeriodicOrbit | None
    verdict: bool
    tol: float
    failures: list = field(default_factory=list)
    orbits_checked: int = 0

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "n_max": self.n_max,
            "worst": self.worst,
            "witness": None if self.witness is None else _orbit_json(self.witness),
            "verdict": self.verdict,
            "tol": self.tol,
            "orbits_checked": self.orbits_checked,
            "failures": self.failures[:100],
        }


def _orbit_json(o: PeriodicOrbit) -> dict:
    b = o.base
    return {"period": o.period, "point": [f"{b.a}/{b.d}", f"{b.b}/{b.d}"]}


def check_one_exponent(A: Cocycle, n_max: int = 6, tol: float = 1e-8, tols: Tolerances = DEFAULT_TOLS) -> ConditionReport:
    """Worst relative gap between eigenvalue moduli over periodic orbits."""
    scan = A.periodic_scan(n_max)
    gaps = modulus_gap(scan.products, tols)
    if not len(gaps):
        return ConditionReport("one-exponent", n_max, 0.0, None, True, tol)
    i = int(np.argmax(gaps))
    worst = float(gaps[i])
    return ConditionReport("one-exponent", n_max, worst, scan.table.orbit(i), worst <= tol, tol,
                           orbits_checked=len(gaps))


def check_conjugate_periodic_data(A: Cocycle, B: Cocycle, n_max: int = 6, tol: float = 1e-8,
                                  tols: Tolerances = DEFAULT_TOLS) -> ConditionReport:
    """Orbitwise test that ``A(p, n)`` and ``B(p, n)`` are conjugate in GL(2, R)."""
    if A.base.F != B.base.F or A.cover != B.cover:
        raise CocycleError("cocycles must share the base automorphism")
    sa, sb = A.periodic_scan(n_max), B.periodic_scan(n_max)
    ca, _, tra, deta, _ = sa.types(tols)
    cb, _, trb, detb, _ = sb.types(tols)
    dtr = np.abs(tra - trb) / np.maximum(1.0, np.maximum(np.abs(tra), np.abs(trb)))
    ddet = np.abs(deta - detb) / np.maximum(1.0, np.maximum(np.abs(deta), np.abs(detb)))
    dev = np.maximum(dtr, ddet)
    bad = (dev > tol) | (ca != cb)
    failures = []
    for i in np.nonzero(bad)[0][:1000]:
        o = sa.table.orbit(int(i))
        failures.append({**_orbit_json(o), "tr": [float(tra[i]), float(trb[i])], "det": [float(deta[i]), float(detb[i])],
                         "types": [JORDAN_TYPES[ca[i]], JORDAN_TYPES[cb[i]]]})
    score = np.where(ca != cb, np.inf, dev)
    i = int(np.argmax(score)) if len(score) else 0
    worst = float(score[i]) if len(score) else 0.0
    witness = sa.table.orbit(i) if len(score) and bad.any() else None
    return ConditionReport("conjugate-periodic-data", n_max, worst, witness, not bad.any(), tol, failures, len(score))


# conjugators ---------------------------------------------------------------------------


def _canonical_frame(P: np.ndarray, jt: str) -> np.ndarray:
    """``M`` with ``M^{-1} P M`` in canonical form for its Jordan type.

    scalar: identity.  real-split: unit eigenvectors for the larger then the
    smaller eigenvalue, first nonzero entry positive.  parabolic: ``[u, N^+ (s u)]``
    with ``N = P - sI`` and ``u`` the unit kernel vector of ``N``, giving
    ``[[s, s], [0, s]]``.  elliptic: ``[Re v, -Im v]`` for the eigenvector
    ``v = (P - conj(l) I) e_1`` of ``l`` with positive imaginary part, giving
    ``r R(theta)``.
    """
    P = np.asarray(P, dtype=float)
    if jt == "scalar":
        return np.eye(2)
    if jt == "real-split":
        lam, mu = sorted(np.real(eigenvalues(P)), reverse=True)
        cols = []
        for ev in (lam, mu):
            K = P - ev * np.eye(2)
            # kernel vector from the larger row of K
            row = K[0] if np.abs(K[0]).sum() >= np.abs(K[1]).sum() else K[1]
            v = np.array([-row[1], row[0]])
            v /= np.linalg.norm(v)
            if v[np.argmax(np.abs(v) > 1e-300)] < 0:
                v = -v
            cols.append(v)
        return np.stack(cols, axis=1)
    if jt == "parabolic":
        s = (P[0, 0] + P[1, 1]) / 2
        N = P - s * np.eye(2)
        # kernel of N equals its range; take the dominant column as u
        col = N[:, 0] if np.linalg.norm(N[:, 0]) >= np.linalg.norm(N[:, 1]) else N[:, 1]
        u = col / np.linalg.norm(col)
        w = np.linalg.pinv(N) @ (s * u)
        return np.stack([u, w], axis=1)
    if jt == "elliptic":
        lam = eigenvalues(P)[0]
        if lam.imag < 0:
            lam = lam.conjugate()
        v = (P - lam.conjugate() * np.eye(2)) @ np.array([1.0, 0.0])
        return np.stack([v.real, -v.imag], axis=1)
    raise ValueError(jt)


@dataclass
class Conjugator:
    C: np.ndarray
    condition_number: float
    jordan_type: str


def conjugator(P, Q, tol: float = 1e-8, tols: Tolerances = DEFAULT_TOLS) -> Conjugator:
    """Canonical ``C`` with ``P = C Q C^{-1}`` and ``|det C| = 1``."""
    P, Q = np.asarray(P, dtype=float), np.asarray(Q, dtype=float)
    jp, _ = classify_matrix(P, tols)
    jq, _ = classify_matrix(Q, tols)
    trp, trq = np.trace(P), np.trace(Q)
    dp, dq = np.linalg.det(P), np.linalg.det(Q)
    scale = max(1.0, abs(trp), abs(trq), abs(dp), abs(dq))
    if jp != jq or abs(trp - trq) > tol * scale or abs(dp - dq) > tol * scale:
        raise NotConjugateError(f"{jp} (tr {trp:.6g}, det {dp:.6g}) vs {jq} (tr {trq:.6g}, det {dq:.6g})")
    C = _canonical_frame(P, jp) @ np.linalg.inv(_canonical_frame(Q, jq))
    C = C / np.sqrt(abs(np.linalg.det(C)))
    sv = np.linalg.svd(C, compute_uv=False)
    return Conjugator(C, float(sv[0] / sv[-1]), jp)


# coarse classification ---------------------------------------------------------------


@dataclass
class PeriodicClassification:
    kind: str  # ScalarLike | Parabolic | Elliptic | Violation
    counts: dict
    witnesses: dict  # jordan type -> first orbit of that type
    min_margin: float


def classify_periodic(A: Cocycle, n_max: int = 6, tols: Tolerances = DEFAULT_TOLS) -> PeriodicClassification:
    scan = A.periodic_scan(n_max)
    code, margin, *_ = scan.types(tols)
    counts = {t: int(np.sum(code == i)) for i, t in enumerate(JORDAN_TYPES)}
    witnesses = {}
    for i, t in enumerate(JORDAN_TYPES):
        hit = np.nonzero(code == i)[0]
        if len(hit):
            witnesses[t] = scan.table.orbit(int(hit[0]))
    ell, par, split = counts["elliptic"], counts["parabolic"], counts["real-split"]
    if split or (ell and par):
        kind = "Violation"
    elif ell:
        kind = "Elliptic"
    elif par:
        kind = "Parabolic"
    else:
        kind = "ScalarLike"
    return PeriodicClassification(kind, counts, witnesses, float(margin.min()) if len(margin) else np.inf)
