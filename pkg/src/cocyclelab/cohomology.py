"""Reductions to model cocycles, model-vs-model cohomology tests, centralizers.

Conventions.  A reduction returns a model ``A'`` and a conjugacy ``C`` with
``A(x) = C(f x) A'(x) C(x)^{-1}``.  A tester for models ``A', B'`` returns a
certificate ``C`` with ``A'(x) = C(f x) B'(x) C(x)^{-1}``.  Verdicts are
three-valued and "not-cohomologous" is only issued with a periodic-orbit
witness whose obstruction exceeds ten times the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fields as fl
from . import livsic as lv
from . import structures as st
from .cocycle import (
    Cocycle,
    NotConjugateError,
    Tolerances,
    DEFAULT_TOLS,
    classify_periodic,
    conjugator,
)
from .fields import GridField
from .torus import CoverError, orbit_table, torus_distance

OBSTRUCTION_TOL = lv.OBSTRUCTION_TOL


class ReductionError(ValueError):
    pass


# fields ------------------------------------------------------------------------------------


class PointwiseField:
    """Scalar field given by a vectorised callable."""

    is_matrix = False

    def __init__(self, fn, label: str = "pointwise"):
        self.fn, self.label = fn, label

    def evaluate(self, x1, x2):
        return np.asarray(self.fn(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)), dtype=float)

    def __call__(self, x1, x2):
        return self.evaluate(x1, x2)

    def __repr__(self):
        return f"<{self.label}>"


def as_field(v):
    if hasattr(v, "evaluate"):
        return v
    if callable(v):
        return PointwiseField(v)
    return fl.as_expr(float(v))


def _ev(fld, x1, x2):
    return np.broadcast_to(np.asarray(fld.evaluate(x1, x2), dtype=float), np.broadcast(x1, x2).shape)


def _ratio(a, b, label="ratio"):
    return PointwiseField(lambda x1, x2: _ev(a, x1, x2) / _ev(b, x1, x2), label)


def _field_json(v):
    if hasattr(v, "to_json"):
        return v.to_json()
    try:
        return fl.to_json(v)
    except fl.FieldError:
        return {"node": "opaque", "label": repr(v)}


# models ------------------------------------------------------------------------------------


@dataclass(eq=False)
class Model:
    """Model cocycle generator.

    ``kind`` is ``triangular`` (``k [[1, a], [0, 1]]``), ``scalar`` (``k Id``),
    ``conformal`` (``k R(a)``) or ``diagonal`` (``diag(k, a)``).  ``primed`` marks
    the I'/II' situation where the conjugacy only exists on ``conj_cover``.
    """

    kind: str
    k: object
    alpha: object = None
    cover: tuple = (1, 1)
    primed: bool = False
    conj_cover: tuple | None = None
    witness: object = None  # obstruction report showing the model is not degenerate
    is_matrix = True

    def __post_init__(self):
        if self.kind not in ("triangular", "scalar", "conformal", "diagonal"):
            raise ValueError(self.kind)
        self.k = as_field(self.k)
        if self.alpha is not None:
            self.alpha = as_field(self.alpha)

    def evaluate(self, x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        k = _ev(self.k, x1, x2)
        out = np.zeros(x1.shape + (2, 2))
        if self.kind == "scalar":
            out[..., 0, 0] = out[..., 1, 1] = k
            return out
        a = _ev(self.alpha, x1, x2)
        if self.kind == "triangular":
            out[..., 0, 0] = out[..., 1, 1] = k
            out[..., 0, 1] = k * a
        elif self.kind == "conformal":
            c, s = np.cos(a), np.sin(a)
            out[..., 0, 0] = out[..., 1, 1] = k * c
            out[..., 0, 1] = -k * s
            out[..., 1, 0] = k * s
        else:
            out[..., 0, 0] = k
            out[..., 1, 1] = a
        return out

    def __call__(self, x1, x2):
        return self.evaluate(x1, x2)

    def children(self):
        return ()

    @property
    def holder_exponent(self) -> float:
        return 1.0

    def cocycle(self, base) -> Cocycle:
        return Cocycle(base, fl.MatrixFunction(self.evaluate, f"{self.kind} model"), f"{self.kind} model", check=False)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "k": _field_json(self.k),
            "alpha": None if self.alpha is None else _field_json(self.alpha),
            "cover": list(self.cover),
            "primed": self.primed,
            "conj_cover": None if self.conj_cover is None else list(self.conj_cover),
        }


def triangular(k, alpha, cover=(1, 1)) -> Model:
    return Model("triangular", k, alpha, cover)


def scalar(k, cover=(1, 1)) -> Model:
    return Model("scalar", k, None, cover)


def conformal(k, alpha, cover=(1, 1)) -> Model:
    return Model("conformal", k, alpha, cover)


def diagonal(a1, a2, cover=(1, 1)) -> Model:
    return Model("diagonal", a1, a2, cover)


# reductions --------------------------------------------------------------------------------


@dataclass(eq=False)
class MatrixGrid:
    """Matrix field from callables; used for conjugacies built out of grid fields."""

    fn: object
    label: str = "conjugacy"

    def evaluate(self, x1, x2):
        return self.fn(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))

    def __call__(self, x1, x2):
        return self.evaluate(x1, x2)


@dataclass(eq=False)
class ReductionResult:
    cocycle: Cocycle
    model: Model
    C: MatrixGrid  # A(x) = C(f x) A'(x) C(x)^{-1}
    residual: float
    cover: tuple
    dev: float = 0.0  # conformal reductions: distance of A' from conformal
    deck_signs: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "model": self.model.to_json(),
            "residual": self.residual,
            "cover": list(self.cover),
            "dev": self.dev,
            "deck_signs": {f"{k[0]},{k[1]}": v for k, v in self.deck_signs.items()},
            "notes": self.notes,
        }


def conjugacy_residual(A, model, C, f, pts=None) -> float:
    """Sup of ``||A(x) - C(f x) A'(x) C(x)^{-1}||`` on a fresh grid."""
    if pts is None:
        pts = st.validation_points(f.cover)
    x1, x2 = pts[:, 0], pts[:, 1]
    y1, y2 = f.map_float(x1, x2)
    lhs = A.evaluate(x1, x2) if hasattr(A, "evaluate") else A(pts)
    rhs = C.evaluate(y1, y2) @ model.evaluate(x1, x2) @ st.inv2(C.evaluate(x1, x2))
    return float(np.max(np.linalg.norm(lhs - rhs, axis=(-2, -1))))


def _unwrap2d(theta, period):
    """Continuous real lift of grid angles known modulo ``period``."""
    col = np.unwrap(theta[:, 0], period=period)
    th = np.unwrap(theta, period=period, axis=1)
    return th - th[:, :1] + col[:, None]


def oriented_frame(L: st.LineField) -> GridField:
    """Unit vector field spanning ``L``; needs trivial holonomy."""
    if L.holonomy() != (1, 1):
        raise ReductionError(f"line field has holonomy {L.holonomy()}; lift to a cover first")
    th = _unwrap2d(L.theta, math.pi)
    return GridField(np.stack([np.cos(th), np.sin(th)], -1), L.cover, L.order)


def _unit(U, x1, x2):
    v = U.evaluate(x1, x2)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _perp(v):
    return np.stack([-v[..., 1], v[..., 0]], -1)


def _dot(u, v):
    return np.sum(u * v, axis=-1)


def _grid_xy(shape, N):
    n1, n2 = shape
    return np.meshgrid(np.arange(n1) / N, np.arange(n2) / N, indexing="ij")


def _deck_signs(C: MatrixGrid, cover, base_cover=(1, 1)) -> dict:
    """Sign relating ``C(x + e)`` and ``C(x)`` for deck translations of the cover."""
    out = {}
    rng = np.random.default_rng(7)
    x = rng.random((64, 2)) * np.array(cover)
    for i, q in enumerate(cover):
        if q == 1:
            continue
        e = np.zeros(2)
        e[i] = base_cover[i] if base_cover else 1
        a = C.evaluate(x[:, 0], x[:, 1])
        b = C.evaluate(x[:, 0] + e[0], x[:, 1] + e[1])
        if np.allclose(b, a, atol=1e-6):
            out[tuple(int(v) for v in e)] = 1
        elif np.allclose(b, -a, atol=1e-6):
            out[tuple(int(v) for v in e)] = -1
        else:
            out[tuple(int(v) for v in e)] = 0
    return out


def reduce_triangular(A: Cocycle, L: st.LineField, n_max: int = 6, tol: float = OBSTRUCTION_TOL,
                      solve_tol: float = 1e-6) -> ReductionResult:
    """Conjugate ``A`` to ``k [[1, a], [0, 1]]`` using the invariant line ``L``.

    In the orthonormal frame ``{v1, v1^perp}`` the cocycle is ``a [[1, b/a], [0, g]]``
    up to the residual of ``L``; ``g = phi o f / phi`` is solved
    multiplicatively and the second coordinate rescaled by ``1 / phi``.
    """
    if tuple(L.cover) != tuple(A.cover):
        raise ReductionError(f"line field cover {L.cover} differs from cocycle cover {A.cover}")
    f = A.base
    U = oriented_frame(L)
    X1, X2 = _grid_xy(L.theta.shape, L.N)
    FX1, FX2 = f.map_float(X1, X2)
    v = U.values
    n1, n2 = v.shape[:2]
    idx = (np.rint(FX1 * L.N).astype(int) % n1, np.rint(FX2 * L.N).astype(int) % n2)
    Ag = A.evaluate_orbit(np.stack([X1, X2], -1))
    v1, v2 = v, _perp(v)
    w1, w2 = v[idx], _perp(v[idx])
    Av1 = (Ag @ v1[..., None])[..., 0]
    Av2 = (Ag @ v2[..., None])[..., 0]
    a, b, d, e = _dot(w1, Av1), _dot(w1, Av2), _dot(w2, Av2), _dot(w2, Av1)
    if np.any(np.abs(a) < 1e-12) or np.any(a * d <= 0):
        raise ReductionError("frame coefficients vanish or change sign")

    def coeffs(x1, x2):
        y1, y2 = f.map_float(x1, x2)
        u, w = _unit(U, x1, x2), _unit(U, y1, y2)
        M = A.evaluate_orbit(np.stack([x1, x2], -1))
        Au = (M @ u[..., None])[..., 0]
        Ap = (M @ _perp(u)[..., None])[..., 0]
        return _dot(w, Au), _dot(w, Ap), _dot(_perp(w), Ap)

    g_fn = PointwiseField(lambda x1, x2: (lambda c: c[2] / c[0])(coeffs(x1, x2)), "g")
    rep = lv.scan_multiplicative(g_fn, f, n_max, tol)
    if rep.max_abs > 10 * tol:
        raise ReductionError(f"diagonal ratio obstruction {rep.max_abs:.3g} at {rep.witness}: "
                             "the cocycle is not one-exponent along this line")
    sol = lv.solve_grid(np.log(d / a), f, order=L.order)
    if not sol.success:
        raise ReductionError(f"diagonal ratio not a coboundary (orbit sum {abs(sol.witness.value):.3g})")
    logphi = sol.certificate.phi
    phi = np.exp(logphi.values)
    k = GridField(a, A.cover, L.order)
    alpha = GridField(b / a * phi, A.cover, L.order)
    phi_f = GridField(phi, A.cover, L.order)
    model = Model("triangular", k, alpha, A.cover)

    def C_fn(x1, x2):
        u = _unit(U, x1, x2)
        p = _ev(phi_f, x1, x2)
        return np.stack([u, p[..., None] * _perp(u)], -1)

    C = MatrixGrid(C_fn, "frame [v1, phi v1^perp]")
    res = conjugacy_residual(A, model, C, f)
    notes = [f"frame lower-left max {np.max(np.abs(e)):.3g}", f"log phi residual {sol.certificate.residual:.3g}"]
    model.witness = lv.scan_additive(alpha, f, n_max, tol)
    return ReductionResult(A, model, C, res, A.cover, 0.0, _deck_signs(C, A.cover), notes)


def conformal_part(M):
    """``(k, alpha)`` of the nearest ``k R(alpha)`` and the relative deviation."""
    p = 0.5 * (M[..., 0, 0] + M[..., 1, 1])
    q = 0.5 * (M[..., 1, 0] - M[..., 0, 1])
    k = np.hypot(p, q)
    alpha = np.arctan2(q, p)
    c, s = np.cos(alpha), np.sin(alpha)
    K = np.stack([np.stack([k * c, -k * s], -1), np.stack([k * s, k * c], -1)], -2)
    dev = np.linalg.norm(M - K, axis=(-2, -1)) / np.linalg.norm(M, axis=(-2, -1))
    return k, alpha, dev


def reduce_conformal(A: Cocycle, S: st.ConformalField, dev_tol: float = 1e-5, n_max: int = 6) -> ReductionResult:
    """``A'(x) = C_p(f x) A(x) C_p(x)^{-1}`` with ``C_p = sqrt(S)``, read as ``k R(alpha)``, ``k > 0``."""
    if tuple(S.cover) != tuple(A.cover):
        raise ReductionError(f"structure cover {S.cover} differs from cocycle cover {A.cover}")
    if not S.found:
        raise ReductionError(f"no invariant conformal structure found (residual {S.residual:.3g})")
    f = A.base
    X1, X2 = _grid_xy(S.log_coords.shape[:2], S.N)
    FX1, FX2 = f.map_float(X1, X2)
    n1, n2 = X1.shape
    idx = (np.rint(FX1 * S.N).astype(int) % n1, np.rint(FX2 * S.N).astype(int) % n2)
    R = st.sqrt_spd(S.grid_values())
    Ag = A.evaluate_orbit(np.stack([X1, X2], -1))
    Ap = R[idx] @ Ag @ st.inv2(R)
    k, alpha, _ = conformal_part(Ap)
    model = Model("conformal", GridField(k, A.cover, S.order), lv.angle_field_from_grid(alpha, A.cover, S.order), A.cover)

    def Cinv(x1, x2):
        return st.inv2(st.sqrt_spd(S.at(x1, x2)))

    C = MatrixGrid(Cinv, "S^{-1/2}")
    pts = st.validation_points(A.cover)
    x1, x2 = pts[:, 0], pts[:, 1]
    y1, y2 = f.map_float(x1, x2)
    Apv = st.sqrt_spd(S.at(y1, y2)) @ A.evaluate_orbit(pts) @ Cinv(x1, x2)
    dev = float(np.max(conformal_part(Apv)[2]))
    if dev > dev_tol:
        raise ReductionError(f"conformality defect {dev:.3g} above {dev_tol:.3g}")
    res = conjugacy_residual(A, model, C, f)
    return ReductionResult(A, model, C, res, A.cover, dev)


def reduce_diagonal(A: Cocycle, Lp: st.LineField, Lm: st.LineField, min_gap: float = 0.05) -> ReductionResult:
    """Diagonalise along the transverse pair ``Lp`` (first axis) and ``Lm`` (second)."""
    f = A.base
    U1, U2 = oriented_frame(Lp), oriented_frame(Lm)
    gap = np.abs(np.sin(Lp.theta - Lm.theta))
    if gap.min() < min_gap:
        i, j = np.unravel_index(int(np.argmin(gap)), gap.shape)
        raise st.TransversalityError(f"line fields meet at angle {gap.min():.3g} near x = ({i / Lp.N}, {j / Lp.N})")
    X1, X2 = _grid_xy(Lp.theta.shape, Lp.N)
    FX1, FX2 = f.map_float(X1, X2)
    n1, n2 = X1.shape
    idx = (np.rint(FX1 * Lp.N).astype(int) % n1, np.rint(FX2 * Lp.N).astype(int) % n2)
    M = np.stack([U1.values, U2.values], -1)
    Ag = A.evaluate_orbit(np.stack([X1, X2], -1))
    D = st.inv2(M[idx]) @ Ag @ M
    model = Model("diagonal", GridField(D[..., 0, 0], A.cover, Lp.order), GridField(D[..., 1, 1], A.cover, Lp.order), A.cover)

    def C_fn(x1, x2):
        return np.stack([_unit(U1, x1, x2), _unit(U2, x1, x2)], -1)

    C = MatrixGrid(C_fn, "frame [v+, v-]")
    res = conjugacy_residual(A, model, C, f)
    off = float(max(np.abs(D[..., 0, 1]).max(), np.abs(D[..., 1, 0]).max()))
    return ReductionResult(A, model, C, res, A.cover, 0.0, _deck_signs(C, A.cover), [f"grid off-diagonal max {off:.3g}"])


# classification ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassifyConfig:
    n_max: int = 6
    grid: int = 128
    tol: float = OBSTRUCTION_TOL
    solve_tol: float = 1e-6
    dev_tol: float = 1e-5
    line_tol: float = 1e-6
    tols: Tolerances = DEFAULT_TOLS


@dataclass(eq=False)
class Classification:
    type: str  # I | I' | II | II' | III | undetermined
    reduction: ReductionResult | None
    periodic_kind: str
    holonomy: tuple | None = None
    cover: tuple = (1, 1)
    obstruction: float | None = None
    witness: object = None
    notes: list = field(default_factory=list)

    @property
    def determined(self) -> bool:
        return self.type != "undetermined"

    def to_json(self) -> dict:
        w = self.witness
        return {
            "type": self.type,
            "periodic_kind": self.periodic_kind,
            "holonomy": None if self.holonomy is None else list(self.holonomy),
            "cover": list(self.cover),
            "obstruction": self.obstruction,
            "witness": None if w is None else {"period": w.period, "point": [f"{w.base.a}/{w.base.d}", f"{w.base.b}/{w.base.d}"]},
            "reduction": None if self.reduction is None else self.reduction.to_json(),
            "notes": self.notes,
        }


def double_cover_for(holonomy, F) -> tuple:
    """Smallest cover in which a field with this holonomy becomes orientable."""
    want = tuple(2 if h < 0 else 1 for h in holonomy)
    from .torus import preserves_lattice

    for cover in (want, (2, 2)):
        if preserves_lattice(F, cover):
            return cover
    raise CoverError(f"no legal cover orients holonomy {holonomy}")


def classify_full(A: Cocycle, cfg: ClassifyConfig = ClassifyConfig()) -> Classification:
    """Type I, I', II, II' or III, with the reduction that decides it."""
    pc = classify_periodic(A, cfg.n_max, cfg.tols)
    if pc.kind == "Violation":
        return Classification("undetermined", None, pc.kind,
                              notes=[f"periodic data not one-exponent: {pc.counts}"])
    if pc.kind in ("Elliptic", "ScalarLike"):
        return _classify_conformal(A, cfg, pc.kind)
    return _classify_parabolic(A, cfg)


def _classify_conformal(A, cfg, kind):
    S = st.find_conformal(A, cfg.grid)
    if not S.found and S.degenerate:
        # scalar-like cycles leave the periodic finder unconstrained; the spectral solve is not
        S = st.find_conformal(A, cfg.grid, method="spectral")
    if not S.found:
        return Classification("undetermined", None, kind, notes=[f"no conformal structure (residual {S.residual:.3g})"])
    try:
        red = reduce_conformal(A, S, cfg.dev_tol, cfg.n_max)
    except ReductionError as exc:
        return Classification("undetermined", None, kind, notes=[str(exc)])
    alpha = red.model.alpha
    sol = lv.solve_circle(alpha, A.base, cfg.n_max, modulus=math.pi, tol=cfg.tol, solve_tol=cfg.solve_tol)
    if not sol.success:
        if sol.witness is not None and sol.obstruction > 10 * cfg.tol:
            rep = lv.scan_circle(alpha, A.base, cfg.n_max, math.pi, cfg.tol)
            return Classification("III", red, kind, obstruction=float(rep.values[rep.witness_index]), witness=rep.witness,
                                  notes=[f"largest obstruction mod pi over the scan {rep.max_abs:.3g}"])
        return Classification("undetermined", red, kind, notes=[sol.note])
    odd = tuple(int(s) % 2 for s in sol.sigma)
    if odd == (0, 0):
        return Classification("II", red, kind, notes=["rotation part is a coboundary mod pi"])
    cover = double_cover_for(tuple(-1 if o else 1 for o in odd), A.base.F)
    red.model.primed, red.model.conj_cover = True, cover
    return Classification("II'", red, kind, cover=cover,
                          notes=[f"rotation part solves mod pi with winding {sol.sigma}; R(s) needs the cover {cover}"])


def _classify_parabolic(A, cfg):
    L = st.find_line(A, cfg.grid)
    if L.residual > cfg.line_tol:
        return Classification("undetermined", None, "Parabolic", notes=[f"line field residual {L.residual:.3g}"])
    try:
        hol = L.holonomy()
    except st.FieldTooRoughError as exc:
        return Classification("undetermined", None, "Parabolic", notes=[str(exc)])
    primed = hol != (1, 1)
    B, cover = A, A.cover
    if primed:
        cover = double_cover_for(hol, A.base.F)
        B = A.lift(cover)
        L = st.find_line(B, cfg.grid)
    try:
        red = reduce_triangular(B, L, cfg.n_max, cfg.tol, cfg.solve_tol)
    except ReductionError as exc:
        return Classification("undetermined", None, "Parabolic", hol, cover, notes=[str(exc)])
    rep = red.model.witness
    if rep.max_abs > 10 * cfg.tol:
        t = "I'" if primed else "I"
        red.model.primed, red.model.conj_cover = primed, cover if primed else None
        return Classification(t, red, "Parabolic", hol, cover, float(rep.values[rep.witness_index]), rep.witness)
    if rep.max_abs <= cfg.tol:
        return Classification("II'" if primed else "II", red, "Parabolic", hol, cover, rep.max_abs)
    return Classification("undetermined", red, "Parabolic", hol, cover, rep.max_abs,
                          notes=["off-diagonal obstruction inside the margin band"])


# testers -----------------------------------------------------------------------------------


@dataclass(eq=False)
class CohomologyVerdict:
    verdict: str  # cohomologous | not-cohomologous | undetermined
    kind: str
    certificate: MatrixGrid | None = None  # A'(x) = C(f x) B'(x) C(x)^{-1}
    c: float | None = None
    branch: str = ""
    witnesses: list = field(default_factory=list)  # (orbit, value) pairs
    residual: float = float("nan")
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "kind": self.kind,
            "c": self.c,
            "branch": self.branch,
            "residual": self.residual,
            "witnesses": [
                {"period": o.period, "point": [f"{o.base.a}/{o.base.d}", f"{o.base.b}/{o.base.d}"], "value": v}
                for o, v in self.witnesses
            ],
            "notes": self.notes,
        }


def certificate_residual(Ap: Model, Bp: Model, C, f, pts=None) -> float:
    """Sup of ``||A'(x) - C(f x) B'(x) C(x)^{-1}||`` relative to sup ``||A'||``."""
    if pts is None:
        pts = st.validation_points(f.cover)
    x1, x2 = pts[:, 0], pts[:, 1]
    y1, y2 = f.map_float(x1, x2)
    lhs = Ap.evaluate(x1, x2)
    rhs = C.evaluate(y1, y2) @ Bp.evaluate(x1, x2) @ st.inv2(C.evaluate(x1, x2))
    scale = max(1.0, float(np.max(np.linalg.norm(lhs, axis=(-2, -1)))))
    return float(np.max(np.linalg.norm(lhs - rhs, axis=(-2, -1)))) / scale


@dataclass
class _Mult:
    ok: bool
    phi: object = None  # positive field with ratio = phi o f / phi
    witness: tuple | None = None
    undetermined: str = ""


def _fixed_point_witness(f, values):
    table = orbit_table(f, 1)
    return table.orbit(0), values


def _multiplicative(ratio, f, n_max, tol, solve_tol) -> _Mult:
    """Is ``ratio = phi o f / phi`` for a positive continuous ``phi``?"""
    x1, x2 = fl.expr.sample_grid(f.cover, 64, offset=0.5)
    v = _ev(ratio, x1, x2)
    if np.all(v < 0) or not (np.all(v > 0)):
        # sign of ratio^x(p, 1) at a fixed point is an obstruction to a positive phi
        table = orbit_table(f, 1)
        pts = table.points
        r = _ev(ratio, pts[:, 0], pts[:, 1])
        neg = np.nonzero(r < 0)[0]
        if len(neg):
            return _Mult(False, witness=(table.orbit(int(neg[0])), float(r[neg[0]])))
        return _Mult(False, undetermined="ratio changes sign")
    rep = lv.scan_multiplicative(ratio, f, n_max, tol)
    if rep.max_abs > 10 * tol:
        i = rep.witness_index
        return _Mult(False, witness=(rep.witness, float(rep.values[i])))
    if rep.max_abs > tol:
        return _Mult(False, undetermined=f"multiplicative obstruction {rep.max_abs:.3g} inside the margin band")
    sol = lv.solve_multiplicative(ratio, f, solve_tol)
    if not sol.success or not sol.certificate.valid:
        return _Mult(False, undetermined="multiplicative solve did not certify")
    return _Mult(True, sol.certificate.phi)


def _finish(kind, Ap, Bp, C, f, c=None, branch="", notes=None, tol=1e-6):
    res = certificate_residual(Ap, Bp, C, f)
    if res > tol:
        return CohomologyVerdict("undetermined", kind, C, c, branch, [], res,
                                 (notes or []) + [f"certificate residual {res:.3g} above {tol:.3g}"])
    return CohomologyVerdict("cohomologous", kind, C, c, branch, [], res, notes or [])


def _fail(kind, m: _Mult, notes=None, branch=""):
    if m.witness is not None:
        return CohomologyVerdict("not-cohomologous", kind, branch=branch, witnesses=[m.witness], notes=notes or [])
    return CohomologyVerdict("undetermined", kind, branch=branch, notes=(notes or []) + [m.undetermined])


def test_scalar(Ap: Model, Bp: Model, f, n_max: int = 6, tol: float = OBSTRUCTION_TOL,
                solve_tol: float = 1e-6) -> CohomologyVerdict:
    """``k Id`` vs ``l Id``: cohomologous iff ``k / l = phi o f / phi``; certificate ``phi Id``."""
    m = _multiplicative(_ratio(Ap.k, Bp.k), f, n_max, tol, solve_tol)
    if not m.ok:
        return _fail("scalar", m)
    phi = m.phi
    C = MatrixGrid(lambda x1, x2: _ev(phi, x1, x2)[..., None, None] * np.eye(2), "phi Id")
    return _finish("scalar", Ap, Bp, C, f, tol=solve_tol)


def test_triangular(Ap: Model, Bp: Model, f, n_max: int = 6, tol: float = OBSTRUCTION_TOL,
                    solve_tol: float = 1e-6) -> CohomologyVerdict:
    """Certificate ``phi(x) [[c, s(x)], [0, 1]]`` with ``k / l = phi o f / phi`` and ``a - c b = s o f - s``."""
    m = _multiplicative(_ratio(Ap.k, Bp.k), f, n_max, tol, solve_tol)
    if not m.ok and m.witness is not None:
        return _fail("triangular", m)
    pair = lv.solve_pair_scalar(Ap.alpha, Bp.alpha, f, n_max, tol, solve_tol)
    if pair.verdict == "not-cohomologous":
        return CohomologyVerdict("not-cohomologous", "triangular", c=pair.c,
                                 witnesses=[(o, a / b if abs(b) > 0 else math.inf) for o, a, b in pair.witnesses],
                                 notes=["witness values are the ratios alpha^+ / beta^+"])
    if not m.ok:
        return _fail("triangular", m)
    if pair.verdict != "cohomologous":
        return CohomologyVerdict("undetermined", "triangular", c=pair.c, notes=[pair.note])
    phi, s, c = m.phi, pair.certificate.phi, pair.c

    def C_fn(x1, x2):
        p, sv = np.broadcast_arrays(_ev(phi, x1, x2), _ev(s, x1, x2))
        out = np.zeros(p.shape + (2, 2))
        out[..., 0, 0] = p * c
        out[..., 0, 1] = p * sv
        out[..., 1, 1] = p
        return out

    return _finish("triangular", Ap, Bp, MatrixGrid(C_fn, "phi [[c, s], [0, 1]]"), f, c, tol=solve_tol)


class _AngleCombo:
    """``a + sign * b`` for circle-valued fields, keeping track of winding."""

    def __init__(self, a, b, sign):
        self.a, self.b, self.sign = a, b, sign

    def evaluate(self, x1, x2):
        return _ev(self.a, x1, x2) + self.sign * _ev(self.b, x1, x2)


def _angle_combo(a, b, sign, cover):
    wa = a.winding if isinstance(a, lv.AngleField) else (0, 0)
    wb = b.winding if isinstance(b, lv.AngleField) else (0, 0)
    if wa == (0, 0) and wb == (0, 0):
        return _AngleCombo(a, b, sign)
    pa = a.periodic if isinstance(a, lv.AngleField) else a
    pb = b.periodic if isinstance(b, lv.AngleField) else b
    w = (wa[0] + sign * wb[0], wa[1] + sign * wb[1])
    return lv.AngleField(w, _AngleCombo(pa, pb, sign), cover)


def test_conformal(Ap: Model, Bp: Model, f, n_max: int = 6, tol: float = OBSTRUCTION_TOL,
                   solve_tol: float = 1e-6) -> CohomologyVerdict:
    """``k R(a)`` vs ``l R(b)``: ``c = +1`` needs ``a - b = s o f - s`` (certificate ``phi R(s)``),
    ``c = -1`` needs ``a + b = s o f - s`` (certificate ``phi Q(s)``), both mod ``2 pi``."""
    m = _multiplicative(_ratio(Ap.k, Bp.k), f, n_max, tol, solve_tol)
    if not m.ok:
        return _fail("conformal", m)
    phi = m.phi
    witnesses, notes = [], []
    for c, sign, branch in ((1, -1, "rotation"), (-1, 1, "reflection")):
        delta = _angle_combo(Ap.alpha, Bp.alpha, sign, f.cover)
        sol = lv.solve_circle(delta, f, n_max, 2 * math.pi, tol, solve_tol)
        if sol.success:
            s = sol.s
            mat = fl.rotation if c == 1 else fl.reflection

            def C_fn(x1, x2, s=s, mat=mat):
                return _ev(phi, x1, x2)[..., None, None] * mat(_ev(s, x1, x2))

            return _finish("conformal", Ap, Bp, MatrixGrid(C_fn, f"phi {branch}(s)"), f, float(c), branch, tol=solve_tol)
        if sol.witness is not None and sol.obstruction > 10 * tol:
            rep = lv.scan_circle(delta, f, n_max, 2 * math.pi, tol)
            witnesses.append((rep.witness, float(rep.values[rep.witness_index])))
        else:
            notes.append(f"{branch}: {sol.note}")
    if len(witnesses) == 2:
        return CohomologyVerdict("not-cohomologous", "conformal", witnesses=witnesses,
                                 notes=["one witness per branch (rotation, reflection)"])
    return CohomologyVerdict("undetermined", "conformal", witnesses=witnesses, notes=notes)


def test_diagonal(Ap: Model, Bp: Model, f, n_max: int = 6, tol: float = OBSTRUCTION_TOL,
                  solve_tol: float = 1e-6) -> CohomologyVerdict:
    """Straight pairing (certificate ``diag(phi1, phi2)``), then swapped (anti-diagonal)."""
    witnesses, notes = [], []
    for branch, (b1, b2) in (("straight", (Bp.k, Bp.alpha)), ("swapped", (Bp.alpha, Bp.k))):
        m1 = _multiplicative(_ratio(Ap.k, b1), f, n_max, tol, solve_tol)
        m2 = _multiplicative(_ratio(Ap.alpha, b2), f, n_max, tol, solve_tol) if m1.ok else None
        if m1.ok and m2.ok:
            p1, p2 = m1.phi, m2.phi
            swap = branch == "swapped"

            def C_fn(x1, x2, p1=p1, p2=p2, swap=swap):
                a, b = np.broadcast_arrays(_ev(p1, x1, x2), _ev(p2, x1, x2))
                out = np.zeros(a.shape + (2, 2))
                if swap:
                    out[..., 0, 1], out[..., 1, 0] = a, b
                else:
                    out[..., 0, 0], out[..., 1, 1] = a, b
                return out

            return _finish("diagonal", Ap, Bp, MatrixGrid(C_fn, branch), f, 1.0 if branch == "straight" else -1.0,
                           branch, tol=solve_tol)
        bad = m1 if not m1.ok else m2
        if bad.witness is not None:
            witnesses.append(bad.witness)
        else:
            notes.append(f"{branch}: {bad.undetermined}")
    if len(witnesses) == 2:
        return CohomologyVerdict("not-cohomologous", "diagonal", witnesses=witnesses,
                                 notes=["one witness per pairing (straight, swapped)"])
    return CohomologyVerdict("undetermined", "diagonal", witnesses=witnesses, notes=notes)


def test_models(Ap: Model, Bp: Model, f, **kw) -> CohomologyVerdict:
    if Ap.kind != Bp.kind:
        return CohomologyVerdict("not-cohomologous", f"{Ap.kind}/{Bp.kind}",
                                 notes=["models of different types are never cohomologous"])
    return {"scalar": test_scalar, "triangular": test_triangular, "conformal": test_conformal,
            "diagonal": test_diagonal}[Ap.kind](Ap, Bp, f, **kw)


# centralizers ------------------------------------------------------------------------------


@dataclass
class CentralizerDesc:
    kind: str
    parameters: int
    generators: list  # constant matrices spanning the centralizer (as a linear family)
    description: str
    verified: float  # worst ||A'(x) - D A'(x) D^{-1}|| over sampled D and grid points


_CENTRALIZERS = {
    "triangular": (2, [np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]])], "d [[1, s], [0, 1]]"),
    "scalar": (4, [np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0, 0.0], [1.0, 0.0]]),
                   np.array([[1.0, 0.0], [0.0, -1.0]])], "GL(2, R)"),
    "conformal": (2, [np.eye(2), np.array([[0.0, -1.0], [1.0, 0.0]])], "d R(s)"),
    "diagonal": (2, [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], "diag(d1, d2)"),
}


def centralizer(model: Model, samples: int = 8, seed: int = 0) -> CentralizerDesc:
    """Constant self-conjugacies of a model, with a sampled check of ``A' = D A' D^{-1}``."""
    n, gens, desc = _CENTRALIZERS[model.kind]
    rng = np.random.default_rng(seed)
    x1, x2 = fl.expr.sample_grid(model.cover, 16, offset=0.25)
    Ax = model.evaluate(x1, x2)
    worst = 0.0
    for _ in range(samples):
        D = sum(c * G for c, G in zip(rng.normal(size=len(gens)) + np.r_[2.0, np.zeros(len(gens) - 1)], gens))
        if abs(np.linalg.det(D)) < 1e-3:
            continue
        worst = max(worst, float(np.max(np.abs(Ax - D @ Ax @ np.linalg.inv(D)))))
    return CentralizerDesc(model.kind, n, gens, desc, worst)


# periodic conjugators ----------------------------------------------------------------------


def quotient_feature(C: np.ndarray, Q: np.ndarray, jt: str) -> float:
    """Coset invariant of ``C Z(Q)`` used to compare conjugators across orbits.

    parabolic: ``log ||C u||`` for the unit eigenvector ``u`` of ``Q`` (``|det C| = 1``);
    real-split: ``log(||C u1|| ||C u2||)``; elliptic and scalar: 0 (the coset is
    determined by the data alone).
    """
    if jt == "parabolic":
        u = st.eigendirections(Q[None])[0]
        return float(np.log(np.linalg.norm(C @ u)))
    if jt == "real-split":
        u1 = st.eigendirections(Q[None], "dominant")[0]
        u2 = st.eigendirections(Q[None], "recessive")[0]
        return float(np.log(np.linalg.norm(C @ u1) * np.linalg.norm(C @ u2)))
    return 0.0


@dataclass
class ConjugatorReport:
    rows: list  # dicts: period, point, jordan_type, C, norm, feature
    sup_norm: float
    probe_center: tuple
    probe_radius: float
    probe_count: int
    dispersion: float  # spread of the quotient feature over probed points
    flag: str  # bounded-dispersed | clustering | unbounded | empty

    def to_json(self) -> dict:
        return {
            "sup_norm": self.sup_norm,
            "probe_center": list(self.probe_center),
            "probe_radius": self.probe_radius,
            "probe_count": self.probe_count,
            "dispersion": self.dispersion,
            "flag": self.flag,
            "rows": self.rows[:1000],
        }


def periodic_conjugator_analysis(A: Cocycle, B: Cocycle, n_max: int = 5, p0=(0.25, 0.25), radius: float = 0.1,
                                 tol: float = 1e-8, disp_tol: float = 1e-3,
                                 tols: Tolerances = DEFAULT_TOLS) -> ConjugatorReport:
    """Canonical ``C(p)`` with ``A(p, n) = C(p) B(p, n) C(p)^{-1}`` at every periodic point.

    The table holds one row per orbit (its base point); the probe uses every
    point of every orbit within ``radius`` of ``p0``, with products taken from
    that point.
    """
    sa, sb = A.periodic_scan(n_max), B.periodic_scan(n_max)
    table = sa.table
    rows, sup = [], 0.0
    for i in range(len(table)):
        o = table.orbit(i)
        try:
            cj = conjugator(sa.products[i], sb.products[i], tol, tols)
        except NotConjugateError as exc:
            raise NotConjugateError(f"orbit {o}: {exc}") from None
        nrm = float(np.linalg.norm(cj.C, 2))
        sup = max(sup, nrm)
        rows.append({"period": o.period, "point": [f"{o.base.a}/{o.base.d}", f"{o.base.b}/{o.base.d}"],
                     "jordan_type": cj.jordan_type, "C": cj.C.tolist(), "norm": nrm,
                     "feature": quotient_feature(cj.C, sb.products[i], cj.jordan_type)})
    # probe: all orbit points near p0, products re-based at each point
    pts = table.points
    d = torus_distance(pts, np.asarray(p0, dtype=float), A.cover)
    near = np.nonzero(d < radius)[0]
    feats = []
    for k in near:
        i = int(np.searchsorted(table.offsets, k, side="right") - 1)
        n = int(table.periods[i])
        shift = int(k - table.offsets[i])
        orb = table.points[table.offsets[i]: table.offsets[i] + n]
        orb = np.roll(orb, -shift, axis=0)[None]
        Pa = A.evaluate_orbit(orb)[0]
        Pb = B.evaluate_orbit(orb)[0]
        PA, PB = Pa[0], Pb[0]
        for t in range(1, n):
            PA, PB = Pa[t] @ PA, Pb[t] @ PB
        cj = conjugator(PA, PB, tol, tols)
        feats.append(quotient_feature(cj.C, PB, cj.jordan_type))
    disp = float(np.max(feats) - np.min(feats)) if feats else float("nan")
    if not feats:
        flag = "empty"
    elif not np.isfinite(sup):
        flag = "unbounded"
    elif disp > disp_tol:
        flag = "bounded-dispersed"
    else:
        flag = "clustering"
    return ConjugatorReport(rows, sup, tuple(p0), radius, len(feats), disp, flag)
