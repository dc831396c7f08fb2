"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import random_trigpoly  # noqa: E402

from cocyclelab import cohomology as coh  # noqa: E402
from cocyclelab import fields as fl  # noqa: E402
from cocyclelab import livsic as lv  # noqa: E402
from cocyclelab import structures as st  # noqa: E402
from cocyclelab import torus as t  # noqa: E402
from cocyclelab.cocycle import Cocycle, check_conjugate_periodic_data  # noqa: E402
from cocyclelab.fields import TrigPoly  # noqa: E402
from cocyclelab.lab import gallery  # noqa: E402
from cocyclelab.lab.config import LabConfig  # noqa: E402

CAT = ((5, 2), (2, 1))
F = t.LatticeAutomorphism(CAT)
ORIGIN = t.RationalPoint(0, 0, 1)
FIXED = [t.RationalPoint(0, 0, 1), t.RationalPoint(1, 0, 2), t.RationalPoint(0, 1, 2), t.RationalPoint(1, 1, 2)]

# brute-force counts from the enumeration oracle below, frozen
FROZEN_COUNTS = {1: 4, 2: 32, 3: 196, 4: 1152}


def report(capsys, number, title, passed, detail, elapsed=None):
    clock = "" if elapsed is None else f" [{elapsed:.1f} s]"
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {title}: {detail}{clock}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return passed


def conjugate(A, C):
    """``C(fx) A(x) C(x)^-1`` for a matrix field ``C`` over the same base."""
    f = A.base

    def fn(x1, x2):
        y1, y2 = f.map_float(x1, x2)
        return C.evaluate(y1, y2) @ A.generator.evaluate(x1, x2) @ np.linalg.inv(C.evaluate(x1, x2))

    return Cocycle(f, fl.MatrixFunction(fn, "conjugate"), "conjugate")


def random_conjugator(rng, size=0.15):
    """``Id + small smooth matrix`` with trig entries; invertible for ``size`` this small."""
    e = [random_trigpoly(rng, box=1, terms=2, scale=size / 4) for _ in range(4)]
    return fl.MatrixFunction(lambda x1, x2: np.eye(2) + np.stack(
        [np.stack([e[0].evaluate(x1, x2), e[1].evaluate(x1, x2)], -1),
         np.stack([e[2].evaluate(x1, x2), e[3].evaluate(x1, x2)], -1)], -2), "C")


def brute_count(n):
    """Points ``a / D`` with ``(F^n - I) a / D`` integral, by direct enumeration."""
    M = np.array(t.matpow(CAT, n)) - np.eye(2, dtype=np.int64)
    D = abs(int(round(np.linalg.det(M))))
    a1, a2 = np.meshgrid(np.arange(D), np.arange(D), indexing="ij")
    y1 = (M[0, 0] * a1 + M[0, 1] * a2) % D
    y2 = (M[1, 0] * a1 + M[1, 1] * a2) % D
    return int(np.count_nonzero((y1 == 0) & (y2 == 0)))


# 1 ----------------------------------------------------------------------------------------


def criterion_1(capsys=None):
    t0 = time.perf_counter()
    bad = []
    for n in range(1, 11):
        Fn = t.matpow(CAT, n)
        want = abs(Fn[0][0] + Fn[1][1] - 2)
        got = len(t.periodic_points(t.LatticeAutomorphism(CAT, period_cap=10), n))
        if got != want or (n in FROZEN_COUNTS and got != FROZEN_COUNTS[n]):
            bad.append((n, got, want))
    elapsed = time.perf_counter() - t0
    oracle_ok = all(brute_count(n) == FROZEN_COUNTS[n] for n in FROZEN_COUNTS)
    ok = not bad and oracle_ok and elapsed < 5
    return report(capsys, 1, "periodic counts n=1..10 equal |tr F^n - 2|", ok,
                  f"mismatches {bad}, enumeration oracle n<=4 {'agrees' if oracle_ok else 'DISAGREES'}", elapsed)


# 2 ----------------------------------------------------------------------------------------


def criterion_2(capsys=None):
    t0 = time.perf_counter()
    entry = gallery.gallery_7_1("i")
    A = entry.cocycles["A"]
    x = np.random.default_rng(2).random((10_000, 2))
    Ax = A.generator.evaluate(x[:, 0], x[:, 1])
    displayed = np.max(np.abs(Ax - entry.references["closed_form_displayed"].evaluate(x[:, 0], x[:, 1])), axis=0)
    corrected = np.max(np.abs(Ax - entry.references["closed_form"].evaluate(x[:, 0], x[:, 1])))
    periodic = max(np.max(np.abs(A.generator.evaluate(x[:, 0] + 1, x[:, 1]) - Ax)),
                   np.max(np.abs(A.generator.evaluate(x[:, 0], x[:, 1] + 1) - Ax)))
    L = st.find_line(A, 64)
    hol = L.holonomy()
    cl = coh.classify_full(A, coh.ClassifyConfig(n_max=5, grid=64))
    elapsed = time.perf_counter() - t0
    ok = displayed.max() <= 1e-12 and periodic <= 1e-12 and hol == (-1, 1) and cl.type == "I'" and elapsed < 30
    return report(capsys, 2, "gallery 7.1.i closed form, periodicity, holonomy, type", ok,
                  f"displayed form deviation {displayed.max():.3g} (entrywise {np.round(displayed, 3).tolist()}; "
                  f"with the top-left sign corrected {corrected:.3g}), 1-periodic {periodic:.3g}, "
                  f"holonomy {hol}, type {cl.type}", elapsed)


# 3 ----------------------------------------------------------------------------------------


def criterion_3(capsys=None):
    t0 = time.perf_counter()
    cl = coh.classify_full(gallery.gallery_7_1("ii").cocycles["A"], coh.ClassifyConfig(n_max=5, grid=64))
    e3 = gallery.gallery_7_1("iii")
    A = e3.cocycles["A"]
    Lp, Lm = st.find_line(A, 64, direction="forward"), st.find_line(A, 64, direction="backward")
    hp, hm = Lp.holonomy(), Lm.holonomy()
    x = np.random.default_rng(3).random((2000, 2))
    gap = float(np.min(st.angle_between_lines(Lp.vector_at(x[:, 0], x[:, 1]), Lm.vector_at(x[:, 0], x[:, 1]))))
    B = e3.cocycles["A_lifted"]
    red = coh.reduce_diagonal(B, st.find_line(B, 64, direction="forward"), st.find_line(B, 64, direction="backward"))
    elapsed = time.perf_counter() - t0
    ok = (cl.type == "II'" and max(Lp.residual, Lm.residual) <= 1e-6 and hp == hm == (-1, 1) and gap > 0.05
          and red.residual <= 1e-6 and elapsed < 60)
    return report(capsys, 3, "gallery 7.1.ii type II', 7.1.iii line fields and diagonal reduction", ok,
                  f"7.1.ii {cl.type}; 7.1.iii residuals {Lp.residual:.3g}/{Lm.residual:.3g}, holonomies {hp}/{hm}, "
                  f"min angle {gap:.3g}, reduction on {red.cover} residual {red.residual:.3g}", elapsed)


# 4 ----------------------------------------------------------------------------------------


def criterion_4(capsys=None):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    failures = 0
    for _ in range(100):
        phi = random_trigpoly(rng, box=3, terms=8)
        sol = lv.solve_fourier(phi.compose(CAT) - phi, F)
        if not sol.success:
            failures += 1
            continue
        diff = sol.certificate.phi - phi
        worst = max(worst, max((abs(c) for c in diff.coeffs.values()), default=0.0))
    # half coboundaries, half generic; the generic ones have obstructions well above tolerance
    alphas = [(lambda p: p.compose(CAT) - p)(random_trigpoly(rng, box=3, terms=6)) if i % 2
              else random_trigpoly(rng, box=3, terms=4, mean_zero=i % 4 == 0) for i in range(100)]
    sup = lv.scan_additive_batch(alphas, F, 8)
    disagree = sum(lv.solve_fourier(a, F).success != (w <= 1e-8) for a, w in zip(alphas, sup))
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and worst <= 1e-12 and disagree == 0 and elapsed < 60
    return report(capsys, 4, "Livsic round trip and Fourier/periodic equivalence", ok,
                  f"round trip worst coefficient error {worst:.3g} ({failures} failures); "
                  f"equivalence disagreements {disagree}/100", elapsed)


# 5 ----------------------------------------------------------------------------------------


def criterion_5(capsys=None):
    t0 = time.perf_counter()
    cocycles = []
    for gid in gallery.GALLERY_IDS:
        cocycles += [A for A in gallery.build(gid).cocycles.values() if isinstance(A, Cocycle)]
    rng = np.random.default_rng(5)
    worst = 0.0
    for i in range(1000):
        A = cocycles[i % len(cocycles)]
        n = int(rng.integers(0, 41))
        m = int(rng.integers(0, 41 - n))
        x = rng.random(2) * np.asarray(A.cover, dtype=float)
        fm = A.base.float_orbit(x, m + 1)[-1] if m else x
        lhs = A.product(x, n + m)
        rhs = A.product(fm, n) @ A.product(x, m)
        worst = max(worst, np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))
    elapsed = time.perf_counter() - t0
    return report(capsys, 5, "cocycle equation on gallery cocycles", worst <= 1e-9,
                  f"{len(cocycles)} cocycles, 1000 draws, worst relative error {worst:.3g}", elapsed)


# 6 ----------------------------------------------------------------------------------------


def _bump(p, delta):
    """``delta`` at the fixed point ``p`` and 0 at the other three fixed points."""
    a, b = p.a / p.d, p.b / p.d
    return fl.parse(f"{delta} * (1 + cos(2*pi*(x1 - {a!r}))) * (1 + cos(2*pi*(x2 - {b!r}))) / 4")


def _times_coboundary(k, psi, extra=None):
    """``k(x) exp(psi(fx) - psi(x))``, times ``exp(extra)`` when given."""

    def fn(x1, x2):
        y1, y2 = F.map_float(x1, x2)
        out = coh._ev(k, x1, x2) * np.exp(psi.evaluate(y1, y2) - psi.evaluate(x1, x2))
        if extra is not None:
            out = out * np.exp(extra.evaluate(x1, x2))
        return out

    return coh.PointwiseField(fn)


def _positive(rng, base):
    return random_trigpoly(rng, box=2, terms=3, scale=0.05) + base


def _pair(kind, rng, i, inject=None):
    """A known-conjugate pair ``(A', B', c)``; ``inject`` multiplies the first k by ``exp(inject)``."""
    psi = random_trigpoly(rng, box=2, terms=3, scale=0.1)
    s = random_trigpoly(rng, box=2, terms=3, scale=0.1)
    if kind == "scalar":
        ell = _positive(rng, 2.0)
        return coh.scalar(_times_coboundary(ell, psi, inject)), coh.scalar(ell), None
    if kind == "triangular":
        ell, b = _positive(rng, 1.5), random_trigpoly(rng, box=2, terms=3, scale=0.3, mean_zero=False)
        c = float(rng.choice([-1, 1]) * rng.uniform(0.5, 2.0))
        return coh.triangular(_times_coboundary(ell, psi, inject), c * b + s.compose(CAT) - s), coh.triangular(ell, b), c
    if kind == "conformal":
        ell, b = _positive(rng, 1.5), random_trigpoly(rng, box=2, terms=3, scale=0.2) + float(rng.uniform(0.2, 1.2))
        c = 1.0 if i % 2 == 0 else -1.0
        a = c * b + s.compose(CAT) - s
        return coh.conformal(_times_coboundary(ell, psi, inject), a), coh.conformal(ell, b), c
    b1, b2 = _positive(rng, 2.0), _positive(rng, 0.7)
    psi2 = random_trigpoly(rng, box=2, terms=3, scale=0.1)
    c = 1.0 if i % 2 == 0 else -1.0
    first, second = (b1, b2) if c == 1 else (b2, b1)
    return coh.diagonal(_times_coboundary(first, psi, inject), _times_coboundary(second, psi2)), coh.diagonal(b1, b2), c


def criterion_6(capsys=None):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    problems = []
    worst_res, worst_c = 0.0, 0.0
    for kind in ("scalar", "triangular", "conformal", "diagonal"):
        for i in range(20):
            Ap, Bp, c = _pair(kind, rng, i)
            v = coh.test_models(Ap, Bp, F)
            if v.verdict != "cohomologous" or not v.residual <= 1e-6:
                problems.append(f"{kind} conjugate #{i}: {v.verdict} {v.notes}")
                continue
            worst_res = max(worst_res, v.residual)
            if c is not None:
                worst_c = max(worst_c, abs(v.c - c))
                if abs(v.c - c) > 1e-6:
                    problems.append(f"{kind} conjugate #{i}: c {v.c} vs {c}")
        for i in range(20):
            p = FIXED[i % 4]
            delta = float(rng.uniform(0.1, 0.5))
            Ap, Bp, c = _pair(kind, rng, i, inject=_bump(p, delta))
            v = coh.test_models(Ap, Bp, F)
            if v.verdict != "not-cohomologous":
                problems.append(f"{kind} obstructed #{i}: {v.verdict} {v.notes}")
                continue
            # diagonal verdicts carry one witness per pairing; the injection sits on the true one
            o, val = v.witnesses[1 if kind == "diagonal" and c == -1 else 0]
            if o.period != 1 or o.base != p or abs(val - delta) > 1e-6:
                problems.append(f"{kind} obstructed #{i}: witness {o.base} {val:.6g}, injected {p} {delta:.6g}")
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 120
    return report(capsys, 6, "model tester soundness (4 types x 20 conjugate + 20 obstructed pairs)", ok,
                  f"worst certificate residual {worst_res:.3g}, worst |c - c_true| {worst_c:.3g}, "
                  f"{len(problems)} problems {problems[:3]}", elapsed)


# 7 ----------------------------------------------------------------------------------------


def criterion_7(capsys=None):
    t0 = time.perf_counter()
    entry = gallery.gallery_2_6()
    alpha, beta = entry.references["alpha"], entry.references["beta"]
    table, a = lv.periodic_sums(alpha, F, 8)
    _, b = lv.periodic_sums(beta, F, 8)
    r = a / b
    pts = table.points
    at = {(0.0, 0.0): None, (0.5, 0.5): None}
    for key in at:
        j = int(np.nonzero((pts[:, 0] == key[0]) & (pts[:, 1] == key[1]))[0][0])
        at[key] = r[j]
    A, B = entry.cocycles["A"], entry.cocycles["B"]
    cond = check_conjugate_periodic_data(A, B, 6)
    v = coh.test_triangular(coh.triangular(1.0, alpha), coh.triangular(1.0, beta), F)
    wits = {o.base for o, _ in v.witnesses}
    rep = coh.periodic_conjugator_analysis(A, B, 5)
    elapsed = time.perf_counter() - t0
    ok = (r.min() >= 1 - 1e-12 and r.max() <= 2 + 1e-12 and abs(at[(0.0, 0.0)] - 1) <= 1e-10
          and abs(at[(0.5, 0.5)] - 2) <= 1e-10 and cond.verdict and v.verdict == "not-cohomologous"
          and wits == {ORIGIN, t.RationalPoint(1, 1, 2)} and math.isfinite(rep.sup_norm)
          and rep.dispersion > 1e-3)
    return report(capsys, 7, "gallery 2.6 ratios, periodic data, tester, conjugators", ok,
                  f"ratios in [{r.min():.12g}, {r.max():.12g}] over {len(r)} orbits, r(p1) {at[(0.0, 0.0)]:.15g}, "
                  f"r(p2) {at[(0.5, 0.5)]:.15g}, conjugate data {cond.verdict}, tester {v.verdict} at "
                  f"{sorted(map(str, wits))}, sup |C(p)| {rep.sup_norm:.4g}, dispersion {rep.dispersion:.3g}", elapsed)


# 8 ----------------------------------------------------------------------------------------


def criterion_8(capsys=None):
    t0 = time.perf_counter()
    cfg = LabConfig()
    checks = gallery.check_7_3(gallery.build("7.3", cfg), cfg)
    elapsed = time.perf_counter() - t0
    ok = all(c.passed for c in checks) and elapsed < 120
    return report(capsys, 8, "gallery 7.3 recursion, periodic closed form, growth harness", ok,
                  "; ".join(f"{c.name}: {'ok' if c.passed else 'FAILED'}" for c in checks), elapsed)


# 9 ----------------------------------------------------------------------------------------


def criterion_9(capsys=None):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    Ms = rng.normal(size=(500, 2, 2))
    Ms = Ms[np.abs(np.linalg.det(Ms)) > 0.1]
    M1, M2 = Ms[:200], Ms[200:400]
    S = st.pushforward(rng.normal(size=(200, 2, 2)) + 2 * np.eye(2), np.broadcast_to(np.eye(2), (200, 2, 2)))
    T = st.pushforward(rng.normal(size=(200, 2, 2)) + 2 * np.eye(2), np.broadcast_to(np.eye(2), (200, 2, 2)))
    cocycle_err = np.max(np.abs(st.pushforward(M1 @ M2, S) - st.pushforward(M1, st.pushforward(M2, S))))
    iso_err = np.max(np.abs(st.hyp_distance(st.pushforward(M1, S), st.pushforward(M1, T)) - st.hyp_distance(S, T)))
    defects, types = [], []
    cfg = coh.ClassifyConfig(n_max=5, grid=64)
    for _ in range(10):
        k = _positive(rng, 2.0)
        alpha = random_trigpoly(rng, box=2, terms=3, scale=0.1) + float(rng.uniform(0.3, 1.2))
        while abs(math.remainder(float(alpha.evaluate(0.0, 0.0)), math.pi)) < 0.1:
            alpha = alpha + 0.2
        K = coh.conformal(k, alpha).cocycle(F)
        B = conjugate(K, random_conjugator(rng))
        Sf = st.find_conformal(B, 64)
        red = coh.reduce_conformal(B, Sf)
        defects.append(red.dev)
        types.append(coh.classify_full(B, cfg).type)
    elapsed = time.perf_counter() - t0
    ok = cocycle_err <= 1e-10 and iso_err <= 1e-10 and max(defects) <= 1e-5 and set(types) == {"III"}
    return report(capsys, 9, "pushforward invariants and conformal reduction", ok,
                  f"cocycle property {cocycle_err:.3g}, isometry {iso_err:.3g}, worst conformality defect "
                  f"{max(defects):.3g}, types {sorted(set(types))}", elapsed)


# 10 ---------------------------------------------------------------------------------------


def criterion_10(capsys=None):
    t0 = time.perf_counter()
    entry = gallery.gallery_7_1("i")
    A, Ap = entry.cocycles["A"], entry.references["model"]
    table = t.orbit_table(F, 7)
    flips, checked, first = 0, 0, None
    for i in range(len(table.periods)):
        n = int(table.periods[i])
        if n % 2 == 0:
            continue
        x = table.points[table.offsets[i]]
        P, Q = A.product(x, n), Ap.product(x, n)
        checked += 1
        if abs(np.trace(P) + np.trace(Q)) < 1e-8 and abs(abs(np.trace(Q)) - 2) < 1e-8:
            flips += 1
            first = first or (table.orbit(i).base, n, np.trace(P), np.trace(Q))
    elapsed = time.perf_counter() - t0
    ok = flips > 0
    detail = f"{flips}/{checked} odd-period orbits with tr A(p,n) = -tr A'(p,n)"
    if first:
        detail += f"; first at {first[0]} period {first[1]}: traces {first[2]:.12g} vs {first[3]:.12g}"
    return report(capsys, 10, "odd-period trace flip between A and its model", ok, detail, elapsed)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_acceptance(criterion, capsys):
    assert criterion(capsys)


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
