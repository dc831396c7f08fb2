import math

import numpy as np
import pytest
from helpers import random_trigpoly, trigpolys
from hypothesis import given

from cocyclelab import fields as fl
from cocyclelab import livsic as lv
from cocyclelab import torus as t
from cocyclelab.fields import TrigPoly
from cocyclelab.lab import gallery

CAT = ((5, 2), (2, 1))
F = t.LatticeAutomorphism(CAT)
ORIGIN = t.RationalPoint(0, 0, 1)


def coboundary(phi):
    return phi.compose(CAT) - phi


def brute_sum(alpha, orbit):
    """Oracle: sum along exact rational orbit points, one point at a time."""
    return sum(float(alpha.evaluate(*p.to_float())) for p in orbit.points)


def test_scan_additive_examples():
    c = TrigPoly.cos((1, 0))
    rep = lv.scan_additive(c, F, 4)
    assert rep.witness.base == ORIGIN and rep.values[rep.witness_index] == pytest.approx(1.0)
    assert lv.scan_additive(coboundary(c), F, 6).max_abs <= 1e-12
    assert lv.scan_additive(TrigPoly(), F, 4).max_abs == 0.0


def test_scan_sums_match_exact_orbits():
    alpha = random_trigpoly(np.random.default_rng(7), box=3, terms=8, mean_zero=False)
    rep = lv.scan_additive(alpha, F, 4)
    for i in range(0, len(rep.values), 7):
        o = rep.table.orbit(i)
        assert rep.values[i] == pytest.approx(brute_sum(alpha, o), abs=1e-12)


def test_scan_multiplicative_examples():
    rep = lv.scan_multiplicative(fl.parse("2"), F, 3)
    np.testing.assert_allclose(rep.values, rep.table.periods * math.log(2), rtol=1e-15)
    k = fl.parse("(2 + cos(2*pi*(5*x1 + 2*x2))) / (2 + cos(2*pi*x1))")
    assert lv.scan_multiplicative(k, F, 5).max_abs <= 1e-12
    rep = lv.scan_multiplicative(fl.parse("1 + 0.1*cos(2*pi*x1)"), F, 3)
    assert rep.values[0] == pytest.approx(math.log(1.1), abs=1e-15)
    assert rep.table.orbit(0).base == ORIGIN


def test_scan_multiplicative_rejects_sign_change():
    with pytest.raises(lv.LivsicError):
        lv.scan_multiplicative(fl.parse("0.5 + cos(2*pi*x1)"), F, 3)


@given(trigpolys(box=3, max_terms=4))
def test_multiplicative_matches_additive(alpha):
    add = lv.scan_additive(alpha, F, 4)
    mul = lv.scan_multiplicative(fl.exp(fl.Wrapped(alpha)), F, 4)
    np.testing.assert_allclose(mul.values, add.values, atol=1e-10)


def test_solve_fourier_examples():
    sol = lv.solve_fourier(TrigPoly.cos((5, 2)) - TrigPoly.cos((1, 0)), F)
    assert sol.success and sol.certificate.phi.allclose(TrigPoly.cos((1, 0)), 1e-15)
    sol = lv.solve_fourier(TrigPoly(), F)
    assert sol.success and sol.certificate.phi.coeffs == {}
    sol = lv.solve_fourier(TrigPoly.cos((1, 0)), F)
    assert not sol.success
    assert set(sol.witness.orbit_keys) & {(1, 0), (-1, 0)}
    assert sol.witness.value == pytest.approx(0.5)


def test_solve_fourier_nonzero_mean_is_an_obstruction():
    sol = lv.solve_fourier(TrigPoly.constant(0.2) + coboundary(TrigPoly.cos((0, 1))), F)
    assert not sol.success and sol.witness.orbit_keys == [(0, 0)]


@given(trigpolys(box=3, max_terms=6))
def test_round_trip(phi):
    sol = lv.solve_fourier(coboundary(phi), F)
    assert sol.success
    expected = phi - phi.mean()
    assert sol.certificate.phi.allclose(expected, 1e-12)


def test_fourier_periodic_equivalence():
    rng = np.random.default_rng(11)
    alphas = [coboundary(random_trigpoly(rng, box=3, terms=6)) if i % 2 else random_trigpoly(rng, box=3, terms=4)
              for i in range(20)]
    worst = lv.scan_additive_batch(alphas, F, 8)
    for alpha, w in zip(alphas, worst):
        assert lv.solve_fourier(alpha, F).success == (w <= 1e-8)


def test_batch_scan_matches_single_scan():
    rng = np.random.default_rng(4)
    alphas = [random_trigpoly(rng, box=2, terms=3, mean_zero=False) for _ in range(3)]
    batch = lv.scan_additive_batch(alphas, F, 5)
    single = [lv.scan_additive(a, F, 5).max_abs for a in alphas]
    np.testing.assert_allclose(batch, single, rtol=1e-12)


def test_certificates_validate_on_fresh_grid():
    rng = np.random.default_rng(2)
    for _ in range(5):
        alpha = coboundary(random_trigpoly(rng, box=3, terms=6))
        cert = lv.solve_fourier(alpha, F, cert_tol=1e-10).certificate
        assert cert.valid
        x1, x2 = np.meshgrid(np.arange(257) / 257 + 0.001, np.arange(257) / 257 + 0.002, indexing="ij")
        y1, y2 = F.map_float(x1, x2)
        r = alpha.evaluate(x1, x2) - (cert.phi.evaluate(y1, y2) - cert.phi.evaluate(x1, x2))
        assert np.max(np.abs(r)) <= cert.tol


def test_solve_orbit_recovers_phi():
    alpha = fl.parse("cos(2*pi*(5*x1 + 2*x2)) - cos(2*pi*x1)")
    cert = lv.solve_orbit(alpha, F, iterations=1_000_000)
    j = np.arange(128) / 128
    X1, _ = np.meshgrid(j, j, indexing="ij")
    assert np.max(np.abs(cert.phi.values - np.cos(2 * np.pi * X1))) <= 0.05
    assert cert.representation == "grid"


def test_solve_orbit_zero_and_precondition():
    cert = lv.solve_orbit(TrigPoly(), F, iterations=200_000)
    assert np.all(cert.phi.values == 0)
    with pytest.raises(lv.PreconditionError):
        lv.solve_orbit(TrigPoly.cos((1, 0)), F, iterations=1000)


def test_solve_orbit_partial_coverage():
    with pytest.raises(lv.PartialCoverageError):
        lv.solve_orbit(TrigPoly(), F, iterations=100)


def test_solve_pair_scalar_examples():
    beta = TrigPoly.cos((1, 0)) + TrigPoly.sin((0, 1), 0.5) + 0.3
    r = lv.solve_pair_scalar(2 * beta, beta, F, 5)
    assert r.verdict == "cohomologous" and r.c == 2.0 and r.max_deviation == 0.0
    r = lv.solve_pair_scalar(coboundary(beta) + beta, beta, F, 5)
    assert r.verdict == "cohomologous" and r.c == pytest.approx(1, abs=1e-12) and r.certificate.valid


def test_solve_pair_scalar_bump_pair_witnesses():
    e = gallery.gallery_2_6()
    r = lv.solve_pair_scalar(e.references["alpha"], e.references["beta"], F, 6)
    assert r.verdict == "not-cohomologous"
    ratios = {w[0].base: w[1] / w[2] for w in r.witnesses}
    assert ratios == {ORIGIN: pytest.approx(1, abs=1e-12), t.RationalPoint(1, 1, 2): pytest.approx(2, abs=1e-12)}


def test_solve_pair_scalar_undetermined():
    r = lv.solve_pair_scalar(TrigPoly(), TrigPoly(), F, 3)
    assert r.verdict == "undetermined" and r.c is None


def test_solve_circle_examples():
    s = lv.solve_circle(TrigPoly(), F)
    assert s.success and s.residual == 0.0
    a = TrigPoly.cos((1, 1), 0.7)
    s = lv.solve_circle(coboundary(a), F)
    assert s.success
    x = np.random.default_rng(0).random((50, 2))
    diff = lv.reduce_mod(s.s.evaluate(x[:, 0], x[:, 1]) - a.evaluate(x[:, 0], x[:, 1]), 2 * math.pi)
    assert np.ptp(diff) <= 1e-12  # equal up to an additive constant
    s = lv.solve_circle(TrigPoly.constant(math.pi / 2), F, 2)
    assert not s.success and s.witness.base == ORIGIN


def test_solve_circle_mod_pi_absorbs_multiples():
    delta = coboundary(TrigPoly.cos((0, 1), 0.3)) + math.pi
    assert lv.solve_circle(delta, F, modulus=math.pi).success
    assert not lv.solve_circle(delta, F, modulus=2 * math.pi).success


def test_close_orbit_gap_examples():
    a = fl.parse("cos(2*pi*x1)")
    assert lv.close_orbit_gap(a, F, (0.1, 0.2), (0.1, 0.2), 10).gap == 0.0
    v = np.linalg.eigh(np.array(CAT, dtype=float))[1][:, 0]  # stable direction
    x = np.array([0.1, 0.2])
    g = lv.close_orbit_gap(a, F, x, x + 1e-6 * v, 20)
    assert g.eps <= 0.25
    assert g.gap <= 2 * math.pi * 20 * g.eps  # Lipschitz bound
    assert lv.close_orbit_gap(fl.parse("3"), F, x, x + 1e-6 * v, 20).gap == 0.0


def test_close_orbit_gap_rejects_separating_orbits():
    with pytest.raises(lv.LivsicError):
        lv.close_orbit_gap(fl.parse("cos(2*pi*x1)"), F, (0.1, 0.2), (0.3, 0.2), 5)


def test_obstruction_report_serialisation():
    rep = lv.scan_additive(TrigPoly.cos((1, 0)), F, 2)
    js = rep.to_json()
    assert js["witness"]["point"] == ["0/1", "0/1"] and js["verdict"] is False
    assert rep.to_csv(limit=2).splitlines()[0] == "period,point,obstruction"
