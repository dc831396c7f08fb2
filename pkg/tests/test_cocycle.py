import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cocyclelab import cocycle as cc
from cocyclelab import fields as fl
from cocyclelab import torus as t
from cocyclelab.lab import gallery

CAT = ((5, 2), (2, 1))
ORIGIN = t.PeriodicOrbit(t.RationalPoint(0, 0, 1), 1, (t.RationalPoint(0, 0, 1),))

SMOOTH = "[[2 + sin(2*pi*x1), 0.3*cos(2*pi*x2)], [0.2*sin(2*pi*(x1+x2)), 1.5 + 0.4*cos(2*pi*x1)]]"
CONJ = "[[1, 0.3*sin(2*pi*x2)], [0.1*cos(2*pi*x1), 1]]"


def from_text(text, cover=(1, 1)):
    return cc.Cocycle.from_text(CAT, text, cover)


@pytest.fixture(scope="module")
def smooth():
    return from_text(SMOOTH)


@pytest.fixture(scope="module")
def g71():
    return gallery.gallery_7_1("i")


def conjugate(A, C_text):
    """``C(fx) A(x) C(x)^-1`` as a cocycle over the same base."""
    C = fl.parse(C_text, cover=A.cover)
    f = A.base

    def fn(x1, x2):
        y1, y2 = f.map_float(x1, x2)
        return C.evaluate(y1, y2) @ A.generator.evaluate(x1, x2) @ np.linalg.inv(C.evaluate(x1, x2))

    return cc.Cocycle(f, fl.MatrixFunction(fn, "conjugate"), "conjugate")


def test_product_zero_is_identity(smooth):
    np.testing.assert_array_equal(smooth.product((0.3, 0.1), 0), np.eye(2))


def test_lifted_example_at_origin(g71):
    np.testing.assert_allclose(g71.cocycles["A_lifted"].product((0, 0), 1), [[1, 1], [0, 1]], atol=1e-15)


def test_constant_generator_powers():
    G = np.array([[2.0, 1.0], [1.0, 1.0]])
    A = from_text("[[2, 1], [1, 1]]")
    np.testing.assert_allclose(A.product((0.4, 0.9), 3), np.linalg.matrix_power(G, 3), rtol=1e-14)


def test_product_cap(smooth):
    with pytest.raises(cc.ProductCapError):
        smooth.product((0.1, 0.2), 61)


def test_orientation_reversing_rejected():
    with pytest.raises(cc.CocycleError):
        from_text("diag(-1, 1)")


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True), st.integers(0, 15), st.integers(0, 15))
def test_cocycle_equation(x1, x2, n, m):
    A = from_text(SMOOTH)
    x = np.array([x1, x2])
    fm = A.base.float_orbit(x, m + 1)[-1] if m else x
    lhs = A.product(x, n + m)
    rhs = A.product(fm, n) @ A.product(x, m)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(lhs)))


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True), st.integers(1, 12))
def test_inverse_consistency(x1, x2, n):
    A = from_text(SMOOTH)
    x = np.array([x1, x2])
    back = A.base.float_orbit(x, -(n + 1))[-1]
    P = A.product(x, -n) @ A.product(back, n)
    np.testing.assert_allclose(P, np.eye(2), atol=1e-10 * np.linalg.cond(A.product(back, n)))


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True), st.integers(1, 20))
def test_det_of_product(x1, x2, n):
    A = from_text(SMOOTH)
    x = np.array([x1, x2])
    pts = A.base.float_orbit(x, n)
    dets = np.linalg.det(A.evaluate_orbit(pts))
    assert np.linalg.det(A.product(x, n)) == pytest.approx(np.prod(dets), rel=1e-12)


def test_periodic_datum_examples():
    d = cc.periodic_datum(from_text("[[1, 1], [0, 1]]"), ORIGIN)
    assert d.jordan_type == "parabolic" and d.lyapunov == (0.0, 0.0)
    d = cc.periodic_datum(from_text("diag(2, 1)"), ORIGIN)
    assert d.jordan_type == "real-split"
    assert d.lyapunov[0] == pytest.approx(np.log(2), abs=1e-15) and d.lyapunov[1] == pytest.approx(0, abs=1e-15)
    d = cc.periodic_datum(from_text("R(1)"), ORIGIN)
    assert d.jordan_type == "elliptic"
    np.testing.assert_allclose(d.lyapunov, (0, 0), atol=1e-15)
    np.testing.assert_allclose(sorted(d.eigenvalues, key=np.imag), [np.exp(-1j), np.exp(1j)], atol=1e-15)


def test_one_exponent_examples(g71):
    rep = cc.check_one_exponent(from_text("(2 + cos(2*pi*x1)) * R(0.3 + 0.2*sin(2*pi*x2))"), 5)
    assert rep.verdict and rep.worst <= 1e-12
    rep = cc.check_one_exponent(from_text("diag(2, 1)"), 1)
    assert not rep.verdict and rep.worst == pytest.approx(0.5)
    assert rep.witness.base == t.RationalPoint(0, 0, 1)
    assert cc.check_one_exponent(g71.cocycles["A"], 6).verdict


def test_conjugate_periodic_data_examples(smooth):
    assert cc.check_conjugate_periodic_data(smooth, smooth, 4).verdict
    rep = cc.check_conjugate_periodic_data(from_text("[[1, 0.3], [0, 1]]"), from_text("[[1, 0], [0, 1]]"), 3)
    assert not rep.verdict and len(rep.failures) == rep.orbits_checked


def test_bump_pair_periodic_data_agree():
    e = gallery.gallery_2_6()
    assert cc.check_conjugate_periodic_data(e.cocycles["A"], e.cocycles["B"], 8).verdict


def test_conjugator_examples():
    np.testing.assert_allclose(cc.conjugator(np.diag([2.0, 1.0]), np.diag([2.0, 1.0])).C, np.eye(2))
    c = cc.conjugator([[1, 2], [0, 1]], [[1, 1], [0, 1]])
    np.testing.assert_allclose(c.C, np.diag([np.sqrt(2), 1 / np.sqrt(2)]), atol=1e-15)
    assert c.condition_number == pytest.approx(2)
    with pytest.raises(cc.NotConjugateError):
        cc.conjugator([[1, 1], [0, 1]], np.eye(2))


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3),
       st.sampled_from(["elliptic", "split", "parabolic"]), st.floats(0.2, 3))
def test_conjugator_solves_equation(c11, c12, c21, c22, kind, s):
    G = np.array([[c11, c12], [c21, c22]])
    if abs(np.linalg.det(G)) < 0.2 or np.linalg.cond(G) > 50:
        return
    Q = {"elliptic": s * fl.rotation(0.7), "split": np.diag([s, 1 / s]) if abs(s - 1) > 0.1 else np.diag([2.0, 0.5]),
         "parabolic": s * np.array([[1.0, 1.0], [0.0, 1.0]])}[kind]
    P = G @ Q @ np.linalg.inv(G)
    c = cc.conjugator(P, Q)
    assert abs(abs(np.linalg.det(c.C)) - 1) < 1e-9
    np.testing.assert_allclose(c.C @ Q @ np.linalg.inv(c.C), P, atol=1e-8 * np.linalg.norm(P))


def test_classify_periodic_examples(g71):
    assert cc.classify_periodic(from_text("R(0.3 + 0.2*cos(2*pi*x1))"), 4).kind == "Elliptic"
    assert cc.classify_periodic(g71.cocycles["A"], 5).kind == "Parabolic"
    assert cc.classify_periodic(gallery.gallery_7_1("ii").cocycles["A"], 5).kind == "ScalarLike"


def test_classify_reports_violation():
    assert cc.classify_periodic(from_text("diag(2, 1)"), 2).kind == "Violation"


@pytest.mark.parametrize("C", [CONJ, "R(0.4*sin(2*pi*x1))", "[[1.2 + 0.1*cos(2*pi*x2), 0], [0, 1]]"])
def test_conjugacy_invariance(smooth, C):
    B = conjugate(smooth, C)
    sa, sb = smooth.periodic_scan(5), B.periodic_scan(5)
    tra = np.trace(sa.products, axis1=1, axis2=2)
    trb = np.trace(sb.products, axis1=1, axis2=2)
    np.testing.assert_allclose(trb, tra, atol=1e-9 * np.max(np.abs(tra)))
    np.testing.assert_allclose(np.linalg.det(sb.products), np.linalg.det(sa.products), rtol=1e-9)


@pytest.mark.parametrize("text", ["R(0.3 + 0.2*cos(2*pi*x1))", "[[1, 0.5 + 0.1*sin(2*pi*x1)], [0, 1]]", "[[1,0],[0,1]]"])
def test_classification_is_conjugacy_invariant(text):
    A = from_text(text)
    B = conjugate(A, CONJ)
    ka, kb = cc.classify_periodic(A, 4), cc.classify_periodic(B, 4)
    assert ka.kind == kb.kind
    assert {k: o.base for k, o in ka.witnesses.items()} == {k: o.base for k, o in kb.witnesses.items()}


def test_periodic_table_csv(smooth):
    text = smooth.periodic_scan(2).to_csv(limit=3)
    lines = text.strip().splitlines()
    assert lines[0] == "period,point,tr,det,jordan_type,lambda_p,mu_p"
    assert len(lines) == 4


def test_condition_report_json(smooth):
    js = cc.check_one_exponent(smooth, 3).to_json()
    assert set(js) >= {"condition", "n_max", "worst", "witness", "verdict", "tol"}
