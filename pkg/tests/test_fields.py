import math

import numpy as np
import pytest
from helpers import as_expression, random_trigpoly, trigpolys
from hypothesis import given
from hypothesis import strategies as st

from cocyclelab import fields as fl
from cocyclelab.fields import TrigPoly
from cocyclelab.lab.gallery import CLOSED_FORM_7_1_I

CAT = ((5, 2), (2, 1))


def test_parse_half_angle_rotation_needs_even_cover():
    e = fl.parse("R(pi*x1)", cover=(2, 1), F=CAT)
    assert isinstance(e, fl.Rotation)
    with pytest.raises(fl.PeriodicityError):
        fl.parse("R(pi*x1)", cover=(1, 1), F=CAT)


def test_parse_triangular_literal():
    e = fl.parse("[[1, 0.1*sin(2*pi*x1)], [0, 1]]")
    assert isinstance(e, fl.MatrixLiteral)
    np.testing.assert_allclose(e.evaluate(0.25, 0.0), [[1, 0.1], [0, 1]], atol=1e-15)


def test_parse_bindings_and_comments():
    text = "# a comment\nt = 2*pi*x1\ns = sin(t)**2\n[[1, s], [0, 1]]"
    e = fl.parse(text)
    np.testing.assert_allclose(e.evaluate(0.25, 0.3), [[1, 1], [0, 1]], atol=1e-15)


def test_parse_syntax_error_has_position():
    with pytest.raises(fl.DSLSyntaxError):
        fl.parse("[[1,,2]]")


def test_rotation_eval_is_exact_quarter_turn():
    e = fl.parse("R(pi*x1)", cover=(2, 1))
    np.testing.assert_allclose(e.evaluate(0.5, 0.0), [[0, -1], [1, 0]], atol=1e-15)


@pytest.mark.parametrize("x,expected", [((0.0, 0.0), [[1, 1], [0, 1]]), ((0.5, 0.0), [[1, 0], [-1, 1]])])
def test_closed_form_values(x, expected):
    e = fl.parse(CLOSED_FORM_7_1_I)
    np.testing.assert_allclose(e.evaluate(*x), expected, atol=1e-14)
    # cross-check at the half point: R(pi/2) B R(-pi/2)
    if x == (0.5, 0.0):
        B = np.array([[1, 1], [0, 1]])
        np.testing.assert_allclose(fl.rotation(math.pi / 2) @ B @ fl.rotation(-math.pi / 2), expected, atol=1e-15)


def test_closed_form_entry_mean():
    e = fl.parse("u = 2*pi*(2*x1 + x2)\nv = 2*pi*(3*x1 + x2)\ncos(u) + (sin(u) - sin(v))/2 - cos(u)")
    assert abs(fl.to_trigpoly(e).mean()) < 1e-15


def test_to_trigpoly_precomposition_example():
    p = fl.to_trigpoly(fl.parse("cos(2*pi*x1)")).compose(CAT)
    assert p.allclose(TrigPoly.cos((5, 2)), 1e-15)


def test_to_trigpoly_constant_and_square():
    assert fl.to_trigpoly(fl.parse("3")).coeffs == {(0, 0): 3}
    sq = fl.to_trigpoly(fl.parse("sin(2*pi*x1)*sin(2*pi*x1)"))
    assert sq.allclose(TrigPoly.constant(0.5) - TrigPoly.cos((2, 0), 0.5), 1e-15)


def test_to_trigpoly_rejects_non_polynomial():
    with pytest.raises(fl.NotRepresentableError):
        fl.to_trigpoly(fl.parse("1/(2 + cos(2*pi*x1))"))


def test_mean_examples():
    assert fl.to_trigpoly(fl.parse("cos(2*pi*x1)")).mean() == 0
    assert fl.to_trigpoly(fl.parse("3 + cos(2*pi*x1)")).mean() == 3


def test_half_integer_frequencies_on_double_cover():
    p = fl.to_trigpoly(fl.parse("cos(pi*x1)", cover=(2, 1)), (2, 1))
    assert p.support() == [(-1, 0), (1, 0)] or sorted(p.support()) == [(-1, 0), (1, 0)]
    assert p.frequency((1, 0)) == (0.5, 0)


@given(trigpolys(), st.floats(0, 1), st.floats(0, 1))
def test_expression_round_trip(p, x1, x2):
    q = fl.to_trigpoly(as_expression(p))
    assert abs(p.evaluate(x1, x2) - q.evaluate(x1, x2)) <= 1e-12 * max(1.0, p.l1_norm())


@given(trigpolys())
def test_precomposition_support(p):
    q = p.compose(CAT)
    image = {p.map_key(CAT, k) for k in p.support()}
    assert set(q.support()) == image
    x = np.random.default_rng(0).random((20, 2))
    y = (x @ np.array(CAT, dtype=float).T) % 1.0
    np.testing.assert_allclose(q.evaluate(x[:, 0], x[:, 1]), p.evaluate(y[:, 0], y[:, 1]), atol=1e-9)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_rotation_algebra(a, b):
    np.testing.assert_allclose(fl.rotation(a) @ fl.rotation(b), fl.rotation(a + b), atol=1e-12)
    assert np.linalg.det(fl.rotation(a)) == pytest.approx(1, abs=1e-12)
    assert np.linalg.det(fl.reflection(a)) == pytest.approx(-1, abs=1e-12)


@pytest.mark.parametrize("text,cover", [("R(pi*(5*x1+2*x2))", (2, 1)), ("[[2 + sin(2*pi*x2), 0], [0, 1]]", (1, 1)),
                                        ("conj(R(pi*x1), [[1,1],[0,1]])", (1, 1))])
def test_accepted_expressions_are_periodic(text, cover):
    e = fl.parse(text, cover=cover, F=CAT)
    x1, x2 = fl.expr.sample_grid(cover, 16)
    v = e.evaluate(x1, x2)
    np.testing.assert_allclose(e.evaluate(x1 + cover[0], x2), v, atol=1e-9)
    np.testing.assert_allclose(e.evaluate(x1, x2 + cover[1]), v, atol=1e-9)


def test_trigpoly_csv_and_json_round_trip():
    rng = np.random.default_rng(3)
    for cover in [(1, 1), (2, 1)]:
        p = random_trigpoly(rng, cover=cover, mean_zero=False)
        assert TrigPoly.from_csv(p.to_csv(), cover).allclose(p, 1e-15)
        q = fl.from_json(p.to_json())
        assert q.allclose(p, 0.0)


def test_expression_json_round_trip():
    e = fl.parse(CLOSED_FORM_7_1_I)
    g = fl.from_json(fl.to_json(e))
    x = np.random.default_rng(1).random((50, 2))
    np.testing.assert_array_equal(g.evaluate(x[:, 0], x[:, 1]), e.evaluate(x[:, 0], x[:, 1]))


def test_sample_grid_matches_evaluate():
    p = random_trigpoly(np.random.default_rng(5), box=4, terms=10, mean_zero=False)
    g = p.sample_grid((16, 16))
    j = np.arange(16) / 16
    X1, X2 = np.meshgrid(j, j, indexing="ij")
    np.testing.assert_allclose(g, p.evaluate(X1, X2), atol=1e-12)


def test_division_by_vanishing_field_rejected():
    e = fl.parse("1/sin(2*pi*x1)")  # the sample grid misses the zeros
    with pytest.raises(fl.SingularEvaluationError):
        e.evaluate(0.0, 0.3)
    with pytest.raises(fl.SingularEvaluationError):
        fl.parse("1/sin(2*pi*(x1 - 0.37/64))")


def test_division_by_constant_is_representable():
    p = fl.to_trigpoly(fl.parse("cos(2*pi*x1)/4"))
    assert p.allclose(TrigPoly.cos((1, 0), 0.25), 1e-16)


def test_grid_field_interpolates_smooth_function():
    g = fl.GridField.sample(lambda x1, x2: np.cos(2 * np.pi * x1) * np.sin(2 * np.pi * x2), (64, 64))
    x = np.random.default_rng(2).random((100, 2))
    np.testing.assert_allclose(g.evaluate(x[:, 0], x[:, 1]),
                               np.cos(2 * np.pi * x[:, 0]) * np.sin(2 * np.pi * x[:, 1]), atol=1e-5)
