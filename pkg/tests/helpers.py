"""Shared strategies and small oracles for the test suite."""

import numpy as np
from hypothesis import strategies as st

from cocyclelab import fields as fl
from cocyclelab.fields import TrigPoly


def random_trigpoly(rng, box=3, terms=6, cover=(1, 1), mean_zero=True, scale=1.0):
    """Real trig poly with random support inside ``[-box, box]^2``."""
    coeffs = {}
    for _ in range(terms):
        k = (int(rng.integers(-box, box + 1)), int(rng.integers(-box, box + 1)))
        if k == (0, 0) and mean_zero:
            continue
        coeffs[k] = coeffs.get(k, 0) + scale * complex(rng.normal(), rng.normal())
    return TrigPoly(coeffs, cover)


@st.composite
def trigpolys(draw, box=3, max_terms=5, cover=(1, 1)):
    n = draw(st.integers(1, max_terms))
    coeffs = {}
    for _ in range(n):
        k = (draw(st.integers(-box, box)), draw(st.integers(-box, box)))
        re = draw(st.floats(-2, 2, allow_nan=False))
        im = draw(st.floats(-2, 2, allow_nan=False))
        coeffs[k] = complex(re, im)
    return TrigPoly(coeffs, cover)


def as_expression(p: TrigPoly):
    """Rebuild a trig poly as a sum of cosines and sines in the expression tree."""
    q1, q2 = p.cover
    e = fl.Const(p.coeffs.get((0, 0), 0).real)
    for k, c in sorted(p.coeffs.items()):
        if k[0] > 0 or (k[0] == 0 and k[1] > 0):
            arg = 2 * fl.PI * (fl.Const(k[0] / q1) * fl.X1 + fl.Const(k[1] / q2) * fl.X2)
            e = e + fl.Const(2 * c.real) * fl.cos(arg) - fl.Const(2 * c.imag) * fl.sin(arg)
    return e


points = st.tuples(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))


def random_points(rng, n, cover=(1, 1)):
    return rng.random((n, 2)) * np.asarray(cover, dtype=float)
