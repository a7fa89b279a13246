import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from syncpulse import quadrature


def test_kronrod_weights_sum_to_two():
    assert math.isclose(quadrature.KRONROD_WEIGHTS.sum(), 2.0, rel_tol=1e-15)
    assert math.isclose(quadrature.GAUSS_WEIGHTS.sum(), 2.0, rel_tol=1e-15)


@pytest.mark.parametrize("degree", range(0, 24))
def test_kronrod_exact_for_polynomials(degree):
    a, b = np.array([-0.3]), np.array([1.7])
    value, _ = quadrature.gauss_kronrod(lambda x: x**degree, a, b)
    exact = (1.7 ** (degree + 1) - (-0.3) ** (degree + 1)) / (degree + 1)
    assert value[0] == pytest.approx(exact, rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("degree", range(0, 14))
def test_gauss_exact_for_polynomials(degree):
    # the error estimate vanishes when both rules are exact
    _, err = quadrature.gauss_kronrod(lambda x: x**degree, np.array([0.0]), np.array([1.0]))
    assert err[0] < 1e-14


def test_integrate_oscillatory():
    bp = quadrature.oscillation_breakpoints(0.0, 10.0, 50.0)
    res = quadrature.integrate(lambda x: np.cos(50 * x) * np.exp(-x), bp, rel_tol=1e-12)
    exact = (1 + math.exp(-10) * (50 * math.sin(500) - math.cos(500))) / (1 + 2500)
    assert res.converged
    assert res.value == pytest.approx(exact, rel=1e-11)
    assert res.error < 1e-10


def test_integrate_reports_budget_exhaustion():
    res = quadrature.integrate(lambda x: np.sin(1 / np.maximum(x, 1e-300)), [1e-9, 1.0],
                               rel_tol=1e-14, max_subdivisions=20)
    assert not res.converged


def test_breakpoints_cover_range():
    bp = quadrature.oscillation_breakpoints(1.0, 2.0, 0.0, extra=[1.5, 3.0])
    assert bp[0] == 1.0 and bp[-1] == 2.0
    assert 1.5 in bp and 3.0 not in bp
    assert np.all(np.diff(bp) > 0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.1, 30.0))
def test_integrate_gaussian_cosine(width, freq):
    bp = quadrature.oscillation_breakpoints(-12 * width, 12 * width, freq)
    res = quadrature.integrate(lambda x: np.exp(-(x / width) ** 2) * np.cos(freq * x), bp, rel_tol=1e-12,
                               abs_tol=1e-14)
    exact = width * math.sqrt(math.pi) * math.exp(-(freq * width) ** 2 / 4)
    assert abs(res.value - exact) <= 1e-10 * width
