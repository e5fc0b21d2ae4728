import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from herglotz import quadrature as qd
from herglotz.errors import QuadratureFailure


def test_simpson_polynomial_is_exact():
    val = qd.adaptive_simpson(lambda x: 3 * x ** 2 - x, -1.0, 2.0)
    assert val == pytest.approx(7.5, abs=1e-13)


def test_simpson_complex_integrand():
    val = qd.adaptive_simpson(lambda t: np.exp(1j * t), 0.0, math.pi)
    assert val == pytest.approx(2j, abs=1e-11)


def test_simpson_budget_exhausted():
    with pytest.raises(QuadratureFailure):
        qd.adaptive_simpson(lambda x: math.sin(400 * x), 0.0, 10.0, max_evals=200)


def test_real_line_cauchy_density():
    assert qd.integrate_real_line(lambda x: 1.0 / (1.0 + x * x)).real == pytest.approx(math.pi, rel=1e-10)
    half = qd.integrate_real_line(lambda x: 1.0 / (1.0 + x * x), 0.0).real
    assert half == pytest.approx(math.pi / 2, rel=1e-10)


@pytest.mark.parametrize("p", [-1.5, -2.0, -3.25])
def test_log_tail_power(p):
    val = qd.integrate_log_tail(lambda x: x ** p, 2.0).real
    assert val == pytest.approx(-(2.0 ** (p + 1)) / (p + 1), rel=1e-9)


def test_log_tail_rejects_nonpositive_start():
    with pytest.raises(ValueError):
        qd.integrate_log_tail(lambda x: x, 0.0)


def _brute_midpoint(grid, values, g, refine=4):
    """Midpoint rule with every cell split ``refine`` times."""
    x0, x1 = grid[:-1], grid[1:]
    t = (np.arange(refine) + 0.5) / refine
    xs = (x0[:, None] + (x1 - x0)[:, None] * t[None, :]).ravel()
    h = np.repeat((x1 - x0) / refine, refine)
    return np.sum(np.interp(xs, grid, values) * g(xs) * h)


GRID = np.linspace(-3.0, 3.0, 4001)
VALUES = 1.0 + 0.5 * np.sin(2 * GRID) ** 2


@pytest.mark.parametrize("e", [0.0, -1.0, -2.0, -0.75, -1.5])
def test_weighted_cells_match_brute_force(e):
    exact = qd.weighted_cells(GRID, VALUES, e)
    brute = _brute_midpoint(GRID, VALUES, lambda x: (1 + x * x) ** e)
    assert exact == pytest.approx(brute, rel=1e-8)


def test_compensation_cells_match_brute_force():
    exact = qd.compensation_cells(GRID, VALUES)
    brute = _brute_midpoint(GRID, VALUES, lambda x: x / (1 + x * x))
    assert exact == pytest.approx(brute, rel=1e-8, abs=1e-12)


def _gauss_cells(grid, values, g, n=20):
    """Gauss-Legendre on every cell; the integrand is smooth inside each cell."""
    t, w = np.polynomial.legendre.leggauss(n)
    x0, x1 = grid[:-1, None], grid[1:, None]
    xs = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * t
    return np.sum(np.interp(xs, grid, values) * g(xs) * 0.5 * (x1 - x0) * w)


@given(re=st.floats(-5, 5), im=st.floats(0.05, 5))
def test_cauchy_cells_match_gauss_reference(re, im):
    z = complex(re, im)
    grid = np.linspace(-1.0, 2.0, 301)
    vals = np.exp(-grid ** 2)
    exact = qd.cauchy_cells(grid, vals, z)
    ref = _gauss_cells(grid, vals, lambda x: 1.0 / (x - z))
    assert abs(exact - ref) <= 1e-10 * max(1.0, abs(ref))


def test_cauchy_cells_narrow_cells_far_point():
    # cells of width 1e-9 at distance 1e3: naive log differences lose every digit
    grid = np.array([0.0, 1e-9, 2e-9])
    vals = np.array([1.0, 1.0, 1.0])
    got = qd.cauchy_cells(grid, vals, 1000 + 1j)
    assert got == pytest.approx(2e-9 / (0 - (1000 + 1j)), rel=1e-9)


def test_log1p_and_remainder_series_agree_with_direct_form():
    r = np.array([1e-2 + 1e-2j, 3e-3j, 0.5])
    assert np.allclose(qd._log1p_complex(r), np.log(1 + r), rtol=1e-14)
    assert np.allclose(qd._r_minus_log1p(r), r - np.log(1 + r), rtol=1e-10)
