import math

import numpy as np
import pytest

from polarijsa.errors import QuadratureError
from polarijsa.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    integrate_line,
)


def test_rule_constants():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    # Kronrod rule is exact for degree 22
    assert KRONROD_WEIGHTS @ NODES**22 == pytest.approx(2 / 23, rel=1e-14)
    assert GAUSS_WEIGHTS @ NODES**12 == pytest.approx(2 / 13, rel=1e-14)


def test_lorentzian_over_real_line():
    centers = np.array([0.0, 1.0, -3.0])
    res = integrate_line(lambda o, x: 1 / (1 + (x - centers[o]) ** 2), centers, 5.0,
                         rel_tol=1e-12)
    np.testing.assert_allclose(res.value, math.pi, rtol=1e-11)
    assert np.all(res.converged)


def test_gaussian_without_tails():
    res = integrate_line(lambda o, x: np.exp(-(x**2)), np.zeros(1), 12.0, tails=False)
    assert res.value[0] == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_odd_slow_tails_cancel():
    # x / (1 + x^2) decays like 1/x; the symmetric improper integral is zero
    res = integrate_line(lambda o, x: x / (1 + x**2) + 1 / (1 + x**2), np.zeros(1), 3.0)
    assert res.value[0] == pytest.approx(math.pi, rel=1e-8)


def test_breakpoints_resolve_narrow_peak():
    width = 1e-5

    def f(o, x):
        return width / ((x - 0.3) ** 2 + width**2)

    res = integrate_line(f, np.zeros(1), 2.0, np.array([[0.3, np.nan]]), rel_tol=1e-10)
    assert res.value[0] == pytest.approx(math.pi, rel=1e-9)


def test_batch_independence():
    shifts = np.linspace(-1, 1, 7)

    def f(o, x):
        return np.exp(-((x - shifts[o]) ** 2) / (0.01 + 0.02 * o)) * np.cos(5 * x)

    together = integrate_line(f, shifts, 4.0, tails=False)
    for k in range(shifts.size):
        def g(o, x, k=k):
            return f(np.full_like(o, k), x)

        alone = integrate_line(g, shifts[k:k + 1], 4.0, tails=False)
        assert alone.value[0] == together.value[k]


def test_cancelling_integral_converges():
    res = integrate_line(lambda o, x: np.sin(x) * np.exp(-(x**2)), np.zeros(1), 8.0, tails=False)
    assert res.converged[0] and abs(res.value[0]) < 1e-14


def test_non_convergence_reported():
    res = integrate_line(lambda o, x: np.sin(1 / (x + 1e-3)), np.zeros(1), 1.0, tails=False,
                         rel_tol=1e-14, max_subdivisions=3)
    assert not res.converged[0]
    with pytest.raises(QuadratureError) as info:
        res.raise_if_failed("test")
    assert info.value.trace[0] > 3 and np.isfinite(info.value.estimate[0])
