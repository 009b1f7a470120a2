import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from extremal_limit.errors import QuadratureError
from extremal_limit.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, quad


def test_rule_weights_sum_to_interval_length():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert np.all(np.diff(NODES) > 0)


def test_polynomials_integrated_exactly():
    # 15-point Kronrod is exact to degree 22
    assert quad(lambda x: x**22, 0.0, 1.0) == pytest.approx(1 / 23, rel=1e-14)


@pytest.mark.parametrize("f, a, b, exact", [
    (np.sin, 0.0, math.pi, 2.0),
    (lambda x: np.exp(-x), 0.0, np.inf, 1.0),
    (np.log, 0.0, 1.0, -1.0),
    (lambda x: 1 / np.sqrt(x), 0.0, 1.0, 2.0),
    (lambda x: 1 / (1 + x * x), 0.0, np.inf, math.pi / 2),
])
def test_closed_forms(f, a, b, exact):
    assert quad(f, a, b, abs_tol=1e-10, rel_tol=1e-10) == pytest.approx(exact, abs=1e-8)


def test_breakpoints_handle_kinks():
    val = quad(lambda x: np.abs(x - 0.3), 0.0, 1.0, points=(0.3,))
    assert val == pytest.approx(0.5 * (0.3**2 + 0.7**2), abs=1e-14)


def test_full_output_reports_error_estimate():
    val, err = quad(np.cos, 0.0, 1.0, full_output=True)
    assert val == pytest.approx(math.sin(1.0), abs=1e-14)
    assert 0 <= err <= 1e-9


def test_nonfinite_integrand_raises():
    with pytest.raises(QuadratureError):
        quad(lambda x: np.full_like(x, np.nan), 0.0, 1.0)


def test_panel_cap_raises_with_diagnostics():
    with pytest.raises(QuadratureError) as info:
        quad(lambda x: np.sin(1.0 / x) / x, 1e-9, 1.0, abs_tol=1e-15, rel_tol=0.0,
             max_panels=64)
    assert info.value.diagnostics


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-3.0, 3.0), st.floats(0.2, 4.0))
def test_matches_scipy_on_smooth_integrands(k, c, b):
    f = lambda x: np.exp(-k * x) * np.cos(c * x)
    ref = integrate.quad(lambda x: math.exp(-k * x) * math.cos(c * x), 0.0, b,
                         epsabs=1e-13, epsrel=1e-13)[0]
    assert quad(f, 0.0, b, abs_tol=1e-12, rel_tol=1e-12) == pytest.approx(ref, abs=1e-10)
