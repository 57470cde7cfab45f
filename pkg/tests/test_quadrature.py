import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from finpart.errors import BudgetExceeded, DomainError
from finpart.quadrature import EvalCounter, cauchy_derivatives, cauchy_taylor, gauss_adaptive, tanh_sinh


def test_gauss_smooth():
    r = gauss_adaptive(np.cos, [0.0, math.pi / 2])
    assert abs(r.value - 1.0) < 1e-15


def test_gauss_peaked():
    # Lorentzian of width 1e-3 centered at 0.3
    w = 1e-3
    r = gauss_adaptive(lambda x: w / ((x - 0.3) ** 2 + w * w), [0.0, 1.0])
    ref = math.atan(0.7 / w) + math.atan(0.3 / w)
    assert abs(r.value - ref) < 1e-12 * ref


def test_gauss_vectorized_trailing_axis():
    k = np.arange(1, 4)
    r = gauss_adaptive(lambda x: x[:, None] ** k, [0.0, 1.0])
    assert np.allclose(r.value, 1 / (k + 1), rtol=1e-15, atol=0)


def test_gauss_bad_breakpoints():
    with pytest.raises(DomainError):
        gauss_adaptive(np.sin, [1.0, 0.0])


def test_tanh_sinh_endpoint_singularity():
    r = tanh_sinh(lambda x: 1 / np.sqrt(x), 0.0, 1.0)
    assert abs(r.value - 2.0) < 1e-12


def test_tanh_sinh_log_singularity():
    r = tanh_sinh(np.log, 0.0, 1.0)
    assert abs(r.value + 1.0) < 1e-12


def test_budget():
    with pytest.raises(BudgetExceeded):
        gauss_adaptive(lambda x: np.abs(x - 0.123456), [0.0, 1.0], counter=EvalCounter(limit=100))


def test_budget_from_env(monkeypatch):
    monkeypatch.setenv("FINPART_MAX_EVALS", "7")
    assert EvalCounter().limit == 7
    monkeypatch.setenv("FINPART_MAX_EVALS", "lots")
    with pytest.raises(DomainError):
        EvalCounter()


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_cauchy_exp_derivatives(x, y):
    c = complex(x, y)
    d = cauchy_derivatives(np.exp, c, 0.5, 6)
    # rounding on the circle is amplified by k!/r^k
    bound = np.array([1e-15 * math.factorial(k) / 0.5**k for k in range(7)]) * math.exp(x + 0.5)
    assert np.all(np.abs(d - np.exp(c)) <= bound)


def test_cauchy_taylor_polynomial():
    c = cauchy_taylor(lambda z: 1 + 2 * z + 3 * z**3, 0.0, 1.0, 5)
    assert np.allclose(c, [1, 2, 0, 3, 0, 0], atol=1e-14)
