import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from finpart.contour import (KeyholeContour, QuadratureConfig, divergent_part, fn_lambda, fn_lambda_derivative,
                             fn_lambda_reglim, fpi, fpi_epsilon_oracle, fpi_log_integer, fpi_log_noninteger,
                             integer_kernel_coefficients, phase_minus_one)
from finpart.errors import DomainError, PoleError
from finpart.kernels import (Decay, Kernel, const_kernel, exp_kernel, j0sq_recip_gamma_kernel, poly_kernel,
                             sqrt_ratio_kernel)
from finpart.specialfun import EULER_GAMMA, BranchedLog

mp.mp.dps = 30

noninteger = st.floats(0.2, 4.8).filter(lambda x: abs(x - round(x)) > 0.05)


def rel(x, ref):
    return abs(complex(x) - complex(ref)) / abs(complex(ref))


def mellin_exp(beta, lam, n):
    s = mp.mpf(1) - mp.mpmathify(lam)
    return complex(mp.diff(lambda u: mp.gamma(u) * mp.power(beta, -u), s, n))


def power_finite(a, lam, n):
    s = mp.mpf(1) - mp.mpmathify(lam)
    return complex(mp.diff(lambda u: mp.power(a, u) / u, s, n))


def test_anchor_frozen():
    r = fpi_log_integer(j0sq_recip_gamma_kernel(), 1, 0)
    assert abs(r.value - 0.2129210647) < 1e-8
    assert abs(r.value.imag) < 1e-12


def test_integer_frozen_exp():
    assert abs(fpi_log_integer(exp_kernel(1.0), 1, 0).value + EULER_GAMMA) < 1e-13
    assert abs(fpi_log_integer(exp_kernel(1.0), 2, 0).value - (EULER_GAMMA - 1)) < 1e-13


@pytest.mark.parametrize("b,n,ref", [
    (1, 0, lambda a: math.log(a)),
    (1, 1, lambda a: math.log(a) ** 2 / 2),
    (2, 0, lambda a: -1 / a),
    (3, 1, lambda a: -math.log(a) / (2 * a * a) - 1 / (4 * a * a)),
])
def test_integer_const_kernel(b, n, ref):
    for a in (0.7, 3.0):
        assert abs(fpi_log_integer(const_kernel(), b, n, a).value - ref(a)) < 1e-12


def check_against(r, ref):
    # the log-order weights amplify rounding by up to ~(2 pi)^n / |q - 1|^(n+1);
    # est_error accounts for that and must cover the true error
    assert abs(r.value - ref) <= max(r.est_error, 1e-12 * abs(ref))
    assert rel(r.value, ref) < 1e-8


@given(noninteger, st.integers(0, 3), st.floats(0.5, 3.0))
def test_noninteger_exp_vs_mpmath(lam, n, beta):
    check_against(fpi_log_noninteger(exp_kernel(beta), lam, n), mellin_exp(beta, lam, n))


@given(noninteger, st.integers(0, 3), st.floats(0.5, 5.0))
def test_noninteger_const_finite_upper(lam, n, a):
    check_against(fpi_log_noninteger(const_kernel(), lam, n, a), power_finite(a, lam, n))


def test_complex_lambda():
    lam = 1.5 + 0.5j
    assert rel(fpi(exp_kernel(1.0), lam, 1).value, mellin_exp(1.0, lam, 1)) < 1e-11


def test_convergent_lambda_is_ordinary_integral():
    # Re lam < 1: the result is the ordinary integral Gamma(1 - lam)
    assert rel(fpi_log_noninteger(exp_kernel(1.0), 0.5, 0).value, math.sqrt(math.pi)) < 1e-12


@given(st.sampled_from([1.5, 2.5, 2.0, 3.0]), st.integers(0, 2), st.floats(0.15, 0.95))
def test_epsilon_independence(lam, n, eps):
    k = sqrt_ratio_kernel(1.5, 1.0)
    base = fpi(k, lam, n, 4.0).value
    assert rel(fpi(k, lam, n, 4.0, epsilon=eps).value, base) < 1e-10


@given(st.sampled_from([1.5, 2.5, 1.0, 2.0]), st.integers(0, 2))
def test_epsilon_oracle_matches(lam, n):
    k = poly_kernel([1.0, -0.5, 0.25])
    assert rel(fpi_epsilon_oracle(k, lam, n, 3.0).value, fpi(k, lam, n, 3.0).value) < 1e-9


def test_epsilon_oracle_richardson_path():
    k = exp_kernel(1.0)
    r = fpi_epsilon_oracle(k, 1.5, 0, math.inf, remainder=False, levels=30, tol=1e-9)
    assert rel(r.value, -2 * math.sqrt(math.pi)) < 1e-7


def test_tanh_sinh_legs_agree():
    k = exp_kernel(1.0)
    cfg = QuadratureConfig(leg_rule="tanh-sinh")
    assert rel(fpi(k, 2.5, 1, config=cfg).value, mellin_exp(1.0, 2.5, 1)) < 1e-10


def test_poly_tail_mapping():
    # each power t^{j - lam} has zero finite part over (0, inf), so the sum vanishes
    k = poly_kernel([1.0, 1.0])
    assert abs(fpi(k, 3.5, 0).value) < 1e-10
    assert abs(fpi(k, 3.5, 1).value) < 1e-10


def test_divergent_part_collision_sign():
    # int_eps^1 dt / t = -ln eps, so the subtracted part at lam = 1 is -ln eps
    eps = 0.01
    assert abs(divergent_part(const_kernel(), 1.0, 0, eps) + math.log(eps)) < 1e-15


@pytest.mark.parametrize("lam", [0.3, 1.7, -2.2, 3.9 + 0.4j])
def test_phase_minus_one(lam):
    for sign in (-1, 1):
        ref = cmath.exp(sign * 2j * math.pi * lam) - 1
        assert abs(phase_minus_one(lam, sign) - ref) < 1e-14


def test_phase_minus_one_offset():
    # near 2, the exact offset keeps every digit of the small difference
    d = 1e-9
    got = phase_minus_one(2 + d, -1, offset=d)
    assert rel(got, mp.expm1(mp.mpc(0, -2 * mp.pi * d))) < 1e-14


def test_errors():
    k = exp_kernel(1.0)
    with pytest.raises(DomainError):
        fpi_log_noninteger(k, 2.0, 0)
    with pytest.raises(DomainError):
        fpi_log_integer(k, 0, 0)
    with pytest.raises(DomainError):
        fpi(k, 1.5, -1)
    with pytest.raises(DomainError):
        fpi(k, 1.5, 0, 2.0, epsilon=2.0)
    with pytest.raises(DomainError):
        fpi(const_kernel(), 1.0, 0, math.inf)
    bare = Kernel("bare", lambda z: np.ones_like(z), math.inf, Decay("none"), lambda l: 1.0 if l == 0 else 0.0)
    with pytest.raises(DomainError):
        fpi(bare, 1.5, 0, math.inf)
    assert abs(fpi(bare, 1.5, 0, 2.0).value - (-2 / math.sqrt(2))) < 1e-13


def test_contour_validation():
    with pytest.raises(DomainError):
        KeyholeContour(0.0, 1.0)
    with pytest.raises(DomainError):
        KeyholeContour(1.0, 0.5)
    with pytest.raises(DomainError):
        QuadratureConfig(rel_tol=0)


def test_deterministic():
    k = j0sq_recip_gamma_kernel()
    a = fpi(k, 2.5, 2).value
    b = fpi(j0sq_recip_gamma_kernel(), 2.5, 2).value
    assert a == b


@given(st.integers(0, 4), st.sampled_from([1.3, 2.7, 0.45 + 0.2j]),
       st.sampled_from([2 + 1j, 0.5 - 0.3j, -1.5 + 0.2j, 3.0]))
def test_fn_lambda_derivative_vs_mpmath(n, lam, z):
    lnz = BranchedLog.cut(z)
    L = mp.mpc(lnz.value)
    ref = mp.diff(lambda x: 1 / ((mp.exp(-2j * mp.pi * x) - 1) * mp.exp(x * L)), mp.mpc(lam), n)
    assert rel(fn_lambda_derivative(n, lam, lnz), ref) < 1e-11
    if n == 0:
        assert rel(fn_lambda(lam, lnz), ref) < 1e-13


@given(st.integers(0, 3), st.integers(-1, 3), st.sampled_from([2 + 1j, -1.5 + 0.2j, 3.0]))
def test_fn_lambda_reglim_vs_mpmath(n, b, z):
    # regularized limit = coefficient of h^0 in the Laurent series at b
    lnz = BranchedLog.cut(z)
    L = mp.mpc(lnz.value)
    h = mp.mpf("1e-8")

    def w(x):
        return mp.diff(lambda y: 1 / ((mp.exp(-2j * mp.pi * y) - 1) * mp.exp(y * L)), x, n)

    mp.mp.dps = 60
    try:
        ref = mp.quad(lambda t: w(b + h * 1000 * mp.expj(t)), [0, 2 * mp.pi]) / (2 * mp.pi)
    finally:
        mp.mp.dps = 30
    assert rel(fn_lambda_reglim(n, b, lnz), ref) < 1e-9


def test_integer_kernel_coefficients():
    from fractions import Fraction as F
    assert integer_kernel_coefficients(0) == {0: (F(-1), 1), 1: (F(1), 0)}
    assert integer_kernel_coefficients(1) == {0: (F(1, 3), 2), 1: (F(-1), 1), 2: (F(1, 2), 0)}
    c2 = integer_kernel_coefficients(2)
    assert c2[3] == (F(1, 3), 0) and c2[2] == (F(-1), 1) and c2[1] == (F(2, 3), 2) and c2[0][0] == 0


def test_fn_lambda_pole():
    with pytest.raises(PoleError):
        fn_lambda_derivative(1, 2.0, BranchedLog.cut(1.5))
