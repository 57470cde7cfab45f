import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from finpart.errors import DomainError, PoleError, RangeError
from finpart.specialfun import (BranchedLog, bessel_j0, complex_gamma, csc_derivative, digamma, gauss_2f1,
                                gauss_2f1_db, log_gamma, pochhammer, polygamma, reciprocal_gamma, sec_derivative,
                                zeta_integer)

mp.mp.dps = 30

re_part = st.floats(-8, 8).filter(lambda x: abs(x - round(x)) > 1e-3)
im_part = st.floats(-6, 6)


def rel(x, ref):
    return abs(complex(x) - complex(ref)) / max(abs(complex(ref)), 1e-300)


def test_gamma_frozen():
    assert rel(complex_gamma(0.5), math.sqrt(math.pi)) < 1e-15
    assert rel(complex_gamma(-0.5), -2 * math.sqrt(math.pi)) < 1e-14
    assert complex_gamma(5.0) == pytest.approx(24.0, rel=1e-15)


@given(re_part, im_part)
def test_gamma_vs_mpmath(x, y):
    z = complex(x, y)
    assert rel(complex_gamma(z), mp.gamma(mp.mpc(x, y))) < 5e-13


@given(re_part, im_part)
def test_reciprocal_gamma_vs_mpmath(x, y):
    z = complex(x, y)
    assert rel(reciprocal_gamma(z), mp.rgamma(mp.mpc(x, y))) < 5e-13


def test_reciprocal_gamma_zero_at_poles():
    assert reciprocal_gamma(np.array([0.0, -1.0, -7.0])).tolist() == [0, 0, 0]


@given(st.floats(0.1, 30), im_part)
def test_log_gamma_vs_mpmath(x, y):
    assert abs(log_gamma(complex(x, y)) - complex(mp.loggamma(mp.mpc(x, y)))) < 1e-12 * max(1, abs(x) + abs(y))


@given(st.integers(0, 4), re_part, im_part)
def test_polygamma_vs_mpmath(j, x, y):
    assert rel(polygamma(j, complex(x, y)), mp.polygamma(j, mp.mpc(x, y))) < 1e-11


def test_digamma_frozen():
    assert digamma(1.0) == pytest.approx(-0.5772156649015329, abs=1e-15)


def test_polygamma_poles():
    with pytest.raises(PoleError):
        polygamma(1, -2.0)
    with pytest.raises(PoleError):
        complex_gamma(0.0)


@given(re_part, im_part)
def test_gamma_reflection(x, y):
    z = complex(x, y)
    if abs(y) > 4:
        return
    lhs = complex_gamma(z) * complex_gamma(1 - z)
    assert rel(lhs, math.pi / np.sin(math.pi * z)) < 1e-12


@pytest.mark.parametrize("s", [2, 3, 4, 5, 7, 10])
def test_zeta_integer(s):
    assert rel(zeta_integer(s), mp.zeta(s)) < 1e-15


@given(st.floats(0, 36), st.floats(-3, 3))
def test_bessel_j0_vs_mpmath(x, y):
    z = complex(x, y)
    ref = complex(mp.besselj(0, mp.mpc(x, y)))
    # absolute accuracy is what the series gives near zeros of J0
    assert abs(bessel_j0(z) - ref) < 2e-15 * max(1.0, abs(ref))


def test_bessel_range():
    with pytest.raises(RangeError):
        bessel_j0(41.0)


def test_pochhammer():
    assert pochhammer(0.5, 3) == pytest.approx(0.5 * 1.5 * 2.5)
    assert pochhammer(2.0, 0) == 1


@given(st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.5, 4), st.floats(-0.9, 0.9))
def test_2f1_vs_mpmath(a, b, c, z):
    assert rel(gauss_2f1(a, b, c, z), mp.hyp2f1(a, b, c, z)) < 1e-12


@given(st.integers(1, 2), st.floats(0.1, 2), st.floats(0.5, 3), st.floats(-0.8, 0.8))
def test_2f1_parameter_derivative(order, a, b, z):
    c = 2.0
    ref = mp.diff(lambda bb: mp.hyp2f1(a, bb, c, z), b, order)
    assert abs(gauss_2f1_db(order, a, b, c, z) - complex(ref)) < 1e-11 * max(1, abs(complex(ref)))


def test_2f1_domain():
    with pytest.raises(DomainError):
        gauss_2f1(0.5, 1, 2, -2.0)


@given(st.integers(0, 5), st.floats(0.05, 0.95))
def test_sec_derivative(j, nu):
    ref = mp.diff(lambda x: mp.sec(mp.pi * x / 2), nu, j)
    assert rel(sec_derivative(j, nu), ref) < 1e-11 or abs(complex(ref)) < 1e-12


@given(st.integers(0, 5), st.floats(0.05, 0.95))
def test_csc_derivative(j, nu):
    ref = mp.diff(lambda x: mp.csc(mp.pi * x / 2), nu, j)
    assert rel(csc_derivative(j, nu), ref) < 1e-11 or abs(complex(ref)) < 1e-12


def test_sec_pole():
    with pytest.raises(PoleError):
        sec_derivative(0, 1.0)


def test_branched_log():
    lower = BranchedLog.cut(complex(-1.0, -0.0))
    assert BranchedLog.cut(1j).arg == pytest.approx(math.pi / 2)
    assert BranchedLog.cut(-1j).arg == pytest.approx(3 * math.pi / 2)
    assert BranchedLog.principal(-1j).arg == pytest.approx(-math.pi / 2)
    assert 0 <= lower.arg < 2 * math.pi
    z = 0.3 - 0.4j
    assert abs(BranchedLog.cut(z).point - z) < 1e-15
    assert abs(BranchedLog.principal(z).power(0.5) - np.sqrt(z)) < 1e-15
    with pytest.raises(PoleError):
        BranchedLog.cut(0)
