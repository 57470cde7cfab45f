"""Generalized Stieltjes transform ``int_0^a k(t) ln^n t / (t^nu (omega^2 + t^2)) dt``.

For small ``|omega|`` the transform splits into a power series in ``omega^2``
whose coefficients are finite-part integrals, plus two residue-like terms
``Delta_{n1}`` and ``Delta_{n2}`` weighted by the even and odd parts of the
kernel at ``+-i omega``.  ``Log`` below is the principal logarithm and
``omega^{-nu}`` its principal power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .combinatorics import bernoulli_number, euler_number
from .contour import (FpiResult, KeyholeContour, QuadratureConfig, default_epsilon, fpi_log_integer,
                      fpi_log_noninteger, real_axis_integral, tail_cut)
from .errors import DivergenceError, DomainError
from .kernels import Kernel
from .quadrature import EvalCounter, tanh_sinh
from .specialfun import BranchedLog, csc_derivative, sec_derivative

SERIES_CAP = 60


@dataclass(frozen=True)
class StieltjesProblem:
    kernel: Kernel
    nu: float
    n: int
    omega: complex
    a: float = math.inf
    series_domain: bool = True

    def __post_init__(self) -> None:
        """``series_domain=False`` admits ``|omega| >= min(a, rho0)`` for the direct oracle only."""
        if not 0 <= self.nu < 1:
            raise DomainError("nu must lie in [0, 1)")
        if int(self.n) != self.n or self.n < 0:
            raise DomainError("log order must be a non-negative integer")
        if not self.a > 0:
            raise DomainError("upper limit a must be positive")
        _check_omega(self.omega)
        if self.series_domain:
            _check_series_domain(self)
        self.kernel.require_nonzero_origin()


@dataclass(frozen=True)
class SeriesDiagnostics:
    terms: int
    last_term: float
    ratio: float


def _check_omega(omega: complex) -> BranchedLog:
    omega = complex(omega)
    if omega == 0:
        raise DomainError("omega must be nonzero")
    log = BranchedLog.principal(omega)
    if abs(abs(log.arg) - math.pi / 2) < 1e-12:
        raise DomainError("Arg omega = +-pi/2 is excluded")
    return log


def _check_series_domain(problem: "StieltjesProblem") -> None:
    if not abs(problem.omega) < min(problem.a, problem.kernel.rho0):
        raise DomainError("series needs |omega| < min(a, rho0)")


def series_epsilon(problem: "StieltjesProblem") -> float:
    """Keyhole radius for the FPI series terms.

    Term ``k`` carries rounding of order ``eps^{-2k}``, so its weight
    ``omega^{2k}`` only damps it when ``|omega| < eps < min(a, rho0)``.
    """
    w = abs(problem.omega)
    R = min(problem.a, problem.kernel.rho0)
    eps = max(default_epsilon(problem.kernel, problem.a), 2 * w)
    if math.isfinite(R):
        eps = min(eps, 0.5 * (w + R))
    return eps


def _check_nu_open(nu: float) -> None:
    if not 0 < nu < 1:
        raise DomainError("nu must lie in (0, 1); use the nu = 0 variants at the boundary")


def _delta(nu: float, omega: complex, n: int, deriv) -> complex:
    _check_nu_open(nu)
    L = _check_omega(omega)
    pref = math.pi / 2 * L.power(-(nu + 1))
    s = sum((-1) ** j * comb(n, j) * L.value ** (n - j) * deriv(j, nu) for j in range(n + 1))
    return complex(pref * s)


def delta_n1(nu: float, omega: complex, n: int) -> complex:
    """``Delta_{n1}``: sec-derivative sum ``pi/(2 omega^{nu+1}) sum (-1)^j C(n,j) Log^{n-j} omega sec^{(j)}``."""
    return _delta(nu, omega, n, sec_derivative)


def delta_n2(nu: float, omega: complex, n: int) -> complex:
    """``Delta_{n2}``: the csc counterpart of :func:`delta_n1`."""
    return _delta(nu, omega, n, csc_derivative)


def delta_n1_nu0(omega: complex, n: int) -> complex:
    """``Delta_{n1}`` at ``nu = 0`` through Euler numbers."""
    L = _check_omega(omega).value
    s = sum((-1) ** j / (factorial(n - 2 * j) * factorial(2 * j)) * (math.pi / 2) ** (2 * j + 1)
            * euler_number(2 * j) * L ** (n - 2 * j) for j in range(n // 2 + 1))
    return complex(factorial(n) / complex(omega) * s)


def delta_n2_nu0(omega: complex, n: int) -> complex:
    """Regularized ``Delta_{n2}`` at ``nu = 0`` through Bernoulli numbers."""
    L = _check_omega(omega).value
    w = complex(omega)
    head = -L ** (n + 1) / (w * (n + 1))
    s = sum((-1) ** j * (2 ** (2 * j) - 2) / (factorial(n - 2 * j + 1) * factorial(2 * j))
            * (math.pi / 2) ** (2 * j) * float(bernoulli_number(2 * j)) * L ** (n - 2 * j + 1)
            for j in range(1, (n + 1) // 2 + 1))
    return complex(head + factorial(n) / w * s)


def _residue_part(problem: StieltjesProblem, d1: complex, d2: complex) -> complex:
    k = problem.kernel
    kp = k(1j * complex(problem.omega))
    km = k(-1j * complex(problem.omega))
    return 0.5 * (kp + km) * d1 - 0.5j * (kp - km) * d2


def _series(problem: StieltjesProblem, config: QuadratureConfig, rest: complex,
            fpi_term) -> tuple[complex, float, SeriesDiagnostics, int]:
    w2 = complex(problem.omega) ** 2
    total = 0j
    err = 0.0
    evals = 0
    prev_fpi = None
    ratio = 0.0
    for k in range(SERIES_CAP):
        r: FpiResult = fpi_term(k)
        evals += r.diagnostics.get("evals", 0)
        term = (-1) ** k * w2**k * r.value
        total += term
        err += abs(w2) ** k * r.est_error
        if prev_fpi is not None and abs(prev_fpi) > 0:
            ratio = abs(w2) * abs(r.value) / abs(prev_fpi)
        prev_fpi = r.value
        scale = max(abs(total), abs(total + rest))
        if k >= 1 and abs(term) <= config.rel_tol * scale + config.abs_tol:
            return total, err + abs(term), SeriesDiagnostics(k + 1, abs(term), ratio), evals
        if k >= 4 and ratio >= 1:
            raise DivergenceError(f"FPI series is not contracting (ratio {ratio:.3g}); |omega| is too large")
    raise DivergenceError(f"FPI series did not settle in {SERIES_CAP} terms (ratio {ratio:.3g})")


def _effective_radius(problem: StieltjesProblem) -> float:
    return min(problem.a, problem.kernel.rho0)


def stieltjes_log(problem: StieltjesProblem, config: QuadratureConfig | None = None,
                  epsilon: float | None = None) -> FpiResult:
    """Transform for ``0 < nu < 1``: FPI series plus the ``Delta`` terms."""
    config = config or QuadratureConfig()
    _check_nu_open(problem.nu)
    _check_series_domain(problem)
    epsilon = series_epsilon(problem) if epsilon is None else epsilon
    d1 = delta_n1(problem.nu, problem.omega, problem.n)
    d2 = delta_n2(problem.nu, problem.omega, problem.n)
    rest = _residue_part(problem, d1, d2)

    def term(k):
        return fpi_log_noninteger(problem.kernel, problem.nu + 2 * k + 2, problem.n, problem.a, config, epsilon,
                                  offset=problem.nu)

    total, err, diag, evals = _series(problem, config, rest, term)
    value = total + rest
    err += 16 * np.finfo(float).eps * (abs(total) + abs(rest))
    return FpiResult(value, err, _diag(problem, diag, evals, d1, d2, epsilon))


def stieltjes_log_nu0(problem: StieltjesProblem, config: QuadratureConfig | None = None,
                      epsilon: float | None = None) -> FpiResult:
    """Transform at ``nu = 0`` with integer-order FPIs and regularized ``Delta`` terms."""
    config = config or QuadratureConfig()
    if problem.nu != 0:
        raise DomainError("stieltjes_log_nu0 needs nu = 0")
    _check_series_domain(problem)
    epsilon = series_epsilon(problem) if epsilon is None else epsilon
    d1 = delta_n1_nu0(problem.omega, problem.n)
    d2 = delta_n2_nu0(problem.omega, problem.n)
    rest = _residue_part(problem, d1, d2)

    def term(k):
        return fpi_log_integer(problem.kernel, 2 * k + 2, problem.n, problem.a, config, epsilon)

    total, err, diag, evals = _series(problem, config, rest, term)
    value = total + rest
    err += 16 * np.finfo(float).eps * (abs(total) + abs(rest))
    return FpiResult(value, err, _diag(problem, diag, evals, d1, d2, epsilon))


def stieltjes(problem: StieltjesProblem, config: QuadratureConfig | None = None) -> FpiResult:
    if problem.nu == 0:
        return stieltjes_log_nu0(problem, config)
    return stieltjes_log(problem, config)


def _diag(problem: StieltjesProblem, s: SeriesDiagnostics, evals: int, d1: complex, d2: complex,
          epsilon: float) -> dict:
    rho = _effective_radius(problem)
    expected = (abs(problem.omega) / rho) ** 2 if math.isfinite(rho) else 0.0
    return {"method": "series", "series": {"terms": s.terms, "last_term": s.last_term, "ratio": s.ratio,
                                           "expected_ratio": expected},
            "delta_n1": d1, "delta_n2": d2, "epsilon": epsilon, "evals": evals}


def stieltjes_leading_asymptotic(problem: StieltjesProblem) -> complex:
    """``k(0) Delta_{n1}``, the small-``omega`` leading term."""
    k0 = problem.kernel.taylor(0)
    if problem.nu == 0:
        return k0 * delta_n1_nu0(problem.omega, problem.n)
    return k0 * delta_n1(problem.nu, problem.omega, problem.n)


def stieltjes_direct_oracle(problem: StieltjesProblem, config: QuadratureConfig | None = None) -> complex:
    """Direct quadrature of the transform on the real axis.

    Certified for real ``omega > 0``.  For complex ``omega`` with
    ``|Arg omega| < pi/2`` the same real-axis integral is the analytic
    continuation, which is how rotated arguments are checked.
    """
    config = config or QuadratureConfig()
    omega = complex(problem.omega)
    L = _check_omega(omega)
    if abs(L.arg) > math.pi / 2:
        raise DomainError("direct oracle needs Re omega > 0")
    k, nu, n, a = problem.kernel, problem.nu, problem.n, problem.a
    w2 = omega * omega
    counter = EvalCounter(config.max_evals)

    def g(t):
        t = np.asarray(t, dtype=float)
        lt = np.log(t)
        return k.evaluate(t.astype(complex)) * lt**n * np.exp(-nu * lt) / (w2 + t * t)

    c = min(abs(omega), a)
    head = tanh_sinh(g, 0.0, c, rel_tol=config.rel_tol, abs_tol=config.abs_tol, counter=counter)
    value = complex(head.value)
    if c < a:
        contour = KeyholeContour(c, a, tail_cut(k, a, nu + 2.0))
        v, _ = real_axis_integral(g, contour, config, counter)
        value += complex(v)
    return value
