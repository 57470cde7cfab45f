"""Keyhole-contour quadrature and finite-part integral evaluators.

The keyhole starts at ``a`` above the cut on the positive axis, runs in to
``epsilon``, circles the origin counter-clockwise and runs back out to ``a``
below the cut.  Integrands are called as ``f(z, lnz)`` with ``lnz`` already on
the right sheet: ``ln t`` on the upper leg, ``ln eps + i theta`` on the circle
and ``ln t + 2 pi i`` on the lower leg.  Powers are formed as
``exp(-lam * lnz)`` so the branch never has to be recovered from ``z``.
"""

from __future__ import annotations

import cmath
import math
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Callable

import numpy as np

from .combinatorics import bernoulli_number, stirling_second
from .errors import ConvergenceError, DomainError, PoleError
from .kernels import Kernel
from .quadrature import EvalCounter, gauss_adaptive, max_evals_from_env, tanh_sinh
from .specialfun import BranchedLog

TWO_PI_I = 2j * math.pi
BranchedIntegrand = Callable[[np.ndarray, np.ndarray], np.ndarray]

LEG_RULES = ("adaptive-gauss", "tanh-sinh")


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-14
    rel_tol: float = 1e-13
    circle_grid_init: int = 8
    leg_rule: str = "adaptive-gauss"
    max_refinements: int = 60
    max_evals: int = field(default_factory=max_evals_from_env)

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.leg_rule not in LEG_RULES:
            raise DomainError(f"leg_rule must be one of {LEG_RULES}")
        if self.circle_grid_init < 1 or self.max_refinements < 1:
            raise DomainError("grid and refinement counts must be positive")

    def key(self) -> tuple:
        return (self.abs_tol, self.rel_tol, self.circle_grid_init, self.leg_rule, self.max_refinements)


@dataclass(frozen=True)
class KeyholeContour:
    """Circle radius ``epsilon``, upper limit ``a`` (may be ``inf``) and tail cut ``tail_T``.

    ``tail_T`` is where the real legs stop when ``a`` is infinite and the
    kernel decays fast enough to truncate; ``None`` means the tail is mapped
    to a finite interval instead (polynomially bounded kernels).
    """

    epsilon: float
    a: float
    tail_T: float | None = None

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if not self.a > self.epsilon:
            raise DomainError("epsilon must lie below the upper limit")
        if math.isinf(self.a) and self.tail_T is not None and self.tail_T < 10 * self.epsilon:
            raise DomainError("tail_T must be at least 10 * epsilon")


@dataclass(frozen=True)
class FpiResult:
    value: complex
    est_error: float
    diagnostics: dict

    def __post_init__(self) -> None:
        if not self.est_error >= 0:
            raise DomainError("est_error must be non-negative")


def default_epsilon(kernel: Kernel, a: float) -> float:
    return min(1.0, 0.5 * a, 0.5 * kernel.rho0)


def tail_cut(kernel: Kernel, a: float, lam_re: float) -> float | None:
    """Truncation abscissa for an infinite upper limit, or ``None`` for a mapped tail."""
    if not math.isinf(a):
        return None
    d = kernel.decay
    if d.kind == "exp":
        return max(40.0, 40.0 / d.rate)
    if d.kind == "recip-gamma":
        return 30.0
    if d.kind == "poly":
        if not lam_re - d.rate > 1:
            raise DomainError(
                f"integral diverges at infinity: kernel grows like t^{d.rate:g} against t^-{lam_re:g}")
        return None
    raise DomainError(f"kernel {kernel.id} has no tail description; use a finite upper limit")


def make_contour(kernel: Kernel, a: float, lam_re: float, epsilon: float | None = None) -> KeyholeContour:
    if not a > 0:
        raise DomainError("upper limit a must be positive")
    eps = default_epsilon(kernel, a) if epsilon is None else float(epsilon)
    if not eps < min(a, kernel.rho0):
        raise DomainError(f"epsilon={eps:g} must be below min(a, rho0)={min(a, kernel.rho0):g}")
    return KeyholeContour(eps, a, tail_cut(kernel, a, lam_re))


def _geometric_breaks(lo: float, hi: float) -> np.ndarray:
    n = max(1, int(math.ceil(math.log2(hi / lo))))
    return np.geomspace(lo, hi, n + 1)


def _tail_start(contour: KeyholeContour) -> float:
    return max(4.0, 8.0 * contour.epsilon)


def real_axis_integral(g: Callable[[np.ndarray], np.ndarray], contour: KeyholeContour,
                       config: QuadratureConfig, counter: EvalCounter) -> tuple[np.ndarray, np.ndarray]:
    """``int_eps^a g(t) dt`` following the contour's truncation or tail mapping."""
    eps, a = contour.epsilon, contour.a
    rule = config.leg_rule
    kw = dict(rel_tol=config.rel_tol, abs_tol=config.abs_tol, counter=counter)
    if not math.isinf(a):
        hi, tail = a, False
    elif contour.tail_T is not None:
        hi, tail = contour.tail_T, False
    else:
        hi, tail = _tail_start(contour), True
    if rule == "tanh-sinh":
        r = tanh_sinh(g, eps, hi, **kw)
    else:
        r = gauss_adaptive(g, _geometric_breaks(eps, hi), max_rounds=config.max_refinements, **kw)
    value, err = r.value, r.error
    if tail:
        c = hi

        def mapped(u):
            t = c / u
            with np.errstate(over="ignore", invalid="ignore"):
                vals = np.asarray(g(t))
                shape = (-1,) + (1,) * (vals.ndim - 1)
                # dt = (c/u^2) du; multiply by t before dividing so far nodes underflow to 0
                out = vals * t.reshape(shape) / u.reshape(shape)
            if not np.all(np.isfinite(out)):
                raise ConvergenceError("tail integrand overflowed; use a finite upper limit")
            return out

        rt = tanh_sinh(mapped, 0.0, 1.0, **kw)
        value, err = value + rt.value, err + rt.error
    return value, err


def _keyhole_parts(integrand: BranchedIntegrand, contour: KeyholeContour, config: QuadratureConfig,
                   counter: EvalCounter) -> tuple[np.ndarray, np.ndarray]:
    eps = contour.epsilon
    ln_eps = math.log(eps)

    def legs(t):
        lt = np.log(t).astype(complex)
        return np.asarray(integrand(t.astype(complex), lt + TWO_PI_I)) - np.asarray(integrand(t.astype(complex), lt))

    def circle(theta):
        e = np.exp(1j * theta)
        z = eps * e
        vals = np.asarray(integrand(z, ln_eps + 1j * theta))
        dz = (1j * z).reshape((-1,) + (1,) * (vals.ndim - 1))
        return vals * dz

    v_legs, e_legs = real_axis_integral(legs, contour, config, counter)
    # the circle integrand is analytic in theta but not periodic (the branch
    # jumps between theta = 0 and 2 pi), so Gauss panels rather than trapezoid
    cb = np.linspace(0.0, 2 * math.pi, config.circle_grid_init + 1)
    rc = gauss_adaptive(circle, cb, rel_tol=config.rel_tol, abs_tol=config.abs_tol, counter=counter,
                        max_rounds=config.max_refinements)
    return v_legs + rc.value, e_legs + rc.error


def keyhole_quadrature(integrand: BranchedIntegrand, contour: KeyholeContour,
                       config: QuadratureConfig | None = None) -> complex | np.ndarray:
    """Integral of ``f(z, ln z)`` around the keyhole.

    ``integrand`` takes complex arrays ``z`` and ``lnz`` and returns values
    with the node index first; extra trailing axes are integrated
    component-wise and returned as an array.
    """
    config = config or QuadratureConfig()
    counter = EvalCounter(config.max_evals)
    value, _ = _keyhole_parts(integrand, contour, config, counter)
    return complex(value) if np.ndim(value) == 0 else value


# ---------------------------------------------------------------------------
# log-power contour integrals I_j = oint k(z) z^{-lam} ln^j z dz, cached

_CACHE: "weakref.WeakKeyDictionary[Kernel, dict]" = weakref.WeakKeyDictionary()


def log_power_integrals(kernel: Kernel, lam: complex, jmax: int, contour: KeyholeContour,
                        config: QuadratureConfig) -> tuple[np.ndarray, np.ndarray, int]:
    """``I_j`` for ``j = 0..jmax`` with error estimates and evaluation count."""
    lam = complex(lam)
    key = (lam, contour, config.key())
    per_kernel = _CACHE.setdefault(kernel, {})
    hit = per_kernel.get(key)
    if hit is not None and hit[0].size > jmax:
        return hit[0][: jmax + 1], hit[1][: jmax + 1], hit[2]
    powers = np.arange(jmax + 1)

    def f(z, lnz):
        base = kernel.evaluate(z) * np.exp(-lam * lnz)
        return base[:, None] * lnz[:, None] ** powers[None, :]

    counter = EvalCounter(config.max_evals)
    value, err = _keyhole_parts(f, contour, config, counter)
    per_kernel[key] = (value, err, counter.used)
    return value, err, counter.used


def _is_integer(lam: complex) -> bool:
    return lam.imag == 0 and lam.real == round(lam.real)


def phase_minus_one(lam: complex, sign: int = -1, offset: complex | None = None) -> complex:
    """``e^{sign 2 pi i lam} - 1`` without cancellation near integer ``lam``.

    ``lam`` is first reduced by its nearest integer (the exponential is
    1-periodic), then ``e^w - 1 = 2 e^{w/2} sinh(w/2)``.  ``offset`` replaces
    the reduced value when the caller holds it more exactly than ``lam``
    (``2 + 1e-6`` as a double has already lost digits of the ``1e-6``).
    """
    lam = complex(lam)
    frac = lam - round(lam.real) if offset is None else complex(offset)
    w = sign * TWO_PI_I * frac
    return 2.0 * cmath.exp(0.5 * w) * cmath.sinh(0.5 * w)


def beta_coefficients(n: int, lam: complex, offset: complex | None = None) -> list[complex]:
    """``beta_j(lam)`` for ``j = 0..n``; combine with ``C(n,j) (2 pi i)^{n-j}`` and ``I_j``."""
    lam = complex(lam)
    if n < 0:
        raise DomainError("log order must be non-negative")
    if _is_integer(lam) or offset == 0:
        raise PoleError("beta coefficients are singular at integer lambda")
    d = phase_minus_one(lam, -1, offset)
    q = d + 1.0
    out = []
    for j in range(n + 1):
        m = n - j
        out.append(sum((-1) ** l * factorial(l) * stirling_second(m, l) * q**l / d ** (l + 1) for l in range(m + 1)))
    return [complex(x) for x in out]


def noninteger_weights(n: int, lam: complex, offset: complex | None = None) -> np.ndarray:
    betas = beta_coefficients(n, lam, offset)
    return np.array([comb(n, j) * TWO_PI_I ** (n - j) * betas[j] for j in range(n + 1)])


def integer_weights(n: int) -> np.ndarray:
    """Weights ``w_j`` (``j = 0..n+1``) with ``FPI = sum_j w_j I_j`` at integer order."""
    w = [comb(n, j) * TWO_PI_I ** (n - j) * float(bernoulli_number(n - j + 1)) / (n - j + 1) for j in range(n + 1)]
    w.append(1.0 / (TWO_PI_I * (n + 1)))
    return np.array(w, dtype=complex)


def _combine(weights: np.ndarray, vals: np.ndarray, errs: np.ndarray) -> tuple[complex, float]:
    terms = weights * vals
    value = complex(np.sum(terms))
    err = float(np.sum(np.abs(weights) * errs) + 16 * np.finfo(float).eps * np.sum(np.abs(terms)))
    return value, err


def _check_order(n: int) -> None:
    if int(n) != n or n < 0:
        raise DomainError("log order must be a non-negative integer")


def fpi_log_noninteger(kernel: Kernel, lam: complex, n: int, a: float = math.inf,
                       config: QuadratureConfig | None = None, epsilon: float | None = None,
                       offset: complex | None = None) -> FpiResult:
    """Finite part of ``int_0^a k(t) ln^n t / t^lam dt`` for non-integer ``lam``.

    For ``Re lam < 1`` the integral converges and the same formula returns
    its ordinary value.  Near an integer the result is as sensitive to
    ``lam`` as ``1/(lam - b)``; pass the exact ``offset = lam - b`` when it
    is known to more digits than ``lam`` carries.
    """
    config = config or QuadratureConfig()
    lam = complex(lam)
    _check_order(n)
    if _is_integer(lam):
        raise DomainError("integer lambda: use fpi_log_integer")
    kernel.require_nonzero_origin()
    contour = make_contour(kernel, a, lam.real, epsilon)
    vals, errs, evals = log_power_integrals(kernel, lam, n, contour, config)
    value, err = _combine(noninteger_weights(n, lam, offset), vals, errs)
    return FpiResult(value, err, {"method": "contour-noninteger", "epsilon": contour.epsilon,
                                  "tail_T": contour.tail_T, "evals": evals, "series_terms": 0})


def fpi_log_integer(kernel: Kernel, b: int, n: int, a: float = math.inf,
                    config: QuadratureConfig | None = None, epsilon: float | None = None) -> FpiResult:
    """Finite part of ``int_0^a k(t) ln^n t / t^b dt`` for a positive integer ``b``."""
    config = config or QuadratureConfig()
    _check_order(n)
    if int(b) != b or b < 1:
        raise DomainError("b must be a positive integer")
    b = int(b)
    kernel.require_nonzero_origin()
    contour = make_contour(kernel, a, float(b), epsilon)
    vals, errs, evals = log_power_integrals(kernel, complex(b), n + 1, contour, config)
    value, err = _combine(integer_weights(n), vals, errs)
    return FpiResult(value, err, {"method": "contour-integer", "epsilon": contour.epsilon,
                                  "tail_T": contour.tail_T, "evals": evals, "series_terms": 0})


def fpi(kernel: Kernel, lam: complex, n: int, a: float = math.inf,
        config: QuadratureConfig | None = None, epsilon: float | None = None) -> FpiResult:
    """Dispatch to the integer or non-integer evaluator."""
    lam = complex(lam)
    if _is_integer(lam) and lam.real >= 1:
        return fpi_log_integer(kernel, int(lam.real), n, a, config, epsilon)
    return fpi_log_noninteger(kernel, lam, n, a, config, epsilon)


# ---------------------------------------------------------------------------
# epsilon-subtraction definition


def power_log_antiderivative(s: complex, n: int, eps: float) -> complex:
    """``F(eps)`` for the antiderivative of ``t^s ln^n t`` whose finite part at 0 is 0.

    ``s = -1`` gives ``ln^{n+1} eps / (n+1)``; otherwise
    ``eps^{s+1} sum_m (-1)^{n-m} n!/m! ln^m eps / (s+1)^{n-m+1}``.
    """
    le = math.log(eps)
    if s == -1:
        return le ** (n + 1) / (n + 1)
    p = complex(s) + 1
    acc = sum((-1) ** (n - m) * factorial(n) / factorial(m) * le**m / p ** (n - m + 1) for m in range(n + 1))
    return complex(np.exp(p * le) * acc)


def divergent_term(a_l: complex, l: int, lam: complex, n: int, eps: float) -> complex:
    """Contribution of ``a_l t^l`` to the divergent part at ``eps``.

    Off the collision this is ``(-1)^n d^n/dlam^n [eps^{l-lam+1}/(lam-l-1)]``
    written out in closed form; at ``lam = l + 1`` it is the logarithmic term
    ``-ln^{n+1} eps / (n+1)``.
    """
    lam = complex(lam)
    if lam == l + 1:
        return -a_l * math.log(eps) ** (n + 1) / (n + 1)
    le = math.log(eps)
    d = lam - l - 1
    pw = complex(np.exp((l - lam + 1) * le))
    acc = sum(comb(n, m) * le**m * factorial(n - m) / d ** (n - m + 1) for m in range(n + 1))
    return a_l * pw * acc


def divergent_part(kernel: Kernel, lam: complex, n: int, eps: float) -> complex:
    """``D_eps``: the terms ``l = 0..floor(Re lam - 1)`` that blow up as ``eps -> 0``."""
    lam = complex(lam)
    _check_order(n)
    if not eps < kernel.rho0:
        raise DomainError("eps must lie inside the kernel's disk of analyticity")
    top = math.floor(lam.real - 1)
    return complex(sum((divergent_term(kernel.taylor(l), l, lam, n, eps) for l in range(top + 1)), 0j))


def _taylor_remainder(kernel: Kernel, lam: complex, n: int, eps: float, start: int,
                      max_terms: int = 400) -> tuple[complex, int]:
    # sum_{l >= start} of the same terms; each vanishes as eps -> 0 but their sum
    # makes the eps-identity exact for any eps < rho0
    # numerically derived coefficients may hide short runs of zeros, so ask for a longer quiet run
    quiet = 3 if kernel.taylor_exact is not None else 8
    if kernel.taylor_exact is None:
        # coefficients from a circle wider than eps, so their rounding decays like (eps/r)^l
        r = max(1.0, 2 * eps) if math.isinf(kernel.rho0) else 0.5 * (eps + kernel.rho0)
        coef = kernel.taylor_on_circle(r, start + max_terms).__getitem__
    else:
        coef = kernel.taylor
    total = 0j
    small = 0
    for l in range(start, start + max_terms):
        t = divergent_term(coef(l), l, lam, n, eps)
        total += t
        if abs(t) <= 1e-17 * max(abs(total), 1e-300):
            small += 1
            if small >= quiet:
                return total, l - start + 1
        else:
            small = 0
    raise ConvergenceError("Taylor remainder of the eps-identity did not converge")


def epsilon_sample(kernel: Kernel, lam: complex, n: int, a: float, eps: float,
                   config: QuadratureConfig, counter: EvalCounter, remainder: bool = True) -> tuple[complex, float, int]:
    """``C_eps = int_eps^a k ln^n t / t^lam dt - D_eps`` (optionally with the vanishing tail)."""
    lam = complex(lam)
    contour = KeyholeContour(eps, a, tail_cut(kernel, a, lam.real))

    def g(t):
        lt = np.log(t)
        return kernel.evaluate(t.astype(complex)) * np.exp(-lam * lt) * lt**n

    val, err = real_axis_integral(g, contour, config, counter)
    c = complex(val) - divergent_part(kernel, lam, n, eps)
    terms = 0
    if remainder:
        r, terms = _taylor_remainder(kernel, lam, n, eps, math.floor(lam.real - 1) + 1)
        c -= r
    return c, float(err), terms


def fpi_epsilon_oracle(kernel: Kernel, lam: complex, n: int, a: float = math.inf,
                       config: QuadratureConfig | None = None, epsilon: float | None = None,
                       remainder: bool = True, levels: int = 8, tol: float = 1e-10) -> FpiResult:
    """Finite part from its definition on ``eps_j = eps_0 2^{-j}``.

    With ``remainder=True`` the vanishing Taylor terms are subtracted too,
    so every sample is already the limit and the sequence only has to agree
    with itself.  With ``remainder=False`` the samples carry an
    ``O(eps^{floor(Re lam) - lam + 1})`` error that Richardson extrapolation
    removes for non-integer ``lam`` at log order 0.
    """
    config = config or QuadratureConfig()
    lam = complex(lam)
    _check_order(n)
    kernel.require_nonzero_origin()
    eps0 = default_epsilon(kernel, a) if epsilon is None else float(epsilon)
    if not eps0 < min(a, kernel.rho0):
        raise DomainError("epsilon must lie below min(a, rho0)")
    counter = EvalCounter(config.max_evals)
    samples: list[complex] = []
    errs: list[float] = []
    terms = 0
    richardson = (not remainder) and n == 0 and not _is_integer(lam)
    p = math.floor(lam.real) - lam.real + 1 if richardson else None
    best = None
    for j in range(levels + 1):
        eps = eps0 * 2.0**-j
        c, e, terms = epsilon_sample(kernel, lam, n, a, eps, config, counter, remainder)
        samples.append(c)
        errs.append(e)
        if richardson and j >= 1:
            r = 2.0**p
            est = (r * samples[-1] - samples[-2]) / (r - 1)
            if best is not None and abs(est - best) <= tol * max(abs(est), 1.0):
                return FpiResult(est, abs(est - best) + e, _eps_diag(eps0, eps, j + 1, counter, terms))
            best = est
        elif not richardson and j >= 1:
            if abs(samples[-1] - samples[-2]) <= tol * max(abs(samples[-1]), 1.0):
                return FpiResult(samples[-1], abs(samples[-1] - samples[-2]) + e,
                                 _eps_diag(eps0, eps, j + 1, counter, terms))
    raise ConvergenceError(f"eps-sequence did not stabilize (last samples {samples[-2]:.12g}, {samples[-1]:.12g})")


def _eps_diag(eps0: float, eps: float, count: int, counter: EvalCounter, terms: int) -> dict:
    return {"method": "epsilon-oracle", "epsilon": eps, "epsilon_start": eps0, "samples": count,
            "tail_T": None, "evals": counter.used, "series_terms": terms}


# ---------------------------------------------------------------------------
# f(lam) = 1 / ((e^{-2 pi i lam} - 1) z^lam) and its lam-derivatives


def fn_lambda(lam: complex, lnz: BranchedLog) -> complex:
    lam = complex(lam)
    return 1.0 / (phase_minus_one(lam, -1) * lnz.power(lam))


def fn_lambda_derivative(n: int, lam: complex, lnz: BranchedLog) -> complex:
    """``d^n/dlam^n`` of ``1/((e^{-2 pi i lam} - 1) z^lam)`` at non-integer ``lam``."""
    lam = complex(lam)
    _check_order(n)
    if _is_integer(lam):
        raise PoleError("integer lambda: use fn_lambda_reglim")
    L = lnz.value
    r = 1.0 / phase_minus_one(lam, 1)
    total = 0j
    for j in range(n + 1):
        m = n - j
        inner = sum(factorial(l) * stirling_second(m, l) * r**l for l in range(m + 1))
        total += comb(n, j) * TWO_PI_I**m * L**j * inner
    return complex((-1) ** n * total * fn_lambda(lam, lnz))


def integer_kernel_coefficients(n: int) -> dict[int, tuple[Fraction, int]]:
    """Exact coefficients of the integer-order log kernel.

    The kernel is ``K_n(L) = L^{n+1}/(n+1) + sum_j C(n,j) (2 pi i)^{n-j+1}
    B_{n-j+1}/(n-j+1) L^j``; entry ``j`` is ``(c, m)`` meaning ``c (pi i)^m``.
    ``fn_lambda_reglim(n, b, lnz) = (-1)^n K_n(ln z) / (2 pi i z^b)``.
    """
    _check_order(n)
    out = {n + 1: (Fraction(1, n + 1), 0)}
    for j in range(n + 1):
        m = n - j + 1
        c = comb(n, j) * Fraction(2) ** m * bernoulli_number(m) / m
        out[j] = (c, m)
    return dict(sorted(out.items()))


def fn_lambda_reglim(n: int, b: int, lnz: BranchedLog) -> complex:
    """Regularized limit of ``fn_lambda_derivative(n, lam, lnz)`` as ``lam -> b``."""
    _check_order(n)
    if int(b) != b:
        raise DomainError("b must be an integer")
    L = lnz.value
    k = 0j
    for j, (c, m) in integer_kernel_coefficients(n).items():
        k += float(c) * (1j * math.pi) ** m * L**j
    return complex((-1) ** n * k / (TWO_PI_I * lnz.power(int(b))))
