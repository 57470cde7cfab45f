"""Quadrature rules shared by the contour, reglim and stieltjes modules.

Integrands are vectorized: they take a 1-d array of nodes and return an array
whose first axis runs over the nodes.  Trailing axes are carried along, so one
call can integrate several related functions (e.g. every power of ``ln z``)
over the same nodes.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from math import factorial
from typing import Callable

import numpy as np

from .errors import BudgetExceeded, ConvergenceError, DomainError

Integrand = Callable[[np.ndarray], np.ndarray]

DEFAULT_MAX_EVALS = 20_000_000
_EPS = np.finfo(float).eps


def max_evals_from_env() -> int:
    raw = os.environ.get("FINPART_MAX_EVALS")
    if raw is None:
        return DEFAULT_MAX_EVALS
    try:
        value = int(raw)
    except ValueError as exc:
        raise DomainError(f"FINPART_MAX_EVALS must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise DomainError("FINPART_MAX_EVALS must be positive")
    return value


@dataclass
class EvalCounter:
    """Running count of integrand evaluations against a hard cap."""

    limit: int = field(default_factory=max_evals_from_env)
    used: int = 0

    def charge(self, n: int) -> None:
        self.used += n
        if self.used > self.limit:
            raise BudgetExceeded(f"function-evaluation budget of {self.limit} exhausted")


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray
    error: np.ndarray
    evals: int


_GL_HI = np.polynomial.legendre.leggauss(20)
_GL_LO = np.polynomial.legendre.leggauss(10)


def _tolerance(total: np.ndarray, rel_tol: float, abs_tol: float) -> np.ndarray:
    return np.maximum(abs_tol, rel_tol * np.abs(total))


def gauss_adaptive(
    f: Integrand,
    breakpoints,
    *,
    rel_tol: float = 1e-13,
    abs_tol: float = 1e-15,
    counter: EvalCounter | None = None,
    max_rounds: int = 60,
    min_width_rel: float = 1e-13,
) -> QuadResult:
    """Globally adaptive 20-point Gauss-Legendre with a 10-point error estimate.

    ``breakpoints`` is an increasing sequence; each gap starts as one panel.
    Every round re-evaluates only the freshly bisected panels, all in one
    vectorized integrand call.  The per-panel error is the Gauss-20/Gauss-10
    difference, floored at the rounding level of the panel sum.
    """
    counter = counter or EvalCounter()
    pts = np.asarray(breakpoints, dtype=float)
    if pts.ndim != 1 or pts.size < 2 or np.any(np.diff(pts) <= 0):
        raise DomainError("breakpoints must be a strictly increasing sequence")
    xh, wh = _GL_HI
    xl, wl = _GL_LO
    span = pts[-1] - pts[0]

    def panel_values(lo: np.ndarray, hi: np.ndarray):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes = np.concatenate([(mid[:, None] + half[:, None] * xh).ravel(), (mid[:, None] + half[:, None] * xl).ravel()])
        counter.charge(nodes.size)
        vals = np.asarray(f(nodes))
        npan = lo.size
        vh = vals[: npan * 20].reshape((npan, 20) + vals.shape[1:])
        vl = vals[npan * 20:].reshape((npan, 10) + vals.shape[1:])
        sh = np.einsum("k,pk...->p...", wh, vh)
        sl = np.einsum("k,pk...->p...", wl, vl)
        sabs = np.einsum("k,pk...->p...", wh, np.abs(vh))
        hw = half.reshape((npan,) + (1,) * (vals.ndim - 1))
        floor = 64 * _EPS * np.abs(hw) * sabs
        return hw * sh, np.maximum(np.abs(hw * (sh - sl)), floor), floor

    lo = pts[:-1].copy()
    hi = pts[1:].copy()
    val, err, floor = panel_values(lo, hi)
    rounds = 0
    while True:
        total = val.sum(axis=0)
        tot_err = err.sum(axis=0)
        tol = _tolerance(total, rel_tol, abs_tol)
        if np.all(tot_err <= tol):
            break
        scale = err / tol
        score = scale.reshape(scale.shape[0], -1).max(axis=1)
        fscore = (floor / tol).reshape(scale.shape[0], -1).max(axis=1)
        width = hi - lo
        splittable = (score > 1.05 * fscore) & (width > min_width_rel * max(span, 1.0) * 1e-3) & (
            width > min_width_rel * np.maximum(np.abs(lo), np.abs(hi)))
        if not np.any(splittable):
            break
        rounds += 1
        if rounds > max_rounds:
            raise ConvergenceError(
                f"adaptive Gauss did not reach tolerance after {max_rounds} rounds "
                f"(estimated error {float(np.max(tot_err)):.3g})")
        cut = 0.1 * score[splittable].max()
        pick = splittable & (score >= cut)
        keep = ~pick
        m = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], m])
        new_hi = np.concatenate([m, hi[pick]])
        nv, ne, nf = panel_values(new_lo, new_hi)
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        floor = np.concatenate([floor[keep], nf])
    order = np.argsort(lo, kind="stable")
    # fixed left-to-right reduction for reproducibility
    value = np.sum(val[order], axis=0)
    return QuadResult(value, err.sum(axis=0), counter.used)


def tanh_sinh(
    f: Integrand,
    a: float,
    b: float,
    *,
    rel_tol: float = 1e-13,
    abs_tol: float = 1e-15,
    counter: EvalCounter | None = None,
    max_level: int = 12,
    s_max: float = 6.0,
) -> QuadResult:
    """Double-exponential rule on ``[a, b]`` for endpoint singularities.

    Nodes next to an endpoint are built from the endpoint distance so they
    never round onto the endpoint itself.  The step halves until two levels
    agree.
    """
    if not (b > a):
        raise DomainError("tanh_sinh needs a < b")
    counter = counter or EvalCounter()
    width = b - a

    def level_sum(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u = 0.5 * math.pi * np.sinh(s)
        # distance from the nearer endpoint: width / (1 + e^{2|u|})
        e = np.exp(-2.0 * np.abs(u))
        d = width * e / (1.0 + e)
        x = np.where(s < 0, a + d, b - d)
        w = width * 0.5 * math.pi * np.cosh(s) * e / (1.0 + e) ** 2 * 2.0
        ok = d > 0
        x, w = x[ok], w[ok]
        counter.charge(x.size)
        vals = np.asarray(f(x))
        wv = w.reshape((-1,) + (1,) * (vals.ndim - 1))
        return np.sum(wv * vals, axis=0), np.sum(wv * np.abs(vals), axis=0)

    h = 1.0
    s = np.arange(-s_max, s_max + h / 2, h)
    total, tabs = level_sum(s)
    prev = h * total
    for _ in range(max_level):
        h /= 2
        s = np.arange(-s_max + h, s_max, 2 * h)
        add, aabs = level_sum(s)
        total = total + add
        tabs = tabs + aabs
        cur = h * total
        diff = np.abs(cur - prev)
        floor = 64 * _EPS * h * tabs
        if np.all(diff <= np.maximum(_tolerance(cur, rel_tol, abs_tol), floor)):
            # convergence is quadratic in the level, so the next difference is tiny
            return QuadResult(cur, np.maximum(diff * diff / np.maximum(np.abs(cur), 1e-300), floor), counter.used)
        prev = cur
    raise ConvergenceError(f"tanh-sinh did not converge (last change {float(np.max(diff)):.3g})")


def circle_nodes(center: complex, radius: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Equispaced points on a circle and the unit-modulus factors ``e^{i theta}``."""
    theta = 2 * math.pi * np.arange(n) / n
    e = np.exp(1j * theta)
    return center + radius * e, e


def cauchy_taylor(
    f: Integrand,
    center: complex,
    radius: float,
    kmax: int,
    *,
    tol: float = 1e-13,
    grid: int = 64,
    max_grid: int = 2**16,
) -> np.ndarray:
    """Taylor coefficients ``c_0..c_kmax`` of ``f`` about ``center`` by FFT on a circle.

    The grid doubles until the requested coefficients stop moving.  ``f``
    must be analytic on a disk a bit larger than ``radius``.
    """
    if radius <= 0:
        raise DomainError("radius must be positive")
    n = max(grid, 2 * (kmax + 1))
    prev = None
    while n <= max_grid:
        z, _ = circle_nodes(center, radius, n)
        vals = np.asarray(f(z), dtype=complex)
        c = np.fft.fft(vals) / n
        coeffs = c[: kmax + 1] / radius ** np.arange(kmax + 1)
        if prev is not None:
            scale = np.max(np.abs(coeffs) * radius ** np.arange(kmax + 1))
            if np.max(np.abs(coeffs - prev) * radius ** np.arange(kmax + 1)) <= tol * max(scale, 1e-300):
                return coeffs
        prev = coeffs
        n *= 2
    raise ConvergenceError("Cauchy-FFT coefficients did not settle within the grid cap")


def cauchy_derivatives(f: Integrand, center: complex, radius: float, kmax: int, **kw) -> np.ndarray:
    """``f^{(k)}(center)`` for ``k = 0..kmax`` from :func:`cauchy_taylor`."""
    c = cauchy_taylor(f, center, radius, kmax, **kw)
    return c * np.array([float(factorial(k)) for k in range(kmax + 1)])
