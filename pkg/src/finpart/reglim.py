"""Regularized limits: the constant Laurent coefficient of ``f/g`` at a zero of ``g``.

Write ``h = lam - lam0``, ``F_m = f^{(m)}/m!`` and ``A_r = g^{(n+r)}/(n+r)!`` so
that ``g = h^n (A_0 + A_1 h + ...)``.  The constant coefficient of ``f/g`` is
``sum_{k=0}^{n} F_{n-k} R_k`` where ``R_k`` are the Taylor coefficients of
``1/(A_0 + A_1 h + ...)``.  The evaluators below differ only in how they
expand ``R_k``: over integer partitions, over compositions, or with the
small-order polynomials written out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Sequence

import numpy as np

from .combinatorics import compositions, enumerate_partitions
from .errors import ConvergenceError, DomainError, PreconditionError, WrongOrderError
from .quadrature import cauchy_derivatives

ORDER_TOL = 1e-8
ORIGIN_TOL = 1e-14

METHODS = ("partition-form", "composition-form", "corollary", "contour-oracle")


@dataclass
class DerivativeOracle:
    """Derivatives ``v^{(k)}(lam0)`` for ``k = 0..max_order``.

    Build with :meth:`from_values` when closed forms are known, or with
    :meth:`from_function` to differentiate a vectorized analytic function by
    Cauchy's formula on a circle.
    """

    lam0: complex
    provider: Callable[[int], complex]
    max_order: int
    _cache: dict = field(default_factory=dict, repr=False)

    def derivative(self, k: int) -> complex:
        if k < 0:
            raise DomainError("derivative order must be non-negative")
        if k > self.max_order:
            raise PreconditionError(f"derivative of order {k} requested, oracle provides up to {self.max_order}")
        if k not in self._cache:
            self._cache[k] = complex(self.provider(k))
        return self._cache[k]

    def derivatives(self, kmax: int) -> list[complex]:
        return [self.derivative(k) for k in range(kmax + 1)]

    @classmethod
    def from_values(cls, lam0: complex, values: Sequence[complex]) -> "DerivativeOracle":
        vals = [complex(v) for v in values]
        return cls(complex(lam0), lambda k: vals[k], len(vals) - 1)

    @classmethod
    def from_function(cls, func: Callable, lam0: complex, max_order: int, radius: float = 0.1,
                      tol: float = 1e-14) -> "DerivativeOracle":
        """Cauchy-FFT derivatives; ``func`` must be analytic on ``|lam - lam0| <= radius``."""
        d = cauchy_derivatives(_vectorize(func), complex(lam0), radius, max_order, tol=tol)
        vals = [complex(x) for x in d]
        vals[0] = complex(np.asarray(func(np.asarray([complex(lam0)])))[0])
        return cls(complex(lam0), lambda k: vals[k], max_order)


@dataclass(frozen=True)
class RegLimResult:
    value: complex
    method: str
    diagnostics: dict

    def __post_init__(self) -> None:
        if not np.isfinite(self.value):
            raise ConvergenceError("regularized limit is not finite")
        if self.method not in METHODS:
            raise DomainError(f"unknown method tag {self.method!r}")


def _vectorize(func: Callable) -> Callable[[np.ndarray], np.ndarray]:
    def wrapped(z):
        z = np.asarray(z, dtype=complex)
        try:
            out = np.asarray(func(z), dtype=complex)
            if out.shape == z.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([complex(func(complex(x))) for x in z.ravel()]).reshape(z.shape)

    return wrapped


def _normalized(f: DerivativeOracle, g: DerivativeOracle, n: int) -> tuple[list[complex], list[complex]]:
    if int(n) != n or n < 1:
        raise DomainError("zero order n must be a positive integer")
    if f.lam0 != g.lam0:
        raise DomainError("f and g must be expanded about the same point")
    gd = g.derivatives(2 * n)
    fd = f.derivatives(n)
    scale = max(abs(x) for x in gd)
    if not abs(gd[n]) > ORDER_TOL * scale:
        raise WrongOrderError(f"g^({n})(lam0) vanishes; the zero of g has order above {n}")
    for k in range(n):
        if abs(gd[k]) > ORDER_TOL * scale:
            raise PreconditionError(f"g^({k})(lam0) != 0, so g does not vanish to order {n}")
    fscale = max(abs(x) / factorial(k) for k, x in enumerate(fd))
    if abs(fd[0]) <= ORIGIN_TOL * fscale:
        raise PreconditionError("f(lam0) = 0 violates the hypothesis f(lam0) != 0")
    F = [fd[m] / factorial(m) for m in range(n + 1)]
    A = [gd[n + r] / factorial(n + r) for r in range(n + 1)]
    return F, A


def _assemble(F: list[complex], R: list[complex], n: int) -> complex:
    return sum(F[n - k] * R[k] for k in range(n + 1))


def reciprocal_coefficients_partitions(A: Sequence[complex], kmax: int) -> list[complex]:
    """``R_0..R_kmax`` of ``1/sum A_r h^r`` as signed sums over partitions."""
    c = [a / A[0] for a in A]
    out = []
    for k in range(kmax + 1):
        acc = 0j
        for p in enumerate_partitions(k):
            # (-1)^J J!/prod(m_r!) prod c_r^{m_r}
            J = p.part_count
            prod = 1.0 + 0j
            for r, m in enumerate(p.multiplicities, 1):
                if m:
                    prod *= c[r] ** m / factorial(m)
            acc += (-1) ** J * factorial(J) * prod
        out.append(acc / A[0])
    return out


def reciprocal_coefficients_compositions(A: Sequence[complex], kmax: int) -> list[complex]:
    """``R_0..R_kmax`` of ``1/sum A_r h^r`` as signed sums over compositions."""
    c = [a / A[0] for a in A]
    out = [1.0 / A[0]]
    for k in range(1, kmax + 1):
        acc = 0j
        for t in range(1, k + 1):
            s = 0j
            for rs in compositions(k, t):
                prod = 1.0 + 0j
                for r in rs:
                    prod *= c[r]
                s += prod
            acc += (-1) ** t * s
        out.append(acc / A[0])
    return out


def reglim_ratio(f: DerivativeOracle, g: DerivativeOracle, n: int) -> RegLimResult:
    """Regularized limit of ``f/g`` where ``g`` has a zero of order ``n``, partition form."""
    F, A = _normalized(f, g, n)
    R = reciprocal_coefficients_partitions(A, n)
    value = _assemble(F, R, n)
    terms = sum(len(enumerate_partitions(k)) for k in range(n + 1))
    return RegLimResult(complex(value), "partition-form",
                        {"leading": complex(F[n] * R[0]), "partitions": terms})


def reglim_ratio_compositions(f: DerivativeOracle, g: DerivativeOracle, n: int) -> RegLimResult:
    """Same contract as :func:`reglim_ratio`, summing over compositions instead."""
    F, A = _normalized(f, g, n)
    R = reciprocal_coefficients_compositions(A, n)
    value = _assemble(F, R, n)
    return RegLimResult(complex(value), "composition-form", {"compositions": 2 ** n - 1})


def reglim_corollary(n: int, f_derivs: Sequence[complex], g_derivs: Sequence[complex]) -> RegLimResult:
    """Closed forms for zero orders 1 to 4.

    ``f_derivs`` holds ``f, f', ..., f^{(n)}`` and ``g_derivs`` holds ``g, ...,
    g^{(2n)}`` at the expansion point.
    """
    if n not in (1, 2, 3, 4):
        raise DomainError("closed forms exist for n = 1..4; use reglim_ratio otherwise")
    if len(f_derivs) < n + 1 or len(g_derivs) < 2 * n + 1:
        raise PreconditionError(f"order {n} needs f up to order {n} and g up to order {2 * n}")
    f = DerivativeOracle.from_values(0, f_derivs[: n + 1])
    g = DerivativeOracle.from_values(0, g_derivs[: 2 * n + 1])
    F, A = _normalized(f, g, n)
    a0, a1, a2, a3, a4 = (list(A) + [0j] * 5)[:5]
    if n == 1:
        # f'/g' - f g'' / (2 g'^2)
        fd, gd = f_derivs, g_derivs
        value = fd[1] / gd[1] - fd[0] * gd[2] / (2 * gd[1] ** 2)
    elif n == 2:
        fd, gd = f_derivs, g_derivs
        value = (fd[2] / gd[2] - 2 * fd[1] * gd[3] / (3 * gd[2] ** 2)
                 + fd[0] * (2 * gd[3] ** 2 / (9 * gd[2] ** 3) - gd[4] / (6 * gd[2] ** 2)))
    else:
        R = [1 / a0,
             -a1 / a0**2,
             (a1**2 - a0 * a2) / a0**3,
             (-a1**3 + 2 * a0 * a1 * a2 - a0**2 * a3) / a0**4,
             (a1**4 - 3 * a0 * a1**2 * a2 + a0**2 * a2**2 + 2 * a0**2 * a1 * a3 - a0**3 * a4) / a0**5]
        value = _assemble(F, R, n)
    return RegLimResult(complex(value), "corollary", {"order": n})


def reglim_contour_oracle(w: Callable, lam0: complex, rho: float, grid: int = 64, tol: float = 1e-12,
                          max_grid: int = 2**16) -> RegLimResult:
    """``(1/2 pi i) oint w(lam)/(lam - lam0) dlam`` on ``|lam - lam0| = rho``.

    That is the mean of ``w`` over the circle, computed with the periodic
    trapezoid rule; the grid doubles until two passes agree.
    """
    if not rho > 0:
        raise DomainError("radius must be positive")
    if grid < 16:
        raise DomainError("grid must be at least 16")
    wv = _vectorize(w)
    lam0 = complex(lam0)
    prev = None
    n = grid
    while n <= max_grid:
        theta = 2 * math.pi * np.arange(n) / n
        vals = wv(lam0 + rho * np.exp(1j * theta))
        mean = complex(np.mean(vals))
        if prev is not None:
            scale = max(float(np.max(np.abs(vals))), 1e-300)
            if abs(mean - prev) <= tol * max(abs(mean), 1e-3 * scale):
                return RegLimResult(mean, "contour-oracle", {"grid": n, "change": abs(mean - prev)})
        prev = mean
        n *= 2
    raise ConvergenceError(f"contour oracle did not settle by grid {max_grid}")


def simple_pole_power(v: DerivativeOracle, n: int) -> complex:
    """Regularized limit of ``v(lam)/(lam - lam0)^n``, i.e. ``v^{(n)}(lam0)/n!``."""
    if int(n) != n or n < 0:
        raise DomainError("n must be a non-negative integer")
    return v.derivative(n) / factorial(n)


# ---------------------------------------------------------------------------
# named ratios for the command line


@dataclass(frozen=True)
class NamedRatio:
    doc: str
    build: Callable[..., tuple[Callable, Callable, complex, int]]
    params: tuple[str, ...] = ()


def _gamma_cos_ratio(beta: float = 2.0, m: float = 3.0):
    from .specialfun import reciprocal_gamma

    def f(nu):
        nu = np.asarray(nu, dtype=complex)
        return (-1) ** m * math.pi**2 * np.exp((m - 1 + nu) * math.log(beta)) * np.cos(math.pi * nu) * reciprocal_gamma(m + nu)

    return f, lambda nu: np.sin(math.pi * np.asarray(nu, dtype=complex)) ** 2, 0j, 2


def _gamma_psi_ratio(beta: float = 2.0, m: float = 3.0):
    from .specialfun import digamma, reciprocal_gamma

    def f(nu):
        nu = np.asarray(nu, dtype=complex)
        return ((-1) ** m * math.pi * np.exp((m - 1 + nu) * math.log(beta))
                * digamma(m + nu) * reciprocal_gamma(m + nu))

    return f, lambda nu: np.sin(math.pi * np.asarray(nu, dtype=complex)), 0j, 1


NAMED_RATIOS: dict[str, NamedRatio] = {
    "exp-over-lambda": NamedRatio("e^lam / lam at 0, simple zero",
                                  lambda: (np.exp, lambda x: np.asarray(x, dtype=complex), 0j, 1)),
    "cos-over-sin2": NamedRatio("cos(lam) / sin(lam)^2 at 0, double zero",
                                lambda: (np.cos, lambda x: np.sin(x) ** 2, 0j, 2)),
    "gamma-cos-over-sin2": NamedRatio("(-1)^m pi^2 beta^(m-1+nu) cos(pi nu)/Gamma(m+nu) over sin^2(pi nu)",
                              _gamma_cos_ratio, ("beta", "m")),
    "gamma-psi-over-sin": NamedRatio("(-1)^m pi beta^(m-1+nu) psi(m+nu)/Gamma(m+nu) over sin(pi nu)",
                              _gamma_psi_ratio, ("beta", "m")),
}


def named_reglim(name: str, method: str = "partition-form", params: Sequence[float] = (),
                 lam0: complex | None = None, n: int | None = None) -> RegLimResult:
    """Evaluate a registered ratio with the chosen method."""
    if name not in NAMED_RATIOS:
        raise KeyError(name)
    f, g, default_lam0, default_n = NAMED_RATIOS[name].build(*params)
    lam0 = default_lam0 if lam0 is None else complex(lam0)
    n = default_n if n is None else int(n)
    if method == "contour-oracle":
        return reglim_contour_oracle(lambda x: np.asarray(f(x)) / np.asarray(g(x)), lam0, 0.25)
    fo = DerivativeOracle.from_function(f, lam0, n, radius=0.25)
    go = DerivativeOracle.from_function(g, lam0, 2 * n, radius=0.25)
    if method == "partition-form":
        return reglim_ratio(fo, go, n)
    if method == "composition-form":
        return reglim_ratio_compositions(fo, go, n)
    if method == "corollary":
        return reglim_corollary(n, fo.derivatives(n), go.derivatives(2 * n))
    raise DomainError(f"unknown method {method!r}")
