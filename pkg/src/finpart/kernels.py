"""Integration kernels ``k(z)`` and the built-in registry.

A kernel carries its complex evaluator, Taylor coefficients about the origin,
the radius of analyticity ``rho0`` and a description of its decay along the
positive axis (used to truncate infinite upper limits).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from math import factorial
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .quadrature import cauchy_taylor
from .specialfun import bessel_j0, reciprocal_gamma

DECAY_KINDS = ("exp", "recip-gamma", "poly", "none")


@dataclass(frozen=True)
class Decay:
    """Tail behaviour on the positive axis.

    ``kind="exp"``: ``|k(t)| ~ e^{-rate t}``.  ``kind="poly"``: ``|k(t)| ~
    t^rate`` (``rate`` is the growth order, 0 for bounded kernels).
    ``kind="recip-gamma"``: super-exponential decay like ``1/Gamma(1+t)``.
    ``kind="none"``: no usable tail; only finite upper limits are allowed.
    """

    kind: str
    rate: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in DECAY_KINDS:
            raise DomainError(f"unknown decay kind {self.kind!r}")
        if self.kind == "exp" and not self.rate > 0:
            raise DomainError("exponential decay needs a positive rate")


@dataclass(eq=False)
class Kernel:
    """An analytic kernel ``k(z)`` for finite-part and Stieltjes problems."""

    id: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    rho0: float
    decay: Decay
    taylor_exact: Callable[[int], complex] | None = None
    real_on_axis: bool = True
    _taylor_cache: list = field(default_factory=list, repr=False)
    _circle_cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, z):
        arr = np.asarray(z, dtype=complex)
        out = np.asarray(self.evaluate(arr), dtype=complex)
        return complex(out) if arr.ndim == 0 else out

    def taylor(self, l: int) -> complex:
        """Coefficient ``a_l`` of ``k(z) = sum a_l z^l``."""
        if l < 0:
            raise DomainError("Taylor index must be non-negative")
        if self.taylor_exact is not None:
            return complex(self.taylor_exact(l))
        if l >= len(self._taylor_cache):
            n = max(2 * l + 8, 32)
            r = min(1.0, 0.5 * self.rho0)
            coeffs = cauchy_taylor(lambda z: self.evaluate(z), 0.0, r, n, tol=1e-15)
            self._taylor_cache[:] = [complex(c) for c in coeffs]
        return self._taylor_cache[l]

    def taylor_on_circle(self, radius: float, kmax: int) -> np.ndarray:
        """Coefficients ``a_0..a_kmax`` from a Cauchy FFT on ``|z| = radius``.

        Rounding in ``a_l`` scales like ``radius^-l``, so series evaluated at
        ``|z|`` close to 1 or beyond need a radius larger than ``|z|``.
        """
        if self.taylor_exact is not None:
            return self.taylor_coeffs(kmax)
        if not 0 < radius < self.rho0:
            raise DomainError("Taylor radius must lie inside the disk of analyticity")
        key = (float(radius), int(kmax))
        if key not in self._circle_cache:
            c = cauchy_taylor(lambda z: self.evaluate(z), 0.0, radius, kmax, tol=1e-15)
            self._circle_cache[key] = np.asarray(c, dtype=complex)
        return self._circle_cache[key]

    def taylor_coeffs(self, n: int) -> np.ndarray:
        return np.array([self.taylor(l) for l in range(n + 1)], dtype=complex)

    def require_nonzero_origin(self) -> None:
        if self.taylor(0) == 0:
            raise PreconditionError(f"kernel {self.id} vanishes at the origin; k(0) != 0 is required")


def const_kernel(value: float = 1.0) -> Kernel:
    return Kernel(
        id="const",
        evaluate=lambda z: np.full(np.shape(z), value, dtype=complex),
        rho0=math.inf,
        decay=Decay("poly", 0.0),
        taylor_exact=lambda l: value if l == 0 else 0.0,
    )


def exp_kernel(beta: float = 1.0) -> Kernel:
    if not beta > 0:
        raise DomainError("exp kernel needs beta > 0")
    return Kernel(
        id=f"exp({beta:g})",
        evaluate=lambda z: np.exp(-beta * z),
        rho0=math.inf,
        decay=Decay("exp", beta),
        taylor_exact=lambda l: (-beta) ** l / factorial(l),
    )


def poly_kernel(coeffs: Sequence[complex]) -> Kernel:
    c = [complex(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    if not c:
        raise DomainError("poly kernel needs at least one coefficient")
    rev = c[::-1]

    def ev(z):
        out = np.zeros(np.shape(z), dtype=complex)
        for a in rev:
            out = out * z + a
        return out

    return Kernel(
        id="poly(" + ",".join(f"{x.real:g}" if x.imag == 0 else f"{x:g}" for x in c) + ")",
        evaluate=ev,
        rho0=math.inf,
        decay=Decay("poly", float(len(c) - 1)),
        taylor_exact=lambda l: c[l] if l < len(c) else 0.0,
        real_on_axis=all(x.imag == 0 for x in c),
    )


def _binomial_series(alpha: float, scale: float, n: int) -> list[float]:
    # coefficients of (1 + z/scale)^alpha
    out = [1.0]
    for k in range(1, n + 1):
        out.append(out[-1] * (alpha - k + 1) / k / scale)
    return out


def sqrt_ratio_kernel(a: float, b: float) -> Kernel:
    """``sqrt((a+z)/(b+z))`` with principal square roots; analytic for ``|z| < min(a, b)``."""
    if not (a > 0 and b > 0):
        raise DomainError("sqrt-ratio kernel needs a, b > 0")
    cache: list[float] = []

    def taylor(l: int) -> float:
        if l >= len(cache):
            n = max(2 * l + 8, 32)
            p = _binomial_series(0.5, a, n)
            q = _binomial_series(-0.5, b, n)
            pref = math.sqrt(a / b)
            cache[:] = [pref * sum(p[i] * q[k - i] for i in range(k + 1)) for k in range(n + 1)]
        return cache[l]

    return Kernel(
        id=f"sqrt-ratio({a:g},{b:g})",
        evaluate=lambda z: np.sqrt(a + z) / np.sqrt(b + z),
        rho0=min(a, b),
        decay=Decay("poly", 0.0),
        taylor_exact=taylor,
    )


def j0sq_recip_gamma_kernel() -> Kernel:
    """``J0(z)^2 / Gamma(1+z)``, entire."""
    return Kernel(
        id="j0sq-recip-gamma",
        evaluate=lambda z: bessel_j0(z) ** 2 * reciprocal_gamma(1.0 + np.asarray(z)),
        rho0=math.inf,
        decay=Decay("recip-gamma"),
    )


def taylor_file_kernel(path: str | Path) -> Kernel:
    """Kernel from a JSON Taylor file.

    Format: ``{"coeffs": [[re, im], ...], "radius": number | "inf",
    "decay": {"type": "exp" | "recip-gamma" | "poly", "rate": number}}``.
    The kernel is evaluated as the truncated series.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read kernel file {path}: {exc}") from exc
    try:
        coeffs = [complex(float(c[0]), float(c[1])) if isinstance(c, (list, tuple)) else complex(float(c))
                  for c in doc["coeffs"]]
        radius = doc.get("radius", "inf")
        rho0 = math.inf if radius in ("inf", None) else float(radius)
        dec = doc.get("decay") or {"type": "none"}
        decay = Decay(str(dec.get("type", "none")), float(dec.get("rate", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed kernel file {path}: {exc}") from exc
    if not coeffs:
        raise DomainError("kernel file has no coefficients")
    if not rho0 > 0:
        raise DomainError("kernel file radius must be positive")
    base = poly_kernel(coeffs)
    return Kernel(
        id=f"file:{Path(path).name}",
        evaluate=base.evaluate,
        rho0=rho0,
        decay=decay,
        taylor_exact=base.taylor_exact,
        real_on_axis=base.real_on_axis,
    )


@dataclass(frozen=True)
class KernelRegistryEntry:
    id: str
    params: tuple[str, ...]
    doc: str
    factory: Callable[..., Kernel]


REGISTRY: dict[str, KernelRegistryEntry] = {
    e.id: e
    for e in (
        KernelRegistryEntry("const", (), "k(z) = 1", lambda: const_kernel(1.0)),
        KernelRegistryEntry("exp", ("beta",), "k(z) = exp(-beta z); beta defaults to 1", exp_kernel),
        KernelRegistryEntry("poly", ("c0", "c1", "..."), "k(z) = c0 + c1 z + ...", lambda *c: poly_kernel(c)),
        KernelRegistryEntry("sqrt-ratio", ("a", "b"), "k(z) = sqrt((a+z)/(b+z)), rho0 = min(a, b)", sqrt_ratio_kernel),
        KernelRegistryEntry("j0sq-recip-gamma", (), "k(z) = J0(z)^2 / Gamma(1+z)", j0sq_recip_gamma_kernel),
    )
}

_SPEC_RE = re.compile(r"^\s*([a-z0-9\-]+)\s*(?:\((.*)\))?\s*$")


def resolve_kernel(spec: str) -> Kernel:
    """Build a kernel from ``id``, ``id(p1,p2,...)`` or a path to a JSON Taylor file."""
    m = _SPEC_RE.match(spec)
    if m and m.group(1) in REGISTRY:
        entry = REGISTRY[m.group(1)]
        args: list[float] = []
        if m.group(2) is not None and m.group(2).strip():
            try:
                args = [float(x) for x in m.group(2).split(",")]
            except ValueError as exc:
                raise DomainError(f"bad kernel parameters in {spec!r}") from exc
        try:
            return entry.factory(*args)
        except TypeError as exc:
            raise DomainError(f"kernel {entry.id} takes parameters {entry.params}") from exc
    p = Path(spec)
    if p.suffix == ".json" or p.exists():
        return taylor_file_kernel(p)
    raise KeyError(spec)
