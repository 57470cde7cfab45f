"""Complex special functions at double precision.

The functions accept Python scalars or numpy arrays.  Scalars in give a Python
``complex`` back; arrays in give a complex ndarray.  Poles and out-of-domain
arguments raise instead of returning ``nan``/``inf``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .combinatorics import bernoulli_number
from .errors import DomainError, PoleError, RangeError

EULER_GAMMA = 0.57721566490153286060651209008240243
TWO_PI = 2.0 * math.pi

# Lanczos g = 7, n = 9 (Godfrey); about 1e-15 relative for Re z >= 1/2.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

J0_MAX_MODULUS = 40.0


@dataclass(frozen=True)
class BranchedLog:
    """A logarithm carried as modulus and argument, with its branch stated.

    ``window`` is ``"cut"`` for ``arg in [0, 2pi)`` (the ``ln`` used on
    keyhole contours), ``"principal"`` for ``Arg in (-pi, pi]``, or
    ``"explicit"`` when the caller fixed the argument directly (e.g. ``2pi``
    on the lower side of the cut).
    """

    log_modulus: float
    arg: float
    window: str = "explicit"

    @classmethod
    def cut(cls, z: complex) -> "BranchedLog":
        z = complex(z)
        if z == 0:
            raise PoleError("log of zero")
        a = math.atan2(z.imag, z.real)
        if a < 0:
            a += TWO_PI
        if a >= TWO_PI:
            a = 0.0
        return cls(math.log(abs(z)), a, "cut")

    @classmethod
    def principal(cls, z: complex) -> "BranchedLog":
        z = complex(z)
        if z == 0:
            raise PoleError("log of zero")
        a = math.atan2(z.imag, z.real)
        if a == -math.pi:
            a = math.pi
        return cls(math.log(abs(z)), a, "principal")

    @property
    def value(self) -> complex:
        return complex(self.log_modulus, self.arg)

    @property
    def point(self) -> complex:
        """The complex number whose logarithm this is."""
        return cmath.exp(self.value)

    def power(self, lam: complex) -> complex:
        """``z**lam`` on this branch, i.e. ``exp(lam * log z)``."""
        return cmath.exp(lam * self.value)


def _as_complex_array(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return complex(arr) if scalar else arr


def _nonpositive_integer(z: np.ndarray) -> np.ndarray:
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def _lanczos(z: np.ndarray) -> np.ndarray:
    # Gamma(z) for Re z >= 1/2
    zm = z - 1.0
    x = np.full_like(zm, _LANCZOS[0])
    for i in range(1, len(_LANCZOS)):
        x = x + _LANCZOS[i] / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    return math.sqrt(TWO_PI) * t ** (zm + 0.5) * np.exp(-t) * x


def complex_gamma(z):
    """Gamma function by Lanczos with reflection for ``Re z < 1/2``."""
    z, scalar = _as_complex_array(z)
    if np.any(_nonpositive_integer(z)):
        raise PoleError("Gamma has poles at the non-positive integers")
    left = z.real < 0.5
    out = np.empty_like(z)
    if np.any(~left):
        out[~left] = _lanczos(z[~left])
    if np.any(left):
        zl = z[left]
        out[left] = math.pi / (np.sin(math.pi * zl) * _lanczos(1.0 - zl))
    return _out(out, scalar)


def reciprocal_gamma(z):
    """``1/Gamma(z)``; entire, so the non-positive integers map to zero."""
    z, scalar = _as_complex_array(z)
    poles = _nonpositive_integer(z)
    out = np.zeros_like(z)
    if np.any(~poles):
        out[~poles] = 1.0 / complex_gamma(z[~poles])
    return _out(out, scalar)


def log_gamma(z):
    """``ln Gamma(z)`` for ``Re z > 0``, continuous along paths in that half plane."""
    z, scalar = _as_complex_array(z)
    if np.any(z.real <= 0):
        raise DomainError("log_gamma is implemented for Re z > 0 only")
    zm = z - 1.0
    x = np.full_like(zm, _LANCZOS[0])
    for i in range(1, len(_LANCZOS)):
        x = x + _LANCZOS[i] / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    out = 0.5 * math.log(TWO_PI) + (zm + 0.5) * np.log(t) - t + np.log(x)
    return _out(out, scalar)


@lru_cache(maxsize=None)
def _asymptotic_b2k(n_terms: int) -> tuple[float, ...]:
    return tuple(float(bernoulli_number(2 * k)) for k in range(1, n_terms + 1))


_SHIFT_TARGET = 10.0
_ASYM_TERMS = 12


def polygamma(j: int, z):
    """Polygamma ``psi^(j)(z)``; ``j = 0`` is the digamma function.

    Upward recurrence moves ``z`` until ``Re z >= 10`` and the asymptotic
    series takes over there.
    """
    if j < 0 or int(j) != j:
        raise DomainError("polygamma order must be a non-negative integer")
    j = int(j)
    z, scalar = _as_complex_array(z)
    if np.any(_nonpositive_integer(z)):
        raise PoleError("polygamma has poles at the non-positive integers")
    acc = np.zeros_like(z)
    w = z.copy()
    sign_j = (-1) ** j * factorial(j)
    while True:
        low = w.real < _SHIFT_TARGET
        if not np.any(low):
            break
        # psi^(j)(w) = psi^(j)(w+1) - (-1)^j j! / w^(j+1)
        acc[low] -= sign_j / w[low] ** (j + 1)
        w[low] += 1.0
    b2k = _asymptotic_b2k(_ASYM_TERMS)
    if j == 0:
        s = np.log(w) - 0.5 / w
        inv2 = 1.0 / (w * w)
        p = np.ones_like(w)
        for k, b in enumerate(b2k, 1):
            p = p * inv2
            s = s - b / (2 * k) * p
    else:
        s = factorial(j - 1) / w**j + factorial(j) / (2 * w ** (j + 1))
        for k, b in enumerate(b2k, 1):
            s = s + b * (factorial(2 * k + j - 1) / factorial(2 * k)) / w ** (2 * k + j)
        s = (-1) ** (j + 1) * s
    return _out(s + acc, scalar)


def digamma(z):
    return polygamma(0, z)


def zeta_integer(s: int) -> float:
    """Riemann zeta at an integer ``s >= 2``.

    Even ``s`` uses the Bernoulli closed form; odd ``s`` sums 20 terms directly
    and closes with an Euler-Maclaurin tail.
    """
    if int(s) != s:
        raise DomainError("zeta_integer takes an integer argument")
    s = int(s)
    if s < 2:
        raise DomainError("zeta_integer needs s >= 2")
    if s % 2 == 0:
        j = s // 2
        b = bernoulli_number(s)
        return float((-1) ** (j - 1) * 2 ** (s - 1) * math.pi**s / factorial(s) * float(b))
    n = 20
    head = math.fsum(k ** (-s) for k in range(1, n))
    tail = n ** (1 - s) / (s - 1) + 0.5 * n ** (-s)
    # Euler-Maclaurin corrections: B_2k/(2k)! * s(s+1)...(s+2k-2) * n^(-s-2k+1)
    for k in range(1, 8):
        rising_k = 1.0
        for i in range(2 * k - 1):
            rising_k *= s + i
        tail += float(bernoulli_number(2 * k)) / factorial(2 * k) * rising_k * n ** (-s - 2 * k + 1)
    return head + tail


# Double-double helpers (error-free transformations) for the J0 series.
_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(x, y):
    s, e = _two_sum(x[0], y[0])
    return _quick_two_sum(s, e + x[1] + y[1])


def _dd_neg(x):
    return -x[0], -x[1]


def _dd_mul(x, y):
    p, e = _two_prod(x[0], y[0])
    return _quick_two_sum(p, e + x[0] * y[1] + x[1] * y[0])


def _dd_div_int(x, d: float):
    q = x[0] / d
    p, e = _two_prod(q, np.full_like(q, d))
    r = ((x[0] - p) - e + x[1]) / d
    return _quick_two_sum(q, r)


def bessel_j0(z):
    """Bessel ``J_0`` from its power series.

    Terms and partial sums are carried in double-double arithmetic, so the
    cancellation of the alternating series (largest term near ``e^|z|``) does
    not reach the double result for ``|z| <= 25``.  Arguments beyond
    ``|z| = 40`` are refused.
    """
    z, scalar = _as_complex_array(z)
    if np.any(np.abs(z) > J0_MAX_MODULUS):
        raise RangeError(f"bessel_j0 series is only used for |z| <= {J0_MAX_MODULUS}")
    x = np.ascontiguousarray(z.real, dtype=float)
    y = np.ascontiguousarray(z.imag, dtype=float)
    zero = np.zeros_like(x)
    # q = -z^2/4, exact in double-double
    xx = _two_prod(x, x)
    yy = _two_prod(y, y)
    xy = _two_prod(x, y)
    q_re = _dd_div_int(_dd_add(_dd_neg(xx), yy), 4.0)
    q_im = _dd_div_int(_dd_neg(xy), 2.0)
    t_re, t_im = (np.ones_like(x), zero), (zero, zero)
    s_re, s_im = (np.ones_like(x), zero), (zero, zero)
    k = 0
    while True:
        k += 1
        a = _dd_add(_dd_mul(t_re, q_re), _dd_neg(_dd_mul(t_im, q_im)))
        b = _dd_add(_dd_mul(t_re, q_im), _dd_mul(t_im, q_re))
        t_re = _dd_div_int(a, float(k * k))
        t_im = _dd_div_int(b, float(k * k))
        s_re = _dd_add(s_re, t_re)
        s_im = _dd_add(s_im, t_im)
        mag = np.abs(t_re[0]) + np.abs(t_im[0])
        if k > 2 and np.all(mag <= 1e-17 * np.maximum(np.abs(s_re[0]) + np.abs(s_im[0]), 1e-300)):
            break
        if k > 200:
            break
    out = ((s_re[0] + s_re[1]) + 1j * (s_im[0] + s_im[1])).reshape(z.shape)
    return _out(out, scalar)


def pochhammer(a: complex, k: int) -> complex:
    out = 1.0 + 0j
    for i in range(k):
        out *= a + i
    return out


_HYP_TOL = 1e-16
_HYP_MAX_TERMS = 5000


def _check_2f1(c: complex, z: complex) -> None:
    if abs(z) >= 1:
        raise DomainError("gauss_2f1 uses the series only, which needs |z| < 1")
    c = complex(c)
    if c.imag == 0 and c.real <= 0 and c.real == round(c.real):
        raise DomainError("2F1 undefined for c a non-positive integer")


def _hyp_series(a, b, c, z, order: int) -> complex:
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    _check_2f1(c, z)
    term = 1.0 + 0j
    h1 = 0j  # sum 1/(b+i), i < k  == psi(b+k) - psi(b)
    h2 = 0j  # sum 1/(b+i)^2       == psi'(b) - psi'(b+k)
    total = 0j
    for k in range(_HYP_MAX_TERMS):
        if order == 0:
            contrib = term
        elif order == 1:
            contrib = term * h1
        else:
            contrib = term * (h1 * h1 - h2)
        total += contrib
        nxt = (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        if b + k == 0:
            raise DomainError("parameter derivative needs b off the non-positive integers")
        h1 += 1.0 / (b + k)
        h2 += 1.0 / (b + k) ** 2
        term *= nxt
        # geometric tail bound with ratio |nxt| (tends to |z|)
        r = abs(nxt)
        if k > 2 and r < 1:
            bound = abs(term) * (1 + abs(h1) ** 2 + abs(h2)) / (1 - r)
            if bound <= _HYP_TOL * max(abs(total), 1e-300):
                return total
    raise DomainError("2F1 series did not converge")


def gauss_2f1(a, b, c, z) -> complex:
    """Gauss hypergeometric ``2F1(a, b; c; z)`` by its series (``|z| < 1``)."""
    return _hyp_series(a, b, c, z, 0)


def gauss_2f1_db(order: int, a, b, c, z) -> complex:
    """First or second derivative of ``2F1(a, b; c; z)`` in the parameter ``b``."""
    if order not in (1, 2):
        raise DomainError("only first and second b-derivatives are provided")
    return _hyp_series(a, b, c, z, order)


def _check_trig_pole(nu: complex, odd: bool) -> None:
    nu = complex(nu)
    if nu.imag == 0 and nu.real == round(nu.real) and (int(round(nu.real)) % 2 == 1) == odd:
        raise PoleError("derivative requested at a pole")


def sec_derivative(j: int, nu) -> complex:
    """``d^j/dnu^j sec(pi nu / 2)`` through the tan-power double sum."""
    if j < 0:
        raise DomainError("derivative order must be non-negative")
    _check_trig_pole(nu, odd=True)
    x = math.pi * complex(nu) / 2
    sec = 1.0 / cmath.cos(x)
    tan = cmath.tan(x)
    g = (1 - (-1) ** j) // 2
    total = 0j
    for l in range(g, j + 1):
        tan_sum = sum((-1) ** m * comb(l, 2 * m + g) * tan ** (2 * m + g) for m in range((l - g) // 2 + 1))
        weight = sum((-1) ** p * comb(l, p) * (2 * p + 1) ** j for p in range(l + 1))
        total += tan_sum * weight / 2**l
    return (-1) ** ((j + 1) // 2) * (math.pi / 2) ** j * sec * total


def csc_derivative(j: int, nu) -> complex:
    """``d^j/dnu^j csc(pi nu / 2)`` through the cot-power double sum.

    The outer sum runs from ``l = 0``; for even ``j`` that term is needed
    (it is the whole answer at ``j = 0``), for odd ``j`` it vanishes.
    """
    if j < 0:
        raise DomainError("derivative order must be non-negative")
    _check_trig_pole(nu, odd=False)
    x = math.pi * complex(nu) / 2
    csc = 1.0 / cmath.sin(x)
    cot = cmath.cos(x) / cmath.sin(x)
    g = (1 - (-1) ** j) // 2
    total = 0j
    for l in range(g, j + 1):
        weight = sum((-1) ** m * comb(l, m) * (2 * m + 1) ** j for m in range(l + 1))
        cot_sum = sum((-1) ** p * comb(l, 2 * p + g) * cot ** (2 * p + g) for p in range((l - g) // 2 + 1))
        total += weight * cot_sum / 2**l
    return (-1) ** (j // 2) * (math.pi / 2) ** j * csc * total


EVALUATORS = {
    "gamma": lambda z: complex_gamma(z),
    "rgamma": lambda z: reciprocal_gamma(z),
    "loggamma": lambda z: log_gamma(z),
    "digamma": lambda z: digamma(z),
    "polygamma": lambda j, z: polygamma(int(j.real), z),
    "zeta": lambda s: zeta_integer(int(s.real)),
    "j0": lambda z: bessel_j0(z),
    "hyp2f1": lambda a, b, c, z: gauss_2f1(a, b, c, z),
    "hyp2f1_db": lambda order, a, b, c, z: gauss_2f1_db(int(order.real), a, b, c, z),
    "sec_derivative": lambda j, nu: sec_derivative(int(j.real), nu),
    "csc_derivative": lambda j, nu: csc_derivative(int(j.real), nu),
}
