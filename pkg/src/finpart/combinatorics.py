"""Exact combinatorial number families.

Everything here works in integers or :class:`fractions.Fraction`; floats never
enter.  Results are memoised by index with :func:`functools.lru_cache`, which
is safe for concurrent readers (a racing fill just recomputes the same value).

Conventions
-----------
* ``bernoulli_number(1) == -1/2``.  This is the sign that makes the integer
  finite-part formula collapse to the ``(ln z - pi i)`` kernel at log order 0.
* Euler numbers follow ``sec x = sum (-1)^k E_{2k} x^{2k} / (2k)!`` so that
  ``E_2 = -1`` and ``E_4 = 5``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb, factorial
from typing import Iterator, Sequence

from .errors import DomainError

Rational = Fraction


@dataclass(frozen=True)
class PartitionMultiset:
    """One partition of ``order`` stored as multiplicities ``(m_1, ..., m_k)``.

    ``m_r`` counts how many parts equal ``r``; ``sum(r * m_r) == order``.
    """

    multiplicities: tuple[int, ...]
    order: int

    def __post_init__(self) -> None:
        if len(self.multiplicities) != self.order:
            raise ValueError("need exactly one multiplicity per part size")
        if any(m < 0 for m in self.multiplicities):
            raise ValueError("multiplicities must be non-negative")
        if sum(r * m for r, m in enumerate(self.multiplicities, 1)) != self.order:
            raise ValueError("multiplicities do not sum to the partitioned integer")

    @property
    def part_count(self) -> int:
        """Number of parts, written J in the reciprocal-series formulas."""
        return sum(self.multiplicities)

    def parts(self) -> tuple[int, ...]:
        """Parts in non-increasing order, e.g. ``(3, 1, 1)``."""
        out: list[int] = []
        for r in range(self.order, 0, -1):
            out.extend([r] * self.multiplicities[r - 1])
        return tuple(out)


def _multiplicity_vectors(k: int, r: int, remaining: int) -> Iterator[tuple[int, ...]]:
    # vectors (m_r, ..., m_k) with sum_{s>=r} s*m_s == remaining, lexicographic
    if r > k:
        if remaining == 0:
            yield ()
        return
    for m in range(remaining // r + 1):
        for tail in _multiplicity_vectors(k, r + 1, remaining - r * m):
            yield (m,) + tail


@lru_cache(maxsize=None)
def _partitions(k: int) -> tuple[PartitionMultiset, ...]:
    if k == 0:
        return (PartitionMultiset((), 0),)
    # lexicographic on (m_1, ..., m_k); the generator walks m_1 upward first
    return tuple(PartitionMultiset(v, k) for v in _multiplicity_vectors(k, 1, k))


def enumerate_partitions(k: int) -> list[PartitionMultiset]:
    """All ``p(k)`` partitions of ``k``, lexicographic on multiplicity vectors."""
    if k < 0:
        raise DomainError(f"cannot partition a negative integer ({k})")
    return list(_partitions(k))


def compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of ``parts`` positive integers summing to ``n``."""
    if parts <= 0:
        if n == 0 and parts == 0:
            yield ()
        return
    if n < parts:
        return
    for cuts in combinations(range(1, n), parts - 1):
        bounds = (0,) + cuts + (n,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def _check_pair(n: int, k: int) -> None:
    if n < 0 or k < 0:
        raise DomainError("Stirling indices must be non-negative")
    if k > n:
        raise DomainError(f"Stirling number requires k <= n (got n={n}, k={k})")


@lru_cache(maxsize=None)
def _stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


def stirling_second(n: int, k: int) -> int:
    """Stirling number of the second kind ``S(n, k)``."""
    _check_pair(n, k)
    return _stirling2(n, k)


def stirling_second_series(n: int, k: int) -> int:
    """``S(n, k)`` from the alternating binomial sum ``(1/k!) sum (-1)^i C(k,i) (k-i)^n``."""
    _check_pair(n, k)
    total = sum((-1) ** i * comb(k, i) * (k - i) ** n for i in range(k + 1))
    q, r = divmod(total, factorial(k))
    assert r == 0
    return q


def stirling_second_compositions(n: int, k: int) -> Fraction:
    """``S(n, k)`` as ``(n!/k!) sum_{r_1+..+r_k=n} 1/prod(r_j!)`` over compositions."""
    _check_pair(n, k)
    if k == 0:
        return Fraction(1 if n == 0 else 0)
    acc = Fraction(0)
    for rs in compositions(n, k):
        den = 1
        for r in rs:
            den *= factorial(r)
        acc += Fraction(1, den)
    return acc * factorial(n) / factorial(k)


@lru_cache(maxsize=None)
def _stirling1(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return _stirling1(n - 1, k - 1) - (n - 1) * _stirling1(n - 1, k)


def stirling_first_signed(n: int, k: int) -> int:
    """Signed Stirling number of the first kind: ``sum_k s(n,k) x^k = x(x-1)...(x-n+1)``."""
    _check_pair(n, k)
    return _stirling1(n, k)


@lru_cache(maxsize=None)
def _bernoulli_table(n: int) -> tuple[Fraction, ...]:
    if n == 0:
        return (Fraction(1),)
    prev = _bernoulli_table(n - 1)
    # sum_{k=0}^{n} C(n+1, k) B_k = 0
    s = sum(comb(n + 1, k) * prev[k] for k in range(n))
    return prev + (-s / (n + 1),)


def bernoulli_number(n: int) -> Fraction:
    """Bernoulli number ``B_n`` with ``B_1 = -1/2``."""
    if n < 0:
        raise DomainError("Bernoulli index must be non-negative")
    return _bernoulli_table(n)[n]


def _series_mul(a: Sequence[Fraction], b: Sequence[Fraction], n: int) -> tuple[Fraction, ...]:
    return tuple(sum((a[i] * b[k - i] for i in range(k + 1)), Fraction(0)) for k in range(n + 1))


@lru_cache(maxsize=None)
def _bernoulli_power_series(m: int, n: int) -> tuple[Fraction, ...]:
    # ordinary coefficients of (z/(e^z-1))^m up to z^n
    base = tuple(bernoulli_number(k) / factorial(k) for k in range(n + 1))
    if m == 1:
        return base
    return _series_mul(_bernoulli_power_series(m - 1, n), base, n)


def bernoulli_higher_order(m: int, n: int) -> Fraction:
    """Norlund number ``B_n^{(m)}``: ``n!`` times the ``z^n`` coefficient of ``(z/(e^z-1))^m``."""
    if m < 1:
        raise DomainError("order m must be a positive integer")
    if n < 0:
        raise DomainError("index n must be non-negative")
    return _bernoulli_power_series(m, n)[n] * factorial(n)


def bernoulli_higher_order_compositions(m: int, k: int) -> Fraction:
    """``B_k^{(m)}`` through the composition sum over Stirling numbers ``S(r+m, m)``.

    Each part ``r`` contributes ``S(r+m, m) / C(r+m, m)``; the multinomial
    ``k!/prod(r_i!)`` and the sign ``(-1)^t`` of a ``t``-part composition
    complete the sum.  Valid for ``m >= 1``.
    """
    if m < 1 or k < 0:
        raise DomainError("need m >= 1 and k >= 0")
    if k == 0:
        return Fraction(1)
    acc = Fraction(0)
    for t in range(1, k + 1):
        for rs in compositions(k, t):
            term = Fraction(factorial(k))
            for r in rs:
                term *= Fraction(_stirling2(r + m, m), factorial(r) * comb(r + m, m))
            acc += (-1) ** t * term
    return acc


@lru_cache(maxsize=None)
def _second_kind_table(n: int) -> tuple[Fraction, ...]:
    # invert ln(1+t)/t = sum_k (-1)^k t^k / (k+1)
    c = [Fraction((-1) ** k, k + 1) for k in range(n + 1)]
    b: list[Fraction] = [Fraction(1)]
    for k in range(1, n + 1):
        b.append(-sum((c[i] * b[k - i] for i in range(1, k + 1)), Fraction(0)))
    return tuple(b)


def bernoulli_second_kind(n: int) -> Fraction:
    """Bernoulli number of the second kind: coefficient of ``t^n`` in ``t/ln(1+t)``."""
    if n < 0:
        raise DomainError("index must be non-negative")
    return _second_kind_table(n)[n]


def bernoulli_second_kind_closed(l: int) -> Fraction:
    """``b_{l+1}`` from the higher-order Bernoulli closed form, for ``l >= 1``."""
    if l < 1:
        raise DomainError("closed form needs l >= 1")
    s = sum(
        (bernoulli_higher_order(l + 1, k) / factorial(k) * Fraction(l ** (l + 1 - k), factorial(l + 1 - k))
         for k in range(l + 2)),
        Fraction(0),
    )
    return (-1) ** (l + 1) * s


@lru_cache(maxsize=None)
def _euler_even(m: int) -> int:
    # E_{2m} with sum_{k=0}^{m} C(2m, 2k) E_{2k} = 0 for m >= 1
    if m == 0:
        return 1
    return -sum(comb(2 * m, 2 * k) * _euler_even(k) for k in range(m))


def euler_number(n: int) -> int:
    """Euler number ``E_n`` (``E_odd = 0``, ``E_2 = -1``, ``E_4 = 5``)."""
    if n < 0:
        raise DomainError("index must be non-negative")
    if n % 2:
        return 0
    return _euler_even(n // 2)


# --- identities used by the integer-order finite-part formula ---------------


def stirling_norlund_sum(n: int, q: int) -> Fraction:
    """Left side of the Stirling/Norlund sum that equals ``(q+1)! * [n == 1]``."""
    if n < 1 or q < 0:
        raise DomainError("need n >= 1 and q >= 0")
    total = Fraction(0)
    for l in range(1, n + 1):
        inner = sum(
            (bernoulli_higher_order(q + l + 1, k) / factorial(k)
             * Fraction((q + l) ** (l - k - 1), factorial(l - k - 1))
             for k in range(l)),
            Fraction(0),
        )
        total += (-1) ** (l - 1) * factorial(q + l) * inner * _stirling2(q + n, q + l)
    return total


def bernoulli_ratio_sum(m: int) -> Fraction:
    """Stirling-weighted Norlund sum that reproduces ``B_{m+1}/(m+1)``."""
    if m < 1:
        raise DomainError("need m >= 1")
    total = Fraction(0)
    for l in range(1, m + 1):
        inner = sum(
            (bernoulli_higher_order(l + 1, k) / factorial(k)
             * Fraction(l ** (l + 1 - k), factorial(l + 1 - k))
             for k in range(l + 2)),
            Fraction(0),
        )
        total += (-1) ** l * factorial(l) * _stirling2(m, l) * inner
    return total


def stirling_orthogonality(j: int, k: int) -> int:
    """``sum_{l=j}^{k} s(l, j) S(k, l)``; equals ``1`` iff ``j == k``."""
    if j > k:
        return 0
    return sum(_stirling1(l, j) * _stirling2(k, l) for l in range(j, k + 1))


def alternating_stirling_sum(m: int) -> int:
    """``sum_{l=1}^{m} (-1)^l (l-1)! S(m, l)``, which vanishes for ``m >= 2``."""
    return sum((-1) ** l * factorial(l - 1) * _stirling2(m, l) for l in range(1, m + 1))


def format_rational(x: Fraction | int) -> str:
    """Render as ``"p/q"`` (``"p/1"`` for integers) for lossless JSON."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"
