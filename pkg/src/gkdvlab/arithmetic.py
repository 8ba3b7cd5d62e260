"""Exact integer counting: divisors, divisors in short intervals, cubic sums.

Everything here works on Python ints, so cubes of large frequencies never
overflow.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

log = logging.getLogger(__name__)


class RegimeError(ValueError):
    """A query lies outside the regime where the counting bounds are claimed."""


def divisor_count(n: int) -> int:
    """Number of positive divisors of |n| by trial division up to sqrt(|n|)."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("0 has infinitely many divisors")
    count = 0
    r = math.isqrt(n)
    for d in range(1, r + 1):
        if n % d == 0:
            count += 2
    return count - (1 if r * r == n else 0)


@dataclass(frozen=True)
class IntervalDivisorQuery:
    """Pairs (l, n) with |l - lam| <= L, |n - xi| <= N and n dividing l."""

    xi: int
    lam: int
    N: int
    L: int

    def regime_violations(self) -> list[str]:
        out = []
        if self.L < 1 or self.N < 1:
            out.append("L, N >= 1")
        if 100 * max(self.L, self.N) > abs(self.xi):
            out.append("100 max(L, N) <= |xi|")
        if abs(self.xi) > 10 * abs(self.lam):
            out.append("|xi| <= 10 |lambda|")
        return out

    @property
    def in_regime(self) -> bool:
        return not self.regime_violations()

    @property
    def second_bound_applies(self) -> bool:
        """|lambda| <= |xi|^3 and N < |xi|^(1/6) / 2, on top of the base regime."""
        xi = abs(self.xi)
        return self.in_regime and abs(self.lam) <= xi**3 and (2 * self.N) ** 6 < xi


def _multiples_in(n: int, lo: int, hi: int) -> int:
    n = abs(n)
    return hi // n - (lo - 1) // n


def interval_divisor_count(q: IntervalDivisorQuery, force: bool = False) -> int:
    """Exact count; out-of-regime queries raise unless ``force`` is set."""
    if not force:
        bad = q.regime_violations()
        if bad:
            raise RegimeError(f"query outside the regime: {', '.join(bad)}")
    lo, hi = q.lam - q.L, q.lam + q.L
    return sum(_multiples_in(n, lo, hi) for n in range(q.xi - q.N, q.xi + q.N + 1) if n != 0)


def cubic_sum_factorization(xs: Sequence[int]) -> int:
    """3(x1 + x2)(x2 + x3)(x3 + x1) for a zero-sum quadruple.

    Its magnitude equals |sum x_i^3|; the sign is the opposite one
    (sum x_i^3 = -3(x1 + x2)(x2 + x3)(x3 + x1)), which is checked too.
    """
    x1, x2, x3, x4 = (int(v) for v in xs)
    if x1 + x2 + x3 + x4 != 0:
        raise ValueError("the quadruple must sum to zero")
    out = 3 * (x1 + x2) * (x2 + x3) * (x3 + x1)
    cubes = x1**3 + x2**3 + x3**3 + x4**3
    if cubes != -out:
        raise ArithmeticError(f"cubic identity failed on {xs}")
    return out


def observed_sign(xs: Sequence[int]) -> int:
    """Sign s with sum x_i^3 = s * 3(x1 + x2)(x2 + x3)(x3 + x1), or 0 when both vanish."""
    f = cubic_sum_factorization(xs)
    return 0 if f == 0 else -1


class CubicBound(NamedTuple):
    lhs: int
    witness: tuple[int, int, int]
    product: int
    constant: int
    holds: bool


def cubic_bound_constant(k: int) -> int:
    # with m1 >= m2 >= m3 the top magnitudes: |x1 + x2| <= (k-1) m3 and
    # m1 <= k m2, so |x1^3 + x2^3| <= (k-1)(k+2) m1 m2 m3; the other k-1
    # cubes add at most m1 m2 m3 each
    return (k - 1) * (k + 3)


def cubic_sum_bound_check(xs: Sequence[int], constant: int | None = None) -> CubicBound:
    """|sum x_i^3| against C |x1 x2 x3| for the three largest magnitudes."""
    xs = [int(v) for v in xs]
    k = len(xs) - 1
    if k < 2:
        raise ValueError("need at least three integers")
    if sum(xs) != 0:
        raise ValueError("the tuple must sum to zero")
    top = tuple(sorted(xs, key=abs, reverse=True)[:3])
    lhs = sum(v**3 for v in xs)
    prod = abs(top[0] * top[1] * top[2])
    C = cubic_bound_constant(k) if constant is None else constant
    return CubicBound(lhs, top, prod, C, abs(lhs) <= C * prod)


def is_resonant(xi: int, tau: int) -> bool:
    return tau == xi**3


def count_cubic_representations(xi: int, tau: int, N: int) -> int:
    """Ordered triples |x_i| <= N with x1 + x2 + x3 = xi and sum of cubes tau.

    Uses xi^3 - tau = 3 a b c with a = x1 + x2, b = x2 + x3, c = x3 + x1 and
    a + b + c = 2 xi.  The resonant case tau = xi^3 (some pair sums to zero)
    is enumerated directly.
    """
    xi, tau, N = int(xi), int(tau), int(N)
    if N < 1:
        raise ValueError("N must be positive")
    if is_resonant(xi, tau):
        log.debug("resonant case xi=%d, counted directly", xi)
        return count_cubic_representations_bruteforce(xi, tau, N)
    D = xi**3 - tau
    if D % 3:
        return 0
    P = D // 3
    count = 0
    for a in range(-2 * N, 2 * N + 1):
        if a == 0 or P % a:
            continue
        x3 = xi - a
        if abs(x3) > N:
            continue
        s, p = 2 * xi - a, P // a  # b + c and b * c
        disc = s * s - 4 * p
        if disc < 0:
            continue
        r = math.isqrt(disc)
        if r * r != disc:
            continue
        for b in {(s + r) // 2, (s - r) // 2} if (s + r) % 2 == 0 else ():
            c = s - b
            x1, x2 = xi - b, xi - c
            if abs(x1) <= N and abs(x2) <= N:
                count += 1
    return count


def count_cubic_representations_bruteforce(xi: int, tau: int, N: int) -> int:
    """O(N^2) enumeration over (x1, x2)."""
    count = 0
    for x1 in range(-N, N + 1):
        for x2 in range(-N, N + 1):
            x3 = xi - x1 - x2
            if abs(x3) <= N and x1**3 + x2**3 + x3**3 == tau:
                count += 1
    return count
