import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkdvlab.arithmetic import (
    IntervalDivisorQuery,
    RegimeError,
    count_cubic_representations,
    count_cubic_representations_bruteforce,
    cubic_bound_constant,
    cubic_sum_bound_check,
    cubic_sum_factorization,
    divisor_count,
    interval_divisor_count,
    observed_sign,
)


def sieve_divisor_counts(n_max):
    d = [0] * (n_max + 1)
    for a in range(1, n_max + 1):
        for m in range(a, n_max + 1, a):
            d[m] += 1
    return d


def rectangle_oracle(q):
    return sum(
        1
        for l in range(q.lam - q.L, q.lam + q.L + 1)
        for n in range(q.xi - q.N, q.xi + q.N + 1)
        if n != 0 and l % n == 0
    )


def divisor_list_oracle(q):
    # enumerate every divisor of each l, then keep those in the n-interval
    lo, hi = q.xi - q.N, q.xi + q.N
    total = 0
    for l in range(q.lam - q.L, q.lam + q.L + 1):
        if l == 0:
            total += sum(1 for n in range(lo, hi + 1) if n != 0)
            continue
        divs = set()
        for d in range(1, math.isqrt(abs(l)) + 1):
            if l % d == 0:
                divs |= {d, abs(l) // d, -d, -(abs(l) // d)}
        total += sum(1 for d in divs if lo <= d <= hi)
    return total


def random_query(rng, second_bound=False):
    while True:
        xi = rng.choice([-1, 1]) * rng.randint(100, 20000)
        lam = rng.choice([-1, 1]) * rng.randint(abs(xi) // 10 + 1, abs(xi) ** 2)
        top = abs(xi) // 100
        N = rng.randint(1, top)
        L = rng.randint(1, top)
        if second_bound:
            N = rng.randint(1, max(1, int(abs(xi) ** (1 / 6) / 2)))
        q = IntervalDivisorQuery(xi, lam, N, L)
        if q.in_regime and (q.second_bound_applies or not second_bound):
            return q


# divisor_count -----------------------------------------------------------------


def test_divisor_count_examples():
    assert divisor_count(1) == 1
    assert divisor_count(12) == 6
    assert divisor_count(-12) == 6
    assert divisor_count(7919) == 2
    assert divisor_count(999983) == 2
    with pytest.raises(ValueError):
        divisor_count(0)


def test_divisor_count_against_sieve():
    d = sieve_divisor_counts(5000)
    assert all(divisor_count(n) == d[n] for n in range(1, 5001))


def test_divisor_count_multiplicative():
    rng = random.Random(3)
    checked = 0
    while checked < 2000:
        m, n = rng.randint(1, 10**4), rng.randint(1, 10**4)
        if math.gcd(m, n) == 1:
            assert divisor_count(m * n) == divisor_count(m) * divisor_count(n)
            checked += 1


# interval divisors ---------------------------------------------------------------


def test_interval_examples():
    assert interval_divisor_count(IntervalDivisorQuery(30, 900, 2, 0), force=True) == 1
    assert interval_divisor_count(IntervalDivisorQuery(30, 1000, 2, 2), force=True) == 0


def test_regime_guards():
    with pytest.raises(RegimeError, match="100 max"):
        interval_divisor_count(IntervalDivisorQuery(30, 900, 2, 0))
    assert not IntervalDivisorQuery(1000, 50, 1, 1).in_regime
    assert IntervalDivisorQuery(1000, 100, 10, 10).in_regime
    assert not IntervalDivisorQuery(1000, 100, 10, 10).second_bound_applies
    assert IntervalDivisorQuery(10**6, 10**6, 4, 4).second_bound_applies


def test_interval_count_matches_oracles():
    rng = random.Random(11)
    for _ in range(300):
        q = random_query(rng)
        exact = interval_divisor_count(q)
        assert exact == rectangle_oracle(q)
        if abs(q.lam) + q.L < 10**6:
            assert exact == divisor_list_oracle(q)


def test_interval_bounds_in_regime():
    rng = random.Random(12)
    for _ in range(300):
        q = random_query(rng)
        c = interval_divisor_count(q)
        assert c <= q.N * (2 * q.L + 1)
        assert c <= 3 * q.N
    for _ in range(300):
        q = random_query(rng, second_bound=True)
        assert interval_divisor_count(q) <= 3 * q.L


def test_dense_divisor_pile_up():
    # lambda with many divisors near xi still respects the bounds
    q = IntervalDivisorQuery(2520, 2520 * 1000, 25, 25)
    assert interval_divisor_count(q) == rectangle_oracle(q)


# cubic identities ----------------------------------------------------------------


def test_factorization_examples():
    assert cubic_sum_factorization((1, 1, -1, -1)) == 0
    assert cubic_sum_factorization((1, 2, 3, -6)) == 180
    assert sum(v**3 for v in (1, 2, 3, -6)) == -180
    assert observed_sign((1, 2, 3, -6)) == -1
    assert observed_sign((1, 1, -1, -1)) == 0
    with pytest.raises(ValueError):
        cubic_sum_factorization((1, 2, 3, 4))


@settings(max_examples=500)
@given(st.lists(st.integers(-10**12, 10**12), min_size=3, max_size=3))
def test_factorization_identity(x):
    xs = (*x, -sum(x))
    f = cubic_sum_factorization(xs)
    assert abs(f) == abs(sum(v**3 for v in xs))


def test_cubic_bound_examples():
    assert cubic_sum_bound_check((5, -5, 0, 0)).lhs == 0
    r = cubic_sum_bound_check((100, -99, -1, 0))
    assert r.lhs == 29700 and r.product == 9900 and r.holds
    with pytest.raises(ValueError):
        cubic_sum_bound_check((1, 2, 3))


@settings(max_examples=300)
@given(st.integers(2, 6), st.data())
def test_cubic_bound_fuzz(k, data):
    xs = data.draw(st.lists(st.integers(-10**6, 10**6), min_size=k, max_size=k))
    xs.append(-sum(xs))
    assert cubic_sum_bound_check(xs).holds


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_bound_family_ratio(k):
    # (m + k - 1, -m, -1, ..., -1): the ratio tends to 3(k - 1) from below
    m = 10**6
    r = cubic_sum_bound_check([m + k - 1, -m] + [-1] * (k - 1))
    assert r.holds
    assert abs(r.lhs) / r.product == pytest.approx(3 * (k - 1), rel=1e-5)


def test_naive_constant_fails_for_large_k():
    xs = [10**6 + 5, -(10**6)] + [-1] * 5
    assert not cubic_sum_bound_check(xs, constant=2 * 7).holds
    assert cubic_sum_bound_check(xs).holds
    assert cubic_bound_constant(6) == 45


# cubic representations -----------------------------------------------------------


def test_representation_examples():
    assert count_cubic_representations(3, 3, 10) == 4
    assert count_cubic_representations(0, 1, 50) == count_cubic_representations_bruteforce(0, 1, 50)
    with pytest.raises(ValueError):
        count_cubic_representations(0, 0, 0)


def test_resonant_case_is_enumerated():
    # tau = xi^3: any pair summing to zero plus xi
    assert count_cubic_representations(2, 8, 5) == count_cubic_representations_bruteforce(2, 8, 5)
    assert count_cubic_representations(0, 0, 3) == count_cubic_representations_bruteforce(0, 0, 3)


@pytest.mark.parametrize("N", [5, 20, 60])
def test_representations_match_bruteforce_on_grid(N):
    rng = random.Random(N)
    for _ in range(60):
        x = [rng.randint(-N, N) for _ in range(3)]
        xi, tau = sum(x), sum(v**3 for v in x)
        assert count_cubic_representations(xi, tau, N) == count_cubic_representations_bruteforce(xi, tau, N)
        tau2 = tau + rng.randint(-5, 5)
        assert count_cubic_representations(xi, tau2, N) == count_cubic_representations_bruteforce(xi, tau2, N)


def test_representations_exhaustive_small():
    N = 6
    counts = {}
    for a in range(-N, N + 1):
        for b in range(-N, N + 1):
            for c in range(-N, N + 1):
                key = (a + b + c, a**3 + b**3 + c**3)
                counts[key] = counts.get(key, 0) + 1
    for (xi, tau), n in counts.items():
        assert count_cubic_representations(xi, tau, N) == n
