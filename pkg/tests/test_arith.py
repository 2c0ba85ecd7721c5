import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from scipy.special import expi

from classdens import arith
from classdens.group_oracle import enumerate_psl2


def test_factorize_examples():
    assert arith.factorize(1) == []
    assert arith.factorize(12) == [(2, 2), (3, 1)]
    assert arith.factorize(7500) == [(2, 2), (3, 1), (5, 4)]
    with pytest.raises(ValueError):
        arith.factorize(0)


def _trial(n):
    out, p = [], 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


@given(st.integers(1, 10 ** 12))
def test_factorize_reconstructs(n):
    f = arith.factorize(n)
    assert math.prod(p ** e for p, e in f) == n
    assert [p for p, _ in f] == sorted({p for p, _ in f})
    assert all(arith.is_prime(p) and e >= 1 for p, e in f)


@given(st.integers(1, 10 ** 6))
def test_factorize_matches_trial_division(n):
    assert arith.factorize(n) == _trial(n)


def test_factorize_large_prime_cofactor():
    n = 2 ** 3 * 1000003 * 999983
    assert arith.factorize(n) == [(2, 3), (999983, 1), (1000003, 1)]


def test_moebius_examples_and_sum():
    assert (arith.moebius(1), arith.moebius(6), arith.moebius(12)) == (1, 1, 0)
    for n in range(1, 10 ** 4 + 1):
        divs = set()
        for d in range(1, math.isqrt(n) + 1):
            if n % d == 0:
                divs |= {d, n // d}
        assert sum(arith.moebius(d) for d in divs) == (1 if n == 1 else 0)


def test_omega():
    assert [arith.omega(m) for m in (1, 8, 30)] == [0, 1, 3]


@given(st.integers(1, 10 ** 9), st.integers(1, 10 ** 6))
def test_coprime_part(n, m):
    c = arith.coprime_part(n, m)
    assert n % c == 0 and math.gcd(c, m) == 1
    assert math.gcd(n // c, c) == 1
    # maximal: what is removed only involves primes of m
    rest = n // c
    for p, _ in arith.factorize(rest):
        assert m % p == 0


def test_coprime_part_examples():
    assert arith.coprime_part(12, 2) == 3
    assert arith.coprime_part(12, 35) == 12
    assert arith.coprime_part(360, 6) == 5


def test_unitary_divisor():
    assert arith.is_unitary_divisor(4, 12)
    assert not arith.is_unitary_divisor(2, 12)
    assert all(arith.is_unitary_divisor(1, n) for n in range(1, 50))


def test_legendre():
    assert arith.legendre_symbol(1, 5) == 1
    assert arith.legendre_symbol(2, 5) == -1
    assert arith.legendre_symbol(10, 5) == 0
    for p in [q for q in range(3, 98) if arith.is_prime(q)]:
        squares = {a * a % p for a in range(1, p)}
        for a in range(-p, 2 * p):
            ls = arith.legendre_symbol(a, p)
            assert ls % p == pow(a, (p - 1) // 2, p)
            assert ls == (0 if a % p == 0 else (1 if a % p in squares else -1))
    for bad in (2, 9, 1):
        with pytest.raises(ValueError):
            arith.legendre_symbol(3, bad)


def test_kronecker_at_two():
    assert [arith.kronecker_d(D, 2) for D in (1, 5, 8, 17, 13)] == [1, -1, 0, 1, -1]


def test_sq_class_count():
    assert arith.sq_class_count(2, 1) == 1
    assert arith.sq_class_count(2, 2) == 2
    assert arith.sq_class_count(3, 5) == 2
    assert arith.sq_class_count(2, 3) == 4
    for p, r in [(2, 1), (2, 2), (2, 3), (2, 5), (3, 2), (5, 1), (7, 2)]:
        q = p ** r
        assert arith.sq_class_count(p, r) == sum(1 for a in range(q) if a * a % q == 1)


def test_psl2_order_examples():
    assert [arith.psl2_order(n) for n in (1, 2, 3, 6)] == [1, 6, 12, 72]


def test_psl2_order_matches_enumeration():
    for n in range(1, 31):
        assert len(enumerate_psl2(n)) == arith.psl2_order(n)


@given(st.integers(1, 2000), st.integers(1, 2000))
def test_psl2_multiplicative(a, b):
    if math.gcd(a, b) == 1:
        assert arith.psl2_order(a * b) == arith.psl2_order(a) * arith.psl2_order(b)


def test_inv_v_and_phi():
    assert arith.inv_v(5, 0) == 1
    assert arith.inv_v(5, 1) == Fraction(1, 60)
    for n in range(1, 200):
        assert arith.euler_phi(n) == sum(1 for a in range(n) if math.gcd(a, n) == 1)


def test_sieves():
    ps = arith.primes_upto(10 ** 4).tolist()
    assert ps == [n for n in range(10 ** 4 + 1) if arith.is_prime(n)]
    spf = arith.spf_sieve(5000)
    for n in range(2, 5001):
        assert spf[n] == arith.factorize(n)[0][0]


def test_log_integral_examples():
    assert arith.log_integral(2) == 0.0
    with pytest.raises(ValueError):
        arith.log_integral(1.5)
    li2 = expi(math.log(2.0))
    assert abs(arith.log_integral(10) - (expi(math.log(10.0)) - li2)) < 1e-10
    assert arith.log_integral(1e6) > arith.log_integral(1e5)


@given(st.floats(2.0, 1e4))
def test_log_integral_against_exponential_integral(x):
    li2 = expi(math.log(2.0))
    assert abs(arith.log_integral(x) - (expi(math.log(x)) - li2)) < 1e-10


def test_log_integral_large_relative():
    x = 1e12
    ref = expi(math.log(x)) - expi(math.log(2.0))
    assert abs(arith.log_integral(x) / ref - 1) < 1e-12
