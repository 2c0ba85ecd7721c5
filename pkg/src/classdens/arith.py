"""Elementary multiplicative arithmetic used throughout the package.

Everything exact is returned as ``int`` or ``fractions.Fraction``; floats only
appear in :func:`log_integral`.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

Factorization = list  # list[tuple[int, int]], primes ascending


def _is_prime_det(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime(n: int) -> bool:
    return _is_prime_det(int(n))


@lru_cache(maxsize=65536)
def _factor_tuple(n: int) -> tuple:
    out = []
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    p = 5
    step = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        elif p > 1000 and _is_prime_det(n):
            break
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def factorize(n: int) -> Factorization:
    """Prime factorization of n >= 1 as ascending (p, e) pairs."""
    n = int(n)
    if n < 1:
        raise ValueError("factorize needs n >= 1, got %d" % n)
    return list(_factor_tuple(n))


def moebius(m: int) -> int:
    f = factorize(m)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def omega(m: int) -> int:
    """Number of distinct prime factors."""
    return len(factorize(m))


def coprime_part(n: int, m: int) -> int:
    """Largest divisor of n prime to m."""
    if n < 1 or m < 1:
        raise ValueError("coprime_part needs positive arguments")
    g = math.gcd(n, m)
    while g > 1:
        n //= g
        g = math.gcd(n, g)
    return n


def is_unitary_divisor(m: int, n: int) -> bool:
    return n % m == 0 and math.gcd(m, n // m) == 1


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def legendre_symbol(a: int, p: int) -> int:
    if p == 2 or not is_prime(p):
        raise ValueError("legendre_symbol needs an odd prime, got %r" % p)
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def kronecker_d(D: int, p: int) -> int:
    """Kronecker symbol (D/p) for a prime p (D a discriminant when p = 2)."""
    if p == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    return legendre_symbol(D, p)


def sq_class_count(p: int, r: int) -> int:
    """Number of square roots of 1 modulo p^r."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if p == 2:
        return {1: 1, 2: 2}.get(r, 4)
    return 2


def sl2_order(n: int) -> int:
    """Order of SL2(Z/nZ)."""
    out = 1
    for p, r in factorize(n):
        out *= p ** (3 * r - 2) * (p * p - 1)
    return out


def psl2_order(n: int) -> int:
    """v(n) = #PSL2(Z/nZ) = index of the principal congruence subgroup."""
    out = 1
    for p, r in factorize(n):
        out *= p ** (3 * r - 2) * (p * p - 1) // sq_class_count(p, r)
    return out


def inv_v(p: int, k: int) -> Fraction:
    """1 / v(p^k), with v(1) = 1."""
    if k == 0:
        return Fraction(1)
    return Fraction(1, psl2_order(p ** k))


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out = out // p * (p - 1)
    return out


def primes_upto(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (plain Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def spf_sieve(n: int) -> np.ndarray:
    """Smallest prime factor table for 0..n (0 and 1 map to themselves)."""
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, math.isqrt(n) + 1):
        if spf[p] == 0:
            block = spf[p * p::p]
            block[block == 0] = p
    idx = np.nonzero(spf == 0)[0]
    spf[idx] = idx
    return spf


def _simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return (_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1)
            + _simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1))


def log_integral(x: float, tol: float = 1e-12) -> float:
    """li(x) = int_2^x dt/log t by adaptive Simpson in s = log t.

    After the substitution the integrand is e^s/s, smooth on [log 2, log x].
    The absolute tolerance is tol, relaxed to ~1e-15 relative once the value
    is so large that doubles cannot resolve tol.
    """
    x = float(x)
    if x < 2:
        raise ValueError("log_integral needs x >= 2")
    if x == 2:
        return 0.0
    a, b = math.log(2.0), math.log(x)
    f = lambda s: math.exp(s) / s
    # crude magnitude to scale the tolerance
    scale = x / math.log(x)
    tol = max(tol, 1e-15 * scale)
    # split into unit pieces so recursion stays shallow
    pieces = max(1, int(math.ceil(b - a)))
    h = (b - a) / pieces
    total = 0.0
    for i in range(pieces):
        lo, hi = a + i * h, a + (i + 1) * h
        flo, fhi, fm = f(lo), f(hi), f(0.5 * (lo + hi))
        whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi)
        total += _simpson(f, lo, hi, flo, fm, fhi, whole, tol / pieces, 50)
    return total
