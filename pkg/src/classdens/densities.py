"""Density coefficients eta for class-number sums.

Layers, bottom up:

* local counts T, A and #Gamma-hat for a prime power, and the local
  densities eta(D(p) = delta mod p^r) obtained from them, both as a series
  over the u-valuation k and in closed form;
* the distribution W of the part of u prime to a modulus, by a direct sum
  over m and by a Dirichlet-character Euler product;
* the global coefficients eta(D = delta mod n) and eta(d squarefree,
  d = delta mod n).

For p = 2 every local residue lives modulo 2^(r+2).  Several branches of the
printed 2-adic tables needed repair; see ``count_T`` and ``eta_local_closed``.

The printed global formulas (``eta_progression``, ``eta_fundamental``) ignore
that the u-valuations at the other primes of the modulus also twist D(p).
``eta_progression_twisted`` and ``eta_fundamental_twisted`` keep track of
that twist and of the correlation between p | u and p^2 | D; they agree with
the printed formulas for prime-power moduli without squarefree conditions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .arith import (euler_phi, factorize, inv_v, is_prime, legendre_symbol, primes_upto,
                    psl2_order, sl2_order, valuation)

F = Fraction

DEFAULT_PRIMES = 10 ** 5
DEFAULT_TERMS = 10 ** 6


@dataclass(frozen=True)
class TruncatedReal:
    value: float
    error_bound: float
    truncation_parameter: int
    exact: Fraction | None = None

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class ResidueClassification:
    tag: str
    l: int | None = None


def _check_prime(p: int):
    if not is_prime(p):
        raise ValueError("%r is not prime" % (p,))


def _local_modulus(p: int, r: int) -> int:
    return 2 ** (r + 2) if p == 2 else p ** r


# ------------------------------------------------------------- local counts

@lru_cache(maxsize=None)
def count_T(p: int, r: int, k: int, delta: int) -> int:
    """Number of traces T compatible with D(p) = delta at u-valuation k.

    Odd p: T in Z/p^(r+k) with T^2 = 4 + delta p^(2k) mod p^(r+k).
    p = 2: delta is read mod 2^(r+2) and T runs over Z/2^(r+k+1) with
    T^2 = 4 + delta 4^k mod 2^(r+k+2); this is the count that makes
    #Gamma-hat = T * A / #Z^(2) hold.
    """
    _check_prime(p)
    if r < 1 or k < 0:
        raise ValueError("need r >= 1, k >= 0")
    delta %= _local_modulus(p, r)
    if p == 2:
        return _count_T2(r, k, delta)
    if k >= 1:
        return 2
    q = p ** r
    e = (delta + 4) % q
    if e == 0:
        return p ** (r // 2)
    l2 = valuation(e, p)
    if l2 % 2 == 0 and legendre_symbol(e // p ** l2, p) == 1:
        return 2 * p ** (l2 // 2)
    return 0


def _sqrt_count_2(E: int, m: int) -> int:
    """#{T in Z/2^(m-1) : T^2 = E mod 2^m}, m >= 2."""
    E %= 2 ** m
    if E == 0:
        return 2 ** (m // 2 - 1)
    v = valuation(E, 2)
    if v % 2:
        return 0
    l, w, rest = v // 2, E >> v, m - v
    if w % 2 ** min(3, rest) != 1 % 2 ** min(3, rest):
        return 0
    roots = {1: 1, 2: 2}.get(rest, 4)  # odd roots of w mod 2^rest
    return roots * 2 ** (l - 1) if l >= 1 else roots // 2


def _count_T2(r: int, k: int, delta: int) -> int:
    if k == 1 and (delta % 4 == 3 or r == 1):
        # delta = 3 mod 4 carries no primitive triple, and at r = k = 1 the
        # congruence is only mod 16; count square roots directly
        return _sqrt_count_2(4 + 4 * delta, r + 3)
    if k >= 1:
        if (delta << (2 * k)) % 32:
            return 0
        # T = 2T' with T'^2 = 1 mod 2^(r+k): four roots once r+k >= 3
        return 4 if r + k >= 3 else 2
    mod = 2 ** (r + 2)
    e = (delta + 4) % mod
    if e == 0 or (r % 2 == 1 and e == 2 ** (r + 1)) or (r % 2 == 0 and e == 2 ** r):
        return 2 ** (r // 2)
    l2 = valuation(e, 2)
    if l2 % 2 == 0 and 2 * (l2 // 2) < r and (e >> l2) % 8 == 1:
        return 2 ** (l2 // 2 + 1)
    return 0


@lru_cache(maxsize=None)
def count_A(p: int, r: int, delta: int) -> Fraction:
    """Primitive triples (A, B, C) with B^2 - 4AC = delta.

    Odd p: triples mod p^r, congruence mod p^r.  p = 2: triples mod 2^(r+2)
    with the congruence mod 2^(r+2), divided by 2^6 (the value at r = 1,
    4 | delta is 3/2, so the result is a Fraction in general).
    """
    _check_prime(p)
    if p == 2:
        delta %= 2 ** (r + 2)
        if delta % 8 == 1:
            return F(3 * 2 ** (2 * r), 4)
        if delta % 8 == 5:
            return F(2 ** (2 * r), 4)
        if delta % 4 == 0:
            return F(3 * 2 ** (2 * r), 8)
        return F(0)
    delta %= p ** r
    if delta % p == 0:
        return F(p ** (2 * r - 2) * (p * p - 1))
    return F(p ** (2 * r - 1) * (p + legendre_symbol(delta, p)))


def _lifts(delta: int, mod_from: int, mod_to: int):
    return range(delta % mod_from, mod_to, mod_from)


@lru_cache(maxsize=None)
def eta_local_u(p: int, r: int, k: int, delta: int) -> Fraction:
    """eta(D(p) = delta mod p^r, p^k || u); for p = 2 delta is mod 2^(r+2)."""
    _check_prime(p)
    if p == 2 and r == 1:
        # D(2) mod 8 at k = 1 does not factor as T*A; refine to mod 16
        return sum((eta_local_u(2, 2, k, d) for d in _lifts(delta, 8, 16)), F(0))
    return F(count_T(p, r, k, delta)) * count_A(p, r, delta) / sl2_order(p ** (r + k))


def gamma_hat_count(p: int, r: int, k: int, delta: int) -> Fraction:
    """#Gamma-hat(delta; p^r, k) = T * A / #Z^(2)_(p^(r+k)), an integer.

    The one exception is p = 2, r = 1: a residue mod 8 is finer than
    PSL2(Z/2^(1+k)) can see, and for 4 | delta the value is a half-integer
    weight rather than a count.
    """
    val = eta_local_u(p, r, k, delta) * psl2_order(p ** (r + k))
    if val.denominator != 1 and not (p == 2 and r == 1):
        raise ArithmeticError("non-integral #Gamma-hat at %r" % ((p, r, k, delta),))
    return val


def _tail_start(p: int) -> int:
    # from this k on, T is constant and eta_k decays exactly by p^-3
    return 3 if p == 2 else 1


@lru_cache(maxsize=None)
def eta_local_series(p: int, r: int, delta: int) -> Fraction:
    """Sum over k of eta_local_u, with the geometric tail summed exactly."""
    K0 = _tail_start(p)
    head = sum((eta_local_u(p, r, k, delta) for k in range(K0)), F(0))
    p3 = F(p ** 3)
    return head + eta_local_u(p, r, K0, delta) * p3 / (p3 - 1)


@lru_cache(maxsize=None)
def classify_residue(p: int, r: int, delta: int) -> ResidueClassification:
    """Which closed-form branch a residue belongs to.

    Odd p tags: divisible, minus_four, unit_square_shift(l), otherwise.
    p = 2 (delta mod 2^(r+2)) tags: one_mod_8, five_mod_8, minus_four,
    unit_square_shift(l) for 2 <= l < r/2, val2, val3or4, val5plus and
    zero_measure for delta = 2, 3 mod 4.
    """
    _check_prime(p)
    q = _local_modulus(p, r)
    delta %= q
    if p != 2:
        if delta % p == 0:
            return ResidueClassification("divisible")
        e = (delta + 4) % q
        if e == 0:
            return ResidueClassification("minus_four")
        l2 = valuation(e, p)
        if l2 % 2 == 0 and legendre_symbol(e // p ** l2, p) == 1:
            return ResidueClassification("unit_square_shift", l2 // 2)
        return ResidueClassification("otherwise")
    if delta % 8 == 1:
        return ResidueClassification("one_mod_8")
    if delta % 8 == 5:
        return ResidueClassification("five_mod_8")
    if delta % 4:
        return ResidueClassification("zero_measure")
    e = (delta + 4) % q
    if e == 0 or (r % 2 == 1 and e == 2 ** (r + 1)) or (r % 2 == 0 and e == 2 ** r):
        return ResidueClassification("minus_four")
    l2 = valuation(e, 2)
    if l2 % 2 == 0 and 2 <= l2 // 2 and 2 * (l2 // 2) < r and (e >> l2) % 8 == 1:
        return ResidueClassification("unit_square_shift", l2 // 2)
    v = valuation(delta, 2) if delta else r + 2
    if v == 2:
        return ResidueClassification("val2")
    if v in (3, 4):
        return ResidueClassification("val3or4")
    return ResidueClassification("val5plus")


@lru_cache(maxsize=None)
def eta_local_closed(p: int, r: int, delta: int) -> Fraction:
    """Closed form of eta(D(p) = delta mod p^r) (mod 2^(r+2) when p = 2).

    The 2-adic branch list differs from the printed one in two places: the
    class delta = -4 + 2^r for even r belongs with delta = -4, and for
    r <= 2 the classes 8 | delta (r = 1) and 16 | delta (r = 2) mix
    valuations, so r <= 2 is evaluated by summing over lifts to r = 3.
    """
    _check_prime(p)
    c = classify_residue(p, r, delta)
    if p != 2:
        unit = F(1, p ** (r - 1) * (p * p - 1) * (p ** 3 - 1))
        if c.tag == "divisible":
            return unit * 2 * p * p * (p * p - 1)
        chi = legendre_symbol(delta, p)
        if c.tag == "minus_four":
            return unit * (2 + p ** (r // 2) * (p ** 3 - 1)) * (p + chi)
        if c.tag == "unit_square_shift":
            return unit * 2 * (1 + p ** c.l * (p ** 3 - 1)) * (p + chi)
        return unit * 2 * (p + chi)
    if r <= 2:
        q = 2 ** (r + 2)
        return sum((eta_local_closed(2, 3, d) for d in _lifts(delta, q, 32)), F(0))
    unit = F(1, 7 * 2 ** (r + 4))
    val = {
        "one_mod_8": 1,
        "five_mod_8": 75,
        "val2": 4,
        "val3or4": 32,
        "val5plus": 256,
        "zero_measure": 0,
    }.get(c.tag)
    if val is None:
        l = r // 2 if c.tag == "minus_four" else c.l
        val = 4 + 7 * 2 ** (l + 4 - (0 if c.tag == "unit_square_shift" else 1))
    return unit * val


def eta_local(p: int, r: int, delta: int) -> Fraction:
    """eta(D(p) = delta mod p^r) with an ordinary modulus p^r, any p."""
    if p != 2:
        return eta_local_closed(p, r, delta)
    return eta_two_residue_set({delta % 2 ** r}, r)


def eta_two_residue_set(residues, s: int) -> Fraction:
    """eta(D(2) mod 2^s lies in the given set), via lifts mod 2^(r+2)."""
    if s < 1:
        raise ValueError("s must be >= 1")
    r = max(1, s - 2)
    q, mod = 2 ** s, 2 ** (r + 2)
    want = {x % q for x in residues}
    return sum((eta_local_closed(2, r, d) for d in range(mod) if d % q in want), F(0))


def eta_local_not_p2(p: int, r: int, delta: int) -> Fraction:
    """eta(D(p) = delta mod p^r and p^2 does not divide D(p)), p odd."""
    if p == 2:
        raise ValueError("eta_local_not_p2 is for odd p")
    q = p ** r
    delta %= q
    s = max(r, 2)
    bad = sum((eta_local_closed(p, s, d) for d in _lifts(delta, q, p ** s) if d % (p * p) == 0),
              F(0))
    return eta_local_closed(p, r, delta) - bad


def eta_divides(n: int) -> Fraction:
    """eta(n | D) as the product of the local divisibility densities."""
    out = F(1)
    for p, r in factorize(n):
        out *= eta_local(p, r, 0)
    return out


# ------------------------------------------------------ distribution of u_n

def beta(m: int) -> Fraction:
    """beta(m) = prod over p^l || m of (1/v(p^l) - 1/v(p^(l+1))) / (1 - 1/v(p))."""
    out = F(1)
    for p, l in factorize(m):
        out *= (inv_v(p, l) - inv_v(p, l + 1)) / (1 - inv_v(p, 1))
    return out


def _prime_weights(p: int, fundamental: bool):
    """Weights w(k) = eta(p^k || u [, p^2 not dividing D(p)]) for k < K0 and
    the value at K0, after which they decay exactly like p^(-3k)."""
    K0 = 3 if p == 2 else 1
    w = [inv_v(p, k) - inv_v(p, k + 1) for k in range(K0 + 1)]
    if fundamental:
        w = [x - F(2, p ** (3 * k + 2)) for k, x in enumerate(w)]
    return w, K0


def _G(p: int, z, fundamental: bool):
    """Euler factor sum_k w(k) z^k (numpy-friendly in z)."""
    w, K0 = _prime_weights(p, fundamental)
    out = 0
    for k in range(K0):
        out = out + float(w[k]) * z ** k
    return out + float(w[K0]) * z ** K0 / (1 - z / p ** 3)


def _G_array(ps: np.ndarray, z: np.ndarray, fundamental: bool) -> np.ndarray:
    """Vectorised Euler factor for odd primes ps (K0 = 1)."""
    ps = ps.astype(np.float64)
    p2 = ps * ps
    p3 = p2 * ps
    c = 2 * p2 / (p2 - 1)
    out = 1 + c * (z - 1) / (p3 - z)
    if fundamental:
        out = out - 2 * ps / (p3 - z)
    return out


def _tail_bound(P: int, fundamental: bool) -> float:
    # |G_p(z) - 1| <= 4.5 p^-3 (plain) and <= 2.1 p^-2 (squarefree), summed
    # over p > P with pi(t) < 1.26 t/log t
    if fundamental:
        return 2.1 * 2.52 / (P * math.log(P)) * 1.01
    return 4.5 * 1.26 / (P * P * math.log(P)) * 1.01


def xi(n: int, P: int = DEFAULT_PRIMES) -> TruncatedReal:
    """xi(n) = prod over primes p not dividing n of (1 - 1/v(p))."""
    if P < 100:
        raise ValueError("prime cutoff must be >= 100")
    ps = primes_upto(P)
    ps = ps[n % ps != 0].astype(np.float64)
    vp = np.where(ps == 2, 6.0, ps * (ps * ps - 1) / 2)
    val = float(np.exp(np.sum(np.log1p(-1 / vp))))
    return TruncatedReal(val, 2.0 / P ** 2, P)


class CharacterTable:
    """All Dirichlet characters mod n, built from a cyclic decomposition."""

    def __init__(self, n: int):
        self.n = n
        comps = []  # (modulus, generator, order)
        for p, r in factorize(n):
            q = p ** r
            if p == 2:
                if r >= 2:
                    comps.append((q, q - 1, 2))
                if r >= 3:
                    comps.append((q, 5, 2 ** (r - 2)))
            else:
                comps.append((q, _primitive_root(p, r), (p - 1) * p ** (r - 1)))
        self.orders = [c[2] for c in comps]
        res = np.arange(n)
        self.is_unit = np.gcd(res, n) == 1
        logs = np.zeros((n, len(comps)), dtype=np.int64)
        for j, (q, g, o) in enumerate(comps):
            logs[:, j] = self._component_logs(q, g, o, comps)[res % q]
        self.logs = logs
        tuples = list(product(*[range(o) for o in self.orders]))
        expo = np.array(tuples, dtype=np.float64).reshape(len(tuples), len(comps))
        frac = np.zeros((len(expo), n))
        for j, o in enumerate(self.orders):
            frac += np.outer(expo[:, j], logs[:, j]) / o
        self.values = np.where(self.is_unit, np.exp(2j * np.pi * frac), 0)
        self.phi = len(expo)
        assert self.phi == euler_phi(n)
        if self.phi * self.phi * n <= 5 * 10 ** 7:
            gram = self.values @ self.values.conj().T
            if not np.allclose(gram, self.phi * np.eye(self.phi), atol=1e-8):
                raise AssertionError("character table for %d is not orthogonal" % n)

    @staticmethod
    def _component_logs(q, g, o, comps):
        table = np.zeros(q, dtype=np.int64)
        if q % 2 == 0 and q >= 8:
            # Z/2^r = <-1> x <5>
            x = 1
            for i in range(q // 4):
                if g == 5:
                    table[x] = i
                    table[(-x) % q] = i
                else:
                    table[x] = 0
                    table[(-x) % q] = 1
                x = x * 5 % q
            return table
        x = 1
        for i in range(o):
            table[x] = i
            x = x * g % q
        return table

    def __call__(self, chi_index: int, a: int) -> complex:
        return complex(self.values[chi_index, a % self.n])


def _primitive_root(p: int, r: int) -> int:
    phi = p - 1
    fs = [q for q, _ in factorize(phi)]
    g = 2
    while any(pow(g, phi // q, p) == 1 for q in fs):
        g += 1
    if r >= 2 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


@lru_cache(maxsize=64)
def characters(n: int) -> CharacterTable:
    return CharacterTable(n)


@lru_cache(maxsize=64)
def _W_euler_table(n: int, P: int, fundamental: bool, excluded: tuple = ()):
    """Distribution over units alpha mod n of the part of u prime to n (and
    to the excluded primes), optionally jointly with p^2 not dividing D at
    every prime outside n.  Returns (array over residues, error bound)."""
    tab = characters(n)
    ps = primes_upto(P)
    bad = set(q for q, _ in factorize(n)) | set(excluded)
    ps = np.array([p for p in ps.tolist() if p not in bad], dtype=np.int64)
    logprod = np.zeros(tab.phi, dtype=np.complex128)
    odd = ps[ps != 2]
    chunk = max(1, 4_000_000 // max(tab.phi, 1))
    for i in range(0, len(odd), chunk):
        pc = odd[i:i + chunk]
        z = tab.values[:, pc % n]
        logprod += np.log(_G_array(pc[None, :], z, fundamental)).sum(axis=1)
    if 2 in ps.tolist():
        z2 = tab.values[:, 2 % n]
        logprod += np.log(_G(2, z2, fundamental))
    prod_ = np.exp(logprod)
    W = (tab.values.conj().T @ prod_) / tab.phi
    if np.max(np.abs(W.imag)) > 1e-9:
        raise AssertionError("imaginary residue %.3g in W mod %d" % (np.max(np.abs(W.imag)), n))
    W = np.where(tab.is_unit, W.real, 0.0)
    return W, _tail_bound(P, fundamental)


def W_euler(alpha: int, n: int, P: int = DEFAULT_PRIMES) -> TruncatedReal:
    """W(alpha; n) through the character Euler product."""
    if math.gcd(alpha, n) != 1:
        raise ValueError("alpha must be a unit mod n")
    W, err = _W_euler_table(n, P, False)
    return TruncatedReal(float(W[alpha % n]), err, P)


@lru_cache(maxsize=4)
def _beta_sieve(M: int) -> np.ndarray:
    """beta(m) for 0 <= m <= M as floats (beta(0) unused)."""
    b = np.ones(M + 1)
    for p in primes_upto(M).tolist():
        prev, pk, l = 1.0, p, 1
        while pk <= M:
            cur = beta_prime_power(p, l)
            b[pk::pk] *= cur / prev
            prev, pk, l = cur, pk * p, l + 1
    return b


def beta_prime_power(p: int, l: int) -> float:
    """Tabulated beta(p^l): 2 p^(-3l) (p^3-1)/(p^3-p-2) for odd p, and
    3/20, 3/80, 7/(5 * 2^(3l-2)) for p = 2."""
    if l == 0:
        return 1.0
    if p == 2:
        return {1: 3 / 20, 2: 3 / 80}.get(l, 7 / (5 * 2.0 ** (3 * l - 2)))
    return 2.0 * p ** (-3.0 * l) * (p ** 3 - 1) / (p ** 3 - p - 2)


def W_direct_table(n: int, M: int = DEFAULT_TERMS, P: int = DEFAULT_PRIMES):
    b = _beta_sieve(M)
    m = np.arange(1, M + 1)
    keep = np.gcd(m, n) == 1
    sums = np.bincount(m[keep] % n, weights=b[1:][keep], minlength=n)
    x = xi(n, P)
    err = x.value * 5.46 * M ** -1.5 + x.error_bound
    return x.value * sums, err


def W_direct(alpha: int, n: int, M: int = DEFAULT_TERMS, P: int = DEFAULT_PRIMES) -> TruncatedReal:
    """W(alpha; n) = xi(n) * sum over m = alpha mod n, m <= M of beta(m)."""
    if math.gcd(alpha, n) != 1:
        raise ValueError("alpha must be a unit mod n")
    W, err = W_direct_table(n, M, P)
    return TruncatedReal(float(W[alpha % n]), err, M)


def omega_prefactor(n: int, P: int = DEFAULT_PRIMES) -> TruncatedReal:
    """prod over primes p not dividing 2n of (1 - 2p/(p^3 - 1))."""
    ps = primes_upto(P)
    ps = ps[(ps != 2) & (n % ps != 0)].astype(np.float64)
    val = float(np.exp(np.sum(np.log1p(-2 * ps / (ps ** 3 - 1)))))
    return TruncatedReal(val, _tail_bound(P, True), P)


# ------------------------------------------------------- printed theorems

def _units(n: int):
    return [a for a in range(n) if math.gcd(a, n) == 1]


def eta_progression(n: int, delta: int, P: int = DEFAULT_PRIMES) -> TruncatedReal:
    """eta(D = delta mod n) = sum_alpha W(alpha; n) prod_p eta(D(p) = delta alpha^2 mod p^r)."""
    if n < 1:
        raise ValueError("modulus must be >= 1")
    fac = factorize(n)
    delta %= n
    groups = {}
    for a in _units(n):
        key = delta * a * a % n
        groups.setdefault(key, []).append(a)
    locals_ = {}
    for key in groups:
        val = F(1)
        for p, r in fac:
            val *= eta_local(p, r, key)
        locals_[key] = val
    if len(set(locals_.values())) == 1:
        exact = next(iter(locals_.values()))
        return TruncatedReal(float(exact), 0.0, P, exact)
    W, err = _W_euler_table(n, P, False)
    val = sum(float(locals_[k]) * sum(W[a] for a in al) for k, al in groups.items())
    return TruncatedReal(float(val), err * len(groups), P)


def theorem2_modulus(n: int) -> int:
    """n' = lcm(16, 4n, prod over odd p | n of p^2)."""
    out = math.lcm(16, 4 * n)
    for p, _ in factorize(n):
        out = math.lcm(out, p * p)
    return out


def _two_sets(n: int, target: int):
    """The two 2-adic residue sets of the squarefree theorem for a target
    residue, as (set mod 2^s, s) pairs: D = 1 mod 4 with D = target mod 2^e,
    and D = 8, 12 mod 16 with D = 4 target mod 2^(e+2)."""
    e = valuation(n, 2)
    s1 = max(2, e)
    odd = {c for c in range(2 ** s1) if c % 4 == 1 and (e == 0 or (c - target) % 2 ** e == 0)}
    s2 = max(4, e + 2)
    even = {c for c in range(2 ** s2) if c % 16 in (8, 12) and (c - 4 * target) % 2 ** (e + 2) == 0}
    return (odd, s1), (even, s2)


def eta_fundamental(n: int, delta: int, P: int = DEFAULT_PRIMES) -> TruncatedReal:
    """The printed formula for eta(d squarefree, d = delta mod n)."""
    if n < 1:
        raise ValueError("modulus must be >= 1")
    delta %= n
    n2 = theorem2_modulus(n)
    odd_fac = [(p, r) for p, r in factorize(n) if p != 2]
    om = omega_prefactor(n, P)
    W, err = _W_euler_table(n2, P, False)
    cache = {}
    total = 0.0
    for a in _units(n2):
        key = delta * a * a % n
        if key not in cache:
            (odd, s1), (even, s2) = _two_sets(n, key)
            v1 = eta_two_residue_set(odd, s1)
            v2 = eta_two_residue_set(even, s2)
            for p, r in odd_fac:
                v1 *= eta_local_not_p2(p, r, key)
                v2 *= eta_local_not_p2(p, r, 4 * key)
            cache[key] = float(v1 + v2)
        total += W[a] * cache[key]
    return TruncatedReal(om.value * total, om.error_bound + err * len(cache), P)


# ------------------------------------------------------ twist-aware engine

@lru_cache(maxsize=None)
def _local_table(p: int, s: int):
    """eta_k(D(p) = c mod p^s) for k < K0 and k = K0 (then decays by p^-3).

    Returns (K0, rows) with rows[k] a list indexed by c."""
    K0 = _tail_start(p)
    q = p ** s
    rows = []
    for k in range(K0 + 1):
        if p == 2:
            rr = max(2, s - 2)
            mod = 2 ** (rr + 2)
            row = [F(0)] * q
            for d in range(mod):
                row[d % q] += eta_local_u(2, rr, k, d)
        else:
            row = [eta_local_u(p, s, k, c) for c in range(q)]
        rows.append(row)
    return K0, rows


def _mult_order(a: int, m: int) -> int:
    if m == 1:
        return 1
    x, k = a % m, 1
    while x != 1:
        x = x * a % m
        k += 1
    return k


def _twisted_sum(spec: dict, Wsq: dict, M: int) -> float:
    """Sum over the joint local data at the primes of M.

    spec maps p -> (s_p, accept) with accept a set of residues of D mod
    p^s_p.  Wsq maps alpha^2 mod M to the mass of u prime to M in that
    square class.  D = D(p) * (u / p^k_p)^-2 mod p^s_p.
    """
    primes_ = sorted(spec)
    mods = {p: p ** spec[p][0] for p in primes_}
    groups = {}
    for p in primes_:
        s, accept = spec[p]
        q = mods[p]
        rest = M // q
        L = _mult_order(p * p, rest)
        K0, rows = _local_table(p, s)
        rho = F(1, p ** 3)
        per = []
        for j in range(L):
            w = [F(0)] * q
            for k in range(K0):
                if k % L == j:
                    for c in range(q):
                        w[c] += rows[k][c]
            kj = K0 + ((j - K0) % L)
            scale = rho ** (kj - K0) / (1 - rho ** L)
            for c in range(q):
                w[c] += rows[K0][c] * scale
            g = pow(p, 2 * j, rest)
            # f[t] = mass of residues c with c * t^-1 in accept, t a unit square
            f = {}
            for t in range(q):
                if math.gcd(t, p) != 1:
                    continue
                tinv = pow(t, -1, q)
                f[t] = float(sum((w[c] for c in range(q) if c * tinv % q in accept), F(0)))
            per.append((g, f))
        groups[p] = per
    total = 0.0
    for a2, wa in Wsq.items():
        for choice in product(*[range(len(groups[p])) for p in primes_]):
            val = wa
            for i, p in enumerate(primes_):
                t = a2
                for i2, p2 in enumerate(primes_):
                    if i2 != i:
                        t = t * groups[p2][choice[i2]][0]
                q = mods[p]
                val *= groups[p][choice[i]][1][t % q]
                if val == 0.0:
                    break
            total += val
    return total


def _square_masses(W: np.ndarray, M: int) -> dict:
    out = {}
    for a in _units(M):
        out[a * a % M] = out.get(a * a % M, 0.0) + float(W[a])
    return out


def eta_progression_twisted(n: int, delta: int, P: int = DEFAULT_PRIMES) -> TruncatedReal:
    """eta(D = delta mod n) with D(p) = u_p^2 D and u_p the full p-free part
    of u, including the valuations at the other primes of n."""
    if n < 1:
        raise ValueError("modulus must be >= 1")
    fac = factorize(n)
    if len(fac) <= 1:
        return eta_progression(n, delta, P)
    delta %= n
    spec = {p: (r, {c for c in range(p ** r) if (c - delta) % p ** r == 0}) for p, r in fac}
    W, err = _W_euler_table(n, P, False)
    val = _twisted_sum(spec, _square_masses(W, n), n)
    return TruncatedReal(val, err, P)


def eta_fundamental_twisted(n: int, delta: int, P: int = DEFAULT_PRIMES) -> TruncatedReal:
    """eta(d squarefree, d = delta mod n) with the full twist of D(p) and
    with p | u and p^2 | D treated jointly at every prime."""
    if n < 1:
        raise ValueError("modulus must be >= 1")
    delta %= n
    fac = dict(factorize(n))
    fac.pop(2, None)
    M = theorem2_modulus(n)
    (odd, s1), (even, s2) = _two_sets(n, delta)
    W, err = _W_euler_table(M, P, True)
    Wsq = _square_masses(W, M)
    total = 0.0
    for two_set, s2_, factor in ((odd, s1, 1), (even, s2, 4)):
        spec = {}
        for p, r in factorize(M):
            if p == 2:
                # D mod 2^r: lift the defining set
                spec[2] = (r, {c for c in range(2 ** r) if c % 2 ** s2_ in two_set})
            else:
                rp = fac.get(p, 0)
                tgt = factor * delta
                spec[p] = (r, {c for c in range(p ** r)
                               if c % (p * p) != 0 and (rp == 0 or (c - tgt) % p ** rp == 0)})
        total += _twisted_sum(spec, Wsq, M)
    return TruncatedReal(total, err, P)
