"""Brute-force ground truth over the finite groups SL2(Z/n) and PSL2(Z/n).

PSL2(Z/n) here is SL2(Z/n) modulo the scalars alpha I with alpha^2 = 1,
so its order is v(n).  Elements are int64 arrays of shape (N, 4) holding
(g11, g12, g21, g22).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .arith import psl2_order, sl2_order
from .quadforms import GammaMatrix, in_congruence_subgroup

DEFAULT_CAP = 130


@dataclass(frozen=True)
class LocalData:
    k: int
    T: int
    A: int
    B: int
    C: int
    delta: int


def _check_cap(n: int, cap: int):
    if n < 1:
        raise ValueError("modulus must be >= 1")
    if n > cap:
        raise ValueError("modulus %d exceeds the enumeration cap %d" % (n, cap))


def _sqrt_one(n: int) -> list[int]:
    return [a for a in range(n) if (a * a - 1) % n == 0] if n > 1 else [0]


@lru_cache(maxsize=8)
def enumerate_sl2(n: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All of SL2(Z/n): complete each unimodular column (a, c) and add the
    n multiples of (a, c) to the second column."""
    _check_cap(n, cap)
    if n == 1:
        return np.zeros((1, 4), dtype=np.int64)
    cols = []
    for a in range(n):
        for c in range(n):
            if math.gcd(math.gcd(a, c), n) != 1:
                continue
            t = 0
            while math.gcd(a + t * c, n) != 1:
                t += 1
            ai = pow((a + t * c) % n, -1, n)
            cols.append((a, c, (-t * ai) % n, ai))
    cols = np.array(cols, dtype=np.int64)
    ts = np.arange(n, dtype=np.int64)
    a = np.repeat(cols[:, 0], n)
    c = np.repeat(cols[:, 1], n)
    tt = np.tile(ts, len(cols))
    b = (np.repeat(cols[:, 2], n) + tt * a) % n
    d = (np.repeat(cols[:, 3], n) + tt * c) % n
    out = np.stack([a, b, c, d], axis=1)
    assert len(out) == sl2_order(n)
    return out


def _codes(m: np.ndarray, n: int) -> np.ndarray:
    return ((m[:, 0] * n + m[:, 1]) * n + m[:, 2]) * n + m[:, 3]


def canonicalize(m: np.ndarray, n: int) -> np.ndarray:
    """Lexicographically smallest of alpha * g over alpha^2 = 1 mod n."""
    best = m % n
    bc = _codes(best, n)
    for al in _sqrt_one(n):
        cand = (al * m) % n
        cc = _codes(cand, n)
        sel = cc < bc
        best[sel] = cand[sel]
        bc = np.where(sel, cc, bc)
    return best


@lru_cache(maxsize=8)
def enumerate_psl2(n: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Canonical representatives of PSL2(Z/n), sorted by code; v(n) rows."""
    sl = enumerate_sl2(n, cap)
    can = canonicalize(sl, n)
    codes = np.unique(_codes(can, n))
    out = np.stack([codes // n ** 3, codes // n ** 2 % n, codes // n % n, codes % n], axis=1)
    assert len(out) == psl2_order(n)
    return out


def _vals(x: np.ndarray, p: int, cap_v: int) -> np.ndarray:
    """p-adic valuation of residues, with 0 mapped to cap_v."""
    v = np.zeros_like(x)
    y = x.copy()
    live = y != 0
    v[~live] = cap_v
    while live.any():
        div = live & (y % p == 0)
        if not div.any():
            break
        v[div] += 1
        y[div] //= p
        live = div
    return np.minimum(v, cap_v)


def _local_arrays(m: np.ndarray, p: int, N: int):
    """k, A, B, C (mod p^(N-k)) for matrices mod p^N."""
    q = p ** N
    g11, g12, g21, g22 = (m[:, i] % q for i in range(4))
    diff = (g11 - g22) % q
    k = np.minimum(np.minimum(_vals(g21, p, N), _vals(diff, p, N)), _vals(g12, p, N))
    pk = p ** np.minimum(k, N)
    A = g21 // pk
    B = diff // pk
    C = ((-g12) % q) // pk
    return k, A, B, C, (g11 + g22) % q


def local_data(g, p: int, r: int, k: int):
    """Eq.-(modp) data of a matrix mod p^(r+k), or None if its u-valuation
    is not k.  For p = 2 the discriminant is only determined mod 2^(r+1)
    at this level, and delta is reported to that precision."""
    n = p ** (r + k)
    m = np.array([g], dtype=np.int64) % n
    kk, A, B, C, T = _local_arrays(m, p, r + k)
    if int(kk[0]) != k:
        return None
    A, B, C, T = int(A[0]), int(B[0]), int(C[0]), int(T[0])
    prec = p ** r if p != 2 else 2 ** (r + 1)
    delta = (B * B - 4 * A * C) % prec
    # rebuild: g11 = (T + B p^k)/2 needs the halving in a lift for p = 2
    rebuilt = ((T + B * p ** k) * pow(2, -1, n) % n if p != 2 else None)
    if rebuilt is not None and rebuilt != int(m[0, 0]):
        raise AssertionError("reconstruction failed for %r" % (g,))
    lhs = T * T % (p ** (r + k) if p != 2 else 2 ** (r + k))
    rhs = (4 + delta * p ** (2 * k)) % (p ** (r + k) if p != 2 else 2 ** (r + k))
    if lhs != rhs:
        raise AssertionError("trace congruence fails for %r" % (g,))
    return LocalData(k, T, A, B, C, delta)


@lru_cache(maxsize=None)
def _odd_table(p: int, r: int, k: int):
    """Counts of PSL2(Z/p^(r+k)) elements by D(p) mod p^r at valuation k,
    plus the number of elements with valuation >= r + k (degenerate)."""
    n = p ** (r + k)
    m = enumerate_psl2(n)
    kk, A, B, C, _ = _local_arrays(m, p, r + k)
    sel = kk == k
    q = p ** r
    d = (B[sel] * B[sel] - 4 * A[sel] * C[sel]) % q
    counts = np.bincount(d, minlength=q)
    degenerate = int(np.sum(kk >= r + k))
    return counts, degenerate


@lru_cache(maxsize=None)
def _two_table(r: int, k: int):
    """Densities in SL2(Z/2^N), N = r + k + 1, of valuation k and
    D(2) = delta mod 2^(r+2); scaled to PSL2(Z/2^(r+k)) counts."""
    N = r + k + 1
    m = enumerate_sl2(2 ** N)
    kk, A, B, C, _ = _local_arrays(m, 2, N)
    sel = kk == k
    q = 2 ** (r + 2)
    d = (B[sel] * B[sel] - 4 * A[sel] * C[sel]) % q
    counts = np.bincount(d, minlength=q)
    scale = Fraction(psl2_order(2 ** (r + k)), sl2_order(2 ** N))
    return [c * scale for c in counts.tolist()]


def gamma_hat_count_oracle(p: int, r: int, k: int, delta: int):
    """#{g in PSL2(Z/p^(r+k)) : u-valuation k, D(p) = delta} by enumeration.

    For p = 2, delta is mod 2^(r+2); the count is the density over the lift
    SL2(Z/2^(r+k+1)), where D(2) mod 2^(r+2) is determined, times v(2^(r+k)).
    """
    if p == 2:
        val = _two_table(r, k)[delta % 2 ** (r + 2)]
        if val.denominator != 1 and r > 1:
            raise ArithmeticError("non-integral 2-adic count at %r" % ((r, k, delta),))
        return val
    counts, _ = _odd_table(p, r, k)
    return int(counts[delta % p ** r])


def degenerate_count(p: int, r: int, k: int) -> int:
    """Elements of PSL2(Z/p^(r+k)) with u-valuation >= r + k (odd p)."""
    return _odd_table(p, r, k)[1]


def count_T_oracle(p: int, r: int, k: int, delta: int) -> int:
    if p == 2:
        mod = 2 ** (r + k + 2)
        return sum(1 for T in range(2 ** (r + k + 1))
                   if (T * T - 4 - delta * 4 ** k) % mod == 0)
    mod = p ** (r + k)
    return sum(1 for T in range(mod) if (T * T - 4 - delta * p ** (2 * k)) % mod == 0)


@lru_cache(maxsize=None)
def _A_table(p: int, r: int):
    q = 2 ** (r + 2) if p == 2 else p ** r
    x = np.arange(q, dtype=np.int64)
    A, B, C = np.meshgrid(x, x, x, indexing="ij")
    prim = ~((A % p == 0) & (B % p == 0) & (C % p == 0))
    d = (B * B - 4 * A * C) % q
    return np.bincount(d[prim], minlength=q)


def count_A_oracle(p: int, r: int, delta: int):
    """Primitive triples by direct enumeration (for p = 2: mod 2^(r+2), /64)."""
    c = int(_A_table(p, r)[delta % (2 ** (r + 2) if p == 2 else p ** r)])
    return Fraction(c, 64) if p == 2 else Fraction(c)


# ------------------------------------------------------------ conjugacy

def _index_of(m: np.ndarray, n: int, codes_sorted: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(codes_sorted, _codes(canonicalize(m, n), n))
    assert np.all(codes_sorted[idx] == _codes(canonicalize(m, n), n))
    return idx


def _mul(x: np.ndarray, y, n: int) -> np.ndarray:
    a, b, c, d = (x[:, i] for i in range(4))
    e, f, g, h = y
    return np.stack([(a * e + b * g) % n, (a * f + b * h) % n,
                     (c * e + d * g) % n, (c * f + d * h) % n], axis=1)


def _lmul(y, x: np.ndarray, n: int) -> np.ndarray:
    e, f, g, h = y
    a, b, c, d = (x[:, i] for i in range(4))
    return np.stack([(e * a + f * c) % n, (e * b + f * d) % n,
                     (g * a + h * c) % n, (g * b + h * d) % n], axis=1)


@lru_cache(maxsize=8)
def conjugacy_class_sizes(n: int, cap: int = DEFAULT_CAP) -> tuple[np.ndarray, np.ndarray]:
    """(elements, class size of each element) for PSL2(Z/n); classes are the
    connected components under conjugation by S and T, which generate."""
    m = enumerate_psl2(n, cap)
    codes = _codes(m, n)
    N = len(m)
    if n == 1:
        return m, np.ones(1, dtype=np.int64)
    S, Si = (0, n - 1, 1, 0), (0, 1, n - 1, 0)
    T, Ti = (1, 1, 0, 1), (1, n - 1, 0, 1)
    rows, cols = [], []
    for g, gi in ((S, Si), (T, Ti)):
        conj = _lmul(gi, _mul(m, g, n), n)
        rows.append(np.arange(N))
        cols.append(_index_of(conj, n, codes))
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(N, N))
    _, labels = connected_components(graph, directed=True, connection="weak")
    sizes = np.bincount(labels)
    return m, sizes[labels]


def crt_class_check(n1: int, n2: int, cap: int = DEFAULT_CAP) -> bool:
    """Every class of PSL2(Z/n1n2) has size #[g]_n1 * #[g]_n2."""
    if math.gcd(n1, n2) != 1:
        raise ValueError("moduli must be coprime")
    n = n1 * n2
    _check_cap(n, cap)
    m, size = conjugacy_class_sizes(n, cap)
    prod_ = np.ones(len(m), dtype=np.int64)
    for q in (n1, n2):
        mq, sq = conjugacy_class_sizes(q, cap)
        idx = _index_of(m % q, q, _codes(mq, q))
        prod_ *= sq[idx]
    return bool(np.all(prod_ == size))


def random_hyperbolic(rng: random.Random, length: int = 12) -> GammaMatrix:
    """Random word in S, T, T^-1 with |trace| > 2."""
    gens = [(0, -1, 1, 0), (1, 1, 0, 1), (1, -1, 0, 1)]
    while True:
        a, b, c, d = 1, 0, 0, 1
        for _ in range(rng.randint(2, length)):
            e, f, g, h = rng.choice(gens)
            a, b, c, d = a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h
        if abs(a + d) > 2:
            return GammaMatrix.canonical(a, b, c, d)


def cong_lemma_check(sample_size: int = 10 ** 4, seed: int = 0, nmax: int = 12) -> bool:
    """Membership by definition agrees with n | u_gamma on random words and
    on their small powers (which land in deeper congruence subgroups)."""
    rng = random.Random(seed)
    for _ in range(sample_size):
        g = random_hyperbolic(rng)
        h = g
        for j in range(1, 4):
            for n in range(1, nmax + 1):
                in_congruence_subgroup(h, n)  # raises on disagreement
            h = h @ g
    return True
