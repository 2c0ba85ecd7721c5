import random
from fractions import Fraction

import numpy as np
import pytest

from classdens import densities as den
from classdens import group_oracle as go
from classdens.arith import psl2_order
from classdens.quadforms import GammaMatrix, in_congruence_subgroup


def test_enumerate_small():
    assert len(go.enumerate_psl2(2)) == 6
    assert len(go.enumerate_psl2(3)) == 12
    m6 = go.enumerate_psl2(6)
    assert len(m6) == 72
    # CRT: reduction mod 2 and mod 3 is a bijection onto pairs
    c2 = go._codes(go.canonicalize(m6 % 2, 2), 2)
    c3 = go._codes(go.canonicalize(m6 % 3, 3), 3)
    assert len(set(zip(c2.tolist(), c3.tolist()))) == 72


def test_enumerate_orders_and_determinants():
    for n in range(1, 31):
        m = go.enumerate_psl2(n)
        assert len(m) == psl2_order(n)
        assert np.all((m[:, 0] * m[:, 3] - m[:, 1] * m[:, 2]) % n == 1 % n)
        # canonical: fixed by canonicalize
        assert np.array_equal(go.canonicalize(m, n), m)


def test_enumerate_cap():
    with pytest.raises(ValueError):
        go.enumerate_psl2(131)
    with pytest.raises(ValueError):
        go.enumerate_psl2(0)


def test_local_data_examples():
    d = go.local_data((2, 1, 1, 1), 5, 1, 0)
    assert d is not None and d.delta == 0 and d.k == 0
    assert go.local_data((1, 0, 0, 1), 5, 1, 0) is None
    assert go.local_data((4, 0, 0, 4), 5, 1, 0) is None
    g = (11, 5, 10, 16)  # det 126 = 1 mod 25, off-diagonal data all divisible by 5 once
    assert (g[0] * g[3] - g[1] * g[2]) % 25 == 1
    d = go.local_data(g, 5, 1, 1)
    assert d.k == 1 and go.local_data(g, 5, 1, 0) is None


def test_local_data_reconstructs_everything_mod_9():
    m = go.enumerate_psl2(9)
    seen = 0
    for g in m.tolist():
        for k in (0, 1):
            d = go.local_data(tuple(g), 3, 2 - k, k)
            if d is not None:
                seen += 1
                assert (d.B * d.B - 4 * d.A * d.C - d.delta) % 3 ** (2 - k) == 0
    assert seen == len(m) - go.degenerate_count(3, 1, 1)


def test_oracle_examples():
    assert go.count_A_oracle(3, 1, 1) == 12
    assert all(go.count_T_oracle(3, 1, 1, d) == 2 for d in range(3))
    assert go.count_A_oracle(2, 1, 5) == 1
    assert go.gamma_hat_count_oracle(5, 1, 0, 0) == den.gamma_hat_count(5, 1, 0, 0) == 24
    for d in range(8):
        assert go.gamma_hat_count_oracle(2, 1, 1, d) == den.gamma_hat_count(2, 1, 1, d)


def test_oracle_partition():
    for p, r, k in [(3, 1, 0), (3, 1, 2), (5, 1, 1), (3, 2, 1)]:
        counts, degen = go._odd_table(p, r, k)
        n = p ** (r + k)
        kk = go._local_arrays(go.enumerate_psl2(n), p, r + k)[0]
        assert sum(counts) == int(np.sum(kk == k))
    for r, k in [(1, 0), (2, 1), (3, 2)]:
        # 2-adic: densities over delta mod 2^(r+2) add up to eta(2^k || u) v(2^(r+k))
        tot = sum(go._two_table(r, k))
        want = (Fraction(1, psl2_order(2 ** k)) - Fraction(1, psl2_order(2 ** (k + 1)))) \
            * psl2_order(2 ** (r + k))
        assert tot == want


def test_crt_examples():
    assert go.crt_class_check(2, 3)
    assert go.crt_class_check(3, 4)
    with pytest.raises(ValueError):
        go.crt_class_check(2, 2)


def test_class_sizes_divide_order():
    for n in (2, 3, 4, 5, 7, 8):
        m, size = go.conjugacy_class_sizes(n)
        assert np.all(len(m) % size == 0)


def test_cong_lemma_examples():
    g = GammaMatrix(2, 1, 1, 1)
    assert in_congruence_subgroup(g, 1)
    assert not in_congruence_subgroup(g, 2)
    assert go.cong_lemma_check(500, seed=3)


def test_random_hyperbolic():
    rng = random.Random(0)
    for _ in range(200):
        g = go.random_hyperbolic(rng)
        assert abs(g.trace) > 2 and g.g11 * g.g22 - g.g12 * g.g21 == 1
