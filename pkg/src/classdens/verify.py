"""Formula-versus-enumeration suites shared by the CLI and the tests.

Each suite walks a key range, compares a closed form against an independent
route and stops at the first disagreement.  Functions are looked up on the
``densities`` module at call time so a test can patch one of them and watch
the suite fail.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import densities, group_oracle

ODD_PRIMES = (3, 5, 7, 11)


@dataclass
class SuiteResult:
    name: str
    cases: int
    passed: bool
    first_failure: tuple | None = None
    detail: str = ""


def odd_keys(max_modulus: int = 125):
    """(p, r, k, delta) with p odd and p^(r+k) <= max_modulus."""
    for p in ODD_PRIMES:
        r = 1
        while p ** r <= max_modulus:
            k = 0
            while p ** (r + k) <= max_modulus:
                for d in range(p ** r):
                    yield p, r, k, d
                k += 1
            r += 1


def two_keys(max_modulus: int = 256):
    """(2, r, k, delta) with delta mod 2^(r+2) and 2^(r+k+2) <= max_modulus."""
    r = 1
    while 2 ** (r + 2) <= max_modulus:
        k = 0
        while 2 ** (r + k + 2) <= max_modulus:
            for d in range(2 ** (r + 2)):
                yield 2, r, k, d
            k += 1
        r += 1


def _run(name, keys, check):
    n = 0
    for key in keys:
        n += 1
        got, want = check(*key)
        if got != want:
            return SuiteResult(name, n, False, key, "formula %s, oracle %s" % (got, want))
    return SuiteResult(name, n, True)


def _keys(odd_max, two_max):
    return list(odd_keys(odd_max)) + list(two_keys(two_max))


def suite_T(odd_max=125, two_max=256):
    return _run("count_T", _keys(odd_max, two_max),
                lambda p, r, k, d: (densities.count_T(p, r, k, d),
                                    group_oracle.count_T_oracle(p, r, k, d)))


def suite_A(odd_max=125, two_max=256):
    keys = sorted({(p, r, d) for p, r, _, d in _keys(odd_max, two_max)})
    return _run("count_A", keys,
                lambda p, r, d: (densities.count_A(p, r, d), group_oracle.count_A_oracle(p, r, d)))


def suite_gamma_hat(odd_max=125, two_max=256):
    return _run("gamma_hat", _keys(odd_max, two_max),
                lambda p, r, k, d: (densities.gamma_hat_count(p, r, k, d),
                                    group_oracle.gamma_hat_count_oracle(p, r, k, d)))


def suite_series(odd_max=125, two_max=256):
    keys = sorted({(p, r, d) for p, r, _, d in _keys(odd_max, two_max)})
    return _run("series_vs_closed", keys,
                lambda p, r, d: (densities.eta_local_series(p, r, d),
                                 densities.eta_local_closed(p, r, d)))


SUITES = {
    "count_T": suite_T,
    "count_A": suite_A,
    "gamma_hat": suite_gamma_hat,
    "series": suite_series,
}


def run_all(odd_max=125, two_max=256, names=None):
    names = names or list(SUITES)
    return [SUITES[n](odd_max, two_max) for n in names]
