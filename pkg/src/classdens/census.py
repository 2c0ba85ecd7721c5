"""Census of discriminants with small fundamental unit, and the partial sums
pi(x; C) = sum of h(D) over D in the census satisfying a condition C.

A discriminant D with eps(D) < x comes from a trace t = eps + 1/eps < x + 1/x
and a divisor u with u^2 | t^2 - 4, D = (t^2 - 4)/u^2.  Scanning t upward and
keeping the first (t, u) seen for each D yields the fundamental solution.

Class numbers are either exact (rho-cycles of reduced forms, feasible for
x up to a few thousand) or estimated as round(sqrt(D) L_P(1, chi_D) / log eps)
with an Euler product truncated at P.  The second mode is what makes x = 10^6
reachable; its per-D error is small but nonzero, so it is reported as such.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .arith import factorize, log_integral, primes_upto, spf_sieve
from .quadforms import class_number, fundamental_pell, is_square, log_unit

DEFAULT_CAP = 10 ** 7
EXACT_AUTO_LIMIT = 1000
EULER_PRIMES = 20000
CACHE_ENV = "CLASSDENS_CACHE_DIR"


@dataclass(frozen=True)
class CensusRecord:
    D: int
    h: int
    t1: int
    u1: int
    log_eps: float


@dataclass(frozen=True)
class Condition:
    modulus: int = 1
    residues: frozenset = frozenset({0})
    squarefree_d: bool = False
    u_divisor: int | None = None

    @classmethod
    def congruence(cls, n: int, residues, squarefree_d=False, u_divisor=None):
        if isinstance(residues, int):
            residues = [residues]
        return cls(n, frozenset(r % n for r in residues), squarefree_d, u_divisor)

    @classmethod
    def everything(cls):
        return cls(1, frozenset({0}))


@dataclass(frozen=True)
class CensusSummary:
    x: float
    pi: int
    li_x2: float
    empirical_eta: float


@dataclass
class Census:
    x: float
    D: np.ndarray
    h: np.ndarray
    t1: np.ndarray
    u1: np.ndarray
    log_eps: np.ndarray
    d_squarefree: np.ndarray
    h_method: str = "cycles"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.D)

    def records(self):
        for i in range(len(self.D)):
            yield CensusRecord(int(self.D[i]), int(self.h[i]), int(self.t1[i]),
                               int(self.u1[i]), float(self.log_eps[i]))

    @property
    def d(self) -> np.ndarray:
        """Kernel d of each D (D itself or D/4); meaningful where d is squarefree."""
        return np.where(self.D % 4 == 1, self.D, self.D // 4)


# ---------------------------------------------------------------- the scan

def _trace_limit(x: float) -> int:
    """Largest integer t with (t + sqrt(t^2-4))/2 < x, i.e. t < x + 1/x."""
    bound = x + 1.0 / x
    t = math.floor(bound)
    if t == bound:
        t -= 1
    return t


def _factor_with(spf: list, n: int, out: dict):
    while n > 1:
        p = spf[n]
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out[p] = out.get(p, 0) + e


def _is_fundamental(D: int, fd: dict) -> bool:
    """fd: exponents of D.  True iff D is a fundamental discriminant."""
    if any(e > 1 for p, e in fd.items() if p != 2):
        return False
    e2 = fd.get(2, 0)
    if D % 4 == 1:
        return True
    return e2 in (2, 3) and (D // 4) % 4 in (2, 3)


def _scan_range(args):
    """Candidates (D, t, u, fundamental) for t in [lo, hi), t ascending."""
    lo, hi = args
    spf = spf_sieve(hi + 2).tolist()
    Ds, ts, us, fs = [], [], [], []
    for t in range(lo, hi):
        f = {}
        _factor_with(spf, t - 2, f)
        _factor_with(spf, t + 2, f)
        divs = [(1, ())]
        for p, e in f.items():
            if e < 2:
                continue
            new = []
            for u, used in divs:
                pk = 1
                for j in range(e // 2 + 1):
                    new.append((u * pk, used + ((p, j),) if j else used))
                    pk *= p
            divs = new
        N = t * t - 4
        for u, used in divs:
            D = N // (u * u)
            if D % 4 > 1:
                continue
            fd = dict(f)
            for p, j in used:
                fd[p] -= 2 * j
            Ds.append(D)
            ts.append(t)
            us.append(u)
            fs.append(_is_fundamental(D, {p: e for p, e in fd.items() if e}))
    return (np.array(Ds, dtype=np.int64), np.array(ts, dtype=np.int64),
            np.array(us, dtype=np.int64), np.array(fs, dtype=bool))


def _merge(parts):
    """Keep the minimal t for each D (parts are in ascending t order)."""
    if not parts:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z, np.zeros(0, dtype=bool)
    D = np.concatenate([p[0] for p in parts])
    t = np.concatenate([p[1] for p in parts])
    u = np.concatenate([p[2] for p in parts])
    f = np.concatenate([p[3] for p in parts])
    order = np.lexsort((t, D))
    D, t, u, f = D[order], t[order], u[order], f[order]
    first = np.ones(len(D), dtype=bool)
    first[1:] = D[1:] != D[:-1]
    return D[first], t[first], u[first], f[first]


def euler_class_numbers(D: np.ndarray, log_eps: np.ndarray, P: int = EULER_PRIMES) -> np.ndarray:
    """h(D) estimated from h log eps = sqrt(D) L(1, chi_D), with the Euler
    product over p <= P and chi_D the Kronecker symbol of D itself."""
    D = np.asarray(D, dtype=np.int64)
    logL = np.zeros(len(D))
    d8 = D % 8
    chi2 = np.where(D % 2 == 0, 0.0, np.where((d8 == 1) | (d8 == 7), 1.0, -1.0))
    logL -= np.log1p(-chi2 / 2)
    for p in primes_upto(P)[1:].tolist():
        tab = np.full(p, -1.0)
        tab[(np.arange(1, p) ** 2) % p] = 1.0
        tab[0] = 0.0
        logL -= np.log1p(-tab[D % p] / p)
    est = np.sqrt(D.astype(np.float64)) * np.exp(logL) / log_eps
    return np.maximum(1, np.rint(est)).astype(np.int64)


def run_census(x: float, h_method: str = "auto", workers: int = 1, cap: float = DEFAULT_CAP,
               primes: int = EULER_PRIMES, chunk: int = 10 ** 6,
               checkpoint: str | None = None) -> Census:
    """All D with eps(D) < x, each with its fundamental (t1, u1) and h(D).

    h_method: "cycles" (exact), "euler" (estimate) or "auto" (exact for
    x <= 1000).  The t-range is split into chunks that may run in parallel;
    merging keeps the minimal t per D, so results do not depend on workers.
    With ``checkpoint`` set, the merged scan is saved there after every batch
    of chunks and a rerun with the same x and chunk resumes from it.
    """
    if x < 3:
        raise ValueError("census cutoff must be >= 3")
    if x > cap:
        raise MemoryError("census cutoff %g exceeds the configured cap %g" % (x, cap))
    if h_method == "auto":
        h_method = "cycles" if x <= EXACT_AUTO_LIMIT else "euler"
    if h_method not in ("cycles", "euler"):
        raise ValueError("unknown h_method %r" % h_method)
    tmax = _trace_limit(x)
    ranges = [(lo, min(lo + chunk, tmax + 1)) for lo in range(3, tmax + 1, chunk)]
    merged = _merge([])
    done = 0
    if checkpoint and os.path.exists(checkpoint):
        z = np.load(checkpoint)
        if float(z["x"]) == float(x) and int(z["chunk"]) == chunk:
            done = int(z["done"])
            merged = (z["D"], z["t"], z["u"], z["f"])
    batch = max(1, workers)
    ex = ProcessPoolExecutor(workers) if workers > 1 and len(ranges) - done > 1 else None
    try:
        while done < len(ranges):
            todo = ranges[done:done + batch]
            parts = list(ex.map(_scan_range, todo)) if ex else [_scan_range(r) for r in todo]
            merged = _merge([merged] + parts)
            done += len(todo)
            if checkpoint and done < len(ranges):
                np.savez(checkpoint + ".tmp.npz", x=x, chunk=chunk, done=done, D=merged[0],
                         t=merged[1], u=merged[2], f=merged[3])
                os.replace(checkpoint + ".tmp.npz", checkpoint)
    finally:
        if ex:
            ex.shutdown()
    if checkpoint and os.path.exists(checkpoint):
        os.remove(checkpoint)
    D, t, u, fund = merged
    loge = np.array([log_unit(int(v)) for v in t.tolist()]) if len(t) else np.zeros(0)
    if h_method == "cycles":
        h = np.array([class_number(int(v)) for v in D.tolist()], dtype=np.int64)
    else:
        h = euler_class_numbers(D, loge, primes)
    return Census(float(x), D, h, t, u, loge, fund, h_method,
                  {"primes": primes if h_method == "euler" else None})


# ------------------------------------------------------------- the sums

def _mask(census: Census, cond: Condition) -> np.ndarray:
    n = cond.modulus
    if cond.squarefree_d:
        m = census.d_squarefree & np.isin(census.d % n, list(cond.residues))
    else:
        m = np.isin(census.D % n, list(cond.residues))
    if cond.u_divisor:
        m &= census.u1 % cond.u_divisor == 0
    return m


def pi_sum(census: Census, cond: Condition) -> int:
    return int(census.h[_mask(census, cond)].sum())


def empirical_eta(census: Census, cond: Condition) -> CensusSummary:
    if census.x < 10:
        raise ValueError("empirical densities need a cutoff >= 10")
    pi = pi_sum(census, cond)
    li = log_integral(census.x ** 2)
    return CensusSummary(census.x, pi, li, pi / li)


def sarnak_sum(census: Census) -> float:
    """sum of h(D) log eps(D) over the census."""
    return float(np.dot(census.h.astype(np.float64), census.log_eps))


def _siegel_block(args):
    lo, hi = args
    s = 0.0
    for D in range(lo, hi):
        if D % 4 > 1 or is_square(D):
            continue
        s += class_number(D) * fundamental_pell(D).log_eps
    return s


def siegel_sum(x: float, cap: float = 10 ** 5, workers: int = 1) -> float:
    """sum of h(D) log eps(D) over discriminants 0 < D < x."""
    if x < 5:
        raise ValueError("siegel_sum needs x >= 5")
    if x > cap:
        raise MemoryError("siegel_sum cutoff %g exceeds the cap %g" % (x, cap))
    top = math.ceil(x)
    step = 5000
    blocks = [(lo, min(lo + step, top)) for lo in range(5, top, step)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return float(sum(ex.map(_siegel_block, blocks)))
    return float(sum(_siegel_block(b) for b in blocks))


def siegel_main_term(x: float) -> float:
    zeta3 = 1.2020569031595942
    return math.pi ** 2 / (18 * zeta3) * x ** 1.5


def d_of(D: int):
    """(d, d squarefree): d = D if the squarefree kernel of D is 1 mod 4, else D/4."""
    fac = factorize(D)
    kernel = 1
    for p, e in fac:
        if e % 2:
            kernel *= p
    d = D if kernel % 4 == 1 else D // 4
    sq = all(e == 1 for _, e in factorize(d)) if d > 1 else True
    return d, sq


# ----------------------------------------------------------- csv and cache

HEADER = ["D", "h", "t1", "u1", "log_eps"]


def export_csv(census: Census, path: str):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HEADER)
        for D, h, t, u, le in zip(census.D.tolist(), census.h.tolist(), census.t1.tolist(),
                                  census.u1.tolist(), census.log_eps.tolist()):
            w.writerow([D, h, t, u, "%.12g" % le])


def import_csv(path: str, x: float | None = None, h_method: str = "unknown") -> Census:
    """Read a census CSV; fundamental flags are recomputed from (t1, u1)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != HEADER:
        raise ValueError("%s: expected header %s" % (path, ",".join(HEADER)))
    body = rows[1:]
    D = np.array([int(r[0]) for r in body], dtype=np.int64)
    h = np.array([int(r[1]) for r in body], dtype=np.int64)
    t = np.array([int(r[2]) for r in body], dtype=np.int64)
    u = np.array([int(r[3]) for r in body], dtype=np.int64)
    le = np.array([float(r[4]) for r in body])
    fund = np.zeros(len(D), dtype=bool)
    if len(D):
        spf = spf_sieve(int(t.max()) + 2).tolist()
        for i, (Di, ti, ui) in enumerate(zip(D.tolist(), t.tolist(), u.tolist())):
            f = {}
            _factor_with(spf, ti - 2, f)
            _factor_with(spf, ti + 2, f)
            for p, e in factorize(ui):
                f[p] -= 2 * e
            fund[i] = _is_fundamental(Di, {p: e for p, e in f.items() if e})
    if x is None:
        x = float(np.exp(le.max()) * 1.000001) if len(le) else 3.0
    return Census(float(x), D, h, t, u, le, fund, h_method)


def cache_dir() -> str:
    return os.environ.get(CACHE_ENV, os.path.join(os.path.expanduser("~"), ".cache", "classdens"))


def cached_census(x: float, h_method: str = "auto", workers: int = 1, directory: str | None = None,
                  **kw) -> Census:
    """run_census with a CSV cache keyed by (x, method)."""
    if h_method == "auto":
        h_method = "cycles" if x <= EXACT_AUTO_LIMIT else "euler"
    directory = directory or cache_dir()
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, "census_x%s_%s.csv" % (repr(float(x)), h_method))
    if os.path.exists(path):
        return import_csv(path, x, h_method)
    c = run_census(x, h_method, workers, **kw)
    tmp = path + ".tmp"
    export_csv(c, tmp)
    os.replace(tmp, path)
    return c
