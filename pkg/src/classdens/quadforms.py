"""Indefinite binary quadratic forms, Pell units and the form/matrix dictionary.

A primitive form [a, b, c] of discriminant D together with a solution of
t^2 - D u^2 = 4 determines the hyperbolic matrix

    [[(t + b u)/2, -c u],
     [a u,        (t - b u)/2]]

and conversely every hyperbolic matrix of SL2(Z) arises this way, with u the
gcd of its off-diagonal entries and the difference of its diagonal entries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def check_discriminant(D: int) -> int:
    D = int(D)
    if D <= 0 or D % 4 not in (0, 1) or is_square(D):
        raise ValueError("not a positive non-square discriminant: %r" % D)
    return D


@dataclass(frozen=True)
class QuadForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if math.gcd(math.gcd(self.a, self.b), self.c) != 1:
            raise ValueError("form %s is not primitive" % (self,))
        D = self.b * self.b - 4 * self.a * self.c
        if D <= 0 or is_square(D):
            raise ValueError("form %s is not indefinite with non-square D" % (self,))

    @property
    def D(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def act(self, g) -> "QuadForm":
        """The form (x, y) -> Q((x, y) g) for an integer 2x2 matrix g."""
        (p, q), (r, s) = g
        a = self(p, q)
        c = self(r, s)
        b = 2 * self.a * p * r + self.b * (p * s + q * r) + 2 * self.c * q * s
        return QuadForm(a, b, c)

    def __str__(self):
        return "[%d,%d,%d]" % (self.a, self.b, self.c)


def discriminant(Q: QuadForm) -> int:
    return Q.b * Q.b - 4 * Q.a * Q.c


# ---------------------------------------------------------------- reduction

def is_reduced(a: int, b: int, D: int, s: int | None = None) -> bool:
    """0 < b < sqrt D and sqrt D - b < 2|a| < sqrt D + b (D non-square)."""
    if s is None:
        s = math.isqrt(D)
    return 0 < b <= s and 2 * abs(a) + b > s and 2 * abs(a) - b <= s


def rho(a: int, b: int, c: int, D: int, s: int):
    """Right neighbour of a reduced form: [c, b', (b'^2 - D)/4c]."""
    m = 2 * abs(c)
    b2 = s - (s + b) % m
    return c, b2, (b2 * b2 - D) // (4 * c)


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    """All primitive reduced forms of discriminant D."""
    D = check_discriminant(D)
    s = math.isqrt(D)
    out = []
    for b in range(s, 0, -1):
        if (b - D) % 2:
            continue
        N = (D - b * b) // 4  # = -ac > 0
        lo = (s - b) // 2 + 1  # 2|a| > s - b
        hi = (s + b) // 2      # 2|a| - b <= s
        if hi < lo:
            continue
        if hi - lo > 64:
            cand = np.arange(lo, hi + 1, dtype=np.int64)
            cand = cand[N % cand == 0].tolist()
        else:
            cand = [x for x in range(lo, hi + 1) if N % x == 0]
        for x in cand:
            y = N // x
            if math.gcd(math.gcd(x, b), y) != 1:
                continue
            out.append((x, b, -y))
            out.append((-x, b, y))
    return out


def class_number(D: int) -> int:
    """Narrow class number: number of rho-cycles of reduced forms."""
    D = check_discriminant(D)
    s = math.isqrt(D)
    forms = set(reduced_forms(D))
    cycles = 0
    while forms:
        start = forms.pop()
        cycles += 1
        f = rho(*start, D, s)
        while f != start:
            forms.discard(f)
            f = rho(*f, D, s)
    return cycles


def reduced_cycles(D: int) -> list[list[tuple[int, int, int]]]:
    D = check_discriminant(D)
    s = math.isqrt(D)
    forms = set(reduced_forms(D))
    out = []
    for start in sorted(forms):
        if start not in forms:
            continue
        cyc = [start]
        forms.discard(start)
        f = rho(*start, D, s)
        while f != start:
            cyc.append(f)
            forms.discard(f)
            f = rho(*f, D, s)
        out.append(cyc)
    return out


# --------------------------------------------------------------------- Pell

@dataclass(frozen=True)
class PellFundamental:
    D: int
    t: int
    u: int
    log_eps: float


def log_unit(t: int, D: int | None = None) -> float:
    """log((t + sqrt(t^2 - 4))/2) computed without cancellation."""
    t = int(t)
    lt = math.log(t)
    return lt + math.log1p(math.sqrt(1.0 - 4.0 / (float(t) * t)) if t < 10 ** 150
                           else 1.0) - math.log(2.0)


def _cf_unit(P0: int, Q0: int, D: int):
    """Walk the continued fraction of (P0 + sqrt D)/Q0 and yield convergents."""
    s = math.isqrt(D)
    P, Q = P0, Q0
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    while True:
        a = (P + s) // Q if Q > 0 else (P + s + 1) // Q
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield h1, k1
        P = a * Q - P
        Q = (D - P * P) // Q


def fundamental_pell(D: int) -> PellFundamental:
    """Minimal positive solution of t^2 - D u^2 = 4 via continued fractions."""
    D = check_discriminant(D)
    if D % 4 == 1:
        # expand (1 + sqrt D)/2 = (1 + sqrt D)/2; P=1, Q=2 satisfies Q | D - P^2
        for A, B in _cf_unit(1, 2, D):
            t = 2 * A - B
            if t * t - D * B * B in (4, -4):
                t, u = abs(t), B
                break
    else:
        m = D // 4
        for A, B in _cf_unit(0, 1, m):
            n = A * A - m * B * B
            if n in (1, -1):
                t, u = 2 * A, B
                break
    if t * t - D * u * u == -4:
        t, u = (t * t + D * u * u) // 2, t * u
    assert t * t - D * u * u == 4
    return PellFundamental(D, t, u, log_unit(t))


def pell_power(D: int, t: int, u: int, j: int):
    """(t_j, u_j) with (t_j + u_j sqrt D)/2 = ((t + u sqrt D)/2)^j."""
    tj, uj = 2, 0
    for _ in range(j):
        tj, uj = (tj * t + D * uj * u) // 2, (tj * u + t * uj) // 2
    return tj, uj


# ------------------------------------------------------------------ matrices

@dataclass(frozen=True)
class GammaMatrix:
    g11: int
    g12: int
    g21: int
    g22: int

    def __post_init__(self):
        if self.g11 * self.g22 - self.g12 * self.g21 != 1:
            raise ValueError("determinant is not 1: %s" % (self.rows(),))

    @classmethod
    def canonical(cls, g11, g12, g21, g22) -> "GammaMatrix":
        """Representative of {+g, -g} with positive trace."""
        if g11 + g22 < 0 or (g11 + g22 == 0 and (g11, g21) < (0, 0)):
            g11, g12, g21, g22 = -g11, -g12, -g21, -g22
        return cls(g11, g12, g21, g22)

    @property
    def trace(self) -> int:
        return self.g11 + self.g22

    def rows(self):
        return ((self.g11, self.g12), (self.g21, self.g22))

    def __matmul__(self, other: "GammaMatrix") -> "GammaMatrix":
        a, b, c, d = self.g11, self.g12, self.g21, self.g22
        e, f, g, h = other.g11, other.g12, other.g21, other.g22
        return GammaMatrix.canonical(a * e + b * g, a * f + b * h,
                                     c * e + d * g, c * f + d * h)

    def inverse(self) -> "GammaMatrix":
        return GammaMatrix.canonical(self.g22, -self.g12, -self.g21, self.g11)


def gamma_from_form(Q: QuadForm, t: int, u: int) -> GammaMatrix:
    D = Q.D
    if t <= 0 or u <= 0 or t * t - D * u * u != 4:
        raise ValueError("(t, u) = (%d, %d) does not solve t^2 - %d u^2 = 4" % (t, u, D))
    if (t + Q.b * u) % 2:
        raise ValueError("t + b u must be even")
    return GammaMatrix.canonical((t + Q.b * u) // 2, -Q.c * u, Q.a * u, (t - Q.b * u) // 2)


def invariants_of(g: GammaMatrix):
    """(t, u, Q, D) of a hyperbolic matrix."""
    t = g.trace
    if abs(t) <= 2:
        raise ValueError("matrix is not hyperbolic (trace %d)" % t)
    if t < 0:
        g = GammaMatrix.canonical(g.g11, g.g12, g.g21, g.g22)
        t = g.trace
    u = math.gcd(math.gcd(g.g21, g.g11 - g.g22), g.g12)
    Q = QuadForm(g.g21 // u, (g.g11 - g.g22) // u, -g.g12 // u)
    D = (t * t - 4) // (u * u)
    assert D == Q.D
    return t, u, Q, D


def conjugation_action(Q: QuadForm, g: GammaMatrix) -> QuadForm:
    """The form of g^-1 gamma g when gamma has form Q.

    With gamma built as above this is Q((x, y) E g^T E), E = diag(1, -1);
    the plain row action (x, y) g does not match the matrix orientation.
    """
    return Q.act(((g.g11, -g.g21), (-g.g12, g.g22)))


def in_congruence_subgroup(g: GammaMatrix, n: int) -> bool:
    """gamma = alpha I mod n, checked directly and through n | u_gamma."""
    by_def = (g.g12 % n == 0 and g.g21 % n == 0 and (g.g11 - g.g22) % n == 0
              and (g.g11 * g.g11 - 1) % n == 0)
    u = math.gcd(math.gcd(g.g21, g.g11 - g.g22), g.g12)
    by_u = u % n == 0
    if by_def != by_u:
        raise AssertionError("congruence criteria disagree for %s mod %d" % (g.rows(), n))
    return by_def
