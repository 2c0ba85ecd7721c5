# class number sums over D with eps(D) < x, against the density formulas
import sys
import time

from classdens import census as cen
from classdens import densities as den

x = float(sys.argv[1]) if len(sys.argv) > 1 else 1e5

t0 = time.time()
c = cen.run_census(x)
print(len(c), "discriminants,", c.h_method, "class numbers, %.1fs" % (time.time() - t0))

s = cen.empirical_eta(c, cen.Condition.everything())
print("pi/li(x^2) =", s.empirical_eta)
print("sum h log eps / (x^2/2) =", cen.sarnak_sum(c) / (x * x / 2))

# residues mod 5
for d in range(5):
    emp = cen.empirical_eta(c, cen.Condition.congruence(5, d)).empirical_eta
    print(d, "%.5f %.5f" % (emp, den.eta_progression(5, d).value))

# squarefree d mod 5
for d in range(5):
    emp = cen.empirical_eta(c, cen.Condition.congruence(5, d, squarefree_d=True)).empirical_eta
    print(d, "%.5f %.5f %.5f" % (emp, den.eta_fundamental(5, d).value, den.eta_fundamental_twisted(5, d).value))

# 2 | u, 3 | u against 1/v(n)
for n in (2, 3, 5):
    emp = cen.empirical_eta(c, cen.Condition(1, frozenset({0}), False, n)).empirical_eta
    print(n, emp, float(den.eta_divides(1)) / {2: 6, 3: 12, 5: 60}[n])
