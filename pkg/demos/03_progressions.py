# eta(D = delta mod n): the distribution W of u and the global sums
import math

from classdens import densities as den

# W(alpha; 5) two ways
Wd, err = den.W_direct_table(5, 10 ** 6)
for a in (1, 2, 3, 4):
    print(a, den.W_euler(a, 5).value, Wd[a])
print("W1 =", den.W_euler(1, 5).value + den.W_euler(4, 5).value)

# the residues mod 5
for d in range(5):
    e = den.eta_progression(5, d)
    print(d, "%.6f" % e.value, e.exact)

# squarefree kernels mod 5, printed formula and twist-aware version
print("n=1:", den.eta_fundamental(1, 0).value)
for d in range(5):
    print(d, "%.5f" % den.eta_fundamental(5, d).value, "%.5f" % den.eta_fundamental_twisted(5, d).value)

# composite moduli: u at 3 also moves D(5), which the printed sum ignores
for d in range(15):
    a = den.eta_progression(15, d, 20000).value
    b = den.eta_progression_twisted(15, d, 20000).value
    if a or b:
        print(d, "%.6f  %.6f" % (a, b))
print(math.fsum(den.eta_progression_twisted(15, d, 20000).value for d in range(15)))
