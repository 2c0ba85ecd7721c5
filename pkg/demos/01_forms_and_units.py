# forms, units and hyperbolic matrices
from classdens import quadforms as qf
from classdens.quadforms import QuadForm

# narrow class numbers for the first few discriminants
for D in [5, 8, 12, 13, 17, 21, 24, 28, 29, 33, 40, 60, 65, 79 * 4, 145]:
    P = qf.fundamental_pell(D)
    print("D=%4d  h=%d  t=%d u=%d  log eps=%.6f" % (D, qf.class_number(D), P.t, P.u, P.log_eps))

# the cycles behind h(60) = 4
for cyc in qf.reduced_cycles(60):
    print(cyc)

# Pell units get big quickly
P = qf.fundamental_pell(4 * 991)
print("D=3964: t has", len(str(P.t)), "digits")

# a form and a Pell solution give a matrix, and the matrix gives them back
Q = QuadForm(1, 1, -1)
g = qf.gamma_from_form(Q, 3, 1)
print(g.rows(), qf.invariants_of(g))

# powers of the matrix follow powers of the unit
g2 = g @ g
print(g2.rows(), qf.invariants_of(g2)[:2], qf.pell_power(5, 3, 1, 2))

# u of a power decides which congruence subgroup it lies in
for j in range(1, 7):
    t, u = qf.pell_power(5, 3, 1, j)
    h = qf.gamma_from_form(Q, t, u)
    print(j, u, [n for n in range(1, 13) if qf.in_congruence_subgroup(h, n)])
