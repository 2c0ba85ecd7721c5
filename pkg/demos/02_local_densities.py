# local densities eta(D(p) = delta mod p^r)
from classdens import densities as den

# p = 5, r = 1: both routes give the same rationals
for d in range(5):
    print(d, den.classify_residue(5, 1, d).tag, den.eta_local_series(5, 1, d), den.eta_local_closed(5, 1, d))

# the k-series behind eta(D(5) = 0): T, A and the finite group counts
for k in range(4):
    print(k, den.count_T(5, 1, k, 0), den.count_A(5, 1, 0), den.gamma_hat_count(5, 1, k, 0),
          den.eta_local_u(5, 1, k, 0))

# p = 2 lives mod 2^(r+2)
for d in range(16):
    print(d, den.classify_residue(2, 2, d).tag, den.eta_local_closed(2, 2, d))

# coarse 2-adic conditions are sums over lifts
print("D(2) = 1 mod 4:", den.eta_two_residue_set({1}, 2))
print("D(2) = 8,12 mod 16:", den.eta_two_residue_set({8, 12}, 4))
print("5 || D(5):", den.eta_local_not_p2(5, 1, 0))

# divisibility densities multiply over primes
for n in (2, 3, 4, 5, 6, 25, 60):
    print(n, den.eta_divides(n))
