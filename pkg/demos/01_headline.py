"""
Finding an odd deficient-perfect number
=======================================

A positive integer n is deficient-perfect when sigma(n) = 2n - d for some
proper divisor d of n. This walk-through finds the one odd example with four
distinct prime factors below ten million, first with a plain sieve and then
with the pruned shape search.
"""

import time

import numpy as np

from defiperf import dp_witness, factorize, verify_eq1
from defiperf.oracle import enumerate_dp, sieve_sigma_omega
from defiperf.search import SearchConfig, enumerate_shapes

# A small sieve first, so the arrays are easy to look at.
sigma, omega = sieve_sigma_omega(50)
n = np.arange(51)
deficiency = 2 * n - sigma
print("n      :", n[1:13])
print("sigma  :", sigma[1:13])
print("2n - s :", deficiency[1:13])

# n qualifies when the deficiency is a proper divisor of n.
mask = (deficiency > 0) & (deficiency < n) & (n % np.where(deficiency > 0, deficiency, 1) == 0)
print("witnesses up to 50:", n[mask].tolist())

# Now the full range. This takes a few seconds.
t0 = time.perf_counter()
hits = enumerate_dp(10**7, odd_only=True, omega_equals=4)
print(f"\nsieve to 10^7 in {time.perf_counter() - t0:.1f}s:")
for e in hits.entries:
    print(f"  n={e.n}  d={e.d}  D={e.D}")

# The same number from the branch-and-bound search over prime shapes.
cfg = SearchConfig(omega=4, odd=True, prime_max=50, exponent_max=6)
t0 = time.perf_counter()
report = enumerate_shapes(cfg)
print(f"\nshape search in {time.perf_counter() - t0:.2f}s")
print("  shapes:", report.total_shapes)
print("  evaluated:", report.leaves_evaluated, " pruned:", report.leaves_pruned)
print("  witnesses:", report.witness_values)

w = dp_witness(factorize(9018009).factorization)
print(f"\n{w.n.value} = {w.n}")
print("d =", w.d, "  D = n/d =", w.D)
print("sigma(n) = (2D - 1) d :", w.sigma_n, "=", (2 * w.D.value - 1) * w.d.value, verify_eq1(w))
