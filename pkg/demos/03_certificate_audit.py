"""
Checking the search's pruning decisions
=======================================

Whenever the shape search discards a subtree it stores a certificate: the rule
that fired, the family of integers it covers, the exact numbers behind the
decision and any supporting facts. Here we re-check every certificate in two
ways: by re-deriving it, and by brute force over the family when it is small.
"""

from collections import Counter

import numpy as np

from defiperf import dp_witness
from defiperf.prune import check_certificate, completions, count_completions
from defiperf.search import SearchConfig, enumerate_shapes

report = enumerate_shapes(SearchConfig(omega=4, odd=True, prime_max=50, exponent_max=6))
certs = report.certificates
print(len(certs), "certificates")
print(Counter(c.rule for c in certs))

first = certs[0]
print("\nfirst certificate:", first.rule)
print("  primes fixed so far:", first.spec.primes, " exponents:", first.spec.exps)
for key, value in first.exact_values:
    print(f"  {key} = {value}")

# Re-derivation: the rule engine must produce the identical certificate and
# every embedded fact must verify.
print("\nall re-derive:", all(check_certificate(c) for c in certs))

# Brute force: expand each family and look for a witness the rule missed.
sizes = np.array([count_completions(c.spec) for c in certs])
print("family sizes: min", sizes.min(), " median", int(np.median(sizes)), " max", sizes.max())
missed = [str(f) for c in certs for f in completions(c.spec) if dp_witness(f) is not None]
print("witnesses hidden in pruned families:", missed)
print("integers covered by certificates:", sizes.sum(), "of", report.total_shapes)
