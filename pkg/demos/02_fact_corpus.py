"""
Auditing a corpus of hand-computed facts
========================================

Case analyses about deficient-perfect numbers lean on many small facts:
multiplicative orders, divisibility of sigma(p^a), Legendre symbols and
products of abundancy bounds. The shipped corpus writes each one as a
tab-separated record that the checker re-derives with exact arithmetic.
"""

from collections import Counter

from defiperf.certs import FactRecord, parse_line, shipped_corpus, verify_fact, verify_fixture_file

# One record, parsed and checked by hand.
rec = parse_line("ORDER\t(ord 11 25)\t5\texample")
print(rec.kind, rec.expr, "->", verify_fact(rec).status)

# Inequalities are evaluated as exact fractions, never as floats.
ineq = verify_fact(FactRecord("INEQUALITY", "(* (sr 3 4) (sr 5 2) (sr 11 2))", ">2"))
print(ineq.expr, ineq.expected, "->", ineq.status, "|", ineq.note)

# The whole corpus.
summary = verify_fixture_file(shipped_corpus())
print("\nconfirmed / refuted / parse errors:", summary.counts)
print("records per kind:", dict(Counter(r.kind for r in summary.records)))

# Three records reproduce misprinted arithmetic verbatim. Each is paired with
# the intended expression, and only the literal one should fail.
for t in summary.typo_ledger():
    print(f"\n{t['locus']}")
    print("  literal:", t["literal_status"])
    print("  intent :", t["intent_status"])

# Changing any number flips the verdict.
wrong = verify_fact(FactRecord("DIVIDES", "(sigma 3 2)", "7"))
print("\n7 | sigma(3^2) ?", wrong.status, "|", wrong.note)
