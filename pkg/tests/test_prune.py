from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from defiperf.defperf import dp_witness
from defiperf.ntcore import DomainError, legendre, sigma_prime_power
from defiperf.prune import (
    BETA_ZERO,
    RULE_GROUPS,
    RULES,
    Contradiction,
    DConstraints,
    Fixed,
    Free,
    PruneCertificate,
    SubtreeSpec,
    Tail,
    _apply,
    apply_rules,
    bound_interval,
    check_certificate,
    completions,
    count_completions,
    forced_divisors,
    merge_forced,
    order_contradiction,
    order_forced,
    prune_by_bounds,
    qr_admissible_parities,
    sigma_divisibility,
)

UNB = Free(2, None)


def sr(p, a):
    return Fraction(sigma_prime_power(p, a), p**a)


# --- bounds ------------------------------------------------------------------

def alpha1_at_least_4():
    return SubtreeSpec((3, 5, 11), (Free(4, None), UNB, UNB), Tail(1, 11, UNB, 13, None))


def p4_at_least_167():
    return SubtreeSpec((3, 5, 11), (Fixed(2), UNB, UNB), Tail(1, 11, UNB, 167, None),
                       DConstraints(d_min=605))


def test_lower_bound_above_two():
    lo, _ = bound_interval(alpha1_at_least_4())
    assert lo == sr(3, 4) * sr(5, 2) * sr(11, 2) == Fraction(4123, 2025)
    cert = prune_by_bounds(alpha1_at_least_4())
    assert cert.rule == "BoundAboveTwo"
    assert cert.value("lo") == "4123/2025"


def test_upper_bound_below_two():
    _, hi = bound_interval(p4_at_least_167())
    expected = Fraction(13, 9) * Fraction(5, 4) * Fraction(11, 10) * Fraction(167, 166) + Fraction(1, 605)
    assert hi == expected < 2
    cert = prune_by_bounds(p4_at_least_167())
    assert cert.rule == "BoundBelowTwo"
    assert check_certificate(cert)


def test_single_prime_interval():
    assert bound_interval(SubtreeSpec((3,), (Fixed(2),)), with_d_term=False) == (Fraction(13, 9),) * 2


def test_true_solution_survives_every_rule():
    spec = SubtreeSpec((3, 7, 11, 13), (Fixed(2),) * 4)
    assert prune_by_bounds(spec) is None
    with_d = replace(spec, d=DConstraints(d_min=11011, d_max=11011))
    assert prune_by_bounds(with_d) is None
    for k in range(1, 5):
        for rules in __import__("itertools").combinations(RULE_GROUPS, k):
            assert apply_rules(spec, rules) is None
            assert apply_rules(with_d, rules) is None
    lo, hi = bound_interval(with_d)
    assert lo == hi == 2


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(st.sampled_from([3, 5, 7, 11, 13, 17, 19, 23]), min_size=1, max_size=4, unique=True),
       st.data())
def test_bound_monotonicity(primes, data):
    primes = sorted(primes)
    exps = []
    for _ in primes:
        lo = data.draw(st.sampled_from([2, 4, 6]))
        hi = data.draw(st.sampled_from([lo, lo + 2, lo + 4, None]))
        exps.append(Free(lo, hi))
    spec = SubtreeSpec(primes, exps)
    lo0, hi0 = bound_interval(spec, with_d_term=False)
    i = data.draw(st.integers(0, len(primes) - 1))
    e = exps[i]
    wider = spec.with_exp(i, Free(e.lo, None))
    lo1, hi1 = bound_interval(wider, with_d_term=False)
    assert lo1 <= lo0 and hi1 >= hi0
    fixed = spec.with_exp(i, Fixed(e.lo))
    lo2, hi2 = bound_interval(fixed, with_d_term=False)
    assert lo2 >= lo0 and hi2 <= hi0
    if spec.bounded:
        lo3, hi3 = bound_interval(spec)
        lo4, hi4 = bound_interval(fixed)
        assert lo3 <= lo4 <= hi4 <= hi3


# --- sigma divisibility and forced divisors ----------------------------------

@pytest.mark.parametrize("q,p,a,expected", [(5, 11, 4, True), (13, 3, 2, True), (7, 2, 0, False)])
def test_sigma_divisibility_examples(q, p, a, expected):
    assert sigma_divisibility(q, p, a) is expected


def test_sigma_divisibility_domain():
    with pytest.raises(DomainError):
        sigma_divisibility(3, 3, 2)


def test_sigma_divisibility_matches_modular_evaluation():
    small = [p for p in range(2, 200) if all(p % k for k in range(2, int(p**0.5) + 1))]
    for q in small:
        for p in small:
            if p == q:
                continue
            for a in range(0, 41, 2):
                assert sigma_divisibility(q, p, a) == (sigma_prime_power(p, a) % q == 0), (q, p, a)


def test_forced_thirteen_gives_residue_seven():
    spec = SubtreeSpec((3, 5, 11), (Fixed(2), UNB, UNB), Tail(1, 11, UNB, 17, None))
    fds = forced_divisors(spec)
    assert [f.q for f in fds] == [13]
    merged = merge_forced(spec, [f.q for f in fds])
    assert merged.d.congruence() == (13, 7)
    # D = 26k + 7 once parity of D is also recorded
    both = replace(merged, d=replace(merged.d, residues=((2, 1),)))
    assert both.d.congruence() == (26, 7)
    # with p4 = 13 still possible nothing is forced
    assert forced_divisors(replace(spec, tail=Tail(1, 11, UNB, 13, None))) == []


def test_forced_3221_from_eleven_to_the_fourth():
    spec = SubtreeSpec((3, 5, 11), (Fixed(2), UNB, Fixed(4)), Tail(1, 11, UNB, 13, 163))
    assert [f.q for f in forced_divisors(spec)] == [3221]  # 5 is in the support
    # 3221 could itself be the fourth prime when that prime is unbounded
    loose = replace(spec, tail=Tail(1, 11, UNB, 13, None))
    assert forced_divisors(loose) == []


def test_forced_divisors_skip_free_exponents():
    spec = SubtreeSpec((3, 5), (UNB, UNB))
    assert forced_divisors(spec) == []


def test_merge_detects_incompatibility():
    spec = SubtreeSpec((3,), (Fixed(2),), d=DConstraints(residues=((13, 0),)))
    with pytest.raises(Contradiction):
        merge_forced(spec, [13])
    with pytest.raises(Contradiction):
        DConstraints(forced=(2,)).congruence()
    bounded = SubtreeSpec((3,), (Fixed(2),), d=DConstraints(d_min=2, d_max=6))
    with pytest.raises(Contradiction):
        merge_forced(bounded, [13])  # D = 7 (mod 13) has no value in [2, 6]


# --- order rule --------------------------------------------------------------

def test_order_contradiction_with_fixed_d():
    spec = SubtreeSpec((3, 5, 11), (Fixed(2), Free(2, 10), Free(2, 10)),
                       d=DConstraints(d_min=33, d_max=33))
    cert = order_contradiction(spec, 11, 5)
    assert cert is not None and cert.rule == "OrderContradiction"
    assert "3221" in cert.value("forced").split()
    assert (2 * 33 - 1) % 3221 != 0


def test_order_forced_61():
    spec = SubtreeSpec((3, 5, 61), (Fixed(2), UNB, UNB))
    qs = order_forced(spec, 61, 5)
    assert 131 in qs
    assert qs == [131, 21491]
    assert sigma_prime_power(61, 4) == 131 * 21491 * 5


def test_order_modulus_one_never_prunes():
    spec = SubtreeSpec((3, 5), (Free(2, 6), Free(2, 6)))
    assert order_contradiction(spec, 3, 1) is None


def test_order_requirement_without_admissible_exponent():
    spec = SubtreeSpec((3, 5), (Free(2, 2), Free(2, 6)))
    cert = order_contradiction(spec, 3, 5)  # needs 5 | alpha + 1, alpha = 2 only
    assert cert.rule == "OrderContradiction" and cert.value("admissible") == "none"


# --- quadratic residues ------------------------------------------------------

def test_qr_eleven():
    assert qr_admissible_parities([3, 5, 19, 89], 11, {1: 0, 2: 0, 3: 0}) == frozenset()


def test_qr_1093():
    assert legendre(2, 1093) == -1 and legendre(3, 1093) == legendre(223, 1093) == 1
    assert qr_admissible_parities([3, 223], 1093) == frozenset()


def test_qr_vacuous():
    q = 7  # (2/7) = 1, (11/7) = (4/7) = 1, (2/7) = 1
    assert legendre(2, q) == legendre(11, q) == 1
    assert qr_admissible_parities([2, 11], q) == frozenset({(0, 0), (0, 1), (1, 0), (1, 1)})


def test_qr_depends_only_on_parity():
    base = qr_admissible_parities([3, 5, 7], 1093, {0: 0})
    assert base == qr_admissible_parities([3, 5, 7], 1093, {0: 2})
    assert qr_admissible_parities([3, 5, 7], 1093, {1: 1}) == qr_admissible_parities([3, 5, 7], 1093, {1: 3})


def test_qr_domain():
    with pytest.raises(DomainError):
        qr_admissible_parities([3, 11], 11)


def test_qr_stage_fires_in_pipeline():
    # sigma(11^2) = 7 * 19; 3 and 5 cannot divide sigma(n), so d is supported on {11},
    # and (11/19) = 1 differs from (2/19) = -1
    spec = SubtreeSpec((3, 5, 11), (UNB, UNB, Fixed(2)))
    cert = apply_rules(spec)
    assert cert is not None and cert.rule == "QuadraticResidueContradiction"
    assert cert.value("q") == "19" and cert.value("beta_zero") == "3 5"
    assert check_certificate(cert)
    capped = SubtreeSpec((3, 5, 11), (Free(2, 12), Free(2, 12), Fixed(2)))
    assert all(dp_witness(f) is None for f in completions(capped))


def test_order_stage_without_supplier():
    # every ord_17(p) is even for p in {3, 7, 11, 13}, while alpha + 1 is odd
    spec = SubtreeSpec((3, 7, 11, 13), (UNB,) * 4, d=DConstraints(forced=(17,)))
    cert = apply_rules(spec)
    assert cert.rule == "OrderContradiction" and cert.value("q") == "17"
    assert check_certificate(cert)
    assert apply_rules(replace(spec, d=DConstraints(forced=(19,)))) is None


# --- pipeline, certificates, soundness --------------------------------------

def test_rule_names():
    assert RULES == ("BoundAboveTwo", "BoundBelowTwo", "OrderContradiction",
                     "ForcedDivisorContradiction", "QuadraticResidueContradiction")


def test_certificate_round_trip_and_tamper():
    cert = prune_by_bounds(p4_at_least_167())
    again = PruneCertificate.from_dict(cert.to_dict())
    assert again == cert
    assert check_certificate(again)
    forged = replace(cert, exact_values=cert.exact_values[:-1] + (("D_high", "1"),))
    assert not check_certificate(forged)
    bad_fact = replace(cert, facts=(replace(cert.facts[0], expected=">2"),))
    assert not check_certificate(bad_fact)


def test_spec_validation():
    with pytest.raises(ValueError):
        SubtreeSpec((3, 5), (Fixed(3), Fixed(2)))  # odd exponent on the even grid
    with pytest.raises(ValueError):
        SubtreeSpec((5, 3), (Fixed(2), Fixed(2)))
    SubtreeSpec((2, 3), (Fixed(1), Fixed(3)), step=1)


def test_spec_round_trip():
    spec = replace(p4_at_least_167(), beta=(BETA_ZERO, "unknown", "unknown"))
    assert SubtreeSpec.from_dict(spec.to_dict()) == spec


def test_count_completions():
    spec = SubtreeSpec((3, 5), (Free(2, 6), Fixed(2)), Tail(1, 5, Free(2, 4), 7, 13))
    assert count_completions(spec) == 3 * 1 * 3 * 2
    assert len(list(completions(spec))) == count_completions(spec)


PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43]


@st.composite
def bounded_specs(draw):
    step = draw(st.sampled_from([1, 2]))
    pool = PRIMES[1:] if step == 2 else PRIMES
    k = draw(st.integers(1, 4))
    primes = sorted(draw(st.lists(st.sampled_from(pool), min_size=k, max_size=k, unique=True)))
    least = 2 if step == 2 else 1
    exps = []
    for _ in primes:
        lo = draw(st.sampled_from(range(least, 7, step)))
        if draw(st.booleans()):
            exps.append(Fixed(lo))
        else:
            exps.append(Free(lo, draw(st.sampled_from(range(lo, 9, step)))))
    tail = None
    if draw(st.booleans()) and len(primes) < 4:
        slots = draw(st.integers(1, 4 - len(primes)))
        lo = draw(st.sampled_from(range(least, 5, step)))
        tail = Tail(slots, primes[-1], Free(lo, lo + step * draw(st.integers(0, 1))), 2, 47)
        if len([p for p in PRIMES + [47] if p > primes[-1]]) < slots:
            tail = None
    return SubtreeSpec(primes, exps, tail, step=step)


@settings(max_examples=400, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(bounded_specs(), st.sets(st.sampled_from(RULE_GROUPS), min_size=1))
def test_soundness_on_generated_subtrees(spec, rules):
    cert = apply_rules(spec, tuple(rules))
    if cert is None or count_completions(spec) > 20000:
        return
    assert check_certificate(cert, tuple(rules))
    for f in completions(spec):
        assert dp_witness(f) is None, (cert.rule, str(f))


def test_inverted_rule_is_caught(monkeypatch):
    """A rule that prunes a live subtree is refuted by exhaustive evaluation."""
    from defiperf import prune

    live = SubtreeSpec((3, 7), (Fixed(2), Fixed(2)), Tail(2, 7, Free(2, 2), 11, 13))
    monkeypatch.setattr(prune, "_qr_stage",
                        lambda spec, work, facts: PruneCertificate("QuadraticResidueContradiction", spec))
    _apply.cache_clear()
    try:
        cert = apply_rules(live, ("qr",))
        assert cert is not None
        assert any(dp_witness(f) is not None for f in completions(live))
    finally:
        _apply.cache_clear()
