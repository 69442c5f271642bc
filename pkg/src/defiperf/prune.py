"""Sound pruning rules over families of factorization shapes.

A ``SubtreeSpec`` describes a set of candidate n: a list of known primes,
each with a fixed exponent or a range of exponents, optionally followed by
``tail`` further primes not chosen yet. The rules below decide, without
floating point, that no member of such a family satisfies
sigma(n)/n + 1/D = 2 and emit a certificate that says why.

Every rule rests on sigma(n) = (2D - 1) d together with d | n and D | n:

* bounds       sigma(n)/n + 1/D must equal 2 exactly;
* forced       a prime q outside the support of n dividing sigma(p^a) must
               divide 2D - 1, so D = (q + 1)/2 (mod q);
* order        such a q has to come from some sigma(p^alpha); when only one
               prime can supply it, ord_q(p) | alpha + 1 and then
               sigma(p^(ord - 1)) divides sigma(p^alpha);
* residues     with all exponents even n is a square, and q | sigma(n)
               gives (d/q) = (2/q).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from math import comb, gcd, prod
from typing import Iterator, Mapping, NamedTuple, Optional, Union

from .certs import FactRecord
from .ntcore import (
    DomainError,
    Factorization,
    PrimePower,
    factorize,
    is_prime,
    is_proven_prime,
    legendre,
    mult_order,
    primes_between,
    sigma_prime_power,
)

__all__ = [
    "RULES",
    "RULE_GROUPS",
    "Contradiction",
    "Fixed",
    "Free",
    "Tail",
    "DConstraints",
    "SubtreeSpec",
    "PruneCertificate",
    "ForcedDivisor",
    "bound_interval",
    "prune_by_bounds",
    "sigma_divisibility",
    "forced_divisors",
    "merge_forced",
    "qr_admissible_parities",
    "order_forced",
    "order_contradiction",
    "apply_rules",
    "check_certificate",
    "completions",
    "count_completions",
]

BOUND_ABOVE = "BoundAboveTwo"
BOUND_BELOW = "BoundBelowTwo"
ORDER = "OrderContradiction"
FORCED = "ForcedDivisorContradiction"
QR = "QuadraticResidueContradiction"
RULES = (BOUND_ABOVE, BOUND_BELOW, ORDER, FORCED, QR)

# toggles, in application order
RULE_GROUPS = ("bound", "forced", "order", "qr")

BETA_UNKNOWN, BETA_ZERO, BETA_POSITIVE = "unknown", "zero", "positive"

# divisor enumeration for the smallest admissible D gives up beyond this
D_ENUM_LIMIT = 200_000
TWO = Fraction(2)


class Contradiction(Exception):
    """The constraints of a spec admit no completion."""


@dataclass(frozen=True)
class Fixed:
    a: int


@dataclass(frozen=True)
class Free:
    lo: int
    hi: Optional[int] = None  # None: unbounded


Exponent = Union[Fixed, Free]


def _values(e: Exponent, step: int) -> list[int]:
    if isinstance(e, Fixed):
        return [e.a]
    if e.hi is None:
        raise ValueError("unbounded exponent range")
    return list(range(e.lo, e.hi + 1, step))


def _lo(e: Exponent) -> int:
    return e.a if isinstance(e, Fixed) else e.lo


def _hi(e: Exponent) -> Optional[int]:
    return e.a if isinstance(e, Fixed) else e.hi


@dataclass(frozen=True)
class Tail:
    """``slots`` more primes, each > ``after`` and within [lo, hi]."""

    slots: int
    after: int
    exp: Free
    lo: int = 2
    hi: Optional[int] = None

    @property
    def first(self) -> int:
        return max(self.after + 1, self.lo)

    def candidates(self) -> list[int]:
        if self.hi is None:
            raise ValueError("unbounded tail")
        return primes_between(self.first, self.hi)

    def may_contain(self, q: int) -> bool:
        return q >= self.first and (self.hi is None or q <= self.hi)


@dataclass(frozen=True)
class DConstraints:
    forced: tuple[int, ...] = ()  # primes q with q | 2D - 1
    residues: tuple[tuple[int, int], ...] = ()  # (m, r): D = r (mod m)
    d_min: int = 2
    d_max: Optional[int] = None

    def congruence(self) -> tuple[int, int]:
        """Merge all residue information into one class D = R (mod M)."""
        M, R = 1, 0
        pairs = list(self.residues) + [(q, (q + 1) // 2) for q in self.forced if q != 2]
        if 2 in self.forced:
            raise Contradiction("2 cannot divide the odd number 2D - 1")
        for m, r in pairs:
            g = gcd(M, m)
            if (r - R) % g:
                raise Contradiction(f"D = {R} (mod {M}) and D = {r} (mod {m}) are incompatible")
            lcm = M // g * m
            t = ((r - R) // g) * pow(M // g, -1, m // g) % (m // g) if m // g > 1 else 0
            R = (R + M * t) % lcm
            M = lcm
        return M, R

    def to_dict(self) -> dict:
        return {
            "forced": list(self.forced),
            "residues": [list(x) for x in self.residues],
            "d_min": self.d_min,
            "d_max": self.d_max,
        }

    @classmethod
    def from_dict(cls, data: dict) -> DConstraints:
        return cls(
            tuple(data["forced"]),
            tuple(tuple(x) for x in data["residues"]),
            data["d_min"],
            data["d_max"],
        )


@dataclass(frozen=True)
class SubtreeSpec:
    primes: tuple[int, ...]
    exps: tuple[Exponent, ...]
    tail: Optional[Tail] = None
    d: DConstraints = DConstraints()
    beta: tuple[str, ...] = ()
    step: int = 2  # 2: even exponents only (odd n); 1: any exponent >= 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "primes", tuple(self.primes))
        object.__setattr__(self, "exps", tuple(self.exps))
        if not self.beta:
            object.__setattr__(self, "beta", (BETA_UNKNOWN,) * len(self.primes))
        if not (len(self.primes) == len(self.exps) == len(self.beta)):
            raise ValueError("primes, exps and beta must have equal length")
        if any(b <= a for a, b in zip(self.primes, self.primes[1:])):
            raise ValueError("primes must strictly ascend")
        least = 2 if self.step == 2 else 1
        ranges = list(self.exps) + ([self.tail.exp] if self.tail else [])
        for e in ranges:
            lo, hi = _lo(e), _hi(e)
            if lo < least or (hi is not None and hi < lo):
                raise ValueError(f"bad exponent range {e}")
            if self.step == 2 and (lo % 2 or (hi is not None and hi % 2)):
                raise ValueError("exponents must be even")
        if self.tail and self.primes and self.tail.after < self.primes[-1]:
            raise ValueError("tail primes must follow the known primes")

    @property
    def bounded(self) -> bool:
        es = list(self.exps) + ([self.tail.exp] if self.tail else [])
        return all(_hi(e) is not None for e in es) and (self.tail is None or self.tail.hi is not None)

    def index(self, p: int) -> int:
        return self.primes.index(p)

    def with_exp(self, i: int, e: Exponent) -> SubtreeSpec:
        exps = list(self.exps)
        exps[i] = e
        return replace(self, exps=tuple(exps))

    def to_dict(self) -> dict:
        def enc(e: Exponent) -> dict:
            if isinstance(e, Fixed):
                return {"fixed": e.a}
            return {"min": e.lo, "max": e.hi}

        tail = None
        if self.tail:
            t = self.tail
            tail = {"slots": t.slots, "after": t.after, "lo": t.lo, "hi": t.hi, "exp": enc(t.exp)}
        return {
            "primes": list(self.primes),
            "exps": [enc(e) for e in self.exps],
            "tail": tail,
            "d": self.d.to_dict(),
            "beta": list(self.beta),
            "step": self.step,
        }

    @classmethod
    def from_dict(cls, data: dict) -> SubtreeSpec:
        def dec(x: dict) -> Exponent:
            return Fixed(x["fixed"]) if "fixed" in x else Free(x["min"], x["max"])

        t = data["tail"]
        tail = None
        if t:
            tail = Tail(t["slots"], t["after"], dec(t["exp"]), t["lo"], t["hi"])
        return cls(
            tuple(data["primes"]),
            tuple(dec(x) for x in data["exps"]),
            tail,
            DConstraints.from_dict(data["d"]),
            tuple(data["beta"]),
            data["step"],
        )


@dataclass(frozen=True)
class PruneCertificate:
    rule: str
    spec: SubtreeSpec
    facts: tuple[FactRecord, ...] = ()
    exact_values: tuple[tuple[str, str], ...] = ()
    derived: Optional[SubtreeSpec] = None

    def value(self, key: str) -> Optional[str]:
        return dict(self.exact_values).get(key)

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "spec": self.spec.to_dict(),
            "derived": self.derived.to_dict() if self.derived else None,
            "facts": [f.to_dict() for f in self.facts],
            "exact_values": {k: v for k, v in self.exact_values},
        }

    @classmethod
    def from_dict(cls, data: dict) -> PruneCertificate:
        return cls(
            rule=data["rule"],
            spec=SubtreeSpec.from_dict(data["spec"]),
            facts=tuple(FactRecord.from_dict(f) for f in data["facts"]),
            exact_values=tuple(data["exact_values"].items()),
            derived=SubtreeSpec.from_dict(data["derived"]) if data["derived"] else None,
        )


class ForcedDivisor(NamedTuple):
    """Prime q | sigma(p^a), hence q | 2D - 1."""

    q: int
    p: int
    a: int
    probable: bool = False


# ---------------------------------------------------------------------------
# completions

def _tail_choices(spec: SubtreeSpec) -> list[tuple[int, ...]]:
    if spec.tail is None:
        return [()]
    return list(combinations(spec.tail.candidates(), spec.tail.slots))


def count_completions(spec: SubtreeSpec) -> int:
    n = prod(len(_values(e, spec.step)) for e in spec.exps)
    if spec.tail:
        k = spec.tail.slots
        n *= comb(len(spec.tail.candidates()), k) * len(_values(spec.tail.exp, spec.step)) ** k
    return n


def completions(spec: SubtreeSpec) -> Iterator[Factorization]:
    """Every n in the family, as factorizations (requires bounded ranges)."""
    known = [_values(e, spec.step) for e in spec.exps]
    for extra in _tail_choices(spec):
        primes = spec.primes + extra
        ranges = known + [_values(spec.tail.exp, spec.step)] * len(extra) if extra else known
        for exps in product(*ranges):
            yield Factorization(tuple(PrimePower(p, a) for p, a in zip(primes, exps)))


# ---------------------------------------------------------------------------
# bounds

def _sr(p: int, a: int) -> Fraction:
    return Fraction(sigma_prime_power(p, a), p**a)


def _term(p: int, a: Optional[int]) -> tuple[Fraction, str]:
    if a is None:
        return Fraction(p, p - 1), f"(sup {p})"
    return _sr(p, a), f"(sr {p} {a})"


def _first_primes_after(x: int, k: int) -> list[int]:
    out, q = [], x + 1
    while len(out) < k:
        if is_prime(q):
            out.append(q)
        q += 1
    return out


@dataclass(frozen=True)
class _Bounds:
    lo: Fraction
    hi: Fraction
    lo_terms: tuple[str, ...]
    hi_terms: tuple[str, ...]
    d_low: int  # smallest admissible D, feeds hi
    d_high: Optional[int]  # largest admissible D, feeds lo


def _admissible_d(spec: SubtreeSpec) -> tuple[int, Optional[int]]:
    """Smallest and largest admissible D (largest may be None = unbounded)."""
    M, R = spec.d.congruence()
    floor = max(2, spec.d.d_min)
    cap = spec.d.d_max
    if (M == 1 and floor == 2 and cap is None and spec.tail is None and spec.bounded
            and all(b == BETA_UNKNOWN for b in spec.beta)):
        # D = p alone is always admissible, as is D = n
        return spec.primes[0], prod(p ** _hi(e) for p, e in zip(spec.primes, spec.exps))
    zero_part = prod(p ** _lo(e) for p, e, b in zip(spec.primes, spec.exps, spec.beta) if b == BETA_ZERO)

    if spec.tail is None and spec.bounded:
        options = []
        size = 1
        for p, e, b in zip(spec.primes, spec.exps, spec.beta):
            vals = _values(e, spec.step)
            if b == BETA_ZERO:
                opts = [p**v for v in vals]
            elif b == BETA_POSITIVE:
                opts = [p**v for v in range(max(vals))]
            else:
                opts = [p**v for v in range(max(vals) + 1)]
            options.append(opts)
            size *= len(opts)
        if size <= D_ENUM_LIMIT:
            ok = [
                D for D in (prod(c) for c in product(*options))
                if D >= floor and (cap is None or D <= cap) and D % M == R
            ]
            if not ok:
                raise Contradiction("no divisor of n satisfies the constraints on D")
            return min(ok), max(ok)

    if cap is not None and cap < floor:
        raise Contradiction(f"D_min {floor} exceeds D_max {cap}")
    start = max(floor, zero_part)
    low = start + (R - start) % M
    if cap is not None and low > cap:
        raise Contradiction(f"no D in [{start}, {cap}] with D = {R} (mod {M})")
    high = cap
    if spec.tail is None and spec.bounded:
        nmax = prod(p ** _hi(e) for p, e in zip(spec.primes, spec.exps))
        high = nmax if cap is None else min(cap, nmax)
    return low, high


def _bounds(spec: SubtreeSpec, with_d_term: bool = True) -> _Bounds:
    lo = hi = Fraction(1)
    lo_terms: list[str] = []
    hi_terms: list[str] = []
    for p, e in zip(spec.primes, spec.exps):
        v, t = _term(p, _lo(e))
        lo *= v
        lo_terms.append(t)
        v, t = _term(p, _hi(e))
        hi *= v
        hi_terms.append(t)
    if spec.tail:
        k, tail = spec.tail.slots, spec.tail
        if tail.hi is None:
            smallest = _first_primes_after(tail.first - 1, k)
        else:
            cands = tail.candidates()
            if len(cands) < k:
                raise Contradiction("not enough primes left for the remaining slots")
            smallest = cands[:k]
            for q in cands[-k:]:
                v, t = _term(q, tail.exp.lo)
                lo *= v
                lo_terms.append(t)
        for q in smallest:
            v, t = _term(q, tail.exp.hi)
            hi *= v
            hi_terms.append(t)
    d_low, d_high = 0, None
    if with_d_term:
        d_low, d_high = _admissible_d(spec)
        hi += Fraction(1, d_low)
        if d_high is not None:
            lo += Fraction(1, d_high)
    return _Bounds(lo, hi, tuple(lo_terms), tuple(hi_terms), d_low, d_high)


def bound_interval(spec: SubtreeSpec, with_d_term: bool = True) -> tuple[Fraction, Fraction]:
    """Exact lo <= sigma(n)/n + 1/D <= hi over every completion of ``spec``.

    Raises Contradiction when the D constraints admit nothing.
    """
    b = _bounds(spec, with_d_term)
    return b.lo, b.hi


def _bound_cert(spec: SubtreeSpec, work: SubtreeSpec, facts: list[FactRecord],
                extra: list[tuple[str, str]], rule_override: Optional[str] = None) -> Optional[PruneCertificate]:
    b = _bounds(work)
    if b.lo > TWO:
        rel, rule, terms, dterm = ">2", BOUND_ABOVE, b.lo_terms, b.d_high
    elif b.hi < TWO:
        rel, rule, terms, dterm = "<2", BOUND_BELOW, b.hi_terms, b.d_low
    else:
        return None
    ineq = FactRecord.inequality(terms, rel, dterm, "engine")
    values = extra + [("lo", str(b.lo)), ("hi", str(b.hi)), ("D_low", str(b.d_low)),
                      ("D_high", str(b.d_high))]
    return PruneCertificate(
        rule_override or rule, spec, tuple(facts) + (ineq,), tuple(values),
        derived=work if work != spec else None,
    )


def prune_by_bounds(spec: SubtreeSpec) -> Optional[PruneCertificate]:
    """BoundAboveTwo if lo > 2, BoundBelowTwo if hi < 2, else None."""
    try:
        return _bound_cert(spec, spec, [], [])
    except Contradiction:
        return None


# ---------------------------------------------------------------------------
# divisibility of sigma values

def sigma_divisibility(q: int, p: int, a: int) -> bool:
    """Whether the prime q divides sigma(p^a), decided through ord_q(p)."""
    if q == p:
        raise DomainError("q must differ from p")
    if a < 0:
        raise DomainError("exponent must be nonnegative")
    if p % q == 1 % q:
        return (a + 1) % q == 0
    return (a + 1) % mult_order(p, q) == 0


def _supply_modulus(q: int, p: int) -> int:
    """The m with q | sigma(p^a)  <=>  m | a + 1."""
    return q if p % q == 1 % q else mult_order(p, q)


def _can_supply(q: int, p: int, e: Exponent, step: int) -> bool:
    if p == q:
        return False
    if _hi(e) is not None:
        return any(sigma_divisibility(q, p, a) for a in _values(e, step))
    m = _supply_modulus(q, p)
    # some a >= lo on the grid with m | a + 1
    return step == 1 or m % 2 == 1


def _outside_support(spec: SubtreeSpec, q: int) -> bool:
    return q not in spec.primes and not (spec.tail and spec.tail.may_contain(q))


def forced_divisors(spec: SubtreeSpec, seed: Optional[int] = None) -> list[ForcedDivisor]:
    """Primes q | sigma(p^a) (p^a fixed) lying outside every completion's support.

    Each must divide 2D - 1. Unfactored cofactors contribute nothing.
    """
    out: dict[int, ForcedDivisor] = {}
    for p, e in zip(spec.primes, spec.exps):
        if not isinstance(e, Fixed):
            continue
        s = sigma_prime_power(p, e.a)
        res = factorize(s) if seed is None else factorize(s, seed=seed)
        for q, _ in res.factorization.factors:
            if _outside_support(spec, q) and q not in out:
                out[q] = ForcedDivisor(q, p, e.a, not is_proven_prime(q))
    return [out[q] for q in sorted(out)]


def merge_forced(spec: SubtreeSpec, qs) -> SubtreeSpec:
    """Add ``q | 2D - 1`` constraints; raises Contradiction when inconsistent."""
    forced = tuple(sorted(set(spec.d.forced) | {int(q) for q in qs}))
    new = replace(spec, d=replace(spec.d, forced=forced))
    new.d.congruence()
    _admissible_d(new)
    return new


def _derive_beta_zero(spec: SubtreeSpec) -> tuple[SubtreeSpec, list[FactRecord]]:
    """Mark primes that cannot divide sigma(n), hence not d (as d | sigma(n))."""
    if spec.tail is not None:
        return spec, []
    beta = list(spec.beta)
    facts: list[FactRecord] = []
    for i, q in enumerate(spec.primes):
        if beta[i] == BETA_ZERO:
            continue
        others = [(p, e) for j, (p, e) in enumerate(zip(spec.primes, spec.exps)) if j != i]
        if any(_can_supply(q, p, e, spec.step) for p, e in others):
            continue
        beta[i] = BETA_ZERO
        for p, e in others:
            if isinstance(e, Fixed):
                facts.append(FactRecord.divides(q, f"(sigma {p} {e.a})", "engine", negate=True))
            elif p % q != 1 % q:
                facts.append(FactRecord.order(p, q, mult_order(p, q), "engine"))
    if facts or tuple(beta) != spec.beta:
        return replace(spec, beta=tuple(beta)), facts
    return spec, facts


# ---------------------------------------------------------------------------
# order rule

def _requirement_values(spec: SubtreeSpec, i: int, m: int) -> list[int]:
    return [a for a in _values(spec.exps[i], spec.step) if (a + 1) % m == 0]


def order_forced(spec: SubtreeSpec, p: int, m: int, seed: Optional[int] = None) -> list[int]:
    """Primes forced into 2D - 1 once m | alpha_p + 1 is known.

    sigma(p^(m-1)) divides sigma(p^alpha) for every such alpha.
    """
    s = sigma_prime_power(p, m - 1)
    res = factorize(s) if seed is None else factorize(s, seed=seed)
    return [q for q, _ in res.factorization.factors if _outside_support(spec, q)]


def order_contradiction(spec: SubtreeSpec, p: int, m: int, facts: tuple[FactRecord, ...] = (),
                        seed: Optional[int] = None) -> Optional[PruneCertificate]:
    """Certificate when ``m | alpha_p + 1`` cannot hold inside ``spec``."""
    i = spec.index(p)
    facts = list(facts)
    base = [("requirement", f"{m} | alpha_{p} + 1")]
    if _hi(spec.exps[i]) is not None:
        admissible = _requirement_values(spec, i, m)
        if not admissible:
            return PruneCertificate(ORDER, spec, tuple(facts), tuple(base + [("admissible", "none")]))
        narrowed = spec.with_exp(i, Fixed(admissible[0]) if len(admissible) == 1
                                 else Free(admissible[0], admissible[-1]))
    else:
        narrowed = spec
    if m == 1:
        return None
    qs = order_forced(spec, p, m, seed)
    s = sigma_prime_power(p, m - 1)
    facts += [FactRecord.divides(q, f"(sigma {p} {m - 1})", "engine") for q in qs]
    values = base + [("forced", " ".join(map(str, qs)))]
    try:
        work = merge_forced(narrowed, qs)
    except Contradiction as exc:
        return PruneCertificate(ORDER, spec, tuple(facts), tuple(values + [("reason", str(exc))]))
    try:
        return _bound_cert(spec, work, facts, values + [("sigma", str(s))], rule_override=ORDER)
    except Contradiction as exc:
        return PruneCertificate(ORDER, spec, tuple(facts), tuple(values + [("reason", str(exc))]))


def _order_stage(spec: SubtreeSpec, work: SubtreeSpec, facts: list[FactRecord],
                 seed: Optional[int]) -> Optional[PruneCertificate]:
    if work.tail is not None:
        return None
    for q in work.d.forced:
        if q in work.primes or q == 2:
            continue
        suppliers = []
        local: list[FactRecord] = []
        satisfied = False
        for p, e in zip(work.primes, work.exps):
            if isinstance(e, Fixed):
                if sigma_divisibility(q, p, e.a):
                    satisfied = True
                    break
                local.append(FactRecord.divides(q, f"(sigma {p} {e.a})", "engine", negate=True))
            elif _can_supply(q, p, e, work.step):
                suppliers.append(p)
            elif p % q != 1 % q:
                local.append(FactRecord.order(p, q, mult_order(p, q), "engine"))
        if satisfied:
            continue
        if not suppliers:
            return PruneCertificate(
                ORDER, spec, tuple(facts + local),
                (("q", str(q)), ("reason", f"{q} | 2D-1 but {q} cannot divide sigma(n)")),
                derived=work,
            )
        if len(suppliers) == 1:
            p = suppliers[0]
            m = _supply_modulus(q, p)
            of = [FactRecord.order(p, q, m, "engine")] if p % q != 1 % q else []
            cert = order_contradiction(work, p, m, tuple(facts + local + of), seed)
            if cert is not None:
                return replace(cert, spec=spec, derived=work,
                               exact_values=(("q", str(q)),) + cert.exact_values)
    return None


# ---------------------------------------------------------------------------
# quadratic residues

def qr_admissible_parities(primes, q: int, fixed: Optional[Mapping[int, int]] = None) -> frozenset:
    """Parity vectors of (beta_i mod 2) compatible with q | sigma(n), n a square.

    The condition is prod (p_i/q)^beta_i = (2/q). ``fixed`` pins the parity
    of selected positions (e.g. beta_i = 0).
    """
    primes = list(primes)
    if any(p % q == 0 for p in primes):
        raise DomainError(f"{q} divides one of the primes")
    target = legendre(2, q)
    symbols = [legendre(p, q) for p in primes]
    fixed = dict(fixed or {})
    out = set()
    for vec in product((0, 1), repeat=len(primes)):
        if any(vec[i] != v % 2 for i, v in fixed.items()):
            continue
        val = 1
        for s, b in zip(symbols, vec):
            if b:
                val *= s
        if val == target:
            out.add(vec)
    return frozenset(out)


def _qr_stage(spec: SubtreeSpec, work: SubtreeSpec, facts: list[FactRecord]) -> Optional[PruneCertificate]:
    if work.step != 2 or work.tail is not None:
        return None
    fixed = {i: 0 for i, b in enumerate(work.beta) if b == BETA_ZERO}
    for q in work.d.forced:
        if q == 2 or q in work.primes:
            continue
        if qr_admissible_parities(work.primes, q, fixed):
            continue
        legs = [FactRecord.legendre(2, q, legendre(2, q), "engine")]
        legs += [FactRecord.legendre(p, q, legendre(p, q), "engine") for p in work.primes]
        return PruneCertificate(
            QR, spec, tuple(facts + legs),
            (("q", str(q)), ("beta_zero", " ".join(str(p) for p, b in zip(work.primes, work.beta)
                                                    if b == BETA_ZERO))),
            derived=work,
        )
    return None


# ---------------------------------------------------------------------------
# pipeline

def apply_rules(spec: SubtreeSpec, rules=RULE_GROUPS, seed: Optional[int] = None) -> Optional[PruneCertificate]:
    """Run the enabled rule groups in the fixed order bound, forced, order, qr."""
    return _apply(spec, frozenset(rules), seed)


@lru_cache(maxsize=1 << 16)
def _apply(spec: SubtreeSpec, rules: frozenset, seed: Optional[int]) -> Optional[PruneCertificate]:
    if "bound" in rules:
        try:
            cert = _bound_cert(spec, spec, [], [])
        except Contradiction as exc:
            return PruneCertificate(FORCED, spec, (), (("reason", str(exc)),))
        if cert is not None:
            return cert
    work, facts = spec, []
    probable: list[int] = []
    if "forced" in rules:
        fds = forced_divisors(spec, seed)
        facts = [FactRecord.divides(f.q, f"(sigma {f.p} {f.a})", "engine") for f in fds]
        probable = [f.q for f in fds if f.probable]
        extra = [("forced", " ".join(str(f.q) for f in fds))]
        if probable:
            extra.append(("probable_primes", " ".join(map(str, probable))))
        try:
            work = merge_forced(spec, [f.q for f in fds])
            work, bfacts = _derive_beta_zero(work)
            facts += bfacts
            if "bound" in rules and work != spec:
                cert = _bound_cert(spec, work, facts, extra)
                if cert is not None:
                    return cert
        except Contradiction as exc:
            return PruneCertificate(FORCED, spec, tuple(facts), tuple(extra + [("reason", str(exc))]),
                                    derived=None)
    if "order" in rules:
        cert = _order_stage(spec, work, facts, seed)
        if cert is not None:
            return cert
    if "qr" in rules:
        cert = _qr_stage(spec, work, facts)
        if cert is not None:
            return cert
    return None


def check_certificate(cert: PruneCertificate, rules=RULE_GROUPS, seed: Optional[int] = None) -> bool:
    """Re-derive ``cert`` from its spec and re-verify every embedded fact."""
    from .certs import verify_fact

    again = _apply.__wrapped__(cert.spec, frozenset(rules), seed)
    if again != cert:
        return False
    return all(verify_fact(f).status == "Confirmed" for f in cert.facts)
