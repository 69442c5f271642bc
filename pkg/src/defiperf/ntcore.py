"""Exact number-theory primitives.

Everything here works on Python ints (arbitrary precision) and
``fractions.Fraction``; nothing touches floating point.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt, prod
from typing import Iterable, NamedTuple

__all__ = [
    "DomainError",
    "Rational",
    "PrimePower",
    "Factorization",
    "FactorResult",
    "PRIMALITY_VERSION",
    "is_prime",
    "is_proven_prime",
    "primes_up_to",
    "primes_between",
    "factorize",
    "sigma_prime_power",
    "sigma",
    "mult_order",
    "carmichael_lambda",
    "legendre",
    "divisors",
]

Rational = Fraction

# Bumped whenever the composite-detection procedure above 2**64 changes.
PRIMALITY_VERSION = "mr12+strong-lucas/1"

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_DETERMINISTIC_LIMIT = 1 << 64
TRIAL_LIMIT = 10**6
DEFAULT_SEED = 20190815
DEFAULT_BUDGET = 200_000


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PrimePower(NamedTuple):
    p: int
    a: int

    def __str__(self) -> str:
        return str(self.p) if self.a == 1 else f"{self.p}^{self.a}"


@dataclass(frozen=True)
class Factorization:
    """Canonical factorization: primes strictly ascending, exponents >= 1.

    The empty factorization denotes 1.
    """

    factors: tuple[PrimePower, ...] = ()

    def __post_init__(self) -> None:
        fs = tuple(PrimePower(int(p), int(a)) for p, a in self.factors)
        object.__setattr__(self, "factors", fs)
        prev = 1
        for p, a in fs:
            if p <= prev:
                raise DomainError(f"primes must strictly ascend, got {p} after {prev}")
            if a < 1:
                raise DomainError(f"exponent of {p} must be >= 1, got {a}")
            if not is_prime(p):
                raise DomainError(f"{p} is not prime")
            prev = p

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> Factorization:
        return cls(tuple(PrimePower(p, a) for p, a in pairs if a))

    @classmethod
    def from_int(cls, n: int) -> Factorization:
        res = factorize(n)
        if not res.fully_factored:
            raise DomainError(f"could not fully factor {n} within budget")
        return res.factorization

    @classmethod
    def parse(cls, text: str) -> Factorization:
        """Parse ``p1^a1*p2^a2*...`` (ascending primes) or a decimal integer."""
        s = text.strip().replace(" ", "")
        if re.fullmatch(r"\d+", s):
            n = int(s)
            if n < 1:
                raise DomainError("expected a positive integer")
            return cls.from_int(n)
        if not re.fullmatch(r"\d+(\^\d+)?(\*\d+(\^\d+)?)*", s):
            raise DomainError(f"malformed factorization literal {text!r}")
        pairs = []
        for part in s.split("*"):
            p, _, a = part.partition("^")
            pairs.append((int(p), int(a) if a else 1))
        return cls(tuple(PrimePower(p, a) for p, a in pairs))

    @property
    def value(self) -> int:
        return prod(p**a for p, a in self.factors)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(a for _, a in self.factors)

    @property
    def omega(self) -> int:
        return len(self.factors)

    def exponent_of(self, p: int) -> int:
        for q, a in self.factors:
            if q == p:
                return a
        return 0

    def pairs(self) -> list[list[int]]:
        return [[p, a] for p, a in self.factors]

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return "*".join(str(pp) for pp in self.factors)


class FactorResult(NamedTuple):
    factorization: Factorization
    fully_factored: bool
    cofactor: int  # unfactored composite residue, 1 when fully factored
    seed: int


# ---------------------------------------------------------------------------
# primality

@lru_cache(maxsize=None)
def _small_primes() -> tuple[int, ...]:
    return tuple(primes_up_to(TRIAL_LIMIT))


@lru_cache(maxsize=None)
def _small_flags() -> bytearray:
    return _flags(TRIAL_LIMIT)


def _flags(limit: int) -> bytearray:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0] = 0
    if limit >= 1:
        sieve[1] = 0
    for i in range(2, isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytes(len(range(i * i, limit + 1, i)))
    return sieve


def primes_up_to(limit: int) -> list[int]:
    if limit < 2:
        return []
    return [i for i, flag in enumerate(_flags(limit)) if flag]


def primes_between(lo: int, hi: int) -> list[int]:
    """Primes p with lo <= p <= hi."""
    if hi <= TRIAL_LIMIT:
        ps = _small_primes()
        from bisect import bisect_left, bisect_right

        return list(ps[bisect_left(ps, lo) : bisect_right(ps, hi)])
    return [n for n in range(max(lo, 2), hi + 1) if is_prime(n)]


def _strong_probable_prime(n: int, base: int) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(base, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def _jacobi(a: int, n: int) -> int:
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _strong_lucas(n: int) -> bool:
    # Selfridge method A parameters
    if isqrt(n) ** 2 == n:
        return False
    D = 5
    while True:
        j = _jacobi(D, n)
        if j == -1:
            break
        if j == 0 and abs(D) != n:
            return False
        D = -D - 2 if D > 0 else -D + 2
    P, Q = 1, (1 - D) // 4
    d, s = n + 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    inv2 = (n + 1) // 2
    U, V, Qk = 1, P, Q % n
    for bit in bin(d)[3:]:
        U, V = U * V % n, (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if bit == "1":
            U, V = (P * U + V) * inv2 % n, (D * U + P * V) * inv2 % n
            Qk = Qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * Qk) % n
        if V == 0:
            return True
        Qk = Qk * Qk % n
    return False


def is_prime(n: int) -> bool:
    """Primality test.

    Deterministic below 2**64 (Miller-Rabin over the first twelve primes as
    bases). Above that the same twelve strong-probable-prime rounds are
    followed by a strong Lucas test; see ``PRIMALITY_VERSION``.
    """
    if n < 2:
        return False
    if n <= TRIAL_LIMIT:
        return bool(_small_flags()[n])
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if not all(_strong_probable_prime(n, b) for b in _MR_BASES):
        return False
    if n < _DETERMINISTIC_LIMIT:
        return True
    return _strong_lucas(n)


def is_proven_prime(n: int) -> bool:
    return n < _DETERMINISTIC_LIMIT and is_prime(n)


# ---------------------------------------------------------------------------
# factorization

def _brent(n: int, rng: random.Random, budget: int) -> tuple[int | None, int]:
    """One Pollard-Brent attempt. Returns (factor or None, iterations used)."""
    y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
    g = r = q = 1
    used = 0
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = gcd(q, n)
            k += m
        used += r
        r *= 2
        if used > budget:
            return None, used
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = gcd(abs(x - ys), n)
            used += 1
    return (g if g != n else None), used


@lru_cache(maxsize=65536)
def factorize(n: int, budget: int = DEFAULT_BUDGET, seed: int = DEFAULT_SEED) -> FactorResult:
    """Factor ``n`` by trial division to 10**6, then seeded Pollard-Brent rho.

    ``budget`` caps the total number of rho iterations. When it runs out the
    composite leftover is reported as ``cofactor`` and left out of the factor
    list; this is a reported state, not an error.
    """
    if n < 1:
        raise DomainError("factorize expects n >= 1")
    found: dict[int, int] = {}
    m = n
    for p in _small_primes():
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    leftover = 1
    if m > 1:
        rng = random.Random(seed)
        stack = [m]
        spent = 0
        while stack:
            x = stack.pop()
            if x == 1:
                continue
            if x <= TRIAL_LIMIT * TRIAL_LIMIT or is_prime(x):
                # no factor below 10**6 remains, so x < 10**12 is prime here
                found[x] = found.get(x, 0) + 1
                continue
            f = None
            while f is None and spent <= budget:
                f, used = _brent(x, rng, budget - spent)
                spent += used
            if f is None:
                leftover *= x
                continue
            stack.extend((f, x // f))
    fact = Factorization(tuple(PrimePower(p, found[p]) for p in sorted(found)))
    return FactorResult(fact, leftover == 1, leftover, seed)


def divisors(f: Factorization) -> list[int]:
    """All divisors of value(f), ascending."""
    divs = [1]
    for p, a in f.factors:
        divs = [d * p**k for d in divs for k in range(a + 1)]
    return sorted(divs)


# ---------------------------------------------------------------------------
# sigma

def sigma_prime_power(p: int, a: int) -> int:
    """sigma(p**a) = 1 + p + ... + p**a."""
    if a < 0:
        raise DomainError("exponent must be nonnegative")
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    return (p ** (a + 1) - 1) // (p - 1)


def sigma(f: Factorization) -> int:
    return prod(sigma_prime_power(p, a) for p, a in f.factors)


# ---------------------------------------------------------------------------
# orders and residues

def carmichael_lambda(m: int) -> int:
    res = factorize(m)
    if not res.fully_factored:
        raise DomainError(f"cannot factor modulus {m}")
    lam = 1
    for p, k in res.factorization.factors:
        if p == 2:
            t = 1 if k == 1 else 2 if k == 2 else 1 << (k - 2)
        else:
            t = p ** (k - 1) * (p - 1)
        lam = lam * t // gcd(lam, t)
    return lam


def mult_order(a: int, m: int) -> int:
    """Least h >= 1 with a**h == 1 (mod m)."""
    if m < 2:
        raise DomainError("modulus must be >= 2")
    if gcd(a, m) != 1:
        raise DomainError(f"gcd({a}, {m}) != 1")
    a %= m
    if a == 1:
        return 1
    h = m - 1 if is_prime(m) else carmichael_lambda(m)
    for r, _ in factorize(h).factorization.factors:
        while h % r == 0 and pow(a, h // r, m) == 1:
            h //= r
    return h


def legendre(a: int, q: int) -> int:
    """Legendre symbol (a/q) in {-1, 0, 1} for an odd prime q."""
    if q < 3 or q % 2 == 0 or not is_prime(q):
        raise DomainError(f"{q} is not an odd prime")
    return _jacobi(a, q)

