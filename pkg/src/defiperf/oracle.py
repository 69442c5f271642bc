"""Brute-force ground truth: a segmented sigma sieve over 1..limit.

Each segment starts from ``rem = n`` and divides out every prime up to
sqrt(limit), multiplying sigma by sigma(p^k) along the way. A residue above 1
after that is a single large prime and contributes ``rem + 1``. The number of
primes divided out gives omega(n) at no extra cost.
"""

from __future__ import annotations

import csv
import io
import logging
import warnings
from dataclasses import dataclass, field
from math import isqrt, prod
from typing import NamedTuple, Optional

import numpy as np

from .ntcore import primes_up_to

__all__ = [
    "SEGMENT",
    "SieveEntry",
    "SieveResult",
    "OracleMismatch",
    "sieve_sigma",
    "sieve_sigma_omega",
    "enumerate_dp",
    "cross_check",
    "shape_domain",
]

log = logging.getLogger(__name__)

SEGMENT = 1 << 20


class OracleMismatch(AssertionError):
    """Engine and sieve disagree on a shared domain."""


class SieveEntry(NamedTuple):
    n: int
    d: int
    D: int
    omega: int
    is_odd: bool


@dataclass
class SieveResult:
    limit: int
    entries: list[SieveEntry] = field(default_factory=list)
    odd_only: bool = False
    omega_equals: Optional[int] = None

    @property
    def values(self) -> list[int]:
        return [e.n for e in self.entries]

    def to_dict(self) -> dict:
        return {
            "limit": self.limit,
            "odd_only": self.odd_only,
            "omega_equals": self.omega_equals,
            "entries": [
                {"n": e.n, "d": e.d, "D": e.D, "omega": e.omega, "is_odd": e.is_odd}
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> SieveResult:
        entries = [SieveEntry(e["n"], e["d"], e["D"], e["omega"], e["is_odd"]) for e in data["entries"]]
        return cls(data["limit"], entries, data["odd_only"], data["omega_equals"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "d", "D", "omega", "parity"])
        for e in self.entries:
            w.writerow([e.n, e.d, e.D, e.omega, "odd" if e.is_odd else "even"])
        return buf.getvalue()


def _segment(lo: int, hi: int, small: list[int]) -> tuple[np.ndarray, np.ndarray]:
    """sigma and omega for lo <= n < hi."""
    n = np.arange(lo, hi, dtype=np.int64)
    rem = n.copy()
    sig = np.ones(hi - lo, dtype=np.int64)
    om = np.zeros(hi - lo, dtype=np.int8)
    for p in small:
        start = -lo % p
        if start >= hi - lo:
            continue
        idx = np.arange(start, hi - lo, p)
        pk = np.full(idx.size, p, dtype=np.int64)
        # grow pk to the exact power of p dividing each n
        while True:
            more = n[idx] % (pk * p) == 0
            if not more.any():
                break
            pk[more] *= p
        sig[idx] *= (pk * p - 1) // (p - 1)
        rem[idx] //= pk
        om[idx] += 1
    big = rem > 1
    sig[big] *= rem[big] + 1
    om[big] += 1
    return sig, om


def sieve_sigma_omega(limit: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays of length limit + 1 with sigma(n) and omega(n); index 0 is unused (0)."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    small = primes_up_to(isqrt(limit))
    sig = np.zeros(limit + 1, dtype=np.int64)
    om = np.zeros(limit + 1, dtype=np.int8)
    for lo in range(1, limit + 1, SEGMENT):
        hi = min(lo + SEGMENT, limit + 1)
        sig[lo:hi], om[lo:hi] = _segment(lo, hi, small)
    return sig, om


def sieve_sigma(limit: int) -> np.ndarray:
    """sigma(n) for 1 <= n <= limit, as an int64 array indexed from 0 (so sigma(n) is element n - 1)."""
    return sieve_sigma_omega(limit)[0][1:]


def _trial_sigma(n: int) -> int:
    total, i = 0, 1
    while i * i <= n:
        if n % i == 0:
            total += i
            if i * i != n:
                total += n // i
        i += 1
    return total


def enumerate_dp(limit: int, odd_only: bool = False, omega_equals: Optional[int] = None) -> SieveResult:
    """All deficient-perfect n <= limit, optionally only odd ones or only a given omega."""
    if limit < 2:
        raise ValueError("limit must be >= 2")
    sig, om = sieve_sigma_omega(limit)
    n = np.arange(limit + 1, dtype=np.int64)
    delta = 2 * n - sig
    ok = (delta >= 1) & (delta < n)
    ok[:2] = False
    cand = np.nonzero(ok)[0]
    cand = cand[cand % delta[cand] == 0]
    if odd_only:
        cand = cand[cand % 2 == 1]
    if omega_equals is not None:
        cand = cand[om[cand] == omega_equals]
    entries = []
    for x in cand.tolist():
        d = int(delta[x])
        # recheck each hit without the sieve array
        if 2 * x - _trial_sigma(x) != d or x % d:
            raise OracleMismatch(f"sieve and trial division disagree at n={x}")
        entries.append(SieveEntry(x, d, x // d, int(om[x]), x % 2 == 1))
    return SieveResult(limit, entries, odd_only, omega_equals)


def shape_domain(config) -> callable:
    """Predicate: does n lie inside the grid a SearchConfig enumerates?"""
    from .ntcore import factorize

    allowed = set(config.primes())
    grid = set(config.grid)

    def inside(n: int) -> bool:
        if config.value_max is not None and n > config.value_max:
            return False
        f = factorize(n).factorization
        if f.omega != config.omega or any(p not in allowed for p in f.primes):
            return False
        if any(a not in grid for a in f.exponents):
            return False
        if config.preset:
            from .search import PRESETS

            p1, p2s = PRESETS[config.preset]
            if f.primes[0] != p1 or (f.omega > 1 and f.primes[1] not in p2s):
                return False
        return True

    return inside


def cross_check(report, sieve: SieveResult) -> bool:
    """Compare engine and sieve witnesses on the domain both cover.

    Raises ``OracleMismatch`` listing the symmetric difference on disagreement.
    """
    cfg = report.config
    inside = shape_domain(cfg)

    def shared(n: int) -> bool:
        if n > sieve.limit or (sieve.odd_only and n % 2 == 0):
            return False
        return inside(n)

    primes = cfg.primes()
    disjoint = (sieve.omega_equals is not None and sieve.omega_equals != cfg.omega) or (
        len(primes) < cfg.omega
        or prod(p ** cfg.grid[0] for p in primes[: cfg.omega]) > sieve.limit
    )
    if disjoint:
        warnings.warn("engine and sieve domains do not intersect", stacklevel=2)
        return True
    eng = {n for n in report.witness_values if shared(n)}
    orc = {e.n for e in sieve.entries if shared(e.n)}
    if eng != orc:
        raise OracleMismatch(
            f"engine-only: {sorted(eng - orc)}; sieve-only: {sorted(orc - eng)}"
        )
    return True
