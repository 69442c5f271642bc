"""Deficient-perfect predicate, witnesses and abundancy."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .ntcore import DomainError, Factorization, PrimePower, sigma

__all__ = [
    "IntegrityError",
    "DPWitness",
    "dp_witness",
    "is_almost_perfect",
    "abundancy",
    "verify_eq1",
    "split_divisor",
]


class IntegrityError(Exception):
    """A record failed an independent recomputation."""


@dataclass(frozen=True)
class DPWitness:
    """A checked triple with sigma(n) = 2n - d = (2D - 1) d and n = d D."""

    n: Factorization
    d: Factorization
    D: Factorization
    sigma_n: int

    def to_dict(self) -> dict:
        return {
            "n": self.n.value,
            "d": self.d.value,
            "D": self.D.value,
            "sigma": self.sigma_n,
            "n_factors": self.n.pairs(),
            "d_factors": self.d.pairs(),
            "D_factors": self.D.pairs(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> DPWitness:
        return cls(
            n=Factorization.from_pairs(map(tuple, data["n_factors"])),
            d=Factorization.from_pairs(map(tuple, data["d_factors"])),
            D=Factorization.from_pairs(map(tuple, data["D_factors"])),
            sigma_n=int(data["sigma"]),
        )


def split_divisor(f: Factorization, d: int) -> tuple[Factorization, Factorization]:
    """Factor a divisor d of value(f) and its codivisor over f's prime support."""
    low, high = [], []
    for p, a in f.factors:
        b = 0
        while d % p == 0:
            d //= p
            b += 1
        if b > a:
            raise DomainError("not a divisor")
        low.append(PrimePower(p, b))
        high.append(PrimePower(p, a - b))
    if d != 1:
        raise DomainError("not a divisor")
    return Factorization.from_pairs(low), Factorization.from_pairs(high)


def dp_witness(f: Factorization) -> Optional[DPWitness]:
    """Return the witness for n = value(f) if n is deficient-perfect, else None.

    The deficient divisor is forced: d = 2n - sigma(n).
    """
    n = f.value
    if n < 2:
        raise DomainError("dp_witness needs n >= 2")
    s = sigma(f)
    delta = 2 * n - s
    if delta < 1 or delta >= n or n % delta:
        return None
    d, D = split_divisor(f, delta)
    return DPWitness(f, d, D, s)


def is_almost_perfect(w: DPWitness) -> bool:
    return w.d.value == 1


def abundancy(f: Factorization) -> Fraction:
    return Fraction(sigma(f), f.value)


def verify_eq1(w: DPWitness) -> bool:
    """Recompute every identity of the witness from scratch.

    Raises IntegrityError when the stored fields disagree with each other;
    otherwise returns whether sigma(n) == (2D - 1) d.
    """
    n, d, D = w.n.value, w.d.value, w.D.value
    if sigma(w.n) != w.sigma_n:
        raise IntegrityError(f"stored sigma {w.sigma_n} != sigma({n})")
    if d * D != n:
        raise IntegrityError(f"d*D = {d * D} != n = {n}")
    if not 1 <= d < n:
        raise IntegrityError(f"d = {d} is not a proper divisor of {n}")
    if w.sigma_n != 2 * n - d:
        raise IntegrityError(f"sigma(n) = {w.sigma_n} != 2n - d = {2 * n - d}")
    return w.sigma_n == (2 * D - 1) * d
