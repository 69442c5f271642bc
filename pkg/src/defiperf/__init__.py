"""Exact search and verification tools for deficient-perfect numbers.

A positive integer n is deficient-perfect when sigma(n) = 2n - d for a proper
divisor d of n. The package offers exact arithmetic primitives, a certified
branch-and-bound search over factorization shapes, a brute-force sieve used as
ground truth, and a checker for transcribed number-theoretic claims.
"""

__version__ = "0.1.0"

from .ntcore import DomainError, Factorization, PrimePower, factorize, sigma  # noqa: E402
from .defperf import DPWitness, IntegrityError, dp_witness, verify_eq1  # noqa: E402

__all__ = [
    "__version__",
    "DomainError",
    "Factorization",
    "PrimePower",
    "factorize",
    "sigma",
    "DPWitness",
    "IntegrityError",
    "dp_witness",
    "verify_eq1",
]
