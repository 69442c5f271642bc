"""Depth-first branch and bound over prime tuples and exponent vectors.

Primes are chosen first, smallest first, then exponents one prime at a time.
Every internal node is described by a ``SubtreeSpec`` and offered to the
prune rules; surviving leaves are evaluated exactly with ``dp_witness``.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from math import comb
from typing import Optional

from . import __version__
from .defperf import DPWitness, IntegrityError, dp_witness, verify_eq1
from .ntcore import DEFAULT_SEED, Factorization, PrimePower, primes_between
from .prune import (
    RULE_GROUPS,
    Fixed,
    Free,
    PruneCertificate,
    SubtreeSpec,
    Tail,
    apply_rules,
    check_certificate,
    count_completions,
)

__all__ = [
    "PRESETS",
    "SearchConfig",
    "SearchReport",
    "enumerate_shapes",
    "evaluate_leaf",
    "replay",
    "load_config",
]

log = logging.getLogger(__name__)

# (p1, allowed p2) restrictions. "paper-s5" narrows to p1 = 3 and
# p2 in {5, 7, 11, 13, 17}; it rests on a cited result this package does not
# verify, so it is opt-in only.
PRESETS: dict[str, tuple[int, tuple[int, ...]]] = {
    "paper-s5": (3, (5, 7, 11, 13, 17)),
}


@dataclass(frozen=True)
class SearchConfig:
    omega: int = 4
    odd: bool = True
    prime_min: Optional[int] = None  # default 3 when odd, else 2
    prime_max: int = 300
    exponent_max: int = 16
    value_max: Optional[int] = None
    preset: Optional[str] = None
    rules: tuple[str, ...] = RULE_GROUPS
    trace: int = 0
    seed: int = DEFAULT_SEED
    max_leaves: Optional[int] = None
    max_seconds: Optional[float] = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.omega < 1:
            raise ValueError("omega must be >= 1")
        if self.prime_max < 2:
            raise ValueError("prime_max must be >= 2")
        if self.exponent_max < 1 or (self.odd and self.exponent_max < 2):
            raise ValueError("exponent_max too small for the exponent grid")
        if self.preset is not None and self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")
        unknown = set(self.rules) - set(RULE_GROUPS)
        if unknown:
            raise ValueError(f"unknown rule groups {sorted(unknown)}")
        object.__setattr__(self, "rules", tuple(r for r in RULE_GROUPS if r in self.rules))
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def first_prime(self) -> int:
        if self.prime_min is not None:
            return max(self.prime_min, 3 if self.odd else 2)
        return 3 if self.odd else 2

    @property
    def step(self) -> int:
        return 2 if self.odd else 1

    @property
    def grid(self) -> tuple[int, ...]:
        lo = 2 if self.odd else 1
        return tuple(range(lo, self.exponent_max + 1, self.step))

    @property
    def exp_range(self) -> Free:
        g = self.grid
        return Free(g[0], g[-1])

    def primes(self) -> list[int]:
        return primes_between(self.first_prime, self.prime_max)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rules"] = list(self.rules)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> SearchConfig:
        known = {f.name for f in fields(cls)}
        kw = {k: v for k, v in data.items() if k in known}
        if "rules" in kw:
            kw["rules"] = tuple(kw["rules"])
        return cls(**kw)


@dataclass
class SearchReport:
    config: SearchConfig
    witnesses: list[DPWitness] = field(default_factory=list)
    certificates: list[PruneCertificate] = field(default_factory=list)
    leaves_evaluated: int = 0
    leaves_pruned: int = 0
    subtrees_pruned: int = 0
    out_of_range: int = 0
    total_shapes: int = 0
    complete: bool = True
    engine_version: str = __version__
    seed: int = DEFAULT_SEED
    trace: list[str] = field(default_factory=list)

    def merge(self, other: SearchReport) -> None:
        self.witnesses.extend(other.witnesses)
        self.certificates.extend(other.certificates)
        self.leaves_evaluated += other.leaves_evaluated
        self.leaves_pruned += other.leaves_pruned
        self.subtrees_pruned += other.subtrees_pruned
        self.out_of_range += other.out_of_range
        self.complete = self.complete and other.complete
        self.trace.extend(other.trace)

    @property
    def witness_values(self) -> list[int]:
        return [w.n.value for w in self.witnesses]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "witnesses": [w.to_dict() for w in self.witnesses],
            "certificates": [c.to_dict() for c in self.certificates],
            "leaves_evaluated": self.leaves_evaluated,
            "leaves_pruned": self.leaves_pruned,
            "subtrees_pruned": self.subtrees_pruned,
            "out_of_range": self.out_of_range,
            "total_shapes": self.total_shapes,
            "complete": self.complete,
            "engine_version": self.engine_version,
            "seed": self.seed,
            "trace": list(self.trace),
        }

    @classmethod
    def from_dict(cls, data: dict) -> SearchReport:
        return cls(
            config=SearchConfig.from_dict(data["config"]),
            witnesses=[DPWitness.from_dict(w) for w in data["witnesses"]],
            certificates=[PruneCertificate.from_dict(c) for c in data["certificates"]],
            leaves_evaluated=data["leaves_evaluated"],
            leaves_pruned=data["leaves_pruned"],
            subtrees_pruned=data["subtrees_pruned"],
            out_of_range=data["out_of_range"],
            total_shapes=data["total_shapes"],
            complete=data["complete"],
            engine_version=data["engine_version"],
            seed=data["seed"],
            trace=list(data["trace"]),
        )


class _Budget(Exception):
    pass


def evaluate_leaf(primes, exponents) -> Optional[DPWitness]:
    f = Factorization(tuple(PrimePower(p, a) for p, a in zip(primes, exponents)))
    return dp_witness(f)


class _Walker:
    def __init__(self, config: SearchConfig, leaf_allowance: Optional[int], deadline: Optional[float]):
        self.cfg = config
        self.report = SearchReport(config=config, seed=config.seed)
        self.allowance = leaf_allowance
        self.deadline = deadline
        self.primes = config.primes()
        self.grid = config.grid

    def _trace(self, level: int, msg: str) -> None:
        if self.cfg.trace >= level:
            self.report.trace.append(msg)

    def _try_prune(self, spec: SubtreeSpec) -> bool:
        if not self.cfg.rules:
            return False
        cert = apply_rules(spec, self.cfg.rules, self.cfg.seed)
        if cert is None:
            return False
        n = count_completions(spec)
        self.report.certificates.append(cert)
        self.report.subtrees_pruned += 1
        self.report.leaves_pruned += n
        self._trace(1, f"prune {cert.rule} primes={list(spec.primes)} "
                       f"exps={[e.a if isinstance(e, Fixed) else None for e in spec.exps]} leaves={n}")
        return True

    def _check_budget(self) -> None:
        if self.allowance is not None and self.report.leaves_evaluated >= self.allowance:
            raise _Budget
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Budget

    # prime level ----------------------------------------------------------
    def prime_node(self, prefix: tuple[int, ...], allow_prune: bool) -> None:
        k, omega = len(prefix), self.cfg.omega
        if k == omega:
            self.exponent_node(prefix, ())
            return
        if k >= 1 and allow_prune:
            tail = Tail(omega - k, prefix[-1], self.cfg.exp_range, self.cfg.first_prime, self.cfg.prime_max)
            spec = SubtreeSpec(prefix, (self.cfg.exp_range,) * k, tail, step=self.cfg.step)
            if len(tail.candidates()) < tail.slots:
                return
            if self._try_prune(spec):
                return
        for q in self._next_primes(prefix):
            self.prime_node(prefix + (q,), allow_prune or self.cfg.preset is None or k >= 1)

    def _next_primes(self, prefix: tuple[int, ...]) -> list[int]:
        after = prefix[-1] if prefix else 0
        cands = [q for q in self.primes if q > after]
        if self.cfg.preset and len(prefix) < 2:
            p1, p2s = PRESETS[self.cfg.preset]
            cands = [q for q in cands if (q == p1 if not prefix else q in p2s)]
        return cands

    # exponent level -------------------------------------------------------
    def exponent_node(self, primes: tuple[int, ...], fixed: tuple[int, ...]) -> None:
        k = len(fixed)
        if k == len(primes):
            self._check_budget()
            f = Factorization(tuple(PrimePower(p, a) for p, a in zip(primes, fixed)))
            if self.cfg.value_max is not None and f.value > self.cfg.value_max:
                self.report.out_of_range += 1
                return
            self.report.leaves_evaluated += 1
            w = dp_witness(f)
            self._trace(2, f"leaf {f} -> {'witness d=' + str(w.d.value) if w else 'none'}")
            if w is not None:
                self.report.witnesses.append(w)
            return
        exps = tuple(Fixed(a) for a in fixed) + (self.cfg.exp_range,) * (len(primes) - k)
        spec = SubtreeSpec(primes, exps, step=self.cfg.step)
        if self._try_prune(spec):
            return
        for a in self.grid:
            self.exponent_node(primes, fixed + (a,))


def _total_shapes(config: SearchConfig) -> int:
    primes = config.primes()
    per = len(config.grid) ** config.omega
    if config.preset is None:
        return comb(len(primes), config.omega) * per
    p1, p2s = PRESETS[config.preset]
    total = 0
    if config.omega == 1:
        return per if p1 in primes else 0
    for p2 in p2s:
        if p1 in primes and p2 in primes:
            rest = len([q for q in primes if q > p2])
            total += comb(rest, config.omega - 2)
    return total * per


def _run_subtree(config: SearchConfig, p1: int, leaf_allowance: Optional[int],
                 deadline: Optional[float]) -> SearchReport:
    w = _Walker(config, leaf_allowance, deadline)
    try:
        w.prime_node((p1,), config.preset is None or config.omega == 1)
    except _Budget:
        w.report.complete = False
    return w.report


def enumerate_shapes(config: SearchConfig) -> SearchReport:
    """Visit every shape within the caps once; return witnesses and certificates."""
    deadline = time.monotonic() + config.max_seconds if config.max_seconds else None
    report = SearchReport(config=config, seed=config.seed, total_shapes=_total_shapes(config))
    root = _Walker(config, None, None)
    firsts = root._next_primes(())
    workers = min(config.workers, int(os.environ.get("DEFIPERF_THREADS", config.workers)))
    if workers > 1 and config.max_leaves is None:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_subtree, [config] * len(firsts), firsts,
                                [None] * len(firsts), [deadline] * len(firsts)))
        for part in parts:
            report.merge(part)
    else:
        for p1 in firsts:
            left = None if config.max_leaves is None else config.max_leaves - report.leaves_evaluated
            part = _run_subtree(config, p1, left, deadline)
            report.merge(part)
            if not part.complete:
                break
    report.witnesses.sort(key=lambda w: w.n.value)
    log.info("search done: %d witnesses, %d leaves, %d subtrees pruned",
             len(report.witnesses), report.leaves_evaluated, report.subtrees_pruned)
    return report


def replay(report: SearchReport) -> bool:
    """Re-verify every witness and every certificate; raise IntegrityError on failure."""
    for w in report.witnesses:
        if not verify_eq1(w):
            raise IntegrityError(f"witness n={w.n.value} fails sigma(n) = (2D-1)d")
        if dp_witness(w.n) != w:
            raise IntegrityError(f"witness n={w.n.value} does not match a fresh evaluation")
    for i, c in enumerate(report.certificates):
        if not check_certificate(c, report.config.rules, report.config.seed):
            raise IntegrityError(f"certificate #{i} ({c.rule}, primes {list(c.spec.primes)}) does not re-verify")
    return True


# ---------------------------------------------------------------------------
# config files

_INT_KEYS = {"omega", "prime_min", "prime_max", "exponent_max", "value_max", "trace", "seed",
             "max_leaves", "workers"}
_ALIASES = {"exp_max": "exponent_max", "exp-max": "exponent_max", "prime-max": "prime_max",
            "prime-min": "prime_min", "value-max": "value_max"}


def load_config(text: str, base: Optional[SearchConfig] = None) -> SearchConfig:
    """Parse ``key = value`` lines (``#`` comments) over ``base``."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key).replace("-", "_")
        if key in _INT_KEYS:
            values[key] = None if val.lower() in ("none", "") else int(val)
        elif key == "odd":
            if val.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(f"line {lineno}: odd must be a boolean")
            values[key] = val.lower() in ("true", "1", "yes")
        elif key == "max_seconds":
            values[key] = None if val.lower() in ("none", "") else float(val)
        elif key == "preset":
            values[key] = None if val.lower() in ("none", "") else val
        elif key == "rules":
            values[key] = tuple(r.strip() for r in val.split(",") if r.strip())
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    return replace(base or SearchConfig(), **values)
