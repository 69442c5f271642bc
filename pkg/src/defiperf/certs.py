"""Fact records: transcribed numeric claims and their exact verification.

Fixture files hold one record per line, four tab-separated fields::

    KIND<TAB>EXPR<TAB>EXPECTED<TAB>LOCUS

KIND is one of ORDER, DIVIDES, NOTDIVIDES, LEGENDRE, INEQUALITY. EXPR uses
a parenthesized prefix syntax:

    ORDER        (ord a m)                      EXPECTED: the order
    DIVIDES      (powm1 p e) | (sigma p a)      EXPECTED: the divisor q
    NOTDIVIDES   same as DIVIDES
    LEGENDRE     (legendre a q)                 EXPECTED: -1, 0 or 1
    INEQUALITY   (* TERM ...) or (+ (* TERM ...) (inv INT))
                                                EXPECTED: >2 or <2

with TERM one of ``(sr p a)`` = sigma(p^a)/p^a, ``(sup p)`` = p/(p-1), or
``(lit NUM DEN TERM)``: a fraction exactly as printed in the source together
with the term it is meant to denote. A ``lit`` whose printed value differs
from its meaning refutes the record. INT, NUM and DEN are integer
expressions built from literals, ``(pow b e)``, ``(powm1 p e)``,
``(sigma p a)``, ``(* ...)``, ``(+ ...)`` and ``(- x y)``.

Blank lines and lines starting with ``#`` are ignored. A LOCUS ending in
``[typo:literal]`` marks a transcription of a misprint; the record with the
same locus and ``[typo:intent]`` holds the evidently intended form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Union

from .ntcore import DomainError, is_prime, mult_order

__all__ = [
    "KINDS",
    "ParseError",
    "FactRecord",
    "FixtureSummary",
    "parse_expr",
    "parse_line",
    "verify_fact",
    "verify_records",
    "verify_fixture_file",
    "read_fixture",
    "shipped_corpus",
]

KINDS = ("ORDER", "DIVIDES", "NOTDIVIDES", "LEGENDRE", "INEQUALITY")
CONFIRMED, REFUTED, UNCHECKED = "Confirmed", "Refuted", "Unchecked"
TYPO_LITERAL, TYPO_INTENT = "[typo:literal]", "[typo:intent]"

Expr = Union[int, tuple]


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


# ---------------------------------------------------------------------------
# expression parsing

_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


def parse_expr(text: str) -> Expr:
    """Parse a prefix expression into nested tuples ``(op, *args)`` and ints."""
    tokens: list[tuple[str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or not m.group(1):
            if text[pos:].strip():
                raise ParseError(f"unexpected character {text[pos]!r}", column=pos + 1)
            break
        tokens.append((m.group(1), m.start(1) + 1))
        pos = m.end()
    if not tokens:
        raise ParseError("empty expression", column=1)

    def walk(i: int) -> tuple[Expr, int]:
        tok, col = tokens[i]
        if tok == "(":
            if i + 1 >= len(tokens):
                raise ParseError("unterminated expression", column=col)
            op, opcol = tokens[i + 1]
            if op in "()" or re.fullmatch(r"-?\d+", op):
                raise ParseError(f"expected operator, got {op!r}", column=opcol)
            args: list[Expr] = []
            j = i + 2
            while True:
                if j >= len(tokens):
                    raise ParseError("missing ')'", column=col)
                if tokens[j][0] == ")":
                    return (op, *args), j + 1
                arg, j = walk(j)
                args.append(arg)
        if tok == ")":
            raise ParseError("unexpected ')'", column=col)
        if not re.fullmatch(r"-?\d+", tok):
            raise ParseError(f"bad atom {tok!r}", column=col)
        return int(tok), i + 1

    expr, end = walk(0)
    if end != len(tokens):
        raise ParseError("trailing tokens", column=tokens[end][1])
    return expr


def _int_value(e: Expr) -> int:
    if isinstance(e, int):
        return e
    op, *args = e
    vals = [_int_value(a) for a in args]
    if op == "pow" and len(vals) == 2 and vals[1] >= 0:
        return vals[0] ** vals[1]
    if op == "powm1" and len(vals) == 2 and vals[1] >= 0:
        return vals[0] ** vals[1] - 1
    if op == "sigma" and len(vals) == 2:
        return _sigma_pp(*vals)
    if op == "*" and vals:
        out = 1
        for v in vals:
            out *= v
        return out
    if op == "+" and vals:
        return sum(vals)
    if op == "-" and len(vals) == 2:
        return vals[0] - vals[1]
    raise ParseError(f"bad integer expression {format_expr(e)}")


def _sigma_pp(p: int, a: int) -> int:
    if a < 0 or not is_prime(p):
        raise ParseError(f"sigma needs a prime and a nonnegative exponent, got ({p}, {a})")
    return (p ** (a + 1) - 1) // (p - 1)


def format_expr(e: Expr) -> str:
    if isinstance(e, int):
        return str(e)
    return "(" + " ".join(format_expr(x) if not isinstance(x, str) else x for x in e) + ")"


# ---------------------------------------------------------------------------
# records

@dataclass(frozen=True)
class FactRecord:
    kind: str
    expr: str
    expected: str
    locus: str = ""
    status: str = UNCHECKED
    note: str = ""

    def to_line(self) -> str:
        return "\t".join((self.kind, self.expr, self.expected, self.locus))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "expr": self.expr,
            "expected": self.expected,
            "locus": self.locus,
            "status": self.status,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: dict) -> FactRecord:
        return cls(**{k: data[k] for k in ("kind", "expr", "expected", "locus", "status", "note")})

    # convenience constructors used by the prune rules
    @classmethod
    def order(cls, a: int, m: int, value: int, locus: str = "") -> FactRecord:
        return cls("ORDER", f"(ord {a} {m})", str(value), locus)

    @classmethod
    def divides(cls, q: int, expr: str, locus: str = "", negate: bool = False) -> FactRecord:
        return cls("NOTDIVIDES" if negate else "DIVIDES", expr, str(q), locus)

    @classmethod
    def legendre(cls, a: int, q: int, value: int, locus: str = "") -> FactRecord:
        return cls("LEGENDRE", f"(legendre {a} {q})", str(value), locus)

    @classmethod
    def inequality(cls, terms: Iterable[str], relation: str, inv_d: int | None = None,
                   locus: str = "") -> FactRecord:
        prodexpr = "(* " + " ".join(terms) + ")"
        expr = prodexpr if inv_d is None else f"(+ {prodexpr} (inv {inv_d}))"
        return cls("INEQUALITY", expr, relation, locus)


def parse_line(line: str, lineno: int | None = None) -> FactRecord:
    fields = line.rstrip("\n").split("\t")
    if len(fields) != 4:
        raise ParseError(f"expected 4 tab-separated fields, got {len(fields)}", lineno)
    kind, expr, expected, locus = fields
    if kind not in KINDS:
        raise ParseError(f"unknown kind {kind!r}", lineno, 1)
    rec = FactRecord(kind, expr, expected, locus)
    try:
        _check_shape(rec)
    except ParseError as exc:
        col = exc.column + len(kind) + 1 if exc.column is not None else None
        raise ParseError(str(exc).split(": ", 1)[-1], lineno, col) from None
    return rec


def _expect_int(text: str, what: str) -> int:
    if not re.fullmatch(r"-?\d+", text.strip()):
        raise ParseError(f"{what} must be an integer, got {text!r}")
    return int(text)


def _check_shape(rec: FactRecord) -> Expr:
    e = parse_expr(rec.expr)
    head = e[0] if isinstance(e, tuple) else None
    if rec.kind == "ORDER":
        if head != "ord" or len(e) != 3:
            raise ParseError("ORDER needs (ord a m)", column=1)
        _expect_int(rec.expected, "ORDER expectation")
    elif rec.kind in ("DIVIDES", "NOTDIVIDES"):
        if head not in ("powm1", "sigma") or len(e) != 3 or not all(isinstance(x, int) for x in e[1:]):
            raise ParseError(f"{rec.kind} needs (powm1 p e) or (sigma p a)", column=1)
        if _expect_int(rec.expected, "divisor") < 1:
            raise ParseError("divisor must be positive")
    elif rec.kind == "LEGENDRE":
        if head != "legendre" or len(e) != 3:
            raise ParseError("LEGENDRE needs (legendre a q)", column=1)
        if _expect_int(rec.expected, "Legendre value") not in (-1, 0, 1):
            raise ParseError("Legendre value must be -1, 0 or 1")
    elif rec.kind == "INEQUALITY":
        if rec.expected not in (">2", "<2"):
            raise ParseError("INEQUALITY expectation must be >2 or <2")
        _split_inequality(e)
    return e


def _split_inequality(e: Expr) -> tuple[list[Expr], Expr | None]:
    if isinstance(e, tuple) and e[0] == "+" and len(e) == 3:
        prod_e, inv_e = e[1], e[2]
        if not (isinstance(inv_e, tuple) and inv_e[0] == "inv" and len(inv_e) == 2):
            raise ParseError("additive term must be (inv D)")
        d_expr = inv_e[1]
    else:
        prod_e, d_expr = e, None
    if not (isinstance(prod_e, tuple) and prod_e[0] == "*" and len(prod_e) >= 2):
        raise ParseError("inequality needs a product (* TERM ...)")
    terms = list(prod_e[1:])
    for t in terms:
        _check_term(t)
    return terms, d_expr


def _check_term(t: Expr) -> None:
    if not isinstance(t, tuple):
        raise ParseError(f"bad term {t}")
    if t[0] == "sr" and len(t) == 3:
        return
    if t[0] == "sup" and len(t) == 2:
        return
    if t[0] == "lit" and len(t) == 4:
        _check_term(t[3])
        return
    raise ParseError(f"bad term {format_expr(t)}")


# ---------------------------------------------------------------------------
# verification

def _term_value(t: Expr) -> Fraction:
    op = t[0]
    if op == "sr":
        p, a = _int_value(t[1]), _int_value(t[2])
        return Fraction(_sigma_pp(p, a), p**a)
    if op == "sup":
        p = _int_value(t[1])
        if not is_prime(p):
            raise ParseError(f"sup needs a prime, got {p}")
        return Fraction(p, p - 1)
    return Fraction(_int_value(t[1]), _int_value(t[2]))


def _term_value_by_divisors(t: Expr) -> Fraction:
    """Second evaluation path: explicit divisor sums and a geometric limit."""
    op = t[0]
    if op == "sr":
        p, a = _int_value(t[1]), _int_value(t[2])
        n = p**a
        return Fraction(sum(d for d in (p**k for k in range(a + 1)) if n % d == 0), n)
    if op == "sup":
        p = _int_value(t[1])
        return 1 / (1 - Fraction(1, p))
    return _term_value_by_divisors(t[3])


def _sigma_mod(p: int, a: int, q: int) -> int:
    if (p - 1) % q == 0:
        return (a + 1) % q
    m = q * (p - 1)
    return ((pow(p, a + 1, m) - 1) % m) // (p - 1) % q


def _verify(rec: FactRecord) -> tuple[bool, str]:
    e = _check_shape(rec)
    if rec.kind == "ORDER":
        a, m = _int_value(e[1]), _int_value(e[2])
        try:
            h = mult_order(a, m)
        except DomainError as exc:
            return False, str(exc)
        return h == int(rec.expected), f"ord_{m}({a}) = {h}"
    if rec.kind in ("DIVIDES", "NOTDIVIDES"):
        q = int(rec.expected)
        x, y = e[1], e[2]
        if e[0] == "powm1":
            r = (pow(x, y, q) - 1) % q
            shown = f"{x}^{y}-1"
        else:
            if not is_prime(x) or y < 0:
                raise ParseError(f"sigma needs a prime and a nonnegative exponent, got ({x}, {y})")
            r = _sigma_mod(x, y, q)
            shown = f"sigma({x}^{y})"
        divides = r == 0
        note = f"{shown} = {r} (mod {q})"
        return divides == (rec.kind == "DIVIDES"), note
    if rec.kind == "LEGENDRE":
        a, q = _int_value(e[1]), _int_value(e[2])
        if q < 3 or q % 2 == 0 or not is_prime(q):
            return False, f"{q} is not an odd prime"
        r = pow(a, (q - 1) // 2, q)
        val = 0 if r == 0 else 1 if r == 1 else -1
        return val == int(rec.expected), f"({a}/{q}) = {val}"
    terms, d_expr = _split_inequality(e)
    for t in terms:
        if t[0] == "lit":
            printed, meant = _term_value(t), _term_value(t[3])
            if printed != meant:
                return False, f"printed {format_expr(t[1])}/{format_expr(t[2])} = {printed} but {format_expr(t[3])} = {meant}"
    value = Fraction(1)
    for t in terms:
        value *= _term_value(t)
    if d_expr is not None:
        value += Fraction(1, _int_value(d_expr))
    if Fraction(19, 10) <= value <= Fraction(21, 10):
        check = Fraction(1)
        for t in terms:
            check *= _term_value_by_divisors(t)
        if d_expr is not None:
            check += Fraction(1, _int_value(d_expr))
        if check != value:
            return False, f"evaluation paths disagree: {value} vs {check}"
    holds = value > 2 if rec.expected == ">2" else value < 2
    return holds, f"value = {value} (margin {value - 2})"


def verify_fact(rec: FactRecord) -> FactRecord:
    """Return ``rec`` with status Confirmed or Refuted and the recomputed truth."""
    ok, note = _verify(rec)
    return replace(rec, status=CONFIRMED if ok else REFUTED, note=note)


# ---------------------------------------------------------------------------
# fixture files

@dataclass
class FixtureSummary:
    confirmed: int = 0
    refuted: int = 0
    parse_errors: int = 0
    records: list[FactRecord] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def counts(self) -> tuple[int, int, int]:
        return self.confirmed, self.refuted, self.parse_errors

    def typo_ledger(self) -> list[dict]:
        """Pairs of literal/intent records, with the recomputed truth."""
        intents = {r.locus.replace(TYPO_INTENT, "").strip(): r
                   for r in self.records if r.locus.endswith(TYPO_INTENT)}
        out = []
        for r in self.records:
            if r.locus.endswith(TYPO_LITERAL):
                key = r.locus.replace(TYPO_LITERAL, "").strip()
                intent = intents.get(key)
                out.append({
                    "locus": key,
                    "literal": r.to_line(),
                    "literal_status": r.status,
                    "truth": r.note,
                    "intent": intent.to_line() if intent else None,
                    "intent_status": intent.status if intent else None,
                })
        return out

    def to_dict(self) -> dict:
        return {
            "confirmed": self.confirmed,
            "refuted": self.refuted,
            "parse_errors": self.parse_errors,
            "errors": list(self.errors),
            "records": [r.to_dict() for r in self.records],
            "typo_ledger": self.typo_ledger(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> FixtureSummary:
        return cls(
            confirmed=data["confirmed"],
            refuted=data["refuted"],
            parse_errors=data["parse_errors"],
            records=[FactRecord.from_dict(r) for r in data["records"]],
            errors=list(data["errors"]),
        )


def verify_records(records: Iterable[FactRecord]) -> FixtureSummary:
    summary = FixtureSummary()
    for rec in records:
        try:
            done = verify_fact(rec)
        except ParseError as exc:
            summary.parse_errors += 1
            summary.errors.append(f"{rec.to_line()}: {exc}")
            continue
        summary.records.append(done)
        if done.status == CONFIRMED:
            summary.confirmed += 1
        else:
            summary.refuted += 1
    return summary


def read_fixture(path: str | Path) -> tuple[list[FactRecord], list[str]]:
    records, errors = [], []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.split("\n"), 1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            records.append(parse_line(line, lineno))
        except ParseError as exc:
            errors.append(str(exc))
    return records, errors


def verify_fixture_file(path: str | Path) -> FixtureSummary:
    """Verify every record of a fixture file. Refutations are counted, not raised.

    Raises OSError when the file cannot be read.
    """
    records, errors = read_fixture(path)
    summary = verify_records(records)
    summary.parse_errors += len(errors)
    summary.errors = errors + summary.errors
    return summary


def shipped_corpus() -> Path:
    return Path(__file__).parent / "data" / "facts.tsv"
