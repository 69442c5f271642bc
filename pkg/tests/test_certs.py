import random
from pathlib import Path

import pytest

from defiperf.certs import (
    FactRecord,
    FixtureSummary,
    ParseError,
    format_expr,
    parse_expr,
    parse_line,
    read_fixture,
    shipped_corpus,
    verify_fact,
    verify_fixture_file,
    verify_records,
)
from defiperf.ntcore import factorize

DATA = Path(shipped_corpus()).parent


def status(kind, expr, expected):
    return verify_fact(FactRecord(kind, expr, expected)).status


def test_order_records():
    assert status("ORDER", "(ord 11 25)", "5") == "Confirmed"
    assert status("ORDER", "(ord 11 25)", "4") == "Refuted"
    assert status("ORDER", "(ord 5 25)", "1") == "Refuted"  # gcd != 1 is never confirmed


def test_divides_records():
    assert status("DIVIDES", "(powm1 11 5)", "3221") == "Confirmed"
    assert status("DIVIDES", "(sigma 3 2)", "13") == "Confirmed"
    assert status("NOTDIVIDES", "(sigma 3 2)", "13") == "Refuted"
    # ord_71(5) = 5 divides 75
    assert status("DIVIDES", "(powm1 5 75)", "71") == "Confirmed"


def test_legendre_records():
    assert status("LEGENDRE", "(legendre 2 11)", "-1") == "Confirmed"
    assert status("LEGENDRE", "(legendre 3 11)", "1") == "Confirmed"
    assert status("LEGENDRE", "(legendre 3 15)", "1") == "Refuted"


def test_inequality_records():
    rec = verify_fact(FactRecord("INEQUALITY", "(* (sr 3 4) (sr 5 2) (sr 11 2))", ">2"))
    assert rec.status == "Confirmed" and "4123/2025" in rec.note
    chain = "(+ (* (sr 3 2) (sup 5) (sup 11) (sup 167)) (inv 605))"
    assert status("INEQUALITY", chain, "<2") == "Confirmed"
    assert status("INEQUALITY", chain, ">2") == "Refuted"


def test_literal_term_refutes_misprint():
    literal = "(* (lit (powm1 13 3) (* 10 (pow 13 2)) (sr 13 2)))"
    rec = verify_fact(FactRecord("INEQUALITY", literal, "<2"))
    assert rec.status == "Refuted" and "183/169" in rec.note
    honest = "(* (lit (powm1 13 3) (* 12 (pow 13 2)) (sr 13 2)))"
    assert status("INEQUALITY", honest, "<2") == "Confirmed"


def test_divides_agrees_with_factorization():
    for p in [q for q in range(2, 51) if factorize(q).factorization.primes == (q,)]:
        for e in range(1, 21):
            primes = set(factorize(p**e - 1).factorization.primes) if p**e > 1 else set()
            for q in (2, 3, 5, 7, 11, 13, 31, 71, 127):
                got = status("DIVIDES", f"(powm1 {p} {e})", str(q)) == "Confirmed"
                assert got == (q in primes), (p, e, q)


# --- parsing -----------------------------------------------------------------

def test_expression_round_trip():
    text = "(+ (* (sr 3 2) (lit (- (pow 3 7) 2) (* 2 (pow 3 6)) (sr 3 6))) (inv 605))"
    assert format_expr(parse_expr(text)) == text


@pytest.mark.parametrize("line,col", [
    ("ORDER\t(ord 11 25\t5\tx", 7),
    ("ORDER\t(ord 11 25))\t5\tx", 18),
    ("ORDER\t(11 25)\t5\tx", 8),
])
def test_parse_errors_have_locations(line, col):
    with pytest.raises(ParseError) as info:
        parse_line(line, 7)
    assert info.value.line == 7
    assert info.value.column == col


@pytest.mark.parametrize("line", [
    "ORDER\t(ord 11 25)\t5",
    "FOO\t(ord 11 25)\t5\tx",
    "LEGENDRE\t(legendre 2 11)\t2\tx",
    "INEQUALITY\t(* (sr 3 2))\t=2\tx",
    "INEQUALITY\t(* (bogus 3))\t>2\tx",
    "DIVIDES\t(sigma 3 2)\tq\tx",
])
def test_malformed_lines(line):
    with pytest.raises(ParseError):
        parse_line(line)


def test_record_line_round_trip():
    line = "DIVIDES\t(powm1 11 5)\t3221\tLemma 2.1"
    rec = parse_line(line)
    assert rec.to_line() == line
    assert FactRecord.from_dict(verify_fact(rec).to_dict()) == verify_fact(rec)


# --- fixture files -----------------------------------------------------------

def test_empty_fixture(tmp_path):
    p = tmp_path / "empty.tsv"
    p.write_text("")
    assert verify_fixture_file(p).counts == (0, 0, 0)


def test_garbage_fixture(tmp_path):
    p = tmp_path / "garbage.tsv"
    p.write_text("this is not\na fixture\n")
    s = verify_fixture_file(p)
    assert s.parse_errors == 2 and s.confirmed == 0
    assert "line 1" in s.errors[0]


def test_order_independence():
    records, errors = read_fixture(shipped_corpus())
    assert not errors
    base = verify_records(records)
    shuffled = records[:]
    random.Random(5).shuffle(shuffled)
    again = verify_records(shuffled)
    assert again.counts == base.counts
    key = lambda r: r.to_line()
    assert sorted(again.records, key=key) == sorted(base.records, key=key)


def test_shipped_corpus():
    s = verify_fixture_file(shipped_corpus())
    assert s.counts == (122, 3, 0)
    kinds = {r.kind for r in s.records}
    assert kinds == {"ORDER", "DIVIDES", "NOTDIVIDES", "LEGENDRE", "INEQUALITY"}
    ledger = s.typo_ledger()
    assert [t["locus"] for t in ledger] == [
        "Lemma 3.1 Case 2", "Lemma 2.3 Subcase 9.10, alpha_1 = 6", "Lemma 2.4 Case 5"]
    assert all(t["literal_status"] == "Refuted" and t["intent_status"] == "Confirmed" for t in ledger)
    refuted = [r for r in s.records if r.status == "Refuted"]
    assert all(r.locus.endswith("[typo:literal]") for r in refuted)


def test_disputed_fixture_is_refuted():
    s = verify_fixture_file(DATA / "disputed_facts.tsv")
    assert s.counts == (0, 1, 0)
    assert "= 1" in s.records[0].note


def test_summary_round_trip():
    s = verify_fixture_file(shipped_corpus())
    again = FixtureSummary.from_dict(s.to_dict())
    assert again.counts == s.counts and again.records == s.records
