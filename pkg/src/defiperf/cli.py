"""Command-line front end.

    defiperf verify 3^2*7^2*11^2*13^2
    defiperf search --omega 4 --odd --prime-max 50 --exp-max 6
    defiperf oracle --limit 10000000 --odd --omega 4 --csv hits.csv
    defiperf facts [fixture.tsv]

Every command prints one JSON run record on stdout. Diagnostics go to stderr.
Exit codes: verify 0 witness, 1 non-witness; search 0 complete, 3 truncated;
facts 0 all confirmed, 4 some refuted; 2 always means bad input.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .certs import shipped_corpus, verify_fixture_file
from .defperf import dp_witness
from .ntcore import DomainError, Factorization
from .oracle import enumerate_dp
from .prune import RULE_GROUPS
from .records import RunRecord, default_timestamp, dumps
from .search import PRESETS, SearchConfig, enumerate_shapes, load_config

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2
EXIT_TRUNCATED, EXIT_REFUTED = 3, 4

log = logging.getLogger("defiperf")


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 as well; keep the message on stderr
        raise _InputError(message)


def _int(text: str) -> int:
    try:
        return int(text.replace("_", ""))
    except ValueError:
        # accept 1e7 style limits as long as they are exact integers
        try:
            f = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if f != int(f):
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        return int(f)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="defiperf", description="Deficient-perfect number search and verification.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more diagnostics on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="test one number")
    v.add_argument("n", help="decimal integer or p1^a1*p2^a2*... with ascending primes")
    v.add_argument("--out", type=Path)

    s = sub.add_parser("search", help="branch-and-bound search over factorization shapes")
    s.add_argument("--config", type=Path, help="key = value file; flags override it")
    s.add_argument("--omega", type=_int)
    s.add_argument("--odd", action=argparse.BooleanOptionalAction, default=None)
    s.add_argument("--prime-min", type=_int)
    s.add_argument("--prime-max", type=_int)
    s.add_argument("--exp-max", type=_int)
    s.add_argument("--value-max", type=_int)
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--seed", type=_int)
    s.add_argument("--max-leaves", type=_int)
    s.add_argument("--max-seconds", type=float)
    s.add_argument("--workers", type=_int)
    s.add_argument("--trace", type=_int)
    s.add_argument("--no-prune", action="store_true", help="disable every prune rule")
    for g in RULE_GROUPS:
        s.add_argument(f"--no-{g}", action="store_true", help=f"disable the {g} rule")
    s.add_argument("--out", type=Path)

    o = sub.add_parser("oracle", help="brute-force sigma sieve")
    o.add_argument("--limit", type=_int, required=True)
    o.add_argument("--odd", action="store_true")
    o.add_argument("--omega", type=_int)
    o.add_argument("--csv", type=Path)
    o.add_argument("--out", type=Path)

    f = sub.add_parser("facts", help="verify a fixture of transcribed claims")
    f.add_argument("fixture", nargs="?", type=Path, help="defaults to the shipped corpus")
    f.add_argument("--out", type=Path)
    return p


def _search_config(args) -> SearchConfig:
    cfg = SearchConfig(odd=False)
    if args.config is not None:
        cfg = load_config(args.config.read_text(encoding="utf-8"), cfg)
    over = {
        "omega": args.omega,
        "odd": args.odd,
        "prime_min": args.prime_min,
        "prime_max": args.prime_max,
        "exponent_max": args.exp_max,
        "value_max": args.value_max,
        "preset": args.preset,
        "seed": args.seed,
        "max_leaves": args.max_leaves,
        "max_seconds": args.max_seconds,
        "workers": args.workers,
        "trace": args.trace,
    }
    cfg = replace(cfg, **{k: v for k, v in over.items() if v is not None})
    off = set(RULE_GROUPS) if args.no_prune else {g for g in RULE_GROUPS if getattr(args, f"no_{g}")}
    if off:
        cfg = replace(cfg, rules=tuple(g for g in cfg.rules if g not in off))
    return cfg


def _cmd_verify(args, argv) -> RunRecord:
    try:
        f = Factorization.parse(args.n)
    except DomainError as exc:
        raise _InputError(str(exc)) from None
    if f.value < 2:
        raise _InputError("n must be >= 2")
    w = dp_witness(f)
    config = {"n": str(f)}
    if w is None:
        return RunRecord(argv, config, None, EXIT_NEGATIVE, "not deficient-perfect")
    return RunRecord(argv, config, w, EXIT_OK, "deficient-perfect")


def _cmd_search(args, argv) -> RunRecord:
    try:
        cfg = _search_config(args)
    except (ValueError, OSError, TypeError) as exc:
        raise _InputError(f"invalid config: {exc}") from None
    report = enumerate_shapes(cfg)
    status = EXIT_OK if report.complete else EXIT_TRUNCATED
    msg = None if report.complete else "budget exhausted; report is partial"
    return RunRecord(argv, cfg.to_dict(), report, status, msg)


def _cmd_oracle(args, argv) -> RunRecord:
    if args.limit < 2:
        raise _InputError("limit must be >= 2")
    res = enumerate_dp(args.limit, odd_only=args.odd, omega_equals=args.omega)
    if args.csv is not None:
        args.csv.write_text(res.to_csv(), encoding="utf-8")
    config = {"limit": args.limit, "odd_only": args.odd, "omega_equals": args.omega}
    return RunRecord(argv, config, res, EXIT_OK)


def _cmd_facts(args, argv) -> RunRecord:
    path = args.fixture if args.fixture is not None else shipped_corpus()
    try:
        summary = verify_fixture_file(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise _InputError(f"cannot read fixture: {exc}") from None
    for err in summary.errors:
        print(err, file=sys.stderr)
    if summary.parse_errors:
        status = EXIT_INPUT
    elif summary.refuted:
        status = EXIT_REFUTED
    else:
        status = EXIT_OK
    name = "shipped corpus" if args.fixture is None else str(args.fixture)
    return RunRecord(argv, {"fixture": name}, summary, status)


_COMMANDS = {"verify": _cmd_verify, "search": _cmd_search, "oracle": _cmd_oracle, "facts": _cmd_facts}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.WARNING - 10 * args.verbose, stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s")
        record = _COMMANDS[args.command](args, argv)
    except _InputError as exc:
        print(f"defiperf: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    record.timestamp = default_timestamp()
    text = dumps(record)
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if record.message:
        print(record.message, file=sys.stderr)
    return record.exit_status


if __name__ == "__main__":
    sys.exit(main())
