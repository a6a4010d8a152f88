"""Command-line interface: ml, certify, verify and suite subcommands.

Exit codes: 0 success, 1 verification or property failure, 2 usage error,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import re
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .certificates import (
    Certificate,
    NoPrimeFound,
    best_certificate,
    best_prime_certificate,
    certify_good_prime,
    certify_prime_discrete,
    certify_reduced,
    certify_riesz_dissociated,
    certify_riesz_general,
    certify_trivial,
    verify_certificate,
)
from .config import ConfigError, RunConfig, load_config
from .core import BudgetExceeded, InvalidSpeedSet, RunnerLabError, SpeedSet, validate_speed_set
from .exact_ml import ml_exact, ml_grid_oracle
from .serialize import SCHEMA, DocumentError, certificate_from_dict, certificate_to_dict, dumps, loads, rat
from .suites import SUITES

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
ORACLE_GRID = 10**4


class InputError(RunnerLabError, ValueError):
    pass


# -- input parsing ----------------------------------------------------------------


def parse_speed_line(text: str, source: str = "<args>", line: int = 1) -> SpeedSet:
    """Parse whitespace- or comma-separated integers, reporting line:column on errors."""
    values = []
    for match in re.finditer(r"[^\s,]+", text):
        token, col = match.group(), match.start() + 1
        if not re.fullmatch(r"[+-]?\d+", token):
            raise InputError(f"{source}:{line}:{col}: {token!r} is not an integer")
        values.append((int(token), col))
    if not values:
        raise InputError(f"{source}:{line}:1: no speeds given")
    seen = {}
    for v, col in values:
        if v <= 0:
            raise InputError(f"{source}:{line}:{col}: NonPositiveSpeed: speed {v} is not positive")
        if v in seen:
            raise InputError(f"{source}:{line}:{col}: DuplicateSpeed: speed {v} already given at column {seen[v]}")
        seen[v] = col
    return validate_speed_set(v for v, _ in values)


def read_speed_file(path: str) -> list[SpeedSet]:
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith(("{", "[")):
        return _read_structured(loads(text), path)
    out = []
    for i, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if body.strip():
            out.append(parse_speed_line(body, path, i))
    return out


def _read_structured(doc, path: str) -> list[SpeedSet]:
    entries = doc.get("sets") if isinstance(doc, dict) else doc
    if not isinstance(entries, list):
        raise InputError(f"{path}: expected a list of speed sets or an object with 'sets'")
    out = []
    for i, entry in enumerate(entries):
        speeds = entry.get("speeds") if isinstance(entry, dict) else entry
        try:
            out.append(validate_speed_set(speeds))
        except (InvalidSpeedSet, TypeError) as exc:
            raise InputError(f"{path}: entry {i}: {type(exc).__name__}: {exc}") from exc
    return out


def parse_range(tokens: list[str]) -> list[SpeedSet]:
    """``n=4 max=10``: every n-subset of {1, ..., max}."""
    opts = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep or key not in ("n", "max") or not value.isdigit():
            raise InputError(f"--range expects n=<int> max=<int>, got {tok!r}")
        opts[key] = int(value)
    if set(opts) != {"n", "max"} or opts["n"] < 1 or opts["max"] < opts["n"]:
        raise InputError("--range needs n >= 1 and max >= n")
    return [SpeedSet(c) for c in itertools.combinations(range(1, opts["max"] + 1), opts["n"])]


def gather_sets(args) -> list[SpeedSet]:
    sets = []
    if args.speeds:
        sets.append(parse_speed_line(" ".join(args.speeds)))
    if getattr(args, "file", None):
        sets.extend(read_speed_file(args.file))
    if getattr(args, "range", None):
        sets.extend(parse_range(args.range))
    if not sets:
        raise InputError("no speed set given (inline, --file or --range)")
    return sets


# -- ml -----------------------------------------------------------------------


def _ml_entry(job):
    V, budget, oracle = job
    res = ml_exact(V, budget=budget)
    entry = {"speeds": list(V), "value": res.value, "witness_time": res.witness_time}
    if oracle:
        lo = ml_grid_oracle(V, ORACLE_GRID)
        entry["oracle"] = {
            "grid": ORACLE_GRID,
            "lower": lo,
            "consistent": lo <= res.value <= lo + Fraction(V.max, ORACLE_GRID),
        }
    return entry


def _run_batch(fn, jobs, threads):
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    return [fn(j) for j in jobs]


def cmd_ml(args, config: RunConfig, out) -> int:
    sets = gather_sets(args)
    jobs = [(V, args.budget or config.candidate_budget, not args.no_oracle) for V in sets]
    results = _run_batch(_ml_entry, jobs, args.threads)
    if args.json:
        doc = {
            "schema": SCHEMA,
            "kind": "ml_report",
            "version": __version__,
            "results": [
                {
                    **{k: v for k, v in r.items() if k not in ("value", "witness_time", "oracle")},
                    "value": rat(r["value"]),
                    "witness_time": rat(r["witness_time"]),
                    **({"oracle": {**r["oracle"], "lower": rat(r["oracle"]["lower"])}} if "oracle" in r else {}),
                }
                for r in results
            ],
        }
        out.write(dumps(doc))
    elif args.csv:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["speeds", "ml", "witness_time", "oracle_consistent"])
        for r in results:
            w.writerow([" ".join(map(str, r["speeds"])), r["value"], r["witness_time"], r.get("oracle", {}).get("consistent", "")])
    else:
        rows = [("speeds", "ML", "witness t", "oracle")]
        for r in results:
            check = "" if "oracle" not in r else ("ok" if r["oracle"]["consistent"] else "MISMATCH")
            rows.append(("{" + ", ".join(map(str, r["speeds"])) + "}", str(r["value"]), str(r["witness_time"]), check))
        out.write(_table(rows))
    bad = any("oracle" in r and not r["oracle"]["consistent"] for r in results)
    return EXIT_FAIL if bad else EXIT_OK


def _table(rows) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# -- certify ------------------------------------------------------------------


def _certify_one(V: SpeedSet, args, config: RunConfig) -> Certificate:
    method = args.method
    if method == "auto":
        return best_certificate(V, config.effort, config)
    if method == "trivial":
        return certify_trivial(V)
    if method == "prime":
        if args.p is not None:
            return certify_prime_discrete(V, args.p)
        if args.c is not None:
            return certify_good_prime(V, Fraction(args.c), args.limit)
        return best_prime_certificate(V, args.limit)
    if method == "riesz":
        weights = [Fraction(w) for w in args.weight] if args.weight else None
        return certify_riesz_general(
            V, weights, config.constant("C_prime"), bits=config.precision_bits, cap=config.precision_cap
        )
    if method == "riesz-dissoc":
        return certify_riesz_dissociated(V, config.precision_bits)
    if method == "reduce-then-prime":
        return certify_reduced(V, stop_radius=args.stop_radius, prime_limit=args.limit)
    raise InputError(f"unknown method {method}")


def cmd_certify(args, config: RunConfig, out) -> int:
    sets = gather_sets(args)
    docs, status = [], EXIT_OK
    for V in sets:
        cert = _certify_one(V, args, config)
        docs.append(certificate_to_dict(cert))
        if args.method != "trivial" and not cert.bound > Fraction(1, 2 * V.n):
            status = EXIT_FAIL
    text = dumps(docs[0] if len(docs) == 1 else {"schema": SCHEMA, "kind": "certificate_batch", "certificates": docs})
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    for d in docs:
        print(f"{d['method']}: {d['speeds']} >= {d['bound']['num']}/{d['bound']['den']}", file=sys.stderr)
    return status


# -- verify -------------------------------------------------------------------


def cmd_verify(args, config: RunConfig, out) -> int:
    text = sys.stdin.read() if args.document == "-" else open(args.document).read()
    doc = loads(text)
    docs = doc["certificates"] if isinstance(doc, dict) and doc.get("kind") == "certificate_batch" else [doc]
    status = EXIT_OK
    for d in docs:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cert = certificate_from_dict(d)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        verdict = verify_certificate(cert.speeds, cert, config.precision_bits)
        if verdict:
            out.write(f"pass  {cert.label} {cert.speeds} >= {cert.bound}\n")
        else:
            out.write(f"fail  {cert.label} {cert.speeds}: {verdict.reason}\n")
            status = EXIT_FAIL
    return status


# -- suite --------------------------------------------------------------------


def cmd_suite(args, config: RunConfig, out) -> int:
    if args.name == "soundness":
        results = SUITES["soundness"](args.n_max, args.v_max, args.effort or "quick")
    elif args.name == "invariants":
        results = SUITES["invariants"](args.seed if args.seed is not None else config.rng_seed)
    else:
        results = SUITES["paper-checks"]()
    results = list(results)
    if args.json:
        out.write(dumps({"schema": SCHEMA, "kind": "suite", "suite": args.name, "results": [r.to_dict() for r in results]}))
    else:
        for r in results:
            out.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name}" + (f"  ({r.detail})" if r.detail else "") + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    # shared options are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON config file (default: $RUNNERLAB_CONFIG)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker processes for batches")
    common.add_argument("--precision", type=int, default=argparse.SUPPRESS, help="interval precision in bits")
    common.add_argument("--effort", choices=("quick", "standard", "exhaustive"), default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="runnerlab", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"runnerlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[common], **k)

    def add_input(p):
        p.add_argument("speeds", nargs="*", help="speeds, e.g. 1 2 3")
        p.add_argument("--file", help="one set per line, or a JSON list of sets")
        p.add_argument("--range", nargs=2, metavar=("n=N", "max=M"), help="all N-subsets of [M]")

    p = sub.add_parser("ml", help="exact maximum loneliness")
    add_input(p)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    p.add_argument("--budget", type=int, help="candidate-time budget")
    p.add_argument("--no-oracle", action="store_true", help="skip the grid cross-check")

    p = sub.add_parser("certify", help="emit a lower-bound certificate")
    add_input(p)
    p.add_argument(
        "--method",
        default="auto",
        choices=("auto", "trivial", "prime", "riesz", "riesz-dissoc", "reduce-then-prime"),
    )
    p.add_argument("--p", type=int, help="prime for --method prime")
    p.add_argument("--c", help="residue-window constant; picks the smallest good prime")
    p.add_argument("--limit", type=int, default=1000, help="prime search limit")
    p.add_argument("--weight", action="append", help="Riesz weight to try (repeatable)")
    p.add_argument("--stop-radius", type=int, default=64)
    p.add_argument("--out", help="write the document here instead of stdout")

    p = sub.add_parser("verify", help="re-verify a certificate document")
    p.add_argument("document", help="path, or - for stdin")

    p = sub.add_parser("suite", help="run a named check suite")
    p.add_argument("name", choices=sorted(SUITES))
    p.add_argument("--seed", type=int)
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--v-max", type=int, default=25)
    p.add_argument("--json", action="store_true")
    return parser


COMMANDS = {"ml": cmd_ml, "certify": cmd_certify, "verify": cmd_verify, "suite": cmd_suite}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name, default in (("config", None), ("threads", os.cpu_count() or 1), ("precision", None), ("effort", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        config = load_config(args.config)
        if args.precision:
            config = config.with_(precision_bits=args.precision, precision_cap=max(args.precision, config.precision_cap))
        if args.effort:
            config = config.with_(effort=args.effort)
        args.threads = max(1, args.threads)
        return COMMANDS[args.command](args, config, out)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        print("hint: raise --budget, or use `runnerlab certify` for a bound instead", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, DocumentError, ConfigError, InvalidSpeedSet, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoPrimeFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except RunnerLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
