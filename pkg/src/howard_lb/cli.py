"""Command-line front end: ``howard-lb {gen,solve,verify,fuzz,bench,export-dot}``.

Exit codes: 0 success, 1 verification mismatch or solver failure,
2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

from .dmdp import Dmdp, DmdpError, PolicyError, export_dot, parse_dmdp, serialize_dmdp, size_bits
from .evaluation import format_rational
from .howard import TIE_RULES, IterationLimitError, initial_policy, run_howard
from .lowerbound import (
    SIGMA_VARIANTS,
    check_weight_inequalities,
    expected_edge_count,
    expected_iteration_count,
    gen_pn,
    stated_edge_count,
    verify_lemma,
    verify_theorem,
)
from .oracles import RandomSpec, optimal_values, random_dmdp

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2

INIT_ALIASES = {"lowest": "lowest-index", "greedy": "greedy-weight",
                "lowest-index": "lowest-index", "greedy-weight": "greedy-weight"}

# flags whose values may start with '-' (e.g. --weights -9..9)
_RANGE_FLAGS = ("--weights", "--degrees")


class UsageError(Exception):
    pass


def parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None
    if lo_i > hi_i:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo_i, hi_i


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _write(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load(path: str) -> Dmdp:
    try:
        return parse_dmdp(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except DmdpError as exc:
        raise UsageError(f"{path}: {exc}") from exc


# --- gen -------------------------------------------------------------------

def cmd_gen(args) -> int:
    _write(serialize_dmdp(gen_pn(args.n)), args.output)
    return EXIT_OK


# --- solve -----------------------------------------------------------------

def cmd_solve(args) -> int:
    d = _load(args.path)
    init = INIT_ALIASES[args.init]
    try:
        trace = run_howard(d, initial_policy(d, init), tie_rule=args.tie_rule)
    except IterationLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            trace.write_jsonl(fh)
    final = trace.final
    report = {
        "iterations": trace.iterations,
        "init": init,
        "policy": {d.names[v]: d.names[u] for v, u in enumerate(final.policy)},
        "val": {d.names[v]: format_rational(x) for v, x in enumerate(final.evaluation.val)},
        "pot": {d.names[v]: format_rational(x) for v, x in enumerate(final.evaluation.pot)},
    }
    _write(json.dumps(report, indent=2) + "\n", args.output)
    return EXIT_OK


# --- verify ----------------------------------------------------------------

def verify_one(n: int, init: str, variant: str, tie_rule: str) -> dict:
    d = gen_pn(n)
    structure = {
        "vertices": d.n,
        "edges": d.m,
        "edges_by_definition": expected_edge_count(n),
        "edges_stated_in_theorem": stated_edge_count(n),
        "max_weight": d.max_abs_weight,
        "size_bits": size_bits(d),
    }
    structure["ok"] = (
        d.n == 2 * n and d.m == expected_edge_count(n) and d.max_abs_weight == (n + 1) ** 2
    )
    if structure["edges"] != structure["edges_stated_in_theorem"]:
        structure["note"] = "edge count differs from the theorem's (3n^2+n)/2"
    ineq = check_weight_inequalities(n)
    lemma = verify_lemma(n, variant, tie_rule=tie_rule)
    theorem = None
    if not (init == "greedy-weight" and n < 2):
        theorem = verify_theorem(n, init, variant, tie_rule=tie_rule)
    ok = structure["ok"] and ineq.ok and lemma.ok and (theorem is None or theorem.matched)
    return {
        "n": n,
        "ok": ok,
        "structure": structure,
        "inequalities": ineq.to_json(),
        "lemma": lemma.to_json(),
        "theorem": theorem.to_json() if theorem else None,
    }


def cmd_verify(args) -> int:
    init = INIT_ALIASES[args.init]
    ns = list(range(1, args.n_max + 1))
    with _executor(args.jobs) as pool:
        reports = list(pool.map(verify_one, ns, [init] * len(ns),
                                [args.sigma_variant] * len(ns), [args.tie_rule] * len(ns)))
    for rep in reports:
        sys.stdout.write(json.dumps(rep) + "\n")
    return EXIT_OK if all(r["ok"] for r in reports) else EXIT_MISMATCH


# --- fuzz ------------------------------------------------------------------

def instance_seeds(seed: int, count: int) -> list[int]:
    rng = random.Random(seed)
    return [rng.getrandbits(64) for _ in range(count)]


def fuzz_one(spec: RandomSpec, tie_rule: str = "incumbent") -> dict:
    d = random_dmdp(spec)
    row = {"seed": spec.seed, "n": d.n, "m": d.m, "iterations": {}, "mismatch": [], "error": None}
    try:
        opt = optimal_values(d).val
        for init in ("lowest-index", "greedy-weight"):
            trace = run_howard(d, initial_policy(d, init), tie_rule=tie_rule)
            row["iterations"][init] = trace.iterations
            if trace.final.evaluation.val != opt:
                row["mismatch"].append(init)
    except (IterationLimitError, ArithmeticError) as exc:
        row["error"] = str(exc)
    return row


def cmd_fuzz(args) -> int:
    specs = [RandomSpec(args.n, args.degrees, args.weights, s)
             for s in instance_seeds(args.seed, args.instances)]
    with _executor(args.jobs) as pool:
        rows = list(pool.map(fuzz_one, specs, [args.tie_rule] * len(specs)))
    mismatches = [r for r in rows if r["mismatch"] or r["error"]]
    summary = {
        "instances": len(rows),
        "seed": args.seed,
        "n": args.n,
        "degrees": list(args.degrees),
        "weights": list(args.weights),
        "value_mismatches": len(mismatches),
        "failures": mismatches,
    }
    if args.check_conjecture:
        findings = [
            {"seed": r["seed"], "m": r["m"], "init": init, "iterations": it}
            for r in rows for init, it in r["iterations"].items() if it > r["m"]
        ]
        summary["conjecture"] = {
            "findings": findings,
            "max_iterations_over_m": max(
                (it / r["m"] for r in rows for it in r["iterations"].values()), default=None
            ),
            "per_instance": [
                {"seed": r["seed"], "m": r["m"], "iterations": r["iterations"]} for r in rows
            ],
        }
    _write(json.dumps(summary, indent=2) + "\n", args.output)
    return EXIT_MISMATCH if mismatches else EXIT_OK


# --- bench -----------------------------------------------------------------

@dataclass
class BenchRow:
    n: int
    vertices: int
    edges: int
    max_weight: int
    size_bits: int
    iterations: int
    expected: int
    wall_time_ms: float


def bench_row(n: int) -> BenchRow:
    d = gen_pn(n)
    start = time.perf_counter()
    trace = run_howard(d, initial_policy(d, "lowest-index"))
    elapsed = (time.perf_counter() - start) * 1000
    return BenchRow(n, d.n, d.m, d.max_abs_weight, size_bits(d), trace.iterations,
                    expected_iteration_count(n), round(elapsed, 3))


def cmd_bench(args) -> int:
    rows = [bench_row(n) for n in args.n]
    if args.format == "json":
        text = json.dumps([asdict(r) for r in rows], indent=2) + "\n"
    else:
        import io

        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(BenchRow.__dataclass_fields__), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow(asdict(r))
        text = buf.getvalue()
    _write(text, args.output)
    return EXIT_OK if all(r.iterations == r.expected for r in rows) else EXIT_MISMATCH


# --- export-dot ------------------------------------------------------------

def cmd_export_dot(args) -> int:
    if (args.path is None) == (args.n is None):
        raise UsageError("give exactly one of PATH or --n")
    d = gen_pn(args.n) if args.n is not None else _load(args.path)
    policy = None
    if args.policy:
        targets = args.policy.split(",")
        if len(targets) != d.n:
            raise UsageError(f"--policy needs {d.n} comma-separated successor names")
        try:
            policy = [d.index(name) for name in targets]
        except KeyError as exc:
            raise UsageError(str(exc)) from exc
    elif args.optimal:
        policy = run_howard(d, initial_policy(d, INIT_ALIASES[args.init])).final.policy
    try:
        _write(export_dot(d, policy), args.output)
    except PolicyError as exc:
        raise UsageError(str(exc)) from exc
    return EXIT_OK


# --- plumbing --------------------------------------------------------------

class _InlineExecutor:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False

    def map(self, fn, *iterables):
        return map(fn, *iterables)


def _executor(jobs: int):
    return ProcessPoolExecutor(jobs) if jobs > 1 else _InlineExecutor()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="howard-lb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common_init(p):
        p.add_argument("--init", choices=sorted(INIT_ALIASES), default="lowest")

    def tie_rule(p):
        p.add_argument("--tie-rule", choices=TIE_RULES, default="incumbent",
                       help="alternate Bellman tie rule (testing only)")

    p = sub.add_parser("gen", help="write the lower-bound instance P_n")
    p.add_argument("--n", type=positive_int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run Howard's policy iteration on a DMDP file")
    p.add_argument("path")
    common_init(p)
    tie_rule(p)
    p.add_argument("--trace", help="write the iteration trace as JSON Lines")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check the lower-bound sequence for n = 1..N")
    p.add_argument("--n-max", type=positive_int, required=True)
    common_init(p)
    tie_rule(p)
    p.add_argument("--sigma-variant", choices=SIGMA_VARIANTS, default="literal")
    p.add_argument("--jobs", type=positive_int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fuzz", help="differential test against the Karp oracle")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--n", type=positive_int, default=8)
    p.add_argument("--degrees", type=parse_range, default=(1, 3))
    p.add_argument("--weights", type=parse_range, default=(-9, 9))
    p.add_argument("--seed", type=u64, default=42)
    p.add_argument("--check-conjecture", action="store_true")
    tie_rule(p)
    p.add_argument("--jobs", type=positive_int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("bench", help="iteration counts and timings on P_n")
    p.add_argument("--n", type=positive_int, nargs="+", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export-dot", help="render a DMDP (and a policy) as Graphviz DOT")
    p.add_argument("path", nargs="?")
    p.add_argument("--n", type=positive_int)
    p.add_argument("--policy", help="comma-separated successor name per vertex")
    p.add_argument("--optimal", action="store_true", help="highlight Howard's final policy")
    common_init(p)
    p.add_argument("--format", choices=("dot",), default="dot")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot)
    return parser


def _join_range_values(argv: Sequence[str]) -> list[str]:
    out, it = [], iter(argv)
    for a in it:
        if a in _RANGE_FLAGS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_range_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
