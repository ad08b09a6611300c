"""Command line: verify problem files and generate benchmarks.

Exit codes of ``verify``: 0 valid, 1 invalid, 2 unknown, 3 input error,
4 internal error. With several files the largest code wins.
"""
from __future__ import annotations

import argparse
import logging
import os
import resource
import sys
from concurrent.futures import ProcessPoolExecutor

from .benchgen import RandomSpec, gen_jolt_or, gen_random, least_prime_above
from .errors import FieldBVError, NonPrimeField, ParseError, SortMismatch
from .oracle import BudgetExceeded, DEFAULT_BUDGET, check_validity
from .pipeline import Options, emit_report, run_pipeline, write_dimacs
from .sexpr import load_problem, print_problem

log = logging.getLogger("fieldbv")

EXIT = {"valid": 0, "invalid": 1, "unknown": 2}
EXIT_INPUT = 3
EXIT_INTERNAL = 4

# option names accepted by (set-option ...) in problem files
_FILE_OPTIONS = {"case-splits": "case_splits", "strict-range": "strict_range", "timeout": "timeout"}


def _limit_memory(gb: float | None) -> None:
    if not gb:
        return
    limit = int(gb * (1 << 30))
    try:
        soft, hard = resource.getrlimit(resource.RLIMIT_AS)
        if hard != resource.RLIM_INFINITY:
            limit = min(limit, hard)
        resource.setrlimit(resource.RLIMIT_AS, (limit, hard))
    except (ValueError, OSError) as e:
        log.warning("could not set the memory limit: %s", e)


def _options(problem, args) -> Options:
    opts = Options()
    for key, attr in _FILE_OPTIONS.items():
        if key in problem.options:
            setattr(opts, attr, problem.options[key])
    if args.timeout is not None:
        opts.timeout = args.timeout if args.timeout > 0 else None
    if args.no_case_splits:
        opts.case_splits = False
    if args.strict_range:
        opts.strict_range = True
    opts.oracle_check = args.oracle_check
    opts.external_sat = args.external_sat
    opts.keep_cnf = bool(args.dimacs)
    return opts


def _verify_one(path: str, args) -> tuple[int, str]:
    try:
        problem = load_problem(path)
    except (ParseError, SortMismatch, NonPrimeField) as e:
        return EXIT_INPUT, f"{path}: error: {e}\n"
    except OSError as e:
        return EXIT_INPUT, f"{path}: error: {e.strerror}\n"
    try:
        verdict = run_pipeline(problem, _options(problem, args))
    except FieldBVError as e:
        return EXIT_INTERNAL, f"{path}: error: {e}\n"
    if args.trace:
        verdict.trace.write_jsonl(args.trace)
    if args.dimacs and not write_dimacs(verdict, args.dimacs):
        log.warning("no CNF was produced for %s", path)
    code = EXIT[verdict.status]
    if verdict.stats.get("oracle_disagrees"):
        log.error("oracle disagrees with verdict %s on %s", verdict.status, path)
        code = EXIT_INTERNAL
    return code, emit_report(verdict, args.format)


def _batch_worker(job):
    path, args = job
    _limit_memory(args.memory_gb)
    code, text = _verify_one(path, args)
    return path, code, text


def cmd_verify(args) -> int:
    if len(args.files) == 1:
        _limit_memory(args.memory_gb)
        code, text = _verify_one(args.files[0], args)
        sys.stdout.write(text)
        return code
    if args.trace or args.dimacs:
        print("error: --trace and --dimacs take a single input file", file=sys.stderr)
        return EXIT_INPUT
    worst = 0
    jobs = [(p, args) for p in args.files]
    with ProcessPoolExecutor(max_workers=args.jobs or os.cpu_count() or 1) as pool:
        for path, code, text in pool.map(_batch_worker, jobs):
            worst = max(worst, code)
            if args.format == "lines":
                sys.stdout.write(f"file={path}\n{text}")
            else:
                sys.stdout.write(f"== {path}\n{text}")
    return worst


def cmd_oracle(args) -> int:
    try:
        problem = load_problem(args.file)
    except (ParseError, SortMismatch, NonPrimeField, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        res = check_validity(problem, budget=args.budget)
    except (BudgetExceeded, FieldBVError) as e:
        print(f"status=unknown\nreason={e}")
        return EXIT["unknown"]
    print(f"status={'valid' if res.valid else 'invalid'}")
    print(f"checked={res.checked}")
    if res.witness is not None:
        for k, v in sorted(res.witness.items()):
            print(f"cex.{k}={v}")
    return EXIT["valid" if res.valid else "invalid"]


def cmd_gen(args) -> int:
    try:
        if args.family == "jolt-or":
            p = args.field or least_prime_above(1 << args.bits)
            problem = gen_jolt_or(args.bits, p, mutate=args.mutate)
        else:
            problem = gen_random(RandomSpec(seed=args.seed, p=args.field or 7, depth=args.depth,
                                            var_count=args.vars, goals=args.goals))
    except (FieldBVError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    text = print_problem(problem)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fieldbv", description="Finite-field to bitvector verifier.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="decide one or more problem files")
    v.add_argument("files", nargs="+")
    v.add_argument("--timeout", type=float, default=None, help="seconds per problem (default 300, 0 = none)")
    v.add_argument("--memory-gb", type=float, default=8.0, help="address-space limit (0 = none)")
    v.add_argument("--trace", metavar="OUT.jsonl", help="write one JSON line per rule application")
    v.add_argument("--oracle-check", action="store_true", help="audit the verdict by enumeration")
    v.add_argument("--no-case-splits", action="store_true")
    v.add_argument("--strict-range", action="store_true",
                   help="report unknown when range analysis leaves an inequality")
    v.add_argument("--format", choices=("human", "lines"), default="human")
    v.add_argument("--dimacs", metavar="OUT.cnf", help="write the final CNF")
    v.add_argument("--external-sat", metavar="CMD", help="SAT solver command; the CNF path is appended")
    v.add_argument("-j", "--jobs", type=int, default=None, help="worker processes for several files")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="decide a small problem by exhaustive enumeration")
    o.add_argument("file")
    o.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen", help="write a benchmark problem")
    g.add_argument("family", choices=("jolt-or", "random"))
    g.add_argument("--bits", type=int, default=8)
    g.add_argument("--field", type=int, default=None)
    g.add_argument("--mutate", action="store_true", help="jolt-or: use x+y+xy instead of x+y-xy")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--depth", type=int, default=3)
    g.add_argument("--vars", type=int, default=3)
    g.add_argument("--goals", type=int, default=1)
    g.add_argument("-o", "--output", default=None)
    g.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
