"""Run the four verification phases on a Problem and report the outcome.

Phases: field goals become natural-number goals, range analysis discharges
natural inequalities, the rest become bitvector goals, and those are
bit-blasted to SAT. An UNSAT answer means the goals are valid. A SAT model is
lifted back to the original variables and replayed with the reference
semantics; only a replay that falsifies the problem yields ``invalid``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .bitblast import blast_context, to_dimacs
from .context import Deadline, ProofContext, RuleTrace
from .errors import BudgetExceeded, PipelineTimeout, Unsupported
from .ff2nat import to_nat_strategy
from .nat2bv import context_width, to_bv_strategy
from .oracle import DEFAULT_BUDGET, check_validity, holds
from .problem import Problem
from .range_analysis import RangeAnalyzer
from .terms import Term, postorder, pretty

STAGES = ("to_nat", "range_analysis", "to_bv", "bitblast")


@dataclass
class Options:
    case_splits: bool = True
    strict_range: bool = False  # an undischarged natural inequality ends the run as unknown
    timeout: float | None = 300.0
    oracle_check: bool = False  # audit the verdict by exhaustive enumeration
    oracle_budget: int = DEFAULT_BUDGET
    external_sat: str | None = None
    keep_cnf: bool = False
    record_queries: bool = False  # keep every range-analysis query answered True


@dataclass
class Verdict:
    status: str  # valid, invalid or unknown
    counterexample: dict | None = None
    trace: RuleTrace = field(default_factory=RuleTrace)
    timing: dict = field(default_factory=dict)
    undischarged: list = field(default_factory=list)
    reason: str = ""
    stats: dict = field(default_factory=dict)
    cnf: tuple | None = None
    range_proved: list = field(default_factory=list)  # (goal, hyps) pairs, with record_queries


def _is_nat_ineq(f: Term) -> bool:
    return f.op in ("le", "ge") and f.args[0].sort.is_nat


def check_supported(problem: Problem) -> None:
    """Reject explicit conversions ``to_bv(N, t)`` of field-derived values with ``2^N > p``."""
    for f in list(problem.hyps) + list(problem.goals):
        for u in postorder(f):
            if u.op != "to_bv":
                continue
            for w in postorder(u.args[0]):
                if w.op == "to_nat" and (1 << u.val) > w.args[0].sort.param:
                    raise Unsupported(
                        f"to_bv width {u.val} exceeds the field modulus {w.args[0].sort.param}")


def _replay(problem: Problem, env: dict) -> dict | None:
    """Complete ``env`` with zeros and return it if it falsifies the problem."""
    full = {name: env.get(name, 0) for name in problem.decls}
    for name, v in env.items():
        full.setdefault(name, v)
    try:
        if all(holds(h, full) for h in problem.hyps) and not all(holds(g, full) for g in problem.goals):
            return {name: full[name] for name in problem.decls}
    except (KeyError, ZeroDivisionError):
        return None
    return None


def run_pipeline(problem: Problem, options: Options | None = None) -> Verdict:
    opts = options or Options()
    trace = RuleTrace()
    timing = {s: 0.0 for s in STAGES}
    verdict = Verdict("unknown", trace=trace, timing=timing)
    deadline = Deadline(opts.timeout)
    analyzer = RangeAnalyzer(case_splits=opts.case_splits, trace=trace, deadline=deadline,
                             record=opts.record_queries)
    verdict.range_proved = analyzer.proved if opts.record_queries else []

    def finish(v: Verdict) -> Verdict:
        if opts.oracle_check:
            _audit(problem, v, opts)
        return v

    stage = "to_nat"
    try:
        check_supported(problem)
        t0 = time.perf_counter()
        ctx = to_nat_strategy(ProofContext(problem.goals, problem.hyps),
                              analyzer=analyzer, trace=trace, deadline=deadline)
        timing["to_nat"] = time.perf_counter() - t0

        stage = "range_analysis"
        t0 = time.perf_counter()
        remaining, failed = [], []
        for g in ctx.goals:
            deadline.check(stage)
            if _is_nat_ineq(g):
                if analyzer.prove(g, ctx.hyps):
                    continue
                failed.append(g)
            remaining.append(g)
        timing["range_analysis"] = time.perf_counter() - t0
        verdict.undischarged = failed
        if failed and opts.strict_range:
            verdict.reason = "natural inequalities remain after range analysis"
            return finish(verdict)
        if not remaining:
            verdict.status = "valid"
            return finish(verdict)

        stage = "to_bv"
        t0 = time.perf_counter()
        ctx = ProofContext(remaining, ctx.hyps)
        bv = to_bv_strategy(ctx, analyzer=analyzer, trace=trace, deadline=deadline)
        timing["to_bv"] = time.perf_counter() - t0
        verdict.stats["width"] = context_width(ctx)

        stage = "bitblast"
        t0 = time.perf_counter()
        res = blast_context(bv, deadline=deadline, external=opts.external_sat, keep_cnf=opts.keep_cnf)
        timing["bitblast"] = time.perf_counter() - t0
        verdict.stats.update(sat_vars=res.nvars, sat_clauses=res.nclauses)
        verdict.cnf = res.cnf
        if res.status == "unsat":
            verdict.status = "valid"
            verdict.undischarged = []
        elif res.status == "sat":
            cex = _replay(problem, res.env)
            if cex is not None:
                verdict.status = "invalid"
                verdict.counterexample = cex
                verdict.undischarged = []
            else:
                verdict.reason = "SAT countermodel does not falsify the original problem"
        else:
            verdict.reason = "SAT solver gave no answer"
    except PipelineTimeout as e:
        timing.setdefault(e.stage, 0.0)
        verdict.reason = f"timeout in stage {e.stage}"
    except Unsupported as e:
        verdict.reason = f"unsupported: {e}"
    verdict.stats.setdefault("stage_reached", stage)
    return finish(verdict)


def _audit(problem: Problem, v: Verdict, opts: Options) -> None:
    """Compare the verdict with exhaustive enumeration; record the result in ``stats``."""
    try:
        res = check_validity(problem, budget=opts.oracle_budget)
    except (BudgetExceeded, Unsupported) as e:
        v.stats["oracle"] = f"skipped ({e})"
        return
    v.stats["oracle"] = "valid" if res.valid else "invalid"
    if res.valid and v.status == "invalid" or not res.valid and v.status == "valid":
        v.stats["oracle_disagrees"] = True
        if res.witness is not None:
            v.stats["oracle_witness"] = res.witness


# --------------------------------------------------------------- reports

def emit_report(v: Verdict, fmt: str = "human") -> str:
    counts = v.trace.counts()
    if fmt == "lines":
        out = [f"status={v.status}"]
        for s in STAGES:
            out.append(f"time.{s}={v.timing.get(s, 0.0):.6f}")
        for rule in sorted(counts):
            out.append(f"rules.{rule}={counts[rule]}")
        if v.counterexample is not None:
            for name in sorted(v.counterexample):
                out.append(f"cex.{name}={v.counterexample[name]}")
        for f in v.undischarged:
            out.append(f"undischarged={pretty(f)}")
        if v.reason:
            out.append(f"reason={v.reason}")
        for k in sorted(v.stats):
            out.append(f"stats.{k}={v.stats[k]}")
        return "\n".join(out) + "\n"
    if fmt != "human":
        raise ValueError(f"unknown report format {fmt!r}")
    out = [f"status: {v.status}"]
    if v.reason:
        out.append(f"reason: {v.reason}")
    if v.counterexample is not None:
        out.append("counterexample:")
        out += [f"  {name} = {val}" for name, val in v.counterexample.items()]
    if v.undischarged:
        out.append("undischarged inequalities:")
        out += [f"  {pretty(f)}" for f in v.undischarged]
    out.append("timing (s):")
    width = max(len(s) for s in STAGES)
    out += [f"  {s:<{width}}  {v.timing.get(s, 0.0):.4f}" for s in STAGES]
    if counts:
        out.append(f"rule applications ({len(v.trace)} total):")
        out += [f"  {rule}: {n}" for rule, n in sorted(counts.items())]
    for k in sorted(v.stats):
        out.append(f"{k}: {v.stats[k]}")
    return "\n".join(out) + "\n"


def write_dimacs(v: Verdict, path) -> bool:
    if v.cnf is None:
        return False
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_dimacs(*v.cnf))
    return True
