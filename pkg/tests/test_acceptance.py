"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line to the terminal (outside pytest's capture) before asserting.
"""
import itertools
import time

import pytest

from fieldbv import Options, ProofContext, RangeAnalyzer, RuleTrace, run_pipeline
from fieldbv.benchgen import RandomSpec, gen_jolt_or, gen_random, least_prime_above, or_polynomial
from fieldbv.ff2nat import to_nat_strategy
from fieldbv.nat2bv import clc_bv_width, to_bv_strategy
from fieldbv.oracle import check_validity, entails, holds
from fieldbv.oracle.semantics import eval_term
from fieldbv.range_analysis import rng_analyze
from fieldbv.terms import FF, add, ge, le, mul, nat, pvar, sub, to_nat, var

FUZZ_CONTEXTS = 500


@pytest.fixture
def report(capsys):
    def emit(n: int, what: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {what}" + (f" ({detail})" if detail else ""))
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def jolt_runs():
    """run_pipeline on the OR family for B = 1..8, recording every proved range query."""
    runs = {}
    for B in range(1, 9):
        p = least_prime_above(1 << B)
        prob = gen_jolt_or(B, p)
        t0 = time.perf_counter()
        v = run_pipeline(prob, Options(record_queries=True))
        runs[B] = (p, prob, v, time.perf_counter() - t0)
    return runs


@pytest.fixture(scope="module")
def fuzz_corpus():
    """Translate 500 seeded random contexts, keeping traces, proved queries and oracle verdicts."""
    t0 = time.perf_counter()
    rows = []
    for seed in range(FUZZ_CONTEXTS):
        spec = RandomSpec(seed=seed, p=(5, 7, 13)[seed % 3], var_count=1 + seed % 3,
                          depth=seed % 5, goals=1 + seed % 2)
        prob = gen_random(spec)
        ctx = ProofContext(prob.goals, prob.hyps)
        trace = RuleTrace()
        analyzer = RangeAnalyzer(case_splits=seed % 4 != 3, trace=trace, record=True)
        n = to_nat_strategy(ctx, analyzer=analyzer, trace=trace)
        b = to_bv_strategy(n, analyzer=analyzer, trace=trace)
        verdicts = tuple(check_validity(c).valid for c in (ctx, n, b))
        # the range stage of the full pipeline issues further queries
        v = run_pipeline(prob, Options(record_queries=True, case_splits=seed % 4 != 3))
        rows.append(dict(seed=seed, verdicts=verdicts, trace=trace, pipeline=v,
                         proved=analyzer.proved + v.range_proved))
    return rows, time.perf_counter() - t0


def test_criterion_1_or_table(report):
    t0 = time.perf_counter()
    F = FF(7)
    x, y = var("x0", F), var("y0", F)
    poly = or_polynomial([x], [y])
    expected = {(0, 0): (0, 0, 0), (0, 1): (1, 0, 1), (1, 0): (1, 0, 1), (1, 1): (2, 1, 1)}
    got = {}
    for a, b in itertools.product((0, 1), repeat=2):
        env = {"x0": a, "y0": b}
        got[a, b] = (eval_term(add(x, y), env), eval_term(mul(x, y), env), eval_term(poly, env))
    elapsed = time.perf_counter() - t0
    report(1, "OR polynomial at B=1 matches the four table rows", got == expected and elapsed < 1.0,
           f"{elapsed:.3f}s, rows={got}")


def test_criterion_2_jolt_or_valid(report, jolt_runs):
    bad = [(B, v.status, round(dt, 2)) for B, (_, _, v, dt) in jolt_runs.items()
           if v.status != "valid" or dt >= 60]
    times = ", ".join(f"B={B}:{dt:.2f}s" for B, (_, _, _, dt) in jolt_runs.items())
    report(2, "OR family valid for B=1..8, each under 60 s", not bad, f"{times}; failures={bad}")


def test_criterion_3_equivalidity(report, fuzz_corpus):
    rows, elapsed = fuzz_corpus
    diffs = [r["seed"] for r in rows if len(set(r["verdicts"])) != 1]
    valid = sum(r["verdicts"][0] for r in rows)
    report(3, f"{len(rows)} random contexts equivalid before and after each translation",
           not diffs and len(rows) == FUZZ_CONTEXTS and elapsed < 300,
           f"{valid} valid, {len(rows) - valid} invalid, {elapsed:.1f}s, discrepancies={diffs[:10]}")


def test_criterion_4_range_soundness(report, fuzz_corpus, jolt_runs):
    rows, _ = fuzz_corpus
    queries = {}
    for r in rows:
        for goal, hyps in r["proved"]:
            queries[goal, hyps] = None
    fuzz_n = len(queries)
    for _, _, v, _ in jolt_runs.values():
        for goal, hyps in v.range_proved:
            queries[goal, hyps] = None
    unsound = [(g, h) for g, h in queries if not entails(h, g)]
    report(4, "every proved range query is confirmed by enumeration", not unsound and fuzz_n > 0,
           f"{len(queries)} distinct queries ({fuzz_n} from fuzzing), unsound={len(unsound)}")


def test_criterion_5_measures_decrease(report, fuzz_corpus):
    rows, _ = fuzz_corpus
    entries = sum(len(r["trace"]) + len(r["pipeline"].trace) for r in rows)
    violations = sum(len(r["trace"].measure_violations()) + len(r["pipeline"].trace.measure_violations())
                     for r in rows)
    report(5, "measure strictly decreases on every logged rule application",
           entries >= 10_000 and violations == 0, f"{entries} entries, {violations} violations")


def test_criterion_6_case_split_ablation(report):
    prob = gen_jolt_or(1, 7)
    plain = run_pipeline(prob, Options(case_splits=False))
    default = run_pipeline(prob)
    pc, dc = plain.trace.counts(), default.trace.counts()
    ok = (plain.status == "valid" and pc["distNatSubOvrflw"] > 0
          and dc["distNatSub"] > 0 and dc["distNatSubOvrflw"] == 0)
    report(6, "without case splits the overflow rule replaces distNatSub", ok,
           f"no-splits: {plain.status}, distNatSubOvrflw={pc['distNatSubOvrflw']}; "
           f"default: distNatSub={dc['distNatSub']}, distNatSubOvrflw={dc['distNatSubOvrflw']}")


def test_criterion_7_cube_width(report):
    x = to_nat(var("x", FF(7)))
    w = clc_bv_width(mul(x, x, x))
    report(7, "width of toNat(x)^3 over FF(7) is 9", w == 9, f"got {w}")


def test_criterion_8_derivation_snapshots(report):
    F = FF(7)
    X, Y = to_nat(var("x0", F)), to_nat(var("y0", F))
    P1 = sub(nat(7), nat(1))
    res = rng_analyze(le(add(X, Y), P1), [le(X, nat(1)), le(Y, nat(1))], snapshots=True)
    w1, w2, w3 = pvar(1), pvar(2), pvar(3)
    G1 = (le(add(X, Y), w1), ge(P1, w1))
    G2 = (le(X, w2), le(Y, w3), le(add(w2, w3), w1), ge(P1, w1))
    G3 = (le(add(nat(1), nat(1)), w1), ge(P1, w1))
    G4 = (le(add(nat(1), nat(1)), P1),)
    snaps = res.snapshots
    positions = [snaps.index(G) if G in snaps else -1 for G in (G1, G2, G3, G4)]
    ok = res.proved and -1 not in positions and positions == sorted(positions)
    report(8, "range derivation passes through the four worked goal sets in order", ok,
           f"positions={positions}, rules={res.rules}")


def test_criterion_9_mutation_detected(report):
    prob = gen_jolt_or(1, 7, mutate=True)
    v = run_pipeline(prob)
    cex = v.counterexample
    confirmed = (cex is not None and all(holds(h, cex) for h in prob.hyps)
                 and not all(holds(g, cex) for g in prob.goals))
    oracle = check_validity(prob)
    report(9, "sign-mutated OR polynomial is rejected with a real counterexample",
           v.status == "invalid" and confirmed and not oracle.valid,
           f"status={v.status}, cex={cex}, oracle valid={oracle.valid}")
