import pytest
from hypothesis import given, settings, strategies as st

from fieldbv.benchgen import RandomSpec, gen_jolt_or, gen_random
from fieldbv.oracle import check_validity, holds
from fieldbv.pipeline import Options, STAGES, emit_report, run_pipeline
from fieldbv.problem import Problem
from fieldbv.sexpr import parse_problem
from fieldbv.terms import BV, FF, const, eq, le, nat, pretty, to_bv, to_nat, var

F7 = FF(7)


def test_jolt_b1_valid():
    v = run_pipeline(gen_jolt_or(1, 7))
    assert v.status == "valid" and v.counterexample is None
    assert set(v.timing) == set(STAGES)


def test_trivial_field_goal_valid():
    p = Problem(field=7, goals=[eq(const(0, F7), const(0, F7))])
    assert run_pipeline(p).status == "valid"


def test_invalid_with_counterexample():
    p = parse_problem("(set-field 7) (declare-ff x) (goal (= (to-nat x) 3))")
    v = run_pipeline(p)
    assert v.status == "invalid"
    assert v.counterexample == {"x": 0}


def test_invalid_verdicts_falsify_the_original():
    p = gen_jolt_or(2, 5, mutate=True)
    v = run_pipeline(p)
    assert v.status == "invalid"
    env = v.counterexample
    assert all(holds(h, env) for h in p.hyps)
    assert not all(holds(g, env) for g in p.goals)


def test_strict_range_reports_unknown_with_formula():
    p = gen_jolt_or(1, 7, mutate=True)
    v = run_pipeline(p, Options(strict_range=True))
    assert v.status == "unknown"
    assert v.undischarged
    text = emit_report(v, "human")
    assert pretty(v.undischarged[0]) in text
    assert "undischarged=" in emit_report(v, "lines")


def test_report_lines_format():
    v = run_pipeline(gen_jolt_or(1, 7))
    lines = emit_report(v, "lines").splitlines()
    assert lines[0] == "status=valid"
    for s in STAGES:
        assert any(l.startswith(f"time.{s}=") for l in lines)
    assert any(l.startswith("rules.") for l in lines)
    human = emit_report(v)
    for s in STAGES:
        assert s in human


def test_deterministic():
    p = gen_jolt_or(3, 11)
    a, b = run_pipeline(p), run_pipeline(p)
    assert a.status == b.status
    assert [e.to_json() for e in a.trace.entries] == [e.to_json() for e in b.trace.entries]


def test_wide_explicit_conversion_unsupported():
    x = var("x", F7)
    p = Problem(field=7, decls={"x": F7}, goals=[le(to_bv(4, to_nat(x)), const(6, BV(4)))])
    v = run_pipeline(p)
    assert v.status == "unknown" and "unsupported" in v.reason


def test_timeout_reports_unknown():
    v = run_pipeline(gen_jolt_or(6, 67), Options(timeout=1e-9))
    assert v.status == "unknown" and "timeout" in v.reason


def test_oracle_check_agrees():
    v = run_pipeline(gen_jolt_or(1, 7, mutate=True), Options(oracle_check=True))
    assert v.stats["oracle"] == "invalid" and "oracle_disagrees" not in v.stats


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_never_valid_when_oracle_refutes(seed):
    p = (5, 7, 13)[seed % 3]
    prob = gen_random(RandomSpec(seed=seed, p=p, depth=1 + seed % 4, var_count=1 + seed % 3, goals=1))
    v = run_pipeline(prob)
    truth = check_validity(prob).valid
    if v.status == "valid":
        assert truth
    if v.status == "invalid":
        assert not truth
