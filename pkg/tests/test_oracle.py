import os
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from fieldbv.benchgen import gen_jolt_or, or_polynomial
from fieldbv.context import ProofContext
from fieldbv.errors import BudgetExceeded
from fieldbv.oracle import _kernels, check_validity, entails, eval_term, holds
from fieldbv.terms import (BV, FF, NAT, add, const, eq, ite, le, mod, mul, nat, sub, to_bv,
                           to_nat, var)

from .conftest import ff_terms, nat_terms

F7 = FF(7)
x, y = var("x", F7), var("y", F7)
BACKENDS = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])


def test_or_polynomial_at_one_one():
    x0, y0 = var("x0", F7), var("y0", F7)
    poly = or_polynomial([x0], [y0])
    assert eval_term(poly, {"x0": 1, "y0": 1}) == 1


def test_truncated_subtraction_and_wrapping():
    assert eval_term(sub(nat(2), nat(5)), {}) == 0
    assert eval_term(to_bv(2, nat(5)), {}) == 1
    assert eval_term(mod(nat(5), nat(0)), {}) == 5
    assert eval_term(sub(const(2, F7), const(5, F7)), {}) == 4


def test_jolt_b1_valid_over_four_rows():
    res = check_validity(gen_jolt_or(1, 7))
    assert res.valid
    assert res.domains["x0"] == (0, 1) and res.domains["y0"] == (0, 1)


def test_field_bound_valid():
    assert check_validity(ProofContext([le(to_nat(x), nat(6))])).valid


def test_mutated_polynomial_witness():
    res = check_validity(gen_jolt_or(1, 7, mutate=True))
    assert not res.valid
    assert (res.witness["x0"], res.witness["y0"]) == (1, 1)


def test_to_nat_eq_three_witness_is_zero():
    res = check_validity(ProofContext([eq(to_nat(x), nat(3))]))
    assert not res.valid and res.witness == {"x": 0}


def test_entails_examples():
    x0, y0 = var("x0", F7), var("y0", F7)
    H = [le(to_nat(x0), nat(1)), le(to_nat(y0), nat(1))]
    assert entails(H, le(to_nat(mul(x0, y0)), to_nat(add(x0, y0))))
    assert not entails([], le(to_nat(x), nat(1)))
    assert entails(H, H[0])


def test_unbounded_nat_exceeds_budget():
    with pytest.raises(BudgetExceeded):
        check_validity(ProofContext([le(var("n", NAT), nat(3))]))


def test_budget_enforced():
    F = FF(101)
    a, b, c = (var(n, F) for n in "abc")
    with pytest.raises(BudgetExceeded):
        check_validity(ProofContext([eq(add(a, b, c), a)]), budget=1000)


def test_definitions_shrink_search():
    F = FF(101)
    a, b, c = (var(n, F) for n in "abc")
    ctx = ProofContext([eq(sub(c, a), b)], [eq(c, add(a, b))])
    res = check_validity(ctx, budget=101 * 101)
    assert res.valid and res.checked == 101 * 101


@pytest.mark.parametrize("backend", BACKENDS)
def test_backends_on_examples(backend):
    assert check_validity(gen_jolt_or(2, 5), backend=backend).valid
    res = check_validity(gen_jolt_or(2, 5, mutate=True), backend=backend)
    assert not res.valid


@given(ff_terms(p=7, names=("x", "y")), ff_terms(p=7, names=("x", "y")))
def test_backends_agree_with_pointwise_semantics(a, b):
    ctx = ProofContext([eq(a, b)], [le(to_nat(x), nat(3))])
    results = [check_validity(ctx, backend=bk) for bk in BACKENDS]
    assert len({r.valid for r in results}) == 1
    assert len({tuple(sorted((r.witness or {}).items())) for r in results}) == 1
    # the reference interpreter agrees
    want = all(holds(eq(a, b), {"x": vx, "y": vy}) for vx in range(4) for vy in range(7))
    assert results[0].valid == want


@given(nat_terms(names=("a", "b")), st.integers(0, 30))
def test_nat_backends_agree(t, c):
    a, b = var("a", NAT), var("b", NAT)
    hyps = [le(a, nat(5)), le(b, nat(5))]
    g = le(ite(le(a, b), t, nat(0)), nat(c))
    results = {check_validity(ProofContext([g], hyps), backend=bk).valid for bk in BACKENDS}
    assert len(results) == 1
    want = all(holds(g, {"a": va, "b": vb}) for va in range(6) for vb in range(6))
    assert results == {want}


def test_bitvector_ops_against_reference():
    v, w = var("v", BV(3)), var("w", BV(3))
    from fieldbv.terms import bvand, bvor, bvxor, concat, extract, trunc, zext
    goals = [eq(bvor(v, w), bvor(w, v)), eq(bvxor(v, v), const(0, BV(3))),
             eq(trunc(2, concat(v, w)), trunc(2, w)), eq(zext(4, extract(0, v)), zext(4, extract(0, v))),
             le(bvand(v, w), v)]
    for bk in BACKENDS:
        assert check_validity(ProofContext(goals), backend=bk).valid


def test_env_flag_disables_numba():
    code = "from fieldbv.oracle import backend; print(backend())"
    env = dict(os.environ, FIELDBV_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
