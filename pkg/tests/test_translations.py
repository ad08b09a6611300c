from hypothesis import given, strategies as st

from fieldbv.benchgen import RandomSpec, gen_jolt_or, gen_random
from fieldbv.context import ProofContext, RuleTrace
from fieldbv.ff2nat import (add_bounds, inj_nat, measure as nat_measure, mod_simplify,
                            nat_invariant_violations, normalize_sub, push_toNat, to_nat_strategy)
from fieldbv.nat2bv import (as_bv_atom, clc_bv_width, context_width, inj_bv, is_pure_bv, push_toBV,
                            to_bv_strategy)
from fieldbv.oracle import check_validity, eval_term, holds
from fieldbv.range_analysis import RangeAnalyzer
from fieldbv.terms import (BV, FF, NAT, add, bv_to_nat, const, eq, ite, le, mod, mul, nat, postorder,
                           pretty, sub, to_bv, to_nat, var, zext)

from .conftest import ff_terms

F7 = FF(7)
x, y, z = (var(n, F7) for n in "xyz")
x0, y0 = var("x0", F7), var("y0", F7)
X0, Y0 = to_nat(x0), to_nat(y0)
BITS = [le(X0, nat(1)), le(Y0, nat(1))]


def goals(ctx):
    return [pretty(g) for g in ctx.goals]


# ------------------------------------------------------------- to naturals

def test_inj_nat():
    c = ProofContext([eq(x, y)])
    assert inj_nat(c)
    assert c.goals == [eq(to_nat(x), to_nat(y))]
    c = ProofContext([le(to_nat(x), nat(3))])
    assert not inj_nat(c)


def test_normalize_sub():
    c = ProofContext([eq(add(sub(x, y), z), x)])
    assert normalize_sub(c)
    assert c.goals == [eq(sub(add(x, z), y), x)]
    c = ProofContext([eq(add(x, y), z)])
    assert not normalize_sub(c)
    a, b, d = (var(n, F7) for n in "abd")
    c = ProofContext([eq(add(sub(a, b), x, d), z)])
    normalize_sub(c)
    assert c.goals == [eq(sub(add(a, x, d), b), z)]


def test_push_to_nat_sub_with_and_without_premise():
    g = le(to_nat(sub(add(x0, y0), mul(x0, y0))), nat(1))
    with_h = ProofContext([g], BITS)
    assert push_toNat(with_h)
    assert with_h.goals[0].args[0].op == "sub"  # toNat(a) - toNat(b)
    without = ProofContext([g])
    push_toNat(without)
    assert without.goals[0].args[0].op == "mod"  # (toNat(a) + P - toNat(b)) mod P


def test_push_to_nat_ite():
    c = ProofContext([le(to_nat(ite(eq(x, y), x, y)), nat(6))])
    push_toNat(c)
    assert c.goals == [le(ite(eq(x, y), to_nat(x), to_nat(y)), nat(6))]


def test_mod_simplify():
    a, b = var("a", NAT), var("b", NAT)
    seven = nat(7)
    c = ProofContext([le(mod(add(mod(a, seven), mod(b, seven)), seven), nat(6))])
    mod_simplify(c)
    assert c.goals == [le(mod(add(a, b), seven), nat(6))]
    c = ProofContext([le(mod(add(X0, Y0), seven), nat(2))], BITS)
    mod_simplify(c)
    assert c.goals == [le(add(X0, Y0), nat(2))]
    c = ProofContext([le(mod(a, seven), nat(6))])
    assert not mod_simplify(c)


def test_add_bounds():
    c = ProofContext([eq(mul(x, x), x)])
    add_bounds(c)
    assert c.goals == [le(to_nat(x), nat(1))]
    zc = ProofContext([le(to_nat(z), nat(3))])
    assert add_bounds(zc)
    assert le(to_nat(z), sub(nat(7), nat(1))) in zc.hyps
    bc = ProofContext([le(to_nat(z), nat(3))], [le(to_nat(z), nat(1))])
    assert not add_bounds(bc)


def test_to_nat_strategy_jolt_b1_atoms_only():
    p = gen_jolt_or(1, 7)
    out = to_nat_strategy(ProofContext(p.goals, p.hyps))
    assert nat_invariant_violations(out) == []
    for f in out.formulas():
        for u in postorder(f):
            if u.op == "to_nat":
                assert u.args[0] in (x0, y0)


def test_cube_keeps_mod():
    out = to_nat_strategy(ProofContext([eq(mul(x, x, x), y)]))
    X = to_nat(x)
    assert out.goals == [eq(mod(mul(X, X, X), nat(7)), to_nat(y))]


def test_pure_nat_context_unchanged():
    a = var("a", NAT)
    c = ProofContext([le(a, nat(3))], [le(a, nat(2))])
    assert to_nat_strategy(c) == c


@given(ff_terms(p=7, names=("x", "y")), ff_terms(p=7, names=("x", "y")), st.booleans(), st.booleans())
def test_to_nat_equivalid(a, b, bx, splits):
    hyps = [le(to_nat(x), nat(1))] if bx else []
    ctx = ProofContext([eq(a, b)], hyps)
    tr = RuleTrace()
    out = to_nat_strategy(ctx, analyzer=RangeAnalyzer(case_splits=splits, trace=tr), trace=tr)
    assert check_validity(ctx).valid == check_validity(out).valid
    assert nat_invariant_violations(out) == []
    assert tr.measure_violations() == []


def test_measure_is_a_tuple_of_naturals():
    m = nat_measure(ProofContext([eq(x, y)]))
    assert all(isinstance(v, int) and v >= 0 for v in m)


# ------------------------------------------------------------ to bitvectors

def test_widths():
    X = to_nat(x)
    assert clc_bv_width(mul(X, X, X)) == 9
    assert clc_bv_width(nat(7)) == 3
    assert clc_bv_width(add(X0, Y0), BITS) == 2
    assert clc_bv_width(mul(nat(4), add(X0, Y0)), BITS) == 4


def test_inj_bv():
    X, Y = to_nat(x), to_nat(y)
    c = ProofContext([eq(X, Y)], [le(X, nat(6)), le(Y, nat(6))])
    assert inj_bv(c, 3)
    assert c.goals == [eq(to_bv(3, X), to_bv(3, Y))]
    c = ProofContext([], [le(X0, nat(1))])
    inj_bv(c, 2)
    assert c.hyps == [le(X0, nat(1)), le(to_bv(2, X0), to_bv(2, nat(1)))]


def test_push_to_bv():
    zero2 = const(0, BV(2))
    c = ProofContext([eq(to_bv(2, add(X0, Y0)), zero2)], BITS)
    assert push_toBV(c, 2)
    assert c.goals == [eq(add(to_bv(2, X0), to_bv(2, Y0)), zero2)]
    X = to_nat(x)
    c = ProofContext([eq(to_bv(9, mod(mul(X, X, X), nat(7))), const(0, BV(9)))])
    push_toBV(c, 9)
    assert c.goals == [eq(mod(mul(to_bv(9, X), to_bv(9, X), to_bv(9, X)), to_bv(9, nat(7))), const(0, BV(9)))]
    n = var("n", NAT)
    c = ProofContext([eq(to_bv(3, sub(n, X)), const(0, BV(3)))])
    assert not push_toBV(c, 3)


def test_as_bv_atom():
    v, side = as_bv_atom(to_bv(2, X0), BITS)
    assert v.sort == BV(2) and side == [le(v, const(1, BV(2)))]
    w = var("w", BV(2))
    assert as_bv_atom(to_bv(4, bv_to_nat(w))) == (zext(4, w), [])
    assert as_bv_atom(to_bv(2, nat(3))) == (const(3, BV(2)), [])


def test_to_bv_strategy_jolt_b1_width_two():
    p = gen_jolt_or(1, 7)
    an = RangeAnalyzer()
    n = to_nat_strategy(ProofContext(p.goals, p.hyps), analyzer=an)
    # the range goal is discharged before this stage by the pipeline
    eqs = ProofContext([g for g in n.goals if g.op == "eq"], n.hyps)
    assert context_width(eqs) == 2
    out = to_bv_strategy(eqs, analyzer=an)
    assert all(is_pure_bv(g) for g in out.goals)


def test_inequality_only_context():
    tr = RuleTrace()
    c = ProofContext([], [le(X0, nat(1))])
    to_bv_strategy(c, trace=tr)
    assert tr.rules() == ["injBVLeqHyp"]


def test_cube_context_width_nine():
    out = to_nat_strategy(ProofContext([eq(mul(x, x, x), y)]))
    assert context_width(out) == 9


@given(st.integers(0, 10 ** 6))
def test_to_bv_equivalid_on_random_contexts(seed):
    p = (5, 7, 13)[seed % 3]
    prob = gen_random(RandomSpec(seed=seed, p=p, depth=1 + seed % 3, var_count=1 + seed % 3))
    ctx = ProofContext(prob.goals, prob.hyps)
    n = to_nat_strategy(ctx)
    b = to_bv_strategy(n)
    assert check_validity(ctx).valid == check_validity(n).valid == check_validity(b).valid


@given(st.integers(0, 10 ** 6))
def test_width_bounds_every_subterm(seed):
    prob = gen_random(RandomSpec(seed=seed, p=7, depth=2, var_count=2))
    n = to_nat_strategy(ProofContext(prob.goals, prob.hyps))
    width = context_width(n)
    names = sorted({u.val for f in n.formulas() for u in postorder(f) if u.op == "var"})
    import itertools
    for vals in itertools.product(range(7), repeat=len(names)):
        env = dict(zip(names, vals))
        if not all(holds(h, env) for h in n.hyps):
            continue
        for f in n.formulas():
            for u in postorder(f):
                if u.sort == NAT and u.op != "pvar":
                    assert eval_term(u, env) < (1 << width)
