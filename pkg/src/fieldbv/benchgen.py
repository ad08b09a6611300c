"""Problem generators: the bitwise-OR lookup family and seeded random contexts."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ConstraintViolation
from .problem import Problem
from .terms import (BV, FF, Term, is_prime, add, bvor, const, eq, extract, ite, le, mul, nat, sub,
                    to_bv, to_nat, var)


def least_prime_above(n: int) -> int:
    q = n + 1
    while not is_prime(q):
        q += 1
    return q


def or_polynomial(xs, ys, mutate: bool = False) -> Term:
    """sum_i 2^i (x_i + y_i - x_i y_i); with ``mutate`` the subtraction becomes an addition."""
    F = xs[0].sort
    terms = []
    for i, (x, y) in enumerate(zip(xs, ys)):
        bit = add(x, y, mul(x, y)) if mutate else sub(add(x, y), mul(x, y))
        terms.append(mul(const(1 << i, F), bit))
    return add(*terms)


def gen_jolt_or(B: int, p: int, mutate: bool = False) -> Problem:
    """Bitwise OR of two B-bit vectors against its field polynomial encoding.

    Each bit of ``bv1``/``bv2`` is tied to a field element that is at most 1,
    and the goal says the OR equals the polynomial converted to B bits, with
    the polynomial itself below 2^B.
    """
    if B < 1:
        raise ConstraintViolation("B must be positive")
    F = FF(p)
    if (1 << B) >= p:
        raise ConstraintViolation(f"2^{B} = {1 << B} must be smaller than the field order {p}")
    prob = Problem(field=p)
    prob.decls["bv1"] = BV(B)
    prob.decls["bv2"] = BV(B)
    xs = [var(f"x{i}", F) for i in range(B)]
    ys = [var(f"y{i}", F) for i in range(B)]
    for v in xs + ys:
        prob.decls[v.val] = F
    bv1, bv2 = prob.var("bv1"), prob.var("bv2")
    for i in range(B):
        for bv, v in ((bv1, xs[i]), (bv2, ys[i])):
            prob.hyps.append(le(to_nat(v), nat(1)))
            prob.hyps.append(eq(extract(i, bv), to_bv(1, to_nat(v))))
    poly = to_nat(or_polynomial(xs, ys, mutate))
    prob.goals.append(eq(bvor(bv1, bv2), to_bv(B, poly)))
    prob.goals.append(le(poly, nat((1 << B) - 1)))
    return prob


@dataclass
class RandomSpec:
    seed: int = 0
    p: int = 7
    depth: int = 2
    var_count: int = 2
    goals: int = 1


def gen_random(spec: RandomSpec) -> Problem:
    """A reproducible random context over FF(p).

    Some variables are bit-bounded (either ``x*x = x`` or ``toNat(x) <= 1``),
    the rest are unconstrained. Terms mix +, *, - and ite, with extra weight
    on subtractions inside sums since those exercise the overflow handling.
    """
    rng = random.Random(spec.seed)
    F = FF(spec.p)
    prob = Problem(field=spec.p)
    vs = [var(f"x{i}", F) for i in range(spec.var_count)]
    for v in vs:
        prob.decls[v.val] = F
        r = rng.random()
        if r < 0.3:
            prob.hyps.append(eq(mul(v, v), v))
        elif r < 0.55:
            prob.hyps.append(le(to_nat(v), nat(1)))

    def leaf() -> Term:
        if vs and rng.random() < 0.7:
            return rng.choice(vs)
        return const(rng.randrange(spec.p), F)

    def term(d: int) -> Term:
        if d <= 0 or rng.random() < 0.2:
            return leaf()
        k = rng.random()
        if k < 0.3:
            return add(term(d - 1), sub(term(d - 1), term(d - 1)))
        if k < 0.5:
            return add(term(d - 1), term(d - 1))
        if k < 0.7:
            return mul(term(d - 1), term(d - 1))
        if k < 0.88:
            return sub(term(d - 1), term(d - 1))
        return ite(eq(leaf(), leaf()), term(d - 1), term(d - 1))

    for _ in range(spec.goals):
        if rng.random() < 0.55:
            prob.goals.append(eq(term(spec.depth), term(spec.depth)))
        else:
            prob.goals.append(le(to_nat(term(spec.depth)), nat(rng.randrange(spec.p))))
    return prob
