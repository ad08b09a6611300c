"""Translate field goals into natural-number goals.

Field equalities become equalities between ``to_nat`` images, ``to_nat`` is
pushed down to the leaves, and every wrap-around is made explicit as
``mod P``. Range analysis then removes the ``mod P`` operations it can prove
redundant, and decides whether a subtraction can be translated without the
``+P`` overflow guard.

Rules fire one at a time in a fixed priority order. Within a rule the
leftmost-innermost occurrence wins, hypotheses before goals.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

from .context import Deadline, NullTrace, ProofContext, RuleTrace
from .range_analysis import BoundIndex, RangeAnalyzer, is_closed
from .oracle.semantics import eval_term
from .terms import (Term, add, eq, le, ge, ite, mod, mul, nat, postorder, sub, substitute,
                    to_nat)


# ------------------------------------------------------------- measure

@lru_cache(maxsize=1 << 16)
def _counts(t: Term) -> tuple:
    """(field equalities, non-variable nodes under to_nat, mod nodes), tree-counted."""
    fe = in_nat = mods = 0
    for a in t.args:
        c = _counts(a)
        fe += c[0]
        in_nat += c[1]
        mods += c[2]
    if t.op == "eq" and t.args[0].sort.is_ff:
        fe += 1
    if t.op == "mod":
        mods += 1
    if t.op == "to_nat":
        in_nat += _nonvar_nodes(t.args[0])
    return fe, in_nat, mods


@lru_cache(maxsize=1 << 16)
def _nonvar_nodes(t: Term) -> int:
    return (0 if t.op == "var" else 1) + sum(_nonvar_nodes(a) for a in t.args)


@lru_cache(maxsize=1 << 16)
def _sub_depth(t: Term, k: int = 0) -> int:
    """Sum over field subtractions of the number of field additions above them."""
    here = k if (t.op == "sub" and t.sort.is_ff) else 0
    kk = k + 1 if (t.op == "add" and t.sort.is_ff) else k
    return here + sum(_sub_depth(a, kk) for a in t.args)


def _ff_vars(ctx: ProofContext) -> list:
    seen: list = []
    for f in ctx.formulas():
        for u in postorder(f):
            if u.op == "var" and u.sort.is_ff and u not in seen:
                seen.append(u)
    return seen


def _has_field_bound(v: Term, hyps) -> bool:
    tv = to_nat(v)
    p = v.sort.param
    for h in hyps:
        if h.op == "le" and h.args[0] is tv and is_closed(h.args[1]):
            if eval_term(h.args[1], {}) <= p - 1:
                return True
        if h.op == "ge" and h.args[1] is tv and is_closed(h.args[0]):
            if eval_term(h.args[0], {}) <= p - 1:
                return True
    return False


def measure(ctx: ProofContext) -> tuple:
    fe = in_nat = mods = sd = 0
    for f in ctx.formulas():
        c = _counts(f)
        fe += c[0]
        in_nat += c[1]
        mods += c[2]
        sd += _sub_depth(f)
    unbounded = sum(1 for v in _ff_vars(ctx) if not _has_field_bound(v, ctx.hyps))
    return fe, in_nat, mods, sd, unbounded


# --------------------------------------------------------------- engine

class NatTranslator:
    """Runs the field-to-natural strategy, sharing a range analyzer across calls."""

    def __init__(self, analyzer: RangeAnalyzer | None = None, trace: RuleTrace | None = None,
                 deadline: Deadline | None = None):
        self.trace = trace if trace is not None else NullTrace()
        self.analyzer = analyzer if analyzer is not None else RangeAnalyzer(trace=self.trace)
        self.deadline = deadline
        self._premise_memo: dict = {}
        self.rules: list[tuple[str, Callable]] = [
            ("sqrBds", self._sqr_bds),
            ("injNat", self._inj_nat),
            ("mvZModSub", self._mv_zmod_sub),
            ("distNat", self._dist_nat),
            ("distNatIte", self._dist_nat_ite),
            ("distNatSub", self._dist_nat_sub),
            ("distNatSubOvrflw", self._dist_nat_sub_ovrflw),
            ("mvMod", self._mv_mod),
            ("dropMod", self._drop_mod),
        ]

    # ----- premises

    def premise(self, query: Term, hyps: list) -> bool:
        """Decide ``hyps |= query`` for a natural inequality that may still mention field terms."""
        idx = BoundIndex.from_hyps(h for h in hyps if h.op in ("le", "ge", "eq") and h.args[0].sort.is_nat)
        key = (query, idx.key())
        hit = self._premise_memo.get(key)
        if hit is not None:
            return hit
        ok = False
        with self.trace.nested():
            sub_ctx = ProofContext([query], hyps)
            out = self.run(sub_ctx, frozen_hyps=True)
            if out.goals and all(g.op in ("le", "ge") and not _mentions_field(g) for g in out.goals):
                ok = all(self.analyzer.prove(g, out.hyps) for g in out.goals)
            elif not out.goals:
                ok = True
        self._premise_memo[key] = ok
        return ok

    # ----- rule matchers: (subterm, formula kind, hyps usable as premises, p) -> replacement or None

    def _sqr_bds(self, s, others):
        if s.op != "eq" or not s.args[0].sort.is_ff:
            return None
        a, b = s.args
        for m, t in ((a, b), (b, a)):
            if m.op == "mul" and len(m.args) == 2 and m.args[0] is t and m.args[1] is t:
                return le(to_nat(t), nat(1))
        return None

    def _inj_nat(self, s, others):
        if s.op == "eq" and s.args[0].sort.is_ff:
            return eq(to_nat(s.args[0]), to_nat(s.args[1]))
        return None

    def _mv_zmod_sub(self, s, others):
        if s.op != "add" or not s.sort.is_ff:
            return None
        for a in s.args:
            if a.op == "sub":
                rest = list(s.args)
                rest.remove(a)
                return sub(add(a.args[0], *rest), a.args[1])
        return None

    def _dist_nat(self, s, others):
        if s.op != "to_nat":
            return None
        t = s.args[0]
        if t.op == "const":
            return nat(t.val)
        if t.op in ("add", "mul"):
            op = add if t.op == "add" else mul
            return mod(op(*[to_nat(a) for a in t.args]), nat(t.sort.param))
        return None

    def _dist_nat_ite(self, s, others):
        if s.op == "to_nat" and s.args[0].op == "ite":
            c, a, b = s.args[0].args
            return ite(c, to_nat(a), to_nat(b))
        return None

    def _dist_nat_sub(self, s, others):
        if s.op != "to_nat" or s.args[0].op != "sub":
            return None
        a, b = s.args[0].args
        if self.premise(ge(to_nat(a), to_nat(b)), others):
            return sub(to_nat(a), to_nat(b))
        return None

    def _dist_nat_sub_ovrflw(self, s, others):
        if s.op != "to_nat" or s.args[0].op != "sub":
            return None
        a, b = s.args[0].args
        P = nat(s.args[0].sort.param)
        return mod(sub(add(to_nat(a), P), to_nat(b)), P)

    def _mv_mod(self, s, others):
        if s.op != "mod" or not is_closed(s.args[1]):
            return None
        t, m = s.args
        if t.op == "mod" and t.args[1] is m:
            return t
        if t.op in ("add", "mul"):
            stripped = [a.args[0] if (a.op == "mod" and a.args[1] is m) else a for a in t.args]
            if any(x is not y for x, y in zip(stripped, t.args)):
                op = add if t.op == "add" else mul
                return mod(op(*stripped), m)
        return None

    def _drop_mod(self, s, others):
        if s.op != "mod" or not s.sort.is_nat or not is_closed(s.args[1]):
            return None
        t, m = s.args
        c = eval_term(m, {})
        if c <= 0:
            return None
        if self.premise(le(t, sub(m, nat(1))), others):
            return t
        return None

    # ----- driver

    def _search(self, ctx: ProofContext, matcher, frozen_hyps: bool):
        lists = [("goal", ctx.goals)] if frozen_hyps else [("hyp", ctx.hyps), ("goal", ctx.goals)]
        for kind, lst in lists:
            for i, f in enumerate(lst):
                others = ctx.hyps if kind == "goal" else ctx.hyps[:i] + ctx.hyps[i + 1:]
                for s in postorder(f):
                    r = matcher(s, others)
                    if r is not None:
                        return kind, i, f, s, r
        return None

    def _add_bds(self, ctx: ProofContext):
        for v in _ff_vars(ctx):
            if not _has_field_bound(v, ctx.hyps):
                p = v.sort.param
                return v, le(to_nat(v), sub(nat(p), nat(1)))
        return None

    def step(self, ctx: ProofContext, frozen_hyps: bool = False, only=None) -> bool:
        before = measure(ctx)
        for name, matcher in self.rules:
            if only is not None and name not in only:
                continue
            hit = self._search(ctx, matcher, frozen_hyps)
            if hit is None:
                continue
            kind, i, f, s, r = hit
            new_f = substitute(f, s, r)
            if kind == "hyp":
                ctx.replace_hyp(i, new_f)
            else:
                ctx.replace_goal(i, new_f)
            self.trace.log("to_nat", name, f, before, measure(ctx), s, r)
            return True
        hit = self._add_bds(ctx) if only is None or "addBds" in only else None
        if hit is not None:
            v, h = hit
            ctx.add_hyp(h)
            self.trace.log("to_nat", "addBds", h, before, measure(ctx))
            return True
        return False

    def run(self, ctx: ProofContext, frozen_hyps: bool = False) -> ProofContext:
        out = ctx.copy()
        while True:
            if self.deadline is not None:
                self.deadline.check("to_nat")
            if not self.step(out, frozen_hyps):
                return out


    def saturate(self, ctx: ProofContext, only) -> bool:
        """Apply the named rules to ``ctx`` in place until none fires."""
        changed = False
        while self.step(ctx, only=set(only)):
            changed = True
        return changed


# Rule groups, each saturated in place on a context; they return whether
# anything changed. to_nat_strategy interleaves all of them.
RULE_GROUPS = {
    "inj_nat": ("injNat",),
    "normalize_sub": ("mvZModSub",),
    "push_toNat": ("distNat", "distNatIte", "distNatSub", "distNatSubOvrflw"),
    "mod_simplify": ("mvMod", "dropMod"),
    "add_bounds": ("sqrBds", "addBds"),
}


def _group(name: str):
    def run(ctx: ProofContext, *, analyzer: RangeAnalyzer | None = None,
            trace: RuleTrace | None = None) -> bool:
        return NatTranslator(analyzer, trace).saturate(ctx, RULE_GROUPS[name])
    run.__name__ = name
    run.__doc__ = f"Saturate {', '.join(RULE_GROUPS[name])} on ``ctx`` in place; True if it changed."
    return run


inj_nat = _group("inj_nat")
normalize_sub = _group("normalize_sub")
push_toNat = _group("push_toNat")
mod_simplify = _group("mod_simplify")
add_bounds = _group("add_bounds")


def _mentions_field(t: Term) -> bool:
    return any(u.sort.is_ff and not (u.op == "var") for u in postorder(t)
               ) or any(u.op == "to_nat" and u.args[0].op != "var" for u in postorder(t))


def to_nat_strategy(ctx: ProofContext, *, analyzer: RangeAnalyzer | None = None,
                    trace: RuleTrace | None = None, deadline: Deadline | None = None) -> ProofContext:
    """Translate every field equality and field subterm of ``ctx`` into natural arithmetic.

    The input context is not modified. The result is equivalid with the input.
    """
    return NatTranslator(analyzer, trace, deadline).run(ctx)


def nat_invariant_violations(ctx: ProofContext) -> list:
    """Subterms that should not survive translation: field equalities and non-leaf to_nat."""
    bad = []
    for f in ctx.formulas():
        for u in postorder(f):
            if u.op == "eq" and u.args[0].sort.is_ff:
                bad.append(u)
            elif u.op == "to_nat" and u.args[0].op != "var":
                bad.append(u)
    return bad
