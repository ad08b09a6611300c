"""Translate natural-number goals into fixed-width bitvector goals.

A single width ``b`` is chosen large enough that no natural subterm of the
context can exceed ``2^b - 1``. Conversions ``to_bv`` are then pushed down to
the atoms, which the bit-blaster turns into bitvector variables.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable

from .context import Deadline, NullTrace, ProofContext, RuleTrace
from .errors import Unsupported
from .oracle.semantics import eval_term
from .range_analysis import BoundIndex, RangeAnalyzer, is_atom, is_closed
from .terms import (BV, Term, add, const, eq, ge, ite, le, mod, mul, nat, postorder, sub, substitute,
                    to_bv, trunc, var, zext)


def bits(c: int) -> int:
    return max(1, int(c).bit_length())


def clc_bv_width(t: Term, hyps: Iterable[Term] | BoundIndex = ()) -> int:
    """Number of bits that always suffice to hold the natural term ``t``.

    ``to_nat(v)`` of a field element takes the width of ``p - 1`` unless a
    hypothesis ``to_nat(v) <= C`` tightens it. Sums add one bit per doubling
    of the operand count, products add widths, subtraction and ``mod`` keep
    the width of their first operand. A constant factor ``c`` turns width
    ``w`` into the width of ``c * (2^w - 1)``.
    """
    idx = hyps if isinstance(hyps, BoundIndex) else BoundIndex.from_hyps(hyps)
    return _width(t, idx, {})


def _width(t: Term, idx: BoundIndex, memo: dict) -> int:
    hit = memo.get(t)
    if hit is not None:
        return hit
    op = t.op
    if op == "const":
        w = bits(t.val)
    elif op == "to_nat":
        bound = t.args[0].sort.param - 1
        if t in idx.upper:
            bound = min(bound, idx.upper[t][0])
        w = bits(bound)
    elif op == "bv_to_nat":
        w = t.args[0].sort.param
        if t in idx.upper:
            w = min(w, bits(idx.upper[t][0]))
    elif op == "var":
        if t not in idx.upper:
            raise Unsupported(f"natural variable {t.val} has no upper bound")
        w = bits(idx.upper[t][0])
    elif op == "add":
        ws = [_width(a, idx, memo) for a in t.args]
        w = max(ws) + (len(ws) - 1).bit_length()
    elif op == "mul":
        # constant factors scale the maximum instead of adding their own width
        c = 1
        w = 0
        for a in t.args:
            if a.op == "const":
                c *= a.val
            else:
                w += _width(a, idx, memo)
        if c != 1:
            w = bits(c * ((1 << w) - 1)) if w else bits(c)
    elif op in ("sub", "mod"):
        w = _width(t.args[0], idx, memo)
        for a in t.args[1:]:
            _width(a, idx, memo)
    elif op == "ite":
        w = max(_width(t.args[1], idx, memo), _width(t.args[2], idx, memo))
    elif op == "max":
        w = max(_width(a, idx, memo) for a in t.args)
    else:
        raise Unsupported(f"no width rule for {op}")
    memo[t] = w
    return w


def context_width(ctx: ProofContext) -> int:
    """The global width: at least 2, and at least the width of every natural subterm."""
    idx = BoundIndex.from_hyps(ctx.hyps)
    memo: dict = {}
    b = 2
    for f in ctx.formulas():
        for u in postorder(f):
            if u.sort.is_nat and u.op != "pvar":
                b = max(b, _width(u, idx, memo))
    return b


# --------------------------------------------------------------- measures

def _nat_cmp(t: Term) -> bool:
    return t.op in ("eq", "le", "ge") and t.args[0].sort.is_nat


@lru_cache(maxsize=1 << 16)
def _nat_cmps(t: Term) -> int:
    return (1 if _nat_cmp(t) else 0) + sum(_nat_cmps(a) for a in t.args)


@lru_cache(maxsize=1 << 16)
def _inside_to_bv(t: Term) -> int:
    if t.op == "to_bv":
        return _tree_size(t.args[0])
    return sum(_inside_to_bv(a) for a in t.args)


@lru_cache(maxsize=1 << 16)
def _tree_size(t: Term) -> int:
    return 1 + sum(_tree_size(a) for a in t.args)


def _misaligned(ctx: ProofContext, b: int) -> int:
    n = 0
    for f in ctx.formulas():
        for u in postorder(f):
            if u.op == "to_bv" and u.val != b and not is_closed(u.args[0]):
                n += 1
    return n


def _pending(ctx: ProofContext) -> int:
    """Natural comparisons still to be injected: all of them except top-level hypotheses."""
    n = 0
    for h in ctx.hyps:
        n += _nat_cmps(h) - (1 if _nat_cmp(h) and h.op != "eq" else 0)
    for g in ctx.goals:
        n += _nat_cmps(g)
    return n


def measure(ctx: ProofContext) -> tuple:
    return _pending(ctx), sum(_inside_to_bv(f) for f in ctx.formulas())


def _hyp_images_missing(ctx: ProofContext, b: int) -> list:
    have = set(ctx.hyps)
    out = []
    for h in ctx.hyps:
        if h.op in ("le", "ge") and h.args[0].sort.is_nat:
            img = _cmp(h.op, to_bv(b, h.args[0]), to_bv(b, h.args[1]))
            if img not in have:
                out.append((h, img))
    return out


def _cmp(op: str, a: Term, c: Term) -> Term:
    return {"eq": eq, "le": le, "ge": ge}[op](a, c)


# ----------------------------------------------------------------- engine

class BVTranslator:
    def __init__(self, analyzer: RangeAnalyzer | None = None, trace: RuleTrace | None = None,
                 deadline: Deadline | None = None):
        self.trace = trace if trace is not None else NullTrace()
        self.analyzer = analyzer if analyzer is not None else RangeAnalyzer(trace=self.trace)
        self.deadline = deadline
        self.width = 0

    def _bounded(self, t: Term, ctx: ProofContext) -> bool:
        b = self.width
        try:
            if clc_bv_width(t, ctx.hyps) <= b:
                return True
        except Unsupported:
            pass
        return self.analyzer.prove(le(t, nat((1 << b) - 1)), ctx.hyps)

    def _search(self, ctx, matcher):
        for kind, lst in (("hyp", ctx.hyps), ("goal", ctx.goals)):
            for i, f in enumerate(lst):
                for s in postorder(f):
                    if s is f and kind == "hyp" and s.op in ("le", "ge"):
                        continue  # top-level natural hypotheses keep their natural form
                    r = matcher(s, ctx)
                    if r is not None:
                        return kind, i, f, s, r
        return None

    def _inj_bv(self, s, ctx):
        if not _nat_cmp(s):
            return None
        a, c = s.args
        if not (self._bounded(a, ctx) and self._bounded(c, ctx)):
            return None
        b = self.width
        return _cmp(s.op, to_bv(b, a), to_bv(b, c))

    def _dist_bv(self, s, ctx):
        if s.op != "to_bv" or s.val != self.width or s.args[0].op not in ("add", "mul"):
            return None
        t = s.args[0]
        if is_closed(t) or not self._bounded(t, ctx):
            return None
        op = add if t.op == "add" else mul
        return op(*[to_bv(s.val, a) for a in t.args])

    def _dist_bv_ite(self, s, ctx):
        if s.op != "to_bv" or s.val != self.width or s.args[0].op != "ite" or is_closed(s.args[0]):
            return None
        c, x, y = s.args[0].args
        return ite(c, to_bv(s.val, x), to_bv(s.val, y))

    def _dist_bv_sub(self, s, ctx):
        if s.op != "to_bv" or s.val != self.width or s.args[0].op != "sub" or is_closed(s.args[0]):
            return None
        t1, t2 = s.args[0].args
        if not (self._bounded(t1, ctx) and self.analyzer.prove(ge(t1, t2), ctx.hyps)):
            return None
        return sub(to_bv(s.val, t1), to_bv(s.val, t2))

    def _dist_bv_mod(self, s, ctx):
        if s.op != "to_bv" or s.val != self.width or s.args[0].op != "mod" or is_closed(s.args[0]):
            return None
        t1, t2 = s.args[0].args
        if not is_closed(t2) or not (self._bounded(t1, ctx) and self._bounded(t2, ctx)):
            return None
        return mod(to_bv(s.val, t1), to_bv(s.val, t2))

    RULES = (("injBV", "_inj_bv"), ("distBV", "_dist_bv"), ("distBVIte", "_dist_bv_ite"),
             ("distBVSub", "_dist_bv_sub"), ("distBVMod", "_dist_bv_mod"))

    def _rewrite(self, ctx, stage, name, hit, before, measure_fn):
        kind, i, f, s, r = hit
        new_f = substitute(f, s, r)
        if kind == "hyp":
            ctx.replace_hyp(i, new_f)
        else:
            ctx.replace_goal(i, new_f)
        self.trace.log(stage, name, f, before, measure_fn(ctx), s, r)

    def run(self, ctx: ProofContext) -> ProofContext:
        out = ctx.copy()
        b = self.width = context_width(out)

        # align explicit conversions of other widths with the global width
        while True:
            before = (_misaligned(out, b),)
            hit = None
            for kind, lst in (("hyp", out.hyps), ("goal", out.goals)):
                for i, f in enumerate(lst):
                    for s in postorder(f):
                        if s.op == "to_bv" and s.val != b and not is_closed(s.args[0]):
                            wide = to_bv(b, s.args[0])
                            r = trunc(s.val, wide) if s.val < b else zext(s.val, wide)
                            hit = (kind, i, f, s, r)
                            break
                    if hit:
                        break
                if hit:
                    break
            if hit is None:
                break
            self._rewrite(out, "to_bv", "alignBV", hit, before, lambda c: (_misaligned(c, b),))

        # mirror every bounded natural inequality hypothesis
        for h, img in _hyp_images_missing(out, b):
            if self.deadline is not None:
                self.deadline.check("to_bv")
            if self._bounded(h.args[0], out) and self._bounded(h.args[1], out):
                before = (len(_hyp_images_missing(out, b)),)
                out.add_hyp(img)
                self.trace.log("to_bv", "injBVLeqHyp", h, before, (len(_hyp_images_missing(out, b)),), None, img)

        while True:
            if self.deadline is not None:
                self.deadline.check("to_bv")
            before = measure(out)
            for name, meth in self.RULES:
                hit = self._search(out, getattr(self, meth))
                if hit is not None:
                    self._rewrite(out, "to_bv", name, hit, before, measure)
                    break
            else:
                return out


    def saturate(self, ctx: ProofContext, b: int, only) -> bool:
        """Apply the named main-loop rules at width ``b`` to ``ctx`` in place until none fires."""
        self.width = b
        rules = [(n, m) for n, m in self.RULES if n in only]
        changed = False
        while True:
            before = measure(ctx)
            for name, meth in rules:
                hit = self._search(ctx, getattr(self, meth))
                if hit is not None:
                    self._rewrite(ctx, "to_bv", name, hit, before, measure)
                    changed = True
                    break
            else:
                return changed


def inj_bv(ctx: ProofContext, b: int, *, analyzer: RangeAnalyzer | None = None,
           trace: RuleTrace | None = None) -> bool:
    """Turn bounded natural comparisons into width-``b`` bitvector comparisons, in place.

    Top-level natural inequality hypotheses keep their form and gain a
    bitvector image next to them.
    """
    t = BVTranslator(analyzer, trace)
    t.width = b
    changed = False
    for h, img in _hyp_images_missing(ctx, b):
        if t._bounded(h.args[0], ctx) and t._bounded(h.args[1], ctx):
            before = (len(_hyp_images_missing(ctx, b)),)
            ctx.add_hyp(img)
            t.trace.log("to_bv", "injBVLeqHyp", h, before, (len(_hyp_images_missing(ctx, b)),), None, img)
            changed = True
    return t.saturate(ctx, b, ("injBV",)) or changed


def push_toBV(ctx: ProofContext, b: int, *, analyzer: RangeAnalyzer | None = None,
              trace: RuleTrace | None = None) -> bool:
    """Distribute width-``b`` conversions over +, *, ite, guarded - and mod, in place."""
    return BVTranslator(analyzer, trace).saturate(
        ctx, b, ("distBV", "distBVIte", "distBVSub", "distBVMod"))


def as_bv_atom(t: Term, hyps: Iterable[Term] = ()) -> tuple:
    """Bitvector form of a conversion ``to_bv(N, a)`` of an atom or constant.

    Returns ``(term, side_conditions)``. Field and natural atoms become a fresh
    N-bit variable named after the atom, constrained by the bound the
    hypotheses give it; ``bv_to_nat(v)`` becomes ``v`` resized to N bits;
    constants wrap modulo 2^N.
    """
    if t.op != "to_bv":
        raise Unsupported(f"not a conversion to bitvectors: {t}")
    n, a = t.val, t.args[0]
    if is_closed(a):
        return const(eval_term(a, {}) % (1 << n), BV(n)), []
    if a.op == "bv_to_nat":
        v = a.args[0]
        w = v.sort.param
        return (v if w == n else zext(n, v) if w < n else trunc(n, v)), []
    idx = BoundIndex.from_hyps(hyps)
    if a.op == "to_nat" and a.args[0].op == "var":
        name = a.args[0].val
    elif a.op == "var":
        name = a.val
    else:
        raise Unsupported(f"not an atom: {a}")
    ub = idx.atom_upper(a)
    if ub is None:
        raise Unsupported(f"{name} has no upper bound")
    v = var(f"{name}#bv{n}", BV(n))
    side = [] if ub >= (1 << n) - 1 else [le(v, const(ub, BV(n)))]
    return v, side


def to_bv_strategy(ctx: ProofContext, *, analyzer: RangeAnalyzer | None = None,
                   trace: RuleTrace | None = None, deadline: Deadline | None = None) -> ProofContext:
    """Translate the natural-number parts of ``ctx`` into bitvector arithmetic of one width."""
    return BVTranslator(analyzer, trace, deadline).run(ctx)


def is_pure_bv(f: Term) -> bool:
    """True when ``f`` only uses bitvector operators above its ``to_bv`` atoms."""
    def ok(t: Term) -> bool:
        if t.op == "to_bv":
            a = t.args[0]
            return is_closed(a) or is_atom(a)
        if t.sort.is_nat or t.sort.is_ff:
            return False
        if t.op in ("eq", "le", "ge") and not t.args[0].sort.is_bv:
            return False
        return all(ok(a) for a in t.args)
    return ok(f)
