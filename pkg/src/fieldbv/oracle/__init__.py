"""Brute-force oracle: decide validity by enumerating every assignment.

The oracle is the ground truth the translations are tested against. It
shrinks the search space in two sound ways: unary bound hypotheses prune a
variable's domain, and hypotheses of the form ``v = t`` compute ``v`` from the
other variables instead of enumerating it. Enumeration order is fixed
(variables by name, first variable slowest), so the first witness reported is
deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import BudgetExceeded, Unsupported
from ..terms import Term, conj, conjuncts, free_vars, neg, postorder, TRUE
from . import _kernels
from ._kernels import (ADD, AND, BAND, BOR, BXOR, CONST, EQ, GE, ITE, LE, LOAD, MAX,
                       MOD, MUL, NOT, REDUCE, SHLOR, STORE, SUB, BIT, CUT, set_backend)
from .semantics import eval_term, holds

DEFAULT_BUDGET = 1 << 20
_INT_LIMIT = 1 << 62

__all__ = ["eval_term", "holds", "check_validity", "entails", "OracleResult",
           "DEFAULT_BUDGET", "set_backend", "backend"]


def backend() -> str:
    return _kernels.BACKEND


@dataclass
class OracleResult:
    valid: bool
    witness: dict | None = None
    checked: int = 0
    domains: dict = field(default_factory=dict)


def _atom_var(t: Term) -> Term | None:
    if t.op == "var":
        return t
    if t.op in ("to_nat", "bv_to_nat") and t.args[0].op == "var":
        return t.args[0]
    return None


def _closed_value(t: Term) -> int | None:
    if any(u.op in ("var", "pvar") for u in postorder(t)):
        return None
    return eval_term(t, {})


def _domains(variables: Iterable[Term], hyps: Sequence[Term]) -> dict:
    """Per-variable inclusive [lo, hi] ranges, tightened by unary bound hypotheses."""
    dom: dict = {}
    for v in variables:
        s = v.sort
        if s.is_ff:
            dom[v] = [0, s.param - 1]
        elif s.is_bv:
            dom[v] = [0, (1 << s.param) - 1]
        elif s.is_nat:
            dom[v] = [0, None]
        else:
            raise Unsupported(f"cannot enumerate variable {v.val} of sort {s}")
    for h in hyps:
        if h.op not in ("le", "ge", "eq"):
            continue
        a, b = h.args
        for atom, bound, kind in ((a, b, h.op), (b, a, {"le": "ge", "ge": "le", "eq": "eq"}[h.op])):
            v = _atom_var(atom)
            if v is None or v not in dom:
                continue
            c = _closed_value(bound)
            if c is None:
                continue
            lo, hi = dom[v]
            if kind in ("le", "eq"):
                hi = c if hi is None else min(hi, c)
            if kind in ("ge", "eq"):
                lo = max(lo, c)
            dom[v] = [lo, hi]
    return dom


def _definitions(hyps: Sequence[Term], variables: set) -> list:
    """Pick acyclic ``v = t`` hypotheses, returned in evaluation order."""
    deps: dict = {}
    for h in hyps:
        if h.op != "eq":
            continue
        for lhs, rhs in ((h.args[0], h.args[1]), (h.args[1], h.args[0])):
            if lhs.op != "var" or lhs in deps or lhs not in variables:
                continue
            rv = free_vars(rhs)
            if lhs in rv:
                continue
            # reject if it would close a cycle through existing definitions
            stack, seen, cyclic = list(rv), set(), False
            while stack:
                u = stack.pop()
                if u is lhs:
                    cyclic = True
                    break
                if u in seen:
                    continue
                seen.add(u)
                if u in deps:
                    stack.extend(deps[u][1])
            if cyclic:
                continue
            deps[lhs] = (rhs, rv)
            break
    order: list = []
    done: set = set()

    def visit(v):
        if v in done:
            return
        done.add(v)
        for u in deps[v][1]:
            if u in deps:
                visit(u)
        order.append((v, deps[v][0]))

    for v in sorted(deps, key=lambda x: x.val):
        visit(v)
    return order


class _Compiler:
    def __init__(self, slots: dict, dom: dict):
        self.slots = slots
        self.dom = dom
        self.code: list = []
        self.args: list = []
        self.depth = 0
        self.sp = 0
        self.overflow = False

    def emit(self, op: int, arg: int = 0, delta: int = 0) -> None:
        self.code.append(op)
        self.args.append(arg)
        self.sp += delta
        self.depth = max(self.depth, self.sp)

    def bound(self, v: int) -> None:
        if v >= _INT_LIMIT:
            self.overflow = True

    def term(self, t: Term) -> int:
        """Emit code for ``t`` and return a static upper bound on its value."""
        op, s = t.op, t.sort
        if op == "const":
            self.bound(t.val)
            self.emit(CONST, t.val, 1)
            return t.val
        if op == "var":
            self.emit(LOAD, self.slots[t], 1)
            hi = self.dom[t][1]
            return hi if hi is not None else _INT_LIMIT
        if op in ("to_nat", "bv_to_nat", "zext"):
            return self.term(t.args[0])
        if op in ("to_bv", "trunc"):
            ub = self.term(t.args[0])
            self.emit(REDUCE, 1 << t.val)
            return min(ub, (1 << t.val) - 1)
        if op == "extract":
            self.term(t.args[0])
            self.emit(BIT, t.val)
            return 1
        m = s.param if s.is_ff else (1 << s.param) if s.is_bv else 0
        cap = m - 1 if m else None
        if m:
            self.bound(m)
        if op in ("add", "mul"):
            ub = self.term(t.args[0])
            for a in t.args[1:]:
                ua = self.term(a)
                raw = ub + ua if op == "add" else ub * ua
                self.bound(raw)
                ub = min(raw, cap) if cap is not None else raw
                self.emit(ADD if op == "add" else MUL, m, -1)
            return ub
        if op == "sub":
            ua = self.term(t.args[0])
            ub_ = self.term(t.args[1])
            self.bound(ua + ub_)
            self.emit(SUB, m, -1)
            return cap if cap is not None else ua
        if op == "mod":
            ua = self.term(t.args[0])
            self.term(t.args[1])
            self.emit(MOD, 0, -1)
            return ua
        if op == "max":
            ua = self.term(t.args[0])
            ub_ = self.term(t.args[1])
            self.emit(MAX, 0, -1)
            return max(ua, ub_)
        if op == "ite":
            self.term(t.args[0])
            ua = self.term(t.args[1])
            ub_ = self.term(t.args[2])
            self.emit(ITE, 0, -2)
            return max(ua, ub_)
        if op in ("bvor", "bvand", "bvxor"):
            self.term(t.args[0])
            self.term(t.args[1])
            self.emit({"bvor": BOR, "bvand": BAND, "bvxor": BXOR}[op], 0, -1)
            return cap
        if op == "concat":
            self.term(t.args[0])
            for a in t.args[1:]:
                self.term(a)
                self.emit(SHLOR, a.sort.param, -1)
            self.bound(1 << s.param)
            return cap
        if op in ("eq", "le", "ge"):
            self.term(t.args[0])
            self.term(t.args[1])
            self.emit({"eq": EQ, "le": LE, "ge": GE}[op], 0, -1)
            return 1
        if op == "and":
            self.term(t.args[0])
            for a in t.args[1:]:
                self.term(a)
                self.emit(AND, 0, -1)
            return 1
        if op == "not":
            self.term(t.args[0])
            self.emit(NOT)
            return 1
        raise Unsupported(f"oracle cannot compile operator {op}")


def _enumerate(hyps: Sequence[Term], goals: Sequence[Term], budget: int,
               backend_name: str | None = None) -> OracleResult:
    formulas = list(hyps) + list(goals)
    if any(u.op == "pvar" for f in formulas for u in postorder(f)):
        raise Unsupported("oracle cannot enumerate placeholder variables")
    variables: set = set()
    for f in formulas:
        variables |= free_vars(f)
    dom = _domains(variables, hyps)
    defs = _definitions(hyps, variables)
    defined = {v for v, _ in defs}
    free = sorted((v for v in variables if v not in defined), key=lambda v: (v.val, str(v.sort)))
    for v in free:
        if dom[v][1] is None:
            raise BudgetExceeded(f"natural variable {v.val} has no upper bound")
    total = 1
    for v in free:
        lo, hi = dom[v]
        total *= max(0, hi - lo + 1)
    if total > budget:
        raise BudgetExceeded(f"{total} assignments exceed the budget of {budget}")
    if total == 0:
        return OracleResult(True, None, 0, {v.val: tuple(dom[v]) for v in variables})

    slots = {v: i for i, v in enumerate(free)}
    for i, (v, _) in enumerate(defs):
        slots[v] = len(free) + i
    # defined variables keep their full sort range for the static bounds
    cdom = {v: (dom[v] if v not in defined else _domains([v], [])[v]) for v in variables}
    for v in defined:
        if cdom[v][1] is None:
            cdom[v] = [0, _INT_LIMIT]
    comp = _Compiler(slots, cdom)
    for v, rhs in defs:
        comp.term(rhs)
        comp.emit(STORE, slots[v], -1)
    for h in hyps:
        for part in conjuncts(h):
            comp.term(part)
            comp.emit(CUT, 0, -1)
    comp.term(neg(conj(*goals)) if goals else neg(TRUE))

    lows = np.array([dom[v][0] for v in free], dtype=np.int64)
    sizes = np.array([dom[v][1] - dom[v][0] + 1 for v in free], dtype=np.int64)

    def decode(idx: int) -> dict:
        env = {}
        for j in range(len(free) - 1, -1, -1):
            env[free[j].val] = int(lows[j] + idx % sizes[j])
            idx //= int(sizes[j])
        for v, rhs in defs:
            env[v.val] = eval_term(rhs, env)
        return env

    if comp.overflow:
        hit = -1
        hf, gf = (conj(*hyps) if hyps else TRUE), (conj(*goals) if goals else TRUE)
        for idx in range(total):
            env = decode(idx)
            if holds(hf, env) and not holds(gf, env):
                hit = idx
                break
    else:
        code = np.array(comp.code, dtype=np.int64)
        args = np.array(comp.args, dtype=np.int64)
        hit = _kernels.first_witness(code, args, lows, sizes, len(slots), comp.depth + 1,
                                     total, backend_name)
    domains = {v.val: tuple(dom[v]) for v in variables}
    if hit < 0:
        return OracleResult(True, None, total, domains)
    return OracleResult(False, decode(hit), hit + 1, domains)


def check_validity(ctx, budget: int = DEFAULT_BUDGET, backend: str | None = None) -> OracleResult:
    """Decide whether the hypotheses of ``ctx`` entail all of its goals.

    ``ctx`` is anything with ``hyps`` and ``goals`` lists. Raises
    BudgetExceeded when the pruned search space is larger than ``budget``.
    """
    return _enumerate(list(ctx.hyps), list(ctx.goals), budget, backend)


def entails(hyps: Iterable[Term], goal: Term, budget: int = DEFAULT_BUDGET,
            slice_hyps: bool = True, backend: str | None = None) -> bool:
    """Check ``hyps |= goal`` by enumeration.

    With ``slice_hyps`` only hypotheses whose variables all occur in the goal
    are kept. Dropping hypotheses can only make entailment harder, so a True
    answer is sound; a False answer then means "not confirmed".
    """
    hyps = list(hyps)
    if slice_hyps:
        gv = free_vars(goal)
        hyps = [h for h in hyps if free_vars(h) <= gv]
    return _enumerate(hyps, [goal], budget, backend).valid
