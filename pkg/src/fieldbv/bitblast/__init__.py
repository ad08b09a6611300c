"""Lower bitvector formulas to CNF and decide them with SAT."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..context import Deadline, ProofContext
from ..errors import LiftFailure, PipelineTimeout, Unsupported
from ..nat2bv import bits as width_of, is_pure_bv
from ..oracle.semantics import eval_term
from ..range_analysis import BoundIndex, is_closed
from ..terms import Term, to_nat
from .circuit import FALSE, TRUE, Circuit
from .dimacs import parse_model, run_external, to_dimacs
from .sat import SatResult, Solver

__all__ = ["Lowering", "Lowered", "BlastResult", "lower", "sat_solve", "lift_countermodel", "blast_context", "to_dimacs", "parse_model", "run_external"]


class Lowering:
    """Translate terms of one context into circuit literals.

    Atoms under ``to_bv`` become fresh bit blocks: one block per field,
    natural or bitvector variable, shared by every width it is used at, and
    constrained to the variable's range (``p - 1`` for field elements,
    tightened by constant upper-bound hypotheses).
    """

    def __init__(self, circuit: Circuit, hyps=()):
        self.c = circuit
        self.idx = BoundIndex.from_hyps(hyps)
        self.vars: dict = {}  # var term -> bits
        self.memo: dict = {}

    def var_bits(self, v: Term) -> list:
        hit = self.vars.get(v)
        if hit is not None:
            return hit
        s = v.sort
        if s.is_bv:
            b = self.c.new_bits(s.param)
        else:
            if s.is_ff:
                hi = s.param - 1
                tn = to_nat(v)
                if tn in self.idx.upper:
                    hi = min(hi, self.idx.upper[tn][0])
            elif s.is_nat:
                if v not in self.idx.upper:
                    raise Unsupported(f"natural variable {v.val} has no upper bound")
                hi = self.idx.upper[v][0]
            else:
                raise Unsupported(f"cannot bit-blast variable of sort {s}")
            b = self.c.new_bits(width_of(hi))
            if (hi + 1) & hi:  # not of the form 2^k - 1
                self.c.assert_lit(self.c.ule(b, Circuit.const_bits(hi, len(b))))
        self.vars[v] = b
        return b

    @staticmethod
    def _resize(b: list, n: int) -> list:
        return b[:n] if len(b) >= n else b + [FALSE] * (n - len(b))

    def atom(self, t: Term, n: int) -> list:
        """Bits of ``to_bv(n, t)`` for a closed term or a natural atom."""
        if is_closed(t):
            return Circuit.const_bits(eval_term(t, {}) % (1 << n), n)
        if t.op == "to_nat" and t.args[0].op == "var":
            return self._resize(self.var_bits(t.args[0]), n)
        if t.op == "var" and t.sort.is_nat:
            return self._resize(self.var_bits(t), n)
        if t.op == "bv_to_nat":
            return self._resize(self.bits(t.args[0]), n)
        raise Unsupported(f"cannot bit-blast natural term {t}")

    def bits(self, t: Term) -> list:
        hit = self.memo.get(t)
        if hit is not None:
            return hit
        c = self.c
        op = t.op
        if not t.sort.is_bv:
            raise Unsupported(f"expected a bitvector term, got {t.sort}")
        n = t.sort.param
        if op == "const":
            r = Circuit.const_bits(t.val, n)
        elif op == "var":
            r = self.var_bits(t)
        elif op == "to_bv":
            r = self.atom(t.args[0], n)
        elif op in ("add", "mul"):
            r = self.bits(t.args[0])
            for a in t.args[1:]:
                r = c.bv_add(r, self.bits(a)) if op == "add" else c.bv_mul(r, self.bits(a))
        elif op == "sub":
            r = c.bv_sub(self.bits(t.args[0]), self.bits(t.args[1]))
        elif op == "mod":
            r = c.bv_urem(self.bits(t.args[0]), self.bits(t.args[1]))
        elif op in ("bvor", "bvand", "bvxor"):
            g = {"bvor": c.OR, "bvand": c.AND, "bvxor": c.XOR}[op]
            r = [g(x, y) for x, y in zip(self.bits(t.args[0]), self.bits(t.args[1]))]
        elif op == "concat":
            r = []
            for a in reversed(t.args):
                r.extend(self.bits(a))
        elif op == "trunc":
            r = self.bits(t.args[0])[:n]
        elif op == "zext":
            r = self._resize(self.bits(t.args[0]), n)
        elif op == "extract":
            r = [self.bits(t.args[0])[t.val]]
        elif op == "ite":
            r = c.bv_mux(self.lit(t.args[0]), self.bits(t.args[1]), self.bits(t.args[2]))
        else:
            raise Unsupported(f"cannot bit-blast operator {op}")
        self.memo[t] = r
        return r

    def lit(self, f: Term) -> int:
        hit = self.memo.get(f)
        if hit is not None:
            return hit
        c = self.c
        op = f.op
        if op == "const":
            r = TRUE if f.val else FALSE
        elif op in ("eq", "le", "ge") and f.args[0].sort.is_bv:
            a, b = self.bits(f.args[0]), self.bits(f.args[1])
            r = c.bv_eq(a, b) if op == "eq" else c.ule(a, b) if op == "le" else c.uge(a, b)
        elif op == "eq" and f.args[0].sort.is_bool:
            r = -c.XOR(self.lit(f.args[0]), self.lit(f.args[1]))
        elif op == "and":
            r = c.AND_all(self.lit(a) for a in f.args)
        elif op == "not":
            r = -self.lit(f.args[0])
        else:
            raise Unsupported(f"cannot bit-blast formula {f}")
        self.memo[f] = r
        return r

    def read(self, model: dict) -> dict:
        """Variable values under a SAT model."""
        env = {}
        for v, b in self.vars.items():
            val = 0
            for i, l in enumerate(b):
                bit = (l == TRUE) or (l not in (TRUE, FALSE) and (model.get(abs(l), False) == (l > 0)))
                if bit:
                    val |= 1 << i
            env[v.val] = val
        return env


@dataclass
class Lowered:
    """A pure bitvector context as a circuit whose satisfying assignments are countermodels."""

    circuit: Circuit
    lowering: Lowering
    dropped_hyps: list = field(default_factory=list)

    @property
    def nvars(self) -> int:
        return self.circuit.nvars

    @property
    def clauses(self) -> list:
        return self.circuit.clauses


@dataclass
class BlastResult:
    status: str  # "unsat" (goals valid), "sat" (countermodel) or "unknown"
    env: dict = field(default_factory=dict)
    nvars: int = 0
    nclauses: int = 0
    dropped_hyps: list = field(default_factory=list)
    cnf: tuple | None = None


def lower(ctx: ProofContext) -> Lowered:
    """Encode ``hyps and not goals`` as CNF.

    Hypotheses that are not pure bitvector formulas are left out, which only
    weakens the assumptions. Raises Unsupported if a goal is not pure.
    """
    for g in ctx.goals:
        if not is_pure_bv(g):
            raise Unsupported(f"goal is not a bitvector formula: {g}")
    circ = Circuit()
    low = Lowering(circ, ctx.hyps)
    dropped = []
    for h in ctx.hyps:
        if is_pure_bv(h):
            circ.assert_lit(low.lit(h))
        else:
            dropped.append(h)
    goal_lits = [low.lit(g) for g in ctx.goals]
    circ.clauses.append([-l for l in goal_lits] if goal_lits else [FALSE])
    return Lowered(circ, low, dropped)


def sat_solve(lowered: Lowered, deadline: Deadline | None = None, external: str | None = None) -> SatResult:
    if external:
        return run_external(external, lowered.nvars, lowered.clauses,
                            None if deadline is None else deadline.remaining())
    s = Solver(lowered.nvars)
    for cl in lowered.clauses:
        if not s.add_clause(cl):
            return SatResult("unsat")
    rem = None if deadline is None else deadline.remaining()
    return s.solve(None if rem is None else time.monotonic() + rem)


def lift_countermodel(model: dict, lowered: Lowered, decls: dict | None = None) -> dict:
    """Values of the context variables under a SAT model.

    Raises LiftFailure if a value lies outside the range its bit block was
    constrained to. Variables in ``decls`` that the circuit never saw get 0.
    """
    env = lowered.lowering.read(model)
    idx = lowered.lowering.idx
    for v in lowered.lowering.vars:
        val = env[v.val]
        s = v.sort
        if s.is_ff:
            hi = s.param - 1
            tn = to_nat(v)
            if tn in idx.upper:
                hi = min(hi, idx.upper[tn][0])
        elif s.is_nat:
            hi = idx.upper[v][0]
        else:
            hi = (1 << s.param) - 1
        if val > hi:
            raise LiftFailure(f"{v.val} = {val} exceeds its bound {hi}")
    if decls:
        for name in decls:
            env.setdefault(name, 0)
    return env


def blast_context(ctx: ProofContext, deadline: Deadline | None = None, external: str | None = None,
                  keep_cnf: bool = False) -> BlastResult:
    """Decide ``hyps |= goals`` for a context whose goals are pure bitvector formulas."""
    lowered = lower(ctx)
    res = sat_solve(lowered, deadline, external)
    if res.status == "unknown" and deadline is not None and deadline.remaining() == 0:
        raise PipelineTimeout("bitblast")
    env = lift_countermodel(res.model, lowered) if res.status == "sat" else {}
    cnf = (lowered.nvars, lowered.clauses) if keep_cnf else None
    return BlastResult(res.status, env, lowered.nvars, len(lowered.clauses), lowered.dropped_hyps, cnf)
