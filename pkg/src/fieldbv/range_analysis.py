"""Range analysis: prove natural-number inequalities by interval reasoning.

A goal ``t1 <= t2`` is decomposed into goals over fresh placeholder
variables (existentially quantified bounds), which are then eliminated using
hypotheses, field and bitvector bounds, or constants. Two case-splitting
rules resolve the dependencies between 0/1-valued variables that plain
interval reasoning loses. The calculus is sound but incomplete: a False
answer means "not proved".

Atoms are the natural-number leaves that stand for original variables:
natural variables, ``to_nat(t)`` and ``bv_to_nat(t)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .context import Deadline, NullTrace, RuleTrace
from .errors import NoRuleApplies
from .oracle.semantics import eval_term
from .terms import (NAT, Term, add, eq, ge, ite, le, max_, mul, nat, postorder, pretty, pvar,
                    sub, substitute_map)

ATOM_OPS = ("to_nat", "bv_to_nat")
_FLIP = {"le": "ge", "ge": "le"}


def is_atom(t: Term) -> bool:
    return t.sort.is_nat and (t.op in ATOM_OPS or t.op == "var")


@lru_cache(maxsize=1 << 16)
def _info(t: Term) -> tuple:
    """(atom occurrences, arithmetic operators, has placeholder, has subtraction over atoms, atom set)."""
    if is_atom(t):
        return 1, 0, False, False, frozenset((t,))
    if t.op == "pvar":
        return 0, 0, True, False, frozenset()
    if t.op == "const":
        return 0, 0, False, False, frozenset()
    atoms, ops, hp, hs, aset = 0, 0, False, False, frozenset()
    for a in t.args:
        i = _info(a)
        atoms += i[0]
        ops += i[1]
        hp = hp or i[2]
        hs = hs or i[3]
        aset = aset | i[4]
    if t.sort.is_nat:
        if t.op in ("add", "mul"):
            ops += len(t.args) - 1
        elif t.op in ("sub", "mod", "max", "ite"):
            ops += 1
        if t.op == "sub" and atoms:
            hs = True
    return atoms, ops, hp, hs, aset


def atoms_of(t: Term) -> frozenset:
    return _info(t)[4]


def has_vars(t: Term) -> bool:
    """Contains an original-variable atom and no placeholder."""
    i = _info(t)
    return i[0] > 0 and not i[2]


def is_closed(t: Term) -> bool:
    i = _info(t)
    return i[0] == 0 and not i[2]


def measure(goals: Sequence[Term]) -> tuple:
    """(atom occurrences, operators in goals with atoms, goals with atoms but no placeholder, |G|)."""
    nv = nops = nexp = 0
    for g in goals:
        a, o, hp, _, _ = _info(g)
        nv += a
        if a:
            nops += o
            if not hp:
                nexp += 1
    return nv, nops, nexp, len(goals)


@dataclass(frozen=True)
class BoundIndex:
    """Constant bounds read off the hypotheses: term -> (value, constant term)."""

    upper: dict
    lower: dict

    @staticmethod
    def from_hyps(hyps: Iterable[Term]) -> "BoundIndex":
        upper: dict = {}
        lower: dict = {}
        for h in hyps:
            if h.op not in ("le", "ge", "eq") or not h.args[0].sort.is_nat:
                continue
            a, b = h.args
            for t, c, kind in ((a, b, h.op), (b, a, {"le": "ge", "ge": "le", "eq": "eq"}[h.op])):
                if is_closed(t) or not is_closed(c) or _info(t)[2]:
                    continue
                v = eval_term(c, {})
                if kind in ("le", "eq") and (t not in upper or v < upper[t][0]):
                    upper[t] = (v, c)
                if kind in ("ge", "eq") and (t not in lower or v > lower[t][0]):
                    lower[t] = (v, c)
        return BoundIndex(upper, lower)

    def key(self) -> tuple:
        return (frozenset(self.upper.items()), frozenset(self.lower.items()))

    def atom_upper(self, t: Term) -> int | None:
        """Tightest known upper bound of an atom, including the bound implied by its sort."""
        best = self.upper[t][0] if t in self.upper else None
        implied = None
        if t.op == "to_nat":
            implied = t.args[0].sort.param - 1
        elif t.op == "bv_to_nat":
            implied = (1 << t.args[0].sort.param) - 1
        if implied is not None and (best is None or implied < best):
            best = implied
        return best


@dataclass
class RangeResult:
    proved: bool
    snapshots: list = field(default_factory=list)
    rules: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.proved


class _Fail(Exception):
    pass


class _Run:
    """One range-analysis derivation for a single goal."""

    def __init__(self, goal: Term, idx: BoundIndex, case_splits: bool, trace: RuleTrace,
                 snapshots: bool, deadline: Deadline | None):
        self.goals: list[Term] = [goal]
        self.idx = idx
        self.case_splits = case_splits
        self.trace = trace
        self.want_snapshots = snapshots
        self.snapshots: list = [tuple(self.goals)]
        self.rules: list = []
        self.deadline = deadline
        self.counter = 0

    def fresh(self) -> Term:
        self.counter += 1
        return pvar(self.counter)

    # --- helpers -----------------------------------------------------

    def _replace(self, i: int, new: list) -> None:
        out: list = []
        for g in self.goals[:i] + new + self.goals[i + 1:]:
            if g not in out:
                out.append(g)
        self.goals = out

    def _eliminate(self, i: int, w: Term, c: Term) -> None:
        """Drop goal ``i`` and substitute ``c`` for placeholder ``w`` everywhere else."""
        rest = self.goals[:i] + self.goals[i + 1:]
        out: list = []
        for g in rest:
            g2 = substitute_map(g, {w: c}) if w in _pvars(g) else g
            if g2 not in out:
                out.append(g2)
        self.goals = out

    # --- rules ---------------------------------------------------------
    # each returns True when it fired on goal i

    def r_eval(self, i: int, g: Term) -> bool:
        if not is_closed(g):
            return False
        if not eval_term(g, {}):
            raise _Fail(g)
        self._replace(i, [])
        return True

    def r_ineq_cases(self, i: int, g: Term) -> bool:
        if not self.case_splits:
            return False
        cases = _bit_cases(g, self.idx)
        if cases is None:
            return False
        self._replace(i, cases)
        return True

    def r_ineq_xor(self, i: int, g: Term) -> bool:
        if not self.case_splits or g.op not in ("le", "ge"):
            return False
        lhs, w = g.args
        if w.op != "pvar" or lhs.op != "add" or len(lhs.args) != 2:
            return False
        for pa, pb in ((lhs.args[0], lhs.args[1]), (lhs.args[1], lhs.args[0])):
            m = _match_xor(pa, pb, self.idx)
            if m is not None:
                v, t1, t2 = m
                self._replace(i, [_cmp(g.op, ite(eq(v, nat(0)), t2, t1), w)])
                return True
        return False

    def r_ineq_hyp(self, i: int, g: Term) -> bool:
        if g.op not in ("le", "ge"):
            return False
        t, w = g.args
        if w.op != "pvar" or not has_vars(t):
            return False
        table = self.idx.upper if g.op == "le" else self.idx.lower
        hit = table.get(t)
        if hit is None:
            return False
        self._eliminate(i, w, hit[1])
        return True

    def r_ineq_const(self, i: int, g: Term) -> bool:
        if g.op not in ("le", "ge"):
            return False
        c, w = g.args
        if w.op != "pvar" or not is_closed(c):
            return False
        # every other goal mentioning w must be free of original variables
        uppers, lowers = [], []
        for j, h in enumerate(self.goals):
            if w not in _pvars(h):
                continue
            if _info(h)[0] > 0:
                return False
            if h.op in ("le", "ge") and h.args[1] is w and is_closed(h.args[0]):
                (uppers if h.op == "ge" else lowers).append((eval_term(h.args[0], {}), j, h.args[0]))
        if uppers:
            _, j, cterm = min(uppers, key=lambda x: (x[0], x[1]))
        else:
            _, j, cterm = max(lowers, key=lambda x: (x[0], -x[1]))
        self._eliminate(j, w, cterm)
        return True

    def r_ite_fold(self, i: int, g: Term) -> bool:
        if _info(g)[0] == 0:
            return False
        for u in postorder(g):
            if u.op == "ite" and u.sort.is_nat and is_closed(u.args[0]):
                branch = u.args[1] if eval_term(u.args[0], {}) else u.args[2]
                self._replace(i, [substitute_map(g, {u: branch})])
                return True
        return False

    def r_intro_pvar(self, i: int, g: Term) -> bool:
        if g.op not in ("le", "ge") or not has_vars(g):
            return False
        t1, t2 = g.args
        w = self.fresh()
        self._replace(i, [_cmp(g.op, t1, w), _cmp(_FLIP[g.op], t2, w)])
        return True

    def r_decompose(self, i: int, g: Term) -> str | None:
        if g.op not in ("le", "ge"):
            return None
        t, w = g.args
        if w.op != "pvar" or not has_vars(t):
            return None
        if t.op in ("add", "mul"):
            ws = [self.fresh() for _ in t.args]
            comb = (add if t.op == "add" else mul)(*ws)
            self._replace(i, [_cmp(g.op, a, wi) for a, wi in zip(t.args, ws)] + [_cmp(g.op, comb, w)])
            return "leqAddMul" if g.op == "le" else "geqAddMul"
        if t.op == "sub":
            if g.op == "le":
                self._replace(i, [le(t.args[0], w)])
                return "leqSub"
            w1, w2 = self.fresh(), self.fresh()
            self._replace(i, [ge(t.args[0], w1), le(t.args[1], w2), ge(sub(w1, w2), w)])
            return "geqSub"
        if t.op == "mod" and g.op == "le":
            m = t.args[1]
            if is_closed(m) and eval_term(m, {}) > 0:
                self._replace(i, [le(m, w)])
                return "leqMod"
            return None
        if t.op == "ite" and g.op == "le":
            w1, w2 = self.fresh(), self.fresh()
            self._replace(i, [le(t.args[1], w1), le(t.args[2], w2), le(max_(w1, w2), w)])
            return "leqIf"
        return None

    def r_leq_zmod(self, i: int, g: Term) -> bool:
        if g.op != "le":
            return False
        t, w = g.args
        if w.op != "pvar" or t.op != "to_nat":
            return False
        self._eliminate(i, w, nat(t.args[0].sort.param - 1))
        return True

    def r_leq_bv(self, i: int, g: Term) -> bool:
        if g.op != "le":
            return False
        t, w = g.args
        if w.op != "pvar" or t.op != "bv_to_nat":
            return False
        self._eliminate(i, w, nat((1 << t.args[0].sort.param) - 1))
        return True

    def r_ge_nat(self, i: int, g: Term) -> bool:
        if g.op != "ge":
            return False
        t, w = g.args
        if w.op != "pvar" or not has_vars(t):
            return False
        self._eliminate(i, w, nat(0))
        return True

    RULES = (
        ("eval", "r_eval"),
        ("ineqCases", "r_ineq_cases"),
        ("ineqXOR", "r_ineq_xor"),
        ("ineqHyp", "r_ineq_hyp"),
        ("ineqConst", "r_ineq_const"),
        ("iteFold", "r_ite_fold"),
        ("introPVar", "r_intro_pvar"),
        (None, "r_decompose"),
        ("leqZMod", "r_leq_zmod"),
        ("leqBV", "r_leq_bv"),
        ("geNat", "r_ge_nat"),
    )

    def step(self) -> bool:
        before = measure(self.goals)
        for name, meth in self.RULES:
            fn = getattr(self, meth)
            for i, g in enumerate(self.goals):
                fired = fn(i, g)
                if fired:
                    rule = fired if isinstance(fired, str) else name
                    after = measure(self.goals)
                    self.rules.append(rule)
                    self.trace.log("range", rule, g, before, after,
                                   goals_after=[pretty(x) for x in self.goals] if self.want_snapshots else None)
                    if self.want_snapshots:
                        self.snapshots.append(tuple(self.goals))
                    return True
        return False

    def run(self) -> bool:
        try:
            while self.goals:
                if self.deadline is not None:
                    self.deadline.check("range_analysis")
                if not self.step():
                    return False
        except _Fail:
            return False
        return True


def _bit_cases(g: Term, idx: BoundIndex) -> list | None:
    """Instances of ``g`` over the four 0/1 values of its two atoms, if the split applies."""
    if g.op not in ("le", "ge"):
        return None
    atoms = sorted(atoms_of(g), key=lambda a: str(a))
    if len(atoms) != 2:
        return None
    for a in atoms:
        ub = idx.atom_upper(a)
        if ub is None or ub > 1:
            return None
    t1, t2 = g.args
    if not (_info(g)[3] or (has_vars(t1) and has_vars(t2))):
        return None
    v1, v0 = atoms
    return [substitute_map(g, {v1: nat(b1), v0: nat(b0)})
            for b1, b0 in ((0, 0), (1, 0), (0, 1), (1, 1))]


def _pvars(t: Term) -> set:
    if not _info(t)[2]:
        return set()
    return {u for u in postorder(t) if u.op == "pvar"}


def _cmp(op: str, a: Term, b: Term) -> Term:
    return le(a, b) if op == "le" else ge(a, b)


def _drop_one(m: Term, factor: Term) -> Term | None:
    """``m`` with one occurrence of ``factor`` removed from its product, or None."""
    if m is factor:
        return nat(1)
    if m.op != "mul" or factor not in m.args:
        return None
    rest = list(m.args)
    rest.remove(factor)
    return mul(*rest)


def _match_xor(pa: Term, pb: Term, idx: BoundIndex):
    """Match ``v*t1`` and ``(1 - v)*t2`` with ``v`` a 0/1 atom."""
    factors = pb.args if pb.op == "mul" else (pb,)
    for f in factors:
        if f.op == "sub" and f.args[0].op == "const" and f.args[0].val == 1 and is_atom(f.args[1]):
            v = f.args[1]
            ub = idx.atom_upper(v)
            if ub is None or ub > 1:
                continue
            t1 = _drop_one(pa, v)
            t2 = _drop_one(pb, f)
            if t1 is not None and t2 is not None:
                return v, t1, t2
    return None


def rng_analyze(goal: Term, hyps: Iterable[Term] = (), *, case_splits: bool = True,
                trace: RuleTrace | None = None, snapshots: bool = False,
                deadline: Deadline | None = None, bounds: BoundIndex | None = None) -> RangeResult:
    """Try to prove a natural-number inequality from the hypotheses.

    Returns a RangeResult whose truth value says whether the goal was proved.
    With ``snapshots`` the goal set after every rule application is kept.
    """
    if goal.op not in ("le", "ge") or not goal.args[0].sort.is_nat:
        return RangeResult(False, [(goal,)] if snapshots else [], [])
    idx = bounds if bounds is not None else BoundIndex.from_hyps(hyps)
    run = _Run(goal, idx, case_splits, trace if trace is not None else NullTrace(), snapshots, deadline)
    ok = run.run()
    return RangeResult(ok, run.snapshots, run.rules)


class RangeAnalyzer:
    """Memoising front end used by the translation engines.

    Answers are cached on (goal, bounds read from the hypotheses, options),
    so an inequality proved once is reused across rules and stages.
    ``proved`` records every query answered True together with its
    hypotheses, for auditing against the brute-force oracle.
    """

    def __init__(self, case_splits: bool = True, trace: RuleTrace | None = None,
                 deadline: Deadline | None = None, record: bool = False):
        self.case_splits = case_splits
        self.trace = trace if trace is not None else NullTrace()
        self.deadline = deadline
        self.record = record
        self.cache: dict = {}
        self.proved: list = []
        self.queries = 0

    def prove(self, goal: Term, hyps: Sequence[Term]) -> bool:
        self.queries += 1
        nat_hyps = [h for h in hyps if h.op in ("le", "ge", "eq") and h.args[0].sort.is_nat]
        idx = BoundIndex.from_hyps(nat_hyps)
        key = (goal, idx.key(), self.case_splits)
        hit = self.cache.get(key)
        if hit is None:
            with self.trace.nested():
                hit = rng_analyze(goal, case_splits=self.case_splits, trace=self.trace,
                                  deadline=self.deadline, bounds=idx).proved
            self.cache[key] = hit
            if hit and self.record:
                self.proved.append((goal, tuple(nat_hyps)))
        return hit


# ------------------------------------------------------- single rule steps
# Stand-alone entry points to individual rules, for inspection and tests.

def two_orig_vars(g: Term) -> bool:
    """Exactly two distinct original-variable atoms occur in ``g``."""
    return len(atoms_of(g)) == 2


def has_sub(g: Term) -> bool:
    """A subtraction over original-variable atoms occurs in ``g``."""
    return _info(g)[3]


def eval_const(g: Term) -> bool:
    """Truth value of a closed inequality."""
    if not is_closed(g):
        raise ValueError(f"not a closed formula: {pretty(g)}")
    return bool(eval_term(g, {}))


def _run_on(goals: Sequence[Term], hyps: Iterable[Term], case_splits: bool = True) -> _Run:
    goals = list(goals)
    run = _Run(goals[0] if goals else nat(0), BoundIndex.from_hyps(hyps), case_splits,
               NullTrace(), False, None)
    run.goals = goals
    run.counter = max((u.val for g in goals for u in _pvars(g)), default=0)
    return run


def decompose(g: Term, goals: Sequence[Term] | None = None) -> list:
    """Split ``g`` (a member of ``goals``) by the structure of its left side.

    Returns the new goal list. Fresh placeholders are numbered after the
    largest one in use. Raises NoRuleApplies when no decomposition rule matches.
    """
    goals = list(goals) if goals is not None else [g]
    run = _run_on(goals, ())
    if g not in goals or run.r_decompose(goals.index(g), g) is None:
        raise NoRuleApplies(f"no decomposition for {pretty(g)}")
    return run.goals


_ELIMINATIONS = ("r_ineq_const", "r_leq_zmod", "r_leq_bv", "r_ge_nat")


def eliminate(goals: Sequence[Term], hyps: Iterable[Term] = ()) -> list:
    """Remove placeholders from a goal set.

    Bounds from hypotheses are substituted for every placeholder they
    determine. If there are none, one placeholder is removed by a constant
    bound, the field or bitvector bound, or the trivial lower bound 0.
    """
    run = _run_on(goals, hyps)
    changed = False
    progress = True
    while progress:
        progress = False
        for i, g in enumerate(run.goals):
            if run.r_ineq_hyp(i, g):
                changed = progress = True
                break
    if changed:
        return run.goals
    for meth in _ELIMINATIONS:
        fn = getattr(run, meth)
        for i, g in enumerate(run.goals):
            if fn(i, g):
                return run.goals
    raise NoRuleApplies("no placeholder can be eliminated")


def case_split(g: Term, hyps: Iterable[Term] = ()) -> list:
    """The four instances of ``g`` over the 0/1 values of its two atoms."""
    cases = _bit_cases(g, BoundIndex.from_hyps(hyps))
    if cases is None:
        raise NoRuleApplies(f"no case split for {pretty(g)}")
    return cases


def xor_rewrite(g: Term, hyps: Iterable[Term] = ()) -> Term:
    """Rewrite ``v*a + (1 - v)*b <= w`` with ``v`` a 0/1 atom to ``ite(v = 0, b, a) <= w``."""
    run = _run_on([g], hyps)
    if not run.r_ineq_xor(0, g):
        raise NoRuleApplies(f"no selector pattern in {pretty(g)}")
    return run.goals[0]
