"""Proof contexts, rule traces and the shared deadline."""
from __future__ import annotations

import json
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .errors import PipelineTimeout
from .terms import Term, conjuncts, free_vars, pretty


class ProofContext:
    """A list of goals to prove under a list of hypotheses.

    Top-level conjunctions are split; duplicates are dropped while keeping the
    first occurrence so rule application order stays deterministic.
    """

    def __init__(self, goals: Iterable[Term] = (), hyps: Iterable[Term] = (),
                 original_vars: Iterable[Term] | None = None):
        self.goals: list[Term] = _split(goals)
        self.hyps: list[Term] = _split(hyps)
        if original_vars is None:
            original_vars = set()
            for f in self.goals + self.hyps:
                original_vars |= free_vars(f)
        self.original_vars = frozenset(original_vars)

    def copy(self) -> "ProofContext":
        c = ProofContext.__new__(ProofContext)
        c.goals = list(self.goals)
        c.hyps = list(self.hyps)
        c.original_vars = self.original_vars
        return c

    def formulas(self) -> list[Term]:
        return self.hyps + self.goals

    def replace_goal(self, i: int, new: Term) -> None:
        self.goals[i] = new
        self.goals = _split(self.goals)

    def replace_hyp(self, i: int, new: Term) -> None:
        self.hyps[i] = new
        self.hyps = _split(self.hyps)

    def add_hyp(self, h: Term) -> None:
        self.hyps = _split(self.hyps + [h])

    def __eq__(self, other) -> bool:
        return isinstance(other, ProofContext) and self.goals == other.goals and self.hyps == other.hyps

    def __repr__(self) -> str:
        hs = ", ".join(pretty(h) for h in self.hyps)
        gs = ", ".join(pretty(g) for g in self.goals)
        return f"ProofContext(hyps=[{hs}], goals=[{gs}])"


def _split(fs: Iterable[Term]) -> list[Term]:
    out: list[Term] = []
    seen: set = set()
    for f in fs:
        for g in conjuncts(f):
            if g.op == "const" and g.val == 1:
                continue
            if g not in seen:
                seen.add(g)
                out.append(g)
    return out


@dataclass
class TraceEntry:
    stage: str
    rule: str
    target: str
    before: tuple
    after: tuple
    replaced: str = ""
    replacement: str = ""
    scope: int = 0
    goals_after: list | None = None

    def to_json(self) -> dict:
        d = {
            "stage": self.stage, "rule": self.rule, "target": self.target,
            "replaced": self.replaced, "replacement": self.replacement,
            "measure_before": list(self.before), "measure_after": list(self.after),
            "scope": self.scope,
        }
        if self.goals_after is not None:
            d["goals_after"] = self.goals_after
        return d


class RuleTrace:
    """Append-only log of rule applications.

    ``scope`` is the nesting depth: side derivations that decide a rule
    premise are logged one level deeper than the rewrite they guard.
    """

    def __init__(self) -> None:
        self.entries: list[TraceEntry] = []
        self.scope = 0

    def log(self, stage: str, rule: str, target: Term | str, before: tuple, after: tuple,
            replaced: Term | None = None, replacement: Term | None = None,
            goals_after: list | None = None) -> None:
        self.entries.append(TraceEntry(
            stage, rule,
            target if isinstance(target, str) else pretty(target),
            tuple(before), tuple(after),
            "" if replaced is None else pretty(replaced),
            "" if replacement is None else pretty(replacement),
            self.scope, goals_after))

    def nested(self) -> "_Nested":
        return _Nested(self)

    def counts(self) -> Counter:
        return Counter(e.rule for e in self.entries)

    def rules(self) -> list[str]:
        return [e.rule for e in self.entries]

    def measure_violations(self) -> list[TraceEntry]:
        return [e for e in self.entries if not e.after < e.before]

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for e in self.entries:
                fh.write(json.dumps(e.to_json()) + "\n")

    def __len__(self) -> int:
        return len(self.entries)


class _Nested:
    def __init__(self, trace: RuleTrace):
        self.trace = trace

    def __enter__(self):
        self.trace.scope += 1
        return self.trace

    def __exit__(self, *exc):
        self.trace.scope -= 1
        return False


class NullTrace(RuleTrace):
    """A trace that records nothing."""

    def log(self, *args, **kwargs) -> None:
        return None


@dataclass
class Deadline:
    seconds: float | None = None
    start: float = field(default_factory=time.monotonic)

    def check(self, stage: str) -> None:
        if self.seconds is not None and time.monotonic() - self.start > self.seconds:
            raise PipelineTimeout(stage)

    def remaining(self) -> float | None:
        if self.seconds is None:
            return None
        return max(0.0, self.seconds - (time.monotonic() - self.start))
