"""The Problem record shared by the parser, generators and pipeline."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .terms import Term, var


@dataclass
class Problem:
    """Declarations, hypotheses and goals of one verification problem."""

    field: int | None = None
    decls: dict = dataclasses.field(default_factory=dict)  # name -> Sort, in declaration order
    hyps: list = dataclasses.field(default_factory=list)
    goals: list = dataclasses.field(default_factory=list)
    options: dict = dataclasses.field(default_factory=dict)

    def var(self, name: str) -> Term:
        return var(name, self.decls[name])
