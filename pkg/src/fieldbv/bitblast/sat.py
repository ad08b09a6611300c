"""A small CDCL SAT solver: two watched literals, 1UIP learning, VSIDS, Luby restarts."""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field


@dataclass
class SatResult:
    status: str  # "sat", "unsat" or "unknown"
    model: dict = field(default_factory=dict)  # var -> bool
    conflicts: int = 0
    decisions: int = 0


def _luby(i: int) -> int:
    """The Luby restart sequence 1, 1, 2, 1, 1, 2, 4, ... (0-based)."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class Solver:
    def __init__(self, nvars: int = 0):
        self.n = 0
        self.assign: list = [0]
        self.level: list = [0]
        self.reason: list = [None]
        self.activity: list = [0.0]
        self.phase: list = [False]
        self.watches: list = [[], []]
        self.trail: list = []
        self.trail_lim: list = []
        self.qhead = 0
        self.heap: list = []
        self.inc = 1.0
        self.ok = True
        self.clauses: list = []
        self.learnts: list = []
        self.ensure(nvars)

    def ensure(self, n: int) -> None:
        while self.n < n:
            self.n += 1
            self.assign.append(0)
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.phase.append(False)
            self.watches.append([])
            self.watches.append([])
            heapq.heappush(self.heap, (0.0, self.n))

    @staticmethod
    def _wi(lit: int) -> int:
        return 2 * lit if lit > 0 else -2 * lit + 1

    def value(self, lit: int) -> int:
        v = self.assign[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def add_clause(self, lits) -> bool:
        if not self.ok:
            return False
        seen = set()
        out = []
        for l in lits:
            self.ensure(abs(l))
            if -l in seen:
                return True
            if l in seen:
                continue
            v = self.value(l) if not self.trail_lim else 0
            if v == 1:
                return True
            if v == -1:
                continue
            seen.add(l)
            out.append(l)
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            self._enqueue(out[0], None)
            if self._propagate() is not None:
                self.ok = False
                return False
            return True
        self.clauses.append(out)
        self.watches[self._wi(-out[0])].append(out)
        self.watches[self._wi(-out[1])].append(out)
        return True

    def _enqueue(self, lit: int, reason) -> None:
        v = lit if lit > 0 else -lit
        self.assign[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self):
        assign = self.assign
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = -p
            wl = watches[2 * p if p > 0 else -2 * p + 1]
            i = j = 0
            n = len(wl)
            while i < n:
                c = wl[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                fv = assign[first] if first > 0 else -assign[-first]
                if fv == 1:
                    wl[j] = c
                    j += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    l = c[k]
                    lv = assign[l] if l > 0 else -assign[-l]
                    if lv != -1:
                        c[1], c[k] = l, false_lit
                        watches[2 * -l if -l > 0 else 2 * l + 1].append(c)
                        found = True
                        break
                if found:
                    continue
                wl[j] = c
                j += 1
                if fv == -1:
                    while i < n:
                        wl[j] = wl[i]
                        j += 1
                        i += 1
                    del wl[j:]
                    return c
                self._enqueue(first, c)
            del wl[j:]
        return None

    def _bump(self, v: int) -> None:
        self.activity[v] += self.inc
        if self.activity[v] > 1e100:
            for k in range(1, self.n + 1):
                self.activity[k] *= 1e-100
            self.inc *= 1e-100
            self.heap = [(-self.activity[k], k) for k in range(1, self.n + 1) if self.assign[k] == 0]
            heapq.heapify(self.heap)
        if self.assign[v] == 0:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, confl):
        seen = [False] * (self.n + 1)
        learnt = [0]
        counter = 0
        p = None
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        c = confl
        while True:
            for q in (c if p is None else c[1:]):
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            v = abs(p)
            c = self.reason[v]
            seen[v] = False
            counter -= 1
            if counter == 0:
                break
            # reason clauses keep the implied literal first
            if c[0] != p:
                k = c.index(p)
                c[0], c[k] = c[k], c[0]
        learnt[0] = -p
        # minimise: drop literals implied by others in the clause
        keep = [learnt[0]]
        marks = {abs(l) for l in learnt}
        for l in learnt[1:]:
            r = self.reason[abs(l)]
            if r is None or any(abs(x) not in marks and self.level[abs(x)] > 0 for x in r if abs(x) != abs(l)):
                keep.append(l)
        learnt = keep
        if len(learnt) == 1:
            bt = 0
        else:
            mi = max(range(1, len(learnt)), key=lambda k: self.level[abs(learnt[k])])
            learnt[1], learnt[mi] = learnt[mi], learnt[1]
            bt = self.level[abs(learnt[1])]
        return learnt, bt

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        for k in range(len(self.trail) - 1, start - 1, -1):
            lit = self.trail[k]
            v = abs(lit)
            self.phase[v] = lit > 0
            self.assign[v] = 0
            self.reason[v] = None
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _decide(self) -> int:
        heap = self.heap
        while heap:
            act, v = heapq.heappop(heap)
            if self.assign[v] == 0 and -act == self.activity[v]:
                return v if self.phase[v] else -v
        for v in range(1, self.n + 1):
            if self.assign[v] == 0:
                return v if self.phase[v] else -v
        return 0

    def solve(self, deadline: float | None = None, max_conflicts: int | None = None) -> SatResult:
        if not self.ok:
            return SatResult("unsat")
        if self._propagate() is not None:
            self.ok = False
            return SatResult("unsat")
        conflicts = decisions = 0
        restart_i = 0
        budget = 100 * _luby(restart_i)
        since = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                since += 1
                if not self.trail_lim:
                    self.ok = False
                    return SatResult("unsat", conflicts=conflicts, decisions=decisions)
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self.watches[self._wi(-learnt[0])].append(learnt)
                    self.watches[self._wi(-learnt[1])].append(learnt)
                    self._enqueue(learnt[0], learnt)
                self.inc *= 1.0 / 0.95
                if conflicts % 256 == 0:
                    if deadline is not None and time.monotonic() > deadline:
                        self._cancel_until(0)
                        return SatResult("unknown", conflicts=conflicts, decisions=decisions)
                    if max_conflicts is not None and conflicts >= max_conflicts:
                        self._cancel_until(0)
                        return SatResult("unknown", conflicts=conflicts, decisions=decisions)
                continue
            if since >= budget:
                since = 0
                restart_i += 1
                budget = 100 * _luby(restart_i)
                self._cancel_until(0)
                continue
            lit = self._decide()
            if lit == 0:
                model = {v: self.assign[v] == 1 for v in range(1, self.n + 1)}
                self._cancel_until(0)
                return SatResult("sat", model, conflicts, decisions)
            decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)


def solve_cnf(nvars: int, clauses, deadline: float | None = None) -> SatResult:
    s = Solver(nvars)
    for c in clauses:
        if not s.add_clause(c):
            return SatResult("unsat")
    return s.solve(deadline)
