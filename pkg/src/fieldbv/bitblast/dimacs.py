"""DIMACS CNF export and import of external solver answers."""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile

from .sat import SatResult


def to_dimacs(nvars: int, clauses) -> str:
    lines = [f"p cnf {nvars} {len(clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in clauses]
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> SatResult:
    """Read ``s``/``v`` lines as printed by SAT competition solvers."""
    status = "unknown"
    model: dict = {}
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("s "):
            word = line[2:].strip().upper()
            if word == "SATISFIABLE":
                status = "sat"
            elif word == "UNSATISFIABLE":
                status = "unsat"
        elif line.startswith("v "):
            for tok in line[2:].split():
                lit = int(tok)
                if lit:
                    model[abs(lit)] = lit > 0
    return SatResult(status, model)


def run_external(command: str, nvars: int, clauses, timeout: float | None = None) -> SatResult:
    """Run ``command <file.cnf>`` and parse its answer."""
    fd, path = tempfile.mkstemp(suffix=".cnf")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(to_dimacs(nvars, clauses))
        try:
            proc = subprocess.run(shlex.split(command) + [path], capture_output=True, text=True,
                                  timeout=timeout)
        except subprocess.TimeoutExpired:
            return SatResult("unknown")
        return parse_model(proc.stdout)
    finally:
        os.unlink(path)
