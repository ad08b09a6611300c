"""Compare the numba and numpy oracle kernels on full enumerations.

    python benchmarks/bench_oracle.py [--repeat 3]

Each workload is valid, so both kernels walk the whole search space.
"""
from __future__ import annotations

import argparse
import time

from fieldbv.benchgen import gen_jolt_or
from fieldbv.oracle import _kernels, check_validity
from fieldbv.sexpr import parse_problem

WORKLOADS = {
    "ff101-3vars": """
        (set-field 101) (declare-ff x y z)
        (goal (<= (to-nat (+ (* x y) (- z x))) 100))
        (goal (= (* (+ x y) z) (+ (* x z) (* y z))))
    """,
    "ff1021-2vars-ite": """
        (set-field 1021) (declare-ff a b)
        (goal (<= (ite (<= (to-nat a) (to-nat b)) (- (to-nat b) (to-nat a)) (- (to-nat a) (to-nat b))) 1020))
    """,
}


def _time(problem, backend: str, repeat: int) -> tuple[float, int]:
    best = float("inf")
    checked = 0
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = check_validity(problem, budget=1 << 24, backend=backend)
        best = min(best, time.perf_counter() - t0)
        assert res.valid, "benchmark workloads must be valid"
        checked = res.checked
    return best, checked


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    problems = {name: parse_problem(text) for name, text in WORKLOADS.items()}
    problems["jolt-or-B6-hyps"] = gen_jolt_or(6, 67)
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if "numba" in backends:  # compile outside the timed region
        check_validity(problems["ff101-3vars"], budget=1 << 24, backend="numba")
    print(f"{'workload':<20} {'assignments':>12} " + " ".join(f"{b + ' s':>10}" for b in backends)
          + ("   speedup" if len(backends) == 2 else ""))
    for name, prob in problems.items():
        times = {}
        checked = 0
        for b in backends:
            times[b], checked = _time(prob, b, args.repeat)
        row = f"{name:<20} {checked:>12} " + " ".join(f"{times[b]:>10.4f}" for b in backends)
        if len(backends) == 2:
            row += f"   {times['numpy'] / times['numba']:>6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
