"""Enumeration kernels: a stack machine run over every assignment.

Two interchangeable backends share one instruction set. The numba backend
stops at the first falsifying assignment; the numpy backend evaluates blocks
of assignments at once. Set ``FIELDBV_NUMBA=0`` to force the numpy path.
"""
from __future__ import annotations

import os

import numpy as np

(CONST, LOAD, ADD, MUL, SUB, MOD, MAX, ITE, EQ, LE, GE, AND, NOT,
 BOR, BAND, BXOR, SHLOR, REDUCE, STORE, BIT, CUT) = range(21)
# CUT pops a top-level hypothesis value and ends the row with 0 when it is false


def _numba_requested() -> bool:
    return os.environ.get("FIELDBV_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


try:
    if not _numba_requested():
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def set_backend(name: str) -> None:
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not available or disabled by FIELDBV_NUMBA=0")
    BACKEND = name


def _run_py(code, args, vals, stack):
    """Shared interpreter body, compiled by numba or used for a single row."""
    sp = 0
    for k in range(code.shape[0]):
        op = code[k]
        x = args[k]
        if op == CONST:
            stack[sp] = x
            sp += 1
        elif op == LOAD:
            stack[sp] = vals[x]
            sp += 1
        elif op == STORE:
            sp -= 1
            vals[x] = stack[sp]
        elif op == CUT:
            sp -= 1
            if stack[sp] == 0:
                return 0
        elif op == NOT:
            stack[sp - 1] = 1 - stack[sp - 1]
        elif op == REDUCE:
            stack[sp - 1] = stack[sp - 1] % x
        elif op == BIT:
            stack[sp - 1] = (stack[sp - 1] >> x) & 1
        elif op == ITE:
            sp -= 2
            if stack[sp - 1] != 0:
                stack[sp - 1] = stack[sp]
            else:
                stack[sp - 1] = stack[sp + 1]
        else:
            sp -= 1
            a = stack[sp - 1]
            b = stack[sp]
            if op == ADD:
                r = a + b
                if x > 0:
                    r = r % x
            elif op == MUL:
                r = a * b
                if x > 0:
                    r = r % x
            elif op == SUB:
                r = a - b
                if x > 0:
                    r = r % x
                elif r < 0:
                    r = 0
            elif op == MOD:
                r = a if b == 0 else a % b
            elif op == MAX:
                r = a if a >= b else b
            elif op == EQ:
                r = 1 if a == b else 0
            elif op == LE:
                r = 1 if a <= b else 0
            elif op == GE:
                r = 1 if a >= b else 0
            elif op == AND:
                r = 1 if (a != 0 and b != 0) else 0
            elif op == BOR:
                r = a | b
            elif op == BAND:
                r = a & b
            elif op == BXOR:
                r = a ^ b
            else:  # SHLOR
                r = (a << x) | b
            stack[sp - 1] = r
    return stack[0]


def _first_witness_py(code, args, lows, sizes, nslots, depth, start, stop):
    nfree = lows.shape[0]
    vals = np.zeros(nslots, dtype=np.int64)
    stack = np.zeros(depth + 1, dtype=np.int64)
    digits = np.zeros(nfree, dtype=np.int64)
    r = start
    for j in range(nfree - 1, -1, -1):
        digits[j] = r % sizes[j]
        vals[j] = lows[j] + digits[j]
        r //= sizes[j]
    for idx in range(start, stop):
        if _run(code, args, vals, stack) != 0:
            return idx
        # odometer step, last variable fastest
        j = nfree - 1
        while j >= 0:
            digits[j] += 1
            if digits[j] < sizes[j]:
                vals[j] = lows[j] + digits[j]
                break
            digits[j] = 0
            vals[j] = lows[j]
            j -= 1
    return -1


if HAVE_NUMBA:
    _run = njit(cache=True)(_run_py)
    _first_witness_numba = njit(cache=True)(_first_witness_py)
else:  # pragma: no cover
    _run = _run_py
    _first_witness_numba = None


def _eval_block(code, args, cols, nslots, n):
    """Vectorised interpreter over ``n`` assignments held column-wise in ``cols``.

    Returns the result column for all ``n`` rows. Rows dropped by CUT read 0.
    """
    vals = list(cols) + [None] * (nslots - len(cols))
    stack: list = []
    rows = None  # indices of the rows still alive, None while all are
    n0 = n
    for op, x in zip(code.tolist(), args.tolist()):
        if op == CONST:
            stack.append(np.full(n, x, dtype=np.int64))
        elif op == LOAD:
            stack.append(vals[x])
        elif op == STORE:
            vals[x] = stack.pop()
        elif op == CUT:
            keep = np.flatnonzero(stack.pop())
            if keep.size < n:
                rows = keep if rows is None else rows[keep]
                vals = [None if v is None else v[keep] for v in vals]
                n = keep.size
                if n == 0:
                    break
        elif op == NOT:
            stack[-1] = 1 - stack[-1]
        elif op == REDUCE:
            stack[-1] = np.mod(stack[-1], x)
        elif op == BIT:
            stack[-1] = (stack[-1] >> x) & 1
        elif op == ITE:
            e = stack.pop()
            t = stack.pop()
            c = stack.pop()
            stack.append(np.where(c != 0, t, e))
        else:
            b = stack.pop()
            a = stack.pop()
            if op == ADD:
                r = a + b
                if x > 0:
                    r = np.mod(r, x)
            elif op == MUL:
                r = a * b
                if x > 0:
                    r = np.mod(r, x)
            elif op == SUB:
                r = a - b
                r = np.mod(r, x) if x > 0 else np.maximum(r, 0)
            elif op == MOD:
                safe = np.where(b == 0, 1, b)
                r = np.where(b == 0, a, np.mod(a, safe))
            elif op == MAX:
                r = np.maximum(a, b)
            elif op == EQ:
                r = (a == b).astype(np.int64)
            elif op == LE:
                r = (a <= b).astype(np.int64)
            elif op == GE:
                r = (a >= b).astype(np.int64)
            elif op == AND:
                r = ((a != 0) & (b != 0)).astype(np.int64)
            elif op == BOR:
                r = a | b
            elif op == BAND:
                r = a & b
            elif op == BXOR:
                r = a ^ b
            else:
                r = (a << x) | b
            stack.append(r)
    if rows is None:
        return stack[0]
    out = np.zeros(n0, dtype=np.int64)
    if n:
        out[rows] = stack[0]
    return out


def _first_witness_numpy(code, args, lows, sizes, nslots, depth, start, stop, block=1 << 16):
    nfree = lows.shape[0]
    for lo in range(start, stop, block):
        hi = min(stop, lo + block)
        idx = np.arange(lo, hi, dtype=np.int64)
        cols = [None] * nfree
        r = idx
        for j in range(nfree - 1, -1, -1):
            cols[j] = lows[j] + r % sizes[j]
            r = r // sizes[j]
        flags = _eval_block(code, args, cols, nslots, hi - lo)
        hits = np.flatnonzero(flags)
        if hits.size:
            return lo + int(hits[0])
    return -1


def first_witness(code, args, lows, sizes, nslots, depth, total, backend: str | None = None) -> int:
    """Index of the first assignment on which the program yields non-zero, or -1."""
    backend = backend or BACKEND
    if backend == "numba":
        return int(_first_witness_numba(code, args, lows, sizes, nslots, depth, 0, total))
    return _first_witness_numpy(code, args, lows, sizes, nslots, depth, 0, total)
