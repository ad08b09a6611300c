"""Reference evaluator: the ground-truth semantics of every operator."""
from __future__ import annotations

from ..errors import Unsupported
from ..terms import Term


def eval_term(t: Term, env: dict, _memo: dict | None = None) -> int:
    """Evaluate ``t`` under ``env`` (variable name to int).

    Field values live in [0, p), bitvectors in [0, 2^N), booleans are 0/1.
    Natural subtraction truncates at zero and ``x mod 0 = x`` in both the
    natural and bitvector theories.
    """
    memo = {} if _memo is None else _memo
    hit = memo.get(t)
    if hit is not None:
        return hit
    op = t.op
    s = t.sort
    if op == "const":
        r = t.val
    elif op == "var":
        try:
            r = env[t.val]
        except KeyError:
            raise Unsupported(f"no value for variable {t.val}") from None
    elif op == "pvar":
        r = env[f"?w{t.val}"]
    else:
        a = [eval_term(x, env, memo) for x in t.args] if op != "ite" else None
        if op == "add":
            r = sum(a)
            r = _wrap(r, s)
        elif op == "mul":
            r = 1
            for v in a:
                r *= v
            r = _wrap(r, s)
        elif op == "sub":
            r = a[0] - a[1]
            r = max(r, 0) if s.is_nat else _wrap(r, s)
        elif op == "mod":
            r = a[0] if a[1] == 0 else a[0] % a[1]
        elif op == "max":
            r = max(a)
        elif op == "ite":
            c = eval_term(t.args[0], env, memo)
            r = eval_term(t.args[1] if c else t.args[2], env, memo)
        elif op in ("to_nat", "bv_to_nat", "zext"):
            r = a[0]
        elif op in ("to_bv", "trunc"):
            r = a[0] & ((1 << t.val) - 1)
        elif op == "extract":
            r = (a[0] >> t.val) & 1
        elif op == "bvor":
            r = a[0] | a[1]
        elif op == "bvand":
            r = a[0] & a[1]
        elif op == "bvxor":
            r = a[0] ^ a[1]
        elif op == "concat":
            r = 0
            for x, v in zip(t.args, a):
                r = (r << x.sort.param) | v
        elif op == "eq":
            r = int(a[0] == a[1])
        elif op == "le":
            r = int(a[0] <= a[1])
        elif op == "ge":
            r = int(a[0] >= a[1])
        elif op == "and":
            r = int(all(a))
        elif op == "not":
            r = 1 - a[0]
        else:
            raise Unsupported(f"cannot evaluate operator {op}")
    memo[t] = r
    return r


def _wrap(v: int, s) -> int:
    if s.is_ff:
        return v % s.param
    if s.is_bv:
        return v & ((1 << s.param) - 1)
    return v


def holds(f: Term, env: dict) -> bool:
    return bool(eval_term(f, env))
