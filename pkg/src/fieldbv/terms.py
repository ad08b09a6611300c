"""Many-sorted terms over prime fields, naturals and bitvectors.

Terms are hash-consed: two structurally equal terms are the same object, so
equality is identity and hashing is O(1). The smart constructors check sorts
and keep commutative operators flattened and sorted, which means every term
built through them is already in comm/assoc canonical form.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator

from .errors import NonPrimeField, SortMismatch


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


@dataclass(frozen=True)
class Sort:
    kind: str  # "ff", "nat", "bv" or "bool"
    param: int = 0

    def __str__(self) -> str:
        if self.kind == "ff":
            return f"FF({self.param})"
        if self.kind == "bv":
            return f"BV({self.param})"
        return self.kind.capitalize()

    @property
    def is_ff(self) -> bool:
        return self.kind == "ff"

    @property
    def is_nat(self) -> bool:
        return self.kind == "nat"

    @property
    def is_bv(self) -> bool:
        return self.kind == "bv"

    @property
    def is_bool(self) -> bool:
        return self.kind == "bool"


def FF(p: int) -> Sort:
    if not is_prime(p):
        raise NonPrimeField(p)
    return Sort("ff", p)


def BV(n: int) -> Sort:
    if n < 1:
        raise ValueError(f"bitvector width must be positive, got {n}")
    return Sort("bv", n)


NAT = Sort("nat")
BOOL = Sort("bool")

_TABLE: "weakref.WeakValueDictionary[tuple, Term]" = weakref.WeakValueDictionary()


class Term:
    """An immutable, interned term node.

    ``op`` names the operator, ``args`` holds the children and ``val`` carries
    the payload of leaves (variable name, constant value, placeholder index)
    or the width parameter of ``to_bv``/``trunc``/``zext``.
    """

    __slots__ = ("op", "sort", "args", "val", "_hash", "_key", "__weakref__")

    def __new__(cls, op: str, sort: Sort, args: tuple = (), val=None):
        key = (op, sort, val, args)
        t = _TABLE.get(key)
        if t is not None:
            return t
        t = object.__new__(cls)
        object.__setattr__(t, "op", op)
        object.__setattr__(t, "sort", sort)
        object.__setattr__(t, "args", args)
        object.__setattr__(t, "val", val)
        object.__setattr__(t, "_hash", hash(key))
        object.__setattr__(t, "_key", None)
        _TABLE[key] = t
        return t

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (Term, (self.op, self.sort, self.args, self.val))

    def __repr__(self) -> str:
        return f"Term({to_sexpr(self)})"

    def __str__(self) -> str:
        return to_sexpr(self)

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    @property
    def is_var(self) -> bool:
        return self.op == "var"

    @property
    def is_pvar(self) -> bool:
        return self.op == "pvar"


def _sort_key(s: Sort) -> tuple:
    return (s.kind, s.param)


def order_key(t: Term) -> tuple:
    """Total order used to sort operands: constants, then variables, then compounds."""
    k = t._key
    if k is None:
        if t.op == "const":
            k = (0, _sort_key(t.sort), "", t.val, ())
        elif t.op == "var":
            k = (1, _sort_key(t.sort), t.val, 0, ())
        elif t.op == "pvar":
            k = (2, _sort_key(t.sort), "", t.val, ())
        else:
            k = (3, _sort_key(t.sort), t.op, -1 if t.val is None else t.val,
                 tuple(order_key(a) for a in t.args))
        object.__setattr__(t, "_key", k)
    return k


# ---------------------------------------------------------------- leaves

def var(name: str, sort: Sort) -> Term:
    return Term("var", sort, (), name)


def pvar(index: int) -> Term:
    """A range-analysis placeholder variable over the naturals."""
    return Term("pvar", NAT, (), index)


def const(value: int, sort: Sort = NAT) -> Term:
    value = int(value)
    if sort.is_ff:
        value %= sort.param
    elif sort.is_bv:
        if not 0 <= value < (1 << sort.param):
            raise ValueError(f"constant {value} does not fit in {sort}")
    elif sort.is_nat:
        if value < 0:
            raise ValueError("natural constants must be non-negative")
    elif sort.is_bool:
        value = 1 if value else 0
    return Term("const", sort, (), value)


TRUE = const(1, BOOL)
FALSE = const(0, BOOL)


def nat(value: int) -> Term:
    return const(value, NAT)


# ------------------------------------------------------------ arithmetic

def _same_sort(op: str, args: Iterable[Term]) -> Sort:
    args = list(args)
    s = args[0].sort
    for i, a in enumerate(args):
        if a.sort != s:
            raise SortMismatch(f"{op}: operand sorts {s} and {a.sort} differ", (op, i))
    if s.is_bool:
        raise SortMismatch(f"{op}: arithmetic on Bool", (op,))
    return s


def _nary(op: str, args: tuple) -> Term:
    if not args:
        raise ValueError(f"{op} needs at least one operand")
    s = _same_sort(op, args)
    flat: list[Term] = []
    for a in args:
        if a.op == op:
            flat.extend(a.args)
        else:
            flat.append(a)
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=order_key)
    return Term(op, s, tuple(flat))


def add(*args: Term) -> Term:
    return _nary("add", args)


def mul(*args: Term) -> Term:
    return _nary("mul", args)


def sub(a: Term, b: Term) -> Term:
    s = _same_sort("sub", (a, b))
    return Term("sub", s, (a, b))


def mod(a: Term, b: Term) -> Term:
    s = _same_sort("mod", (a, b))
    if s.is_ff:
        raise SortMismatch("mod is not defined on field elements", ("mod",))
    return Term("mod", s, (a, b))


def max_(a: Term, b: Term) -> Term:
    s = _same_sort("max", (a, b))
    if not s.is_nat:
        raise SortMismatch("max is only defined on naturals", ("max",))
    if order_key(b) < order_key(a):
        a, b = b, a
    return Term("max", s, (a, b))


def ite(c: Term, a: Term, b: Term) -> Term:
    if not c.sort.is_bool:
        raise SortMismatch("ite condition must be Bool", ("ite", 0))
    if a.sort != b.sort:
        raise SortMismatch(f"ite branches have sorts {a.sort} and {b.sort}", ("ite", 1))
    return Term("ite", a.sort, (c, a, b))


# ------------------------------------------------------------ conversions

def to_nat(t: Term) -> Term:
    if not t.sort.is_ff:
        raise SortMismatch(f"to_nat expects a field element, got {t.sort}", ("to_nat", 0))
    return Term("to_nat", NAT, (t,))


def to_bv(n: int, t: Term) -> Term:
    if not t.sort.is_nat:
        raise SortMismatch(f"to_bv expects a natural, got {t.sort}", ("to_bv", 0))
    return Term("to_bv", BV(n), (t,), int(n))


def bv_to_nat(t: Term) -> Term:
    if not t.sort.is_bv:
        raise SortMismatch(f"bv_to_nat expects a bitvector, got {t.sort}", ("bv_to_nat", 0))
    return Term("bv_to_nat", NAT, (t,))


# -------------------------------------------------------- bitvector only

def _bv_binop(op: str, a: Term, b: Term) -> Term:
    s = _same_sort(op, (a, b))
    if not s.is_bv:
        raise SortMismatch(f"{op} expects bitvectors", (op,))
    if order_key(b) < order_key(a):
        a, b = b, a
    return Term(op, s, (a, b))


def bvor(a: Term, b: Term) -> Term:
    return _bv_binop("bvor", a, b)


def bvand(a: Term, b: Term) -> Term:
    return _bv_binop("bvand", a, b)


def bvxor(a: Term, b: Term) -> Term:
    return _bv_binop("bvxor", a, b)


def concat(*args: Term) -> Term:
    """Concatenate bitvectors, most significant part first."""
    if not args:
        raise ValueError("concat needs at least one operand")
    flat: list[Term] = []
    for i, a in enumerate(args):
        if not a.sort.is_bv:
            raise SortMismatch("concat expects bitvectors", ("concat", i))
        if a.op == "concat":
            flat.extend(a.args)
        else:
            flat.append(a)
    if len(flat) == 1:
        return flat[0]
    return Term("concat", BV(sum(a.sort.param for a in flat)), tuple(flat))


def trunc(n: int, t: Term) -> Term:
    """Keep the low ``n`` bits."""
    if not t.sort.is_bv or n > t.sort.param:
        raise SortMismatch(f"cannot truncate {t.sort} to {n} bits", ("trunc", 0))
    if n == t.sort.param:
        return t
    return Term("trunc", BV(n), (t,), int(n))


def zext(n: int, t: Term) -> Term:
    if not t.sort.is_bv or n < t.sort.param:
        raise SortMismatch(f"cannot zero-extend {t.sort} to {n} bits", ("zext", 0))
    if n == t.sort.param:
        return t
    return Term("zext", BV(n), (t,), int(n))


def extract(i: int, t: Term) -> Term:
    """Bit ``i`` of a bitvector as a one-bit vector."""
    if not t.sort.is_bv or not 0 <= i < t.sort.param:
        raise SortMismatch(f"cannot extract bit {i} of {t.sort}", ("extract", 0))
    if t.sort.param == 1:
        return t
    return Term("extract", BV(1), (t,), int(i))


# ---------------------------------------------------------------- formulas

def eq(a: Term, b: Term) -> Term:
    if a.sort != b.sort:
        raise SortMismatch(f"=: operand sorts {a.sort} and {b.sort} differ", ("eq",))
    if order_key(b) < order_key(a):
        a, b = b, a
    return Term("eq", BOOL, (a, b))


def _cmp(op: str, a: Term, b: Term) -> Term:
    s = _same_sort(op, (a, b))
    if not (s.is_nat or s.is_bv):
        raise SortMismatch(f"{op} is only defined on naturals and bitvectors", (op,))
    return Term(op, BOOL, (a, b))


def le(a: Term, b: Term) -> Term:
    return _cmp("le", a, b)


def ge(a: Term, b: Term) -> Term:
    return _cmp("ge", a, b)


def conj(*fs: Term) -> Term:
    flat: list[Term] = []
    for i, f in enumerate(fs):
        if not f.sort.is_bool:
            raise SortMismatch("and expects formulas", ("and", i))
        for g in (f.args if f.op == "and" else (f,)):
            if g is TRUE or g in flat:
                continue
            flat.append(g)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=order_key)
    return Term("and", BOOL, tuple(flat))


def neg(f: Term) -> Term:
    if not f.sort.is_bool:
        raise SortMismatch("not expects a formula", ("not", 0))
    return Term("not", BOOL, (f,))


def conjuncts(f: Term) -> tuple:
    return f.args if f.op == "and" else (f,)


# --------------------------------------------------------------- utilities

_REBUILD: dict[str, Callable[..., Term]] = {
    "add": lambda t, a: add(*a),
    "mul": lambda t, a: mul(*a),
    "sub": lambda t, a: sub(*a),
    "mod": lambda t, a: mod(*a),
    "max": lambda t, a: max_(*a),
    "ite": lambda t, a: ite(*a),
    "to_nat": lambda t, a: to_nat(*a),
    "to_bv": lambda t, a: to_bv(t.val, *a),
    "bv_to_nat": lambda t, a: bv_to_nat(*a),
    "bvor": lambda t, a: bvor(*a),
    "bvand": lambda t, a: bvand(*a),
    "bvxor": lambda t, a: bvxor(*a),
    "concat": lambda t, a: concat(*a),
    "trunc": lambda t, a: trunc(t.val, *a),
    "zext": lambda t, a: zext(t.val, *a),
    "extract": lambda t, a: extract(t.val, *a),
    "eq": lambda t, a: eq(*a),
    "le": lambda t, a: le(*a),
    "ge": lambda t, a: ge(*a),
    "and": lambda t, a: conj(*a),
    "not": lambda t, a: neg(*a),
}


def rebuild(t: Term, args) -> Term:
    """Rebuild ``t`` with new children through the checking constructors."""
    args = tuple(args)
    if args == t.args:
        return t
    return _REBUILD[t.op](t, args)


def map_terms(t: Term, fn: Callable[[Term], Term | None], memo: dict | None = None) -> Term:
    """Bottom-up rewrite. ``fn`` returns a replacement or None to keep the node."""
    if memo is None:
        memo = {}
    hit = memo.get(t)
    if hit is not None:
        return hit
    new = rebuild(t, [map_terms(a, fn, memo) for a in t.args]) if t.args else t
    r = fn(new)
    if r is not None:
        new = r
    memo[t] = new
    return new


def substitute(f: Term, old: Term, new: Term) -> Term:
    """Replace every occurrence of ``old`` in ``f`` by ``new``."""
    if old.sort != new.sort:
        raise SortMismatch(f"cannot replace {old.sort} term by {new.sort} term", ("substitute",))
    memo: dict = {}

    def go(t: Term) -> Term:
        if t is old:
            return new
        hit = memo.get(t)
        if hit is not None:
            return hit
        r = rebuild(t, [go(a) for a in t.args]) if t.args else t
        memo[t] = r
        return r

    return go(f)


def substitute_map(f: Term, mapping: dict) -> Term:
    """Simultaneous replacement of several subterms."""
    if not mapping:
        return f
    for k, v in mapping.items():
        if k.sort != v.sort:
            raise SortMismatch(f"cannot replace {k.sort} term by {v.sort} term", ("substitute",))
    memo: dict = {}

    def go(t: Term) -> Term:
        r = mapping.get(t)
        if r is not None:
            return r
        hit = memo.get(t)
        if hit is not None:
            return hit
        r = rebuild(t, [go(a) for a in t.args]) if t.args else t
        memo[t] = r
        return r

    return go(f)


def postorder(t: Term) -> Iterator[Term]:
    """Distinct subterms, children before parents, left to right."""
    seen: set = set()
    stack: list = [(t, False)]
    while stack:
        node, done = stack.pop()
        if done:
            yield node
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        for a in reversed(node.args):
            if a not in seen:
                stack.append((a, False))


def subterms(t: Term) -> Iterator[Term]:
    return postorder(t)


def subterm_occurs(f: Term, s: Term) -> bool:
    return any(u is s for u in postorder(f))


def free_vars(t: Term) -> set:
    return {u for u in postorder(t) if u.op == "var"}


def has_pvars(t: Term) -> bool:
    return any(u.op == "pvar" for u in postorder(t))


def size(t: Term) -> int:
    """Number of nodes counted as a tree (shared subterms counted each time)."""
    return 1 + sum(size(a) for a in t.args)


def sort_check(t: Term, path: tuple = ()) -> Sort:
    """Re-derive the sort of ``t`` from scratch, raising SortMismatch on any violation.

    The smart constructors already reject ill-sorted input; this is for terms
    assembled directly through ``Term(...)``.
    """
    arg_sorts = [sort_check(a, path + (i,)) for i, a in enumerate(t.args)]
    op = t.op
    if op in ("var", "pvar", "const"):
        return t.sort

    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise SortMismatch(f"{op}: {msg}", path)

    if op in ("add", "mul", "sub", "mod", "max"):
        need(len(arg_sorts) >= 2, "needs two or more operands")
        need(all(s == arg_sorts[0] for s in arg_sorts), "operand sorts differ")
        need(not arg_sorts[0].is_bool, "arithmetic on Bool")
        need(op != "mod" or not arg_sorts[0].is_ff, "mod on field elements")
        need(op != "max" or arg_sorts[0].is_nat, "max outside naturals")
        need(t.sort == arg_sorts[0], "result sort")
        return t.sort
    if op == "ite":
        need(arg_sorts[0].is_bool, "condition must be Bool")
        need(arg_sorts[1] == arg_sorts[2] == t.sort, "branch sorts differ")
        return t.sort
    if op == "to_nat":
        need(arg_sorts[0].is_ff and t.sort.is_nat, "expects a field element")
        return t.sort
    if op == "to_bv":
        need(arg_sorts[0].is_nat and t.sort == Sort("bv", t.val), "expects a natural")
        return t.sort
    if op == "bv_to_nat":
        need(arg_sorts[0].is_bv and t.sort.is_nat, "expects a bitvector")
        return t.sort
    if op in ("bvor", "bvand", "bvxor"):
        need(arg_sorts[0].is_bv and arg_sorts[0] == arg_sorts[1] == t.sort, "expects equal-width bitvectors")
        return t.sort
    if op == "concat":
        need(all(s.is_bv for s in arg_sorts), "expects bitvectors")
        need(t.sort.param == sum(s.param for s in arg_sorts), "width")
        return t.sort
    if op in ("trunc", "zext"):
        need(arg_sorts[0].is_bv and t.sort == Sort("bv", t.val), "expects a bitvector")
        need(t.val <= arg_sorts[0].param if op == "trunc" else t.val >= arg_sorts[0].param, "width")
        return t.sort
    if op == "extract":
        need(arg_sorts[0].is_bv and t.sort == Sort("bv", 1) and 0 <= t.val < arg_sorts[0].param, "bit index")
        return t.sort
    if op == "eq":
        need(arg_sorts[0] == arg_sorts[1], "operand sorts differ")
        return BOOL
    if op in ("le", "ge"):
        need(arg_sorts[0] == arg_sorts[1] and (arg_sorts[0].is_nat or arg_sorts[0].is_bv),
             "expects naturals or bitvectors of one sort")
        return BOOL
    if op in ("and", "not"):
        need(all(s.is_bool for s in arg_sorts), "expects formulas")
        return BOOL
    raise SortMismatch(f"unknown operator {op}", path)


def normalize(f: Term, *, group_subtractions: bool = True, orient: bool = True) -> Term:
    """Canonical form up to associativity and commutativity.

    ``group_subtractions`` rewrites field sums ``a + (b - c)`` to ``(a + b) - c``
    so positive summands accumulate before the subtraction; ``orient`` turns
    ``a >= b`` into ``b <= a``.
    """

    def step(t: Term) -> Term | None:
        if orient and t.op == "ge":
            return le(t.args[1], t.args[0])
        if group_subtractions and t.op == "add" and t.sort.is_ff:
            return _group(t)
        return None

    def _group(t: Term) -> Term | None:
        subs = [a for a in t.args if a.op == "sub"]
        if not subs:
            return None
        s = subs[0]
        rest = [a for a in t.args if a is not s]
        inner = add(s.args[0], *rest)
        if inner.op == "add":
            inner = _group(inner) or inner
        return sub(inner, s.args[1])

    return map_terms(f, step)


# ------------------------------------------------------------------ printing

_OPNAME = {
    "add": "+", "mul": "*", "sub": "-", "mod": "mod", "max": "max", "ite": "ite",
    "to_nat": "to-nat", "to_bv": "to-bv", "bv_to_nat": "bv-to-nat",
    "bvor": "bvor", "bvand": "bvand", "bvxor": "bvxor", "concat": "concat",
    "trunc": "trunc", "zext": "zext", "extract": "extract", "eq": "=", "le": "<=", "ge": ">=",
    "and": "and", "not": "not",
}


def _infers(t: Term) -> bool:
    """Whether the printed form of ``t`` determines its own sort."""
    if t.op == "const":
        return not (t.sort.is_nat or t.sort.is_ff)
    if t.op in ("add", "mul", "sub", "mod", "max"):
        return any(_infers(a) for a in t.args)
    if t.op == "ite":
        return _infers(t.args[1]) or _infers(t.args[2])
    return True


def to_sexpr(t: Term, known: bool = False) -> str:
    """Print a term in the problem-file syntax.

    ``known`` says whether the surrounding context already fixes the sort, in
    which case field constants are printed as bare numerals.
    """
    op = t.op
    if op == "var":
        return t.val
    if op == "pvar":
        return f"?w{t.val}"
    if op == "const":
        s = t.sort
        if s.is_bool:
            return "true" if t.val else "false"
        if s.is_bv:
            return f"(bv {t.val} {s.param})"
        if s.is_ff and not known:
            return f"(ff {t.val})"
        return str(t.val)
    name = _OPNAME[op]
    if op in ("add", "mul", "sub", "mod", "max"):
        k = known or any(_infers(a) for a in t.args)
        inner = " ".join(to_sexpr(a, k) for a in t.args)
    elif op == "ite":
        k = known or _infers(t.args[1]) or _infers(t.args[2])
        inner = " ".join([to_sexpr(t.args[0])] + [to_sexpr(a, k) for a in t.args[1:]])
    elif op in ("eq", "le", "ge"):
        k = any(_infers(a) for a in t.args)
        inner = " ".join(to_sexpr(a, k) for a in t.args)
    elif op == "to_nat":
        inner = to_sexpr(t.args[0], True)
    elif op in ("to_bv", "trunc", "zext", "extract"):
        inner = f"{t.val} {to_sexpr(t.args[0], True)}"
    else:
        inner = " ".join(to_sexpr(a, True) for a in t.args)
    return f"({name} {inner})"


def pretty(t: Term) -> str:
    """Infix rendering for traces and reports."""
    op = t.op
    if op == "var":
        return t.val
    if op == "pvar":
        return f"w{t.val}"
    if op == "const":
        if t.sort.is_bool:
            return "true" if t.val else "false"
        return str(t.val)
    a = [pretty(x) for x in t.args]
    infix = {"add": " + ", "mul": " * ", "sub": " - ", "mod": " mod ", "eq": " = ",
             "le": " <= ", "ge": " >= ", "and": " & ", "bvor": " | ", "bvand": " & ", "bvxor": " ^ "}
    if op in infix:
        return "(" + infix[op].join(a) + ")"
    if op == "to_nat":
        return f"toNat({a[0]})"
    if op == "to_bv":
        return f"toBV{t.val}({a[0]})"
    if op == "bv_to_nat":
        return f"bvToNat({a[0]})"
    if op in ("trunc", "zext"):
        return f"{op}{t.val}({a[0]})"
    if op == "extract":
        return f"{a[0]}[{t.val}]"
    if op == "ite":
        return f"ite({a[0]}, {a[1]}, {a[2]})"
    if op == "max":
        return f"max({a[0]}, {a[1]})"
    if op == "concat":
        return "concat(" + ", ".join(a) + ")"
    if op == "not":
        return f"!{a[0]}"
    raise ValueError(op)
