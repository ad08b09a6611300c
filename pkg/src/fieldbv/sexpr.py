"""Problem files: an s-expression syntax with one prime field per file.

    (set-field 7)
    (declare-ff x y)
    (declare-bv 3 v)
    (declare-nat n)
    (set-option :case-splits false)
    (assert-hyp (<= (to-nat x) 1))
    (goal (= (bvor v v) (to-bv 3 (to-nat x))))

Bare numerals take the sort their context demands and default to naturals.
``(ff v)`` and ``(bv v w)`` spell constants whose sort cannot be inferred.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import terms as T
from .errors import ParseError, SortMismatch
from .problem import Problem
from .terms import BOOL, NAT, Sort, Term

_TOKEN = re.compile(r"\s+|;[^\n]*|(\()|(\))|([^\s();]+)")


@dataclass
class Atom:
    text: str
    line: int
    col: int


@dataclass
class SList:
    items: list
    line: int
    col: int


def tokenize(text: str):
    """Yield (kind, text, line, col) with kind one of '(' ')' 'atom'."""
    line, line_start = 1, 0
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:  # unreachable: every character matches some branch
            raise ParseError(line, pos - line_start + 1, f"unexpected character {text[pos]!r}")
        col = pos - line_start + 1
        if m.group(1):
            yield "(", "(", line, col
        elif m.group(2):
            yield ")", ")", line, col
        elif m.group(3):
            yield "atom", m.group(3), line, col
        chunk = m.group(0)
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()


def read_all(text: str) -> list:
    """Read every top-level s-expression."""
    stack: list = []
    out: list = []
    for kind, tok, line, col in tokenize(text):
        if kind == "(":
            stack.append(SList([], line, col))
        elif kind == ")":
            if not stack:
                raise ParseError(line, col, "unbalanced ')'")
            done = stack.pop()
            (stack[-1].items if stack else out).append(done)
        else:
            a = Atom(tok, line, col)
            if not stack:
                raise ParseError(line, col, f"atom {tok!r} outside a command")
            stack[-1].items.append(a)
    if stack:
        s = stack[-1]
        raise ParseError(s.line, s.col, "unclosed '('")
    return out


def _int(x, what: str) -> int:
    if isinstance(x, Atom) and re.fullmatch(r"\d+", x.text):
        return int(x.text)
    raise ParseError(x.line, x.col, f"expected {what}")


def _head(x: SList) -> str:
    if not x.items or not isinstance(x.items[0], Atom):
        raise ParseError(x.line, x.col, "expected an operator")
    return x.items[0].text


_ARITH = {"+": T.add, "*": T.mul, "-": T.sub, "mod": T.mod, "max": T.max_}
_BVOP = {"bvor": T.bvor, "bvand": T.bvand, "bvxor": T.bvxor}
_CMP = {"=": T.eq, "<=": T.le, ">=": T.ge}
_ARITY = {"-": 2, "mod": 2, "max": 2, "ite": 3, "to-nat": 1, "to-bv": 2, "bv-to-nat": 1,
          "bvor": 2, "bvand": 2, "bvxor": 2, "trunc": 2, "zext": 2, "extract": 2,
          "=": 2, "<=": 2, ">=": 2, "not": 1, "ff": 1, "bv": 2}


class _Elaborator:
    def __init__(self, problem: Problem):
        self.p = problem

    def err(self, x, msg: str) -> ParseError:
        return ParseError(x.line, x.col, msg)

    def field_sort(self, x) -> Sort:
        if self.p.field is None:
            raise self.err(x, "field elements used before set-field")
        return T.FF(self.p.field)

    def sort_of(self, x) -> Sort | None:
        """The sort ``x`` has on its own, or None if its context decides."""
        if isinstance(x, Atom):
            t = x.text
            if re.fullmatch(r"\d+", t):
                return None
            if t in ("true", "false"):
                return BOOL
            if re.fullmatch(r"\?w\d+", t):
                return NAT
            if t not in self.p.decls:
                raise self.err(x, f"undeclared variable {t!r}")
            return self.p.decls[t]
        h = _head(x)
        args = x.items[1:]
        if h == "ff":
            return self.field_sort(x)
        if h == "bv":
            return T.BV(_int(args[1], "a bit width")) if len(args) == 2 else None
        if h in _ARITH or h in _BVOP:
            for a in args:
                s = self.sort_of(a)
                if s is not None:
                    return s
            return None
        if h == "ite":
            return self.sort_of(args[1]) or self.sort_of(args[2]) if len(args) == 3 else None
        if h in ("to-nat", "bv-to-nat"):
            return NAT
        if h in ("to-bv", "trunc", "zext"):
            return T.BV(_int(args[0], "a bit width")) if args else None
        if h == "extract":
            return T.BV(1)
        if h == "concat":
            ws = [self.sort_of(a) for a in args]
            return T.BV(sum(s.param for s in ws)) if all(s is not None and s.is_bv for s in ws) else None
        if h in _CMP or h in ("and", "not"):
            return BOOL
        raise self.err(x, f"unknown operator {h!r}")

    def term(self, x, expected: Sort | None = None) -> Term:
        if isinstance(x, Atom):
            t = x.text
            if re.fullmatch(r"\d+", t):
                s = expected or NAT
                if s.is_bool:
                    raise self.err(x, f"numeral {t} used as a formula")
                try:
                    return T.const(int(t), s)
                except ValueError as e:
                    raise self.err(x, str(e)) from None
            if t == "true":
                return T.TRUE
            if t == "false":
                return T.FALSE
            if re.fullmatch(r"\?w\d+", t):
                return T.pvar(int(t[2:]))
            if t not in self.p.decls:
                raise self.err(x, f"undeclared variable {t!r}")
            return T.var(t, self.p.decls[t])
        h = _head(x)
        args = x.items[1:]
        want = _ARITY.get(h)
        if want is not None and len(args) != want:
            raise self.err(x, f"{h} expects {want} arguments, got {len(args)}")
        try:
            return self._compound(x, h, args, expected)
        except SortMismatch as e:
            raise SortMismatch(f"{e.msg} in {h!r} at {x.line}:{x.col}", e.path) from None

    def _compound(self, x, h, args, expected):
        if h == "ff":
            return T.const(_int(args[0], "a field constant"), self.field_sort(x))
        if h == "bv":
            try:
                return T.const(_int(args[0], "a bitvector value"), T.BV(_int(args[1], "a bit width")))
            except ValueError as e:
                raise self.err(x, str(e)) from None
        if h in _ARITH or h in _BVOP:
            if len(args) < 2:
                raise self.err(x, f"{h} expects at least 2 arguments")
            s = self.sort_of(x) or expected or NAT
            fn = _ARITH.get(h) or _BVOP[h]
            return fn(*[self.term(a, s) for a in args])
        if h == "ite":
            s = self.sort_of(x) or expected or NAT
            return T.ite(self.term(args[0], BOOL), self.term(args[1], s), self.term(args[2], s))
        if h == "to-nat":
            return T.to_nat(self.term(args[0], self.sort_of(args[0]) or self.field_sort(x)))
        if h == "bv-to-nat":
            return T.bv_to_nat(self.term(args[0]))
        if h == "to-bv":
            return T.to_bv(_int(args[0], "a bit width"), self.term(args[1], NAT))
        if h in ("trunc", "zext"):
            fn = T.trunc if h == "trunc" else T.zext
            return fn(_int(args[0], "a bit width"), self.term(args[1]))
        if h == "extract":
            return T.extract(_int(args[0], "a bit index"), self.term(args[1]))
        if h == "concat":
            return T.concat(*[self.term(a) for a in args])
        if h in _CMP:
            s = self.sort_of(args[0]) or self.sort_of(args[1]) or NAT
            return _CMP[h](self.term(args[0], s), self.term(args[1], s))
        if h == "and":
            return T.conj(*[self.term(a, BOOL) for a in args])
        if h == "not":
            return T.neg(self.term(args[0], BOOL))
        raise self.err(x, f"unknown operator {h!r}")

    def formula(self, x) -> Term:
        f = self.term(x, BOOL)
        if T.sort_check(f) != BOOL:
            raise SortMismatch(f"expected a formula at {x.line}:{x.col}")
        return f


def _option_value(x):
    if isinstance(x, SList):
        raise ParseError(x.line, x.col, "option values must be atoms")
    if re.fullmatch(r"\d+", x.text):
        return int(x.text)
    if x.text in ("true", "false"):
        return x.text == "true"
    return x.text


def parse_problem(text: str) -> Problem:
    """Parse and sort-check a problem file."""
    prob = Problem()
    el = _Elaborator(prob)
    for cmd in read_all(text):
        if isinstance(cmd, Atom):
            raise ParseError(cmd.line, cmd.col, "expected a command")
        h = _head(cmd)
        args = cmd.items[1:]
        if h == "set-field":
            if prob.field is not None:
                raise el.err(cmd, "the field order is already set")
            if len(args) != 1:
                raise el.err(cmd, "set-field expects one prime")
            p = _int(args[0], "a field order")
            T.FF(p)  # raises NonPrimeField
            prob.field = p
        elif h in ("declare-ff", "declare-nat", "declare-bv"):
            names = args
            if h == "declare-ff":
                s = el.field_sort(cmd)
            elif h == "declare-nat":
                s = NAT
            else:
                if not args:
                    raise el.err(cmd, "declare-bv expects a width")
                w = _int(args[0], "a bit width")
                if w < 1:
                    raise el.err(args[0], "bit width must be positive")
                s = T.BV(w)
                names = args[1:]
            if not names:
                raise el.err(cmd, f"{h} declares no names")
            for a in names:
                if not isinstance(a, Atom) or not re.fullmatch(r"[A-Za-z_][\w.']*", a.text) \
                        or a.text in ("true", "false"):
                    raise ParseError(a.line, a.col, "expected a variable name")
                if a.text in prob.decls:
                    raise ParseError(a.line, a.col, f"{a.text!r} declared twice")
                prob.decls[a.text] = s
        elif h in ("assert-hyp", "goal"):
            if len(args) != 1:
                raise el.err(cmd, f"{h} expects one formula")
            f = el.formula(args[0])
            (prob.hyps if h == "assert-hyp" else prob.goals).append(f)
        elif h == "set-option":
            if len(args) != 2 or not isinstance(args[0], Atom) or not args[0].text.startswith(":"):
                raise el.err(cmd, "set-option expects :name value")
            prob.options[args[0].text[1:]] = _option_value(args[1])
        else:
            raise el.err(cmd, f"unknown command {h!r}")
    return prob


def print_problem(prob: Problem) -> str:
    """Render a Problem so that ``parse_problem`` reads it back unchanged."""
    out = []
    if prob.field is not None:
        out.append(f"(set-field {prob.field})")
    for name, s in prob.decls.items():
        if s.is_ff:
            out.append(f"(declare-ff {name})")
        elif s.is_bv:
            out.append(f"(declare-bv {s.param} {name})")
        elif s.is_nat:
            out.append(f"(declare-nat {name})")
        else:
            raise ValueError(f"cannot declare a variable of sort {s}")
    for k, v in prob.options.items():
        val = ("true" if v else "false") if isinstance(v, bool) else str(v)
        out.append(f"(set-option :{k} {val})")
    out += [f"(assert-hyp {T.to_sexpr(h)})" for h in prob.hyps]
    out += [f"(goal {T.to_sexpr(g)})" for g in prob.goals]
    return "\n".join(out) + "\n"


def load_problem(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())
