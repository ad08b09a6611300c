"""Gate-level circuits with constant folding, structural hashing and Tseitin CNF.

Literals are non-zero ints; variable 1 is fixed to true so ``TRUE = 1`` and
``FALSE = -1``. Bitvectors are lists of literals, least significant bit first.
"""
from __future__ import annotations

TRUE = 1
FALSE = -1


class Circuit:
    def __init__(self) -> None:
        self.nvars = 1
        self.clauses: list[list[int]] = [[TRUE]]
        self._cache: dict = {}

    def new_var(self) -> int:
        self.nvars += 1
        return self.nvars

    def new_bits(self, n: int) -> list[int]:
        return [self.new_var() for _ in range(n)]

    def assert_lit(self, lit: int) -> None:
        self.clauses.append([lit])

    # ------------------------------------------------------------ gates

    def AND(self, a: int, b: int) -> int:
        if a == FALSE or b == FALSE or a == -b:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE or a == b:
            return a
        if a > b:
            a, b = b, a
        key = ("and", a, b)
        v = self._cache.get(key)
        if v is None:
            v = self.new_var()
            self.clauses += [[-v, a], [-v, b], [v, -a, -b]]
            self._cache[key] = v
        return v

    def OR(self, a: int, b: int) -> int:
        return -self.AND(-a, -b)

    def XOR(self, a: int, b: int) -> int:
        if a == FALSE:
            return b
        if b == FALSE:
            return a
        if a == TRUE:
            return -b
        if b == TRUE:
            return -a
        if a == b:
            return FALSE
        if a == -b:
            return TRUE
        sign = 1
        if a < 0:
            a, sign = -a, -sign
        if b < 0:
            b, sign = -b, -sign
        if a > b:
            a, b = b, a
        key = ("xor", a, b)
        v = self._cache.get(key)
        if v is None:
            v = self.new_var()
            self.clauses += [[-v, a, b], [-v, -a, -b], [v, -a, b], [v, a, -b]]
            self._cache[key] = v
        return v * sign

    def MUX(self, c: int, t: int, e: int) -> int:
        if c == TRUE or t == e:
            return t
        if c == FALSE:
            return e
        return self.OR(self.AND(c, t), self.AND(-c, e))

    def AND_all(self, lits) -> int:
        out = TRUE
        for l in lits:
            out = self.AND(out, l)
        return out

    def OR_all(self, lits) -> int:
        out = FALSE
        for l in lits:
            out = self.OR(out, l)
        return out

    # ------------------------------------------------------- bitvectors

    @staticmethod
    def const_bits(value: int, n: int) -> list[int]:
        return [TRUE if (value >> i) & 1 else FALSE for i in range(n)]

    def full_add(self, a: int, b: int, c: int) -> tuple[int, int]:
        s1 = self.XOR(a, b)
        s = self.XOR(s1, c)
        carry = self.OR(self.AND(a, b), self.AND(s1, c))
        return s, carry

    def add(self, a: list, b: list, cin: int = FALSE) -> tuple[list, int]:
        out = []
        c = cin
        for x, y in zip(a, b):
            s, c = self.full_add(x, y, c)
            out.append(s)
        return out, c

    def bv_add(self, a: list, b: list) -> list:
        return self.add(a, b)[0]

    def bv_sub(self, a: list, b: list) -> list:
        return self.add(a, [-x for x in b], TRUE)[0]

    def bv_mul(self, a: list, b: list) -> list:
        n = len(a)
        acc = [FALSE] * n
        for i, bi in enumerate(b):
            if bi == FALSE:
                continue
            partial = [FALSE] * i + [self.AND(bi, x) for x in a[: n - i]]
            acc = self.bv_add(acc, partial)
        return acc

    def uge(self, a: list, b: list) -> int:
        """a >= b unsigned: the carry out of a + ~b + 1."""
        return self.add(a, [-x for x in b], TRUE)[1]

    def ule(self, a: list, b: list) -> int:
        return self.uge(b, a)

    def bv_eq(self, a: list, b: list) -> int:
        return self.AND_all(-self.XOR(x, y) for x, y in zip(a, b))

    def bv_mux(self, c: int, a: list, b: list) -> list:
        return [self.MUX(c, x, y) for x, y in zip(a, b)]

    def bv_urem(self, a: list, b: list) -> list:
        """Unsigned remainder by restoring division; ``a mod 0 = a``."""
        n = len(a)
        r = [FALSE] * (n + 1)
        bb = list(b) + [FALSE]
        for i in range(n - 1, -1, -1):
            r = [a[i]] + r[:n]
            ge_ = self.uge(r, bb)
            diff = self.bv_sub(r, bb)
            r = self.bv_mux(ge_, diff, r)
        rem = r[:n]
        b_zero = -self.OR_all(b)
        return self.bv_mux(b_zero, a, rem)
