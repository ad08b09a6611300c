import itertools

import pytest

from fieldbv.bitblast.circuit import FALSE, TRUE, Circuit
from fieldbv.bitblast.sat import Solver

W = 3
MASK = (1 << W) - 1


def evaluate(circ_builder):
    """Enumerate all inputs a, b and read the circuit output by SAT with inputs fixed."""
    c = Circuit()
    a = c.new_bits(W)
    b = c.new_bits(W)
    out = circ_builder(c, a, b)
    results = {}
    for va, vb in itertools.product(range(1 << W), repeat=2):
        s = Solver(c.nvars)
        for cl in c.clauses:
            s.add_clause(cl)
        for i in range(W):
            s.add_clause([a[i] if (va >> i) & 1 else -a[i]])
            s.add_clause([b[i] if (vb >> i) & 1 else -b[i]])
        res = s.solve()
        assert res.status == "sat"
        lits = out if isinstance(out, list) else [out]
        val = 0
        for i, l in enumerate(lits):
            bit = l == TRUE or (l != FALSE and res.model[abs(l)] == (l > 0))
            val |= int(bit) << i
        results[va, vb] = val
    return results


@pytest.mark.parametrize("name,build,ref", [
    ("add", lambda c, a, b: c.bv_add(a, b), lambda a, b: (a + b) & MASK),
    ("sub", lambda c, a, b: c.bv_sub(a, b), lambda a, b: (a - b) & MASK),
    ("mul", lambda c, a, b: c.bv_mul(a, b), lambda a, b: (a * b) & MASK),
    ("urem", lambda c, a, b: c.bv_urem(a, b), lambda a, b: a if b == 0 else a % b),
    ("ule", lambda c, a, b: c.ule(a, b), lambda a, b: int(a <= b)),
    ("uge", lambda c, a, b: c.uge(a, b), lambda a, b: int(a >= b)),
    ("eq", lambda c, a, b: c.bv_eq(a, b), lambda a, b: int(a == b)),
    ("or", lambda c, a, b: [c.OR(p, q) for p, q in zip(a, b)], lambda a, b: a | b),
    ("xor", lambda c, a, b: [c.XOR(p, q) for p, q in zip(a, b)], lambda a, b: a ^ b),
])
def test_gate_semantics(name, build, ref):
    got = evaluate(build)
    for (a, b), v in got.items():
        assert v == ref(a, b), (name, a, b)


def test_constant_folding_and_hashing():
    c = Circuit()
    a = c.new_var()
    assert c.AND(a, TRUE) == a
    assert c.AND(a, -a) == FALSE
    assert c.XOR(a, a) == FALSE
    b = c.new_var()
    assert c.AND(a, b) == c.AND(b, a)
    assert c.const_bits(5, 3) == [TRUE, FALSE, TRUE]
