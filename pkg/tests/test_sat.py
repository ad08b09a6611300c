import itertools

from hypothesis import given, strategies as st

from fieldbv.bitblast.dimacs import parse_model, to_dimacs
from fieldbv.bitblast.sat import Solver, _luby, solve_cnf


def brute_force(nvars, clauses):
    for bits in itertools.product([False, True], repeat=nvars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def satisfies(model, clauses):
    return all(any(model.get(abs(l), False) == (l > 0) for l in c) for c in clauses)


def test_empty_clause_set_is_sat():
    res = solve_cnf(0, [])
    assert res.status == "sat" and res.model == {}


def test_contradiction():
    assert solve_cnf(1, [[1], [-1]]).status == "unsat"


def test_pigeonhole_3_into_2():
    # p[i][j]: pigeon i in hole j
    v = lambda i, j: 1 + 2 * i + j
    clauses = [[v(i, 0), v(i, 1)] for i in range(3)]
    for j in range(2):
        for a, b in itertools.combinations(range(3), 2):
            clauses.append([-v(a, j), -v(b, j)])
    assert solve_cnf(6, clauses).status == "unsat"


def test_luby_prefix():
    assert [_luby(i) for i in range(15)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


clause = st.lists(st.integers(1, 8).flatmap(lambda v: st.sampled_from([v, -v])), min_size=1, max_size=4)


@given(st.lists(clause, max_size=40))
def test_agrees_with_brute_force(clauses):
    res = solve_cnf(8, clauses)
    assert (res.status == "sat") == brute_force(8, clauses)
    if res.status == "sat":
        assert satisfies(res.model, clauses)


def test_random_3sat_near_threshold():
    import random
    rng = random.Random(5)
    for _ in range(20):
        n = 40
        clauses = [[rng.choice([1, -1]) * rng.randint(1, n) for _ in range(3)] for _ in range(170)]
        res = solve_cnf(n, clauses)
        if res.status == "sat":
            assert satisfies(res.model, clauses)
        else:
            assert res.status == "unsat"


def test_conflict_budget_gives_unknown():
    import random
    rng = random.Random(1)
    n = 120
    clauses = [[rng.choice([1, -1]) * rng.randint(1, n) for _ in range(3)] for _ in range(512)]
    s = Solver(n)
    for c in clauses:
        s.add_clause(c)
    res = s.solve(max_conflicts=256)
    assert res.status in ("unknown", "sat", "unsat")


def test_dimacs_round_trip():
    text = to_dimacs(3, [[1, -2], [3]])
    assert text.splitlines()[0] == "p cnf 3 2"
    res = parse_model("c comment\ns SATISFIABLE\nv 1 -2 3 0\n")
    assert res.status == "sat" and res.model == {1: True, 2: False, 3: True}
    assert parse_model("s UNSATISFIABLE\n").status == "unsat"
