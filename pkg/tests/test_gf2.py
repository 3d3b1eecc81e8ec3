from itertools import product

from hypothesis import given, settings
from hypothesis import strategies as st

from csp_algebras import gf2

from oracles import gf2_brute


def test_pack_roundtrip():
    assert gf2.pack((1, 0, 1)) == 0b101
    assert gf2.unpack(0b101, 4) == (1, 0, 1, 0)


def test_rank_and_null_space():
    vs = [0b011, 0b110, 0b101]
    assert gf2.rank(vs) == 2
    ns = gf2.null_space(vs, 3)
    assert ns == [0b111]
    assert all(gf2.dot(a, v) == 0 for a in ns for v in vs)


def test_coset_equations():
    rows = [gf2.pack(t) for t in [(0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)]]
    eqs = gf2.coset_equations(rows, 3)
    assert eqs == [(0b111, 1)]
    assert gf2.coset_equations([0b00, 0b01, 0b10], 2) is None


def test_inconsistent_system():
    assert gf2.solve_affine([(0b11, 0), (0b11, 1)], 2) is None
    assert gf2.count_solutions([(0b11, 0), (0b11, 1)], 2) == 0


def _system(eqs):
    return [(gf2.pack([int(i in vs) for i in range(6)]), rhs) for vs, rhs in eqs]


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.sets(st.integers(0, 5), min_size=1, max_size=3),
                          st.integers(0, 1)), max_size=7))
def test_solve_matches_brute(eqs):
    sols = gf2_brute(6, eqs)
    x = gf2.solve_affine(_system(eqs), 6)
    if not sols:
        assert x is None
    else:
        assert x in sols
    assert gf2.count_solutions(_system(eqs), 6) == len(sols)


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(0, 15), min_size=1))
def test_coset_detection(rows):
    eqs = gf2.coset_equations(rows, 4)
    closed = all(a ^ b ^ c in rows for a, b, c in product(rows, repeat=3))
    assert (eqs is not None) == closed
    if eqs is not None:
        cut = {v for v in range(16) if all(gf2.dot(m, v) == r for m, r in eqs)}
        assert cut == set(rows)
