from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csp_algebras.clone import (App, MultiSortedOp, OpTable, Var, check_identity,
                                enumerate_polymorphisms, eval_term, find_polymorphism,
                                idempotent_restriction, pp_closure, preserves)
from csp_algebras.errors import GuardExceeded
from csp_algebras.relcore import DomainTable, Relation, Template

from oracles import XOR0, apply_rows, brute_polymorphisms, brute_preserves, table_fn

B = (0, 1)
XOR3 = OpTable.from_function(B, 3, lambda x, y, z: x ^ y ^ z)
AND3 = OpTable.from_function(B, 3, lambda x, y, z: x & y & z)
MAX2 = OpTable.from_function(B, 2, max)
LE = Relation.single_sorted([(0, 0), (0, 1), (1, 1)])


def test_table_layout():
    assert XOR3.values == (0, 1, 1, 0, 1, 0, 0, 1)
    assert OpTable.projection(B, 3, 0).values == (0, 0, 0, 0, 1, 1, 1, 1)
    assert XOR3(1, 0, 1) == 0


def test_xor_preserves_parity():
    rel = Relation.single_sorted(XOR0)
    assert preserves(XOR3, rel)
    assert brute_preserves(XOR3, 3, XOR0)


def test_max_preserves_le():
    assert preserves(MAX2, LE)
    assert brute_preserves(max, 2, LE.tuples)


def test_xor_breaks_le_with_first_matrix():
    res = preserves(XOR3, LE)
    assert not res
    first = next(rows for rows in product(LE.tuples, repeat=3)
                 if apply_rows(XOR3, rows) not in LE)
    assert res.matrix == first
    assert res.image == apply_rows(XOR3, first)


@settings(max_examples=60, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=7),
       st.lists(st.integers(0, 2), min_size=9, max_size=9))
def test_preserves_matches_brute(rows, values):
    rel = Relation((0, 0), rows)
    op = OpTable((0, 1, 2), 2, values)
    assert bool(preserves(op, rel)) == brute_preserves(table_fn((0, 1, 2), 2, values), 2, rows)


def test_multisorted_preservation():
    rel = Relation((0, 1), [(0, 5), (1, 6)])
    op = MultiSortedOp(2, {0: OpTable.from_function(B, 2, min),
                           1: OpTable.from_function((5, 6), 2, min)})
    assert preserves(op, rel)
    bad = MultiSortedOp(2, {0: OpTable.from_function(B, 2, min),
                            1: OpTable.from_function((5, 6), 2, max)})
    assert not preserves(bad, rel)


def test_unary_polymorphisms_of_constants():
    t = Template.single_sorted(B, [[(0,)], [(1,)]])
    ops = enumerate_polymorphisms(t, 1)
    assert [op.values for op in ops] == [(0, 1)]


def test_binary_polymorphisms_of_neq(neq2):
    ops = [op.values for op in enumerate_polymorphisms(neq2, 2)]
    assert ops == brute_polymorphisms(B, 2, [neq2.relations[0].tuples])
    assert len(ops) == 4


def test_projections_always_present():
    t = Template.single_sorted((0, 1, 2), [[(0, 1), (1, 2)]])
    ops = {op.values for op in enumerate_polymorphisms(t, 2)}
    for j in range(2):
        assert OpTable.projection((0, 1, 2), 2, j).values in ops


def test_polymorphisms_match_brute_on_le():
    t = Template.single_sorted(B, [LE.tuples])
    got = [op.values for op in enumerate_polymorphisms(t, 3)]
    assert got == brute_polymorphisms(B, 3, [LE.tuples])


def test_find_with_restriction():
    t = Template.single_sorted(B, [XOR0])
    restrict = idempotent_restriction(t, 3)
    restrict.update({(0, (0, 0, 1)): {1}, (0, (0, 1, 0)): {1}, (0, (1, 0, 0)): {1}})
    assert find_polymorphism(t, 3, restrict) == XOR3


def test_guard():
    t = Template.single_sorted((0, 1, 2), [[(0, 1)]])
    with pytest.raises(GuardExceeded):
        enumerate_polymorphisms(t, 4, guard=64)


def test_projection_term():
    assert eval_term(Var(0), [XOR3], 3) == OpTable.projection(B, 3, 0)


def test_w_term_with_projection_outer():
    g = OpTable.projection(B, 3, 0)
    x, y, z = Var(0), Var(1), Var(2)
    w = eval_term(App(0, [App(1, [x, y, z]), y, z]), [g, XOR3], 3)
    assert w == XOR3


def test_w4_recursion_is_x1_x2_x4():
    x = [Var(k) for k in range(4)]
    w4 = eval_term(App(0, [App(0, x[:3]), x[2], x[3]]), [XOR3], 4)
    expect = OpTable.from_function(B, 4, lambda a, b, c, d: a ^ b ^ d)
    assert w4 == expect
    assert not check_identity(w4, "wnu")


def test_identities():
    assert check_identity(XOR3, "wnu") and check_identity(XOR3, "minority")
    assert check_identity(AND3, "wnu")
    assert not check_identity(AND3, "minority")
    assert check_identity(OpTable.from_function(B, 2, min), "semilattice")
    maj = OpTable.from_function(B, 3, lambda a, b, c: int(a + b + c >= 2))
    assert check_identity(maj, "majority")


def test_custom_identity():
    x, y, z = Var(0), Var(1), Var(2)
    lhs = App(0, [x, y, z])
    rhs = App(0, [z, y, x])
    assert check_identity(XOR3, "custom", lhs, rhs)
    assert not check_identity(OpTable.projection(B, 3, 0), "custom", lhs, rhs)


def test_pp_own_relation(neq2):
    ok, gen = pp_closure(neq2, neq2.relations[0])
    assert ok and gen == neq2.relations[0]


def test_pp_full_unary():
    t = Template.single_sorted(B, [[(0,)]])
    assert pp_closure(t, Relation((0,), [(0,), (1,)]))[0]


def test_pp_le_not_from_neq(neq2):
    ok, gen = pp_closure(neq2, LE)
    assert not ok
    assert set(LE.tuples) < set(gen.tuples)


def test_pp_trace_of_minority():
    t = Template(DomainTable.single(B), (Relation((0,), [(0,), (1,)]),
                                         Relation((0, 0), [(0, 0), (1, 1)])), ("B", "eq"))
    rows = [(0,) * 8, XOR3.values, tuple(1 - v for v in XOR3.values), (1,) * 8]
    ok, gen = pp_closure(t, Relation((0,) * 8, rows))
    assert ok and len(gen) == 4
