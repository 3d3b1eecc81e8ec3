import random
from itertools import product

import pytest

from csp_algebras.algebra import align_to_collection, gamma_B, trace
from csp_algebras.clone import OpTable
from csp_algebras.relax import (build_M, check_trace_pp, green_cohen_collection,
                                solve_lifted_affine, trace_pp_instance, weak_relax_pipeline,
                                witness_lifted_hom)
from csp_algebras.relcore import DomainTable, Instance, Relation, Template
from csp_algebras.solver import gac_preprocess, solve

from oracles import (XOR0, XOR1, brute_homs, gf2_brute, max_closure, random_xor_system,
                     table_fn, xor_instance)

B = (0, 1)
M = build_M(B)
PAIR = M.subset_id(B)
MU = M.by_name(B, "mu")


def parity_template():
    return Template.single_sorted(B, [XOR0, XOR1], ["x0", "x1"])


def test_sizes_of_M():
    assert len(M.members(PAIR)) == 4
    assert len(M.members(M.subset_id((0,)))) == 1
    big = build_M((0, 1, 2))
    assert len(big.domain_ids) == 6 and len(big) == 3 + 3 * 4


def test_mu_table():
    assert M.algebra(MU).ops[0].values == (0, 1, 1, 0, 1, 0, 0, 1)


def test_mu_prime_identity():
    mu = table_fn(B, 3, M.algebra(MU).ops[0].values)
    mup = table_fn(B, 3, M.algebra(M.by_name(B, "mu'")).ops[0].values)
    for x, y, z, t in product(B, repeat=4):
        assert mup(x, y, mup(y, z, t)) == mu(x, z, t)


def test_m_over_nonbinary_pair():
    m = build_M((3, 7))
    mu = m.algebra(m.by_name((3, 7), "mu")).ops[0]
    assert mu(3, 3, 7) == 7 and mu(7, 3, 7) == 3


def test_trace_pp_on_three_elements():
    res = check_trace_pp((0, 1, 2), (0, 1))
    assert res
    assert len(res.generated) == 4
    assert res.generated == res.trace


def test_trace_pp_negative_control():
    linked = check_trace_pp((0, 1), (0, 1))
    loose = check_trace_pp((0, 1), (0, 1), linked=False)
    assert set(linked.generated.tuples) < set(loose.generated.tuples)
    assert len(loose.generated) == 16


def test_trace_pp_instance_shape():
    _, inst, ms = trace_pp_instance((0, 1, 2), (0, 1))
    assert len(ms) == 8 and len(inst.variables) == 10


def test_witness_on_gac_xor():
    rng = random.Random(5)
    t = parity_template()
    for _ in range(10):
        eqs = random_xor_system(rng, 6, 6, want_sat=True)
        pre = gac_preprocess(xor_instance(eqs, 6), t)
        w = witness_lifted_hom(pre, M)
        assert w
        for (k, a), g in w.mapping.items():
            assert set(M.algebra(g).ops[0].values) == {a}


def test_witness_singleton_domain():
    t = Template.single_sorted(B, [XOR0, [(1,)]], ["x0", "one"])
    inst = Instance.from_constraints([(0, ("a", "b", "c")), (1, ("a",))], 2)
    w = witness_lifted_hom(gac_preprocess(inst, t), M)
    assert w
    single = M.subset_id((1,))
    assert M.by_name((1,), "const", 1) in w.mapping.values()
    assert M.gids(single) == (M.by_name((1,), "const", 1),)


def _neq_problem(pairs, n):
    t = Template.single_sorted(B, [[(0, 1), (1, 0)], [(0, 0), (1, 1)]], ["neq", "eq"])
    t, _ = align_to_collection(t, M)
    cons = [(l, (f"x{a}", f"x{b}")) for l, a, b in pairs]
    return t, Instance.from_constraints(cons, 2, variables=[f"x{i}" for i in range(n)])


def test_lifted_affine_chain():
    t, inst = _neq_problem([(0, 0, 1), (0, 1, 2)], 3)
    chi = {v: MU for v in inst.variables}
    assert solve_lifted_affine(t, inst, chi, M) == {"x0": 0, "x1": 1, "x2": 0}
    assert len(gf2_brute(3, [((0, 1), 1), ((1, 2), 1)])) == 2


def test_lifted_affine_constants():
    t, inst = _neq_problem([(0, 0, 1), (0, 1, 2)], 3)
    chi = {"x0": M.by_name(B, "const", 1), "x1": M.by_name(B, "const", 0),
           "x2": M.by_name(B, "const", 1)}
    assert solve_lifted_affine(t, inst, chi, M) == {"x0": 1, "x1": 0, "x2": 1}


def test_lifted_affine_inconsistent():
    t, inst = _neq_problem([(0, 0, 1), (1, 0, 1)], 2)
    assert solve_lifted_affine(t, inst, {v: MU for v in inst.variables}, M) is None


@pytest.mark.parametrize("route", ["direct", "union"])
def test_pipeline_on_xor_systems(route):
    rng = random.Random(11)
    t = parity_template()
    for want in (True, False):
        for _ in range(5):
            eqs = random_xor_system(rng, 6, 8, want_sat=want)
            inst = xor_instance(eqs, 6)
            res = weak_relax_pipeline(inst, t, relaxed_route=route)
            assert res.solved == want
            if want:
                x = tuple(res.solution[f"x{i}"] for i in range(6))
                assert x in gf2_brute(6, eqs)
            else:
                assert res.transcript[-1][0] in ("preprocess", "relaxed", "lifted")


def _perm_max(order):
    rank = {e: k for k, e in enumerate(order)}
    return lambda x, y: x if rank[x] >= rank[y] else y


def test_green_cohen_pipeline():
    rng = random.Random(2)
    D = (0, 1, 2)
    coll = green_cohen_collection(D)
    assert len(coll) == 6
    op = _perm_max((2, 0, 1))
    solved = 0
    for _ in range(8):
        rels = []
        for k in (1, 2, 2, 3):
            seed = [t for t in product(D, repeat=k) if rng.random() < 0.15] or [(1,) * k]
            rels.append(Relation((0,) * k, max_closure(seed, op)))
        t = Template(DomainTable.single(D), tuple(rels))
        vs = [f"v{i}" for i in range(6)]
        cons = [(l, tuple(rng.choice(vs) for _ in range(rels[l].arity)))
                for l in (rng.randrange(4) for _ in range(7))]
        inst = Instance.from_constraints(cons, 4, variables=vs)
        res = weak_relax_pipeline(inst, t, coll)
        assert res.solved == bool(brute_homs(inst, t))
        solved += res.solved
        if res.solved:
            assert res.solution in brute_homs(inst, t)
    assert solved
