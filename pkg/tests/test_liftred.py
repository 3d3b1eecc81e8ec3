import random
from itertools import product

import pytest

from csp_algebras.algebra import Algebra, AlgebraCollection, align_to_collection, gamma_B
from csp_algebras.errors import PremiseError, SignatureError
from csp_algebras.liftred import (PrototypedInstance, from_prototype, lifted_language,
                                  reduce_strong, reduce_to_union, to_prototype)
from csp_algebras.relax import build_M
from csp_algebras.relcore import (DomainTable, Instance, Relation, Template,
                                  check_homomorphism)
from csp_algebras.solver import solve

from oracles import XOR0, XOR1, brute_homs

B = (0, 1)
M = build_M(B)


def edge_prototype():
    return Instance.from_constraints([(0, ("u", "v"))], 1)


def test_empty_prototype_only_domain_unaries(neq2):
    proto = Instance.from_constraints([], 1, variables=["p", "q", "r"])
    lifted = lifted_language(neq2, proto)
    assert len(lifted.template.relations) == 3
    assert all(o[0] == "dom" for o in lifted.origin)


def test_edge_prototype_relation(neq2):
    lifted = lifted_language(neq2, edge_prototype())
    t = lifted.template
    assert len(t.relations) == 3
    first = t.relations[0]
    assert first.signature == (lifted.vertex_domain["u"], lifted.vertex_domain["v"])
    assert first.tuples == ((0, 1), (1, 0))
    assert t.domains.tag(1) == ("copy", "v")


def random_template(rng, n_rel=2):
    rels = []
    for _ in range(n_rel):
        k = rng.choice([1, 2, 2, 3])
        rows = [t for t in product(B, repeat=k) if rng.random() < 0.6]
        rels.append(Relation((0,) * k, rows))
    return Template(DomainTable.single(B), tuple(rels))


def random_prototyped(rng, template, n_vertices=3, n_vars=4, n_cons=4):
    vertices = [f"p{k}" for k in range(n_vertices)]
    pcons = []
    for _ in range(n_cons):
        l = rng.randrange(len(template.relations))
        pcons.append((l, tuple(rng.choice(vertices)
                               for _ in range(template.relations[l].arity))))
    proto = Instance.from_constraints(pcons, len(template.relations), variables=vertices)
    ws = [f"w{k}" for k in range(n_vars)]
    chi = {w: rng.choice(vertices) for w in ws}
    cons = []
    for l, pscope in pcons:
        for _ in range(2):
            options = [[w for w in ws if chi[w] == p] for p in pscope]
            if all(options):
                cons.append((l, tuple(rng.choice(o) for o in options)))
    inst = Instance.from_constraints(cons, len(template.relations), variables=ws)
    return PrototypedInstance(inst, chi, proto)


def test_round_trip_preserves_solutions():
    rng = random.Random(3)
    for _ in range(10):
        t = random_template(rng)
        pi = random_prototyped(rng, t)
        assert pi.is_valid()
        lifted, linst = from_prototype(pi, t)
        assert len(lifted.template.relations) == \
            pi.prototype.n_constraints() + len(pi.prototype.variables)
        base = brute_homs(pi.instance, t)
        assert solve(linst, lifted.template, "all") == base
        back = to_prototype(linst, lifted)
        assert back.chi == pi.chi
        assert solve(back.instance, t, "all") == base


def test_to_prototype_disjoint_variables(neq2):
    lifted = lifted_language(neq2, edge_prototype())
    inst = Instance.from_constraints([(0, ("a", "b")), (0, ("c", "d"))], 3)
    pi = to_prototype(inst, lifted)
    assert pi.chi == {"a": "u", "b": "v", "c": "u", "d": "v"}


def test_to_prototype_conflict(neq2):
    proto = Instance.from_constraints([(0, ("u", "v")), (0, ("w", "u"))], 1)
    lifted = lifted_language(neq2, proto)
    inst = Instance.from_constraints([(0, ("a", "b")), (1, ("c", "b"))], 5)
    assert to_prototype(inst, lifted) is None


def test_from_prototype_empty(neq2):
    pi = PrototypedInstance(Instance.from_constraints([], 1), {}, edge_prototype())
    _, inst = from_prototype(pi, neq2)
    assert inst.n_constraints() == 0


def test_from_prototype_single_edge(neq2):
    inst = Instance.from_constraints([(0, ("a", "b"))], 1)
    pi = PrototypedInstance(inst, {"a": "u", "b": "v"}, edge_prototype())
    lifted, out = from_prototype(pi, neq2)
    binary = [(l, s) for l, s in out.constraints() if len(s) == 2]
    assert binary == [(0, ("a", "b"))]


def test_from_prototype_rejects_bad_chi(neq2):
    inst = Instance.from_constraints([(0, ("a", "b"))], 1)
    pi = PrototypedInstance(inst, {"a": "v", "b": "u"}, edge_prototype())
    with pytest.raises(SignatureError):
        from_prototype(pi, neq2)


def xor_template():
    t = Template.single_sorted(B, [XOR0, XOR1, [(0,)], [(1,)]], ["x0", "x1", "c0", "c1"])
    return align_to_collection(t, M)[0]


def test_union_variable_count():
    t = xor_template()
    inst = Instance.from_constraints([(0, ("a", "b", "c"))], 4)
    red = reduce_to_union(inst, t, M)
    assert len(red.instance.variables) == 3 * 8


def test_union_power_family_size():
    t = Template(DomainTable({M.subset_id(B): B}),
                 (Relation((M.subset_id(B),) * 2, [(0, 1), (1, 0)]),), ("neq",))
    inst = Instance.from_constraints([(0, ("a", "b"))], 1)
    red = reduce_to_union(inst, t, M)
    assert len(red.instance.scopes[0]) == 2 ** 3


def test_union_decodes_exactly_induced_solutions():
    t = xor_template()
    induced = gamma_B(t, M)
    inst = Instance.from_constraints([(0, ("a", "b", "c")), (1, ("a", "b", "c")),
                                      (2, ("a",))], 4)
    expect = brute_homs(inst, induced)
    red = reduce_to_union(inst, t, M)
    decoded = [red.decode(s) for s in solve(red.instance, red.template, "all")]
    assert sorted(decoded, key=lambda d: [d[v] for v in inst.variables]) == expect
    assert all(check_homomorphism(d, inst, induced) for d in decoded)


def test_strong_reduction_shape_and_sat():
    t = xor_template()
    inst = Instance.from_constraints([(0, ("a", "b", "c")), (3, ("c",))], 4)
    red = reduce_strong(inst, t, M)
    assert len(red.structure.variables) == 3 * 2 ** 3
    xi = red.structure.scopes[-1]
    assert len(xi) == 3 and all(len(s) == 8 for s in xi)
    union = reduce_to_union(inst, t, M)
    sat_union = solve(union.instance, union.template) is not None
    sol = solve(red.instance, red.lifted.template)
    assert (sol is not None) == sat_union
    assert check_homomorphism(red.decode(sol), inst, gamma_B(t, M))


def test_strong_needs_one_symbol():
    table = DomainTable.single(B)
    two = AlgebraCollection((1, 1), table, {0: [Algebra.constant(0, B, (1, 1), 0)]})
    t = Template.single_sorted(B, [[(0, 1)]])
    with pytest.raises(PremiseError):
        reduce_strong(Instance.from_constraints([], 1), t, two)
