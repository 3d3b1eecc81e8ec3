"""Weak relaxation through induced templates, and the two-element collection M.

The pipeline preprocesses an instance, solves the relaxed problem over the
induced template to pick an algebra per variable, and then solves the
original problem with that choice as a guide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Callable

from . import gf2
from .algebra import Algebra, AlgebraCollection, gamma_B, trace
from .clone import OpTable
from .errors import ContractError, NonCosetError, PremiseError
from .liftred import lifted_language, reduce_to_union
from .relcore import DomainTable, Instance, Relation, Template, check_homomorphism
from .solver import PreprocessResult, assignment_satisfies, gac_preprocess, project_solutions, solve


class MCollection(AlgebraCollection):
    """The collection M: minority-type and constant algebras on small subsets."""

    def __init__(self, elements):
        elements = tuple(sorted(set(elements)))
        if not elements:
            raise ValueError("M needs a non-empty base set")
        subsets = [(a,) for a in elements] + list(combinations(elements, 2))
        subsets.sort(key=lambda b: (len(b), b))
        table = DomainTable({k: b for k, b in enumerate(subsets)})
        members = {k: m_algebras(k, b) for k, b in enumerate(subsets)}
        super().__init__((3,), table, members)
        self.base_elements = elements

    def subset_id(self, subset) -> int:
        dom = self.domains.find(subset)
        if dom is None:
            raise KeyError(f"{tuple(subset)} is not a subset of size 1 or 2")
        return dom

    def by_name(self, subset, kind: str, a=None) -> int:
        """Gid of ``"mu"``, ``"mu'"`` or ``"const"`` (with element ``a``) over a subset."""
        dom = self.subset_id(subset)
        names = [alg.name for alg in self.members(dom)]
        key = _m_name(kind, self.domains.elements(dom), a)
        return self.gids(dom)[names.index(key)]


def _m_name(kind, subset, a=None):
    tag = "_".join(map(str, subset))
    if kind == "const":
        return f"c{a}_{tag}"
    return f"{'mu' if kind == 'mu' else 'mup'}_{tag}"


def minority_table(subset, complement=False) -> OpTable:
    """Minority operation on a two-element set (xor under a -> 0, b -> 1)."""
    a, b = subset
    enc = {a: 0, b: 1}
    dec = (a, b)
    flip = 1 if complement else 0
    return OpTable.from_function(
        subset, 3, lambda x, y, z: dec[enc[x] ^ enc[y] ^ enc[z] ^ flip])


def m_algebras(dom_id: int, subset) -> list[Algebra]:
    """Members of M over one subset: mu, mu', then the constants."""
    subset = tuple(subset)
    if len(subset) == 1:
        a = subset[0]
        return [Algebra.constant(dom_id, subset, (3,), a, _m_name("const", subset, a))]
    if len(subset) != 2:
        raise ValueError("M is defined on subsets of size 1 or 2")
    return [
        Algebra(dom_id, subset, (minority_table(subset),), _m_name("mu", subset)),
        Algebra(dom_id, subset, (minority_table(subset, True),), _m_name("mup", subset)),
    ] + [Algebra.constant(dom_id, subset, (3,), a, _m_name("const", subset, a))
         for a in subset]


def build_M(elements) -> MCollection:
    return MCollection(elements)


class GreenCohenCollection(AlgebraCollection):
    """Algebras (D, max_pi): max taken in the order given by a permutation."""

    def __init__(self, elements, dom_id=0):
        elements = tuple(sorted(set(elements)))
        algs = []
        for order in permutations(elements):
            rank = {e: k for k, e in enumerate(order)}
            table = OpTable.from_function(elements, 2,
                                          lambda x, y: x if rank[x] >= rank[y] else y)
            algs.append(Algebra(dom_id, elements, (table,), "max_" + "_".join(map(str, order))))
        super().__init__((2,), DomainTable({dom_id: elements}), {dom_id: algs})

    def order(self, gid: int) -> tuple[int, ...]:
        """Elements in increasing order for the algebra's max."""
        alg = self.algebra(gid)
        op = alg.ops[0]
        return tuple(sorted(alg.elements,
                            key=lambda e: sum(op(e, x) == e for x in alg.elements)))


def green_cohen_collection(elements, dom_id=0) -> GreenCohenCollection:
    return GreenCohenCollection(elements, dom_id)


# The two-element pp-definition of the trace


@dataclass(frozen=True)
class TracePP:
    ok: bool
    generated: Relation
    trace: Relation

    def __bool__(self):
        return self.ok


def trace_pp_instance(elements, subset, linked=True):
    """Template ({subset}, eq) over ``elements`` and the defining instance.

    Variables are ``("m", x, y, z)`` for triples over the subset, then
    ``("u", x)``. With ``linked=False`` the ``u`` variables are dropped and
    the three one-off positions are only tied to each other.
    """
    elements = tuple(sorted(elements))
    subset = tuple(sorted(subset))
    template = Template(DomainTable.single(elements),
                        (Relation((0,), [(a,) for a in subset]),
                         Relation((0, 0), [(a, a) for a in elements])),
                        ("B", "eq"))
    ms = [("m",) + t for t in product(subset, repeat=3)]
    us = [("u", x) for x in subset]
    unary, eq = [], []
    for x, y in product(subset, repeat=2):
        shapes = [("m", x, x, y), ("m", x, y, x), ("m", y, x, x)]
        if linked:
            eq.extend((s, ("u", y)) for s in shapes)
        else:
            eq.extend([(shapes[0], shapes[1]), (shapes[1], shapes[2])])
    variables = ms + (us if linked else [])
    unary = [(v,) for v in variables]
    return template, Instance(tuple(variables), (tuple(unary), tuple(eq))), ms


def check_trace_pp(elements, subset, linked=True) -> TracePP:
    """Compare the pp-defined relation with the trace of M over a 2-element subset."""
    template, inst, ms = trace_pp_instance(elements, subset, linked)
    gen = Relation((0,) * len(ms), project_solutions(inst, template, ms))
    M = build_M(elements)
    tr = trace(M, M.subset_id(subset)).relation.resign((0,) * len(ms))
    return TracePP(gen == tr, gen, tr)


# Lifted witness and lifted solvers


@dataclass(frozen=True)
class LiftedWitness:
    mapping: dict
    source: Template
    target: Template
    check: object

    def __bool__(self):
        return bool(self.check)


def witness_lifted_hom(pre: PreprocessResult, M: MCollection) -> LiftedWitness:
    """Map each lifted value (v, a) to the constant algebra on a over D_v, and check it."""
    if not pre.defined:
        raise PremiseError("preprocessing reported an inconsistent instance")
    big = [v for v, d in pre.unary_domains.items() if len(d) > 2]
    if big:
        raise PremiseError(f"variable {big[0]!r} keeps more than two values")
    template, inst = pre.as_problem(M.domains)
    source = lifted_language(template, inst)
    target = lifted_language(gamma_B(template, M), inst)
    mapping = {}
    for v, k in source.vertex_domain.items():
        subset = pre.unary_domains[v]
        for a in subset:
            mapping[(k, a)] = M.by_name(subset, "const", a)
    check = check_homomorphism(mapping, source.template, target.template)
    return LiftedWitness(mapping, source.template, target.template, check)


def _constant_value(alg: Algebra):
    values = set(alg.ops[0].values)
    return next(iter(values)) if len(values) == 1 else None


def solve_lifted_affine(template: Template, instance: Instance, chi, coll):
    """Solve a preprocessed instance guided by a choice of M-algebras.

    Constant algebras fix their variable; the others are encoded as bits and
    every constraint must restrict to an affine subspace, which is then
    solved by Gaussian elimination (free bits set to 0). Returns None when
    the affine system is inconsistent.
    """
    fixed, enc, dec = {}, {}, {}
    for v in instance.variables:
        alg = coll.algebra(chi[v])
        c = _constant_value(alg)
        if c is not None:
            fixed[v] = c
        else:
            if len(alg.elements) != 2:
                raise PremiseError(f"non-constant algebra on {alg.elements}")
            a, b = alg.elements
            enc[v] = {a: 0, b: 1}
            dec[v] = (a, b)
    free = [v for v in instance.variables if v in enc]
    bit = {v: k for k, v in enumerate(free)}
    equations = []
    for l, scope in instance.constraints():
        rel = template.relations[l]
        rows = [t for t in rel.tuples if _consistent(scope, t, fixed)]
        if not rows:
            raise NonCosetError(f"constraint {scope} is empty under the constant choices")
        vars_ = [v for v in dict.fromkeys(scope) if v in enc]
        if not vars_:
            continue
        first = {v: scope.index(v) for v in vars_}
        packed = [gf2.pack([enc[v][t[first[v]]] for v in vars_]) for t in rows]
        eqs = gf2.coset_equations(packed, len(vars_))
        if eqs is None:
            raise NonCosetError(f"constraint {scope} is not affine under the algebra choice")
        for mask, rhs in eqs:
            gmask = 0
            for k, v in enumerate(vars_):
                if mask >> k & 1:
                    gmask |= 1 << bit[v]
            equations.append((gmask, rhs))
    x = gf2.solve_affine(equations, len(free))
    if x is None:
        return None
    out = dict(fixed)
    for v in free:
        out[v] = dec[v][x[bit[v]]]
    return out


def _consistent(scope, row, fixed):
    seen = {}
    for v, a in zip(scope, row):
        if v in fixed and fixed[v] != a:
            return False
        if seen.setdefault(v, a) != a:
            return False
    return True


def solve_lifted_max_closed(template: Template, instance: Instance, chi, coll):
    """Give every variable the largest value of its domain in its algebra's order."""
    p = gac_preprocess(instance, template)
    if not p.defined:
        return None
    out = {}
    for v in instance.variables:
        order = coll.order(chi[v])
        rank = {e: k for k, e in enumerate(order)}
        out[v] = max(p.unary_domains[v], key=rank.__getitem__)
    return out


def solve_lifted_generic(template: Template, instance: Instance, chi, coll):
    return solve(instance, template, "first")


LIFTED_SOLVERS = {
    "affine": solve_lifted_affine,
    "max-closed": solve_lifted_max_closed,
    "generic": solve_lifted_generic,
}


@dataclass
class RelaxationOutcome:
    status: str
    chi: dict | None = None
    solution: dict | None = None
    transcript: list = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status == "SOLVED"


def _default_lifted(coll):
    if isinstance(coll, MCollection):
        return "affine"
    if isinstance(coll, GreenCohenCollection):
        return "max-closed"
    return "generic"


def _sign_domains(pre: PreprocessResult, coll: AlgebraCollection) -> DomainTable:
    """Domain table for the preprocessed instance: exact match, else smallest superset."""
    entries = {}
    for v, d in pre.unary_domains.items():
        dom = coll.domains.find(d)
        if dom is None:
            supers = [i for i in coll.domains if set(d) <= set(coll.domains.elements(i))]
            if not supers:
                raise PremiseError(f"no collection domain contains {d}")
            dom = min(supers, key=lambda i: (coll.domains.size(i), i))
        entries[v] = dom
    return entries


def weak_relax_pipeline(instance: Instance, template: Template, coll=None,
                        relaxed_route="direct", lifted_solver=None,
                        consistency="gac") -> RelaxationOutcome:
    """Solve ``instance`` through the relaxation to the induced template.

    ``coll`` defaults to M over the template's elements. ``relaxed_route`` is
    ``"direct"`` (search over algebra domains) or ``"union"`` (through the
    reduction with traces). ``lifted_solver`` is a name from
    ``LIFTED_SOLVERS`` or a callable ``(template, instance, chi, coll)``.
    """
    out = RelaxationOutcome("UNSAT")
    log = out.transcript.append
    if coll is None:
        elems = sorted({a for i in template.domains for a in template.domains.elements(i)})
        coll = build_M(elems)
    if lifted_solver is None:
        lifted_solver = _default_lifted(coll)
    solver_fn = LIFTED_SOLVERS[lifted_solver] if isinstance(lifted_solver, str) else lifted_solver

    pre = gac_preprocess(instance, template, consistency=consistency)
    if not pre.defined:
        log(("preprocess", "inconsistent"))
        return out
    log(("preprocess", f"{len(pre.constraints)} constraints kept"))
    signs = _sign_domains(pre, coll)
    reduced_t, reduced_i = _signed_problem(pre, coll, signs)

    induced = gamma_B(reduced_t, coll)
    if relaxed_route == "direct":
        chi = solve(reduced_i, induced, "first")
    elif relaxed_route == "union":
        red = reduce_to_union(reduced_i, reduced_t, coll)
        sol = None if red is None else solve(red.instance, red.template, "first")
        chi = None if sol is None else red.decode(sol)
        if chi is not None and not check_homomorphism(chi, reduced_i, induced):
            raise ContractError("relaxed: decoded algebra choice is not a solution")
    else:
        raise ValueError("relaxed_route must be 'direct' or 'union'")
    if chi is None:
        log(("relaxed", "no algebra choice"))
        return out
    out.chi = chi
    log(("relaxed", "algebra choice found"))

    sol = solver_fn(reduced_t, reduced_i, chi, coll)
    if sol is None:
        log(("lifted", "no solution"))
        return out
    if not assignment_satisfies(sol, reduced_i, reduced_t):
        raise ContractError("lifted: solver returned an assignment violating a constraint")
    full = {}
    for v in instance.variables:
        full[v] = sol[v] if v in sol else min(pre.unary_domains[v])
    if not assignment_satisfies(full, instance, template):
        raise ContractError("recover: assignment does not satisfy the original instance")
    log(("lifted", "solved"))
    out.status = "SOLVED"
    out.solution = full
    return out


def _signed_problem(pre: PreprocessResult, coll: AlgebraCollection, signs):
    rels, names, scopes = [], [], []
    for k, (scope, rel) in enumerate(pre.constraints):
        rels.append(rel.resign([signs[v] for v in scope]))
        names.append(f"c{k}")
        scopes.append((scope,))
    keep = pre.constrained_variables()
    t = Template(coll.domains, tuple(rels), tuple(names))
    i = Instance(tuple(keep), tuple(scopes), {v: signs[v] for v in keep})
    return t, i
