"""Lifted languages, prototype instances and reductions out of induced templates."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Hashable, Mapping

from .algebra import AlgebraCollection, trace
from .errors import PremiseError, SignatureError
from .relcore import (DomainTable, Instance, Relation, Template, alpha, check_homomorphism,
                      infer_sorts, power_columns, _fresh)


@dataclass(frozen=True)
class LiftedTemplate:
    """Per-vertex copies of the base relations and domains.

    ``template`` is the multi-sorted lifted language itself. ``vertex_domain``
    maps each prototype vertex to its copy-domain id, and ``origin[k]`` says
    where relation k came from: ``(i, scope)`` for a copy of base relation i,
    or ``("dom", v)`` for the domain unary of vertex v.
    """

    base: Template
    prototype: Instance
    template: Template
    vertex_domain: dict
    origin: tuple
    sorts: dict

    def relation_for(self, i: int, scope) -> int:
        return self._lookup[(i, tuple(scope))]

    def domain_relation(self, v) -> int:
        return self._lookup[("dom", v)]

    @property
    def _lookup(self):
        cached = self.__dict__.get("_lookup_cache")
        if cached is None:
            cached = {}
            for k, o in enumerate(self.origin):
                cached.setdefault(o, k)
            object.__setattr__(self, "_lookup_cache", cached)
        return cached

    def vertex_of_domain(self, dom_id):
        return self.prototype.variables[dom_id]


def lifted_language(template: Template, prototype: Instance) -> LiftedTemplate:
    """Build the lifted language of ``template`` for the prototype structure.

    Relations come in the order (base relation, position of the scope), then
    one domain unary per vertex, named after its copy domain.
    """
    sorts = infer_sorts(prototype, template)
    entries, tags, vdom = {}, {}, {}
    for k, v in enumerate(prototype.variables):
        entries[k] = template.domains.elements(sorts[v])
        tags[k] = ("copy", v)
        vdom[v] = k
    table = DomainTable(entries, tags)
    rels, names, origin = [], [], []
    for i, scopes in enumerate(prototype.scopes):
        base = template.relations[i]
        for pos, scope in enumerate(scopes):
            sig = tuple(vdom[v] for v in scope)
            rows = [t for t in base.tuples
                    if all(x in entries[d] for x, d in zip(t, sig))]
            rels.append(Relation(sig, rows))
            names.append(_fresh(names, f"{template.names[i]}_{pos}"))
            origin.append((i, scope))
    for v in prototype.variables:
        d = vdom[v]
        rels.append(Relation((d,), [(a,) for a in entries[d]]))
        names.append(_fresh(names, f"dom_{d}"))
        origin.append(("dom", v))
    lifted = Template(table, tuple(rels), tuple(names))
    return LiftedTemplate(template, prototype, lifted, vdom, tuple(origin), sorts)


@dataclass(frozen=True)
class PrototypedInstance:
    """An instance over the base template with a map ``chi`` to the prototype."""

    instance: Instance
    chi: Mapping[Hashable, Hashable]
    prototype: Instance

    def is_valid(self) -> bool:
        if any(v not in self.chi for v in self.instance.variables):
            return False
        return bool(check_homomorphism(self.chi, self.instance, self.prototype))


def to_prototype(instance: Instance, lifted: LiftedTemplate) -> PrototypedInstance | None:
    """Turn an instance over the lifted language into a prototyped instance.

    Returns None (unsatisfiable) when some variable is used in copies of two
    different vertices. Solutions carry over unchanged as value maps.
    """
    instance.check_against(lifted.template)
    chi: dict = {}
    for k, scope in instance.constraints():
        sig = lifted.template.relations[k].signature
        for w, d in zip(scope, sig):
            vertex = lifted.vertex_of_domain(d)
            if chi.setdefault(w, vertex) != vertex:
                return None
    for w, d in instance.sorts.items():
        vertex = lifted.vertex_of_domain(d)
        if chi.setdefault(w, vertex) != vertex:
            return None
    if lifted.prototype.variables:
        first = lifted.prototype.variables[0]
        for w in instance.variables:
            chi.setdefault(w, first)
    elif instance.variables:
        return None
    scopes = [[] for _ in lifted.base.relations]
    for k, scope in instance.constraints():
        o = lifted.origin[k]
        if o[0] != "dom":
            scopes[o[0]].append(scope)
    sorts = {w: lifted.sorts[chi[w]] for w in instance.variables}
    base_inst = Instance(instance.variables, tuple(tuple(s) for s in scopes), sorts)
    return PrototypedInstance(base_inst, chi, lifted.prototype)


def from_prototype(pi: PrototypedInstance, template: Template,
                   lifted: LiftedTemplate | None = None):
    """Encode a prototyped instance over the lifted language.

    Returns ``(lifted, instance)``. Every variable also gets the domain unary
    of its vertex, so value maps are solutions of one iff of the other.
    """
    if lifted is None:
        lifted = lifted_language(template, pi.prototype)
    if not pi.is_valid():
        raise SignatureError("chi is not a homomorphism to the prototype")
    constraints = []
    for i, scope in pi.instance.constraints():
        image = tuple(pi.chi[w] for w in scope)
        constraints.append((lifted.relation_for(i, image), scope))
    for w in pi.instance.variables:
        constraints.append((lifted.domain_relation(pi.chi[w]), (w,)))
    inst = Instance.from_constraints(constraints, len(lifted.template.relations),
                                     variables=pi.instance.variables)
    return lifted, inst


def _infer_algebra_sorts(instance: Instance, template: Template):
    """Domain function for an instance over an induced template, or None."""
    try:
        sorts = infer_sorts(instance, template)
    except SignatureError:
        return None
    for l, scope in instance.constraints():
        sig = template.relations[l].signature
        if any(sorts[v] != d for v, d in zip(scope, sig)):
            return None
    return sorts


def _trace_decoder(coll, sorts, blocks) -> Callable[[Mapping], dict | None]:
    traces = {i: trace(coll, i) for i in set(sorts.values())}

    def decode(solution):
        out = {}
        for v, block in blocks.items():
            g = traces[sorts[v]].decode(tuple(solution[u] for u in block))
            if g is None:
                return None
            out[v] = g
        return out

    return decode


@dataclass(frozen=True)
class UnionReduction:
    """Output of the reduction to the template with traces added."""

    template: Template
    instance: Instance
    decode: Callable[[Mapping], dict | None]
    sorts: dict


def union_template(template: Template, coll: AlgebraCollection) -> Template:
    """The base relations followed by one trace relation per domain."""
    rels = list(template.relations)
    names = list(template.names)
    for i in template.domains:
        if not coll.members(i):
            raise SignatureError(f"collection has no algebras over domain {i}")
        rels.append(trace(coll, i).relation)
        names.append(f"Tr_{i}")
    return Template(template.domains, tuple(rels), tuple(names))


def reduce_to_union(instance: Instance, template: Template,
                    coll: AlgebraCollection) -> UnionReduction | None:
    """Reduce an instance over the induced template to one over base plus traces.

    ``instance`` uses the relation slots of ``template`` (read as their
    induced counterparts). Returns None when the domain inference fails,
    which means the instance has no solution.
    """
    sorts = _infer_algebra_sorts(instance, template)
    if sorts is None:
        return None
    target = union_template(template, coll)
    s = len(template.relations)
    dom_index = {i: s + k for k, i in enumerate(template.domains)}
    blocks = {}
    for v in instance.variables:
        elems = template.domains.elements(sorts[v])
        blocks[v] = tuple((v, j, x) for j, n in enumerate(coll.signature)
                          for x in product(elems, repeat=n))
    variables = [u for v in instance.variables for u in blocks[v]]
    scopes = [[] for _ in target.relations]
    for v in instance.variables:
        scopes[dom_index[sorts[v]]].append(blocks[v])
    for l, rel in enumerate(template.relations):
        for j, n in enumerate(coll.signature):
            cols = power_columns(rel, n)
            for scope in instance.scopes[l]:
                for xs in cols:
                    scopes[l].append(tuple((v, j, x) for v, x in zip(scope, xs)))
    inst = Instance(tuple(variables), tuple(tuple(x) for x in scopes),
                    {u: sorts[u[0]] for u in variables})
    return UnionReduction(target, inst, _trace_decoder(coll, sorts, blocks), sorts)


@dataclass(frozen=True)
class StrongReduction:
    """Objects of the strong reduction.

    ``structure`` is R' over the base template extended by the trace (as the
    last relation), ``delta`` maps it onto the power prototype, and
    ``lifted``/``instance`` are the resulting lifted-language problem.
    """

    structure: Instance
    base: Template
    prototype: Instance
    delta: dict
    lifted: LiftedTemplate
    instance: Instance
    decode: Callable[[Mapping], dict | None]


def reduce_strong(instance: Instance, template: Template,
                  coll: AlgebraCollection) -> StrongReduction:
    """Strong reduction for one domain and a one-symbol signature."""
    if len(template.domains) != 1 or len(coll.signature) != 1:
        raise PremiseError("the strong reduction needs one domain and one operation symbol")
    dom = template.domains.ids[0]
    elems = template.domains.elements(dom)
    n = coll.signature[0]
    size = len(elems) ** n
    order = [alpha(elems, n, j) for j in range(1, size + 1)]
    tr = trace(coll, dom)
    base = template.with_relations([tr.relation], ["Tr"])
    blocks = {v: tuple((v, x) for x in order) for v in instance.variables}
    variables = [u for v in instance.variables for u in blocks[v]]
    scopes = []
    proto_scopes = []
    for l, rel in enumerate(template.relations):
        cols = power_columns(rel, n)
        scopes.append(tuple(tuple((v, x) for v, x in zip(scope, xs))
                            for scope in instance.scopes[l] for xs in cols))
        proto_scopes.append(tuple(tuple(xs) for xs in cols))
    scopes.append(tuple(blocks[v] for v in instance.variables))
    proto_scopes.append((tuple(order),))
    structure = Instance(tuple(variables), tuple(scopes))
    prototype = Instance(tuple(order), tuple(proto_scopes), {x: dom for x in order})
    delta = {u: u[1] for u in variables}
    pi = PrototypedInstance(structure, delta, prototype)
    lifted, inst = from_prototype(pi, base)
    sorts = {v: dom for v in instance.variables}
    return StrongReduction(structure, base, prototype, delta, lifted, inst,
                           _trace_decoder(coll, sorts, blocks))
