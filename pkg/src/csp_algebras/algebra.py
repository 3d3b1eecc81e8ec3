"""Algebras, algebra collections and the templates they induce.

A collection assigns to each domain id a list of algebras of one shared
signature. Algebras get global integer ids (gids) numbered across domains
in domain order, so the induced template has element-disjoint domains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Mapping, NamedTuple, Sequence

from .clone import MultiSortedOp, OpTable, preserves_columns
from .errors import ContractError, SignatureError
from .relcore import DomainTable, Instance, Relation, Template, check_homomorphism


@dataclass(frozen=True)
class Algebra:
    """A domain plus one operation table per signature symbol."""

    domain: int
    elements: tuple[int, ...]
    ops: tuple[OpTable, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        elements = tuple(self.elements)
        ops = tuple(self.ops)
        if not ops:
            raise ValueError("an algebra needs at least one operation")
        for op in ops:
            if op.elements != elements:
                raise SignatureError(
                    f"operation over {op.elements} in an algebra over {elements}")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "ops", ops)

    @property
    def signature(self) -> tuple[int, ...]:
        return tuple(op.arity for op in self.ops)

    def trace_row(self) -> tuple[int, ...]:
        row = []
        for op in self.ops:
            row.extend(op.values)
        return tuple(row)

    @classmethod
    def constant(cls, domain, elements, signature, a, name=None):
        ops = tuple(OpTable.constant(elements, n, a) for n in signature)
        return cls(domain, tuple(elements), ops, name)


class AlgebraCollection:
    """Per-domain lists of algebras over a shared signature.

    Duplicates (equal tables) are dropped, keeping the first occurrence; the
    given order is otherwise preserved.
    """

    def __init__(self, signature: Sequence[int], domains: DomainTable,
                 members: Mapping[int, Sequence[Algebra]]):
        signature = tuple(int(n) for n in signature)
        if not signature or any(n < 1 for n in signature):
            raise ValueError("signature needs at least one symbol of positive arity")
        self.signature = signature
        self.domains = domains
        self._members: dict[int, tuple[Algebra, ...]] = {}
        for dom_id in domains:
            algs = list(members.get(dom_id, ()))
            kept = []
            for a in algs:
                if a.domain != dom_id or a.elements != domains.elements(dom_id):
                    raise SignatureError(f"algebra {a.name!r} is not over domain {dom_id}")
                if a.signature != signature:
                    raise SignatureError(f"algebra {a.name!r} has signature {a.signature}")
                if a not in kept:
                    kept.append(a)
            if kept:
                self._members[dom_id] = tuple(kept)
        for dom_id in members:
            if dom_id not in domains:
                raise SignatureError(f"algebras given for unknown domain {dom_id}")
        self._rho_cache: dict = {}
        self._gids = []
        self._first_gid = {}
        for dom_id, algs in self._members.items():
            self._first_gid[dom_id] = len(self._gids)
            self._gids.extend((dom_id, k) for k in range(len(algs)))

    def members(self, dom_id: int) -> tuple[Algebra, ...]:
        return self._members.get(dom_id, ())

    @property
    def domain_ids(self) -> tuple[int, ...]:
        return tuple(self._members)

    def __len__(self):
        return len(self._gids)

    def gid(self, dom_id: int, position: int) -> int:
        if not 0 <= position < len(self.members(dom_id)):
            raise IndexError(f"no algebra {position} over domain {dom_id}")
        return self._first_gid[dom_id] + position

    def gids(self, dom_id: int) -> tuple[int, ...]:
        start = self._first_gid.get(dom_id)
        if start is None:
            return ()
        return tuple(range(start, start + len(self._members[dom_id])))

    def locate(self, gid: int) -> tuple[int, int]:
        return self._gids[gid]

    def algebra(self, gid: int) -> Algebra:
        dom_id, k = self._gids[gid]
        return self._members[dom_id][k]

    def find(self, algebra: Algebra) -> int | None:
        """Gid of the member equal to ``algebra``, or None."""
        for k, a in enumerate(self.members(algebra.domain)):
            if a == algebra:
                return self._first_gid[algebra.domain] + k
        return None

    def label(self, gid: int) -> str:
        a = self.algebra(gid)
        return a.name if a.name is not None else f"A{gid}"

    def domain_table(self) -> DomainTable:
        """Domains of the induced template: each B_i as a set of gids."""
        return DomainTable({i: self.gids(i) for i in self._members})

    def copy_domains(self) -> DomainTable:
        """One copy of D_i per algebra, keyed by the algebra's gid."""
        entries = {g: self.domains.elements(self.locate(g)[0]) for g in range(len(self))}
        tags = {g: ("copy", g) for g in entries}
        return DomainTable(entries, tags)

    def restricted(self, keep: Mapping[int, Sequence[int]]) -> AlgebraCollection:
        """Sub-collection keeping the listed gids per domain."""
        members = {i: [self.algebra(g) for g in gids] for i, gids in keep.items()}
        doms = DomainTable({i: self.domains.elements(i) for i in members if members[i]})
        return AlgebraCollection(self.signature, doms,
                                 {i: m for i, m in members.items() if m})

    def __repr__(self):
        sizes = {i: len(m) for i, m in self._members.items()}
        return f"AlgebraCollection(signature={self.signature}, sizes={sizes})"


def rho_B(rel: Relation, coll: AlgebraCollection) -> Relation:
    """Tuples of algebras whose operations preserve ``rel`` component-wise."""
    cached = coll._rho_cache.get(rel)
    if cached is not None:
        return cached
    choices = [coll.gids(i) for i in rel.signature]
    rows = []
    for combo in product(*choices):
        if all(preserves_columns([coll.algebra(g).ops[s] for g in combo], rel)
               for s in range(len(coll.signature))):
            rows.append(combo)
    out = Relation(rel.signature, rows)
    coll._rho_cache[rel] = out
    return out


def gamma_B(template: Template, coll: AlgebraCollection) -> Template:
    """The induced template: every relation mapped through :func:`rho_B`."""
    for i in template.domains:
        if not coll.members(i):
            raise SignatureError(f"collection has no algebras over domain {i}")
        if coll.domains.elements(i) != template.domains.elements(i):
            raise SignatureError(f"domain {i} of the template and of the collection differ; "
                                 "see align_to_collection")
    table = DomainTable({i: coll.gids(i) for i in template.domains})
    return Template(table, tuple(rho_B(r, coll) for r in template.relations), template.names)


def align_to_collection(template: Template, coll: AlgebraCollection):
    """Re-sign ``template`` so each domain id is the collection domain with equal elements.

    Returns ``(template, id_map)``; ``id_map`` sends old ids to new ones.
    """
    id_map = {}
    for i in template.domains:
        found = coll.domains.find(template.domains.elements(i))
        if found is None:
            raise SignatureError(f"collection has no domain equal to domain {i}")
        id_map[i] = found
    if len(set(id_map.values())) != len(id_map):
        raise SignatureError("two template domains map to one collection domain")
    table = DomainTable({id_map[i]: template.domains.elements(i) for i in template.domains})
    rels = tuple(r.resign(tuple(id_map[s] for s in r.signature)) for r in template.relations)
    return Template(table, rels, template.names), id_map


class TraceRelation(NamedTuple):
    """Trace of B_i plus the map from trace rows to gids."""

    relation: Relation
    row_to_gid: dict

    @property
    def arity(self) -> int:
        return self.relation.arity

    def decode(self, row) -> int | None:
        return self.row_to_gid.get(tuple(row))


def trace_arity(signature: Sequence[int], d: int) -> int:
    return sum(d ** n for n in signature)


def trace(coll: AlgebraCollection, dom_id: int) -> TraceRelation:
    """One row per algebra of B_i: its operation tables concatenated."""
    algs = coll.members(dom_id)
    if not algs:
        raise ValueError(f"collection has no algebras over domain {dom_id}")
    k = trace_arity(coll.signature, len(coll.domains.elements(dom_id)))
    rows = {a.trace_row(): g for a, g in zip(algs, coll.gids(dom_id))}
    return TraceRelation(Relation((dom_id,) * k, rows), rows)


def _interpretation(f, dom_id, elements):
    """The table f^{D_i}, or a table covering ``elements``."""
    if isinstance(f, MultiSortedOp):
        return f[dom_id]
    if not set(elements) <= set(f.elements):
        raise SignatureError(f"operation over {f.elements} cannot act on {elements}")
    return f


def _combine(f_table: OpTable, tables: Sequence[OpTable], elements) -> OpTable | None:
    """Pointwise f(t_1(x), ..., t_n(x)); None when a value leaves ``elements``."""
    allowed = set(elements)
    values = []
    for vals in zip(*(t.values for t in tables)):
        v = f_table(*vals)
        if v not in allowed:
            return None
        values.append(v)
    return OpTable(elements, tables[0].arity, values)


class AlgebraMap:
    """An operation on algebras induced by operations on the domains.

    ``apply`` works on :class:`Algebra` objects (None when the result is not
    an algebra over the same domain); calling with gids gives the restriction
    to the collection (None when the image falls outside it).
    """

    def __init__(self, coll: AlgebraCollection, arity: int,
                 fn: Callable[..., Algebra | None], name=""):
        self.coll = coll
        self.arity = arity
        self._fn = fn
        self.name = name

    def apply(self, *algebras: Algebra) -> Algebra | None:
        if len(algebras) != self.arity:
            raise ValueError(f"expected {self.arity} algebras")
        if len({a.domain for a in algebras}) != 1:
            raise SignatureError("arguments must share a domain")
        return self._fn(*algebras)

    def __call__(self, *gids: int) -> int | None:
        out = self.apply(*(self.coll.algebra(g) for g in gids))
        return None if out is None else self.coll.find(out)

    def failures(self, subset: Mapping[int, Sequence[int]] | None = None) -> list:
        """Argument tuples (of gids) whose image is outside the subset."""
        bad = []
        for dom_id in self.coll.domain_ids:
            gids = subset.get(dom_id, ()) if subset is not None else self.coll.gids(dom_id)
            allowed = set(gids)
            for args in product(gids, repeat=self.arity):
                out = self(*args)
                if out is None or out not in allowed:
                    bad.append(args)
        return bad

    def is_closed(self, subset=None) -> bool:
        """Whether every tuple from one B_i (or the given subsets) maps back into it."""
        return not self.failures(subset)

    def image(self, subset=None) -> dict:
        out = {}
        for dom_id in self.coll.domain_ids:
            gids = subset.get(dom_id, ()) if subset is not None else self.coll.gids(dom_id)
            out[dom_id] = tuple(sorted({self(*a) for a in product(gids, repeat=self.arity)}
                                       - {None}))
        return out

    def as_multisorted_op(self, subset=None) -> MultiSortedOp:
        """The restriction as an operation on the induced template's domains."""
        tables = {}
        for dom_id in self.coll.domain_ids:
            gids = subset.get(dom_id, ()) if subset is not None else self.coll.gids(dom_id)
            if not gids:
                continue
            values = []
            for args in product(gids, repeat=self.arity):
                out = self(*args)
                if out is None or out not in gids:
                    raise ContractError(f"{self.name or 'map'} is not closed at {args}")
                values.append(out)
            tables[dom_id] = OpTable(tuple(gids), self.arity, values)
        return MultiSortedOp(self.arity, tables)


def lift_outer(f, coll: AlgebraCollection) -> AlgebraMap:
    """The outer lift: combine the arguments' tables pointwise through ``f``."""

    def fn(*algebras):
        a0 = algebras[0]
        f_tab = _interpretation(f, a0.domain, a0.elements)
        ops = []
        for s in range(len(a0.ops)):
            t = _combine(f_tab, [a.ops[s] for a in algebras], a0.elements)
            if t is None:
                return None
            ops.append(t)
        return Algebra(a0.domain, a0.elements, tuple(ops))

    return AlgebraMap(coll, f.arity, fn, "outer lift")


def _substitute(outer: OpTable, inner: Sequence[OpTable], elements) -> OpTable | None:
    """outer(inner_1(x), ..., inner_k(x)) as a table over ``elements``."""
    allowed = set(elements)
    n = inner[0].arity
    values = []
    for x in product(elements, repeat=n):
        args = [t(*x) for t in inner]
        if any(a not in allowed for a in args):
            return None
        values.append(outer(*args))
    return OpTable(elements, n, values)


def endo_first_kind(system, coll: AlgebraCollection) -> AlgebraMap:
    """Substitute inner operations into every symbol.

    ``system[alpha][beta]`` is an operation of arity n_alpha; the new
    alpha-th operation is o_alpha(f_alpha1(x), ..., f_alpha n_alpha(x)).
    """
    if len(system) != len(coll.signature):
        raise ValueError(f"expected {len(coll.signature)} substitution lists")
    for alpha, (n, row) in enumerate(zip(coll.signature, system)):
        if len(row) != n:
            raise ValueError(f"symbol {alpha} needs {n} inner operations, got {len(row)}")
        for f in row:
            if f.arity != n:
                raise ValueError(f"inner operations of symbol {alpha} must have arity {n}")

    def fn(a):
        ops = []
        for op, row in zip(a.ops, system):
            inner = [_interpretation(f, a.domain, a.elements) for f in row]
            inner = [t if t.elements == a.elements else t.restrict(a.elements) for t in inner]
            t = _substitute(op, inner, a.elements)
            if t is None:
                return None
            ops.append(t)
        return Algebra(a.domain, a.elements, tuple(ops))

    return AlgebraMap(coll, 1, fn, "first-kind endomorphism")


def endo_second_kind(alpha: int, b, coll: AlgebraCollection) -> AlgebraMap:
    """Replace symbol ``alpha``'s operation o by b(o(x), x_1, ..., x_n)."""
    n = coll.signature[alpha]
    if b.arity != n + 1:
        raise ValueError(f"b must have arity {n + 1}, got {b.arity}")

    def fn(a):
        b_tab = _interpretation(b, a.domain, a.elements)
        op = a.ops[alpha]
        allowed = set(a.elements)
        values = []
        for x in product(a.elements, repeat=n):
            v = b_tab(op(*x), *x)
            if v not in allowed:
                return None
            values.append(v)
        ops = list(a.ops)
        ops[alpha] = OpTable(a.elements, n, values)
        return Algebra(a.domain, a.elements, tuple(ops))

    return AlgebraMap(coll, 1, fn, "second-kind endomorphism")


def preserves_trace(f, coll: AlgebraCollection, dom_id: int) -> bool:
    tr = trace(coll, dom_id).relation
    tab = _interpretation(f, dom_id, coll.domains.elements(dom_id))
    return bool(preserves_columns([tab] * tr.arity, tr))


def minv_member(rel: Relation, coll: AlgebraCollection) -> bool:
    """Membership of a relation over algebra copy-domains in MInv.

    Each signature entry of ``rel`` is the gid of the algebra whose copy of
    its domain the coordinate ranges over.
    """
    for g in rel.signature:
        if not 0 <= g < len(coll):
            raise SignatureError(f"unknown copy-domain {g}")
    for s in range(len(coll.signature)):
        tables = [coll.algebra(g).ops[s] for g in rel.signature]
        if not preserves_columns(tables, rel):
            return False
    return True


def solution_algebra_action(h, instance: Instance, template: Template,
                            coll: AlgebraCollection, symbol: int, args: Sequence[Mapping]):
    """Combine solutions pointwise with the algebras chosen by ``h``.

    ``h`` maps variables to gids and must be a solution over the induced
    template; ``args`` are solutions over ``template``. The result is
    checked to be a solution again.
    """
    n = coll.signature[symbol]
    if len(args) != n:
        raise ContractError(f"symbol {symbol} takes {n} solutions, got {len(args)}")
    if not check_homomorphism(h, instance, gamma_B(template, coll)):
        raise ContractError("h is not a solution over the induced template")
    for k, s in enumerate(args):
        if not check_homomorphism(s, instance, template):
            raise ContractError(f"argument {k} is not a solution")
    out = {v: coll.algebra(h[v]).ops[symbol](*(s[v] for s in args))
           for v in instance.variables}
    if not check_homomorphism(out, instance, template):
        raise ContractError("combined assignment is not a solution")
    return out
