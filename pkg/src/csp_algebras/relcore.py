"""Domains and multi-sorted relations, plus the templates and instances built from them.

Elements are small non-negative integers. A relation carries a signature of
domain ids and a canonical (sorted, duplicate-free) tuple list, so two
relations are equal exactly when they denote the same set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Hashable, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import SignatureError


class DomainTable:
    """Ordered map from domain id to a strictly ascending element tuple.

    ``tags`` optionally records where a domain came from (for example
    ``("copy", v)`` for the per-variable copies of a lifted language).
    """

    __slots__ = ("_entries", "_tags")

    def __init__(self, entries, tags=None):
        if isinstance(entries, Mapping):
            entries = entries.items()
        table = {}
        for dom_id, elements in entries:
            dom_id = int(dom_id)
            if dom_id < 0:
                raise ValueError(f"domain id {dom_id} is negative")
            if dom_id in table:
                raise ValueError(f"duplicate domain id {dom_id}")
            elems = tuple(sorted(set(int(e) for e in elements)))
            if not elems:
                raise ValueError(f"domain {dom_id} is empty")
            if len(elems) != len(list(elements)):
                raise ValueError(f"domain {dom_id} has duplicate elements")
            if elems[0] < 0:
                raise ValueError(f"domain {dom_id} has a negative element")
            table[dom_id] = elems
        self._entries = table
        self._tags = dict(tags or {})
        seen = {}
        for dom_id, elems in table.items():
            other = seen.setdefault(elems, dom_id)
            if other != dom_id and self._tags.get(dom_id) is None:
                raise ValueError(
                    f"domains {other} and {dom_id} have equal elements; tag the "
                    "later one as a copy")

    @classmethod
    def single(cls, elements, dom_id=0):
        return cls({dom_id: elements})

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(self._entries)

    def elements(self, dom_id: int) -> tuple[int, ...]:
        try:
            return self._entries[dom_id]
        except KeyError:
            raise SignatureError(f"unknown domain id {dom_id}") from None

    def size(self, dom_id: int) -> int:
        return len(self.elements(dom_id))

    def tag(self, dom_id: int):
        return self._tags.get(dom_id)

    def find(self, elements) -> int | None:
        """Id of the first domain whose element set equals ``elements``."""
        target = tuple(sorted(set(elements)))
        for dom_id, elems in self._entries.items():
            if elems == target:
                return dom_id
        return None

    def items(self):
        return self._entries.items()

    def __contains__(self, dom_id) -> bool:
        return dom_id in self._entries

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __eq__(self, other):
        if not isinstance(other, DomainTable):
            return NotImplemented
        return list(self._entries.items()) == list(other._entries.items())

    def __hash__(self):
        return hash(tuple(self._entries.items()))

    def __repr__(self):
        body = ", ".join(f"{k}: {set(v)}" for k, v in self._entries.items())
        return f"DomainTable({{{body}}})"


@dataclass(frozen=True)
class Relation:
    """A multi-sorted relation: a signature of domain ids plus a tuple set."""

    signature: tuple[int, ...]
    tuples: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        sig = tuple(int(s) for s in self.signature)
        if not sig:
            raise ValueError("relations must have arity at least 1")
        rows = set()
        for t in self.tuples:
            t = tuple(int(x) for x in t)
            if len(t) != len(sig):
                raise SignatureError(
                    f"tuple {t} has length {len(t)}, expected {len(sig)}")
            rows.add(t)
        object.__setattr__(self, "signature", sig)
        object.__setattr__(self, "tuples", tuple(sorted(rows)))

    @classmethod
    def single_sorted(cls, tuples, arity=None, dom_id=0):
        tuples = [tuple(t) for t in tuples]
        if arity is None:
            if not tuples:
                raise ValueError("arity is required for an empty relation")
            arity = len(tuples[0])
        return cls((dom_id,) * arity, tuples)

    @property
    def arity(self) -> int:
        return len(self.signature)

    def __len__(self):
        return len(self.tuples)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.tuples)

    def __contains__(self, t) -> bool:
        return tuple(t) in self._members

    @property
    def _members(self) -> frozenset:
        cached = self.__dict__.get("_member_cache")
        if cached is None:
            cached = frozenset(self.tuples)
            object.__setattr__(self, "_member_cache", cached)
        return cached

    def column(self, j: int) -> tuple[int, ...]:
        """Sorted set of values in coordinate ``j`` (zero-based)."""
        return tuple(sorted({t[j] for t in self.tuples}))

    def resign(self, signature) -> Relation:
        return Relation(tuple(signature), self.tuples)

    def check_in(self, domains: DomainTable) -> None:
        for j, dom_id in enumerate(self.signature):
            allowed = set(domains.elements(dom_id))
            for t in self.tuples:
                if t[j] not in allowed:
                    raise SignatureError(
                        f"value {t[j]} at coordinate {j} of {t} is not in "
                        f"domain {dom_id}")


def project(rel: Relation, coords: Iterable[int]) -> Relation:
    """Projection onto an ascending set of zero-based coordinates."""
    coords = tuple(coords)
    if not coords:
        raise ValueError("projection needs at least one coordinate")
    if list(coords) != sorted(set(coords)):
        raise ValueError("projection coordinates must be strictly ascending")
    for c in coords:
        if not 0 <= c < rel.arity:
            raise IndexError(f"coordinate {c} out of range for arity {rel.arity}")
    sig = tuple(rel.signature[c] for c in coords)
    return Relation(sig, [tuple(t[c] for c in coords) for t in rel.tuples])


def lex_rank(tup: Sequence[int], elements: Sequence[int]) -> int:
    """One-based position of ``tup`` in the lexicographic order of D^n."""
    pos = {e: i for i, e in enumerate(elements)}
    d = len(elements)
    rank = 0
    for x in tup:
        if x not in pos:
            raise ValueError(f"element {x} is not in {tuple(elements)}")
        rank = rank * d + pos[x]
    return rank + 1


def alpha(elements: Sequence[int], n: int, j: int) -> tuple[int, ...]:
    """The ``j``-th (one-based) tuple of D^n in lexicographic order."""
    d = len(elements)
    if not 1 <= j <= d ** n:
        raise ValueError(f"index {j} outside 1..{d ** n}")
    j -= 1
    out = []
    for _ in range(n):
        j, r = divmod(j, d)
        out.append(elements[r])
    return tuple(reversed(out))


def power_columns(rel: Relation, n: int) -> list[tuple[tuple[int, ...], ...]]:
    """Tuples of rho^n as column tuples, in lexicographic order of row choices.

    Each entry is ``(x_1, ..., x_m)`` with ``x_l`` the l-th column of an
    ``n x m`` matrix whose rows are all in ``rel``.
    """
    if n < 1:
        raise ValueError("power must be at least 1")
    return [tuple(zip(*rows)) for rows in product(rel.tuples, repeat=n)]


def power_relation(rel: Relation, n: int, domains: DomainTable) -> Relation:
    """rho^n with every column encoded by its zero-based lexicographic rank.

    The signature keeps the original domain ids; coordinate values range over
    ``0 .. |D_i|^n - 1``.
    """
    elems = [domains.elements(i) for i in rel.signature]
    rows = []
    for cols in power_columns(rel, n):
        rows.append(tuple(lex_rank(x, e) - 1 for x, e in zip(cols, elems)))
    return Relation(rel.signature, rows)


@dataclass(frozen=True)
class Template:
    """A relational structure (D, rho_1, ..., rho_s) over a domain table."""

    domains: DomainTable
    relations: tuple[Relation, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        rels = tuple(self.relations)
        names = tuple(self.names) or tuple(f"r{i}" for i in range(len(rels)))
        if len(names) != len(rels):
            raise ValueError("one name per relation is required")
        if len(set(names)) != len(names):
            raise ValueError("relation names must be unique")
        for rel in rels:
            rel.check_in(self.domains)
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "names", names)

    @classmethod
    def single_sorted(cls, elements, relations, names=()):
        """Template over one domain (id 0) from plain tuple lists."""
        rels = []
        for r in relations:
            if isinstance(r, Relation):
                rels.append(r.resign((0,) * r.arity))
            else:
                rels.append(Relation.single_sorted(r))
        return cls(DomainTable.single(elements), tuple(rels), tuple(names))

    def __len__(self):
        return len(self.relations)

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(r.arity for r in self.relations)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no relation named {name!r}") from None

    @property
    def includes_domain_unaries(self) -> bool:
        present = {(r.signature[0], r.tuples) for r in self.relations if r.arity == 1}
        return all((i, tuple((e,) for e in self.domains.elements(i))) in present
                   for i in self.domains)

    def with_domain_unaries(self) -> Template:
        rels = list(self.relations)
        names = list(self.names)
        for i in self.domains:
            unary = Relation((i,), [(e,) for e in self.domains.elements(i)])
            if unary not in rels:
                rels.append(unary)
                names.append(_fresh(names, f"D{i}"))
        return Template(self.domains, tuple(rels), tuple(names))

    def with_relations(self, extra: Sequence[Relation], names: Sequence[str] = ()) -> Template:
        names = list(names) or [f"x{k}" for k in range(len(extra))]
        all_names = list(self.names)
        for n in names:
            all_names.append(_fresh(all_names, n))
        return Template(self.domains, self.relations + tuple(extra), tuple(all_names))


def _fresh(taken, base):
    name, k = base, 1
    while name in taken:
        name = f"{base}_{k}"
        k += 1
    return name


@dataclass(frozen=True)
class Instance:
    """Left-hand structure R = (V, r_1, ..., r_s).

    ``scopes[l]`` lists the variable tuples constrained by relation ``l`` of
    the template. ``sorts`` optionally pins variables to domain ids; it is
    the domain function of the multi-sorted formulation.
    """

    variables: tuple[Hashable, ...]
    scopes: tuple[tuple[tuple[Hashable, ...], ...], ...]
    sorts: Mapping[Hashable, int] = field(default_factory=dict)

    def __post_init__(self):
        variables = tuple(self.variables)
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variables")
        scopes = tuple(tuple(tuple(s) for s in lst) for lst in self.scopes)
        known = set(variables)
        for lst in scopes:
            for scope in lst:
                for v in scope:
                    if v not in known:
                        raise ValueError(f"variable {v!r} used in a scope but not declared")
        for v in self.sorts:
            if v not in known:
                raise ValueError(f"sort given for undeclared variable {v!r}")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "scopes", scopes)
        object.__setattr__(self, "sorts", dict(self.sorts))

    @classmethod
    def from_constraints(cls, constraints, n_relations, variables=None, sorts=None):
        """Build from ``(relation_index, scope)`` pairs.

        Variables default to order of first appearance.
        """
        scopes = [[] for _ in range(n_relations)]
        seen = {} if variables is None else {v: None for v in variables}
        for l, scope in constraints:
            scope = tuple(scope)
            scopes[l].append(scope)
            for v in scope:
                seen.setdefault(v, None)
        return cls(tuple(seen), tuple(tuple(s) for s in scopes), dict(sorts or {}))

    def constraints(self) -> Iterator[tuple[int, tuple]]:
        for l, lst in enumerate(self.scopes):
            for scope in lst:
                yield l, scope

    def n_constraints(self) -> int:
        return sum(len(lst) for lst in self.scopes)

    def check_against(self, template: Template) -> None:
        if len(self.scopes) != len(template.relations):
            raise SignatureError(
                f"instance has {len(self.scopes)} relation slots, template has "
                f"{len(template.relations)}")
        for l, scope in self.constraints():
            if len(scope) != template.relations[l].arity:
                raise SignatureError(
                    f"scope {scope} has length {len(scope)} but relation "
                    f"{template.names[l]!r} has arity {template.relations[l].arity}")
        for v, s in self.sorts.items():
            if s not in template.domains:
                raise SignatureError(f"variable {v!r} sorted to unknown domain {s}")


def infer_sorts(instance: Instance, template: Template, strict=True) -> dict:
    """Domain function v -> domain id read off the relation signatures.

    Explicit ``instance.sorts`` win. With ``strict`` a variable seen at
    coordinates of two different domains raises; otherwise it is reported as
    ``None``. Variables in no constraint default to the first domain.
    """
    instance.check_against(template)
    sorts: dict = {}
    for l, scope in instance.constraints():
        sig = template.relations[l].signature
        for v, dom in zip(scope, sig):
            if v in instance.sorts:
                continue
            if v not in sorts:
                sorts[v] = dom
            elif sorts[v] is not None and sorts[v] != dom:
                if strict:
                    raise SignatureError(
                        f"variable {v!r} occurs in domains {sorts[v]} and {dom}")
                sorts[v] = None
    first = template.domains.ids[0]
    out = {}
    for v in instance.variables:
        if v in instance.sorts:
            out[v] = instance.sorts[v]
        else:
            out[v] = sorts.get(v, first)
    return out


class HomCheck(NamedTuple):
    """Outcome of a homomorphism check; falsy on failure."""

    ok: bool
    relation: int | None = None
    scope: tuple | None = None
    image: tuple | None = None

    def __bool__(self):
        return self.ok


def _structure_of(src):
    """Scopes of a source structure as ``(l, tuple_of_points)`` pairs."""
    if isinstance(src, Instance):
        for l, scope in src.constraints():
            yield l, scope
    else:
        for l, rel in enumerate(src.relations):
            for t in rel.tuples:
                yield l, tuple(zip(rel.signature, t))


def check_homomorphism(h, src, dst) -> HomCheck:
    """Check that ``h`` maps every scope of ``src`` into ``dst``.

    ``src`` is an :class:`Instance` (``h`` maps variables) or a
    :class:`Template` (``h`` maps ``(domain_id, element)`` points).
    ``dst`` is a :class:`Template` or an :class:`Instance` used as a plain
    relational structure. ``h`` may be a mapping or a callable.
    """
    src_arities = (tuple(r.arity for r in src.relations) if isinstance(src, Template)
                   else None)
    n_src = len(src.relations) if isinstance(src, Template) else len(src.scopes)
    n_dst = len(dst.relations) if isinstance(dst, Template) else len(dst.scopes)
    if n_src != n_dst:
        raise SignatureError(f"source has {n_src} relations, target has {n_dst}")
    if isinstance(dst, Template):
        targets = [r._members for r in dst.relations]
        dst_arities = dst.arities
    else:
        targets = [frozenset(lst) for lst in dst.scopes]
        dst_arities = None
    if src_arities is not None and dst_arities is not None and src_arities != dst_arities:
        raise SignatureError(f"arities differ: {src_arities} vs {dst_arities}")
    lookup = h if callable(h) and not isinstance(h, Mapping) else h.__getitem__
    for l, scope in _structure_of(src):
        if dst_arities is not None and len(scope) != dst_arities[l]:
            raise SignatureError(
                f"scope {scope} does not match arity {dst_arities[l]} of relation {l}")
        image = tuple(lookup(x) for x in scope)
        if image not in targets[l]:
            return HomCheck(False, l, scope, image)
    return HomCheck(True)
