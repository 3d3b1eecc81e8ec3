"""Bounded-width witness for the induced template over M.

Steps: find the pair coloring with witness polymorphisms f, g, h by search;
build the terms w and w_n; retract the induced template with the
endomorphisms e1 and e2; check that every lifted w_n is a weak
near-unanimity polymorphism of the retract.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

from .algebra import AlgebraMap, endo_second_kind, gamma_B, lift_outer
from .clone import (App, OpTable, Var, check_identity, eval_term, find_polymorphism,
                    preserves, preserves_all)
from .errors import ContractError, NotFoundError, PremiseError
from .relax import MCollection, build_M
from .relcore import DomainTable, Relation, Template, check_homomorphism, project

RED, YELLOW, BLUE = "red", "yellow", "blue"


def conservative_closure(template: Template) -> Template:
    """Add every non-empty subset of the domain as a unary relation."""
    if len(template.domains) != 1:
        raise PremiseError("expected a template over a single domain")
    dom = template.domains.ids[0]
    elems = template.domains.elements(dom)
    extra = []
    for k in range(1, len(elems) + 1):
        for sub in combinations(elems, k):
            r = Relation((dom,), [(a,) for a in sub])
            if r not in template.relations and r not in extra:
                extra.append(r)
    return template.with_relations(extra, [f"U{''.join(map(str, r.column(0)))}" for r in extra])


def as_subset_sorted(template: Template, M: MCollection) -> Template:
    """Re-sign each relation by its column projections, as domains of M."""
    rels = []
    for rel in template.relations:
        if not rel.tuples:
            raise PremiseError("empty relations have no column projections")
        sig = []
        for j in range(rel.arity):
            col = rel.column(j)
            if len(col) > 2:
                raise PremiseError(f"a column of {template.names[len(rels)]!r} has "
                                   f"{len(col)} values")
            sig.append(M.subset_id(col))
        rels.append(rel.resign(sig))
    return Template(M.domains, tuple(rels), template.names)


def _semilattice_on(a, b, top):
    """Table of a semilattice on {a, b} absorbing at ``top``."""
    return {(a, a): a, (b, b): b, (a, b): top, (b, a): top}


def _pair_ops(pair, color, absorbing=None):
    """f on pair^2 and g, h on pair^3 prescribed by a color."""
    a, b = pair
    if color == RED:
        f = _semilattice_on(a, b, absorbing)
        tri = {x: (absorbing if absorbing in x else x[0]) for x in product(pair, repeat=3)}
        return f, dict(tri), dict(tri)
    first2 = {x: x[0] for x in product(pair, repeat=2)}
    first3 = {x: x[0] for x in product(pair, repeat=3)}
    if color == YELLOW:
        maj = {x: max(set(x), key=x.count) for x in product(pair, repeat=3)}
        return first2, maj, first3
    mino = {x: (x[0] if x[1] == x[2] else x[1] if x[0] == x[2] else x[2])
            for x in product(pair, repeat=3)}
    return first2, first3, mino


_CHOICES = ((RED, 0), (RED, 1), (YELLOW, None), (BLUE, None))


@dataclass
class PairColoring:
    """Colors of the two-element subsets plus the witness operations."""

    colors: dict
    absorbing: dict
    f: OpTable
    g: OpTable
    h: OpTable
    template: Template = field(repr=False, default=None)

    def color(self, pair) -> str:
        return self.colors[tuple(sorted(pair))]


def _pair_feasible(template, dom, pair, color, absorbing):
    f, g, h = _pair_ops(pair, color, absorbing)
    tabs = [OpTable(pair, 2, [f[x] for x in product(pair, repeat=2)]),
            OpTable(pair, 3, [g[x] for x in product(pair, repeat=3)]),
            OpTable(pair, 3, [h[x] for x in product(pair, repeat=3)])]
    for rel in template.relations:
        sub = Relation((dom,) * rel.arity, [t for t in rel.tuples if set(t) <= set(pair)])
        if sub.tuples and not all(preserves(t, sub) for t in tabs):
            return False
    return True


def find_bulatov_ops(template: Template) -> PairColoring:
    """Search for a coloring and polymorphisms f, g, h meeting the pair conditions.

    Every unary subset relation is added first. Choices per pair are tried
    in the order red (smaller element absorbing), red (larger absorbing),
    yellow, blue; the first globally consistent combination is returned.
    """
    t = conservative_closure(template)
    dom = t.domains.ids[0]
    elems = t.domains.elements(dom)
    pairs = list(combinations(elems, 2))
    options = []
    for pair in pairs:
        ok = [(c, None if k is None else pair[k]) for c, k in _CHOICES
              if _pair_feasible(t, dom, pair, c, None if k is None else pair[k])]
        if not ok:
            raise NotFoundError(f"no color fits the pair {pair}")
        options.append(ok)
    for combo in product(*options):
        fmap, gmap, hmap = {}, {}, {}
        for a in elems:
            fmap[(a, a)] = a
            gmap[(a,) * 3] = a
            hmap[(a,) * 3] = a
        for pair, (color, top) in zip(pairs, combo):
            f2, g3, h3 = _pair_ops(pair, color, top)
            fmap.update(f2)
            gmap.update(g3)
            hmap.update(h3)
        f = OpTable(elems, 2, [fmap[x] for x in product(elems, repeat=2)])
        if not preserves_all(f, t.relations):
            continue
        g = _complete(t, dom, gmap)
        if g is None:
            continue
        h = _complete(t, dom, hmap)
        if h is None:
            continue
        colors = {p: c for p, (c, _) in zip(pairs, combo)}
        absorbing = {p: a for p, (c, a) in zip(pairs, combo) if c == RED}
        return PairColoring(colors, absorbing, f, g, h, t)
    raise NotFoundError("no consistent coloring; the template may be intractable")


def _complete(template, dom, fixed):
    """A ternary conservative polymorphism extending the prescribed entries."""
    restrict = {}
    for x in product(template.domains.elements(dom), repeat=3):
        restrict[(dom, x)] = {fixed[x]} if x in fixed else set(x)
    return find_polymorphism(template, 3, restrict)


def w_term():
    """w(x, y, z) = g(h(x, y, z), y, z) over the environment [g, h]."""
    x, y, z = Var(0), Var(1), Var(2)
    return App(0, [App(1, [x, y, z]), y, z])


def build_w_terms(coloring: PairColoring, n_max: int) -> dict[int, OpTable]:
    """The operations w_3, ..., w_{n_max} built by the recursion from w."""
    w = eval_term(w_term(), [coloring.g, coloring.h], 3)
    if not check_identity(w, "wnu"):
        raise ContractError("w is not a weak near-unanimity operation; bad coloring")
    out = {}
    term = App(0, [Var(0), Var(1), Var(2)])
    for n in range(3, n_max + 1):
        if n > 3:
            term = App(0, [term, Var(n - 2), Var(n - 1)])
        out[n] = eval_term(term, [w], n)
    return out


def b_operation(coloring: PairColoring) -> OpTable:
    """b(x, y, z, t) = u(x, w(y, z, t)) with u(x, y) = w(x, x, y)."""
    w = eval_term(w_term(), [coloring.g, coloring.h], 3)
    x, y, z, t = Var(0), Var(1), Var(2), Var(3)
    term = App(0, [x, x, App(0, [y, z, t])])
    return eval_term(term, [w], 4)


@dataclass
class Simplification:
    """The retract of the induced template under e2 after e1."""

    template: Template
    collection: MCollection
    members: dict
    provenance: dict
    e1: dict
    e2: AlgebraMap
    induced: Template
    e1_check: object
    e2_closed: bool
    e2_preserves: bool


def _image_relation(rel: Relation, fn) -> Relation:
    return Relation(rel.signature, [tuple(fn(g) for g in t) for t in rel.tuples])


def apply_endos(template: Template, coloring: PairColoring, M: MCollection | None = None,
                check=True) -> Simplification:
    """Apply e1 then e2 to the induced template over M.

    ``template`` is single-sorted with column projections of size at most 2.
    Raises :class:`ContractError` when e1 is not an endomorphism or e2 does
    not preserve the collection and relations left by e1.
    """
    dom = template.domains.ids[0]
    elems = template.domains.elements(dom)
    M = M or build_M(elems)
    sub_t = as_subset_sorted(template, M)
    induced = gamma_B(sub_t, M)
    e1 = {}
    provenance = {}
    for d in M.domains:
        subset = M.domains.elements(d)
        if len(subset) == 1:
            provenance[d] = "singleton"
            color = None
        else:
            color = coloring.color(subset)
            provenance[d] = color
        for g in M.gids(d):
            if color == RED:
                e1[g] = M.by_name(subset, "const", coloring.absorbing[subset])
            else:
                e1[g] = g
    e1_check = check_homomorphism(lambda p: e1[p[1]], induced, induced)
    if check and not e1_check:
        raise ContractError(f"e1 is not an endomorphism: {e1_check}")
    after_e1 = {d: tuple(sorted({e1[g] for g in M.gids(d)})) for d in M.domains}
    rels1 = [_image_relation(r, e1.__getitem__) for r in induced.relations]
    e2 = endo_second_kind(0, b_operation(coloring), M)
    e2_closed = e2.is_closed(after_e1)
    e2_preserves = False
    if e2_closed:
        op = e2.as_multisorted_op(after_e1)
        e2_preserves = all(preserves(op, r) for r in rels1)
    if check and not (e2_closed and e2_preserves):
        raise ContractError("e2 does not preserve the collection simplified by e1")
    members = {d: tuple(sorted({e2(g) for g in after_e1[d]})) for d in M.domains}
    rels2 = [_image_relation(r, e2) for r in rels1]
    table = DomainTable({d: members[d] for d in M.domains})
    simplified = Template(table, tuple(rels2), template.names)
    return Simplification(simplified, M, members, provenance, e1, e2, induced,
                          e1_check, e2_closed, e2_preserves)


@dataclass
class WitnessReport:
    ok: bool
    per_arity: dict

    def __bool__(self):
        return self.ok


def verify_witness(simp: Simplification, w_terms: dict, n_range=range(3, 7)) -> WitnessReport:
    """Check that each lifted w_n is a WNU polymorphism of the retract (and closed on it)."""
    per = {}
    for n in n_range:
        lifted = lift_outer(w_terms[n], simp.collection)
        closed = lifted.is_closed(simp.members)
        wnu = keeps = False
        if closed:
            op = lifted.as_multisorted_op(simp.members)
            wnu = bool(check_identity(op, "wnu"))
            keeps = all(preserves(op, r) for r in simp.template.relations)
        per[n] = {"closed": closed, "wnu": wnu, "preserves": keeps}
    ok = all(all(v.values()) for v in per.values())
    return WitnessReport(ok, per)


def factoring_holds(rel: Relation, coloring: PairColoring) -> bool:
    """Red columns fixed at their absorbing values times the rest stays inside ``rel``."""
    red, rest = {}, []
    for j in range(rel.arity):
        col = rel.column(j)
        if len(col) == 2 and coloring.color(col) == RED:
            red[j] = coloring.absorbing[col]
        else:
            rest.append(j)
    if not rest:
        return tuple(red[j] for j in range(rel.arity)) in rel
    for t in project(rel, rest).tuples:
        full = dict(zip(rest, t))
        full.update(red)
        if tuple(full[j] for j in range(rel.arity)) not in rel:
            return False
    return True


def bounded_width_witness(template: Template, n_range=range(3, 7)):
    """Run the whole chain; returns ``(coloring, simplification, report)``."""
    coloring = find_bulatov_ops(template)
    terms = build_w_terms(coloring, max(n_range, default=3))
    simp = apply_endos(template, coloring)
    return coloring, simp, verify_witness(simp, terms, n_range)
