"""Backtracking CSP solver with generalized arc consistency.

Variables are branched in the order of ``instance.variables`` (first
undecided variable, values ascending), so the first solution is the
lexicographically least one and ``mode="all"`` lists solutions in
lexicographic order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Mapping

from .relcore import DomainTable, Instance, Relation, Template

MODES = ("first", "count", "all")
CONSISTENCIES = ("gac", "sac")


class _Problem:
    """Index-based view of an instance: domains as frozensets, table rows."""

    def __init__(self, instance: Instance, template: Template, extra_unaries=None):
        instance.check_against(template)
        self.variables = instance.variables
        self.index = {v: i for i, v in enumerate(self.variables)}
        n = len(self.variables)
        doms: list = [None] * n
        for v, s in instance.sorts.items():
            doms[self.index[v]] = frozenset(template.domains.elements(s))
        self.scopes = []
        self.rows = []
        self.watch = [[] for _ in range(n)]
        for l, scope in instance.constraints():
            rel = template.relations[l]
            idx = tuple(self.index[v] for v in scope)
            for j, (i, dom_id) in enumerate(zip(idx, rel.signature)):
                elems = frozenset(template.domains.elements(dom_id))
                doms[i] = elems if doms[i] is None else doms[i] & elems
            rows = list(rel.tuples)
            if len(set(idx)) < len(idx):
                first = {}
                pairs = []
                for j, i in enumerate(idx):
                    if i in first:
                        pairs.append((first[i], j))
                    else:
                        first[i] = j
                rows = [t for t in rows if all(t[a] == t[b] for a, b in pairs)]
            c = len(self.scopes)
            self.scopes.append(idx)
            self.rows.append(rows)
            for i in set(idx):
                self.watch[i].append(c)
        default = frozenset(template.domains.elements(template.domains.ids[0]))
        for i in range(n):
            if doms[i] is None:
                doms[i] = default
        for v, allowed in (extra_unaries or {}).items():
            i = self.index[v]
            doms[i] = doms[i] & frozenset(allowed)
        self.doms = doms
        self.constrained = [bool(w) for w in self.watch]


def _propagate(p: _Problem, doms, rows, queue=None):
    """GAC to fixpoint. Mutates the ``doms``/``rows`` lists; False on wipe-out."""
    if queue is None:
        queue = deque(range(len(p.scopes)))
    if any(not d for d in doms):
        return False
    pending = set(queue)
    while queue:
        c = queue.popleft()
        pending.discard(c)
        scope = p.scopes[c]
        cur = rows[c]
        kept = [t for t in cur if all(t[j] in doms[i] for j, i in enumerate(scope))]
        if not kept:
            return False
        if len(kept) != len(cur):
            rows[c] = kept
        for j, i in enumerate(scope):
            support = {t[j] for t in kept}
            if len(support) < len(doms[i]):
                doms[i] = doms[i] & support
                for c2 in p.watch[i]:
                    if c2 != c and c2 not in pending:
                        pending.add(c2)
                        queue.append(c2)
    return True


def _assign(p, doms, rows, i, value):
    doms = list(doms)
    rows = list(rows)
    doms[i] = frozenset((value,))
    if _propagate(p, doms, rows, deque(p.watch[i])):
        return doms, rows
    return None


def _singleton_consistency(p, doms, rows):
    """Remove values whose assignment fails GAC, until nothing changes."""
    changed = True
    while changed:
        changed = False
        for i in range(len(doms)):
            if len(doms[i]) < 2:
                continue
            keep = frozenset(a for a in doms[i] if _assign(p, doms, rows, i, a))
            if keep != doms[i]:
                doms[i] = keep
                changed = True
                if not _propagate(p, doms, rows, deque(p.watch[i])):
                    return False
    return True


def _initial_state(p, consistency):
    if consistency not in CONSISTENCIES:
        raise ValueError(f"consistency must be one of {CONSISTENCIES}")
    doms = list(p.doms)
    rows = list(p.rows)
    if not _propagate(p, doms, rows):
        return None
    if consistency == "sac" and not _singleton_consistency(p, doms, rows):
        return None
    return doms, rows


def _search(p, doms, rows, mode, order=None):
    """Yield ``(doms, rows)`` leaves with every ordered variable fixed.

    In count mode the number of solutions below each leaf is yielded instead.
    """
    stack = [(doms, rows)]
    order = order if order is not None else range(len(doms))
    while stack:
        doms, rows = stack.pop()
        pick = next((i for i in order if len(doms[i]) > 1), None)
        if pick is None:
            if mode == "count":
                free = 1
                for i, d in enumerate(doms):
                    free *= len(d)
                yield free
            else:
                yield doms, rows
            continue
        if mode == "count" and not any(
                len(doms[i]) > 1 and p.constrained[i] for i in order):
            free = 1
            for d in doms:
                free *= len(d)
            yield free
            continue
        children = []
        for a in sorted(doms[pick]):
            child = _assign(p, doms, rows, pick, a)
            if child is not None:
                children.append(child)
        stack.extend(reversed(children))


def solve(instance: Instance, template: Template, mode="first", extra_unaries=None,
          consistency="gac"):
    """Solve ``instance`` over ``template``.

    ``mode="first"`` returns the lexicographically least solution as a dict
    or ``None``; ``"count"`` returns the number of solutions; ``"all"``
    returns every solution in lexicographic order.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    p = _Problem(instance, template, extra_unaries)
    state = _initial_state(p, consistency)
    if state is None:
        return {"first": None, "count": 0, "all": []}[mode]
    gen = _search(p, *state, mode)
    if mode == "count":
        return sum(gen)
    if mode == "first":
        found = next(gen, None)
        return None if found is None else _to_assignment(p, found[0])
    return [_to_assignment(p, d) for d, _ in gen]


def _to_assignment(p, doms):
    return {v: min(d) for v, d in zip(p.variables, doms)}


def is_satisfiable(instance, template, extra_unaries=None) -> bool:
    return solve(instance, template, "first", extra_unaries) is not None


def enumerate_homomorphisms(src, dst: Template) -> list[dict]:
    """All homomorphisms from ``src`` to ``dst`` in lexicographic order.

    ``src`` is an :class:`Instance` or a :class:`Template`; for a template the
    variables are ``(domain_id, element)`` points of its domains.
    """
    if isinstance(src, Template):
        src = template_as_instance(src)
    return solve(src, dst, "all")


def template_as_instance(t: Template) -> Instance:
    """Treat a template as a left-hand structure on its ``(domain, element)`` points."""
    variables = [(i, a) for i in t.domains for a in t.domains.elements(i)]
    scopes = []
    for rel in t.relations:
        scopes.append(tuple(tuple(zip(rel.signature, row)) for row in rel.tuples))
    return Instance(tuple(variables), tuple(scopes))


def project_solutions(instance: Instance, template: Template, onto,
                      extra_unaries=None) -> list[tuple]:
    """Distinct restrictions of the solutions to the variables ``onto``, sorted."""
    p = _Problem(instance, template, extra_unaries)
    state = _initial_state(p, "gac")
    if state is None:
        return []
    onto_idx = [p.index[v] for v in onto]
    out = []
    for doms, rows in _search(p, *state, "all", order=onto_idx):
        # every onto variable is fixed; check that the rest can be completed
        rest = next(_search(p, doms, rows, "first"), None)
        if rest is not None:
            out.append(tuple(min(doms[i]) for i in onto_idx))
    return sorted(set(out))


@dataclass
class PreprocessResult:
    """Outcome of local-consistency preprocessing.

    ``constraints`` pairs each original scope with its pruned relation,
    ``unary_domains`` gives D_v for every variable, and ``delta`` maps each
    variable to the id of its domain in ``domain_table``.
    """

    defined: bool
    variables: tuple = ()
    constraints: list = field(default_factory=list)
    unary_domains: dict = field(default_factory=dict)
    delta: dict = field(default_factory=dict)
    domain_table: DomainTable | None = None
    source: tuple | None = None

    def constrained_variables(self) -> list:
        seen = {}
        for scope, _ in self.constraints:
            for v in scope:
                seen.setdefault(v, None)
        return [v for v in self.variables if v in seen]

    def as_problem(self, domains: DomainTable | None = None, drop_free=True):
        """The preprocessed instance as its own (template, instance) pair.

        Each pruned constraint becomes one relation of the returned template,
        signed by the domain whose element set equals the variable's D_v.
        ``domains`` supplies the domain table to sign against; by default the
        distinct D_v sets are used.
        """
        if not self.defined:
            raise ValueError("preprocessing found the instance inconsistent")
        if domains is None:
            domains = self.domain_table
        keep = self.constrained_variables() if drop_free else list(self.variables)
        rels, names, scopes = [], [], []
        for k, (scope, rel) in enumerate(self.constraints):
            sig = []
            for v in scope:
                dom_id = domains.find(self.unary_domains[v])
                if dom_id is None:
                    raise ValueError(
                        f"no domain with elements {sorted(self.unary_domains[v])}")
                sig.append(dom_id)
            rels.append(rel.resign(sig))
            names.append(f"c{k}")
            scopes.append((scope,))
        sorts = {v: domains.find(self.unary_domains[v]) for v in keep}
        template = Template(domains, tuple(rels), tuple(names))
        inst = Instance(tuple(keep), tuple(scopes), sorts)
        return template, inst


def _domain_table_of(sets) -> DomainTable:
    distinct = sorted({tuple(sorted(s)) for s in sets}, key=lambda e: (len(e), e))
    return DomainTable({k: e for k, e in enumerate(distinct)})


def gac_preprocess(instance: Instance, template: Template, extra_unaries=None,
                   consistency="gac") -> PreprocessResult:
    """Local-consistency preprocessing; solutions are preserved unchanged.

    Returns ``defined=False`` when a domain or a relation empties. Otherwise
    every pruned relation projects onto the D_v of each of its variables.
    """
    p = _Problem(instance, template, extra_unaries)
    state = _initial_state(p, consistency)
    if state is None:
        return PreprocessResult(False, instance.variables, source=(instance, template))
    doms, rows = state
    constraints = []
    for c, scope in enumerate(p.scopes):
        vars_ = tuple(p.variables[i] for i in scope)
        sig = template.relations[_relation_index(instance, c)].signature
        constraints.append((vars_, Relation(sig, rows[c])))
    unary = {v: tuple(sorted(d)) for v, d in zip(p.variables, doms)}
    table = _domain_table_of(unary.values())
    delta = {v: table.find(unary[v]) for v in p.variables}
    return PreprocessResult(True, instance.variables, constraints, unary, delta, table,
                            (instance, template))


def _relation_index(instance: Instance, c: int) -> int:
    for l, lst in enumerate(instance.scopes):
        if c < len(lst):
            return l
        c -= len(lst)
    raise IndexError(c)


def assignment_satisfies(assignment: Mapping[Hashable, int], instance: Instance,
                         template: Template) -> bool:
    """True when ``assignment`` sends every scope into its relation."""
    for l, scope in instance.constraints():
        if tuple(assignment[v] for v in scope) not in template.relations[l]:
            return False
    return True
