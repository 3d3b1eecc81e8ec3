"""Finite operations and their polymorphism, term and identity machinery."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import GuardExceeded, SignatureError
from .relcore import Instance, Relation, Template, power_columns
from .solver import project_solutions, solve

INDICATOR_GUARD = 64


@dataclass(frozen=True)
class OpTable:
    """A total ``arity``-ary operation on ``elements``.

    ``values[k]`` is the value at the k-th argument tuple in lexicographic
    order (zero-based rank).
    """

    elements: tuple[int, ...]
    arity: int
    values: tuple[int, ...]

    def __post_init__(self):
        elements = tuple(int(e) for e in self.elements)
        values = tuple(int(v) for v in self.values)
        if self.arity < 1:
            raise ValueError("operations need arity at least 1")
        if len(values) != len(elements) ** self.arity:
            raise ValueError(
                f"table has {len(values)} entries, expected {len(elements) ** self.arity}")
        allowed = set(elements)
        bad = [v for v in values if v not in allowed]
        if bad:
            raise ValueError(f"table value {bad[0]} is outside {elements}")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, elements, arity, fn: Callable) -> OpTable:
        elements = tuple(elements)
        return cls(elements, arity, tuple(fn(*x) for x in product(elements, repeat=arity)))

    @classmethod
    def projection(cls, elements, arity, j) -> OpTable:
        """Projection onto argument ``j`` (zero-based)."""
        return cls.from_function(elements, arity, lambda *x: x[j])

    @classmethod
    def constant(cls, elements, arity, c) -> OpTable:
        return cls.from_function(elements, arity, lambda *x: c)

    def _pos(self):
        return {e: i for i, e in enumerate(self.elements)}

    def __call__(self, *args):
        pos = self._pos()
        d = len(self.elements)
        k = 0
        for a in args:
            k = k * d + pos[a]
        return self.values[k]

    def position_array(self) -> np.ndarray:
        """Values as element positions, a flat array indexed by argument rank."""
        pos = self._pos()
        return np.array([pos[v] for v in self.values], dtype=np.int64)

    def restrict(self, subset) -> OpTable:
        """Restriction to a subset closed under the operation."""
        subset = tuple(sorted(subset))
        table = OpTable.from_function(subset, self.arity, self)
        if not set(table.values) <= set(subset):
            raise ValueError(f"{subset} is not closed under the operation")
        return table

    def is_projection(self) -> int | None:
        for j in range(self.arity):
            if self == OpTable.projection(self.elements, self.arity, j):
                return j
        return None


@dataclass(frozen=True)
class MultiSortedOp:
    """One interpretation (an :class:`OpTable`) per domain id, all of one arity."""

    arity: int
    interpretations: dict

    def __post_init__(self):
        for dom_id, t in self.interpretations.items():
            if t.arity != self.arity:
                raise ValueError(f"interpretation on domain {dom_id} has arity {t.arity}")

    def __getitem__(self, dom_id) -> OpTable:
        try:
            return self.interpretations[dom_id]
        except KeyError:
            raise SignatureError(f"no interpretation for domain {dom_id}") from None

    def __eq__(self, other):
        if not isinstance(other, MultiSortedOp):
            return NotImplemented
        return self.arity == other.arity and self.interpretations == other.interpretations

    def __hash__(self):
        return hash((self.arity, tuple(sorted(self.interpretations.items()))))


def _tables_for(op, signature):
    if isinstance(op, OpTable):
        return [op] * len(signature)
    return [op[i] for i in signature]


class PreservationResult(NamedTuple):
    """Falsy when preservation fails; ``matrix`` lists the offending rows."""

    ok: bool
    matrix: tuple | None = None
    image: tuple | None = None

    def __bool__(self):
        return self.ok


_CHUNK = 1 << 16


def preserves(op, rel: Relation) -> PreservationResult:
    """Exhaustively check that ``op`` applied column-wise keeps ``rel`` closed.

    Row matrices are visited in lexicographic order of row choices; on failure
    the first bad matrix (as a tuple of rows) is reported.
    """
    return preserves_columns(_tables_for(op, rel.signature), rel)


def preserves_columns(tables: Sequence[OpTable], rel: Relation) -> PreservationResult:
    """Like :func:`preserves` with an explicit operation table per coordinate."""
    if len(tables) != rel.arity:
        raise SignatureError(f"{len(tables)} tables for a relation of arity {rel.arity}")
    n = tables[0].arity
    if any(t.arity != n for t in tables):
        raise SignatureError("column operations must share an arity")
    rows = np.array(rel.tuples, dtype=np.int64).reshape(len(rel), rel.arity)
    r = len(rel)
    if r == 0:
        return PreservationResult(True)
    m = rel.arity
    pos_cols, val_cols = [], []
    for j, t in enumerate(tables):
        lookup = np.full(max(max(t.elements), int(rows[:, j].max())) + 1, -1, dtype=np.int64)
        lookup[list(t.elements)] = np.arange(len(t.elements))
        p = lookup[rows[:, j]]
        if (p < 0).any():
            raise SignatureError(f"relation column {j} has values outside the operation's domain")
        pos_cols.append(p)
        val_cols.append(np.array(t.values, dtype=np.int64))
    base = int(rows.max()) + 1
    weights = base ** np.arange(m - 1, -1, -1, dtype=np.int64)
    codes = np.sort(rows @ weights)
    total = r ** n
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        digits = []
        rest = idx.copy()
        for _ in range(n):
            digits.append(rest % r)
            rest //= r
        digits.reverse()
        out = np.empty((len(idx), m), dtype=np.int64)
        for j in range(m):
            d = len(tables[j].elements)
            k = np.zeros(len(idx), dtype=np.int64)
            for dig in digits:
                k = k * d + pos_cols[j][dig]
            out[:, j] = val_cols[j][k]
        in_range = (out < base).all(axis=1)
        c = np.where(in_range[:, None], out, 0) @ weights
        loc = np.minimum(np.searchsorted(codes, c), len(codes) - 1)
        hit = (codes[loc] == c) & in_range
        if hit.all():
            continue
        bad = int(np.argmin(hit))
        matrix = tuple(rel.tuples[int(dig[bad])] for dig in digits)
        return PreservationResult(False, matrix, tuple(int(x) for x in out[bad]))
    return PreservationResult(True)


def preserves_all(op, relations) -> bool:
    return all(preserves(op, r) for r in relations)


def _guard(size, guard, what):
    if size > guard:
        raise GuardExceeded(f"{what} needs {size} indicator variables (guard {guard}); "
                            "undecided at this scale")


def _indicator(template: Template, n: int, guard: int):
    """Indicator instance whose solutions are the n-ary polymorphisms."""
    variables = []
    for i in template.domains:
        _guard(template.domains.size(i) ** n, guard, f"arity {n} on domain {i}")
        variables.extend((i, x) for x in product(template.domains.elements(i), repeat=n))
    scopes = []
    for rel in template.relations:
        lst = [tuple(zip(rel.signature, cols)) for cols in power_columns(rel, n)]
        scopes.append(tuple(lst))
    sorts = {v: v[0] for v in variables}
    return Instance(tuple(variables), tuple(scopes), sorts)


def _op_from_solution(template, n, sol):
    tables = {}
    for i in template.domains:
        elems = template.domains.elements(i)
        tables[i] = OpTable(elems, n, tuple(sol[(i, x)] for x in product(elems, repeat=n)))
    if len(tables) == 1:
        return next(iter(tables.values()))
    return MultiSortedOp(n, tables)


def _restrict_map(restrict, template):
    if restrict is None:
        return None
    if len(template.domains) == 1:
        dom = template.domains.ids[0]
        out = {}
        for k, allowed in restrict.items():
            key = k if isinstance(k, tuple) and len(k) == 2 and isinstance(k[1], tuple) else (dom, k)
            out[key] = allowed
        return out
    return dict(restrict)


def enumerate_polymorphisms(template: Template, n: int, restrict=None,
                            guard=INDICATOR_GUARD, limit=None) -> list:
    """All n-ary polymorphisms of ``template`` in lexicographic table order.

    ``restrict`` maps argument tuples (or ``(domain_id, tuple)`` keys for
    multi-sorted templates) to allowed value sets, which lets callers impose
    shape conditions such as idempotence.
    """
    inst = _indicator(template, n, guard)
    extra = _restrict_map(restrict, template)
    if limit == 1:
        sol = solve(inst, template, "first", extra)
        return [] if sol is None else [_op_from_solution(template, n, sol)]
    sols = solve(inst, template, "all", extra)
    if limit is not None:
        sols = sols[:limit]
    return [_op_from_solution(template, n, s) for s in sols]


def find_polymorphism(template: Template, n: int, restrict=None, guard=INDICATOR_GUARD):
    """The lexicographically first n-ary polymorphism meeting ``restrict``, or None."""
    found = enumerate_polymorphisms(template, n, restrict, guard, limit=1)
    return found[0] if found else None


def idempotent_restriction(template: Template, n: int) -> dict:
    out = {}
    for i in template.domains:
        for a in template.domains.elements(i):
            out[(i, (a,) * n)] = {a}
    return out


# Terms


@dataclass(frozen=True)
class Var:
    """Variable leaf x_{index+1}."""

    index: int

    def __repr__(self):
        return f"x{self.index + 1}"


@dataclass(frozen=True)
class App:
    """Application of environment symbol ``symbol`` to argument terms."""

    symbol: int
    args: tuple

    def __init__(self, symbol, args):
        object.__setattr__(self, "symbol", symbol)
        object.__setattr__(self, "args", tuple(args))

    def __repr__(self):
        return f"f{self.symbol}({', '.join(map(repr, self.args))})"


def term_variables(term) -> int:
    """One more than the largest variable index in ``term``."""
    if isinstance(term, Var):
        return term.index + 1
    return max((term_variables(a) for a in term.args), default=0)


def _eval_positions(term, env_arrays, sizes, grid):
    if isinstance(term, Var):
        return grid[term.index]
    table, arity = env_arrays[term.symbol]
    if arity != len(term.args):
        raise ValueError(f"symbol {term.symbol} has arity {arity}, used with {len(term.args)}")
    k = np.zeros_like(grid[0]) if grid else np.zeros(1, dtype=np.int64)
    for a in term.args:
        k = k * sizes + _eval_positions(a, env_arrays, sizes, grid)
    return table[k]


def _eval_single(term, tables: Sequence[OpTable], arity: int) -> OpTable:
    elems = tables[0].elements
    for t in tables:
        if t.elements != elems:
            raise SignatureError("all environment operations must share a domain")
    d = len(elems)
    grid = list(np.indices((d,) * arity).reshape(arity, -1)) if arity else []
    arrays = [(t.position_array(), t.arity) for t in tables]
    res = _eval_positions(term, arrays, d, grid)
    return OpTable(elems, arity, tuple(elems[int(k)] for k in res))


def eval_term(term, env: Sequence, arity: int | None = None):
    """Table of the operation a term defines over the environment ``env``.

    Multi-sorted environments are evaluated domain by domain.
    """
    if arity is None:
        arity = term_variables(term)
    if arity < term_variables(term):
        raise ValueError("arity is smaller than the number of term variables")
    if all(isinstance(e, OpTable) for e in env):
        return _eval_single(term, list(env), arity)
    doms = None
    for e in env:
        if isinstance(e, MultiSortedOp):
            keys = set(e.interpretations)
            doms = keys if doms is None else doms & keys
    out = {}
    for dom in sorted(doms):
        tables = [e[dom] if isinstance(e, MultiSortedOp) else e for e in env]
        out[dom] = _eval_single(term, tables, arity)
    return MultiSortedOp(arity, out)


def wnu_term_pairs(n: int):
    """Term pairs expressing the weak near-unanimity identities of arity n."""
    x, y = Var(0), Var(1)
    pairs = [(App(0, [x] * n), x)]
    shapes = []
    for k in range(n):
        args = [x] * n
        args[k] = y
        shapes.append(App(0, args))
    pairs.extend((shapes[0], s) for s in shapes[1:])
    return pairs


def _identity_pairs(kind, n):
    x, y, z = Var(0), Var(1), Var(2)
    if kind == "wnu":
        if n < 2:
            raise ValueError("weak near-unanimity needs arity at least 2")
        return wnu_term_pairs(n)
    if kind in ("minority", "majority"):
        if n != 3:
            raise ValueError(f"{kind} operations are ternary")
        out = y if kind == "minority" else x
        return [(App(0, [x, x, y]), out), (App(0, [x, y, x]), out), (App(0, [y, x, x]), out)]
    if kind == "semilattice":
        if n != 2:
            raise ValueError("semilattice operations are binary")
        return [(App(0, [x, x]), x), (App(0, [x, y]), App(0, [y, x])),
                (App(0, [App(0, [x, y]), z]), App(0, [x, App(0, [y, z])]))]
    if kind == "idempotent":
        return [(App(0, [x] * n), x)]
    raise ValueError(f"unknown identity kind {kind!r}")


class IdentityCheck(NamedTuple):
    ok: bool
    failed: tuple | None = None

    def __bool__(self):
        return self.ok


def check_identity(op, kind: str, lhs=None, rhs=None, nvars=None, env=None) -> IdentityCheck:
    """Exhaustively check an identity family for ``op``.

    ``kind`` is ``"wnu"``, ``"minority"``, ``"majority"``, ``"semilattice"``,
    ``"idempotent"`` or ``"custom"``. For ``"custom"`` pass terms ``lhs`` and
    ``rhs`` over the environment ``env`` (defaulting to ``[op]``).
    """
    if kind == "custom":
        if lhs is None or rhs is None:
            raise ValueError("custom identities need lhs and rhs terms")
        pairs = [(lhs, rhs)]
        env = list(env) if env is not None else [op]
    else:
        pairs = _identity_pairs(kind, op.arity)
        env = [op]
    for a, b in pairs:
        k = nvars if nvars is not None else max(term_variables(a), term_variables(b), 1)
        if eval_term(a, env, k) != eval_term(b, env, k):
            return IdentityCheck(False, (a, b))
    return IdentityCheck(True)


def pp_closure(template: Template, target: Relation, guard=INDICATOR_GUARD):
    """Decide whether ``target`` is pp-definable over ``template``.

    Returns ``(member, generated)`` where ``generated`` is the smallest
    pp-definable relation containing ``target``. Raises
    :class:`GuardExceeded` when the indicator would be too large to decide.
    """
    r = len(target)
    if r == 0:
        raise ValueError("target relation must be non-empty")
    inst = _indicator(template, r, guard)
    cols = [(i, c) for i, c in zip(target.signature, zip(*target.tuples))]
    rows = project_solutions(inst, template, cols)
    generated = Relation(target.signature, rows)
    return generated == target, generated
