"""Line-oriented text format for templates, instances and collections of algebras.

::

    # comment
    domain 0 = {0,1}
    relation neq : (0,0) = {(0,1),(1,0)}
    variable a @ 0
    constraint (a,b) in neq
    signature (3)
    algebra mu @ 0 : op1 = [0,1,1,0,1,0,0,1]
    collection 0 = {mu}
    map a -> p

``variable`` lines are optional (they fix the variable order and sorts);
``map`` lines give a map from instance variables to prototype vertices.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .algebra import Algebra, AlgebraCollection
from .clone import OpTable
from .errors import ParseError
from .relcore import DomainTable, Instance, Relation, Template

_IDENT = r"[A-Za-z_][A-Za-z0-9_'.]*"
_VAR = r"[A-Za-z0-9_'.]+"

_PATTERNS = {
    "domain": re.compile(r"domain\s+(\d+)\s*=\s*\{(.*)\}\s*$"),
    "relation": re.compile(rf"relation\s+({_IDENT})\s*:\s*\(([^)]*)\)\s*=\s*\{{(.*)\}}\s*$"),
    "constraint": re.compile(rf"constraint\s+\(([^)]*)\)\s+in\s+({_IDENT})\s*$"),
    "signature": re.compile(r"signature\s+\(([^)]*)\)\s*$"),
    "algebra": re.compile(
        rf"algebra\s+({_IDENT})\s*@\s*(\d+)\s*:\s*op(\d+)\s*=\s*\[([^\]]*)\]\s*$"),
    "collection": re.compile(rf"collection\s+(\d+)\s*=\s*\{{([^}}]*)\}}\s*$"),
    "variable": re.compile(rf"variable\s+({_VAR})(?:\s*@\s*(\d+))?\s*$"),
    "map": re.compile(rf"map\s+({_VAR})\s*->\s*({_VAR})\s*$"),
}


@dataclass
class Workspace:
    """Everything one or more text files declare, in declaration order."""

    domains: dict = field(default_factory=dict)
    relations: dict = field(default_factory=dict)
    variables: list = field(default_factory=list)
    sorts: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    signature: tuple | None = None
    algebras: dict = field(default_factory=dict)
    collections: dict = field(default_factory=dict)
    chi: dict = field(default_factory=dict)

    # conversions

    def domain_table(self) -> DomainTable:
        if not self.domains:
            raise ParseError("no domains declared")
        # a file may declare several domains with equal elements on purpose
        seen, tags = set(), {}
        for i, elems in self.domains.items():
            key = tuple(sorted(elems))
            if key in seen:
                tags[i] = ("declared", i)
            seen.add(key)
        return DomainTable(self.domains, tags)

    def template(self, exclude=()) -> Template:
        names = [n for n in self.relations if n not in exclude]
        return Template(self.domain_table(), tuple(self.relations[n] for n in names),
                        tuple(names))

    def instance(self, template: Template | None = None) -> Instance:
        template = template or self.template()
        order = list(self.variables)
        for _, scope in self.constraints:
            for v in scope:
                if v not in order:
                    order.append(v)
        for w in self.chi:
            if w not in order:
                order.append(w)
        pairs = []
        for name, scope in self.constraints:
            try:
                pairs.append((template.index(name), scope))
            except KeyError:
                raise ParseError(f"constraint uses unknown relation {name!r}") from None
        return Instance.from_constraints(pairs, len(template.relations), variables=order,
                                         sorts=self.sorts)

    def collection(self) -> AlgebraCollection:
        if self.signature is None:
            raise ParseError("collection needs a signature line")
        table = self.domain_table()
        members = {}
        for dom_id, names in self.collections.items():
            members[dom_id] = [self.build_algebra(n) for n in names]
        doms = DomainTable({i: table.elements(i) for i in members})
        return AlgebraCollection(self.signature, doms, members)

    def build_algebra(self, name) -> Algebra:
        if name not in self.algebras:
            raise ParseError(f"collection refers to unknown algebra {name!r}")
        dom_id, ops = self.algebras[name]
        elems = self.domain_table().elements(dom_id)
        sig = self.signature
        if sorted(ops) != list(range(1, len(sig) + 1)):
            raise ParseError(f"algebra {name!r} must define op1..op{len(sig)}")
        tables = []
        for j, n in enumerate(sig, start=1):
            values = ops[j]
            if len(values) != len(elems) ** n:
                raise ParseError(f"algebra {name!r} op{j} needs {len(elems) ** n} values, "
                                 f"got {len(values)}")
            tables.append(OpTable(elems, n, values))
        return Algebra(dom_id, elems, tuple(tables), name)

    def merge(self, other: Workspace) -> Workspace:
        out = Workspace()
        for attr in ("domains", "relations", "sorts", "algebras", "collections", "chi"):
            merged = dict(getattr(self, attr))
            for k, v in getattr(other, attr).items():
                if k in merged and merged[k] != v:
                    raise ParseError(f"conflicting definitions of {attr[:-1]} {k!r}")
                merged[k] = v
            setattr(out, attr, merged)
        out.variables = self.variables + [v for v in other.variables if v not in self.variables]
        out.constraints = self.constraints + other.constraints
        if self.signature and other.signature and self.signature != other.signature:
            raise ParseError("conflicting signatures")
        out.signature = self.signature or other.signature
        return out


def _ints(text, line, col):
    text = text.strip()
    if not text:
        return []
    out = []
    for part in text.split(","):
        part = part.strip()
        if not re.fullmatch(r"-?\d+", part):
            raise ParseError(f"expected an integer, got {part!r}", line, col)
        out.append(int(part))
    return out


def _tuples(text, line, col):
    text = text.strip()
    if not text:
        return []
    if not re.fullmatch(r"\(\s*[^()]*\)(\s*,\s*\([^()]*\))*", text):
        raise ParseError("malformed tuple list", line, col)
    return [tuple(_ints(m, line, col)) for m in re.findall(r"\(([^()]*)\)", text)]


def parse(text: str) -> Workspace:
    """Parse one file. Errors name the line (and column where it helps)."""
    ws = Workspace()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        col = len(raw) - len(raw.lstrip()) + 1
        keyword = line.split(None, 1)[0]
        pat = _PATTERNS.get(keyword)
        if pat is None:
            raise ParseError(f"unknown statement {keyword!r}", lineno, col)
        m = pat.match(line)
        if m is None:
            raise ParseError(f"malformed {keyword} statement", lineno, col)
        _apply(ws, keyword, m, lineno, col)
    _check_refs(ws)
    return ws


def _apply(ws, keyword, m, lineno, col):
    if keyword == "domain":
        dom_id = int(m.group(1))
        if dom_id in ws.domains:
            raise ParseError(f"domain {dom_id} declared twice", lineno, col)
        elems = _ints(m.group(2), lineno, col)
        if not elems or len(set(elems)) != len(elems):
            raise ParseError("domain elements must be non-empty and distinct", lineno, col)
        ws.domains[dom_id] = tuple(elems)
    elif keyword == "relation":
        name = m.group(1)
        if name in ws.relations:
            raise ParseError(f"relation {name!r} declared twice", lineno, col)
        sig = _ints(m.group(2), lineno, col)
        rows = _tuples(m.group(3), lineno, col)
        for t in rows:
            if len(t) != len(sig):
                raise ParseError(f"tuple {t} in relation {name!r} has arity {len(t)}, "
                                 f"expected {len(sig)}", lineno, col)
        for j, d in enumerate(sig):
            if d not in ws.domains:
                raise ParseError(f"relation {name!r} uses undeclared domain {d}", lineno, col)
            for t in rows:
                if t[j] not in ws.domains[d]:
                    raise ParseError(f"value {t[j]} is not in domain {d}", lineno, col)
        ws.relations[name] = Relation(tuple(sig), rows)
    elif keyword == "constraint":
        scope = tuple(s.strip() for s in m.group(1).split(","))
        if not all(re.fullmatch(_VAR, s) for s in scope):
            raise ParseError("malformed variable list", lineno, col)
        name = m.group(2)
        if name in ws.relations and ws.relations[name].arity != len(scope):
            raise ParseError(f"scope of length {len(scope)} for relation {name!r} of arity "
                             f"{ws.relations[name].arity}", lineno, col)
        ws.constraints.append((name, scope))
    elif keyword == "signature":
        sig = _ints(m.group(1), lineno, col)
        if not sig or any(n < 1 for n in sig):
            raise ParseError("signature needs positive arities", lineno, col)
        ws.signature = tuple(sig)
    elif keyword == "algebra":
        name, dom_id, j = m.group(1), int(m.group(2)), int(m.group(3))
        if dom_id not in ws.domains:
            raise ParseError(f"algebra {name!r} over undeclared domain {dom_id}", lineno, col)
        prev = ws.algebras.setdefault(name, (dom_id, {}))
        if prev[0] != dom_id:
            raise ParseError(f"algebra {name!r} declared over two domains", lineno, col)
        if j in prev[1]:
            raise ParseError(f"algebra {name!r} defines op{j} twice", lineno, col)
        values = _ints(m.group(4), lineno, col)
        for v in values:
            if v not in ws.domains[dom_id]:
                raise ParseError(f"value {v} is not in domain {dom_id}", lineno, col)
        prev[1][j] = tuple(values)
    elif keyword == "collection":
        dom_id = int(m.group(1))
        names = [s.strip() for s in m.group(2).split(",") if s.strip()]
        ws.collections.setdefault(dom_id, [])
        ws.collections[dom_id].extend(names)
    elif keyword == "variable":
        v = m.group(1)
        if v not in ws.variables:
            ws.variables.append(v)
        if m.group(2) is not None:
            ws.sorts[v] = int(m.group(2))
    elif keyword == "map":
        ws.chi[m.group(1)] = m.group(2)


def _check_refs(ws: Workspace):
    for dom_id, names in ws.collections.items():
        if dom_id not in ws.domains:
            raise ParseError(f"collection over undeclared domain {dom_id}")
        for n in names:
            if n not in ws.algebras:
                raise ParseError(f"collection refers to unknown algebra {n!r}")
            if ws.algebras[n][0] != dom_id:
                raise ParseError(f"algebra {n!r} is not over domain {dom_id}")
    for v, s in ws.sorts.items():
        if s not in ws.domains:
            raise ParseError(f"variable {v!r} sorted to undeclared domain {s}")


def parse_files(paths) -> Workspace:
    ws = Workspace()
    for p in paths:
        with open(p) as fh:
            try:
                ws = ws.merge(parse(fh.read()))
            except ParseError as exc:
                raise ParseError(f"{p}: {exc}") from None
    return ws


# Serialization


def _fmt_ints(xs):
    return ",".join(str(x) for x in xs)


def serialize_domains(table: DomainTable) -> list[str]:
    return [f"domain {i} = {{{_fmt_ints(e)}}}" for i, e in table.items()]


def serialize_template(t: Template) -> str:
    lines = serialize_domains(t.domains)
    for name, rel in zip(t.names, t.relations):
        rows = ",".join(f"({_fmt_ints(r)})" for r in rel.tuples)
        lines.append(f"relation {name} : ({_fmt_ints(rel.signature)}) = {{{rows}}}")
    return "\n".join(lines) + "\n"


def var_name(v) -> str:
    """Text form of a variable id; tuples are flattened with underscores."""
    if isinstance(v, tuple):
        return "_".join(var_name(x) for x in v)
    return str(v)


def serialize_instance(inst: Instance, t: Template, chi=None, declare=True) -> str:
    lines = []
    if declare:
        for v in inst.variables:
            s = inst.sorts.get(v)
            lines.append(f"variable {var_name(v)}" + (f" @ {s}" if s is not None else ""))
    for l, scope in inst.constraints():
        lines.append(f"constraint ({','.join(var_name(v) for v in scope)}) in {t.names[l]}")
    for w, v in (chi or {}).items():
        lines.append(f"map {var_name(w)} -> {var_name(v)}")
    return "\n".join(lines) + ("\n" if lines else "")


def serialize_collection(coll: AlgebraCollection, include_domains=True) -> str:
    lines = serialize_domains(coll.domains) if include_domains else []
    lines.append(f"signature ({_fmt_ints(coll.signature)})")
    for dom_id in coll.domain_ids:
        names = []
        for g in coll.gids(dom_id):
            alg = coll.algebra(g)
            name = coll.label(g)
            names.append(name)
            for j, op in enumerate(alg.ops, start=1):
                lines.append(f"algebra {name} @ {dom_id} : op{j} = [{_fmt_ints(op.values)}]")
        lines.append(f"collection {dom_id} = {{{','.join(names)}}}")
    return "\n".join(lines) + "\n"


def format_assignment(assignment, csv=False, order=None) -> str:
    keys = order if order is not None else sorted(assignment, key=natural_key)
    if csv:
        return ",".join(var_name(k) for k in keys) + "\n" + \
            ",".join(str(assignment[k]) for k in keys) + "\n"
    return "".join(f"{var_name(k)}={assignment[k]}\n" for k in keys)


def natural_key(v):
    s = var_name(v)
    return [(0, int(p), "") if p.isdigit() else (1, 0, p) for p in re.split(r"(\d+)", s) if p]
