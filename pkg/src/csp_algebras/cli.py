"""Command-line front end.

Exit codes: 0 for success or a satisfiable answer, 1 for an unsatisfiable
(or negative) answer, 2 for errors.
"""

from __future__ import annotations

import argparse
import io
import sys

from .algebra import align_to_collection, gamma_B, trace
from .bwwitness import apply_endos, build_w_terms, find_bulatov_ops, verify_witness
from .clone import enumerate_polymorphisms, pp_closure
from .errors import CSPError, GuardExceeded
from .liftred import (PrototypedInstance, from_prototype, lifted_language, reduce_strong,
                      reduce_to_union, to_prototype)
from .relax import MCollection, build_M, check_trace_pp, green_cohen_collection, weak_relax_pipeline
from .relcore import Instance
from .solver import gac_preprocess, solve
from .textfmt import (format_assignment, natural_key, parse_files, serialize_collection,
                      serialize_instance, serialize_template, var_name)


def _load(args):
    ws = parse_files(args.files)
    return ws, ws.template()


def _ordered(assignment):
    return sorted(assignment, key=natural_key)


def _emit_solutions(out, sols, csv):
    if not sols:
        return
    keys = _ordered(sols[0])
    if csv:
        out.write(",".join(var_name(k) for k in keys) + "\n")
        for s in sols:
            out.write(",".join(str(s[k]) for k in keys) + "\n")
        return
    for k, s in enumerate(sols):
        if k:
            out.write("\n")
        out.write(format_assignment(s, order=keys))


def cmd_solve(args, out):
    ws, t = _load(args)
    inst = ws.instance(t)
    if args.count:
        n = solve(inst, t, "count", consistency=args.consistency)
        out.write(f"{n}\n")
        return 0 if n else 1
    sol = solve(inst, t, "first", consistency=args.consistency)
    if sol is None:
        out.write("UNSAT\n")
        return 1
    if not args.csv:
        out.write("SAT\n")
    _emit_solutions(out, [sol], args.csv)
    return 0


def cmd_enumerate(args, out):
    ws, t = _load(args)
    sols = solve(ws.instance(t), t, "all")
    if not args.csv:
        out.write(f"solutions: {len(sols)}\n")
    _emit_solutions(out, sols, args.csv)
    return 0 if sols else 1


def cmd_gac(args, out):
    ws, t = _load(args)
    inst = ws.instance(t)
    pre = gac_preprocess(inst, t, consistency=args.consistency)
    if not pre.defined:
        out.write("UNDEFINED\n")
        return 1
    keys = _ordered(pre.unary_domains)
    if args.csv:
        out.write("variable,values\n")
        for v in keys:
            out.write(f"{var_name(v)},{' '.join(map(str, pre.unary_domains[v]))}\n")
        return 0
    out.write("DEFINED\n")
    for v in keys:
        out.write(f"{var_name(v)} in {{{','.join(map(str, pre.unary_domains[v]))}}}\n")
    for scope, rel in pre.constraints:
        rows = ",".join("(" + ",".join(map(str, r)) + ")" for r in rel.tuples)
        out.write(f"({','.join(var_name(v) for v in scope)}) in {{{rows}}}\n")
    return 0


def cmd_poly(args, out):
    ws, t = _load(args)
    ops = enumerate_polymorphisms(t, args.arity)
    if not args.csv:
        out.write(f"polymorphisms of arity {args.arity}: {len(ops)}\n")
    for k, op in enumerate(ops):
        tables = op.interpretations if hasattr(op, "interpretations") else {t.domains.ids[0]: op}
        for dom_id, tab in tables.items():
            vals = ",".join(map(str, tab.values))
            if args.csv:
                out.write(f"{k},{dom_id},{vals}\n")
            else:
                out.write(f"p{k} @ {dom_id} = [{vals}]\n")
    return 0


def _collection(args, ws, t):
    choice = getattr(args, "collection", None)
    if choice in (None, "M"):
        if choice is None and ws.collections:
            return ws.collection()
        elems = sorted({a for i in t.domains for a in t.domains.elements(i)})
        return build_M(elems)
    if choice == "green-cohen":
        if len(t.domains) != 1:
            raise CSPError("the permuted-max collection needs a single domain")
        dom = t.domains.ids[0]
        return green_cohen_collection(t.domains.elements(dom), dom)
    return ws.merge(parse_files([choice])).collection()


def _aligned(ws, t, coll):
    """Template and instance re-signed onto the collection's domain ids."""
    t2, id_map = align_to_collection(t, coll)
    inst = ws.instance(t)
    sorts = {v: id_map[s] for v, s in inst.sorts.items()}
    return t2, Instance(inst.variables, inst.scopes, sorts)


def cmd_gammab(args, out):
    ws, t = _load(args)
    coll = _collection(args, ws, t)
    t, _ = align_to_collection(t, coll)
    induced = gamma_B(t, coll)
    for g in range(len(coll)):
        out.write(f"# {g} = {coll.label(g)}\n")
    out.write(serialize_template(induced))
    return 0


def cmd_trace(args, out):
    if args.files and args.m is None:
        coll = parse_files(args.files).collection()
    else:
        coll = build_M([int(x) for x in (args.m or "0,1").split(",")])
    for dom_id in coll.domain_ids:
        tr = trace(coll, dom_id)
        if isinstance(coll, MCollection) and len(coll.domains.elements(dom_id)) < 2 \
                and not args.all:
            continue
        for row, g in sorted(tr.row_to_gid.items(), key=lambda kv: kv[1]):
            if args.csv:
                out.write(f"{coll.label(g)},{','.join(map(str, row))}\n")
            else:
                out.write(f"{coll.label(g)} @ {dom_id} = ({','.join(map(str, row))})\n")
    return 0


def cmd_reduce(args, out):
    ws, t = _load(args)
    if args.kind in ("union", "strong"):
        coll = _collection(args, ws, t)
        t, inst = _aligned(ws, t, coll)
        if args.kind == "union":
            red = reduce_to_union(inst, t, coll)
            if red is None:
                out.write("UNSAT\n")
                return 1
            out.write(serialize_template(red.template))
            out.write(serialize_instance(red.instance, red.template))
            return 0
        red = reduce_strong(inst, t, coll)
        out.write(serialize_template(red.lifted.template))
        out.write(serialize_instance(red.instance, red.lifted.template))
        return 0
    if args.prototype is None:
        raise CSPError("--prototype is required")
    pws = parse_files([args.prototype])
    proto = pws.instance(t)
    lifted = lifted_language(t, proto)
    if args.kind == "to-prototype":
        lws = ws
        linst = lws.instance(lifted.template)
        pi = to_prototype(linst, lifted)
        if pi is None:
            out.write("UNSAT\n")
            return 1
        out.write(serialize_instance(pi.instance, t, pi.chi))
        return 0
    inst = ws.instance(t)
    pi = PrototypedInstance(inst, {w: ws.chi[w] for w in inst.variables}, proto)
    lifted, linst = from_prototype(pi, t, lifted)
    out.write(serialize_template(lifted.template))
    out.write(serialize_instance(linst, lifted.template))
    return 0


def cmd_relax(args, out):
    ws, t = _load(args)
    coll = _collection(args, ws, t)
    res = weak_relax_pipeline(ws.instance(t), t, coll, relaxed_route=args.route,
                              consistency=args.consistency)
    if not res.solved:
        out.write("UNSAT\n")
        for stage, msg in res.transcript:
            out.write(f"# {stage}: {msg}\n")
        return 1
    if not args.csv:
        out.write("SOLVED\n")
        for v in _ordered(res.chi):
            out.write(f"# chi {var_name(v)} = {coll.label(res.chi[v])}\n")
    _emit_solutions(out, [res.solution], args.csv)
    return 0


def cmd_bw_witness(args, out):
    ws, t = _load(args)
    coloring = find_bulatov_ops(t)
    terms = build_w_terms(coloring, args.nmax)
    simp = apply_endos(t, coloring)
    report = verify_witness(simp, terms, range(3, args.nmax + 1))
    for pair, color in sorted(coloring.colors.items()):
        extra = f" absorbing {coloring.absorbing[pair]}" if pair in coloring.absorbing else ""
        out.write(f"pair {{{pair[0]},{pair[1]}}} {color}{extra}\n")
    for name in ("f", "g", "h"):
        out.write(f"{name} = [{','.join(map(str, getattr(coloring, name).values))}]\n")
    out.write(f"e1 endomorphism: {'ok' if simp.e1_check else 'FAILED'}\n")
    out.write(f"e2 closed: {'ok' if simp.e2_closed else 'FAILED'}\n")
    for d, gids in simp.members.items():
        names = ",".join(simp.collection.label(g) for g in gids)
        out.write(f"simplified {d} = {{{names}}}\n")
    for n, checks in report.per_arity.items():
        flags = " ".join(f"{k}={'yes' if v else 'no'}" for k, v in checks.items())
        out.write(f"w{n}: {flags}\n")
    out.write("WITNESS OK\n" if report else "WITNESS FAILED\n")
    return 0 if report else 1


def cmd_pp_check(args, out):
    if args.trace_subset is not None:
        subset = [int(x) for x in args.trace_subset.split(",")]
        elems = [int(x) for x in args.elements.split(",")] if args.elements else subset
        res = check_trace_pp(elems, subset)
        out.write(f"generated {len(res.generated)} tuples; trace has {len(res.trace)}\n")
        out.write("PP-DEFINABLE\n" if res else "NOT PP-DEFINABLE\n")
        return 0 if res else 1
    ws = parse_files(args.files)
    if args.target is None:
        raise CSPError("--target is required")
    if args.target not in ws.relations:
        raise CSPError(f"unknown relation {args.target!r}")
    t = ws.template(exclude=(args.target,))
    try:
        ok, gen = pp_closure(t, ws.relations[args.target])
    except GuardExceeded as exc:
        out.write(f"UNDECIDED: {exc}\n")
        return 2
    out.write(f"generated {len(gen)} tuples\n")
    out.write("PP-DEFINABLE\n" if ok else "NOT PP-DEFINABLE\n")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="csp-algebras",
                                description="CSP templates, induced templates and reductions")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, files=True, **kw):
        sp = sub.add_parser(name, **kw)
        if files:
            sp.add_argument("files", nargs="+", help="input files (merged in order)")
        sp.add_argument("--csv", action="store_true", help="machine-readable output")
        sp.set_defaults(func=fn)
        return sp

    sp = add("solve", cmd_solve, help="find the least solution")
    sp.add_argument("--count", action="store_true")
    sp.add_argument("--consistency", choices=("gac", "sac"), default="gac")
    add("enumerate", cmd_enumerate, help="list all solutions")
    sp = add("gac", cmd_gac, help="local-consistency preprocessing")
    sp.add_argument("--consistency", choices=("gac", "sac"), default="gac")
    sp = add("poly", cmd_poly, help="enumerate polymorphisms")
    sp.add_argument("--arity", type=int, required=True)
    sp = add("gammab", cmd_gammab, help="print the induced template")
    sp.add_argument("--collection", help="collection file, 'M' or 'green-cohen'")
    sp = add("trace", cmd_trace, files=False, help="print traces of a collection")
    sp.add_argument("files", nargs="*")
    sp.add_argument("--m", help="use M over these comma-separated elements (default 0,1)")
    sp.add_argument("--all", action="store_true", help="include one-element subsets")
    sp = add("reduce", cmd_reduce, files=False, help="run a reduction")
    sp.add_argument("kind", choices=("union", "strong", "to-prototype", "from-prototype"))
    sp.add_argument("files", nargs="+")
    sp.add_argument("--collection")
    sp.add_argument("--prototype", help="file whose constraints form the prototype")
    sp = add("relax", cmd_relax, help="solve through the weak relaxation")
    sp.add_argument("--collection", help="collection file, 'M' or 'green-cohen'")
    sp.add_argument("--route", choices=("direct", "union"), default="direct")
    sp.add_argument("--consistency", choices=("gac", "sac"), default="gac")
    sp = add("bw-witness", cmd_bw_witness, help="bounded-width witness over M")
    sp.add_argument("--nmax", type=int, default=6)
    sp = add("pp-check", cmd_pp_check, files=False, help="pp-definability check")
    sp.add_argument("files", nargs="*")
    sp.add_argument("--target", help="relation to test against the others")
    sp.add_argument("--trace-subset", help="check the trace of M over this 2-element subset")
    sp.add_argument("--elements", help="base set for --trace-subset")
    return p


def run(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args, out)
    except (CSPError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def run_capture(argv) -> tuple[int, str]:
    buf = io.StringIO()
    code = run(argv, buf)
    return code, buf.getvalue()


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
