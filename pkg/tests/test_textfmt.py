import pytest

from csp_algebras.errors import ParseError
from csp_algebras.relax import build_M
from csp_algebras.textfmt import (parse, serialize_collection, serialize_instance,
                                  serialize_template)

MINIMAL = """\
# one domain, one relation
domain 0 = {0,1}
relation neq : (0,0) = {(0,1),(1,0)}
"""


def test_minimal_round_trip():
    ws = parse(MINIMAL)
    t = ws.template()
    text = serialize_template(t)
    assert parse(text).template() == t
    assert serialize_template(parse(text).template()) == text


def test_arity_mismatch_names_line():
    with pytest.raises(ParseError, match="line 4"):
        parse(MINIMAL + "relation bad : (0,0) = {(0,1,1)}\n")


def test_dangling_relation():
    with pytest.raises(ParseError):
        parse(MINIMAL + "constraint (a,b) in missing\n").instance()


def test_value_outside_domain():
    with pytest.raises(ParseError):
        parse("domain 0 = {0,1}\nrelation r : (0) = {(2)}\n")


def test_garbage_line():
    with pytest.raises(ParseError, match="line 2"):
        parse("domain 0 = {0,1}\nwhat is this\n")


def test_instance_round_trip():
    ws = parse(MINIMAL + "variable c @ 0\nconstraint (a,b) in neq\nconstraint (b,c) in neq\n")
    t = ws.template()
    inst = ws.instance(t)
    again = parse(serialize_template(t) + serialize_instance(inst, t))
    assert again.instance(t) == inst


def test_collection_file_matches_M():
    M = build_M((0, 1))
    text = serialize_collection(M)
    coll = parse(text).collection()
    assert coll.signature == M.signature
    assert coll.domains == M.domains
    for g in range(len(M)):
        assert coll.algebra(g) == M.algebra(g)
        assert coll.label(g) == M.label(g)


def test_handwritten_collection():
    text = """\
domain 0 = {0,1}
signature (3)
algebra mu @ 0 : op1 = [0,1,1,0,1,0,0,1]
algebra mup @ 0 : op1 = [1,0,0,1,0,1,1,0]
algebra c0 @ 0 : op1 = [0,0,0,0,0,0,0,0]
algebra c1 @ 0 : op1 = [1,1,1,1,1,1,1,1]
collection 0 = {mu,mup,c0,c1}
"""
    coll = parse(text).collection()
    M = build_M((0, 1))
    pair = M.subset_id((0, 1))
    assert [a.ops for a in coll.members(0)] == [a.ops for a in M.members(pair)]


def test_algebra_table_length_checked():
    with pytest.raises(ParseError):
        parse("domain 0 = {0,1}\nsignature (2)\nalgebra a @ 0 : op1 = [0,1]\n"
              "collection 0 = {a}\n").collection()


def test_repeated_domains_allowed():
    ws = parse("domain 0 = {0,1}\ndomain 1 = {0,1}\nrelation r : (0,1) = {(0,1)}\n")
    assert len(ws.template().domains) == 2
