import pytest
from hypothesis import given

from netrewrite.errors import ParseError
from netrewrite.nbh import BlockHomomorphism
from netrewrite.net import RankedLetter
from netrewrite.rns import Rule
from netrewrite.textfmt import (
    format_literal,
    parse_document,
    parse_literal,
    parse_net,
    serialize_hom,
    serialize_net,
    serialize_rule,
)

from conftest import FIXTURES
from netgen import CHAIN2, nets


@given(nets(max_nodes=8))
def test_net_roundtrip_byte_exact(n):
    text = serialize_net(n, "n")
    back = parse_net(text)
    assert back.cert() == n.cert()
    assert serialize_net(back, "n") == text


@given(nets())
def test_literal_roundtrip(n):
    assert parse_literal(format_literal(n)) == n


def test_rule_roundtrip():
    r = Rule.make(
        parse_literal("[1:a(0/1); ; 1.o1=x]"),
        parse_literal("[1:c(0/1); ; 1.o1=x]"),
        name="r",
    )
    doc = parse_document(serialize_rule(r))
    assert doc.rules["r"].key() == r.key()


def test_substitution_roundtrip():
    g = {"x": parse_literal("[1:d(0/0)]")}
    r = Rule.make(parse_literal("[1:a(0/1); ; 1.o1=x]"), parse_literal("[1:c(0/1); ; 1.o1=x]"), [g], name="r")
    back = parse_document(serialize_rule(r)).rules["r"]
    assert back.key() == r.key()


def test_hom_roundtrip():
    h = BlockHomomorphism.build([(parse_literal("[1:b(1/0); ; 1.i1=i1]"), RankedLetter("beta", 1, 0))])
    text = serialize_hom(h, "h")
    back = parse_document(text).homs["h"]
    assert back == h
    assert serialize_hom(back, "h") == text


@pytest.mark.parametrize("path", sorted(FIXTURES.iterdir()), ids=lambda p: p.name)
def test_fixture_files_roundtrip(path):
    # dangling.net parses; only validation rejects it
    doc = parse_document(path.read_text(), str(path))
    for name, n in doc.nets.items():
        assert parse_net(serialize_net(n, name)).cert() == n.cert()
    for name, r in doc.rules.items():
        assert parse_document(serialize_rule(r, name)).rules[name].key() == r.key()


def test_unknown_directive_line_number():
    text = "net x {\n  node 1 : a in=0 out=0\n  edge 1 2\n}\n"
    with pytest.raises(ParseError) as exc:
        parse_net(text, "x.net")
    assert exc.value.line == 3
    assert "x.net:3" in str(exc.value)


def test_missing_brace():
    with pytest.raises(ParseError):
        parse_net("net x {\n  node 1 : a in=0 out=0\n")


def test_canonical_order_independent_of_ids():
    renamed = CHAIN2.relabel({1: 7, 2: 3})
    assert serialize_net(renamed, "c") == serialize_net(CHAIN2, "c")
