import itertools
import random

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from netrewrite.errors import BudgetExceeded
from netrewrite.net import (
    Jungle,
    Net,
    RankedLetter,
    compose_embeddings,
    connected_node_sets,
    enclose,
    isomorphic,
    match_net,
    validate_net,
)
from netrewrite.textfmt import parse_literal

from netgen import CHAIN2, LOOP, SINGLE_A, nets, random_net


def _nx(n: Net) -> nx.MultiDiGraph:
    g = nx.MultiDiGraph()
    for i, l in n.nodes.items():
        front = frozenset((p[1], p[2], s) for p, s in n.frontier.items() if p[0] == i)
        g.add_node(i, letter=l, front=front)
    for l in n.links:
        g.add_edge(l.src, l.dst, ports=(l.out_port, l.in_port))
    return g


def nx_isomorphic(a: Net, b: Net) -> bool:
    return nx.is_isomorphic(
        _nx(a),
        _nx(b),
        node_match=lambda x, y: x == y,
        edge_match=lambda x, y: sorted(e["ports"] for e in x.values()) == sorted(e["ports"] for e in y.values()),
    )


def brute_connected_sets(n: Net) -> set[frozenset[int]]:
    g = nx.Graph()
    g.add_nodes_from(n.nodes)
    g.add_edges_from((l.src, l.dst) for l in n.links)
    out = set()
    for k in range(1, len(n) + 1):
        for combo in itertools.combinations(n.nodes, k):
            if nx.is_connected(g.subgraph(combo)):
                out.add(frozenset(combo))
    return out


class TestValidate:
    def test_single_is_valid(self):
        assert validate_net(SINGLE_A) == []

    def test_duplicate_link(self):
        n = Net({1: RankedLetter("a", 0, 1), 2: RankedLetter("b", 1, 0)}, [(1, 1, 2, 1), (1, 1, 2, 1)])
        kinds = [v.kind for v in validate_net(n)]
        assert "duplicate-link" in kinds

    def test_loop_allowed(self):
        assert validate_net(LOOP) == []

    def test_dangling_port_named(self):
        n = parse_literal("[1:a(0/1)]")
        (v,) = validate_net(n)
        assert v.kind == "dangling-port" and v.where == "1.o1"

    def test_port_out_of_range(self):
        n = Net({1: RankedLetter("a", 0, 1), 2: RankedLetter("b", 1, 0)}, [(1, 2, 2, 1)], {(1, "o", 1): "x"})
        assert "port-out-of-range" in [v.kind for v in validate_net(n)]

    @given(nets())
    def test_generated_nets_valid(self, n):
        assert validate_net(n) == []


class TestEnclose:
    def test_single(self):
        assert enclose(SINGLE_A) == Jungle([SINGLE_A])

    def test_chain2_three_members(self):
        j = enclose(CHAIN2)
        assert len(j) == 3
        assert parse_literal("[1:a(0/1); ; 1.o1=o1]") in j
        assert parse_literal("[1:b(1/0); ; 1.i1=i1]") in j
        assert CHAIN2 in j

    def test_empty(self):
        assert len(enclose(Net())) == 0

    def test_budget(self):
        n = random_net(random.Random(3), 12)
        with pytest.raises(BudgetExceeded):
            connected_node_sets(n, cap=2)

    @given(nets(max_nodes=7))
    def test_sets_match_brute_force(self, n):
        assert set(connected_node_sets(n)) == brute_connected_sets(n)

    @given(nets())
    def test_contains_self_when_connected(self, n):
        if n.is_connected():
            assert n in enclose(n)
            assert len(enclose(n)) >= 1

    @given(nets(max_nodes=6))
    def test_node_count_lower_bound(self, n):
        if n.is_connected():
            assert len(connected_node_sets(n)) >= len(n)


class TestIsomorphism:
    @given(nets(), st.randoms(use_true_random=False))
    def test_renaming_invariant(self, n, rnd):
        ids = list(n.nodes)
        perm = ids[:]
        rnd.shuffle(perm)
        m = n.relabel(dict(zip(ids, [p + 100 for p in perm])))
        assert m.cert() == n.cert()
        assert isomorphic(m, n)

    @given(nets(max_nodes=5, letters="ab"), nets(max_nodes=5, letters="ab"))
    def test_cert_agrees_with_networkx(self, a, b):
        assert (a.cert() == b.cert()) == nx_isomorphic(a, b)


class TestMatch:
    def test_identity(self):
        (e,) = match_net(SINGLE_A, SINGLE_A)
        assert e.mapping == {1: 1}

    def test_source_node_in_chain(self):
        pat = parse_literal("[1:a(0/1); ; 1.o1=x]")
        (e,) = match_net(pat, CHAIN2)
        assert e.mapping == {1: 1}
        assert e.binding((1, "o", 1)) == ("link", 2, 1)

    def test_label_mismatch(self):
        assert match_net(parse_literal("[1:b(0/0)]"), SINGLE_A) == []

    @given(nets())
    def test_self_match_contains_identity(self, n):
        maps = [e.mapping for e in match_net(n, n)]
        assert {i: i for i in n.nodes} in maps

    @given(nets(max_nodes=6), st.integers(0, 2**16))
    def test_embeddings_compose(self, t, seed):
        rng = random.Random(seed)
        sets = connected_node_sets(t)
        q_ids = rng.choice(sets)
        q = t.induced(q_ids)
        p = q.induced(rng.choice(connected_node_sets(q)))
        targets = {tuple(sorted(e.mapping.items())) for e in match_net(p, t)}
        for e1 in match_net(p, q):
            for e2 in match_net(q, t):
                composite = compose_embeddings(e1, e2)
                assert tuple(sorted(composite.items())) in targets
