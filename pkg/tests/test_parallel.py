import itertools
import random
from dataclasses import replace

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from netrewrite.errors import SynthesisError
from netrewrite.nbh import BlockHomomorphism
from netrewrite.net import Net, RankedLetter
from netrewrite.parallel import (
    ThetaConfig,
    entangling_classes,
    ferp_generation,
    find_representation,
    fixed_parallels,
    pi_partition,
    relations_commute,
    synthesize_parallel,
    verify_commutation,
)
from netrewrite.rns import Rule, RuleSystem
from netrewrite.textfmt import parse_literal as L

from fixture_gen import parallel_fixture
from netgen import CHAIN2, SINGLE_A, SINGLE_C

A_BLOCK = L("[1:a(0/1); ; 1.o1=o1]")
B_BLOCK = L("[1:b(1/0); ; 1.i1=i1]")
H1 = BlockHomomorphism.build([(B_BLOCK, RankedLetter("beta", 1, 0))], identity_default=True)
H2 = BlockHomomorphism.build([(A_BLOCK, RankedLetter("alpha", 0, 1))], identity_default=True)
APEX = Rule.make(L("[1:a(0/1); ; 1.o1=x]"), L("[1:omega(0/1); ; 1.o1=x]"), name="apex")
RELABEL = Rule.make(SINGLE_A, SINGLE_C, name="a2c")


class TestPiPartition:
    def test_single(self):
        assert pi_partition([{1, 2}]) == [frozenset({1, 2})]

    def test_overlap(self):
        assert pi_partition([{1, 2}, {2, 3}]) == [frozenset({1}), frozenset({2}), frozenset({3})]

    def test_disjoint(self):
        assert sorted(pi_partition([{1}, {2, 3}]), key=sorted) == [frozenset({1}), frozenset({2, 3})]

    def test_empty(self):
        assert pi_partition([]) == []

    @given(st.lists(st.frozensets(st.integers(0, 8), max_size=5), max_size=5))
    def test_cells(self, family):
        cells = pi_partition(family)
        union = frozenset().union(*family) if family else frozenset()
        assert frozenset().union(*cells) == union
        for x, y in itertools.combinations(cells, 2):
            assert not x & y
        for s in family:
            assert s == frozenset().union(*(c for c in cells if c <= s))
            assert all(c <= s or not c & s for c in cells)

    @given(st.lists(st.frozensets(st.integers(0, 6), min_size=1, max_size=4), min_size=1, max_size=4))
    def test_coarsest(self, family):
        # merging any two cells breaks the union property for some member
        cells = pi_partition(family)
        for x, y in itertools.combinations(cells, 2):
            merged = x | y
            assert any(merged & s and not merged <= s for s in family)


class TestSynthesis:
    def test_identity_fixture(self):
        idh = BlockHomomorphism.identity()
        ps = synthesize_parallel(RELABEL, idh, idh, SINGLE_A)
        assert ps.micro.left.cert() == SINGLE_A.cert()
        assert ps.micro.right.cert() == SINGLE_C.cert()
        assert ps.ferp.left.cert() == SINGLE_A.cert()
        assert ps.serp.right.cert() == SINGLE_C.cert()
        assert verify_commutation(ps, RELABEL, idh, idh, SINGLE_A).passed

    def test_chain_fixture(self):
        ps = synthesize_parallel(APEX, H1, H2, CHAIN2)
        assert [sorted(c) for c in ps.cells] == [[1], [2]]
        assert ps.hom3.flags.alpanbh
        check = verify_commutation(ps, APEX, H1, H2, CHAIN2)
        assert check.passed, check.message

    def test_hom3_domain_is_pi_partition(self):
        ps = synthesize_parallel(APEX, H1, H2, CHAIN2)
        want = pi_partition([frozenset(p.nodes) for p in ps.rep_s.leaves()] + [frozenset(p.nodes) for p in ps.rep_t.leaves()])
        assert list(ps.cells) == want
        assert ps.hom3.block_domain.keys() == frozenset(CHAIN2.induced(c).cert() for c in want)

    def test_corrupted_serp_fails(self):
        ps = synthesize_parallel(APEX, H1, H2, CHAIN2)
        right = ps.serp.right
        extra = Net(dict(right.nodes) | {99: RankedLetter("junk", 0, 0)}, right.links, right.frontier)
        bad = replace(ps, serp=Rule(ps.serp.left, extra, (), "bad"))
        check = verify_commutation(bad, APEX, H1, H2, CHAIN2)
        assert not check.passed
        assert check.message == "second square differs"
        assert check.witness is not None

    def test_no_redex(self):
        r = Rule.make(L("[1:z(0/0)]"), SINGLE_C)
        with pytest.raises(SynthesisError) as exc:
            synthesize_parallel(r, H1, H2, CHAIN2)
        assert exc.value.kind == "no-redex"

    def test_not_alpanbh(self):
        h = BlockHomomorphism.build([(B_BLOCK, RankedLetter("z", 0, 0))], identity_default=True)
        with pytest.raises(SynthesisError) as exc:
            synthesize_parallel(APEX, h, H2, CHAIN2)
        assert exc.value.kind == "not-alpanbh"

    def test_instance_sensitive_rejected(self):
        r = Rule.make(SINGLE_A, L("[1:c(0/1); ; 1.o1=y]"), [{"y": L("[1:d(1/0); ; 1.i1=y]")}])
        with pytest.raises(SynthesisError) as exc:
            synthesize_parallel(r, BlockHomomorphism.identity(), BlockHomomorphism.identity(), SINGLE_A)
        assert exc.value.kind == "preimage-not-found"

    def test_identity_representation_is_singletons(self):
        rep = find_representation(BlockHomomorphism.identity(), CHAIN2)
        assert sorted(sorted(p.nodes) for p in rep.leaves()) == [[1], [2]]

    @settings(max_examples=40)
    @given(st.integers(0, 2**32 - 1))
    def test_generated_fixtures_commute(self, seed):
        f = parallel_fixture(random.Random(seed), max_nodes=6)
        ps = synthesize_parallel(f.rule, f.hom1, f.hom2, f.k, f.rep_s, f.rep_t)
        check = verify_commutation(ps, f.rule, f.hom1, f.hom2, f.k)
        assert check.passed, check.message


CONFIG = ThetaConfig(((CHAIN2, H1, H2), (SINGLE_A, BlockHomomorphism.identity(), BlockHomomorphism.identity())), "chain")


def brute_classes(sample, config):
    fps = [fixed_parallels(s, config) for s in sample]
    g = nx.Graph()
    g.add_nodes_from(range(len(sample)))
    g.add_edges_from((i, j) for i, j in itertools.combinations(range(len(sample)), 2) if fps[i] & fps[j])
    return sorted(tuple(sorted(c)) for c in nx.connected_components(g))


class TestEntanglement:
    def test_two_copies(self):
        s = RuleSystem.of(APEX, name="s")
        rep = entangling_classes([s, s], CONFIG)
        assert rep.classes == ((0, 1),)
        assert rep.mediatory[(0, 1)] == fixed_parallels(s, CONFIG)
        assert rep.mediatory[(0, 1)]

    def test_disjoint_alphabets(self):
        s1 = RuleSystem.of(Rule.make(L("[1:p(0/0)]"), L("[1:q(0/0)]")))
        s2 = RuleSystem.of(Rule.make(L("[1:u(0/0)]"), L("[1:v(0/0)]")))
        rep = entangling_classes([s1, s2], CONFIG)
        assert rep.classes == ((0,), (1,))
        assert rep.entangling == ()
        assert rep.center == frozenset()

    def test_center_holds_serp_systems(self):
        ps = synthesize_parallel(APEX, H1, H2, CHAIN2)
        # a system whose rules are serps of the sample's parallels
        serp_sys = RuleSystem.of(ps.serp)
        rep = entangling_classes([RuleSystem.of(APEX), serp_sys], ThetaConfig(((CHAIN2, H1, H2),)))
        assert 0 not in rep.center

    @settings(max_examples=15)
    @given(st.lists(st.sampled_from([APEX, RELABEL, Rule.make(L("[1:b(1/0); ; 1.i1=x]"), L("[1:q(1/0); ; 1.i1=x]"))]), min_size=1, max_size=2).map(tuple), st.integers(2, 6), st.randoms(use_true_random=False))
    def test_classes_match_brute_force(self, rules, size, rnd):
        pool = [RuleSystem.of(*rules), RuleSystem.of(APEX), RuleSystem.of(RELABEL), RuleSystem.of(APEX, RELABEL)]
        sample = [rnd.choice(pool) for _ in range(size)]
        rep = entangling_classes(sample, CONFIG)
        assert [tuple(c) for c in rep.classes] == brute_classes(sample, CONFIG)
        for b, med in rep.mediatory.items():
            assert len(b) > 1 and med
        # hermeneutic rules come from the class pool
        for cls, rules_h in rep.hermeneutic.items():
            pool_keys = {r.key() for i in cls for r in sample[i].rules}
            pool_keys |= {k for i in cls for key in rep.parallels[i] for k in key}
            assert {r.key() for r in rules_h} <= pool_keys


class TestFerpGeneration:
    def test_empty(self):
        assert ferp_generation([], CONFIG) == []

    def test_single_parallel(self):
        ps = synthesize_parallel(APEX, H1, H2, CHAIN2)
        out = ferp_generation([RuleSystem.of(APEX)], ThetaConfig(((CHAIN2, H1, H2),)))
        keys = [s.key() for s in out]
        assert frozenset({ps.ferp.key()}) in keys
        assert RuleSystem.of(APEX).key() in keys

    def test_fixed_point(self):
        first = ferp_generation([RuleSystem.of(APEX, RELABEL)], CONFIG)
        again = ferp_generation(first, CONFIG)
        assert [s.key() for s in again] == [s.key() for s in first]


def test_relations_commute():
    nets = [SINGLE_A, SINGLE_C, CHAIN2]
    same = lambda x, y: x.cert() == y.cert()
    size = lambda x, y: len(x) == len(y)
    assert relations_commute(nets, same, size)
    # x -> y -> z style composition is order sensitive
    ab = lambda x, y: (x.cert(), y.cert()) == (SINGLE_A.cert(), SINGLE_C.cert())
    bc = lambda x, y: (x.cert(), y.cert()) == (SINGLE_C.cert(), CHAIN2.cert())
    assert not relations_commute(nets, ab, bc)
