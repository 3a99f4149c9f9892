"""Acceptance criteria 1-9.

Each test records one line in ``RESULTS``; the terminal summary hook in
conftest prints them, one per criterion.
"""

from __future__ import annotations

import itertools
import random
import subprocess
import sys
import time

import pytest

from netrewrite.confluence import (
    Harmonizer,
    check_confluence,
    check_pair,
    check_unavoidability,
    dimensional_rule_set,
    harmonize,
    min_connector_bound,
    step,
)
from netrewrite.errors import BudgetExceeded, SynthesisError
from netrewrite.net import connected_node_sets
from netrewrite.nuo import iter_covers, iter_partitions, nuo_decompose, nuo_grade, nuo_inverse
from netrewrite.oracle import joinable, single_rule_completions
from netrewrite.parallel import ThetaConfig, ferp_generation, synthesize_parallel, verify_commutation
from netrewrite.rns import RuleSystem, mark_uprns, validate_uprns
from netrewrite.textfmt import parse_document, parse_literal as L, serialize_hom, serialize_net, serialize_rule

from conftest import FIXTURES
from confluence_gen import ground_nets, node_dimension, relabel, relabel_pool, shape_pool, systems_upto
from fixture_gen import parallel_fixtures
from netgen import CHAIN2, random_nets
from uprns_cases import BAD, GOOD

pytestmark = pytest.mark.acceptance

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(RESULTS[n])


# -- 1. representation roundtrip ----------------------------------------------------

FULL_ENUMERATION_SETS = 8  # nets with more connected subsets get capped enumeration
CAP_PER_NET = 16


def _representations(n):
    if len(connected_node_sets(n)) <= FULL_ENUMERATION_SETS:
        return nuo_grade(n, 1, 10**6)
    reps = [nuo_decompose(n, c, i) for c in itertools.islice(iter_covers(n), CAP_PER_NET) for i in range(len(c))]
    reps += [nuo_decompose(n, c, 0) for c in itertools.islice(iter_partitions(n), CAP_PER_NET)]
    return reps


def test_criterion_1_nuo_roundtrip():
    t0 = time.perf_counter()
    nets = random_nets(2026, 1000, max_nodes=12, letters="abcd", max_arity=2)
    reps = failures = 0
    for n in nets:
        key = n.cert()
        for rep in _representations(n):
            reps += 1
            failures += nuo_inverse(rep).cert() != key
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 60 and len(nets) >= 1000
    record(1, ok, f"{len(nets)} nets, {reps} representations, {failures} failures, {elapsed:.1f}s")
    assert ok


# -- 2. commutation ------------------------------------------------------------------


def test_criterion_2_commutation():
    t0 = time.perf_counter()
    fixtures = parallel_fixtures(2026, 120, max_nodes=10)
    failures = []
    for i, f in enumerate(fixtures):
        try:
            ps = synthesize_parallel(f.rule, f.hom1, f.hom2, f.k, f.rep_s, f.rep_t)
            check = verify_commutation(ps, f.rule, f.hom1, f.hom2, f.k)
            if not check.passed:
                failures.append((i, check.message))
        except SynthesisError as exc:
            failures.append((i, str(exc)))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 300 and max(len(f.k) for f in fixtures) <= 10
    record(2, ok, f"{len(fixtures)} fixtures, {len(failures)} failures, {elapsed:.1f}s")
    assert ok, failures[:5]


# -- 3. confluence verdicts against the oracle --------------------------------------

SWEEP_DIMS_A = node_dimension("ap")
SWEEP_DIMS_B = node_dimension("bq")
# (letters, ground count, relabels); the two-letter family has fewer demand failures
SWEEP_FAMILIES = [
    ("abc", 40, [("a", "p"), ("b", "q"), ("c", "a"), ("c", "b"), ("p", "a"), ("q", "b")]),
    ("ab", 120, [("a", "p"), ("b", "q"), ("p", "a"), ("q", "b")]),
]
ORACLE_DEPTH = 4


def _agrees(kind: str, direction: str | None, relations: list[str]) -> bool:
    rels = set(relations)
    if kind == "comprehensive":
        return rels == {"="}
    if kind == "partial":
        return direction in rels and rels <= {"=", direction}
    return "incomparable" in rels or {"⊆", "⊇"} <= rels


def test_criterion_3_sweep_against_oracle():
    t0 = time.perf_counter()
    counts = {"instances": 0, "verdicts": 0, "pairs": 0, "abstain": 0, "inconclusive": 0}
    bad = []
    grounds = [
        (g, relabels)
        for letters, count, relabels in SWEEP_FAMILIES
        for g in ground_nets(2026, count, 6, letters, require="ab")
    ]
    for g, relabels in grounds:
        pool = shape_pool(g, relabels)
        firing = [r for r in pool if step(r, [g])]
        ad_set = dimensional_rule_set(pool, SWEEP_DIMS_A)
        bd_set = dimensional_rule_set(pool, SWEEP_DIMS_B)
        systems = systems_upto(firing, 2)
        for ra, rb in itertools.product(systems, repeat=2):
            counts["instances"] += 1
            conn, relations, skip = [], [], False
            for ad, bd in itertools.product(ad_set, bd_set):
                try:
                    p = check_pair(g, ra, rb, ad, bd, SWEEP_DIMS_A, SWEEP_DIMS_B, depth=ORACLE_DEPTH)
                except BudgetExceeded:
                    skip = True
                    continue
                j = joinable(g, ra, rb, [bd], ORACLE_DEPTH, completion_b=[ad])
                if j.truncated:
                    skip = True
                    continue
                counts["pairs"] += 1
                if p.relation != j.enclosure_relation:
                    bad.append(("pair", g, ra, rb, ad, bd, p.relation, j.enclosure_relation))
                if p.demands.ok:
                    conn.append((ad, bd))
                    relations.append(j.enclosure_relation)
            if skip:
                counts["inconclusive"] += 1
                continue
            if not conn:
                counts["abstain"] += 1
                continue
            counts["verdicts"] += 1
            v = check_confluence(g, ra, rb, conn, SWEEP_DIMS_A, SWEEP_DIMS_B, depth=ORACLE_DEPTH)
            if not _agrees(v.kind, v.direction, relations):
                bad.append(("verdict", g, ra, rb, v.kind, v.direction, relations))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 900
    detail = ", ".join(f"{v} {k}" for k, v in counts.items())
    record(3, ok, f"{detail}, {len(bad)} discrepancies, {elapsed:.1f}s")
    assert ok, bad[:3]


# -- 4. partial versus comprehensive ------------------------------------------------

DIMS4_A = node_dimension("apc")
DIMS4_B = node_dimension("bq")
TWO_SOURCES = "[1:a(0/1), 2:a(0/1); ; 1.o1=y, 2.o1=y]"
THREE_SOURCES = "[1:a(0/1), 2:a(0/1), 3:a(0/1); ; 1.o1=x, 2.o1=x, 3.o1=x]"
TWO_CHAINS = "[1:b(1/0), 2:b(1/0), 3:a(0/1), 4:a(0/1); 3.o1->2.i1, 4.o1->1.i1]"
SWAP = "[1:a(1/1), 2:a(1/1); ; 1.i1=y, 1.o1=x, 2.i1=x, 2.o1=y]"
CHAIN_AND_SOURCE = "[1:a(0/1), 2:b(1/0), 3:a(0/1); 1.o1->2.i1; 3.o1=x]"
FAN = "[1:a(1/0), 2:a(1/0), 3:a(1/0), 4:b(0/1); 4.o1->3.i1; 1.i1=y, 2.i1=y]"

# (ground, r_a, r_b, r_ad, r_bd, expected kind, expected direction)
# rules are (source letter, target letter, in-arity, out-arity)
CLASSIFICATION_FIXTURES = [
    # equal enclosure: mirrored relabels
    ("[1:a(0/1), 2:b(1/0); 1.o1->2.i1]", ("a", "p", 0, 1), ("b", "q", 1, 0), ("a", "p", 0, 1), ("b", "q", 1, 0), "comprehensive", "="),
    ("[1:a(0/1), 2:b(1/0); 1.o1->2.i1; ]", ("a", "c", 0, 1), ("b", "q", 1, 0), ("a", "c", 0, 1), ("b", "q", 1, 0), "comprehensive", "="),
    (TWO_CHAINS, ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "p", 0, 1), "comprehensive", "="),
    (TWO_SOURCES, ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "p", 0, 1), "comprehensive", "="),
    (THREE_SOURCES, ("a", "c", 0, 1), ("a", "c", 0, 1), ("a", "c", 0, 1), ("a", "c", 0, 1), "comprehensive", "="),
    ("[1:a(1/0); ; 1.i1=y]", ("a", "p", 1, 0), ("a", "p", 1, 0), ("a", "p", 1, 0), ("a", "p", 1, 0), "comprehensive", "="),
    ("[1:b(1/0); ; 1.i1=x]", ("b", "q", 1, 0), ("b", "q", 1, 0), ("b", "q", 1, 0), ("b", "q", 1, 0), "comprehensive", "="),
    ("[1:a(0/0), 2:b(1/1); 2.o1->2.i1]", ("a", "p", 0, 0), ("a", "p", 0, 0), ("a", "p", 0, 0), ("a", "p", 0, 0), "comprehensive", "="),
    (SWAP, ("a", "p", 1, 1), ("a", "p", 1, 1), ("a", "p", 1, 1), ("a", "p", 1, 1), "comprehensive", "="),
    (FAN, ("a", "c", 1, 0), ("a", "c", 1, 0), ("a", "c", 1, 0), ("a", "c", 1, 0), "comprehensive", "="),
    # proper inclusion: the connectors send the untouched copy to different letters
    (TWO_SOURCES, ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "c", 0, 1), "partial", "⊇"),
    (TWO_SOURCES, ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "c", 0, 1), ("a", "p", 0, 1), "partial", "⊆"),
    (THREE_SOURCES, ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "c", 0, 1), "partial", "⊇"),
    (THREE_SOURCES, ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "c", 0, 1), ("a", "p", 0, 1), "partial", "⊆"),
    (TWO_CHAINS, ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "c", 0, 1), "partial", "⊇"),
    (TWO_CHAINS, ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "c", 0, 1), ("a", "p", 0, 1), "partial", "⊆"),
    (SWAP, ("a", "p", 1, 1), ("a", "p", 1, 1), ("a", "p", 1, 1), ("a", "c", 1, 1), "partial", "⊇"),
    (SWAP, ("a", "p", 1, 1), ("a", "p", 1, 1), ("a", "c", 1, 1), ("a", "p", 1, 1), "partial", "⊆"),
    (CHAIN_AND_SOURCE, ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "p", 0, 1), ("a", "c", 0, 1), "partial", "⊇"),
    (FAN, ("a", "p", 1, 0), ("a", "p", 1, 0), ("a", "c", 1, 0), ("a", "p", 1, 0), "partial", "⊆"),
]


def test_criterion_4_classification():
    mismatches = []
    kinds = {"comprehensive": 0, "partial": 0}
    for ground, ra, rb, ad, bd, kind, direction in CLASSIFICATION_FIXTURES:
        g = L(ground)
        ra, rb, ad, bd = (relabel(*x) for x in (ra, rb, ad, bd))
        v = check_confluence(g, ra, rb, [(ad, bd)], DIMS4_A, DIMS4_B, depth=ORACLE_DEPTH)
        j = joinable(g, ra, rb, [bd], ORACLE_DEPTH, completion_b=[ad])
        oracle_kind = "comprehensive" if j.enclosure_relation == "=" else "partial"
        if (v.kind, v.direction) != (kind, direction) or (oracle_kind, j.enclosure_relation) != (kind, direction):
            mismatches.append((ground, kind, direction, v.kind, v.direction, j.enclosure_relation))
        kinds[kind] += 1
    ok = not mismatches and kinds["comprehensive"] >= 10 and kinds["partial"] >= 10
    record(4, ok, f"{kinds['comprehensive']} equal + {kinds['partial']} inclusion fixtures, {len(mismatches)} mismatches")
    assert ok, mismatches


# -- 5. connector bound ---------------------------------------------------------------

HARMONY_RELABELS = [("a", "p"), ("b", "q"), ("c", "r")]


def _harmony_instances(seed: int, count: int):
    """(ground, S) with |S| in {2, 3}: relabels of distinct letters, each firing,
    with pairwise distinct one-step results."""
    out = []
    for g in ground_nets(seed, 400, 5, "abc"):
        firing = [r for r in relabel_pool(g, HARMONY_RELABELS) if len(step(r, [g])) == 1]
        for size in (2, 3):
            for s in itertools.combinations(firing, size):
                letters = {r.left.nodes[1].name for r in s}
                if len(letters) == size and len(step(list(s), [g])) == size:
                    out.append((g, list(s)))
        if len(out) >= count:
            break
    return out[:count]


def _smallest(g, rules):
    h = harmonize(g, rules, rules, budget=3, depth=ORACLE_DEPTH)
    return len(h.connectors_used) if isinstance(h, Harmonizer) else None


def test_criterion_5_connector_bound():
    t0 = time.perf_counter()
    bound_values = [min_connector_bound(n) for n in (2, 3, 4)]
    violations, qualified, examples = 0, 0, []
    by_size = {2: 0, 3: 0}
    for g, s in _harmony_instances(2026, 60):
        found = _smallest(g, s)
        if found is None:
            continue
        # every reduction step is necessary: each subset A needs at least |A|-1 connectors
        necessary = all(
            (_smallest(g, list(a)) or 0) >= len(a) - 1
            for k in range(2, len(s) + 1)
            for a in itertools.combinations(s, k)
        )
        if not necessary:
            continue
        qualified += 1
        by_size[len(s)] += 1
        if found < min_connector_bound(len(s)):
            violations += 1
            if len(examples) < 3:
                examples.append((str(g), [r.name for r in s], found, min_connector_bound(len(s))))
    elapsed = time.perf_counter() - t0
    ok = bound_values == [1, 3, 6] and violations == 0 and qualified > 0 and elapsed < 600
    record(
        5,
        ok,
        f"bounds {bound_values}, {qualified} instances (|S|=2: {by_size[2]}, |S|=3: {by_size[3]}), "
        f"{violations} below the bound, {elapsed:.1f}s",
    )
    assert bound_values == [1, 3, 6]
    assert ok, examples


# -- 6. unavoidability ----------------------------------------------------------------

UNAVOIDABLE = [
    ("[1:a(0/1), 2:b(1/0); 1.o1->2.i1]", ("a", "p", 0, 1), ("b", "q", 1, 0)),
    ("[1:a(0/2), 2:b(1/0), 3:b(1/0); 1.o1->2.i1, 1.o2->3.i1]", ("a", "p", 0, 2), ("b", "q", 1, 0)),
    ("[1:a(0/1), 2:b(1/0), 3:c(0/0); 1.o1->2.i1]", ("a", "p", 0, 1), ("b", "q", 1, 0)),
    ("[1:a(0/1), 2:b(1/1), 3:b(1/0); 1.o1->2.i1, 2.o1->3.i1]", ("a", "p", 0, 1), ("b", "q", 1, 0)),
    ("[1:a(0/1), 2:b(1/0); 1.o1->2.i1]", ("b", "q", 1, 0), ("a", "p", 0, 1)),
    ("[1:a(1/1), 2:b(1/1); 1.o1->2.i1, 2.o1->1.i1]", ("a", "p", 1, 1), ("b", "q", 1, 1)),
    ("[1:a(0/1), 2:b(2/0), 3:a(0/1); 1.o1->2.i1, 3.o1->2.i2]", ("b", "q", 2, 0), ("a", "p", 0, 1)),
]


def _candidates(g):
    """Every relabel between the fixture's letters, in both directions, at the ground's arities."""
    letters = sorted({l.name for l in g.nodes.values()} | {"p", "q"})
    shapes = sorted({(l.n_in, l.n_out) for l in g.nodes.values()})
    return [relabel(x, y, i, o) for x in letters for y in letters if x != y for i, o in shapes]


def test_criterion_6_unavoidability():
    dims_a, dims_b = node_dimension("ap", 2), node_dimension("bq", 2)
    contradictions, flagged = [], 0
    for ground, ra, rb in UNAVOIDABLE:
        g = L(ground)
        ra, rb = relabel(*ra), relabel(*rb)
        rep = check_unavoidability(g, ra, rb, dims_a, dims_b)
        if not (rep.case_i or rep.case_ii):
            contradictions.append((ground, "preconditions not met"))
            continue
        flagged += 1
        cands = _candidates(g)
        for first, second in ((ra, rb), (rb, ra)):
            found = single_rule_completions(g, first, second, cands, depth=4)
            if found:
                contradictions.append((ground, first.name, [r.name for r in found]))
    ok = not contradictions and flagged >= 5
    record(6, ok, f"{flagged} fixtures with case flags, {len(contradictions)} contradictions")
    assert ok, contradictions


# -- 7. universally partitioning validator -----------------------------------------


def test_criterion_7_uprns():
    wrong = []
    for name, system in GOOD.items():
        if validate_uprns(system, CHAIN2):
            wrong.append(name)
        else:
            mark_uprns(system, CHAIN2)
    for kind, system in BAD.items():
        if {v.kind for v in validate_uprns(system, CHAIN2)} != {kind}:
            wrong.append(kind)
    ok = not wrong and len(GOOD) >= 6 and len(BAD) >= 6
    record(7, ok, f"{len(GOOD)} good + {len(BAD)} bad systems, {len(wrong)} misclassified")
    assert ok, wrong


# -- 8. determinism and roundtrip -----------------------------------------------------


def _document_text(doc) -> str:
    parts = [serialize_net(n, name) for name, n in sorted(doc.nets.items())]
    parts += [serialize_rule(r, name) for name, r in sorted(doc.rules.items())]
    parts += [serialize_hom(h, name) for name, h in sorted(doc.homs.items())]
    return "".join(parts)


CLI_RUNS = [
    ["validate", "chain2.net", "dangling.net", "parallel.nbh"],
    ["confluence", "--ground", "chain2.net", "--ra", "ra.rns", "--rb", "rb.rns", "--dims", "dims.net"],
    ["confluence", "--ground", "chain2.net", "--ra", "ra.rns", "--rb", "rb.rns", "--dims", "dims.net", "--json"],
    ["oracle", "--ground", "chain2.net", "--ra", "ra.rns", "--rb", "rb.rns", "--dims", "dims.net"],
    ["parallel", "parallel.nbh", "--rule", "relabel_apex", "--hom1", "collapse_b", "--hom2", "collapse_a"],
    ["entangle", "parallel.nbh", "--config", "k:collapse_b:collapse_a"],
]


def test_criterion_8_determinism():
    roundtrip_failures = []
    files = sorted(p for p in FIXTURES.iterdir() if p.is_file())
    for path in files:
        doc = parse_document(path.read_text(), str(path))
        text = _document_text(doc)
        again = parse_document(text)
        if _document_text(again) != text:
            roundtrip_failures.append(path.name)
            continue
        same = (
            {k: n.cert() for k, n in doc.nets.items()} == {k: n.cert() for k, n in again.nets.items()}
            and {k: r.key() for k, r in doc.rules.items()} == {k: r.key() for k, r in again.rules.items()}
            and doc.homs == again.homs
        )
        if not same:
            roundtrip_failures.append(path.name)
    cli_failures = []
    for argv in CLI_RUNS:
        runs = [
            subprocess.run([sys.executable, "-m", "netrewrite.cli", *argv], cwd=FIXTURES, capture_output=True)
            for _ in range(3)
        ]
        if len({(r.stdout, r.stderr, r.returncode) for r in runs}) != 1:
            cli_failures.append(argv[0])
    ok = not roundtrip_failures and not cli_failures
    record(
        8,
        ok,
        f"{len(files)} fixture files, {len(roundtrip_failures)} roundtrip failures, "
        f"{len(CLI_RUNS)} CLI invocations x3, {len(cli_failures)} differing",
    )
    assert ok, (roundtrip_failures, cli_failures)


# -- 9. ferp generation fixed point -----------------------------------------------


def test_criterion_9_ferp_fixed_point():
    rng = random.Random(2026)
    fixtures = parallel_fixtures(2027, 12, max_nodes=6)
    failures, nontrivial = [], 0
    for i, f in enumerate(fixtures):
        other = fixtures[(i + 1) % len(fixtures)]
        config = ThetaConfig(((f.k, f.hom1, f.hom2), (other.k, other.hom1, other.hom2)), f"sample{i}")
        sample = [RuleSystem.of(f.rule)] + ([RuleSystem.of(other.rule)] if rng.random() < 0.5 else [])
        first = ferp_generation(sample, config)
        again = ferp_generation(first, config)
        nontrivial += len(first) > len(sample)
        if [s.key() for s in again] != [s.key() for s in first]:
            failures.append(i)
    ok = not failures and len(fixtures) >= 10
    record(9, ok, f"{len(fixtures)} samples ({nontrivial} grew), {len(failures)} not fixed")
    assert ok, failures
