"""Parallel rule synthesis through block homomorphisms, and sample-level entanglement.

Given a common net ``K``, two alphabetical abstracting homomorphisms and a rule
``r`` with a redex in the first image, :func:`synthesize_parallel` builds

* ``micro``: a rule on ``K`` whose left side is the preimage of the redex,
* ``ferp``: a re-representation of the second image through the common
  refinement of both block partitions,
* ``serp``: ``r`` transported onto that refined image,

together with the homomorphisms that close both commutation squares.
:func:`verify_commutation` evaluates the squares from scratch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .errors import BudgetExceeded, NbhError, RewireError, SynthesisError
from .net import Jungle, Net, Port, RankedLetter, match_net
from .nbh import BlockHomomorphism, apply_nbh, apply_nbh_traced
from .nuo import NuoRepresentation, iter_partitions, nuo_decompose
from .rns import Rule, RuleSystem, as_system, rewrite_at

# frontier symbols used to pair boundary ports of synthesized rules
_PAIR = "~p{}"


def pi_partition(family: Iterable[Iterable[Hashable]]) -> list[frozenset]:
    """Venn regions of a finite family: the coarsest partition of the union in
    which every member is a union of cells."""
    sets = [frozenset(s) for s in family]
    regions: dict[tuple[bool, ...], set] = {}
    for x in frozenset().union(*sets) if sets else ():
        regions.setdefault(tuple(x in s for s in sets), set()).add(x)
    return sorted((frozenset(r) for r in regions.values()), key=lambda c: sorted(map(repr, c)))


def find_representation(hom: BlockHomomorphism, k: Net, cap: int = 100_000) -> NuoRepresentation:
    """First partition of ``k`` into connected pieces that ``hom`` can map.

    Partitions come smallest pieces first, so the identity yields singletons.
    """
    if k.is_empty:
        return NuoRepresentation(k)
    for i, parts in enumerate(iter_partitions(k)):
        if i >= cap:
            raise BudgetExceeded("find_representation", cap)
        if all(hom.covers(k.induced(p)) for p in parts):
            return nuo_decompose(k, parts, 0)
    raise SynthesisError("no-representation", "no partition of K lies in the homomorphism's domain")


def _piece_sets(rep: NuoRepresentation) -> list[frozenset[int]]:
    return [frozenset(p.nodes) for p in rep.leaves()]


def _pairing(rule: Rule) -> tuple[dict[Port, int], dict[Port, int]]:
    """Number the boundary pairs ``rewrite_at`` would form for ``rule``."""
    lgroups: dict[tuple[str, str], list[Port]] = {}
    rgroups: dict[tuple[str, str], list[Port]] = {}
    for p in sorted(rule.left.frontier):
        lgroups.setdefault((p[1], rule.left.frontier[p]), []).append(p)
    for p in sorted(rule.right.frontier):
        rgroups.setdefault((p[1], rule.right.frontier[p]), []).append(p)
    left_ids: dict[Port, int] = {}
    right_ids: dict[Port, int] = {}
    counter = itertools.count()
    for key in sorted(lgroups):
        rs = rgroups.get(key, [])
        for i, lp in enumerate(lgroups[key]):
            j = next(counter)
            left_ids[lp] = j
            if i < len(rs):
                right_ids[rs[i]] = j
    return left_ids, right_ids


def _with_symbols(n: Net, symbols: Mapping[Port, str]) -> Net:
    return Net(n.nodes, n.links, {p: symbols.get(p, s) for p, s in n.frontier.items()})


def _transport_left(
    k: Net,
    region: frozenset[int],
    port_map: Mapping[Port, Port],
    emb_inverse: Mapping[int, int],
    left_ids: Mapping[Port, int],
) -> Net:
    """``k`` restricted to ``region`` with boundary symbols taken from the redex.

    ``port_map`` carries a port of ``k`` to the image port it becomes;
    ``emb_inverse`` carries an image node back to the pattern node it matched.
    """
    sub = k.induced(region)
    symbols = {}
    for p in sub.frontier:
        img = port_map.get(p)
        if img is None or img[0] not in emb_inverse:
            raise SynthesisError("preimage-not-found", f"boundary port {p} has no image in the redex")
        symbols[p] = _PAIR.format(left_ids[(emb_inverse[img[0]], img[1], img[2])])
    return _with_symbols(sub, symbols)


def _transported_right(rule: Rule, right_ids: Mapping[Port, int]) -> Net:
    return _with_symbols(rule.right, {p: _PAIR.format(j) for p, j in right_ids.items()})


@dataclass(frozen=True)
class ParallelSynthesis:
    micro: Rule
    ferp: Rule
    serp: Rule
    hom3: BlockHomomorphism
    hom01: BlockHomomorphism
    hom02: BlockHomomorphism
    rep_s: NuoRepresentation = field(repr=False)
    rep_t: NuoRepresentation = field(repr=False)
    cells: tuple[frozenset[int], ...] = field(repr=False, default=())
    redex: tuple[tuple[int, int], ...] = field(repr=False, default=())
    micro_at: tuple[tuple[int, int], ...] = field(repr=False, default=())
    serp_at: tuple[tuple[int, int], ...] = field(repr=False, default=())

    def system(self) -> RuleSystem:
        return RuleSystem((self.ferp, self.serp), "parallel")

    def key(self) -> tuple:
        return (self.ferp.key(), self.serp.key())


def _right_singletons(right: Net) -> list[tuple[Net, Net]]:
    # each new node is its own block; a self-looped node keeps its loop
    return [(piece, piece) for piece in (right.induced({n}) for n in right.nodes)]


def _extend(base: BlockHomomorphism, extra: Sequence[tuple[Net, Net]]) -> BlockHomomorphism:
    try:
        return BlockHomomorphism.build(
            list(base.entries) + list(extra), base.frontier_map, identity_default=base.identity_default
        )
    except ValueError as exc:
        raise SynthesisError("preimage-not-found", f"right side clashes with a domain block: {exc}") from None


def _rewritten_rep(after: Net, pieces: Sequence[frozenset[int]], region: frozenset[int]) -> NuoRepresentation:
    """Representation of a rewritten net: untouched pieces plus one singleton per new node."""
    kept = [p for p in pieces if not p & region]
    old = frozenset().union(*kept) if kept else frozenset()
    fresh = [frozenset({n}) for n in after.nodes if n not in old]
    return nuo_decompose(after, kept + fresh, 0) if kept or fresh else NuoRepresentation(after)


def synthesize_parallel(
    r: Rule,
    hom1: BlockHomomorphism,
    hom2: BlockHomomorphism,
    k: Net,
    rep_s: NuoRepresentation | None = None,
    rep_t: NuoRepresentation | None = None,
    occurrence: int = 0,
) -> ParallelSynthesis:
    """Build micro, ferp and serp for ``r`` over the common net ``k``.

    ``occurrence`` picks among the redexes of ``r`` in the first image, in
    ``match_net`` order.
    """
    for name, h in (("first", hom1), ("second", hom2)):
        if not h.flags.alpanbh:
            raise SynthesisError("not-alpanbh", f"{name} homomorphism is not alphabetical abstracting")
    if r.instance_sensitive:
        raise SynthesisError("preimage-not-found", "instance-sensitive rules are not synthesized")
    rep_s = rep_s or find_representation(hom1, k)
    rep_t = rep_t or find_representation(hom2, k)
    pieces_s, pieces_t = _piece_sets(rep_s), _piece_sets(rep_t)

    a, map1, origin1 = apply_nbh_traced(hom1, rep_s)
    embs = match_net(r.left, a)
    if len(embs) <= occurrence:
        raise SynthesisError("no-redex", f"rule {r.name or str(r)} has no redex in the abstracted net")
    emb = embs[occurrence]
    image = emb.image
    used = sorted({origin1[n] for n in image})
    covered = {n for n, o in origin1.items() if o in used}
    if covered != set(image):
        raise SynthesisError("no-redex", "redex splits the image of a block")
    region = frozenset().union(*(pieces_s[i] for i in used))
    inv1 = {t: p for p, t in emb.node_map}

    left_ids, right_ids = _pairing(r)
    unpaired = {s for p, s in r.right.frontier.items() if p not in right_ids}
    if unpaired & set(hom1.frontier_map):
        raise SynthesisError("preimage-not-found", "unpaired right symbols are renamed by the homomorphism")
    micro_right = _transported_right(r, right_ids)
    micro = Rule(_transport_left(k, region, map1, inv1, left_ids), micro_right, (), f"micro({r.name})")
    hom01 = _extend(hom1, _right_singletons(r.right))

    cells = pi_partition(pieces_s + pieces_t)
    used_letters = k.labels() | r.right.labels() | r.left.labels()
    cell_nets = [k.induced(c) for c in cells]
    shapes: dict[tuple, RankedLetter] = {}
    for c in cell_nets:
        if c.shape_cert() not in shapes:
            n_in, n_out = c.in_out_rank()
            idx = len(shapes)
            while f"w3_{idx}" in used_letters:
                idx += 1
            shapes[c.shape_cert()] = RankedLetter(f"w3_{idx}", n_in, n_out)
            used_letters = used_letters | {f"w3_{idx}"}
    hom3 = BlockHomomorphism.build([(c, shapes[c.shape_cert()]) for c in cell_nets])
    rep3 = nuo_decompose(k, cells, 0)
    b = apply_nbh(hom2, rep_t)
    c_net, map3, origin3 = apply_nbh_traced(hom3, rep3)
    ferp = Rule(b, c_net, (), f"ferp({r.name})")

    region_cells = {i for i, c in enumerate(cells) if c <= region}
    region_c = frozenset(n for n, o in origin3.items() if o in region_cells)
    # K port -> pattern port of r.left, through the first image
    to_left = {}
    for kp, ap in map1.items():
        if ap[0] in inv1 and kp[0] in region:
            to_left[kp] = (inv1[ap[0]], ap[1], ap[2])
    back3 = {cp: kp for kp, cp in map3.items()}
    sub = c_net.induced(region_c)
    symbols = {}
    for p in sub.frontier:
        kp = back3.get(p)
        if kp is None or kp not in to_left:
            raise SynthesisError("preimage-not-found", f"refined boundary port {p} has no counterpart")
        symbols[p] = _PAIR.format(left_ids[to_left[kp]])
    serp = Rule(_with_symbols(sub, symbols), micro_right, (), f"serp({r.name})")
    hom02 = _extend(hom3, _right_singletons(r.right))

    return ParallelSynthesis(
        micro=micro,
        ferp=ferp,
        serp=serp,
        hom3=hom3,
        hom01=hom01,
        hom02=hom02,
        rep_s=rep_s,
        rep_t=rep_t,
        cells=tuple(cells),
        redex=emb.node_map,
        micro_at=tuple((n, n) for n in sorted(region)),
        serp_at=tuple((n, n) for n in sorted(region_c)),
    )


@dataclass(frozen=True)
class CommutationCheck:
    passed: bool
    first: tuple[Net, Net]
    second: tuple[Net, Net]
    message: str = ""

    @property
    def witness(self) -> tuple[Net, Net] | None:
        if self.passed:
            return None
        return self.first if self.first[0].cert() != self.first[1].cert() else self.second


def _embedding_with(pattern: Net, target: Net, node_map: tuple[tuple[int, int], ...]):
    for e in match_net(pattern, target):
        if e.node_map == node_map:
            return e
    return None


def _exact_isomorphism(pattern: Net, target: Net):
    """An isomorphism embedding that also keeps every frontier symbol."""
    if len(pattern) != len(target):
        return None
    for e in match_net(pattern, target):
        if all(b == ("frontier", pattern.frontier[p]) for p, b in e.bindings):
            return e
    return None


def verify_commutation(
    ps: ParallelSynthesis, r: Rule, hom1: BlockHomomorphism, hom2: BlockHomomorphism, k: Net
) -> CommutationCheck:
    """Evaluate both squares on ``k``.

    First: the first image rewritten by ``r`` against ``k`` rewritten by micro,
    then abstracted by ``hom01``.  Second: the second image rewritten by ferp
    then serp against the same micro result abstracted by ``hom02``.
    """
    empty = Net()
    try:
        a = apply_nbh(hom1, ps.rep_s)
        e = _embedding_with(r.left, a, ps.redex)
        if e is None:
            return CommutationCheck(False, (a, empty), (empty, empty), "stored redex does not match")
        lhs1 = rewrite_at(a, r, e)

        m = _embedding_with(ps.micro.left, k, ps.micro_at)
        if m is None:
            return CommutationCheck(False, (lhs1, empty), (empty, empty), "micro does not match K")
        k2 = rewrite_at(k, ps.micro, m)
        region = frozenset(dict(ps.micro_at))
        rhs1 = apply_nbh(ps.hom01, _rewritten_rep(k2, _piece_sets(ps.rep_s), region))

        b = apply_nbh(hom2, ps.rep_t)
        # ferp rewrites the whole image, so it is applied along a symbol-keeping isomorphism
        f = _exact_isomorphism(ps.ferp.left, b)
        if f is None:
            return CommutationCheck(False, (lhs1, rhs1), (b, empty), "ferp does not match")
        mid = rewrite_at(b, ps.ferp, f)
        # locate the refined net inside the ferp result, then the stored serp occurrence
        iso = _exact_isomorphism(ps.ferp.right, mid)
        s = None
        if iso is not None:
            phi = iso.mapping
            s = _embedding_with(ps.serp.left, mid, tuple((p, phi[t]) for p, t in ps.serp_at))
        if s is None:
            return CommutationCheck(False, (lhs1, rhs1), (mid, empty), "serp does not match")
        lhs2 = rewrite_at(mid, ps.serp, s)
        rhs2 = apply_nbh(ps.hom02, _rewritten_rep(k2, list(ps.cells), region))
    except (NbhError, RewireError, SynthesisError) as exc:
        return CommutationCheck(False, (empty, empty), (empty, empty), str(exc))
    ok1 = lhs1.cert() == rhs1.cert()
    ok2 = lhs2.cert() == rhs2.cert()
    msg = "" if ok1 and ok2 else ("first square differs" if not ok1 else "second square differs")
    return CommutationCheck(ok1 and ok2, (lhs1, rhs1), (lhs2, rhs2), msg)


# -- entanglement over finite samples -------------------------------------------


@dataclass(frozen=True)
class ThetaConfig:
    """Finite universe of (K, first hom, second hom) triples."""

    universe: tuple[tuple[Net, BlockHomomorphism, BlockHomomorphism], ...]
    name: str = "universe"


def fixed_parallels(system: RuleSystem | Rule | Iterable[Rule], config: ThetaConfig) -> frozenset:
    """Keys of every synthesizable (ferp, serp) pair of ``system`` over the universe."""
    return frozenset(p.key() for p in _parallels(as_system(system), config))


def _parallels(system: RuleSystem, config: ThetaConfig) -> list[ParallelSynthesis]:
    out = []
    for rule in system.rules:
        for k, h1, h2 in config.universe:
            try:
                out.append(synthesize_parallel(rule, h1, h2, k))
            except (SynthesisError, NbhError, RewireError):
                continue
    return out


@dataclass(frozen=True)
class EntanglementReport:
    classes: tuple[tuple[int, ...], ...]
    entangling: tuple[tuple[int, ...], ...]
    mediatory: Mapping[tuple[int, ...], frozenset]
    center: frozenset[int]
    hermeneutic: Mapping[tuple[int, ...], tuple[Rule, ...]]
    parallels: tuple[frozenset, ...] = field(repr=False, default=())
    universe: str = ""


def _apex_letters(rules: Iterable[Rule]) -> frozenset[str]:
    return frozenset(r.left.nodes[n].name for r in rules for n in r.left.apex())


def entangling_classes(
    sample: Sequence[RuleSystem], config: ThetaConfig, budget: int = 10_000
) -> EntanglementReport:
    """Group sample systems that share a fixed parallel.

    Indices refer to positions in ``sample``.  Classes are the transitive
    closure of sharing; entangling sets are the maximal subsets with a
    nonempty common intersection, which is their mediatory set.
    """
    sample = [as_system(s) for s in sample]
    if len(sample) * max(len(config.universe), 1) > budget:
        raise BudgetExceeded("entangling_classes", budget)
    syntheses = [_parallels(s, config) for s in sample]
    fps = [frozenset(p.key() for p in ps) for ps in syntheses]
    by_key = {p.key(): p for ps in syntheses for p in ps}

    parent = list(range(len(sample)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    holders: dict = {}
    for i, fp in enumerate(fps):
        for key in fp:
            holders.setdefault(key, []).append(i)
    for members in holders.values():
        for j in members[1:]:
            a, b = find(members[0]), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(len(sample)):
        groups.setdefault(find(i), []).append(i)
    classes = tuple(sorted(tuple(g) for g in groups.values()))

    candidates = {tuple(m) for m in holders.values() if len(m) > 1}
    entangling = tuple(
        sorted(c for c in candidates if not any(set(c) < set(d) for d in candidates))
    )
    mediatory = {b: frozenset.intersection(*(fps[i] for i in b)) for b in entangling}

    serps = {key[1] for key in by_key}
    center = frozenset(
        i for i, s in enumerate(sample) if fps[i] and all(r.key() in serps for r in s.rules)
    )

    hermeneutic = {}
    for cls in classes:
        pool: dict[tuple, Rule] = {}
        for i in cls:
            for rule in sample[i].rules:
                pool.setdefault(rule.key(), rule)
            for key in sorted(fps[i]):
                p = by_key[key]
                pool.setdefault(p.ferp.key(), p.ferp)
                pool.setdefault(p.serp.key(), p.serp)
        cells: set[frozenset[str]] = set()
        for i, j in itertools.product(cls, repeat=2):
            x, y = _apex_letters(sample[i].rules), _apex_letters(sample[j].rules)
            cells.update(pi_partition([x, y]))
        hermeneutic[cls] = tuple(
            pool[k] for k in sorted(pool) if _apex_letters([pool[k]]) in cells
        )
    return EntanglementReport(
        classes, entangling, mediatory, center, hermeneutic, tuple(fps), config.name
    )


def _generate(system: RuleSystem, config: ThetaConfig) -> list[RuleSystem]:
    """Systems made of the ferps of every nonempty subset of the fixed parallels."""
    seen: dict[tuple, Rule] = {}
    for p in _parallels(system, config):
        seen.setdefault(p.key(), p.ferp)
    keys = sorted(seen)
    out = []
    for size in range(1, len(keys) + 1):
        for subset in itertools.combinations(keys, size):
            ferps: dict[tuple, Rule] = {}
            for key in subset:
                ferps.setdefault(seen[key].key(), seen[key])
            out.append(RuleSystem(tuple(ferps[k] for k in sorted(ferps)), "ferp"))
    return out


def ferp_generation(
    systems: Iterable[RuleSystem | Rule], config: ThetaConfig, budget: int = 1_000
) -> list[RuleSystem]:
    """Closure of ``systems`` under ferp generation, in canonical order.

    The input belongs to its own closure, so the result is a fixed point.
    """
    found: dict[frozenset, RuleSystem] = {}
    frontier = [as_system(s) for s in systems]
    while frontier:
        nxt = []
        for s in frontier:
            if s.key() in found:
                continue
            found[s.key()] = s
            if len(found) > budget:
                raise BudgetExceeded("ferp_generation", budget)
            nxt.extend(_generate(s, config))
        frontier = nxt
    return [found[k] for k in sorted(found, key=lambda k: sorted(k))]


def relations_commute(
    universe: Iterable[Net],
    first: Callable[[Net, Net], bool],
    second: Callable[[Net, Net], bool],
) -> bool:
    """Order-one check that composing two relations either way gives the same pairs."""
    nets = list(Jungle(universe))
    n = len(nets)
    a = [[first(x, y) for y in nets] for x in nets]
    b = [[second(x, y) for y in nets] for x in nets]
    ab = {(i, j) for i in range(n) for j in range(n) if any(a[i][m] and b[m][j] for m in range(n))}
    ba = {(i, j) for i in range(n) for j in range(n) if any(b[i][m] and a[m][j] for m in range(n))}
    return ab == ba
