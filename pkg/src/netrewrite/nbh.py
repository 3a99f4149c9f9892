"""Net block homomorphisms, their classification, abstraction search and saturation.

A block homomorphism maps whole blocks (sub-nets, compared by shape) to images,
either a single ranked letter or a small net.  Applying it to a representation
replaces each piece by its image and rewires the links between pieces through
the unbound ports, matched positionally in the piece's canonical shape order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from .errors import BudgetExceeded, NbhError, UniverseTooLarge
from .net import IN, OUT, Jungle, Net, Port, RankedLetter, cut_symbol
from .nuo import NuoRepresentation, iter_partitions, nuo_decompose, nuo_inverse

Image = Union[RankedLetter, Net]


@dataclass(frozen=True)
class NbhFlags:
    alphabetical: bool
    unexpanding: bool
    abstracting: bool
    environment_saving: bool

    @property
    def alpanbh(self) -> bool:
        return self.alphabetical and self.abstracting and self.environment_saving

    def as_dict(self) -> dict[str, bool]:
        return {
            "alphabetical": self.alphabetical,
            "unexpanding": self.unexpanding,
            "abstracting": self.abstracting,
            "environment_saving": self.environment_saving,
        }


def _image_rank(image: Image) -> tuple[int, int]:
    if isinstance(image, RankedLetter):
        return image.n_in, image.n_out
    return image.in_out_rank()


@dataclass(frozen=True)
class BlockHomomorphism:
    entries: tuple[tuple[Net, Image], ...]
    frontier_pairs: tuple[tuple[str, str], ...] = ()
    identity_default: bool = False

    @classmethod
    def build(
        cls,
        entries: Iterable[tuple[Net, Image]],
        frontier_map: Mapping[str, str] | None = None,
        identity_default: bool = False,
    ) -> BlockHomomorphism:
        seen: dict[tuple, tuple[Net, Image]] = {}
        for blk, image in entries:
            key = blk.shape_cert()
            if key in seen and _image_key(seen[key][1]) != _image_key(image):
                raise ValueError(f"block {blk!r} mapped to two different images")
            seen.setdefault(key, (blk, image))
        ordered = tuple(seen[k] for k in sorted(seen))
        return cls(ordered, tuple(sorted((frontier_map or {}).items())), identity_default)

    @classmethod
    def identity(cls) -> BlockHomomorphism:
        return cls((), (), True)

    @cached_property
    def _table(self) -> dict[tuple, tuple[int, Net, Image]]:
        return {blk.shape_cert(): (i, blk, img) for i, (blk, img) in enumerate(self.entries)}

    @property
    def frontier_map(self) -> dict[str, str]:
        return dict(self.frontier_pairs)

    @property
    def block_domain(self) -> Jungle:
        return Jungle(b for b, _ in self.entries)

    def index_of(self, piece: Net) -> int | None:
        hit = self._table.get(piece.shape_cert())
        return None if hit is None else hit[0]

    def covers(self, piece: Net) -> bool:
        return self.identity_default or piece.shape_cert() in self._table

    def image_of(self, piece: Net) -> Image:
        hit = self._table.get(piece.shape_cert())
        if hit is not None:
            return hit[2]
        if self.identity_default:
            return piece
        raise NbhError("block-not-in-domain", f"no image for block {piece!r}")

    @cached_property
    def flags(self) -> NbhFlags:
        return classify_nbh(self)


def _image_key(image: Image):
    return image if isinstance(image, RankedLetter) else image.shape_cert()


def classify_nbh(h: BlockHomomorphism) -> NbhFlags:
    """Recompute all four flags from the block table."""
    alphabetical = unexpanding = abstracting = saving = True
    for blk, image in h.entries:
        src_in, src_out = blk.in_out_rank()
        img_in, img_out = _image_rank(image)
        if not (isinstance(image, RankedLetter) or (len(image) == 1 and not image.links)):
            alphabetical = False
        if img_in + img_out > src_in + src_out:
            unexpanding = False
        empty = isinstance(image, Net) and image.is_empty
        if empty or (src_in and not img_in) or (src_out and not img_out):
            abstracting = False
        if (img_in, img_out) != (src_in, src_out):
            saving = False
    return NbhFlags(alphabetical, unexpanding, abstracting, saving)


def _split_ports(ports: Sequence[Port]) -> tuple[list[Port], list[Port]]:
    return [p for p in ports if p[1] == IN], [p for p in ports if p[1] == OUT]


def apply_nbh(h: BlockHomomorphism, rep: NuoRepresentation | Net) -> Net:
    """Image of a representation: every piece replaced by its block image.

    Pieces must be pairwise disjoint.  Links between pieces survive when both
    endpoints have an image port; if ``h`` is flagged abstracting, every pair of
    linked pieces must keep at least one link.
    """
    return apply_nbh_traced(h, rep)[0]


def apply_nbh_traced(
    h: BlockHomomorphism, rep: NuoRepresentation | Net
) -> tuple[Net, dict[Port, Port], dict[int, int]]:
    """Like :func:`apply_nbh`, also returning the source-to-image port map and
    the piece index of every image node."""
    if isinstance(rep, Net):
        rep = nuo_decompose(rep, [rep], 0) if not rep.is_empty else NuoRepresentation(rep)
    pieces = rep.leaves()
    owner: dict[int, int] = {}
    for k, p in enumerate(pieces):
        for node in p.nodes:
            if node in owner:
                raise NbhError("overlapping-blocks", f"node {node} lies in pieces {owner[node]} and {k}")
            owner[node] = k
    source = nuo_inverse(rep)
    fmap = h.frontier_map

    nodes: dict[int, RankedLetter] = {}
    links: list[tuple[int, int, int, int]] = []
    frontier: dict[Port, str] = {}
    port_map: dict[Port, Port] = {}
    origin: dict[int, int] = {}
    next_id = 1
    for k, p in enumerate(pieces):
        first = next_id
        image = h.image_of(p)
        src_in, src_out = _split_ports(p.unbound_ports(p.shape_order()))
        if isinstance(image, RankedLetter):
            nid = next_id
            next_id += 1
            nodes[nid] = image
            img_in = [(nid, IN, k) for k in range(1, image.n_in + 1)]
            img_out = [(nid, OUT, k) for k in range(1, image.n_out + 1)]
        else:
            remap = {n: next_id + i for i, n in enumerate(image.nodes)}
            next_id += len(remap)
            for n, l in image.nodes.items():
                nodes[remap[n]] = l
            links += [(remap[l.src], l.out_port, remap[l.dst], l.in_port) for l in image.links]
            img_in, img_out = _split_ports(
                [(remap[q[0]], q[1], q[2]) for q in image.unbound_ports(image.shape_order())]
            )
        origin.update({n: k for n in range(first, next_id)})
        for src, img in ((src_in, img_in), (src_out, img_out)):
            for a, b in zip(src, img):
                port_map[a] = b
            for extra in img[len(src):]:
                frontier[extra] = cut_symbol(extra[1], extra[2])

    lost: dict[tuple[int, int], int] = {}
    kept: dict[tuple[int, int], int] = {}
    for l in source.links:
        pa, pb = owner[l.src], owner[l.dst]
        if pa == pb:
            continue
        a = port_map.get((l.src, OUT, l.out_port))
        b = port_map.get((l.dst, IN, l.in_port))
        pair = (min(pa, pb), max(pa, pb))
        if a is not None and b is not None:
            links.append((a[0], a[2], b[0], b[2]))
            kept[pair] = kept.get(pair, 0) + 1
        else:
            lost[pair] = lost.get(pair, 0) + 1
            for end in (a, b):
                if end is not None:
                    frontier[end] = cut_symbol(end[1], end[2])
    for port, sym in source.frontier.items():
        img = port_map.get(port)
        if img is not None:
            frontier[img] = fmap.get(sym, sym)
    if h.flags.abstracting:
        vanished = sorted(pair for pair in lost if pair not in kept)
        if vanished:
            raise NbhError("linkage-lost", f"no linkage survives between pieces {vanished}")
    return Net(nodes, links, frontier), port_map, origin


# -- abstraction relation ---------------------------------------------------------


@dataclass(frozen=True)
class AbstractionWitness:
    common_net: Net
    rep_a: NuoRepresentation
    rep_b: NuoRepresentation
    hom_a: BlockHomomorphism
    hom_b: BlockHomomorphism

    def swapped(self) -> AbstractionWitness:
        return AbstractionWitness(self.common_net, self.rep_b, self.rep_a, self.hom_b, self.hom_a)


def check_witness(w: AbstractionWitness, a: Net, b: Net) -> bool:
    return (
        w.hom_a.flags.alpanbh
        and w.hom_b.flags.alpanbh
        and apply_nbh(w.hom_a, w.rep_a).cert() == a.cert()
        and apply_nbh(w.hom_b, w.rep_b).cert() == b.cert()
    )


def enumerate_nets(
    letters: Iterable[RankedLetter],
    max_nodes: int,
    symbols: Sequence[str],
    cap: int = 100_000,
) -> list[Net]:
    """All nets over ``letters`` with 1..max_nodes nodes, one per isomorphism class.

    Unbound ports draw their frontier symbol from ``symbols``.  Ordered by
    (node count, certificate).
    """
    letters = sorted(set(letters))
    seen: dict[tuple, Net] = {}
    for size in range(1, max_nodes + 1):
        for combo in itertools.combinations_with_replacement(letters, size):
            nodes = {i: l for i, l in enumerate(combo, 1)}
            outs = [(i, k) for i, l in nodes.items() for k in range(1, l.n_out + 1)]
            ins = [(i, k) for i, l in nodes.items() for k in range(1, l.n_in + 1)]
            for links in _matchings(outs, ins):
                used_o = {(l[0], l[1]) for l in links}
                used_i = {(l[2], l[3]) for l in links}
                free = [(i, OUT, k) for i, k in outs if (i, k) not in used_o]
                free += [(i, IN, k) for i, k in ins if (i, k) not in used_i]
                if free and not symbols:
                    continue
                for syms in itertools.product(symbols, repeat=len(free)):
                    n = Net(nodes, links, dict(zip(free, syms)))
                    seen.setdefault(n.cert(), n)
                    if len(seen) > cap:
                        raise BudgetExceeded("enumerate_nets", cap)
    return sorted(seen.values(), key=lambda n: (len(n), n.cert()))


def _matchings(outs, ins) -> Iterator[list[tuple[int, int, int, int]]]:
    def rec(i: int, used: frozenset, acc: list):
        if i == len(outs):
            yield list(acc)
            return
        yield from rec(i + 1, used, acc)
        for j, port in enumerate(ins):
            if j not in used:
                acc.append((*outs[i], *port))
                yield from rec(i + 1, used | {j}, acc)
                acc.pop()

    yield from rec(0, frozenset(), [])


def fit_homomorphism(rep: NuoRepresentation, target: Net) -> BlockHomomorphism | None:
    """An AlpANBH taking ``rep`` onto ``target``, if one exists.

    Each piece becomes a letter with the piece's unbound in/out counts; iso
    pieces must receive the same letter.
    """
    pieces = rep.leaves()
    classes: dict[tuple, Net] = {}
    for p in pieces:
        classes.setdefault(p.shape_cert(), p)
    keys = sorted(classes)
    options = []
    for key in keys:
        n_in, n_out = classes[key].in_out_rank()
        cands = sorted({l for l in target.nodes.values() if (l.n_in, l.n_out) == (n_in, n_out)})
        if not cands:
            return None
        options.append(cands)
    for choice in itertools.product(*options):
        hom = BlockHomomorphism.build([(classes[k], l) for k, l in zip(keys, choice)])
        try:
            image = apply_nbh(hom, rep)
        except NbhError:
            continue
        if image.cert() == target.cert():
            return hom
    return None


def _single(j: Jungle | Net) -> Net:
    if isinstance(j, Net):
        return j
    if len(j) != 1:
        raise ValueError("abstraction_related compares single-net jungles")
    return next(iter(j))


def abstraction_related(
    a: Jungle | Net,
    b: Jungle | Net,
    budget: int,
    candidate_cap: int = 20_000,
) -> AbstractionWitness | None:
    """Bounded search for a common net whose AlpANBH images are ``a`` and ``b``.

    Candidates have at most ``budget`` nodes over the letters of ``a`` and ``b``
    and are tried by node count, then certificate.  ``None`` means no witness
    within the budget.
    """
    a, b = _single(a), _single(b)
    if budget <= 0:
        return None
    letters = set(a.nodes.values()) | set(b.nodes.values())
    symbols = sorted(set(a.frontier.values()) | set(b.frontier.values()))
    for k in enumerate_nets(letters, budget, symbols, candidate_cap):
        fit_a = _first_fit(k, a)
        if fit_a is None:
            continue
        fit_b = _first_fit(k, b)
        if fit_b is None:
            continue
        return AbstractionWitness(k, fit_a[0], fit_b[0], fit_a[1], fit_b[1])
    return None


def _first_fit(k: Net, target: Net):
    for parts in iter_partitions(k):
        rep = nuo_decompose(k, parts, 0)
        hom = fit_homomorphism(rep, target)
        if hom is not None:
            return rep, hom
    return None


# -- saturation and gravity -----------------------------------------------------------

Relation = Union[Iterable[tuple[Net, Net]], Callable[[Net, Net], bool]]


@dataclass(frozen=True)
class SaturationReport:
    per_level: tuple[tuple[frozenset[tuple], ...], ...]
    gravity: int
    saturation: frozenset[tuple]
    members: Mapping[tuple, Net] = field(compare=False, repr=False, default_factory=dict)

    def level_jungles(self, k: int) -> list[Jungle]:
        return [Jungle(self.members[c] for c in cls) for cls in self.per_level[k - 1]]


def _equivalence(pairs: set[tuple[tuple, tuple]], keys: Sequence[tuple]) -> frozenset:
    parent = {k: k for k in keys}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x, y in pairs:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)
    groups: dict = {}
    for k in keys:
        groups.setdefault(find(k), []).append(k)
    return frozenset((x, y) for g in groups.values() for x in g for y in g)


def saturation_and_gravity(
    t: Net,
    depth: int,
    universe: Jungle | Iterable[Net],
    fundamental: Sequence[Relation],
    boundary: Callable[[Net, Net, int], bool] | None = None,
    max_universe: int = 64,
) -> SaturationReport:
    """Saturation families of ``t`` for levels ``1..depth`` and their gravity.

    Fundamental relations are closed to equivalences on the universe.  The
    saturation of ``t`` is its class under their joint closure.  Level ``k``
    collects, for every universe member ``s``, the nets related to ``s`` by
    some level ``k-1`` relation, cut down to the saturation of the net whose
    family is built.  Level ``k`` relations pair nets whose families contain
    mutually covering classes, one relation per level ``k-1`` relation.
    """
    universe = universe if isinstance(universe, Jungle) else Jungle(universe)
    if len(universe) > max_universe:
        raise UniverseTooLarge(f"universe of {len(universe)} nets exceeds {max_universe}")
    if t not in universe:
        raise ValueError("t must belong to the universe")
    members = {n.cert(): n for n in universe}
    keys = list(members)

    def pairs_of(rel: Relation) -> set:
        if callable(rel):
            return {(x, y) for x in keys for y in keys if rel(members[x], members[y])}
        return {(x.cert(), y.cert()) for x, y in rel if x in universe and y in universe}

    level_rels = []
    for rel in fundamental:
        eq = _equivalence(pairs_of(rel), keys)
        if eq not in level_rels:
            level_rels.append(eq)
    joint = _equivalence(set().union(*level_rels) if level_rels else set(), keys)
    sat = {x: frozenset(y for y in keys if (x, y) in joint) for x in keys}

    per_level = []
    for k in range(1, depth + 1):
        related = {
            s: frozenset(u for u in keys if any((s, u) in rel for rel in level_rels)) for s in keys
        }
        families = {
            x: frozenset(c for c in (related[s] & sat[x] for s in keys) if c) for x in keys
        }
        per_level.append(tuple(sorted(families[t.cert()], key=sorted)))
        next_rels = []
        for rel in level_rels:
            new = set()
            for s in keys:
                for u in keys:
                    if boundary is not None and not boundary(members[s], members[u], k):
                        continue
                    if any(
                        all(any((p, q) in rel for q in Q) for p in P)
                        and all(any((p, q) in rel for p in P) for q in Q)
                        for P in families[s]
                        for Q in families[u]
                    ):
                        new.add((s, u))
            fs = frozenset(new)
            if fs not in next_rels:
                next_rels.append(fs)
        level_rels = next_rels
    gravity = math.prod(len(level) for level in per_level)
    return SaturationReport(tuple(per_level), gravity, sat[t.cert()], members)
