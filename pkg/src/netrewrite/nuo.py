"""Block-cover representations of nets and their n-th grade nesting.

A representation splits a net into a context piece and indexed blocks, each an
induced sub-net that keeps the node ids of the source.  Pieces may overlap;
shared context nodes are listed in ``overlap``.  Links that no single piece
contains are kept in ``linkage`` so the net can be glued back together.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence, Union

from .errors import BudgetExceeded, NuoError
from .net import DEFAULT_ENCLOSE_CAP, Jungle, Link, Net, connected_node_sets

Piece = Union[Net, "NuoRepresentation"]


@dataclass(frozen=True)
class NuoRepresentation:
    context: Piece
    blocks: tuple[Piece, ...] = ()
    kinds: tuple[str, ...] = ()
    overlap: frozenset[tuple[int, int]] = frozenset()
    linkage: tuple[Link, ...] = ()
    condition: Callable[[Net], bool] | None = field(default=None, compare=False)

    @property
    def context_net(self) -> Net:
        return _flat(self.context)

    @property
    def block_nets(self) -> tuple[Net, ...]:
        return tuple(_flat(b) for b in self.blocks)

    @property
    def inward_blocks(self) -> dict[int, Net]:
        return {i: b for i, (k, b) in enumerate(zip(self.kinds, self.block_nets)) if k == "in"}

    @property
    def outward_blocks(self) -> dict[int, Net]:
        return {i: b for i, (k, b) in enumerate(zip(self.kinds, self.block_nets)) if k == "out"}

    @property
    def grade(self) -> int:
        inner = [p.grade for p in (self.context, *self.blocks) if isinstance(p, NuoRepresentation)]
        return 1 + max(inner, default=0)

    def pieces(self) -> tuple[Net, ...]:
        """Context and blocks at this grade, flattened to nets."""
        return (self.context_net, *self.block_nets)

    def leaves(self) -> list[Net]:
        """Innermost pieces of the nesting."""
        out: list[Net] = []
        for p in (self.context, *self.blocks):
            out.extend(p.leaves() if isinstance(p, NuoRepresentation) else [p])
        return out


def _flat(p: Piece) -> Net:
    return nuo_inverse(p) if isinstance(p, NuoRepresentation) else p


def block(rep: NuoRepresentation) -> Jungle:
    """The block of a representation: its leaf pieces up to isomorphism."""
    return Jungle(rep.leaves())


def _as_node_set(n: Net, element: Net | Iterable[int]) -> frozenset[int]:
    if not isinstance(element, Net):
        ids = frozenset(element)
        if not ids <= n.nodes.keys():
            raise NuoError("not-induced", f"cover element {sorted(ids)} names unknown nodes")
        return ids
    ids = frozenset(element.nodes)
    if not ids <= n.nodes.keys():
        raise NuoError("not-induced", f"cover element {sorted(ids)} names unknown nodes")
    expected = n.induced(ids)
    if dict(expected.nodes) != dict(element.nodes) or expected.links != element.links:
        raise NuoError("not-induced", f"cover element {sorted(ids)} is not an induced sub-net")
    return ids


def _kind(context: frozenset[int], blk: frozenset[int], linkage: Sequence[Link]) -> str:
    outward = sum(1 for l in linkage if l.src in context - blk and l.dst in blk - context)
    inward = sum(1 for l in linkage if l.src in blk - context and l.dst in context - blk)
    return "out" if outward and not inward else "in"


def nuo_decompose(
    n: Net,
    cover: Sequence[Net | Iterable[int]],
    context_choice: int = 0,
    condition: Callable[[Net], bool] | None = None,
) -> NuoRepresentation:
    """Representation of ``n`` whose pieces are the cover elements.

    Elements are sub-nets of ``n`` (or node-id sets); ``context_choice``
    indexes the element used as context.
    """
    sets: list[frozenset[int]] = []
    for element in cover:
        s = _as_node_set(n, element)
        if s and s not in sets:
            sets.append(s)
    if not sets and not n.is_empty:
        raise NuoError("not-a-cover", "empty cover")
    covered = frozenset().union(*sets) if sets else frozenset()
    if covered != frozenset(n.nodes):
        raise NuoError("not-a-cover", f"nodes {sorted(set(n.nodes) - covered)} are not covered")
    if not 0 <= context_choice < max(len(sets), 1):
        raise NuoError("bad-index", f"context index {context_choice} outside 0..{len(sets) - 1}")
    if not sets:
        return NuoRepresentation(n, condition=condition)
    ctx = sets[context_choice]
    rest = [s for i, s in enumerate(sets) if i != context_choice]
    linkage = tuple(l for l in n.links if not any(l.src in s and l.dst in s for s in sets))
    overlap = frozenset((i, node) for i, s in enumerate(rest) for node in s & ctx)
    return NuoRepresentation(
        context=n.induced(ctx),
        blocks=tuple(n.induced(s) for s in rest),
        kinds=tuple(_kind(ctx, s, linkage) for s in rest),
        overlap=overlap,
        linkage=linkage,
        condition=condition,
    )


def nuo_inverse(rep: NuoRepresentation) -> Net:
    """Glue the pieces back together along shared node ids and the linkage."""
    pieces = [_flat(p) for p in (rep.context, *rep.blocks)]
    nodes: dict = {}
    for p in pieces:
        for i, l in p.nodes.items():
            if nodes.setdefault(i, l) != l:
                raise NuoError("inconsistent-overlap", f"node {i} is {nodes[i]} and {l}")
    links = {tuple(l) for p in pieces for l in p.links} | {tuple(l) for l in rep.linkage}
    for l in links:
        if l[0] not in nodes or l[2] not in nodes:
            raise NuoError("inconsistent-overlap", f"link {l} leaves the glued node set")
    bound = {(l[0], "o", l[1]) for l in links} | {(l[2], "i", l[3]) for l in links}
    frontier: dict = {}
    for p in pieces:
        for port, sym in p.frontier.items():
            if port in bound:
                continue
            if frontier.setdefault(port, sym) != sym:
                raise NuoError("inconsistent-overlap", f"port {port} carries {frontier[port]} and {sym}")
    return Net(nodes, links, frontier)


def iter_covers(n: Net, cap: int = DEFAULT_ENCLOSE_CAP) -> Iterator[tuple[frozenset[int], ...]]:
    """Every cover of ``n`` by connected node sets, each exactly once.

    Exclude-first search over sets in (size, ids) order, so covers using few
    large sets come early.
    """
    sets = connected_node_sets(n, cap)
    everything = frozenset(n.nodes)
    if not everything:
        return
    # suffix unions prune branches that can no longer cover
    suffix = [frozenset()] * (len(sets) + 1)
    for i in range(len(sets) - 1, -1, -1):
        suffix[i] = suffix[i + 1] | sets[i]

    stack: list[tuple[int, frozenset[int], tuple[frozenset[int], ...]]] = [(0, frozenset(), ())]
    while stack:
        i, covered, chosen = stack.pop()
        if covered | suffix[i] != everything:
            continue
        if i == len(sets):
            yield chosen
            continue
        # pushed second, popped first: exclusion branch
        stack.append((i + 1, covered | sets[i], chosen + (sets[i],)))
        stack.append((i + 1, covered, chosen))


def iter_partitions(n: Net, cap: int = DEFAULT_ENCLOSE_CAP) -> Iterator[tuple[frozenset[int], ...]]:
    """Covers of ``n`` by pairwise disjoint connected node sets."""
    sets = connected_node_sets(n, cap)
    by_min: dict[int, list[frozenset[int]]] = {}
    for s in sets:
        by_min.setdefault(min(s), []).append(s)
    order = sorted(n.nodes)
    if not order:
        return
    stack: list[tuple[frozenset[int], tuple[frozenset[int], ...]]] = [(frozenset(), ())]
    while stack:
        covered, chosen = stack.pop()
        rest = [x for x in order if x not in covered]
        if not rest:
            yield chosen
            continue
        # the smallest uncovered node must be the minimum of the next part
        options = [s for s in by_min.get(rest[0], []) if not s & covered]
        for s in reversed(options):
            stack.append((covered | s, chosen + (s,)))


def _grade_one(n: Net, budget: int) -> list[NuoRepresentation]:
    if n.is_empty:
        return [NuoRepresentation(n)]
    out = []
    for cover in iter_covers(n):
        for c in range(len(cover)):
            out.append(nuo_decompose(n, cover, c))
            if len(out) > budget:
                raise BudgetExceeded("nuo_grade", budget)
    return out


def nuo_grade(n: Net, grade: int, budget: int = 10_000) -> list[NuoRepresentation]:
    """All grade-``grade`` representations of ``n`` built from connected covers."""
    if grade < 1:
        raise ValueError("grade must be at least 1")
    reps = _grade_one(n, budget)
    for _ in range(2, grade + 1):
        nested = []
        for rep in reps:
            nested.extend(_deepen(rep, budget))
            if len(nested) > budget:
                raise BudgetExceeded("nuo_grade", budget)
        reps = nested
    return reps


def _deepen(rep: NuoRepresentation, budget: int) -> list[NuoRepresentation]:
    """One more grade: each innermost piece is decomposed again."""

    def expand(p: Piece) -> list[Piece]:
        if isinstance(p, NuoRepresentation):
            return _deepen(p, budget)
        return _grade_one(p, budget)

    choices = [expand(p) for p in (rep.context, *rep.blocks)]
    out = []
    for combo in itertools.product(*choices):
        out.append(
            NuoRepresentation(combo[0], tuple(combo[1:]), rep.kinds, rep.overlap, rep.linkage, rep.condition)
        )
        if len(out) > budget:
            raise BudgetExceeded("nuo_grade", budget)
    return out


def block_family(reps: Iterable[NuoRepresentation]) -> list[Jungle]:
    """``block(t)``: one block-collection per representation, duplicates removed."""
    seen: dict[frozenset, Jungle] = {}
    for rep in reps:
        b = block(rep)
        seen.setdefault(b.keys(), b)
    return list(seen.values())
