"""Finite nets, jungles, enclosures and pattern embeddings.

A net is a finite directed multigraph whose nodes carry ranked letters.  Every
node has ordered in-ports ``i1..iN`` and out-ports ``o1..oM``.  A link joins one
out-port to one in-port; every port that is not linked carries a frontier
symbol.  Cycles and disconnected nets are allowed.

Equality of nets inside a :class:`Jungle` is isomorphism, decided by the
canonical certificate from :meth:`Net.cert`.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, NamedTuple

from . import kernels
from .errors import BudgetExceeded

DEFAULT_ENCLOSE_CAP = 200_000
DEFAULT_MATCH_CAP = 100_000

IN, OUT = "i", "o"


@dataclass(frozen=True, order=True)
class RankedLetter:
    name: str
    n_in: int = 0
    n_out: int = 0

    @property
    def rank(self) -> int:
        return self.n_in + self.n_out

    # arity letters are positional; see README
    @property
    def in_arity(self) -> tuple[str, ...]:
        return tuple(f"i{k}" for k in range(1, self.n_in + 1))

    @property
    def out_arity(self) -> tuple[str, ...]:
        return tuple(f"o{k}" for k in range(1, self.n_out + 1))

    def __str__(self) -> str:
        return f"{self.name}({self.n_in}/{self.n_out})"


class Link(NamedTuple):
    src: int
    out_port: int
    dst: int
    in_port: int

    def __str__(self) -> str:
        return f"{self.src}.o{self.out_port}->{self.dst}.i{self.in_port}"


# (node id, "i" | "o", 1-based port index)
Port = tuple[int, str, int]


def port_str(port: Port) -> str:
    return f"{port[0]}.{port[1]}{port[2]}"


def cut_symbol(direction: str, k: int) -> str:
    """Frontier symbol given to a port whose link was cut off."""
    return f"{direction}{k}"


class Net:
    """Immutable net.  Construction does not validate; see :func:`validate_net`."""

    __slots__ = ("_nodes", "_links", "_frontier", "_cache")

    def __init__(
        self,
        nodes: Mapping[int, RankedLetter] | Iterable[tuple[int, RankedLetter]] = (),
        links: Iterable[tuple[int, int, int, int]] = (),
        frontier: Mapping[Port, str] | Iterable[tuple[Port, str]] = (),
    ):
        items = nodes.items() if isinstance(nodes, Mapping) else nodes
        self._nodes = MappingProxyType(dict(sorted(items)))
        self._links = tuple(sorted(Link(*l) for l in links))
        fitems = frontier.items() if isinstance(frontier, Mapping) else frontier
        self._frontier = MappingProxyType(dict(sorted(fitems)))
        self._cache: dict = {}

    # -- plain accessors -------------------------------------------------
    @property
    def nodes(self) -> Mapping[int, RankedLetter]:
        return self._nodes

    @property
    def links(self) -> tuple[Link, ...]:
        return self._links

    @property
    def frontier(self) -> Mapping[Port, str]:
        return self._frontier

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def is_empty(self) -> bool:
        return not self._nodes

    def labels(self) -> frozenset[str]:
        return frozenset(l.name for l in self._nodes.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Net):
            return NotImplemented
        return (
            self._nodes == other._nodes
            and self._links == other._links
            and self._frontier == other._frontier
        )

    def __hash__(self) -> int:
        return hash((tuple(self._nodes.items()), self._links, tuple(self._frontier.items())))

    def __repr__(self) -> str:
        from .textfmt import format_literal

        return f"Net({format_literal(self)})"

    # -- port structure ----------------------------------------------------
    def _port_maps(self):
        if "ports" not in self._cache:
            outs: dict[tuple[int, int], tuple[int, int]] = {}
            ins: dict[tuple[int, int], tuple[int, int]] = {}
            for l in self._links:
                outs.setdefault((l.src, l.out_port), (l.dst, l.in_port))
                ins.setdefault((l.dst, l.in_port), (l.src, l.out_port))
            self._cache["ports"] = (outs, ins)
        return self._cache["ports"]

    def linked(self, port: Port) -> Port | None:
        """The port at the other end of the link on ``port``, if any."""
        outs, ins = self._port_maps()
        node, d, k = port
        if d == OUT:
            hit = outs.get((node, k))
            return (hit[0], IN, hit[1]) if hit else None
        hit = ins.get((node, k))
        return (hit[0], OUT, hit[1]) if hit else None

    def ports(self, node: int) -> list[Port]:
        letter = self._nodes[node]
        return [(node, IN, k) for k in range(1, letter.n_in + 1)] + [
            (node, OUT, k) for k in range(1, letter.n_out + 1)
        ]

    def unbound_ports(self, order: Iterable[int] | None = None) -> list[Port]:
        order = self.canonical_order() if order is None else order
        return [p for n in order for p in self.ports(n) if self.linked(p) is None]

    def in_out_rank(self) -> tuple[int, int]:
        """Number of unbound in-ports and out-ports."""
        ports = self.unbound_ports(self._nodes)
        n_in = sum(1 for p in ports if p[1] == IN)
        return n_in, len(ports) - n_in

    def neighbours(self, node: int) -> set[int]:
        out = set()
        for p in self.ports(node):
            other = self.linked(p)
            if other is not None and other[0] != node:
                out.add(other[0])
        return out

    def components(self) -> list[frozenset[int]]:
        seen: set[int] = set()
        comps = []
        for start in self._nodes:
            if start in seen:
                continue
            stack, comp = [start], {start}
            while stack:
                for m in self.neighbours(stack.pop()):
                    if m not in comp:
                        comp.add(m)
                        stack.append(m)
            seen |= comp
            comps.append(frozenset(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def apex(self) -> frozenset[int]:
        """Root-most nodes: those with no linked in-port."""
        return frozenset(
            n
            for n, l in self._nodes.items()
            if all(self.linked((n, IN, k)) is None for k in range(1, l.n_in + 1))
        )

    # -- derived nets --------------------------------------------------------
    def induced(self, ids: Iterable[int]) -> Net:
        """Sub-net on ``ids``; links leaving the set become positional frontier."""
        keep = set(ids)
        nodes = {n: self._nodes[n] for n in keep}
        links = [l for l in self._links if l.src in keep and l.dst in keep]
        frontier = {}
        for n in keep:
            for p in self.ports(n):
                other = self.linked(p)
                if other is None:
                    if p in self._frontier:
                        frontier[p] = self._frontier[p]
                elif other[0] not in keep:
                    frontier[p] = cut_symbol(p[1], p[2])
        return Net(nodes, links, frontier)

    def relabel(self, mapping: Mapping[int, int]) -> Net:
        return Net(
            {mapping[n]: l for n, l in self._nodes.items()},
            [(mapping[l.src], l.out_port, mapping[l.dst], l.in_port) for l in self._links],
            {(mapping[p[0]], p[1], p[2]): s for p, s in self._frontier.items()},
        )

    def renumbered(self, start: int = 1) -> Net:
        """Copy with ids ``start, start+1, ...`` in canonical order."""
        return self.relabel({n: i for i, n in enumerate(self.canonical_order(), start)})

    # -- canonical form --------------------------------------------------------
    def _encode(self, with_symbols: bool):
        ids = list(self._nodes)
        idx = {n: i for i, n in enumerate(ids)}
        names = sorted({l.name for l in self._nodes.values()})
        name_code = {s: i for i, s in enumerate(names)}
        symbols = sorted(set(self._frontier.values())) if with_symbols else []
        sym_code = {s: i for i, s in enumerate(symbols)}
        labels, out_off, out_nbr, out_aux = [], [0], [], []
        in_off, in_nbr, in_aux = [0], [], []
        for n in ids:
            letter = self._nodes[n]
            labels.append(name_code[letter.name])
            for d, count, nbr, aux, off in (
                (OUT, letter.n_out, out_nbr, out_aux, out_off),
                (IN, letter.n_in, in_nbr, in_aux, in_off),
            ):
                for k in range(1, count + 1):
                    other = self.linked((n, d, k))
                    if other is not None and other[0] in idx:
                        nbr.append(idx[other[0]])
                        aux.append(other[2])
                    else:
                        nbr.append(-1)
                        sym = self._frontier.get((n, d, k))
                        aux.append(sym_code.get(sym, -1) if with_symbols else 0)
                off.append(len(nbr))
        comps = kernels.canonical_components(
            labels, out_off, out_nbr, out_aux, in_off, in_nbr, in_aux
        )
        cert = (tuple(names), tuple(symbols), tuple(tuple(c) for c, _ in comps))
        order = tuple(ids[i] for _, o in comps for i in o)
        return cert, order

    def cert(self) -> tuple:
        """Isomorphism certificate (frontier symbols included)."""
        if "cert" not in self._cache:
            self._cache["cert"], self._cache["order"] = self._encode(True)
        return self._cache["cert"]

    def shape_cert(self) -> tuple:
        """Certificate that ignores frontier symbols (unbound ports still count)."""
        if "shape" not in self._cache:
            self._cache["shape"], self._cache["shape_order"] = self._encode(False)
        return self._cache["shape"]

    def shape_order(self) -> tuple[int, ...]:
        """Canonical node order of :meth:`shape_cert`."""
        if "shape_order" not in self._cache:
            self.shape_cert()
        return self._cache["shape_order"]

    def canonical_order(self) -> tuple[int, ...]:
        if "order" not in self._cache:
            self.cert()
        return self._cache["order"]


def isomorphic(a: Net, b: Net) -> bool:
    return a.cert() == b.cert()


def letter(name: str, n_in: int = 0, n_out: int = 0) -> RankedLetter:
    return RankedLetter(name, n_in, n_out)


EMPTY_NET = Net()


class Jungle:
    """Finite set of nets, quotiented by isomorphism, iterated in certificate order."""

    __slots__ = ("_members",)

    def __init__(self, nets: Iterable[Net] = ()):
        members: dict[tuple, Net] = {}
        for n in nets:
            members.setdefault(n.cert(), n)
        self._members = dict(sorted(members.items()))

    def __iter__(self) -> Iterator[Net]:
        return iter(self._members.values())

    def __len__(self) -> int:
        return len(self._members)

    def __bool__(self) -> bool:
        return bool(self._members)

    def __contains__(self, net: object) -> bool:
        return isinstance(net, Net) and net.cert() in self._members

    def keys(self) -> frozenset[tuple]:
        return frozenset(self._members)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Jungle):
            return NotImplemented
        return self._members.keys() == other._members.keys()

    def __hash__(self) -> int:
        return hash(frozenset(self._members))

    def __le__(self, other: Jungle) -> bool:
        return self._members.keys() <= other._members.keys()

    def __ge__(self, other: Jungle) -> bool:
        return self._members.keys() >= other._members.keys()

    def __lt__(self, other: Jungle) -> bool:
        return self <= other and self != other

    def __gt__(self, other: Jungle) -> bool:
        return self >= other and self != other

    def __or__(self, other: Jungle) -> Jungle:
        return Jungle([*self, *other])

    def __and__(self, other: Jungle) -> Jungle:
        return Jungle(n for n in self if n in other)

    def __sub__(self, other: Jungle) -> Jungle:
        return Jungle(n for n in self if n not in other)

    def filter(self, pred) -> Jungle:
        return Jungle(n for n in self if pred(n))

    def __repr__(self) -> str:
        from .textfmt import format_literal

        return "Jungle{" + ", ".join(format_literal(n) for n in self) + "}"


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.message}"


def validate_net(n: Net) -> list[Violation]:
    """Every broken net invariant, in a stable order; empty means valid."""
    out: list[Violation] = []
    seen_links: set[Link] = set()
    used_out: dict[tuple[int, int], Link] = {}
    used_in: dict[tuple[int, int], Link] = {}
    for l in n.links:
        where = str(l)
        if l in seen_links:
            out.append(Violation("duplicate-link", where, "link listed more than once"))
            continue
        seen_links.add(l)
        ok = True
        for node, d, k in ((l.src, OUT, l.out_port), (l.dst, IN, l.in_port)):
            if node not in n.nodes:
                out.append(Violation("unknown-node", where, f"node {node} does not exist"))
                ok = False
                continue
            letter = n.nodes[node]
            limit = letter.n_out if d == OUT else letter.n_in
            if not 1 <= k <= limit:
                out.append(
                    Violation("port-out-of-range", where, f"{node}.{d}{k} exceeds {letter}")
                )
                ok = False
        if not ok:
            continue
        if (l.src, l.out_port) in used_out:
            out.append(Violation("port-reused", f"{l.src}.o{l.out_port}", "out-port linked twice"))
        if (l.dst, l.in_port) in used_in:
            out.append(Violation("port-reused", f"{l.dst}.i{l.in_port}", "in-port linked twice"))
        used_out[(l.src, l.out_port)] = l
        used_in[(l.dst, l.in_port)] = l
    for p, sym in n.frontier.items():
        node, d, k = p
        where = port_str(p)
        if node not in n.nodes:
            out.append(Violation("unknown-node", where, f"frontier on missing node {node}"))
            continue
        letter = n.nodes[node]
        limit = letter.n_out if d == OUT else letter.n_in
        if d not in (IN, OUT) or not 1 <= k <= limit:
            out.append(Violation("port-out-of-range", where, f"frontier port outside {letter}"))
        elif ((node, k) in used_out) if d == OUT else ((node, k) in used_in):
            out.append(Violation("frontier-on-linked-port", where, "port is both linked and frontier"))
        if not sym:
            out.append(Violation("empty-symbol", where, "frontier symbol is empty"))
    for node, letter in n.nodes.items():
        for d, count, used in ((IN, letter.n_in, used_in), (OUT, letter.n_out, used_out)):
            for k in range(1, count + 1):
                if (node, k) not in used and (node, d, k) not in n.frontier:
                    out.append(
                        Violation("dangling-port", f"{node}.{d}{k}", "unbound port has no frontier symbol")
                    )
    return out


# -- enclosure ----------------------------------------------------------------


def connected_node_sets(n: Net, cap: int = DEFAULT_ENCLOSE_CAP) -> list[frozenset[int]]:
    """Node sets of all connected induced sub-nets, ordered by (size, ids)."""
    ids = list(n.nodes)
    idx = {x: i for i, x in enumerate(ids)}
    adjacency = [0] * len(ids)
    for x in ids:
        for m in n.neighbours(x):
            adjacency[idx[x]] |= 1 << idx[m]
    masks = kernels.connected_subsets(adjacency, cap)
    if masks is None:
        raise BudgetExceeded("enclose", cap)
    sets = [frozenset(ids[i] for i in range(len(ids)) if mask >> i & 1) for mask in masks]
    sets.sort(key=lambda s: (len(s), sorted(s)))
    return sets


def enclose(n: Net, cap: int = DEFAULT_ENCLOSE_CAP) -> Jungle:
    """All connected induced sub-nets of ``n`` (``n`` itself included when connected)."""
    return Jungle(n.induced(s) for s in connected_node_sets(n, cap))


def enclose_all(nets: Iterable[Net], cap: int = DEFAULT_ENCLOSE_CAP) -> Jungle:
    out: dict[tuple, Net] = {}
    for n in nets:
        for s in connected_node_sets(n, cap):
            sub = n.induced(s)
            out.setdefault(sub.cert(), sub)
    return Jungle(out.values())


# -- matching -------------------------------------------------------------------

# ("frontier", symbol) or ("link", node, port-index)
Binding = tuple


@dataclass(frozen=True)
class Embedding:
    node_map: tuple[tuple[int, int], ...]
    bindings: tuple[tuple[Port, Binding], ...]

    @property
    def mapping(self) -> dict[int, int]:
        return dict(self.node_map)

    @property
    def image(self) -> frozenset[int]:
        return frozenset(t for _, t in self.node_map)

    def binding(self, port: Port) -> Binding:
        return dict(self.bindings)[port]


def _opposite(d: str) -> str:
    return IN if d == OUT else OUT


def match_net(pattern: Net, target: Net, cap: int = DEFAULT_MATCH_CAP) -> list[Embedding]:
    """Every induced, label- and port-preserving embedding of ``pattern`` in ``target``.

    A pattern frontier port may sit on a target frontier port or on a link to a
    node outside the image; its :class:`Embedding` binding records which.
    """
    order = pattern.canonical_order()
    plan: list[tuple[int, tuple[Port, Port] | None]] = []
    placed: set[int] = set()
    for p in order:
        anchor = None
        for port in pattern.ports(p):
            other = pattern.linked(port)
            if other is not None and other[0] in placed:
                anchor = (port, other)
                break
        plan.append((p, anchor))
        placed.add(p)

    by_letter: dict[RankedLetter, list[int]] = {}
    for t, l in target.nodes.items():
        by_letter.setdefault(l, []).append(t)

    mapping: dict[int, int] = {}
    inverse: dict[int, int] = {}
    results: list[Embedding] = []

    def consistent(p: int, t: int) -> bool:
        for port in pattern.ports(p):
            tport = (t, port[1], port[2])
            pother = pattern.linked(port)
            tother = target.linked(tport)
            if pother is not None and (pother[0] in mapping or pother[0] == p):
                img = t if pother[0] == p else mapping[pother[0]]
                if tother != (img, pother[1], pother[2]):
                    return False
            if tother is not None and (tother[0] in inverse or tother[0] == t):
                pre = p if tother[0] == t else inverse[tother[0]]
                if pother != (pre, tother[1], tother[2]):
                    return False
        return True

    def emit() -> None:
        bindings = []
        for port in pattern.frontier:
            tport = (mapping[port[0]], port[1], port[2])
            other = target.linked(tport)
            if other is None:
                bindings.append((port, ("frontier", target.frontier.get(tport, ""))))
            else:
                bindings.append((port, ("link", other[0], other[2])))
        results.append(Embedding(tuple(sorted(mapping.items())), tuple(sorted(bindings))))
        if len(results) > cap:
            raise BudgetExceeded("match_net", cap)

    def rec(i: int) -> None:
        if i == len(plan):
            emit()
            return
        p, anchor = plan[i]
        want = pattern.nodes[p]
        if anchor is None:
            candidates = by_letter.get(want, [])
        else:
            port, other = anchor
            hit = target.linked((mapping[other[0]], other[1], other[2]))
            if hit is None or hit[1:] != port[1:]:
                return
            candidates = [hit[0]] if target.nodes.get(hit[0]) == want else []
        for t in candidates:
            if t in inverse or not consistent(p, t):
                continue
            mapping[p] = t
            inverse[t] = p
            rec(i + 1)
            del mapping[p]
            del inverse[t]

    rec(0)
    return results


def compose_embeddings(first: Embedding, second: Embedding) -> dict[int, int]:
    """Node map of ``second ∘ first``."""
    m2 = second.mapping
    return {p: m2[q] for p, q in first.node_map}
