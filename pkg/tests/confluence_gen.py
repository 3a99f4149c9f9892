"""Generated confluence instances: grounds, relabel pools and node-wise dimensions."""

from __future__ import annotations

import itertools
import random

from netrewrite.net import Jungle, Net, RankedLetter
from netrewrite.rns import Rule

from netgen import random_net



def arities(max_arity: int = 1) -> list[tuple[int, int]]:
    return [(i, o) for i in range(max_arity + 1) for o in range(max_arity + 1)]


def node_net(name: str, n_in: int, n_out: int) -> Net:
    front = {(1, "i", k): f"i{k}" for k in range(1, n_in + 1)}
    front |= {(1, "o", k): f"o{k}" for k in range(1, n_out + 1)}
    return Net({1: RankedLetter(name, n_in, n_out)}, (), front)


def node_dimension(letters: str, max_arity: int = 1) -> Jungle:
    """Every single-node net over ``letters`` with at most ``max_arity`` ports per side."""
    return Jungle(node_net(c, i, o) for c in letters for i, o in arities(max_arity))


def relabel(src: str, dst: str, n_in: int, n_out: int) -> Rule:
    return Rule.make(node_net(src, n_in, n_out), node_net(dst, n_in, n_out), name=f"{src}{n_in}{n_out}>{dst}")


def relabel_all(src: str, dst: str) -> list[Rule]:
    return [relabel(src, dst, i, o) for i, o in arities()]


def ground_nets(
    seed: int, count: int, max_nodes: int = 6, letters: str = "abc", require: str = ""
) -> list[Net]:
    """Distinct random nets; each must use every letter in ``require``."""
    rng = random.Random(seed)
    out: dict[tuple, Net] = {}
    while len(out) < count:
        n = random_net(rng, max_nodes, letters, 1)
        if set(require) <= {l.name for l in n.nodes.values()}:
            out.setdefault(n.cert(), n)
    return list(out.values())


def relabel_pool(ground: Net, pairs: list[tuple[str, str]]) -> list[Rule]:
    """Relabels restricted to the arities that occur in ``ground``."""
    present = {(l.name, l.n_in, l.n_out) for l in ground.nodes.values()}
    rules = []
    for src, dst in pairs:
        for name, i, o in sorted(present):
            if name == src:
                rules.append(relabel(src, dst, i, o))
    return rules


def systems_upto(pool: list[Rule], size: int = 2) -> list[tuple[Rule, ...]]:
    out = []
    for k in range(1, size + 1):
        out.extend(itertools.combinations(pool, k))
    return out


def shape_pool(ground: Net, pairs: list[tuple[str, str]]) -> list[Rule]:
    """Relabels at every arity shape of ``ground``, whether or not the source letter occurs."""
    shapes = sorted({(l.n_in, l.n_out) for l in ground.nodes.values()})
    return [relabel(src, dst, i, o) for src, dst in pairs for i, o in shapes]
