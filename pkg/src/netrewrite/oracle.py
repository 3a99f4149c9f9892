"""Brute-force derivation spaces used to cross-check the analytic verdicts.

Only nets, enclosures and single rewrite steps are used here; nothing is
shared with the demand evaluation in :mod:`netrewrite.confluence`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .net import Jungle, Net, enclose
from .rns import Rule, RuleSystem, apply_rns, as_system


@dataclass(frozen=True)
class DerivationSpace:
    root: Net
    vertices: tuple[Net, ...]
    edges: tuple[tuple[int, str, int], ...]
    depth: int
    truncated: bool = False
    distance: tuple[int, ...] = field(default=(), repr=False)

    def index(self, n: Net) -> int | None:
        key = n.cert()
        for i, v in enumerate(self.vertices):
            if v.cert() == key:
                return i
        return None

    def normal_forms(self) -> list[Net]:
        """Vertices whose only successors are themselves."""
        moving = {s for s, _, t in self.edges if s != t}
        return [v for i, v in enumerate(self.vertices) if i not in moving]

    def dump(self) -> str:
        from .textfmt import format_literal

        lines = [f"space depth={self.depth} truncated={str(self.truncated).lower()}"]
        lines += [f"vertex {i} {format_literal(v.renumbered())}" for i, v in enumerate(self.vertices)]
        lines += [f"edge {s} -{r}-> {t}" for s, r, t in self.edges]
        return "\n".join(lines) + "\n"


def _rule_ids(rules: RuleSystem) -> list[tuple[str, Rule]]:
    return [(r.name or f"r{i}", r) for i, r in enumerate(rules.rules)]


def _explore(roots: Iterable[Net], rules, depth: int, cap: int):
    system = as_system(rules)
    named = _rule_ids(system)
    vertices: list[Net] = []
    dist: list[int] = []
    index: dict[tuple, int] = {}
    edges: set[tuple[int, str, int]] = set()
    queue: deque[int] = deque()
    for r in roots:
        if r.cert() not in index:
            index[r.cert()] = len(vertices)
            vertices.append(r)
            dist.append(0)
            queue.append(index[r.cert()])
    truncated = False
    while queue:
        i = queue.popleft()
        for name, rule in named:
            for succ in apply_rns(rule, [vertices[i]], on_failure="skip"):
                j = index.get(succ.cert())
                if dist[i] >= depth and j != i:
                    # would need one more step than allowed
                    truncated = True
                    continue
                if j is None:
                    if len(vertices) >= cap:
                        truncated = True
                        continue
                    j = len(vertices)
                    index[succ.cert()] = j
                    vertices.append(succ)
                    dist.append(dist[i] + 1)
                    queue.append(j)
                edges.add((i, name, j))
    return vertices, sorted(edges), dist, truncated


def derivation_space(v: Net, rules: RuleSystem | Rule | Sequence[Rule], depth: int, cap: int = 10_000) -> DerivationSpace:
    """Breadth-first closure of single rewrite steps from ``v`` up to ``depth``.

    ``truncated`` is set when some vertex could still move after ``depth``
    steps or the vertex cap was hit.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    vertices, edges, dist, truncated = _explore([v], rules, depth, cap)
    return DerivationSpace(v, tuple(vertices), tuple(edges), depth, truncated, tuple(dist))


@dataclass(frozen=True)
class JoinVerdict:
    joinable_at: int | None
    meet: Net | None
    enclosure_relation: str  # "=", "⊆", "⊇", "incomparable"
    truncated: bool
    left: Jungle = field(repr=False, default_factory=Jungle)
    right: Jungle = field(repr=False, default_factory=Jungle)


def _enclosure_of(nets: Iterable[Net]) -> frozenset[tuple]:
    keys: set[tuple] = set()
    for n in nets:
        keys |= {s.cert() for s in enclose(n)}
    return frozenset(keys)


def _relation(a: frozenset, b: frozenset) -> str:
    if a == b:
        return "="
    if a < b:
        return "⊆"
    if a > b:
        return "⊇"
    return "incomparable"


def _side(v: Net, first, completion, depth: int, cap: int):
    """Distances (identity steps are free) and normal forms after ``first``."""
    starts = apply_rns(as_system(first), [v], on_failure="skip")
    vertices, edges, dist, truncated = _explore(starts, completion, depth, cap)
    offset = {n.cert(): d + (0 if n.cert() == v.cert() else 1) for n, d in zip(vertices, dist)}
    moving = {s for s, _, t in edges if s != t}
    normal = [n for i, n in enumerate(vertices) if i not in moving]
    return offset, normal, truncated


def joinable(
    v: Net,
    r_a,
    r_b,
    completion_rules: RuleSystem | Rule | Sequence[Rule],
    depth: int,
    completion_b: RuleSystem | Rule | Sequence[Rule] | None = None,
    cap: int = 10_000,
) -> JoinVerdict:
    """Search both sides for a common net and compare their final enclosures.

    The side after ``r_a`` is completed with ``completion_rules`` and the side
    after ``r_b`` with ``completion_b`` (the same rules when omitted).  Each
    side takes at most ``depth`` completion steps.
    """
    completion_b = completion_rules if completion_b is None else completion_b
    da, na, ta = _side(v, r_a, completion_rules, depth, cap)
    db, nb, tb = _side(v, r_b, completion_b, depth, cap)
    common = set(da) & set(db)
    meet, at = None, None
    if common:
        key = min(common, key=lambda k: (max(da[k], db[k]), k))
        at = max(da[key], db[key])
        lookup = {n.cert(): n for n in na + nb}
        meet = lookup.get(key)
        if meet is None:
            meet = next(n for n in _all(v, r_a, completion_rules, depth, cap) if n.cert() == key)
    rel = _relation(_enclosure_of(na), _enclosure_of(nb))
    return JoinVerdict(at, meet, rel, ta or tb, Jungle(na), Jungle(nb))


def _all(v, first, completion, depth, cap):
    starts = apply_rns(as_system(first), [v], on_failure="skip")
    return _explore(starts, completion, depth, cap)[0]


def single_rule_completions(
    v: Net, r_a, r_b, candidates: Iterable[Rule], depth: int = 4, cap: int = 10_000
) -> list[Rule]:
    """Rules ``r`` under which some derivation from ``v·r_a`` reaches a net whose
    enclosure contains every net of ``v·r_b``."""
    targets = {n.cert() for n in apply_rns(as_system(r_b), [v], on_failure="skip")}
    starts = list(apply_rns(as_system(r_a), [v], on_failure="skip"))
    found = []
    for r in candidates:
        vertices, _, _, _ = _explore(starts, r, depth, cap)
        if targets and any(targets <= _enclosure_of([n]) for n in vertices):
            found.append(r)
    return found
