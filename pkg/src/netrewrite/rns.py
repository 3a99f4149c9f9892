"""Rewrite rules, renetting systems and their one-step application.

One application step of a system to a jungle is the union, over every member,
rule, embedding of the left side and right-side substitution, of the net with
that single occurrence replaced.  Boundary links are rewired by frontier
symbol: the k-th left port carrying ``(direction, x)`` hands its binding to the
k-th right port carrying ``(direction, x)``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .errors import RewireError
from .net import (
    DEFAULT_MATCH_CAP,
    OUT,
    Embedding,
    Jungle,
    Net,
    Port,
    Violation,
    match_net,
    port_str,
)

Substitution = tuple[tuple[str, Net], ...]


@dataclass(frozen=True)
class Rule:
    left: Net
    right: Net
    right_substitutions: tuple[Substitution, ...] = ()
    name: str = field(default="", compare=False)

    @classmethod
    def make(
        cls,
        left: Net,
        right: Net,
        substitutions: Iterable[Mapping[str, Net]] = (),
        name: str = "",
    ) -> Rule:
        subs = tuple(tuple(sorted(g.items())) for g in substitutions)
        return cls(left, right, subs, name)

    def substitutions(self) -> list[dict[str, Net]]:
        """Right-side substitutions; the identity alone when none are given."""
        return [dict(g) for g in self.right_substitutions] or [{}]

    @property
    def instance_sensitive(self) -> bool:
        return len(self.right_substitutions) > 1 or any(g for g in self.right_substitutions)

    def key(self) -> tuple:
        """Isomorphism-invariant identity of the rule."""
        return (
            self.left.cert(),
            self.right.cert(),
            tuple(tuple((x, n.cert()) for x, n in g) for g in self.right_substitutions),
        )

    def instantiate(self, subst: Mapping[str, Net]) -> Net:
        """Right side with every substituted symbol glued to its net."""
        right = self.right
        for x, piece in sorted(subst.items()):
            right = _glue(right, x, piece)
        return right

    def __str__(self) -> str:
        from .textfmt import format_literal

        label = f"{self.name}: " if self.name else ""
        return f"{label}{format_literal(self.left)} => {format_literal(self.right)}"


def _glue(host: Net, x: str, piece: Net) -> Net:
    hports = sorted(p for p, s in host.frontier.items() if s == x)
    pports = sorted(p for p, s in piece.frontier.items() if s == x)
    if len(hports) != len(pports):
        raise ValueError(f"substitution for {x!r} has {len(pports)} holes, right side has {len(hports)}")
    base = max(host.nodes, default=0)
    remap = {n: base + i for i, n in enumerate(piece.nodes, 1)}
    nodes = dict(host.nodes) | {remap[n]: l for n, l in piece.nodes.items()}
    links = list(host.links) + [(remap[l.src], l.out_port, remap[l.dst], l.in_port) for l in piece.links]
    frontier = {p: s for p, s in host.frontier.items() if s != x}
    frontier |= {(remap[p[0]], p[1], p[2]): s for p, s in piece.frontier.items() if s != x}
    for hp, pp in zip(hports, pports):
        if hp[1] == pp[1]:
            raise ValueError(f"substitution for {x!r} joins two {hp[1]}-ports")
        pn = remap[pp[0]]
        if hp[1] == OUT:
            links.append((hp[0], hp[2], pn, pp[2]))
        else:
            links.append((pn, pp[2], hp[0], hp[2]))
    return Net(nodes, links, frontier)


@dataclass(frozen=True)
class RuleSystem:
    rules: tuple[Rule, ...]
    name: str = ""
    condition: Callable[[Net, Rule, Embedding], bool] | None = field(default=None, compare=False)
    uprns_checked: bool = False

    @classmethod
    def of(cls, *rules: Rule, name: str = "") -> RuleSystem:
        return cls(tuple(rules), name)

    @property
    def instance_sensitive(self) -> bool:
        return any(r.instance_sensitive for r in self.rules)

    def key(self) -> frozenset:
        return frozenset(r.key() for r in self.rules)


def as_system(rules: RuleSystem | Rule | Iterable[Rule]) -> RuleSystem:
    if isinstance(rules, RuleSystem):
        return rules
    if isinstance(rules, Rule):
        return RuleSystem((rules,))
    return RuleSystem(tuple(rules))


def _groups(frontier: Mapping[Port, str]) -> dict[tuple[str, str], list[Port]]:
    out: dict[tuple[str, str], list[Port]] = {}
    for p in sorted(frontier):
        out.setdefault((p[1], frontier[p]), []).append(p)
    return out


def rewrite_at(target: Net, rule: Rule, emb: Embedding, subst: Mapping[str, Net] | None = None) -> Net:
    """Replace the occurrence ``emb`` of ``rule.left`` in ``target``."""
    right = rule.instantiate(subst or {})
    image = emb.image
    base = max(target.nodes, default=0)
    rmap = {n: base + i for i, n in enumerate(right.nodes, 1)}
    nodes = {n: l for n, l in target.nodes.items() if n not in image}
    nodes.update({rmap[n]: l for n, l in right.nodes.items()})
    links = [l for l in target.links if l.src not in image and l.dst not in image]
    links += [(rmap[l.src], l.out_port, rmap[l.dst], l.in_port) for l in right.links]
    frontier = {p: s for p, s in target.frontier.items() if p[0] not in image}

    bindings = dict(emb.bindings)
    lgroups = _groups(rule.left.frontier)
    rgroups = _groups(right.frontier)
    failures = []
    for key, rports in rgroups.items():
        lports = lgroups.get(key, [])
        for i, rp in enumerate(rports):
            newp = (rmap[rp[0]], rp[1], rp[2])
            if i >= len(lports):
                frontier[newp] = key[1]
                continue
            b = bindings[lports[i]]
            if b[0] == "frontier":
                frontier[newp] = b[1]
            elif rp[1] == OUT:
                links.append((newp[0], newp[2], b[1], b[2]))
            else:
                links.append((b[1], b[2], newp[0], newp[2]))
    for key, lports in lgroups.items():
        for lp in lports[len(rgroups.get(key, [])):]:
            b = bindings[lp]
            if b[0] == "link":
                failures.append(
                    f"left port {port_str(lp)} ({key[0]}:{key[1]}) bound to node {b[1]} has no right counterpart"
                )
    if failures:
        raise RewireError(failures)
    return Net(nodes, links, frontier)


def apply_rns(
    system: RuleSystem | Rule | Iterable[Rule],
    jungle: Jungle | Iterable[Net],
    cap: int = DEFAULT_MATCH_CAP,
    on_failure: str = "raise",
) -> Jungle:
    """One rewrite step: all single-occurrence replacements, deduplicated.

    ``on_failure="skip"`` drops occurrences whose boundary cannot be rewired
    instead of raising :class:`RewireError`.
    """
    system = as_system(system)
    out: list[Net] = []
    failures: list[str] = []
    for s in jungle:
        for rule in system.rules:
            for emb in match_net(rule.left, s, cap):
                if system.condition is not None and not system.condition(s, rule, emb):
                    continue
                for g in rule.substitutions():
                    try:
                        out.append(rewrite_at(s, rule, emb, g))
                    except RewireError as exc:
                        failures.extend(exc.failures)
    if failures and on_failure == "raise":
        raise RewireError(failures)
    return Jungle(out)


def validate_rule(rule: Rule) -> list[Violation]:
    out = []
    if rule.left.is_empty:
        out.append(Violation("empty-left", rule.name or "rule", "left side has no nodes"))
    allowed = set(rule.left.frontier.values()) | {x for g in rule.right_substitutions for x, _ in g}
    for p, s in rule.right.frontier.items():
        if s not in allowed:
            out.append(Violation("unbound-symbol", port_str(p), f"right symbol {s!r} not on left or substituted"))
    return out


def validate_uprns(system: RuleSystem | Iterable[Rule], ground: Net) -> list[Violation]:
    """Universally-partitioning conditions of ``system`` relative to ``ground``.

    Kinds: ``(i)-environment``, ``(i)-outward-rank``, ``(ii)-label-overlap``,
    ``(iii)-apex-singleton``, ``(iii)-apex-fresh``, ``(iii)-injection``.
    """
    system = as_system(system)
    ground_labels = ground.labels()
    out: list[Violation] = []
    seen: dict[tuple, str] = {}
    for idx, rule in enumerate(system.rules):
        where = rule.name or f"rule#{idx}"
        for g in rule.substitutions():
            right = rule.instantiate(g)
            lports = Counter((p[1], s) for p, s in rule.left.frontier.items())
            rports = Counter((p[1], s) for p, s in right.frontier.items())
            missing = lports - rports
            if missing:
                out.append(
                    Violation("(i)-environment", where, f"boundary ports not preserved: {sorted(missing)}")
                )
            lout = sum(c for (d, _), c in lports.items() if d == OUT)
            rout = sum(c for (d, _), c in rports.items() if d == OUT)
            if lout != rout:
                out.append(Violation("(i)-outward-rank", where, f"outward rank {lout} -> {rout}"))
            overlap = right.labels() & ground_labels
            non_apex = {right.nodes[n].name for n in right.nodes if n not in right.apex()}
            if overlap & non_apex or (overlap and len(right.apex()) == 0):
                out.append(
                    Violation("(ii)-label-overlap", where, f"rewritten labels meet ground: {sorted(overlap & non_apex)}")
                )
            apex_labels = {right.nodes[n].name for n in right.apex()}
            if len(apex_labels) != 1:
                out.append(
                    Violation("(iii)-apex-singleton", where, f"apex letters {sorted(apex_labels)}")
                )
            elif apex_labels & ground_labels:
                out.append(Violation("(iii)-apex-fresh", where, f"apex letter {apex_labels.pop()} occurs in ground"))
        key = (rule.left.cert(), rule.right.cert())
        if key in seen:
            out.append(Violation("(iii)-injection", where, f"same (left, right) as {seen[key]}"))
        else:
            seen[key] = where
    return out


def mark_uprns(system: RuleSystem, ground: Net) -> RuleSystem:
    """Copy of ``system`` flagged as checked; raises ``ValueError`` on violations."""
    problems = validate_uprns(system, ground)
    if problems:
        raise ValueError("; ".join(map(str, problems)))
    return RuleSystem(system.rules, system.name, system.condition, True)
