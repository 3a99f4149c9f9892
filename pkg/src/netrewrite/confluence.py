"""Dimensional confluence: initial families, dimensional rule sets, connectors,
the demand-based confluence checker, unavoidability and harmonizer search.

Dimensions are named jungles.  A rewrite result is compared through its
enclosure, the jungle of all connected sub-nets of its members.  Completing a
side means rewriting with the connector rule until nothing changes, keeping
nets the rule does not touch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .errors import BudgetExceeded, NbhError, SynthesisError
from .net import Jungle, Net, connected_node_sets, enclose, match_net
from .nbh import BlockHomomorphism, apply_nbh
from .parallel import find_representation
from .rns import Rule, RuleSystem, apply_rns, as_system

IDENTITY = BlockHomomorphism.identity()
Dims = Union[Mapping[str, Jungle], Iterable[Jungle], Jungle]
Rules = Union[Rule, RuleSystem, Iterable[Rule]]

DEFAULT_DEPTH = 8


def _dim_list(dims: Dims) -> list[Jungle]:
    if isinstance(dims, Jungle):
        return [dims]
    if isinstance(dims, Mapping):
        return [dims[k] for k in sorted(dims)]
    return [d if isinstance(d, Jungle) else Jungle(d) for d in dims]


def _union(dims: Dims) -> Jungle:
    out = Jungle()
    for d in _dim_list(dims):
        out = out | d
    return out


_ENC_CACHE: dict[tuple, Jungle] = {}


def enc(jungle: Jungle | Iterable[Net]) -> Jungle:
    """Enclosure of a jungle: the connected sub-nets of all its members."""
    out = Jungle()
    for n in jungle:
        key = n.cert()
        hit = _ENC_CACHE.get(key)
        if hit is None:
            hit = enclose(n)
            if len(_ENC_CACHE) < 50_000:
                _ENC_CACHE[key] = hit
        out = out | hit
    return out


def step(rules: Rules, jungle: Jungle | Iterable[Net]) -> Jungle:
    """One rewrite step; occurrences that cannot be rewired are skipped."""
    return apply_rns(as_system(rules), jungle, on_failure="skip")


def complete(rules: Rules, jungle: Jungle, depth: int = DEFAULT_DEPTH) -> Jungle:
    """Rewrite every member until it is stable, keeping untouched nets."""
    system = as_system(rules)
    current = jungle
    for _ in range(depth + 1):
        nxt: list[Net] = []
        for s in current:
            succ = step(system, [s]) - Jungle([s])
            nxt.extend(succ if succ else [s])
        nxt_j = Jungle(nxt)
        if nxt_j == current:
            return current
        current = nxt_j
    raise BudgetExceeded("complete", depth)


# -- initial families ------------------------------------------------------------


def _grade_image(h: BlockHomomorphism, n: Net) -> Net | None:
    if h.identity_default and not h.entries:
        return n
    try:
        return apply_nbh(h, find_representation(h, n))
    except (SynthesisError, NbhError):
        return None


def _tiles(n: Net, patterns: Sequence[Net]) -> bool:
    """Can the nodes of ``n`` be split into occurrences of ``patterns``?"""
    if n.is_empty:
        return False
    occ: set[frozenset[int]] = set()
    for p in patterns:
        if len(p) <= len(n):
            occ.update(e.image for e in match_net(p, n))
    by_min: dict[int, list[frozenset[int]]] = {}
    for o in occ:
        by_min.setdefault(min(o), []).append(o)
    order = sorted(n.nodes)

    def rec(covered: frozenset[int]) -> bool:
        rest = [x for x in order if x not in covered]
        if not rest:
            return True
        return any(rec(covered | o) for o in by_min.get(rest[0], []) if not o & covered)

    return rec(frozenset())


_TILE_CACHE: dict[tuple, bool] = {}


def in_initial_family(n: Net, dims: Dims, grades: Sequence[BlockHomomorphism] = (IDENTITY,)) -> bool:
    patterns = list(_union(dims))
    key = (n.cert(), frozenset(p.cert() for p in patterns), tuple(grades))
    hit = _TILE_CACHE.get(key)
    if hit is None:
        hit = False
        if patterns:
            for h in grades:
                img = _grade_image(h, n)
                if img is not None and _tiles(img, patterns):
                    hit = True
                    break
        if len(_TILE_CACHE) < 200_000:
            _TILE_CACHE[key] = hit
    return hit


def initial_family(
    space: Jungle | Iterable[Net], dims: Dims, grades: Sequence[BlockHomomorphism] = (IDENTITY,)
) -> Jungle:
    """Members of ``space`` whose grade image is tiled by the dimension nets."""
    return Jungle(s for s in space if in_initial_family(s, dims, grades))


# -- dimensional rule sets ----------------------------------------------------------


def _preimage(h: BlockHomomorphism, n: Net) -> Net | None:
    if h.identity_default and not h.entries:
        return n
    inverse = []
    for blk, image in h.entries:
        if isinstance(image, Net):
            return None
        inverse.append((Net({1: image}), blk))
    try:
        back = BlockHomomorphism.build(inverse, identity_default=True)
        return apply_nbh(back, find_representation(back, n))
    except (ValueError, SynthesisError, NbhError):
        return None


def dimensional_rule_set(
    rules: Iterable[Rule], dims: Dims, grades: Sequence[BlockHomomorphism] = (IDENTITY,)
) -> list[Rule]:
    """Rules acting on the dimension nets whose results on every subfamily stay
    inside that subfamily's enclosure."""
    family = _dim_list(dims)
    subfamilies = [
        c for size in range(1, len(family) + 1) for c in itertools.combinations(family, size)
    ]
    whole = _union(family)
    kept = []
    for r in rules:
        if r.instance_sensitive:
            continue
        # the rule must act on the dimension nets for some grade
        ok = any(
            match_net(r.left, n)
            for h in grades
            for n in enc(p for p in (_preimage(h, u) for u in whole) if p is not None)
        )
        for h in grades:
            for sub in subfamilies:
                union = Jungle()
                for d in sub:
                    union = union | d
                target = enc(union)
                pre = [p for p in (_preimage(h, u) for u in union) if p is not None]
                for res in step(r, enc(pre)):
                    img = _grade_image(h, res)
                    if img is None or img not in target:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            kept.append(r)
    return kept


# -- demands and verdicts ------------------------------------------------------------


@dataclass(frozen=True)
class DemandReport:
    b_inclusion: bool
    b_no_outward: bool
    b_linked: bool
    a_clause1: bool
    a_clause2i: bool
    a_clause2ii: bool
    details: tuple[str, ...] = ()

    @property
    def b_ok(self) -> bool:
        return self.b_inclusion and self.b_no_outward and self.b_linked

    @property
    def a_ok(self) -> bool:
        return self.a_clause1 or self.a_clause2i or self.a_clause2ii

    @property
    def ok(self) -> bool:
        return self.a_ok and self.b_ok


@dataclass(frozen=True)
class PairVerdict:
    r_ad: Rule
    r_bd: Rule
    demands: DemandReport
    relation: str  # "=", "⊆", "⊇", "incomparable"
    kind: str
    left: Jungle = field(repr=False)
    right: Jungle = field(repr=False)


@dataclass(frozen=True)
class ConfluenceVerdict:
    kind: str  # "comprehensive" | "partial" | "none"
    direction: str | None
    pairs: tuple[PairVerdict, ...]
    reason: str = ""

    @property
    def witnesses(self) -> tuple[tuple[Jungle, Jungle], ...]:
        return tuple((p.left, p.right) for p in self.pairs)


def compare_jungles(a: Jungle, b: Jungle) -> str:
    if a == b:
        return "="
    if a < b:
        return "⊆"
    if a > b:
        return "⊇"
    return "incomparable"


def _cut_links(host: Net, inner: frozenset[int], outer: frozenset[int]) -> tuple[int, int]:
    """(links from ``inner`` out to ``outer``, links either way between them)."""
    outward = sum(1 for l in host.links if l.src in inner and l.dst in outer)
    inward = sum(1 for l in host.links if l.src in outer and l.dst in inner)
    return outward, outward + inward


def _link_demands(
    sources: Jungle, results: Jungle, dims_a: Dims, dims_b: Dims, grades
) -> tuple[bool, bool, list[str]]:
    """Linkage conditions, read inside each result net between disjoint occurrences."""
    no_outward, linked = True, True
    notes: list[str] = []
    for host in results:
        sets = connected_node_sets(host)
        kind = {}
        for s in sets:
            sub = host.induced(s)
            kind[s] = (in_initial_family(sub, dims_a, grades), in_initial_family(sub, dims_b, grades))
        for src in sources:
            for e in match_net(src, host):
                occ = e.image
                if occ == frozenset(host.nodes):
                    continue
                touches_a = False
                for s in sets:
                    if s & occ:
                        continue
                    out_links, any_links = _cut_links(host, occ, s)
                    if kind[s][1] and out_links:
                        no_outward = False
                        l = next(l for l in host.links if l.src in occ and l.dst in s)
                        notes.append(f"outward link {l} from {sorted(occ)} into {sorted(s)}")
                    if kind[s][0] and any_links:
                        touches_a = True
                if not touches_a:
                    linked = False
                    notes.append(f"occurrence {sorted(occ)} is not linked to a first-dimension net")
    return no_outward, linked, notes


def evaluate_demands(
    va: Jungle,
    vb: Jungle,
    x: Jungle,
    r_ad: Rule,
    dims_a: Dims,
    dims_b: Dims,
    grades: Sequence[BlockHomomorphism] = (IDENTITY,),
    strict: bool = False,
) -> DemandReport:
    """Demands for one connector pair.

    ``vb`` is the ground rewritten by the second rule, ``x`` the first result
    completed by the second connector.  Non-strict reading: intersect, then
    rewrite, then enclose.  Strict reading: enclose before rewriting.
    """
    enc_x = enc(x)
    enc_vb = enc(vb)
    vb_b = initial_family(enc_vb, dims_b, grades)
    vb_a = initial_family(enc_vb, dims_a, grades)
    x_b = initial_family(enc_x, dims_b, grades)

    def rewrite_then_enclose(j: Jungle) -> Jungle:
        return step(r_ad, enc(j)) if strict else enc(step(r_ad, j))

    b_inclusion = vb_b <= x_b
    b_no_outward, b_linked, notes = _link_demands(vb_b, x, dims_a, dims_b, grades)
    a1 = vb_a <= rewrite_then_enclose(x_b)
    a2i = enc(x_b) >= step(r_ad, vb_b)
    a2ii = x_b <= rewrite_then_enclose(vb_b)
    details = list(notes)
    if not b_inclusion:
        missing = [str(n) for n in (vb_b - x_b)][:3]
        details.insert(0, f"second-dimension nets lost: {missing}")
    return DemandReport(b_inclusion, b_no_outward, b_linked, a1, a2i, a2ii, tuple(details))


def check_pair(
    v: Net,
    r_a: Rules,
    r_b: Rules,
    r_ad: Rule,
    r_bd: Rule,
    dims_a: Dims,
    dims_b: Dims,
    grades: Sequence[BlockHomomorphism] = (IDENTITY,),
    depth: int = DEFAULT_DEPTH,
    strict: bool = False,
) -> PairVerdict:
    va = step(r_a, [v])
    vb = step(r_b, [v])
    x = complete(r_bd, va, depth)
    y = complete(r_ad, vb, depth)
    demands = evaluate_demands(va, vb, x, r_ad, dims_a, dims_b, grades, strict)
    relation = compare_jungles(enc(x), enc(y))
    if not demands.ok:
        kind = "none"
    elif relation == "=":
        kind = "comprehensive"
    elif relation in ("⊆", "⊇"):
        kind = "partial"
    else:
        kind = "none"
    return PairVerdict(r_ad, r_bd, demands, relation, kind, x, y)


def check_confluence(
    v: Net,
    r_a: Rules,
    r_b: Rules,
    conn: ConnectorSet | Iterable[tuple[Rule, Rule]],
    dims_a: Dims,
    dims_b: Dims,
    grades: Sequence[BlockHomomorphism] = (IDENTITY,),
    depth: int = DEFAULT_DEPTH,
    strict: bool = False,
) -> ConfluenceVerdict:
    """Verdict over every connector pair.

    All pairs comprehensive gives comprehensive; comprehensive and partial
    pairs sharing one direction give partial; anything else gives none.
    """
    pairs = list(conn.pairs if isinstance(conn, ConnectorSet) else conn)
    if not pairs:
        return ConfluenceVerdict("none", None, (), "empty connector set")
    results = tuple(
        check_pair(v, r_a, r_b, ad, bd, dims_a, dims_b, grades, depth, strict) for ad, bd in pairs
    )
    failed = [p for p in results if p.kind == "none"]
    if failed:
        p = failed[0]
        reason = (
            "demand failed: " + "; ".join(p.demands.details or ("demand clause not met",))
            if not p.demands.ok
            else f"results incomparable for ({p.r_ad.name}, {p.r_bd.name})"
        )
        return ConfluenceVerdict("none", None, results, reason)
    directions = {p.relation for p in results if p.kind == "partial"}
    if not directions:
        return ConfluenceVerdict("comprehensive", "=", results)
    if len(directions) == 1:
        return ConfluenceVerdict("partial", directions.pop(), results)
    return ConfluenceVerdict("none", None, results, "partial pairs disagree on direction")


# -- connectors -----------------------------------------------------------------------


@dataclass(frozen=True)
class ConnectorSet:
    pairs: tuple[tuple[Rule, Rule], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def connector_set(
    r_a: Rules,
    r_b: Rules,
    pool: Iterable[Rule],
    dims_a: Dims,
    dims_b: Dims,
    ground: Net,
    grades: Sequence[BlockHomomorphism] = (IDENTITY,),
    depth: int = DEFAULT_DEPTH,
    strict: bool = False,
) -> ConnectorSet:
    """Pairs from the two dimensional rule sets meeting every demand on ``ground``."""
    pool = list(pool)
    ra_set = sorted(dimensional_rule_set(pool, dims_a, grades), key=Rule.key)
    rb_set = sorted(dimensional_rule_set(pool, dims_b, grades), key=Rule.key)
    out = []
    for ad in ra_set:
        for bd in rb_set:
            try:
                p = check_pair(ground, r_a, r_b, ad, bd, dims_a, dims_b, grades, depth, strict)
            except BudgetExceeded:
                continue
            if p.demands.ok:
                out.append((ad, bd))
    return ConnectorSet(tuple(out))


# -- unavoidability --------------------------------------------------------------------


@dataclass(frozen=True)
class UnavoidabilityReport:
    case_i: bool
    case_ii: bool
    intersections: Mapping[str, Jungle] = field(repr=False, default_factory=dict)


def check_unavoidability(
    v: Net,
    r_a: Rules,
    r_b: Rules,
    dims_a: Dims,
    dims_b: Dims,
    grades: Sequence[BlockHomomorphism] = (IDENTITY,),
) -> UnavoidabilityReport:
    """Evaluate the two non-inclusion preconditions.

    Case (i): the second result meets both dimensions outside the enclosures
    of the first result's dimension parts.  Case (ii) swaps the rules.
    """
    va, vb = step(r_a, [v]), step(r_b, [v])
    enc_a, enc_b = enc(va), enc(vb)
    parts = {
        "va_a": initial_family(enc_a, dims_a, grades),
        "va_b": initial_family(enc_a, dims_b, grades),
        "vb_a": initial_family(enc_b, dims_a, grades),
        "vb_b": initial_family(enc_b, dims_b, grades),
    }
    case_i = not parts["vb_a"] <= enc(parts["va_a"]) and not parts["vb_b"] <= enc(parts["va_b"])
    case_ii = not parts["va_b"] <= enc(parts["vb_b"]) and not parts["va_a"] <= enc(parts["vb_a"])
    return UnavoidabilityReport(case_i, case_ii, parts)


# -- harmonizers -------------------------------------------------------------------------


def min_connector_bound(n: int) -> int:
    if n < 1:
        raise ValueError("need at least one rule")
    return (n - 1) * n // 2


@dataclass(frozen=True)
class Harmonizer:
    schedule: tuple[Rule, ...]
    result: Net
    connectors_used: ConnectorSet
    bound: int
    level: tuple = ()

    @property
    def size(self) -> int:
        return len(self.connectors_used)


@dataclass(frozen=True)
class HarmonizeFailure:
    reason: str
    bound: int


def closure_levels(v: Net, rules: Sequence[Rule], pool: Sequence[Rule], max_q: int, depth: int) -> list[list[Rule]]:
    """Candidate connector rules by level: level ``q`` rules first apply to a net
    reachable with rules of lower levels."""
    levels = [list(rules)]
    known = {r.key() for r in rules}
    reached = step(rules, [v]) | Jungle([v])
    for _ in range(max_q):
        fresh = [r for r in pool if r.key() not in known and any(match_net(r.left, n) for n in reached)]
        if not fresh:
            break
        fresh.sort(key=Rule.key)
        levels.append(fresh)
        known |= {r.key() for r in fresh}
        allowed = [r for lvl in levels for r in lvl]
        for _ in range(depth):
            more = step(allowed, reached) | reached
            if more == reached:
                break
            reached = more
    return levels


def _joins(x: Rule, y: Rule, nets: Sequence[Net], depth: int) -> bool:
    """Does ``(x, y)`` complete some pair of distinct nets to equal enclosures?"""
    for u1, u2 in itertools.permutations(nets, 2):
        try:
            a = complete(y, Jungle([u1]), depth)
            b = complete(x, Jungle([u2]), depth)
        except BudgetExceeded:
            continue
        if a != Jungle([u1]) or b != Jungle([u2]):
            if enc(a) == enc(b):
                return True
    return False


def harmonize(
    v: Net,
    rules: Sequence[Rule],
    pool: Sequence[Rule] = (),
    budget: int = 3,
    level: tuple = (),
    max_q: int = 2,
    depth: int = DEFAULT_DEPTH,
    candidate_cap: int = 200_000,
) -> Harmonizer | HarmonizeFailure:
    """Smallest set of connector pairs whose rules collapse ``v``'s results.

    Searches by closure level, then number of pairs, then canonical rule
    order.  A pair counts only if it joins two distinct intermediate nets.
    ``budget`` caps the number of pairs; ``level`` is carried as metadata.
    """
    rules = list(rules)
    bound = min_connector_bound(max(len(rules), 1))
    start = step(rules, [v])
    if len(start) <= 1:
        result = next(iter(start), v)
        return Harmonizer((), result, ConnectorSet(()), bound, level)
    if budget <= 0:
        return HarmonizeFailure("budget exhausted", bound)
    levels = closure_levels(v, rules, list(pool), max_q, depth)
    tried = 0
    seen_pairs: set = set()
    for q in range(len(levels)):
        cands = sorted({r.key(): r for lvl in levels[: q + 1] for r in lvl}.values(), key=Rule.key)
        pairs = [(x, y) for x in cands for y in cands if x.key() != y.key()]
        for size in range(1, budget + 1):
            for combo in itertools.combinations(pairs, size):
                keyset = frozenset((x.key(), y.key()) for x, y in combo)
                if keyset in seen_pairs:
                    continue
                seen_pairs.add(keyset)
                tried += 1
                if tried > candidate_cap:
                    return HarmonizeFailure("candidate budget exhausted", bound)
                schedule = sorted({r.key(): r for pr in combo for r in pr}.values(), key=Rule.key)
                try:
                    final = complete(schedule, start, depth)
                except BudgetExceeded:
                    continue
                if len(final) != 1:
                    continue
                reach = list(_reachable(schedule, start, depth))
                if all(_joins(x, y, reach, depth) for x, y in combo):
                    return Harmonizer(
                        tuple(schedule), next(iter(final)), ConnectorSet(tuple(combo)), bound, level
                    )
    return HarmonizeFailure("budget exhausted", bound)


def _reachable(rules: Sequence[Rule], start: Jungle, depth: int) -> Jungle:
    seen = start
    for _ in range(depth):
        more = seen | step(rules, seen)
        if more == seen:
            break
        seen = more
    return seen


def replay(harmonizer: Harmonizer, v: Net, rules: Sequence[Rule], depth: int = DEFAULT_DEPTH) -> Jungle:
    """Apply the schedule to ``v``'s results; a valid harmonizer yields one net."""
    start = step(rules, [v])
    if not start:
        return Jungle([v])  # nothing fires: v is its own result, as in harmonize
    if not harmonizer.schedule:
        return start
    return complete(list(harmonizer.schedule), start, depth)
