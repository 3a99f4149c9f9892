"""Readers and writers for the text formats.

Two notations are supported:

* the compact literal ``[1:a(0/1), 2:b(1/0); 1.o1->2.i1; 1.o1=x]`` used in
  tests and reports;
* the line-based block format of ``.net`` / ``.rns`` / ``.nbh`` files::

      net chain2 {
        node 1 : a in=0 out=1
        node 2 : b in=1 out=0
        link 1.o1 -> 2.i1
      }

  ``rule`` blocks hold ``left { ... }``, ``right { ... }`` and
  ``subst x -> { ... }`` (``subst[k]`` selects the k-th substitution);
  ``system`` blocks hold ``rules r1 r2 ...`` and optionally
  ``uprns ground=<net>``; ``nbh`` blocks hold ``block``/``image`` pairs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError
from .net import IN, OUT, Net, RankedLetter

_PORT = re.compile(r"^(-?\d+)\.([io])(\d+)$")
_NODE_LIT = re.compile(r"^(-?\d+)\s*:\s*([^\s(]+)\((\d+)/(\d+)\)$")
_LINK_LIT = re.compile(r"^(-?\d+)\.o(\d+)\s*->\s*(-?\d+)\.i(\d+)$")
_FRONT_LIT = re.compile(r"^(-?\d+)\.([io])(\d+)\s*=\s*(\S+)$")


# -- literal notation ---------------------------------------------------------


def parse_literal(text: str) -> Net:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ParseError("net literal must be enclosed in [ ]", source="<literal>")
    parts = [p.strip() for p in body[1:-1].split(";")]
    if len(parts) > 3:
        raise ParseError("too many ';' sections", source="<literal>")
    parts += [""] * (3 - len(parts))
    nodes, links, frontier = {}, [], {}
    for item in filter(None, (x.strip() for x in parts[0].split(","))):
        m = _NODE_LIT.match(item)
        if not m:
            raise ParseError(f"bad node {item!r}", source="<literal>")
        nodes[int(m[1])] = RankedLetter(m[2], int(m[3]), int(m[4]))
    for item in filter(None, (x.strip() for x in parts[1].split(","))):
        m = _LINK_LIT.match(item)
        if not m:
            raise ParseError(f"bad link {item!r}", source="<literal>")
        links.append((int(m[1]), int(m[2]), int(m[3]), int(m[4])))
    for item in filter(None, (x.strip() for x in parts[2].split(","))):
        m = _FRONT_LIT.match(item)
        if not m:
            raise ParseError(f"bad frontier binding {item!r}", source="<literal>")
        frontier[(int(m[1]), m[2], int(m[3]))] = m[4]
    return Net(nodes, links, frontier)


def format_literal(n: Net) -> str:
    nodes = ", ".join(f"{i}:{l}" for i, l in n.nodes.items())
    links = ", ".join(str(l) for l in n.links)
    front = ", ".join(f"{p[0]}.{p[1]}{p[2]}={s}" for p, s in n.frontier.items())
    sections = [nodes, links, front]
    while len(sections) > 1 and not sections[-1]:
        sections.pop()
    return "[" + "; ".join(sections) + "]"


# -- block format ---------------------------------------------------------------


def net_lines(n: Net, indent: str = "  ", canonical: bool = True) -> list[str]:
    if canonical:
        n = n.renumbered()
    out = [f"{indent}node {i} : {l.name} in={l.n_in} out={l.n_out}" for i, l in n.nodes.items()]
    out += [f"{indent}link {l.src}.o{l.out_port} -> {l.dst}.i{l.in_port}" for l in n.links]
    out += [f"{indent}frontier {p[0]}.{p[1]}{p[2]} = {s}" for p, s in n.frontier.items()]
    return out


def serialize_net(n: Net, name: str = "net", canonical: bool = True) -> str:
    return "\n".join([f"net {name} {{", *net_lines(n, canonical=canonical), "}"]) + "\n"


def serialize_rule(rule, name: str | None = None) -> str:
    name = name or rule.name or "rule"
    lines = [f"rule {name} {{", "  left {"]
    lines += net_lines(rule.left, "    ", canonical=False)
    lines += ["  }", "  right {"]
    lines += net_lines(rule.right, "    ", canonical=False)
    lines.append("  }")
    for k, g in enumerate(rule.right_substitutions):
        for x, piece in g:
            lines.append(f"  subst[{k}] {x} -> {{")
            lines += net_lines(piece, "    ", canonical=False)
            lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass
class Document:
    nets: dict[str, Net] = field(default_factory=dict)
    rules: dict = field(default_factory=dict)
    systems: dict = field(default_factory=dict)
    homs: dict = field(default_factory=dict)
    # (kind, name) -> line of the opening brace
    lines: dict = field(default_factory=dict)


class _Lines:
    def __init__(self, text: str, source: str):
        self.items = []
        for no, raw in enumerate(text.split("\n"), 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                self.items.append((no, line))
        self.i = 0
        self.source = source

    def next(self):
        if self.i >= len(self.items):
            last = self.items[-1][0] if self.items else None
            raise ParseError("unexpected end of input (missing '}')", last, self.source)
        item = self.items[self.i]
        self.i += 1
        return item

    def done(self) -> bool:
        return self.i >= len(self.items)

    def error(self, msg: str, line: int) -> ParseError:
        return ParseError(msg, line, self.source)


def _int(tok: str, lines: _Lines, no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise lines.error(f"expected integer, got {tok!r}", no) from None


def _parse_port(tok: str, lines: _Lines, no: int):
    m = _PORT.match(tok)
    if not m:
        raise lines.error(f"bad port {tok!r}", no)
    return int(m[1]), m[2], int(m[3])


def _parse_net_body(lines: _Lines) -> Net:
    nodes, links, frontier = {}, [], {}
    while True:
        no, line = lines.next()
        if line == "}":
            return Net(nodes, links, frontier)
        toks = line.split()
        head = toks[0]
        if head == "node":
            m = re.match(r"^node\s+(-?\d+)\s*:\s*(\S+)\s+in=(\d+)\s+out=(\d+)$", line)
            if not m:
                raise lines.error(f"malformed node directive: {line!r}", no)
            nid = int(m[1])
            if nid in nodes:
                raise lines.error(f"node {nid} declared twice", no)
            nodes[nid] = RankedLetter(m[2], int(m[3]), int(m[4]))
        elif head == "link":
            m = re.match(r"^link\s+(\S+)\s*->\s*(\S+)$", line)
            if not m:
                raise lines.error(f"malformed link directive: {line!r}", no)
            a, b = _parse_port(m[1], lines, no), _parse_port(m[2], lines, no)
            if a[1] != OUT or b[1] != IN:
                raise lines.error("links run from an out-port to an in-port", no)
            links.append((a[0], a[2], b[0], b[2]))
        elif head == "frontier":
            m = re.match(r"^frontier\s+(\S+)\s*=\s*(\S+)$", line)
            if not m:
                raise lines.error(f"malformed frontier directive: {line!r}", no)
            p = _parse_port(m[1], lines, no)
            if p in frontier:
                raise lines.error(f"frontier {m[1]} bound twice", no)
            frontier[p] = m[2]
        else:
            raise lines.error(f"unknown directive {head!r}", no)


def _expect_open(line: str, lines: _Lines, no: int, pattern: str):
    m = re.match(pattern, line)
    if not m:
        raise lines.error(f"unknown directive {line.split()[0]!r}", no)
    return m


def _parse_rule(name: str, lines: _Lines):
    from .rns import Rule

    left = right = None
    subs: dict[int, dict[str, Net]] = {}
    while True:
        no, line = lines.next()
        if line == "}":
            break
        if re.match(r"^left\s*\{$", line):
            left = _parse_net_body(lines)
        elif re.match(r"^right\s*\{$", line):
            right = _parse_net_body(lines)
        elif line.startswith("subst"):
            m = _expect_open(line, lines, no, r"^subst(?:\[(\d+)\])?\s+(\S+)\s*->\s*\{$")
            subs.setdefault(int(m[1] or 0), {})[m[2]] = _parse_net_body(lines)
        else:
            raise lines.error(f"unknown directive {line.split()[0]!r} in rule", no)
    if left is None or right is None:
        raise lines.error(f"rule {name} needs both left and right", no)
    return Rule.make(left, right, [subs[k] for k in sorted(subs)], name=name)


def _parse_system(name: str, lines: _Lines, doc: Document):
    from .rns import RuleSystem, mark_uprns

    rule_names: list[str] = []
    ground = None
    while True:
        no, line = lines.next()
        if line == "}":
            break
        toks = line.split()
        if toks[0] == "rules":
            for r in toks[1:]:
                if r not in doc.rules:
                    raise lines.error(f"unknown rule {r!r}", no)
                rule_names.append(r)
        elif toks[0] == "uprns":
            m = re.match(r"^uprns\s+ground=(\S+)$", line)
            if not m or m[1] not in doc.nets:
                raise lines.error("uprns needs ground=<declared net>", no)
            ground = (m[1], no)
        else:
            raise lines.error(f"unknown directive {toks[0]!r} in system", no)
    system = RuleSystem(tuple(doc.rules[r] for r in rule_names), name)
    if ground is not None:
        try:
            system = mark_uprns(system, doc.nets[ground[0]])
        except ValueError as exc:
            raise lines.error(f"uprns assertion fails: {exc}", ground[1]) from None
    return system


def _parse_hom(name: str, lines: _Lines):
    from .nbh import BlockHomomorphism

    blocks: dict[str, Net] = {}
    images: dict[str, object] = {}
    frontier_map: dict[str, str] = {}
    declared: set[str] | None = None
    identity_default = False
    while True:
        no, line = lines.next()
        if line == "}":
            break
        toks = line.split()
        if toks[0] == "block":
            m = _expect_open(line, lines, no, r"^block\s+(\S+)\s*\{$")
            blocks[m[1]] = _parse_net_body(lines)
        elif toks[0] == "image":
            m = re.match(r"^image\s+(\S+)\s+letter\s+(\S+)\s+in=(\d+)\s+out=(\d+)$", line)
            if m:
                images[m[1]] = RankedLetter(m[2], int(m[3]), int(m[4]))
            else:
                m = _expect_open(line, lines, no, r"^image\s+(\S+)\s+net\s*\{$")
                images[m[1]] = _parse_net_body(lines)
        elif toks[0] == "frontier_map":
            m = re.match(r"^frontier_map\s+(\S+)\s*->\s*(\S+)$", line)
            if not m:
                raise lines.error("malformed frontier_map", no)
            frontier_map[m[1]] = m[2]
        elif toks[0] == "flags":
            declared = set(toks[1:])
        elif toks[0] == "identity_default":
            identity_default = True
        else:
            raise lines.error(f"unknown directive {toks[0]!r} in nbh", no)
    missing = sorted(set(blocks) ^ set(images))
    if missing:
        raise lines.error(f"blocks and images do not pair up: {missing}", no)
    hom = BlockHomomorphism.build(
        [(blocks[k], images[k]) for k in blocks], frontier_map, identity_default=identity_default
    )
    if declared is not None:
        actual = {k for k, v in hom.flags.as_dict().items() if v}
        if declared != actual:
            raise lines.error(f"declared flags {sorted(declared)} differ from computed {sorted(actual)}", no)
    return hom


def parse_document(text: str, source: str = "<input>") -> Document:
    lines = _Lines(text, source)
    doc = Document()
    while not lines.done():
        no, line = lines.next()
        m = re.match(r"^(net|rule|system|nbh)\s+(\S+)\s*\{$", line)
        if not m:
            raise lines.error(f"unknown directive {line.split()[0]!r}", no)
        kind, name = m[1], m[2]
        table = {"net": doc.nets, "rule": doc.rules, "system": doc.systems, "nbh": doc.homs}[kind]
        if name in table:
            raise lines.error(f"{kind} {name!r} defined twice", no)
        doc.lines[(kind, name)] = no
        if kind == "net":
            table[name] = _parse_net_body(lines)
        elif kind == "rule":
            table[name] = _parse_rule(name, lines)
        elif kind == "system":
            table[name] = _parse_system(name, lines, doc)
        else:
            table[name] = _parse_hom(name, lines)
    return doc


def parse_net(text: str, source: str = "<input>") -> Net:
    """The single net of a ``.net`` text."""
    doc = parse_document(text, source)
    if len(doc.nets) != 1:
        raise ParseError(f"expected exactly one net, found {len(doc.nets)}", source=source)
    return next(iter(doc.nets.values()))


def serialize_hom(hom, name: str = "h") -> str:
    lines = [f"nbh {name} {{"]
    for k, (block, image) in enumerate(hom.entries):
        lines.append(f"  block b{k} {{")
        lines += net_lines(block, "    ")
        lines.append("  }")
        if isinstance(image, RankedLetter):
            lines.append(f"  image b{k} letter {image.name} in={image.n_in} out={image.n_out}")
        else:
            lines.append(f"  image b{k} net {{")
            lines += net_lines(image, "    ")
            lines.append("  }")
    for x, y in sorted(hom.frontier_map.items()):
        lines.append(f"  frontier_map {x} -> {y}")
    if hom.identity_default:
        lines.append("  identity_default")
    flags = [k for k, v in hom.flags.as_dict().items() if v]
    lines.append("  flags " + " ".join(flags))
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize_nuo(rep, name: str = "rep") -> str:
    """``.nuo`` block: context, named blocks and overlap pairs."""
    lines = [f"nuo {name} {{", "  context {"]
    lines += net_lines(rep.context_net, "    ", canonical=False)
    lines.append("  }")
    for k, (kind, block) in enumerate(zip(rep.kinds, rep.block_nets)):
        lines.append(f"  {'inward' if kind == 'in' else 'outward'} b{k} {{")
        lines += net_lines(block, "    ", canonical=False)
        lines.append("  }")
    for b, node in sorted(rep.overlap):
        lines.append(f"  overlap b{b} {node}")
    for l in rep.linkage:
        lines.append(f"  linkage {l.src}.o{l.out_port} -> {l.dst}.i{l.in_port}")
    lines.append("}")
    return "\n".join(lines) + "\n"
