"""Command-line front end.

Every command reads one or more documents (nets, rules, systems, homomorphisms),
runs one analysis and writes a plain-text report.  Exit status: 0 on success,
1 when the analysis disagrees with ``--expect`` (or a check fails), 2 on input
errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .confluence import (
    HarmonizeFailure,
    check_confluence,
    check_unavoidability,
    connector_set,
    harmonize,
    min_connector_bound,
)
from .errors import BudgetExceeded, NetRewriteError, ParseError, SynthesisError
from .net import Jungle, Net, validate_net
from .oracle import derivation_space, joinable
from .parallel import ThetaConfig, entangling_classes, synthesize_parallel, verify_commutation
from .rns import RuleSystem, apply_rns, validate_rule
from .textfmt import Document, format_literal, parse_document

COMMANDS = ("validate", "apply", "parallel", "entangle", "confluence", "harmonize", "oracle")


class InputError(Exception):
    """Bad command-line input; reported with exit status 2."""


@dataclass
class Report:
    command: str
    args: argparse.Namespace
    inputs: list[tuple[str, str]] = field(default_factory=list)
    sections: list[tuple[str, list[str]]] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def section(self, title: str, lines: Sequence[str], **data) -> None:
        self.sections.append((title, list(lines)))
        if data:
            self.data[title] = data

    def header(self) -> list[str]:
        a = self.args
        return [
            "# netrewrite report",
            f"version: {__version__}",
            f"command: {self.command}",
            f"seed: {a.seed}",
            f"budgets: nodes={a.budget_nodes} depth={a.budget_depth} candidates={a.budget_candidates}",
            *(f"input: {path} sha256={digest}" for path, digest in self.inputs),
        ]

    def text(self) -> str:
        out = self.header()
        for title, lines in self.sections:
            out += ["", f"[{title}]", *lines]
        return "\n".join(out) + "\n"

    def as_json(self) -> str:
        a = self.args
        payload = {
            "version": __version__,
            "command": self.command,
            "seed": a.seed,
            "budgets": {"nodes": a.budget_nodes, "depth": a.budget_depth, "candidates": a.budget_candidates},
            "inputs": [{"path": p, "sha256": d} for p, d in self.inputs],
            "sections": {t: {"lines": l, **self.data.get(t, {})} for t, l in self.sections},
        }
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _load(report: Report, path: str) -> Document:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None
    report.inputs.append((path, hashlib.sha256(raw).hexdigest()))
    return parse_document(raw.decode("utf-8"), path)


def _merge(docs: Sequence[Document]) -> Document:
    out = Document()
    for d in docs:
        out.nets.update(d.nets)
        out.rules.update(d.rules)
        out.systems.update(d.systems)
        out.homs.update(d.homs)
        out.lines.update(d.lines)
    return out


def _single_net(doc: Document, path: str, name: str | None = None) -> Net:
    if name is not None:
        if name not in doc.nets:
            raise InputError(f"{path}: no net named {name!r}")
        return doc.nets[name]
    if len(doc.nets) != 1:
        raise InputError(f"{path}: expected one net, found {len(doc.nets)}")
    return next(iter(doc.nets.values()))


def _rules_of(doc: Document, path: str, system: str | None = None) -> RuleSystem:
    if system is not None:
        if system not in doc.systems:
            raise InputError(f"{path}: no system named {system!r}")
        return doc.systems[system]
    if len(doc.systems) == 1:
        return next(iter(doc.systems.values()))
    if not doc.rules:
        raise InputError(f"{path}: no rules")
    return RuleSystem(tuple(doc.rules[k] for k in doc.rules), Path(path).stem)


def _dimensions(doc: Document) -> dict[str, Jungle]:
    """Dimensions from net names of the form ``dimension/member``."""
    dims: dict[str, list[Net]] = {}
    for name, n in doc.nets.items():
        head, sep, _ = name.partition("/")
        if sep:
            dims.setdefault(head, []).append(n)
    return {k: Jungle(v) for k, v in sorted(dims.items())}


def _split_dims(dims: dict[str, Jungle], a: str | None, b: str | None) -> tuple[dict, dict]:
    names = sorted(dims)
    if a is None and b is None:
        if len(names) != 2:
            raise InputError(f"need --dims-a/--dims-b with {len(names)} dimensions")
        a, b = names
    pick = lambda names_arg: {k: dims[k] for k in (names_arg or "").split(",") if k}
    for names_arg in (a, b):
        for k in (names_arg or "").split(","):
            if k and k not in dims:
                raise InputError(f"unknown dimension {k!r}; have {names}")
    return pick(a), pick(b)


def _net_line(n: Net) -> str:
    return format_literal(n.renumbered())


def _jungle_lines(j: Jungle, indent: str = "  ") -> list[str]:
    return [indent + _net_line(n) for n in j] or [indent + "(empty)"]


# -- commands ---------------------------------------------------------------------


def cmd_validate(args, report: Report) -> int:
    problems: list[str] = []
    for path in args.inputs:
        doc = _load(report, path)
        for name, n in doc.nets.items():
            line = doc.lines.get(("net", name))
            for v in validate_net(n):
                problems.append(f"{path}:{line}: net {name}: {v}")
        for name, rule in doc.rules.items():
            line = doc.lines.get(("rule", name))
            for side, n in (("left", rule.left), ("right", rule.right)):
                for v in validate_net(n):
                    problems.append(f"{path}:{line}: rule {name} {side}: {v}")
            for v in validate_rule(rule):
                problems.append(f"{path}:{line}: rule {name}: {v}")
    report.section("diagnostics", problems or ["none"], count=len(problems), problems=problems)
    if problems:
        for p in problems:
            print(p, file=sys.stderr)
        return 2
    return 0


def cmd_apply(args, report: Report) -> int:
    ground = _single_net(_load(report, args.ground), args.ground)
    doc = _load(report, args.rules)
    system = _rules_of(doc, args.rules, args.system)
    jungle = Jungle([ground])
    lines = []
    for k in range(1, args.steps + 1):
        jungle = apply_rns(system, jungle, on_failure="skip")
        lines.append(f"step {k}: {len(jungle)} nets")
        lines += _jungle_lines(jungle)
    report.section("apply", lines, results=[_net_line(n) for n in jungle])
    return 0


def _hom(doc: Document, name: str):
    if name not in doc.homs:
        raise InputError(f"no homomorphism named {name!r}")
    return doc.homs[name]


def cmd_parallel(args, report: Report) -> int:
    doc = _merge([_load(report, p) for p in args.inputs])
    k = _single_net(doc, "inputs", args.k)
    if args.rule not in doc.rules:
        raise InputError(f"no rule named {args.rule!r}")
    r = doc.rules[args.rule]
    h1, h2 = _hom(doc, args.hom1), _hom(doc, args.hom2)
    try:
        ps = synthesize_parallel(r, h1, h2, k)
    except SynthesisError as exc:
        report.section("parallel-report", [f"synthesis failed: {exc}"], passed=False)
        return 1
    check = verify_commutation(ps, r, h1, h2, k)
    lines = []
    for title, rule in (("micro", ps.micro), ("ferp", ps.ferp), ("serp", ps.serp)):
        lines.append(f"{title}: {format_literal(rule.left)} => {format_literal(rule.right)}")
    lines.append("refinement cells: " + " ".join(str(sorted(c)) for c in ps.cells))
    lines.append(f"first square: {'pass' if check.first[0].cert() == check.first[1].cert() else 'fail'}")
    lines.append(f"second square: {'pass' if check.second[0].cert() == check.second[1].cert() else 'fail'}")
    lines.append(f"verdict: {'pass' if check.passed else 'fail'}")
    if not check.passed:
        lines += [f"witness: {_net_line(check.witness[0])} vs {_net_line(check.witness[1])}"]
    report.section("parallel-report", lines, passed=check.passed)
    return 0 if check.passed else 1


def cmd_entangle(args, report: Report) -> int:
    doc = _merge([_load(report, p) for p in args.inputs])
    triples = []
    for item in args.config:
        parts = item.split(":")
        if len(parts) != 3:
            raise InputError(f"--config expects NET:HOM1:HOM2, got {item!r}")
        triples.append((_single_net(doc, "inputs", parts[0]), _hom(doc, parts[1]), _hom(doc, parts[2])))
    names = args.systems or sorted(doc.systems)
    for n in names:
        if n not in doc.systems:
            raise InputError(f"no system named {n!r}")
    sample = [doc.systems[n] for n in names]
    rep = entangling_classes(sample, ThetaConfig(tuple(triples), ",".join(args.config)), args.budget_candidates)
    lines = [f"universe: {rep.universe}"]
    lines += [f"class: {' '.join(names[i] for i in c)}" for c in rep.classes]
    for b in rep.entangling:
        lines.append(f"entangling: {' '.join(names[i] for i in b)} mediatory={len(rep.mediatory[b])}")
    lines.append("center: " + (" ".join(names[i] for i in sorted(rep.center)) or "(empty)"))
    for c, rules in rep.hermeneutic.items():
        lines.append(f"hermeneutic {' '.join(names[i] for i in c)}: {len(rules)} rules")
    report.section("parallel-report", lines, classes=[[names[i] for i in c] for c in rep.classes])
    return 0


def _confluence_inputs(args, report: Report):
    ground = _single_net(_load(report, args.ground), args.ground)
    ra = _rules_of(_load(report, args.ra), args.ra)
    rb = _rules_of(_load(report, args.rb), args.rb)
    dims_a, dims_b = _split_dims(_dimensions(_load(report, args.dims)), args.dims_a, args.dims_b)
    if args.connectors:
        pool = list(_rules_of(_load(report, args.connectors), args.connectors).rules)
    else:
        pool = list({r.key(): r for r in ra.rules + rb.rules}.values())
    return ground, ra, rb, dims_a, dims_b, pool


def cmd_confluence(args, report: Report) -> int:
    ground, ra, rb, dims_a, dims_b, pool = _confluence_inputs(args, report)
    conn = connector_set(ra, rb, pool, dims_a, dims_b, ground, depth=args.budget_depth, strict=args.strict_parens)
    verdict = check_confluence(
        ground, ra, rb, conn, dims_a, dims_b, depth=args.budget_depth, strict=args.strict_parens
    )
    table = [f"dimensions: a={','.join(dims_a)} b={','.join(dims_b)}", f"connectors: {len(conn)}"]
    for p in verdict.pairs:
        d = p.demands
        table.append(
            f"pair ({p.r_ad.name}, {p.r_bd.name}): b-incl={_yn(d.b_inclusion)} b-outward={_yn(d.b_no_outward)} "
            f"b-linked={_yn(d.b_linked)} a1={_yn(d.a_clause1)} a2i={_yn(d.a_clause2i)} "
            f"a2ii={_yn(d.a_clause2ii)} relation={p.relation} kind={p.kind}"
        )
        table += [f"  note: {n}" for n in d.details]
    report.section("demands", table)
    lines = [f"kind: {verdict.kind}", f"direction: {verdict.direction or '-'}"]
    if verdict.reason:
        lines.append(f"reason: {verdict.reason}")
    report.section("verdict", lines, kind=verdict.kind, direction=verdict.direction)
    witnesses = []
    for p in verdict.pairs:
        witnesses.append(f"({p.r_ad.name}, {p.r_bd.name}) first side:")
        witnesses += _jungle_lines(p.left, "  ")
        witnesses.append(f"({p.r_ad.name}, {p.r_bd.name}) second side:")
        witnesses += _jungle_lines(p.right, "  ")
    report.section("witnesses", witnesses)
    un = check_unavoidability(ground, ra, rb, dims_a, dims_b)
    report.section("unavoidability", [f"case_i: {_yn(un.case_i)}", f"case_ii: {_yn(un.case_ii)}"])
    if args.expect and args.expect != verdict.kind:
        return 1
    return 0


def _yn(b: bool) -> str:
    return "yes" if b else "no"


def cmd_harmonize(args, report: Report) -> int:
    ground = _single_net(_load(report, args.ground), args.ground)
    rules = list(_rules_of(_load(report, args.rules), args.rules).rules)
    pool = list(_rules_of(_load(report, args.pool), args.pool).rules) if args.pool else rules
    res = harmonize(
        ground, rules, pool, budget=args.max_connectors, level=tuple(args.level or ()),
        depth=args.budget_depth, candidate_cap=args.budget_candidates,
    )
    bound = min_connector_bound(max(len(rules), 1))
    if isinstance(res, HarmonizeFailure):
        report.section("harmonizer", [f"none: {res.reason}", f"bound: {bound}"], found=False)
        return 1 if args.expect else 0
    lines = [f"schedule: {' '.join(r.name or '?' for r in res.schedule) or '(empty)'}"]
    lines += [f"connector: ({x.name}, {y.name})" for x, y in res.connectors_used]
    lines += [f"result: {_net_line(res.result)}", f"size: {res.size}", f"bound: {bound}"]
    report.section("harmonizer", lines, found=True, size=res.size, bound=bound)
    return 0


def cmd_oracle(args, report: Report) -> int:
    ground, ra, rb, dims_a, dims_b, pool = _confluence_inputs(args, report)
    conn = connector_set(ra, rb, pool, dims_a, dims_b, ground, depth=args.budget_depth, strict=args.strict_parens)
    lines = []
    relations = set()
    for ad, bd in conn:
        j = joinable(ground, ra, rb, [bd], args.budget_depth, [ad])
        relations.add(j.enclosure_relation)
        meet = _net_line(j.meet) if j.meet is not None else "-"
        lines.append(
            f"pair ({ad.name}, {bd.name}): joinable_at={j.joinable_at if j.joinable_at is not None else '-'} "
            f"relation={j.enclosure_relation} truncated={_yn(j.truncated)} meet={meet}"
        )
    report.section("oracle", lines or ["no connector pairs"])
    if args.space:
        space = derivation_space(ground, list(ra.rules) + list(rb.rules), args.budget_depth)
        Path(args.space).write_text(space.dump(), encoding="utf-8")
    if args.expect:
        implied = {"comprehensive": {"="}, "partial": {"⊆", "⊇"}, "none": {"incomparable"}}[args.expect]
        return 0 if relations and relations <= implied else 1
    return 0


HANDLERS = {
    "validate": cmd_validate,
    "apply": cmd_apply,
    "parallel": cmd_parallel,
    "entangle": cmd_entangle,
    "confluence": cmd_confluence,
    "harmonize": cmd_harmonize,
    "oracle": cmd_oracle,
}


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("budgets must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget-nodes", type=_positive, default=6)
    common.add_argument("--budget-depth", type=_positive, default=8)
    common.add_argument("--budget-candidates", type=_positive, default=10_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--report", help="write the report here instead of standard output")
    common.add_argument("--json", action="store_true", help="also emit a JSON mirror")
    common.add_argument("--expect", choices=("comprehensive", "partial", "none"))
    common.add_argument("--strict-parens", action="store_true", help="enclose before rewriting in the demands")

    parser = argparse.ArgumentParser(prog="netrewrite", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"netrewrite {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check documents")
    p.add_argument("inputs", nargs="+")

    p = sub.add_parser("apply", parents=[common], help="rewrite a net")
    p.add_argument("--ground", required=True)
    p.add_argument("--rules", required=True)
    p.add_argument("--system")
    p.add_argument("--steps", type=_positive, default=1)

    p = sub.add_parser("parallel", parents=[common], help="synthesize and verify a fixed parallel")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--k")
    p.add_argument("--rule", required=True)
    p.add_argument("--hom1", required=True)
    p.add_argument("--hom2", required=True)

    p = sub.add_parser("entangle", parents=[common], help="entangling classes of a sample")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--systems", nargs="*")
    p.add_argument("--config", action="append", default=[], metavar="NET:HOM1:HOM2")

    for name in ("confluence", "oracle"):
        p = sub.add_parser(name, parents=[common], help=f"{name} check for a rule pair")
        p.add_argument("--ground", required=True)
        p.add_argument("--ra", required=True)
        p.add_argument("--rb", required=True)
        p.add_argument("--dims", required=True)
        p.add_argument("--dims-a")
        p.add_argument("--dims-b")
        p.add_argument("--connectors")
        if name == "oracle":
            p.add_argument("--space", help="dump the derivation space here")

    p = sub.add_parser("harmonize", parents=[common], help="search a harmonizer")
    p.add_argument("--ground", required=True)
    p.add_argument("--rules", required=True)
    p.add_argument("--pool")
    p.add_argument("--max-connectors", type=int, default=3)
    p.add_argument("--level", nargs="*")
    return parser


def run_command(argv: Sequence[str] | None = None) -> tuple[int, Report | None]:
    parser = build_parser()
    args = parser.parse_args(argv)
    report = Report(args.command, args)
    try:
        status = HANDLERS[args.command](args, report)
    except ParseError as exc:
        print(str(exc), file=sys.stderr)
        return 2, None
    except (InputError, BudgetExceeded, NetRewriteError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, None
    text = report.text()
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
        if args.json:
            Path(args.report + ".json").write_text(report.as_json(), encoding="utf-8")
    else:
        sys.stdout.write(report.as_json() if args.json else text)
    return status, report


def main(argv: Sequence[str] | None = None) -> int:
    return run_command(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
