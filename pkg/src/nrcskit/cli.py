"""Command-line front end.

Exit codes: 0 positive answer, 1 negative answer, 2 inconclusive (cutoff or
budget), 64 usage error, 65 malformed input, 66 missing input file.
Reports go to standard output and diagnostics to standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, corpus
from .coverability import (IterationCapExceeded, backward_coverability, check_certificate,
                           forward_explore)
from .gadgets import KINDS, build
from .nmwqo import BadSequenceQuery, max_bad_sequence, parse_expr, render_elem, render_expr
from .nmwqo import delta as delta_set
from .nmwqo import derivative_D
from .nrcs import Nrcs, Tree, format_anchor, parse_anchor, parse_nrcs, render_nrcs, replay
from .ordinal import (BudgetExhausted, cichon_eval, fast_growing_eval, hardy_eval,
                      parse_control, parse_ordinal)
from .ordinal_encoding import EncodingParams, make_hardy_config
from .reductions import build_bounded_reduction, parse_minsky

SCHEMA_VERSION = 1

EXIT_POSITIVE = 0
EXIT_NEGATIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_NOINPUT = 66


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage, which would collide with
    # "inconclusive"; route it through our own exit code instead.
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# Reports


def render_report(report: dict, fmt: str = "text") -> str:
    if fmt == "json":
        body = {"schemaVersion": SCHEMA_VERSION, **report}
        return json.dumps(body, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    lines = []
    for key, val in report.items():
        if val is None:
            continue
        if isinstance(val, list):
            if key in ("basisSizes",):
                lines.append(f"{key}: {' '.join(str(v) for v in val)}")
                continue
            lines.append(f"{key}:")
            lines.extend(f"  {v}" for v in val)
        elif isinstance(val, bool):
            lines.append(f"{key}: {'yes' if val else 'no'}")
        else:
            lines.append(f"{key}: {val}")
    return "\n".join(lines) + "\n"


def format_run(run) -> list[str]:
    return [f"{idx}@{format_anchor(anchor)}" for idx, anchor in run]


def parse_run(text: str) -> list[tuple[int, tuple[int, ...]]]:
    """Parse 'i@/a/b j@/ ...' (commas or whitespace between items)."""
    out = []
    for item in text.replace(",", " ").split():
        idx, sep, anchor = item.partition("@")
        if not sep:
            raise ValueError(f"run item {item!r} is not of the form index@/anchor")
        out.append((int(idx), parse_anchor(anchor)))
    return out


def _witness_lines(nrcs: Nrcs, init: Tree, run) -> list[str]:
    trace = replay(nrcs, init, run)
    lines = [f"start {trace[0].key}"]
    for (idx, anchor), cfg in zip(run, trace[1:]):
        t = nrcs.transitions[idx]
        lines.append(f"{idx}@{format_anchor(anchor)}  {t.render()}  => {cfg.key}")
    return lines


# ---------------------------------------------------------------------------
# Input helpers


def _read_input(name: str) -> str:
    """Read a path or '-' for stdin, falling back to the bundled corpus by file name."""
    if name == "-":
        return sys.stdin.read()
    p = Path(name)
    if p.exists() and not p.is_dir():
        return p.read_text(encoding="utf-8")
    if p.name in corpus.names() and not p.parent.parts:
        return corpus.read(p.name)
    raise FileNotFoundError(name)


# ---------------------------------------------------------------------------
# Commands


def cmd_cover(args) -> tuple[int, dict]:
    f = parse_nrcs(_read_input(args.file))
    if f.init is None or f.target is None:
        raise ValueError("the machine file needs both 'init' and 'target' lines")
    n, init, target = f.nrcs, f.init, f.target
    if args.replay is not None:
        run = parse_run(args.replay)
        ok = check_certificate(n, init, target, run)
        report = {"command": "cover", "algorithm": "replay",
                  "decision": "coverable" if ok else "certificate-rejected",
                  "iterations": None, "basisSizes": None,
                  "witness": format_run(run)}
        if ok and args.witness and not args.json:
            report["trace"] = _witness_lines(n, init, run)
        return (EXIT_POSITIVE if ok else EXIT_NEGATIVE), report

    if args.algorithm == "backward":
        try:
            v = backward_coverability(n, init, target, iteration_cap=args.iteration_cap)
        except IterationCapExceeded as e:
            print(str(e), file=sys.stderr)
            return EXIT_INCONCLUSIVE, {"command": "cover", "algorithm": "backward",
                                       "decision": "inconclusive", "reason": "iteration-cap"}
        report = {"command": "cover", "algorithm": "backward", "decision": v.decision,
                  "iterations": v.iterations, "basisSizes": v.basis_sizes,
                  "finalBasisSize": len(v.basis)}
        if v.coverable:
            report["witness"] = format_run(v.run) if (args.witness or args.json) else None
            if args.witness and not args.json:
                report["trace"] = _witness_lines(n, init, v.run)
            return EXIT_POSITIVE, report
        if args.witness or args.json:
            report["basis"] = [b.key for b in v.basis]
        return EXIT_NEGATIVE, report

    r = forward_explore(n, init, target, max_nodes=args.max_nodes,
                        max_frontier=args.max_frontier)
    report = {"command": "cover", "algorithm": "forward", "explored": r.explored,
              "pruned": r.pruned}
    if r.status == "found":
        report["decision"] = "coverable"
        report["witness"] = format_run(r.run) if (args.witness or args.json) else None
        if args.witness and not args.json:
            report["trace"] = _witness_lines(n, init, r.run)
        return EXIT_POSITIVE, report
    if r.decisive:
        report["decision"] = "not-coverable"
        return EXIT_NEGATIVE, report
    report["decision"] = "inconclusive"
    report["reason"] = "frontier-cap" if r.status == "cutoff" else "node-cap"
    return EXIT_INCONCLUSIVE, report


_EVALUATORS = {"hardy": hardy_eval, "cichon": cichon_eval, "fg": fast_growing_eval}


def cmd_ordinal_eval(args) -> tuple[int, dict]:
    alpha = parse_ordinal(args.ordinal)
    h = parse_control(args.control)
    which = "hardy" if args.hardy else "cichon" if args.cichon else "fg"
    report = {"command": "ordinal-eval", "hierarchy": which, "ordinal": str(alpha),
              "control": h.name, "n": args.n}
    try:
        report["value"] = _EVALUATORS[which](h, alpha, args.n, budget=args.budget)
        report["budgetExhausted"] = False
        return EXIT_POSITIVE, report
    except BudgetExhausted as e:
        print(str(e), file=sys.stderr)
        report["value"] = None
        report["budgetExhausted"] = True
        return EXIT_INCONCLUSIVE, report


def cmd_delta(args) -> tuple[int, dict]:
    alpha = parse_ordinal(args.ordinal)
    members = sorted(delta_set(alpha, args.n))
    report = {"command": "delta", "ordinal": str(alpha), "n": args.n,
              "members": [str(m) for m in members]}
    if alpha.is_omega_power():
        report["value"] = str(derivative_D(alpha, args.n))
    return EXIT_POSITIVE, report


def cmd_badseq(args) -> tuple[int, dict]:
    expr = parse_expr(args.expr)
    g = parse_control(args.control)
    res = max_bad_sequence(BadSequenceQuery(expr, g, args.n, args.cap))
    report = {"command": "badseq", "expr": render_expr(expr), "control": g.name,
              "n": args.n, "cap": args.cap, "value": res.length,
              "witness": [render_elem(e) for e in res.witness],
              "budgetExhausted": res.cap_hit}
    return (EXIT_INCONCLUSIVE if res.cap_hit else EXIT_POSITIVE), report


def cmd_gadget(args) -> tuple[int, dict]:
    g = build(args.kind, args.k, args.ell)
    text = render_nrcs(g.nrcs, header_comments=[f"{g.kind} gadget, k={g.k}, ell={g.ell}"])
    report = {"command": "gadget", "kind": g.kind, "k": g.k, "ell": g.ell,
              "states": len(g.nrcs.states), "transitions": len(g.nrcs.transitions),
              "roles": [f"{r}: {' '.join(labs)}" for r, labs in g.roles.items()]}
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        Path(args.output + ".manifest").write_text(g.manifest(), encoding="utf-8")
        report["output"] = args.output
    elif not args.json:
        return EXIT_POSITIVE, text
    return EXIT_POSITIVE, report


def cmd_encode(args) -> tuple[int, dict]:
    alpha = parse_ordinal(args.alpha)
    p = EncodingParams(args.k, args.ell)
    tree = make_hardy_config(alpha, args.n, p)
    return EXIT_POSITIVE, {"command": "encode", "ordinal": str(alpha), "n": args.n,
                           "k": args.k, "ell": args.ell, "value": tree.key,
                           "nodes": tree.size}


def cmd_reduce(args) -> tuple[int, dict]:
    mf = parse_minsky(_read_input(args.file))
    if mf.init is None or mf.target is None:
        raise ValueError("the Minsky file needs both 'init' and 'target' lines")
    inst = build_bounded_reduction(mf.machine, args.k, args.ell, mf.init, mf.target)
    text = render_nrcs(inst.nrcs, inst.init, inst.target,
                       header_comments=[(f"bounded reduction of {Path(args.file).name}, "
                                        f"k={args.k}, ell={args.ell}")])
    Path(args.output).write_text(text, encoding="utf-8")
    Path(args.output + ".manifest").write_text(inst.manifest(), encoding="utf-8")
    return EXIT_POSITIVE, {"command": "reduce", "output": args.output,
                           "states": len(inst.nrcs.states),
                           "transitions": len(inst.nrcs.transitions),
                           "init": inst.init.key, "target": inst.target.key,
                           "bridge": list(inst.provenance["bridge"])}


# ---------------------------------------------------------------------------
# Argument parsing


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _natural(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nrcskit", description="Nested reset counter systems toolkit.")
    p.add_argument("--version", action="version", version=f"nrcskit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("cover", help="decide coverability for a machine file")
    c.add_argument("file")
    c.add_argument("--algorithm", choices=["backward", "forward"], default="backward")
    c.add_argument("--max-nodes", type=_positive, default=8)
    c.add_argument("--max-frontier", type=_positive, default=100_000)
    c.add_argument("--iteration-cap", type=_positive, default=10_000)
    c.add_argument("--witness", action="store_true", help="print the run or final basis")
    c.add_argument("--replay", metavar="RUN", help="check a given run such as '0@/0 1@/ 2@/'")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_cover)

    o = sub.add_parser("ordinal-eval", help="evaluate a Hardy, Cichon or fast-growing function")
    grp = o.add_mutually_exclusive_group(required=True)
    grp.add_argument("--hardy", action="store_true")
    grp.add_argument("--cichon", action="store_true")
    grp.add_argument("--fg", action="store_true")
    o.add_argument("ordinal")
    o.add_argument("n", type=_natural)
    o.add_argument("--budget", type=_positive, default=10**6)
    o.add_argument("--control", default="succ")
    o.add_argument("--json", action="store_true")
    o.set_defaults(func=cmd_ordinal_eval)

    d = sub.add_parser("delta", help="derivative D_n and the set delta_n of an ordinal")
    d.add_argument("n", type=_positive)
    d.add_argument("ordinal")
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_delta)

    b = sub.add_parser("badseq", help="longest controlled bad sequence")
    b.add_argument("expr")
    b.add_argument("--control", default="2x")
    b.add_argument("--n", type=_natural, required=True)
    b.add_argument("--cap", type=_positive, default=40)
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_badseq)

    g = sub.add_parser("gadget", help="emit a gadget machine")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("--k", type=_positive, required=True)
    g.add_argument("--ell", type=_positive, required=True)
    g.add_argument("-o", "--output")
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_gadget)

    e = sub.add_parser("encode", help="encode (alpha, n) as a configuration")
    e.add_argument("--alpha", required=True)
    e.add_argument("--n", type=_natural, required=True)
    e.add_argument("--k", type=_positive, required=True)
    e.add_argument("--ell", type=_positive, required=True)
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_encode)

    r = sub.add_parser("reduce", help="build a reduction instance")
    r.add_argument("source", choices=["minsky"])
    r.add_argument("file")
    r.add_argument("--k", type=_positive, required=True)
    r.add_argument("--ell", type=_positive, required=True)
    r.add_argument("-o", "--output", required=True)
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_reduce)
    return p


def run(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = make_parser().parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help and --version
        return int(e.code or 0)
    try:
        code, report = args.func(args)
    except FileNotFoundError as e:
        print(f"nrcskit: no such file: {e.args[0] if e.args else e}", file=sys.stderr)
        return EXIT_NOINPUT
    except (ValueError, KeyError) as e:
        print(f"nrcskit: {e}", file=sys.stderr)
        return EXIT_DATAERR
    if isinstance(report, str):
        out.write(report)
    else:
        out.write(render_report(report, "json" if args.json else "text"))
    return code


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
