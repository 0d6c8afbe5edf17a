"""Command-line runner.

Exit codes: 0 Converges, 1 Diverges, 2 Freezes, 3 Unknown or a discipline
violation, 64 usage error, 65 parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import (
    certificate_valid, classify_cells, ev_to_writable_transform, first_looping_snapshot,
)
from .errors import (
    DisciplineViolation, NotCertifiedDivergent, OrdinalSyntaxError, ParseError, UnknownProgram,
    UndecodableOracleTape, CapExceeded,
)
from .feedback import Evaluator, SubTree, export_tree, tree_dot, verdict_name
from .fixpoint import call_closure, lfp, lfp_table
from .ordinal import decode_ordinal, format_ordinal, parse_ordinal
from .program import TAPE_ROLES, DriverProgram
from .store import ProgramStore, corpus_dir, load_corpus, load_universe
from .tape import BLANK, format_tape, parse_tape
from .variants import iitm_run, ordinal_oracle_run, parallel_call, strong_jump
from .verdict import CONVERGES, DIVERGES, FREEZES, Budgets, Verdict

EXIT = {CONVERGES: 0, DIVERGES: 1, FREEZES: 2}
EXIT_UNKNOWN, EXIT_USAGE, EXIT_PARSE = 3, 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _locate(ref: str) -> str:
    """Paths like ``corpus/x.fit`` fall back to the corpus directory."""
    path = Path(ref)
    if path.exists() or not (path.suffix or "/" in ref):
        return ref
    alt = corpus_dir() / path.name
    return str(alt) if alt.exists() else ref


def _tape(text: str):
    try:
        return parse_tape(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def budgets_from(args) -> Budgets:
    kw = {}
    for flag, name in (("max_steps", "max_steps_per_block"), ("max_limits", "max_limit_stages"),
                       ("max_depth", "max_depth"), ("max_parallel", "max_parallel"),
                       ("max_lfp_iters", "max_lfp_iters")):
        val = getattr(args, flag)
        if val is not None:
            kw[name] = val
    if args.clock_cap is not None:
        kw["clock_cap"] = parse_ordinal(args.clock_cap)
    try:
        return Budgets(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("budgets")
    g.add_argument("--max-steps", type=int, help="successor steps per oracle-free block")
    g.add_argument("--max-limits", type=int, help="limit stages per node")
    g.add_argument("--max-depth", type=int, help="depth of the subcomputation tree")
    g.add_argument("--clock-cap", help="ordinal literal; stages at or beyond it are Unknown")
    g.add_argument("--max-parallel", type=int, help="instances examined by a parallel call")
    g.add_argument("--max-lfp-iters", type=int, help="operator applications for lfp")
    out = common.add_argument_group("output")
    out.add_argument("--trace", type=Path, help="write a JSON trace here")
    out.add_argument("--dot", type=Path, help="write the subcomputation tree as DOT here")

    ap = _Parser(prog="fittm", description="feedback infinite-time Turing machine simulator")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def prog_cmd(name, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("program", help="corpus id, program name or .fit path")
        p.add_argument("--input", default="", help="input tape, e.g. 0110 or '1^3 | tail 0'")
        return p

    prog_cmd("run", "feedback semantics")
    p = prog_cmd("run-ordinal", "ordinal oracle semantics")
    p.add_argument("--alpha", required=True, help="ordinal literal such as w*2+1")
    p.add_argument("--param", default="", help="initial oracle parameter tape")
    prog_cmd("run-iitm", "iterated machine semantics")
    p = prog_cmd("run-parallel", "parallel call over all instances")
    p.add_argument("--param", default="", help="parameter shared by the instances")
    prog_cmd("jump", "strong jump (depth-1 oracle)")
    p = sub.add_parser("lfp", parents=[common], help="least fixed point over a universe")
    p.add_argument("--universe", required=True, type=str)
    p.add_argument("--closure", action="store_true", help="close the universe under calls first")
    p = sub.add_parser("analyze", parents=[common], help="loop analysis")
    p.add_argument("what", choices=["loop", "cells", "ordinal", "transform"])
    p.add_argument("program")
    p.add_argument("--input", default="")
    p = sub.add_parser("corpus", help="corpus tools")
    p.add_argument("action", choices=["list"])
    return ap


def _emit(args, tree: SubTree | None, verdict: Verdict | None, budgets: Budgets, error: str = ""):
    if getattr(args, "trace", None):
        rec = export_tree(tree or SubTree(), verdict, budgets, error)
        if verdict is None and error:
            rec["verdict"] = error.split(":", 1)[0]
        args.trace.write_text(json.dumps(rec, indent=2) + "\n")
    if getattr(args, "dot", None):
        args.dot.write_text(tree_dot(tree or SubTree()))


def _report(v: Verdict) -> int:
    line = verdict_name(v)
    if v.kind == CONVERGES:
        line += f" output={format_tape(v.output)}"
    if v.clock is not None:
        line += f" clock={format_ordinal(v.clock)}"
    if v.kind == FREEZES:
        line += " witness=" + " > ".join(c.label() for c in v.witness)
    print(line)
    return EXIT.get(v.kind, EXIT_UNKNOWN)


def _violation(args, exc: DisciplineViolation, budgets) -> int:
    msg = f"{type(exc).__name__}: {exc}"
    print(msg)
    _emit(args, exc.tree, None, budgets, msg)
    return EXIT_UNKNOWN


def dispatch(args, store: ProgramStore) -> int:
    if args.cmd == "corpus":
        for p in store:
            kind = "driver" if isinstance(p, DriverProgram) else ",".join(TAPE_ROLES[r] for r in p.tapes)
            print(f"{p.pid}\t{p.name}\t{kind}")
        return 0
    b = budgets_from(args)
    if args.cmd == "lfp":
        universe = load_universe(Path(_locate(args.universe)), store)
        calls = list(universe.values())
        labels = dict(universe)
        if args.closure:
            for c in call_closure(store, calls, b):
                if c not in calls:
                    calls.append(c)
                    labels[c.label()] = c
        pair, iters = lfp(calls, store, b)
        for name, status in lfp_table(pair, labels):
            print(f"{name}: {status}")
        print(f"iterations: {iters}")
        if args.trace:
            rec = {"universe": [{"label": k, "call": c.label(), "status": pair.status(c)}
                                for k, c in labels.items()], "iterations": iters,
                   "budgets": b.to_dict()}
            args.trace.write_text(json.dumps(rec, indent=2) + "\n")
        return 0

    e = store.resolve(_locate(args.program))
    x = _tape(args.input) if args.input else BLANK

    if args.cmd == "analyze":
        return _analyze(args, store, e, x, b)
    if args.cmd == "run":
        ev = Evaluator(store, b)
        v = ev.root(e, x)
        _emit(args, ev.tree, v, b)
        return _report(v)
    if args.cmd == "run-ordinal":
        alpha = parse_ordinal(args.alpha)
        y = _tape(args.param) if args.param else BLANK
        try:
            v, tree = ordinal_oracle_run(store, e, alpha, x, y, b)
        except DisciplineViolation as exc:
            return _violation(args, exc, b)
        _emit(args, tree, v, b)
        return _report(v)
    if args.cmd == "run-iitm":
        try:
            v, tree = iitm_run(store, e, x, b)
        except DisciplineViolation as exc:
            return _violation(args, exc, b)
        except (UndecodableOracleTape, CapExceeded) as exc:
            print(f"{type(exc).__name__}: {exc}")
            _emit(args, None, None, b, f"{type(exc).__name__}: {exc}")
            return EXIT_UNKNOWN
        _emit(args, tree, v, b)
        return _report(v)
    if args.cmd == "jump":
        try:
            r = strong_jump(store, e, x, b)
        except DisciplineViolation as exc:
            return _violation(args, exc, b)
        _emit(args, r.tree, r.verdict, b)
        print(r.answer)
        return EXIT.get(r.verdict.kind, EXIT_UNKNOWN)
    if args.cmd == "run-parallel":
        y = _tape(args.param) if args.param else x
        pv = parallel_call(store, e, y, b)
        print(pv)
        if args.trace:
            rec = {"verdict": str(pv), "budgets": b.to_dict(),
                   "instances": [{"n": n, "verdict": verdict_name(v)}
                                 for n, v in sorted(pv.outcomes.items())]}
            args.trace.write_text(json.dumps(rec, indent=2) + "\n")
        return {"yes": 0, "no": 1, "freezes": 2}.get(pv.kind, EXIT_UNKNOWN)
    raise UsageError(f"unknown command {args.cmd}")


def _analyze(args, store, e, x, b) -> int:
    if args.what == "transform":
        t = ev_to_writable_transform(store, e)
        ev = Evaluator(store, b)
        v = ev.root(t, x)
        _emit(args, ev.tree, v, b)
        return _report(v)
    try:
        cert = first_looping_snapshot(store, e, b, x)
    except NotCertifiedDivergent as exc:
        print(f"NotCertifiedDivergent: {exc}")
        return EXIT_UNKNOWN
    if args.what == "loop":
        print(f"entry state={cert.entry.state} head={cert.entry.head} "
              f"clock={format_ordinal(cert.entry.clock)}")
        print(f"reappears={format_ordinal(cert.reappear)} length={format_ordinal(cert.length)}"
              f" kind={cert.kind} valid={certificate_valid(store, cert, b)}")
    elif args.what == "cells":
        cc = classify_cells(cert)
        for (r, i) in sorted(cc.tags):
            n = cc.counts[(r, i)]
            print(f"{TAPE_ROLES[r]}[{i}]: {cc.tags[(r, i)]} changes={'inf' if n is None else n}")
        if not cc.tags:
            print("no cell changes during the loop")
    else:
        code = cert.stage_order
        print(f"elements={len(code.domain)} blocks={len(code.blocks)} "
              f"order_type={format_ordinal(decode_ordinal(code))}")
        print("stage0=" + ",".join(format_ordinal(s) for s in cert.stage0))
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        store = load_corpus()
        return dispatch(args, store)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OrdinalSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, UnknownProgram, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
