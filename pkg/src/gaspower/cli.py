"""Command-line front end.

Exit codes: 0 success, 1 validation errors, 2 unservable demand,
3 unreadable scenario file, 4 malformed scenario document, 64 bad usage.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import report as rp
from .flows import TRACE_HEADER, UnservableDemand, allocate_coalition_flows, trace_rows
from .games import all_coalitions, build_cff, build_pff, evaluate_partitions
from .scenario import Granularity, OrderPolicy, ScenarioError, parse_scenario, validate
from .solvers import EmptyCoreError, extended_shapley, minimal_claim, shapley

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_UNREADABLE, EXIT_SCHEMA, EXIT_USAGE = 0, 1, 2, 3, 4, 64

MODES = ("validate", "flows", "cff", "pff", "minimal-claim", "shapley", "extended-shapley", "report")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gaspower", description="Power indices for gas pipeline networks with regulated TPA.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("scenario", type=Path)
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--order", help="coalition evaluation order: 'demand' or 'explicit:ID,ID,...'")
    p.add_argument("--granularity", choices=("player", "node"))
    p.add_argument("--method", choices=("cff", "minimal-claim"), default="cff",
                   help="game to take the Shapley value of (shapley mode)")
    p.add_argument("--out", type=Path, help="write the result here instead of stdout")
    p.add_argument("--trace-flows", type=Path, help="write per-member flows as CSV")
    p.add_argument("--workers", type=int, default=None, help="parallel partition evaluations")
    return p


def _apply_overrides(config, args):
    changes = {}
    if args.order:
        if args.order == "demand":
            changes["coalition_order_policy"] = OrderPolicy.BY_TOTAL_DEMAND_DESC
        elif args.order.startswith("explicit:"):
            ids = [s for s in args.order[len("explicit:"):].split(",") if s]
            changes["coalition_order_policy"] = OrderPolicy.EXPLICIT_LIST
            changes["explicit_order"] = tuple(ids)
        else:
            raise ScenarioError(f"--order must be 'demand' or 'explicit:<ids>', got {args.order!r}")
    if args.granularity:
        changes["member_granularity"] = {"player": Granularity.PER_PLAYER, "node": Granularity.PER_NODE}[
            args.granularity]
    return dataclasses.replace(config, **changes) if changes else config


def _emit(fmt, header, rows, title=None):
    if fmt == "csv":
        return rp.to_csv(header, rows)
    if fmt == "json":
        return rp.to_json(rp.to_records(header, rows))
    return rp.to_table(header, rows, title)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.scenario.read_text()
    except OSError as exc:
        print(f"error: cannot read {args.scenario}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_UNREADABLE
    try:
        net, config = parse_scenario(text)
        config = _apply_overrides(config, args)
        if config.coalition_order_policy is OrderPolicy.EXPLICIT_LIST:
            for pid in config.explicit_order:
                if pid not in net.player_ids:
                    raise ScenarioError(f"explicit order names unknown player {pid!r}")
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    diagnostics = validate(net)
    for d in diagnostics:
        print(str(d), file=sys.stderr)
    if any(d.level == "error" for d in diagnostics):
        return EXIT_INVALID

    try:
        out, trace = _dispatch(args, net, config, diagnostics)
    except UnservableDemand as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except EmptyCoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if args.trace_flows and trace is not None:
        args.trace_flows.write_text(rp.to_csv(TRACE_HEADER, trace))
    if args.out:
        args.out.write_text(out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def _cff_trace(net, config):
    rows = []
    for c in all_coalitions(net.player_count):
        res = allocate_coalition_flows(net, c, None, config)
        label = net.coalition_label(c)
        for fl in res.flows:
            rows.extend(trace_rows(net, "isolated", label, fl))
    return rows


def _dispatch(args, net, config, diagnostics):
    fmt = args.format
    mode = args.mode
    pid = net.player_ids

    if mode == "validate":
        rows = [(d.level, d.message) for d in diagnostics]
        if fmt == "table":
            return ("ok\n" if not rows else rp.to_table(("level", "message"), rows)), None
        return _emit(fmt, ("level", "message"), rows), None

    if mode == "cff":
        cf = build_cff(net, config)
        trace = _cff_trace(net, config) if args.trace_flows else None
        return _emit(fmt, rp.GAME_HEADER, rp.cff_rows(net, cf), "Characteristic function"), trace

    runs = evaluate_partitions(net, config, args.workers)
    trace = rp.trace_table(net, runs) if args.trace_flows else None

    if mode == "flows":
        return _emit(fmt, TRACE_HEADER, rp.trace_table(net, runs), "Flows per partition"), trace

    pf = build_pff(net, config, runs=runs)
    if mode == "pff":
        return _emit(fmt, rp.GAME_HEADER, rp.pff_rows(net, pf), "Partition function"), trace

    if mode == "minimal-claim":
        mc = minimal_claim(pf, config.pessimistic_fallback)
        header = ("coalition", "value", "stable_residual_partitions")
        text = _emit(fmt, header, rp.minimal_claim_rows(net, mc), "Minimal claim function")
        for w in mc.warnings:
            print(f"warning: {w}", file=sys.stderr)
        return text, trace

    if mode == "extended-shapley":
        vals = extended_shapley(pf)
        return _emit(fmt, ("method",) + pid, [("pff_extended_shapley", *vals)]), trace

    if mode == "shapley":
        if args.method == "cff":
            name, vals = "cff_shapley", shapley(build_cff(net, config))
        else:
            name, vals = "pff_minimal_claim_shapley", shapley(minimal_claim(pf, config.pessimistic_fallback))
        return _emit(fmt, ("method",) + pid, [(name, *vals)]), trace

    # report
    cf = build_cff(net, config)
    mc = minimal_claim(pf, config.pessimistic_fallback)
    named = [
        ("Shapley values based on CFF", shapley(cf)),
        ("Shapley values based on PFF", shapley(mc)),
        ("Extended Shapley value of PFF", extended_shapley(pf)),
    ]
    methods = ("cff_shapley", "pff_minimal_claim_shapley", "pff_extended_shapley")
    if fmt == "json":
        doc = {
            "players": list(pid),
            "shapley": {m: [rp.num(v) for v in vals] for m, (_, vals) in zip(methods, named)},
            "cff": rp.to_records(rp.GAME_HEADER, rp.cff_rows(net, cf)),
            "pff": rp.to_records(rp.GAME_HEADER, rp.pff_rows(net, pf)),
            "minimal_claim": rp.to_records(("coalition", "value", "stable_residual_partitions"),
                                           rp.minimal_claim_rows(net, mc)),
            "warnings": list(mc.warnings),
        }
        return rp.to_json(doc), trace
    if fmt == "csv":
        rows = [(m, p, v) for m, (_, vals) in zip(methods, named) for p, v in zip(pid, vals)]
        return rp.to_csv(("method", "player", "value"), rows), trace
    parts = [
        rp.to_table(rp.GAME_HEADER, rp.cff_rows(net, cf), "Characteristic function (CFF)"),
        rp.to_table(rp.GAME_HEADER, rp.pff_rows(net, pf), "Partition function (PFF)"),
        rp.to_table(("coalition", "value", "stable_residual_partitions"), rp.minimal_claim_rows(net, mc),
                    "Minimal claim function"),
        rp.shapley_comparison(net, named),
    ]
    parts += [f"warning: {w}\n" for w in mc.warnings]
    return "\n".join(parts), trace


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
