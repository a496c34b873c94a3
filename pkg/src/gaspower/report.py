"""Rendering of games, flow traces and power indices as tables, CSV and JSON."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Iterable, Sequence

from .flows import TRACE_HEADER, PartitionFlows, trace_rows
from .games import CharacteristicFunction, PartitionFunction
from .scenario import Network

GAME_HEADER = ("partition", "coalition", "value", "phi", "internal_profit", "external_profit")


def num(x) -> int | float:
    """Exact integers stay integers; other rationals become floats."""
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else float(x)
    return x


def partition_label(net: Network, partition: Iterable[Iterable[int]]) -> str:
    return ",".join(net.coalition_label(c) for c in partition)


def cff_rows(net: Network, cf: CharacteristicFunction) -> list[tuple]:
    rows = []
    for c in sorted(cf.values, key=lambda c: (len(c), sorted(c))):
        label = net.coalition_label(c)
        rows.append((label, label, cf.values[c], cf.costs.get(c, Fraction(0)),
                     cf.internal.get(c, Fraction(0)), Fraction(0)))
    return rows


def pff_rows(net: Network, pf: PartitionFunction) -> list[tuple]:
    rows = []
    for idx, part in enumerate(pf.partitions):
        plabel = partition_label(net, part)
        for c in part:
            ev = pf.values[(c, idx)]
            rows.append((plabel, net.coalition_label(c), ev.value, ev.phi, ev.internal_profit,
                         ev.external_profit))
    return rows


def minimal_claim_rows(net: Network, mc: CharacteristicFunction) -> list[tuple]:
    rows = []
    for c in sorted(mc.values, key=lambda c: (len(c), sorted(c))):
        stable = " | ".join(partition_label(net, q) or "-" for q in mc.stable_partitions.get(c, []))
        rows.append((net.coalition_label(c), mc.values[c], stable))
    return rows


def trace_table(net: Network, runs: Sequence[PartitionFlows], label: str | None = None) -> list[tuple]:
    rows = []
    for run in runs:
        plabel = label or partition_label(net, run.partition)
        for c in run.order:
            clabel = net.coalition_label(c)
            for i in sorted(c, key=lambda i: (-net.player_demand(i), i)):
                rows.extend(trace_rows(net, plabel, clabel, run.flows[i]))
    return rows


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(num(v)) if isinstance(v, (Fraction, float)) else v for v in row])
    return buf.getvalue()


def to_records(header: Sequence[str], rows: Iterable[Sequence]) -> list[dict]:
    return [{h: num(v) for h, v in zip(header, row)} for row in rows]


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, default=num) + "\n"


def to_table(header: Sequence[str], rows: Iterable[Sequence], title: str | None = None) -> str:
    """Fixed-width text table; money with one decimal place."""
    cells = [[f"{float(v):.1f}" if isinstance(v, (Fraction, float)) else str(v) for v in row] for row in rows]
    widths = [len(h) for h in header]
    for row in cells:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def shapley_comparison(net: Network, rows: Sequence[tuple[str, Sequence[Fraction]]]) -> str:
    """Side-by-side power indices, one row per method."""
    header = ("",) + tuple(net.player_ids)
    return to_table(header, [(name, *vals) for name, vals in rows])
