"""Show how the coalition evaluation order changes embedded values when a
shared pipeline is the bottleneck."""

import argparse
import dataclasses
from pathlib import Path

from gaspower import report as rp
from gaspower.games import build_pff
from gaspower.scenario import OrderPolicy, load_scenario

DEFAULT = Path(__file__).resolve().parent.parent / "scenarios" / "shared_bottleneck.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario", type=Path, nargs="?", default=DEFAULT)
    ap.add_argument("--first", default="A", help="player whose coalition goes first in the explicit order")
    args = ap.parse_args()

    net, cfg = load_scenario(args.scenario)
    rest = [p for p in net.player_ids if p != args.first]
    explicit = dataclasses.replace(cfg, coalition_order_policy=OrderPolicy.EXPLICIT_LIST,
                                   explicit_order=(args.first, *rest))
    target = [frozenset(net.player_index(p) for p in grp) for grp in (("A", "B"), ("C", "D"), ("E",), ("F",))]
    rows = []
    for label, config in (("by demand", cfg), (f"{args.first} first", explicit)):
        pf = build_pff(net, config)
        rows.append((label, *(pf.value(c, target) for c in target)))
    header = ("order",) + tuple(net.coalition_label(c) for c in target)
    print(rp.to_table(header, rows, "Embedded values in " + rp.partition_label(net, target)))


if __name__ == "__main__":
    main()
