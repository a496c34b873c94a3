"""Five-country corridor: Shapley values under both game forms, with timing."""

import argparse
import dataclasses
import time
from pathlib import Path

from gaspower import report as rp
from gaspower.flows import clear_cache
from gaspower.games import build_cff, build_pff
from gaspower.scenario import Granularity, load_scenario
from gaspower.solvers import extended_shapley, minimal_claim, shapley

DEFAULT = Path(__file__).resolve().parent.parent / "scenarios" / "example2.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario", type=Path, nargs="?", default=DEFAULT)
    ap.add_argument("--granularity", choices=("player", "node"), default="player")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    net, cfg = load_scenario(args.scenario)
    gran = Granularity.PER_PLAYER if args.granularity == "player" else Granularity.PER_NODE
    cfg = dataclasses.replace(cfg, member_granularity=gran)
    clear_cache()
    start = time.perf_counter()
    cf = build_cff(net, cfg)
    pf = build_pff(net, cfg, args.workers)
    mc = minimal_claim(pf, cfg.pessimistic_fallback)
    rows = [
        ("Shapley values based on CFF", shapley(cf)),
        ("Shapley values based on PFF", shapley(mc)),
        ("Extended Shapley value of PFF", extended_shapley(pf)),
    ]
    elapsed = time.perf_counter() - start
    print(rp.shapley_comparison(net, rows))
    print(f"{len(pf.partitions)} partitions, {len(cf.values)} coalitions, {elapsed:.2f}s")
    for w in mc.warnings:
        print("warning:", w)


if __name__ == "__main__":
    main()
