"""Three-player example: games and power indices with and without TPA."""

import argparse
from pathlib import Path

from gaspower import report as rp
from gaspower.games import build_cff, build_pff
from gaspower.scenario import load_scenario
from gaspower.solvers import extended_shapley, minimal_claim, shapley

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario-dir", type=Path, default=SCENARIOS)
    args = ap.parse_args()
    for name in ("example1.json", "example1_tpa.json", "example1_raised_fee.json"):
        net, cfg = load_scenario(args.scenario_dir / name)
        cf, pf = build_cff(net, cfg), build_pff(net, cfg)
        mc = minimal_claim(pf, cfg.pessimistic_fallback)
        print(f"== {name}")
        print(rp.to_table(rp.GAME_HEADER, rp.pff_rows(net, pf), "Partition function"))
        print(rp.shapley_comparison(net, [
            ("CFF Shapley", shapley(cf)),
            ("minimal claim Shapley", shapley(mc)),
            ("extended Shapley", extended_shapley(pf)),
        ]))


if __name__ == "__main__":
    main()
