"""Broker cost/capital trade-off: optimum plus epsilon-constraint frontier.

Usage: python scripts/demo_frontier.py [scenario.json] [--points 9]
"""

import argparse
import sys
from pathlib import Path

from dismed import Bounds, OptimizerConfig, load_scenario, optimize_broker, pareto_sweep

DEFAULT = Path(__file__).parent.parent / "tests" / "fixtures" / "broker_opt.json"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("scenario", nargs="?", default=str(DEFAULT))
    parser.add_argument("--points", type=int, default=9)
    parser.add_argument("--bi-max", type=float, default=3.0)
    args = parser.parse_args()

    scenario = load_scenario(args.scenario)
    bounds = Bounds(B_b=(0, 0), B_s=(0, 0), B_i=(0, args.bi_max), B_n=(0, 0))

    best = optimize_broker(scenario, bounds, OptimizerConfig())
    if not best.feasible:
        print("infeasible: commission cannot cover the cost box")
        return 3
    d = best.decision
    print(f"combined optimum: objective {best.objective:.4f} at "
          f"B_i = {d.B_i:.4f} (state {d.state}, {best.iterations} iterations)")

    frontier = pareto_sweep(scenario, bounds, k=args.points, cfg=OptimizerConfig())
    print(f"frontier ({len(frontier)} non-dominated points):")
    print("  cost      capital")
    for p in frontier:
        print(f"  {p.cost:8.4f}  {p.capital:8.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
