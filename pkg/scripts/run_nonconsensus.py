#!/usr/bin/env python3
"""Non-consensus experiment: six nodes, two separate root pairs, no spanning tree.

With the two root pairs initialized at different values their states never
move, so the disagreement stays bounded away from zero for every t.
"""

import argparse
from pathlib import Path

import numpy as np

from consensus_lab import SimOptions, has_spanning_tree, simulate_fixed, unit_jump
from consensus_lab.bundled import fig4_graph


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--t-max", type=float, default=100.0)
    ap.add_argument("--out", default="results/nonconsensus")
    args = ap.parse_args()

    graph = fig4_graph()
    assert not has_spanning_tree(graph)
    x0 = np.array([1.0, 1.0, 0.5, -0.5, -1.0, -1.0])
    run = simulate_fixed(graph, unit_jump(), x0, SimOptions(dt=1e-3, t_max=args.t_max),
                         record_stride=10)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run.trajectory.to_csv(out / "trajectory.csv")
    print(f"consensus reached : {run.summary.consensus_reached}")
    print(f"final V           : {run.summary.final_disagreement:.6f}")
    print(f"min V over run    : {run.trajectory.spread.min():.6f}")
    print(f"trajectory        : {out / 'trajectory.csv'}")


if __name__ == "__main__":
    main()
