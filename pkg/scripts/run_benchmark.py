#!/usr/bin/env python3
"""Measure the geometry-limited neighbor count per coordinator.

Counts, over fresh deployments, how many stations an ideal
interference-free control-rate link could reach from each coordinator.
This bounds the number of handshakes the protocol could ever complete
and calibrates the beacon-responder numbers from the simulator.
"""

import argparse
import sys

from mmwv2v.cli import run_benchmark


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--snapshots", type=int, default=200)
    ap.add_argument("--pcp-prob", type=float, default=0.1)
    args = ap.parse_args()

    mean, ci, n = run_benchmark({}, args.seed, args.snapshots, args.pcp_prob)
    print(f"ideal neighbors per coordinator: {mean:.3f} +/- {ci:.3f} "
          f"(95% CI, {n} coordinators)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
