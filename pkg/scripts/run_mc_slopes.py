#!/usr/bin/env python3
"""Run the Monte Carlo slope criteria (10-11): probabilistic Strichartz
exponents, profile decay, and the refined delta sweep.

Usage: python scripts/run_mc_slopes.py [config.yaml]
RADNLW_WORKERS overrides the worker count.
"""

import sys

from radnlw.cli import main

if __name__ == "__main__":
    args = ["mc"]
    if len(sys.argv) > 1:
        args += ["--config", sys.argv[1]]
    else:
        args += ["--set", "scenario=forced_random", "--set", "seed=1",
                 "--set", "output_dir=runs/mc"]
    sys.exit(main(args))
