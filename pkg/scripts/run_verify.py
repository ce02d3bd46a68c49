#!/usr/bin/env python3
"""Run the identity/monotonicity acceptance criteria (1-9, 12-13) at desk scale.

Usage: python scripts/run_verify.py [config.yaml]
"""

import sys

from radnlw.cli import main

if __name__ == "__main__":
    args = ["verify"]
    if len(sys.argv) > 1:
        args += ["--config", sys.argv[1]]
    else:
        args += ["--set", "scenario=forced_random", "--set", "seed=1",
                 "--set", "output_dir=runs/verify"]
    sys.exit(main(args))
