#!/usr/bin/env python3
"""Print the refined-Strichartz delta sweep table for a chosen (q, p, alpha).

Usage: python scripts/delta_sweep.py [q p alpha]
Defaults to the (4, inf, 1/4) showcase; pass 'inf' for infinite exponents.
"""

import sys

import numpy as np

from radnlw.experiments import refined_strichartz_delta_sweep


def _parse(x):
    return np.inf if x == "inf" else float(x)


if __name__ == "__main__":
    if len(sys.argv) == 4:
        q, p, alpha = (_parse(a) for a in sys.argv[1:4])
    else:
        q, p, alpha = 4.0, np.inf, 0.25
    rep = refined_strichartz_delta_sweep(q, p, alpha)
    print(f"(q, p, alpha) = ({q}, {p}, {alpha})")
    print(f"predicted slope 1/2 - 1/min(p,q) = {rep.predicted_slope:+.4f}")
    print(f"measured  slope                  = {rep.measured_slope:+.4f}")
    for k, (label, stats) in enumerate(rep.per_shell.items()):
        print(f"  {label:>12s}  norm/||f||_L2 = {stats['mean']:.6e}")
    print("PASS" if rep.passed else "FAIL")
