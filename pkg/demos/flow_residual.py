"""Integrate the gradient flow for {(1,0), (1,1)} and compare two predictions.

The iterated balanced filtration predicts h(t) ~ -log(t) (1,0) - loglog(t) (0,1).
Dropping the second term leaves a residual that drifts off like -log(tau).
"""

import sys

from balfilt import PolarisedState
from balfilt.chain import iterated_balanced
from balfilt.flow import FlowProblem, integrate, residual_check


def main(tau_max=1000.0):
    s = PolarisedState(2, ((1, 0), (1, 1)))
    full = iterated_balanced(s)
    for start in [(0.0, 0.0), (2.0, -1.0), (-1.5, 2.5)]:
        p = FlowProblem(s, list(start), tau_max=tau_max)
        traj = integrate(p)
        good = residual_check(p, full, traj)
        bad = residual_check(p, [(1, 0)], traj)
        print(f"start {start}")
        for name, res in [("full", good), ("truncated", bad)]:
            tail = ", ".join(f"{x:.3f}" for x in res.tail_max)
            drift = ", ".join(f"{x:+.2e}" for x in res.drift)
            print(f"  {name:<9} bounded={res.bounded!s:<5}  tail max [{tail}]  drift/decade [{drift}]")


if __name__ == "__main__":
    main(float(sys.argv[1]) if len(sys.argv) > 1 else 1000.0)
