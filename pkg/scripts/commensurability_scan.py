"""Final ground-state fidelity of the piecewise model against transport time and step count.

Uses the closed-form engine with the Volterra response of the distorted
control.  The scan shows where the piecewise staircase stops being harmless.
"""

import math

import numpy as np

from qtransport.simulate import Scenario, final_fidelity


def main():
    base = Scenario(points=1024, models=("reference", "piecewise"))
    print("infidelity 1 - F for piecewise steps N against T / pi")
    Ts = np.arange(2.0, 4.01, 0.25)
    print("   N " + "".join(f"{t:>10.2f}" for t in Ts))
    for n in (3, 4, 6, 8, 12, 16):
        row = []
        for t in Ts:
            s = base.with_(duration=t * math.pi, steps=n)
            row.append(1 - final_fidelity(s, "piecewise", engine="analytic"))
        print(f"{n:4d} " + "".join(f"{v:10.2e}" for v in row))


if __name__ == "__main__":
    main()
