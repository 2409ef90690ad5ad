"""Split-operator convergence against the closed-form propagator.

Prints the L2 deviation at T for a ladder of time steps and the change in
transport fidelity under grid doubling.
"""

import math
import time

import numpy as np

from qtransport.control import TransportSpec, make_reference_profile, make_reference_transport
from qtransport.quantum import SpatialGrid, analytic_evolve, eigenstate, numeric_evolve

T = 2 * math.pi
DX = 10.0


def deviation(grid, dt):
    spec = TransportSpec(DX, T)
    exact = analytic_evolve(0, make_reference_profile(spec), T, grid).amplitudes
    (psi,) = numeric_evolve(eigenstate(0, grid), make_reference_transport(spec), T, dt)
    return float(np.sqrt(np.sum(np.abs(psi.amplitudes - exact) ** 2) * grid.step)), psi


def main():
    grid = SpatialGrid.for_transport(DX, make_reference_transport(TransportSpec(DX, T)))
    print(f"grid [{grid.xmin}, {grid.xmax}) with {grid.points} points")
    print(f"{'steps':>8} {'L2 deviation':>14} {'ratio':>7} {'seconds':>8}")
    prev = None
    for k in range(10, 17):
        start = time.perf_counter()
        dev, _ = deviation(grid, T / 2**k)
        ratio = f"{prev / dev:7.2f}" if prev else " " * 7
        print(f"{2**k:8d} {dev:14.4e} {ratio} {time.perf_counter() - start:8.2f}")
        prev = dev

    print("\ngrid doubling at dt = T/2^12")
    for points in (1024, 2048, 4096, 8192):
        g = SpatialGrid(grid.xmin, grid.xmax, points)
        _, psi = deviation(g, T / 2**12)
        fid = abs(eigenstate(0, g, DX).overlap(psi)) ** 2
        print(f"{points:6d} points: fidelity {fid:.15f}")


if __name__ == "__main__":
    main()
