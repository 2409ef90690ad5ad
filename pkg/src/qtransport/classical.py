"""Classical particle in the moving well: x' = p, p' = D(t) - x."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._numerics import split_edges, time_grid
from .control import ControlSignal, ForcedProfile

__all__ = [
    "PhaseSpacePoint",
    "Trajectory",
    "integrate_trajectory",
    "analytic_trajectory",
    "comoving_frame",
    "default_step",
]


class PhaseSpacePoint(NamedTuple):
    x: float
    p: float
    t: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    p: np.ndarray
    control: ControlSignal | None = None

    def __len__(self):
        return self.times.size

    def __getitem__(self, i) -> PhaseSpacePoint:
        return PhaseSpacePoint(float(self.x[i]), float(self.p[i]), float(self.times[i]))

    def energy(self) -> np.ndarray:
        return 0.5 * (self.x**2 + self.p**2)


def default_step(duration: float) -> float:
    return duration / 2**14


def integrate_trajectory(
    x0: float, p0: float, control: ControlSignal, step: float | None = None
) -> Trajectory:
    """Classic RK4 on a uniform grid over [0, T].

    A step containing a control breakpoint is split there, and the last stage
    of every substep uses the control's left limit, so jumps never sit inside
    a Runge-Kutta stage.
    """
    T = control.duration
    if step is None:
        step = default_step(T)
    times = time_grid(T, step)
    edges, idx = split_edges(times, control.breakpoints)

    starts, ends = edges[:-1], edges[1:]
    h = ends - starts
    d_start = np.asarray(control(starts), dtype=float)
    d_mid = np.asarray(control(starts + 0.5 * h), dtype=float)
    d_end = np.asarray(control.left(ends), dtype=float)

    xs = np.empty(edges.size)
    ps = np.empty(edges.size)
    x, p = xs[0], ps[0] = float(x0), float(p0)
    for j in range(h.size):
        hj, dm = h[j], d_mid[j]
        k1x, k1p = p, d_start[j] - x
        k2x, k2p = p + 0.5 * hj * k1p, dm - (x + 0.5 * hj * k1x)
        k3x, k3p = p + 0.5 * hj * k2p, dm - (x + 0.5 * hj * k2x)
        k4x, k4p = p + hj * k3p, d_end[j] - (x + hj * k3x)
        x += hj / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        p += hj / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        xs[j + 1], ps[j + 1] = x, p
    return Trajectory(times, xs[idx], ps[idx], control)


def analytic_trajectory(
    x0: float, p0: float, profile: ForcedProfile, times=None
) -> Trajectory:
    """Free oscillation plus the forced response: x = x_c + F, p = p_c + F'."""
    t = profile.times if times is None else np.asarray(times, dtype=float)
    F, dF, _, _ = profile.evaluate(t)
    c, s = np.cos(t), np.sin(t)
    return Trajectory(t, x0 * c + p0 * s + F, -x0 * s + p0 * c + dF)


def comoving_frame(trajectory: Trajectory, control: ControlSignal) -> Trajectory:
    """Position relative to the instantaneous well centre."""
    if trajectory.times[-1] > control.duration * (1 + 1e-12) or trajectory.times[0] < 0:
        raise ValueError("trajectory time grid exceeds the control domain")
    if trajectory.control is not None and trajectory.control is not control:
        if trajectory.control.duration != control.duration:
            raise ValueError("trajectory and control cover different durations")
    D = np.asarray(control(trajectory.times), dtype=float)
    return Trajectory(trajectory.times, trajectory.x - D, trajectory.p.copy(), control)
