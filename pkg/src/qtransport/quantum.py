"""Wavefunctions in the moving harmonic well.

Two independent routes to psi(x, t): the closed-form driven-oscillator
solution built from the forced response, and a Strang split-operator
integration of the Schroedinger equation with H = p^2/2 + (x - D(t))^2/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .control import ControlSignal, ForcedProfile

__all__ = [
    "SpatialGrid",
    "WaveFunction",
    "GridLeakageError",
    "eigenstate",
    "hermite_functions",
    "translate",
    "analytic_evolve",
    "numeric_evolve",
    "expectation",
    "default_dt",
    "MAX_LEVEL",
    "EDGE_TOLERANCE",
]

MAX_LEVEL = 60
EDGE_TOLERANCE = 1e-8
NORM_TOLERANCE = 1e-8
DEFAULT_POINTS = 4096
GRID_MARGIN = 12.0


class GridLeakageError(RuntimeError):
    """The wavefunction reached the edge of the periodic grid."""


@dataclass(frozen=True)
class SpatialGrid:
    """Periodic grid of ``points`` nodes on [xmin, xmax); step = (xmax - xmin)/points."""

    xmin: float
    xmax: float
    points: int = DEFAULT_POINTS

    def __post_init__(self):
        if self.points < 256 or self.points & (self.points - 1):
            raise ValueError(f"grid points must be a power of two >= 256, got {self.points}")
        if not self.xmax > self.xmin:
            raise ValueError("grid needs xmax > xmin")

    @property
    def step(self) -> float:
        return (self.xmax - self.xmin) / self.points

    @property
    def x(self) -> np.ndarray:
        return self.xmin + self.step * np.arange(self.points)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.points, self.step)

    @classmethod
    def for_transport(
        cls,
        distance: float,
        control: ControlSignal | None = None,
        points: int = DEFAULT_POINTS,
        margin: float = GRID_MARGIN,
    ) -> SpatialGrid:
        """Cover the start, the target and the whole well path with ``margin`` to spare."""
        lo, hi = min(0.0, distance), max(0.0, distance)
        if control is not None:
            _, d = control.sample(4097)
            lo, hi = min(lo, float(d.min())), max(hi, float(d.max()))
        return cls(math.floor(lo - margin), math.ceil(hi + margin), points)

    def doubled(self) -> SpatialGrid:
        return SpatialGrid(self.xmin, self.xmax, 2 * self.points)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: SpatialGrid
    amplitudes: np.ndarray
    time: float = 0.0

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.step)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def edge_magnitude(self) -> float:
        a = self.amplitudes
        return float(max(abs(a[0]), abs(a[-1])))

    def overlap(self, other: WaveFunction) -> complex:
        """<self|other> by grid quadrature."""
        if other.grid != self.grid:
            raise ValueError("wavefunctions live on different grids")
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.grid.step)


def hermite_functions(nmax: int, y: np.ndarray) -> np.ndarray:
    """Normalised Hermite functions psi_0..psi_nmax at ``y``, shape (nmax + 1, len(y)).

    Uses the three-term recurrence on the functions themselves, which stays
    bounded where the raw polynomials would overflow.
    """
    y = np.asarray(y, dtype=float)
    out = np.empty((nmax + 1,) + y.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * y**2)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * y * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _check_level(n: int):
    if int(n) != n or n < 0 or n > MAX_LEVEL:
        raise ValueError(f"eigenstate index must be in 0..{MAX_LEVEL}, got {n}")


def _check_edges(psi: WaveFunction, what: str):
    if psi.edge_magnitude() >= EDGE_TOLERANCE:
        raise GridLeakageError(
            f"{what}: amplitude {psi.edge_magnitude():.3g} at the grid edge; enlarge the grid"
        )
    return psi


def eigenstate(n: int, grid: SpatialGrid, center: float = 0.0) -> WaveFunction:
    """n-th eigenstate of the unit-frequency oscillator centred at ``center``."""
    _check_level(n)
    amps = hermite_functions(n, grid.x - center)[n].astype(complex)
    psi = WaveFunction(grid, amps, 0.0)
    if psi.edge_magnitude() >= EDGE_TOLERANCE:
        raise ValueError(f"eigenstate {n} at {center} is too close to the grid edge")
    if abs(psi.norm() - 1.0) > 1e-9:
        raise ValueError(f"grid step {grid.step:.3g} too coarse to resolve eigenstate {n}")
    return psi


def translate(psi: WaveFunction, shift: float) -> WaveFunction:
    """psi(x - shift), applied as a phase ramp in momentum space."""
    amps = sfft.ifft(sfft.fft(psi.amplitudes) * np.exp(-1j * psi.grid.k * shift))
    return WaveFunction(psi.grid, amps, psi.time)


def analytic_evolve(
    n: int, profile: ForcedProfile, t: float, grid: SpatialGrid
) -> WaveFunction:
    """Closed-form driven-oscillator state exp(-i(E_n t + phi/2 - F' x)) psi_n(x - F)."""
    F, dF, _, phi = (float(v) for v in profile.evaluate(t))
    base = eigenstate(n, grid, 0.0)
    moved = translate(base, F)
    phase = np.exp(-1j * ((n + 0.5) * t + 0.5 * phi - dF * grid.x))
    psi = WaveFunction(grid, phase * moved.amplitudes, float(t))
    return _check_edges(psi, "analytic evolution")


def default_dt(duration: float) -> float:
    return duration / 2**16


class _PhaseTable:
    """exp(i b x) on the grid via a (blocks x block) outer product of small tables."""

    def __init__(self, grid: SpatialGrid):
        n = grid.points
        self.block = 1 << (int(math.log2(n)) // 2)
        self.coarse = grid.xmin + grid.step * self.block * np.arange(n // self.block)
        self.fine = grid.step * np.arange(self.block)
        self.out = np.empty((n // self.block, self.block), dtype=complex)

    def __call__(self, b: float) -> np.ndarray:
        np.multiply.outer(np.exp(1j * b * self.coarse), np.exp(1j * b * self.fine), out=self.out)
        return self.out.reshape(-1)


def _step_edges(t_final: float, dt: float, stops) -> tuple[np.ndarray, np.ndarray]:
    """Step boundaries and lengths: every stop is hit exactly, no step exceeds ``dt``.

    Steps between two stops share one length value, which keeps the
    propagator caches small.
    """
    stops = np.unique(np.concatenate(([0.0, t_final], np.asarray(stops, dtype=float))))
    edges, steps = [np.array([0.0])], []
    for a, b in zip(stops[:-1], stops[1:]):
        m = max(1, int(math.ceil((b - a) / dt - 1e-9)))
        piece = a + (b - a) * np.arange(1, m + 1) / m
        piece[-1] = b
        edges.append(piece)
        steps.append(np.full(m, (b - a) / m))
    return np.concatenate(edges), np.concatenate(steps)


def numeric_evolve(
    psi0: WaveFunction,
    control: ControlSignal,
    t_final: float,
    dt: float | None = None,
    snapshot_times=None,
    check_every: int = 1024,
) -> list[WaveFunction]:
    """Strang split-operator evolution from t = 0, returning states at ``snapshot_times``.

    Each step applies half the potential (well centre taken at the step
    midpoint), the full kinetic propagator in momentum space, then the other
    potential half.  Step boundaries land on every snapshot time and every
    control breakpoint.  Defaults: dt = T/2^16, snapshots = (t_final,).
    """
    if dt is None:
        dt = default_dt(control.duration)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not 0 <= t_final <= control.duration * (1 + 1e-12):
        raise ValueError("t_final outside the control domain")
    snaps = np.atleast_1d(np.asarray(
        (t_final,) if snapshot_times is None else snapshot_times, dtype=float))
    if np.any(snaps < 0) or np.any(snaps > t_final * (1 + 1e-12)) or np.any(np.diff(snaps) < 0):
        raise ValueError("snapshot times must be ascending within [0, t_final]")
    snaps = np.minimum(snaps, t_final)

    grid = psi0.grid
    _check_edges(psi0, "initial state")
    bps = [b for b in control.breakpoints if 0 < b < t_final]
    edges, h = _step_edges(t_final, dt, np.concatenate((snaps, bps)))
    snap_idx = np.searchsorted(edges, snaps)
    centers = np.asarray(control(edges[:-1] + 0.5 * h), dtype=float)

    x = grid.x
    k2 = grid.k**2
    table = _PhaseTable(grid)
    kinetic_cache: dict[float, np.ndarray] = {}
    quad_cache: dict[float, np.ndarray] = {}

    def kinetic(hj):
        if hj not in kinetic_cache:
            kinetic_cache[hj] = np.exp(-0.5j * hj * k2)
        return kinetic_cache[hj]

    def potential(weight, lin, const):
        # exp(-i [weight x^2 / 2 - lin x + const / 2])
        if weight not in quad_cache:
            quad_cache[weight] = np.exp(-0.5j * weight * x**2)
        return quad_cache[weight] * table(lin) * np.exp(-0.5j * const)

    wanted: dict[int, list[int]] = {}
    for pos, i in enumerate(snap_idx.tolist()):
        wanted.setdefault(i, []).append(pos)
    results: list[WaveFunction] = [None] * snaps.size  # type: ignore[list-item]

    def record(i, amps):
        state = _check_edges(
            WaveFunction(grid, amps.copy(), float(edges[i])),
            f"numeric evolution at t={edges[i]:.6g}",
        )
        for pos in wanted[i]:
            results[pos] = state

    psi = np.array(psi0.amplitudes, dtype=complex)
    if 0 in wanted:
        record(0, psi)
    # the trailing potential half of one step is merged with the leading half of the next
    pending = (0.0, 0.0, 0.0)
    for j in range(h.size):
        hj, c = h[j], centers[j]
        w = 0.5 * hj
        psi *= potential(pending[0] + w, pending[1] + w * c, pending[2] + w * c * c)
        psi = sfft.ifft(sfft.fft(psi, overwrite_x=True) * kinetic(hj), overwrite_x=True)
        pending = (w, w * c, w * c * c)
        if j + 1 in wanted:
            record(j + 1, psi * potential(*pending))
        elif check_every and (j + 1) % check_every == 0:
            edge = max(abs(psi[0]), abs(psi[-1]))
            if edge >= EDGE_TOLERANCE:
                raise GridLeakageError(
                    f"numeric evolution at t={edges[j + 1]:.6g}: edge amplitude {edge:.3g}"
                )
    return results


def expectation(psi: WaveFunction, observable: str, well_center: float = 0.0) -> float:
    """<x>, <p> or <H> with the well centred at ``well_center``."""
    norm = psi.norm()
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise ValueError(f"wavefunction not normalised (norm {norm:.12g})")
    grid = psi.grid
    dens = psi.density()
    if observable == "position":
        return float(np.sum(grid.x * dens) * grid.step)
    if observable in ("momentum", "energy"):
        pk = np.abs(sfft.fft(psi.amplitudes)) ** 2
        pk /= pk.sum()
        if observable == "momentum":
            return float(np.sum(grid.k * pk))
        kinetic = 0.5 * np.sum(grid.k**2 * pk)
        potential = 0.5 * np.sum((grid.x - well_center) ** 2 * dens) * grid.step
        return float(kinetic + potential)
    raise ValueError(f"unknown observable {observable!r}")
