"""Transport fidelities for eigenstates, superpositions and eigenstate mixtures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control import ControlSignal, TransportSpec
from .quantum import NORM_TOLERANCE, SpatialGrid, WaveFunction, eigenstate, hermite_functions

__all__ = [
    "SuperpositionSpec",
    "MixtureSpec",
    "FidelityTrace",
    "MixedFidelity",
    "transport_fidelity",
    "instantaneous_ground_fidelity",
    "superposition_fidelity",
    "mixed_state_fidelity",
    "uhlmann_fidelity",
    "thermal_weights",
    "GUARD",
    "TRUNCATION_MARGIN",
]

GUARD = 1e-12
TRUNCATION_MARGIN = 10
MAX_LEAKAGE = 1e-6


def _guarded(value: float) -> float:
    if value > 1.0 + GUARD or value < -GUARD:
        raise ArithmeticError(f"fidelity {value!r} outside [0, 1] beyond rounding")
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class SuperpositionSpec:
    coefficients: tuple[complex, ...]

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.size == 0 or abs(np.sum(np.abs(c) ** 2) - 1.0) > 1e-12:
            raise ValueError("superposition coefficients must be normalised")
        object.__setattr__(self, "coefficients", tuple(complex(v) for v in c))


@dataclass(frozen=True)
class MixtureSpec:
    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.size == 0 or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be non-negative and sum to one")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))


def thermal_weights(levels: int, theta: float) -> MixtureSpec:
    """rho_n proportional to exp(-n / theta) for n = 0..levels."""
    w = np.exp(-np.arange(levels + 1) / theta)
    w /= w.sum()
    return MixtureSpec(tuple(w))


@dataclass(frozen=True, eq=False)
class FidelityTrace:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if np.any(v > 1.0 + GUARD) or np.any(v < -GUARD):
            raise ArithmeticError("fidelity trace leaves [0, 1] beyond rounding")
        object.__setattr__(self, "values", np.clip(v, 0.0, 1.0))

    @property
    def minimum(self) -> float:
        return float(self.values.min())

    @property
    def final(self) -> float:
        return float(self.values[-1])


def _pure_fidelity(a: WaveFunction, b: WaveFunction) -> float:
    """|<a|b>|^2 on unit-normalised states.

    Long split-operator runs drift in norm at the 1e-11 level through FFT
    rounding; dividing it out keeps the [0, 1] guard meaningful.
    """
    na, nb = a.norm(), b.norm()
    if abs(na - 1.0) > NORM_TOLERANCE or abs(nb - 1.0) > NORM_TOLERANCE:
        raise ValueError(f"fidelity needs normalised states (norms {na:.12g}, {nb:.12g})")
    return abs(a.overlap(b)) ** 2 / (na * nb)


def transport_fidelity(
    final: WaveFunction, n: int, spec: TransportSpec, start: float = 0.0
) -> float:
    """|<psi_n(x - start - distance)|final>|^2."""
    target = eigenstate(n, final.grid, start + spec.distance)
    return _guarded(_pure_fidelity(target, final))


def instantaneous_ground_fidelity(
    snapshots: list[WaveFunction], control: ControlSignal
) -> FidelityTrace:
    """Overlap of each snapshot with the ground state of the well at D(t)."""
    times = np.array([s.time for s in snapshots])
    if np.any(times < 0) or np.any(times > control.duration * (1 + 1e-12)):
        raise ValueError("snapshot times outside the control domain")
    values = []
    for s, c in zip(snapshots, np.atleast_1d(control(times))):
        ground = eigenstate(0, s.grid, float(c))
        values.append(_pure_fidelity(ground, s))
    return FidelityTrace(times, np.array(values))


def superposition_fidelity(spec: SuperpositionSpec, T: float) -> float:
    """|sum_n |c_n|^2 exp(-i n T)|^2 for a perfectly transported superposition."""
    c = np.asarray(spec.coefficients)
    n = np.arange(c.size)
    # reduce n*T mod 2 pi first so T and T + 2 pi give the same result
    phase = np.mod(n * np.mod(T, 2 * np.pi), 2 * np.pi)
    return _guarded(abs(np.sum(np.abs(c) ** 2 * np.exp(-1j * phase))) ** 2)


def _psd_factor(rho: np.ndarray) -> np.ndarray:
    """L with rho = L L^dagger."""
    vals, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def _fidelity_from_factors(l1: np.ndarray, l2: np.ndarray) -> float:
    # sqrt(rho1) rho2 sqrt(rho1) has eigenvalues sigma_i^2 for sigma the singular values of l1^+ l2
    return float(np.sum(np.linalg.svd(l1.conj().T @ l2, compute_uv=False)) ** 2)


def uhlmann_fidelity(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """(tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2 for density matrices."""
    rho1, rho2 = np.asarray(rho1, dtype=complex), np.asarray(rho2, dtype=complex)
    if rho1.shape != rho2.shape or rho1.ndim != 2:
        raise ValueError("density matrices must be square and of equal shape")
    return _guarded(_fidelity_from_factors(_psd_factor(rho1), _psd_factor(rho2)))


@dataclass(frozen=True)
class MixedFidelity:
    fidelity: float
    leakage: float


def mixed_state_fidelity(
    spec: MixtureSpec,
    finals: list[WaveFunction],
    transport: TransportSpec,
    start: float = 0.0,
    margin: int = TRUNCATION_MARGIN,
) -> MixedFidelity:
    """Uhlmann fidelity between the initial mixture displaced by the distance and the evolved one.

    Both states are written in the displaced eigenbasis truncated at
    M + margin levels.  The initial state is diagonal there; the evolved one
    is sum_n rho_n |final_n><final_n| projected onto the basis.  ``leakage``
    is the trace lost to the truncation.
    """
    w = np.asarray(spec.weights)
    if len(finals) != w.size:
        raise ValueError(f"{w.size} weights but {len(finals)} evolved states")
    grid: SpatialGrid = finals[0].grid
    if any(f.grid != grid for f in finals):
        raise ValueError("evolved states live on different grids")

    levels = w.size + margin
    basis = hermite_functions(levels - 1, grid.x - start - transport.distance)
    norms = np.array([f.norm() for f in finals])
    if np.any(np.abs(norms - 1.0) > NORM_TOLERANCE):
        raise ValueError("evolved states must be normalised")
    amps = np.stack([f.amplitudes for f in finals]) / np.sqrt(norms)[:, None]
    A = (basis @ amps.T) * grid.step  # A[k, n] = <phi_k|final_n>
    captured = np.sum(np.abs(A) ** 2 * w)
    leakage = float(max(0.0, 1.0 - captured))
    if leakage > MAX_LEAKAGE:
        raise ValueError(f"basis truncation loses {leakage:.3g} of the trace; raise the margin")

    sqrt_w = np.sqrt(w)
    l1 = np.zeros((levels, w.size))
    l1[: w.size, : w.size] = np.diag(sqrt_w)
    l2 = A * sqrt_w
    return MixedFidelity(_guarded(_fidelity_from_factors(l1, l2)), leakage)
