"""Scenario assembly: distorted controls, initial states, both evolution engines and run reports."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import classical, control as ctl, distortion as dist, metrics, quantum

MODEL_NAMES = ("reference", "derivative", "piecewise", "smoothed", "fourier")
ENGINES = ("analytic", "numeric")
DEFAULT_SEED = 0


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one transport run."""

    distance: float = 10.0
    duration: float = 2 * math.pi
    alpha: float = 1.0
    steps: int = 8
    tau: float | None = None
    fourier_period: float | None = None
    fourier_harmonics: int = dist.DEFAULT_FOURIER_HARMONICS
    fourier_amplitudes: tuple[float, ...] | None = None
    fourier_cosine: bool = False
    seed: int = DEFAULT_SEED
    points: int = quantum.DEFAULT_POINTS
    dt: float | None = None
    control_samples: int = 4097
    classical_step: float | None = None
    level: int = 0
    initial_momentum: float = 0.5
    snapshots: int = 6
    trace_samples: int = 64
    engine: str = "numeric"
    models: tuple[str, ...] = field(default=("reference",))

    def __post_init__(self):
        self.spec  # validates distance and duration
        unknown = set(self.models) - set(MODEL_NAMES)
        if unknown:
            raise ValueError(f"unknown models {sorted(unknown)}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        if self.control_samples < 5 or (self.control_samples - 1) % 2:
            raise ValueError("control_samples must be odd and at least 5")

    @property
    def spec(self) -> ctl.TransportSpec:
        return ctl.TransportSpec(self.distance, self.duration)

    @property
    def control_step(self) -> float:
        return self.duration / (self.control_samples - 1)

    def with_(self, **changes) -> Scenario:
        return replace(self, **changes)

    def distortion(self, name: str):
        if name == "reference":
            return None
        if name == "derivative":
            return dist.DerivativeModel(self.alpha)
        if name == "piecewise":
            return dist.PiecewiseModel(self.steps)
        if name == "smoothed":
            return dist.PiecewiseModel(self.steps, dist.SmoothingKernel(self.tau))
        if name == "fourier":
            period = self.fourier_period or self.duration / 2
            if self.fourier_amplitudes:
                comps = tuple((m + 1, a, 0.0) for m, a in enumerate(self.fourier_amplitudes))
                return dist.FourierModel(comps, period)
            return dist.FourierModel.random(
                period, self.seed, self.fourier_harmonics, self.fourier_cosine
            )
        raise ValueError(f"unknown model {name!r}")

    def control(self, name: str) -> ctl.ControlSignal:
        return dist.apply_model(ctl.make_reference_transport(self.spec), self.distortion(name))

    def profile(self, name: str) -> ctl.ForcedProfile:
        """Closed form for the undistorted path, Volterra quadrature otherwise."""
        if name == "reference":
            return ctl.make_reference_profile(self.spec, self.control_step)
        return ctl.volterra_response(self.control(name), self.control_step)

    def grid(self, names=None) -> quantum.SpatialGrid:
        names = self.models if names is None else names
        lo, hi = min(0.0, self.distance), max(0.0, self.distance)
        for name in names:
            _, d = self.control(name).sample(self.control_samples)
            lo, hi = min(lo, d.min()), max(hi, d.max())
        m = quantum.GRID_MARGIN
        return quantum.SpatialGrid(math.floor(lo - m), math.ceil(hi + m), self.points)

    def resolved(self) -> dict:
        out = asdict(self)
        out["models"] = ",".join(self.models)
        out["fourier_amplitudes"] = (
            None if self.fourier_amplitudes is None
            else ",".join(repr(a) for a in self.fourier_amplitudes)
        )
        if out["fourier_period"] is None:
            out["fourier_period"] = self.duration / 2
        if out["dt"] is None:
            out["dt"] = quantum.default_dt(self.duration)
        if out["classical_step"] is None:
            out["classical_step"] = classical.default_step(self.duration)
        return out


def evolve_level(
    scenario: Scenario, name: str, n: int, times, grid=None, engine=None
) -> list[quantum.WaveFunction]:
    """Eigenstate ``n`` of the initial well evolved to ``times`` under model ``name``."""
    engine = engine or scenario.engine
    grid = grid or scenario.grid([name])
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if engine == "analytic":
        profile = scenario.profile(name)
        return [quantum.analytic_evolve(n, profile, t, grid) for t in times]
    psi0 = quantum.eigenstate(n, grid, 0.0)
    return quantum.numeric_evolve(
        psi0, scenario.control(name), scenario.duration, scenario.dt, times
    )


def final_fidelity(scenario: Scenario, name: str, n: int | None = None, engine=None) -> float:
    n = scenario.level if n is None else n
    (final,) = evolve_level(scenario, name, n, [scenario.duration], engine=engine)
    return metrics.transport_fidelity(final, n, scenario.spec)


def snapshot_times(duration: float, count: int) -> np.ndarray:
    return np.linspace(0.0, duration, count)


@dataclass
class RunReport:
    model: str
    engine: str
    transport_fidelity: float
    final_phase: float
    final_energy: float
    min_instantaneous_fidelity: float
    boundary_residuals: dict
    leakage: float
    resonant: bool
    seed: int
    config_hash: str = ""
    wall_time: float | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["wall_time"] is None:
            del out["wall_time"]
        return out


def run_report(
    scenario: Scenario, name: str, snapshots: list[quantum.WaveFunction] | None = None
) -> tuple[RunReport, metrics.FidelityTrace]:
    """Diagnostics of one model; ``snapshots`` must end at T if given."""
    control = scenario.control(name)
    if snapshots is None:
        times = snapshot_times(scenario.duration, scenario.trace_samples)
        snapshots = evolve_level(scenario, name, scenario.level, times)
    final = snapshots[-1]
    profile = scenario.profile(name)
    trace = metrics.instantaneous_ground_fidelity(snapshots, control)
    resonant = False
    model = scenario.distortion(name)
    if isinstance(model, dist.FourierModel):
        resonant = bool(model.signal(scenario.duration).resonant_components())
    report = RunReport(
        model=name,
        engine=scenario.engine,
        transport_fidelity=metrics.transport_fidelity(final, scenario.level, scenario.spec),
        final_phase=float(profile.phi[-1]),
        final_energy=quantum.expectation(final, "energy", float(control(scenario.duration))),
        min_instantaneous_fidelity=trace.minimum,
        boundary_residuals=profile.boundary_residuals(scenario.distance),
        leakage=max(s.edge_magnitude() for s in snapshots),
        resonant=resonant,
        seed=scenario.seed,
    )
    return report, trace


def superposition_run(scenario: Scenario, name: str, coefficients) -> dict:
    """Transport of sum_n c_n psi_n (coefficients renormalised) under model ``name``.

    Returns the simulated fidelity with the displaced initial superposition
    next to the closed-form prediction for perfect transport.
    """
    c = np.asarray(coefficients, dtype=complex)
    c = c / np.linalg.norm(c)
    grid = scenario.grid([name])
    T = scenario.duration
    if scenario.engine == "analytic":
        finals = [evolve_level(scenario, name, n, [T], grid=grid)[0] for n in range(c.size)]
        amps = sum(cn * f.amplitudes for cn, f in zip(c, finals))
    else:
        psi0 = sum(cn * quantum.eigenstate(n, grid).amplitudes for n, cn in enumerate(c))
        state = quantum.WaveFunction(grid, psi0)
        amps = quantum.numeric_evolve(state, scenario.control(name), T, scenario.dt)[0].amplitudes
    target = sum(
        cn * quantum.eigenstate(n, grid, scenario.distance).amplitudes for n, cn in enumerate(c)
    )
    simulated = abs(np.vdot(target, amps) * grid.step) ** 2
    predicted = metrics.superposition_fidelity(metrics.SuperpositionSpec(tuple(c)), T)
    return {"fidelity": float(simulated), "perfect_transport_prediction": predicted}


def mixture_run(scenario: Scenario, name: str, weights) -> dict:
    """Uhlmann fidelity of an eigenstate mixture; ``("thermal", theta, M)`` is accepted."""
    if isinstance(weights, tuple) and weights and weights[0] == "thermal":
        spec = metrics.thermal_weights(weights[2], weights[1])
    else:
        w = np.asarray(weights, dtype=float)
        spec = metrics.MixtureSpec(tuple(w / w.sum()))
    grid = scenario.grid([name])
    finals = [
        evolve_level(scenario, name, n, [scenario.duration], grid=grid)[0]
        for n in range(len(spec.weights))
    ]
    result = metrics.mixed_state_fidelity(spec, finals, scenario.spec)
    return {"fidelity": result.fidelity, "leakage": result.leakage, "weights": list(spec.weights)}
