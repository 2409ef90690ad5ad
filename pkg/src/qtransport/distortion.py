"""Control distortions: rate-proportional overshoot, stepwise sampling and periodic pickup.

Each model maps an intended well path d(t) to the path D[d](t) the well
actually follows.  Closed-form inputs give closed-form outputs where the
model allows it; sampled inputs stay sampled on their own time grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .control import (
    ControlSignal,
    HarmonicControl,
    PiecewiseControl,
    SampledControl,
    SumControl,
)

__all__ = [
    "DerivativeModel",
    "SmoothingKernel",
    "PiecewiseModel",
    "FourierModel",
    "ResonanceWarning",
    "apply_derivative_model",
    "apply_piecewise_model",
    "apply_smoothed_piecewise",
    "apply_fourier_model",
    "apply_model",
]

DEFAULT_FOURIER_HARMONICS = 4


class ResonanceWarning(UserWarning):
    """A periodic distortion component drives the trap at its own frequency."""


@dataclass(frozen=True)
class DerivativeModel:
    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")


@dataclass(frozen=True)
class SmoothingKernel:
    """Exponential relaxation q(s) = exp(-s / tau); ``tau=None`` means T/(8N)."""

    tau: float | None = None
    shape: str = "exponential"

    def __post_init__(self):
        if self.shape != "exponential":
            raise ValueError(f"unsupported smoothing shape {self.shape!r}")
        if self.tau is not None and not self.tau > 0:
            raise ValueError(f"smoothing time constant must be positive, got {self.tau}")

    def resolve(self, duration: float, steps: int) -> float:
        return self.tau if self.tau is not None else duration / (8.0 * steps)

    def __call__(self, s, tau: float):
        return np.exp(-np.asarray(s, dtype=float) / tau)


@dataclass(frozen=True)
class PiecewiseModel:
    steps: int
    smoothing: SmoothingKernel | None = None

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"piecewise model needs N >= 2 steps, got {self.steps}")


@dataclass(frozen=True)
class FourierModel:
    """g(t) = sum_m [A_m sin(2 pi m t / P) + B_m cos(2 pi m t / P)].

    ``components`` holds (m, A_m, B_m).  ``seed`` records where random
    amplitudes came from; it is None for explicit amplitudes.
    """

    components: tuple[tuple[int, float, float], ...]
    period: float
    seed: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.period) and self.period > 0):
            raise ValueError(f"period must be positive, got {self.period}")
        comps = tuple((int(m), float(a), float(b)) for m, a, b in self.components)
        for m, a, b in comps:
            if m < 1 or not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError(f"bad Fourier component {(m, a, b)}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def random(
        cls,
        period: float,
        seed: int,
        harmonics: int = DEFAULT_FOURIER_HARMONICS,
        include_cosine: bool = False,
    ) -> FourierModel:
        """Amplitudes drawn uniformly from [-1, 1] with a PCG64 stream seeded by ``seed``."""
        rng = np.random.Generator(np.random.PCG64(seed))
        sines = rng.uniform(-1.0, 1.0, harmonics)
        cosines = rng.uniform(-1.0, 1.0, harmonics) if include_cosine else np.zeros(harmonics)
        comps = tuple((m + 1, sines[m], cosines[m]) for m in range(harmonics))
        return cls(comps, period, seed)

    def signal(self, duration: float) -> HarmonicControl:
        return HarmonicControl(
            duration,
            components=tuple(
                (2 * math.pi * m / self.period, a, b) for m, a, b in self.components
            ),
        )


def apply_derivative_model(control: ControlSignal, model: DerivativeModel) -> ControlSignal:
    """D = d + alpha d'."""
    if model.alpha == 0:
        return control
    if isinstance(control, HarmonicControl):
        return control + control.derivative().scaled(model.alpha)
    if isinstance(control, SampledControl):
        return SampledControl(control.times, control.values + model.alpha * control.sample_rate())
    if isinstance(control, SumControl):
        parts = [apply_derivative_model(p, model) for p in control.parts]
        return SumControl(parts)
    if control.breakpoints:
        raise ValueError("derivative model is undefined for controls with jumps")
    raise TypeError(f"cannot differentiate {type(control).__name__}")


def _node_values(control: ControlSignal, steps: int) -> np.ndarray:
    nodes = np.arange(steps + 1) * control.duration / steps
    nodes[-1] = control.duration
    return np.asarray(control(nodes), dtype=float)


def _resample_like(original: ControlSignal, result: ControlSignal) -> ControlSignal:
    if isinstance(original, SampledControl):
        return SampledControl(original.times, result(original.times))
    return result


def apply_piecewise_model(control: ControlSignal, model: PiecewiseModel) -> ControlSignal:
    """Hold d(t_n) on the segment centred at t_n = n T / N."""
    result = PiecewiseControl(control.duration, tuple(_node_values(control, model.steps)))
    return _resample_like(control, result)


def apply_smoothed_piecewise(control: ControlSignal, model: PiecewiseModel) -> ControlSignal:
    """Stepwise path whose levels relax exponentially from the previous one."""
    if model.smoothing is None:
        raise ValueError("smoothed piecewise model needs a smoothing kernel")
    tau = model.smoothing.resolve(control.duration, model.steps)
    if not tau > 0:
        raise ValueError(f"smoothing time constant must be positive, got {tau}")
    result = PiecewiseControl(
        control.duration, tuple(_node_values(control, model.steps)), tau=tau
    )
    return _resample_like(control, result)


def apply_fourier_model(
    control: ControlSignal, model: FourierModel | None = None, *, period=None, seed=None
) -> ControlSignal:
    """D = d + g with g a finite Fourier series.

    Either pass a ready ``model`` or a ``period`` plus ``seed`` to draw the
    default number of random amplitudes.  A component at the trap frequency
    triggers a ``ResonanceWarning``.
    """
    if model is None:
        if seed is None or period is None:
            raise ValueError("need explicit Fourier components or a period and seed")
        model = FourierModel.random(period, seed)
    if not model.components:
        raise ValueError("Fourier model has no components")
    g = model.signal(control.duration)
    if g.resonant_components():
        warnings.warn(
            f"Fourier component at the trap frequency (period {model.period}); "
            "its response grows secularly",
            ResonanceWarning,
            stacklevel=2,
        )
    if isinstance(control, SampledControl):
        return SampledControl(control.times, control.values + g(control.times))
    return control + g


def apply_model(control: ControlSignal, model) -> ControlSignal:
    """Dispatch on the model type; ``None`` returns the control unchanged."""
    if model is None:
        return control
    if isinstance(model, DerivativeModel):
        return apply_derivative_model(control, model)
    if isinstance(model, PiecewiseModel):
        if model.smoothing is not None:
            return apply_smoothed_piecewise(control, model)
        return apply_piecewise_model(control, model)
    if isinstance(model, FourierModel):
        return apply_fourier_model(control, model)
    raise TypeError(f"unknown distortion model {model!r}")
