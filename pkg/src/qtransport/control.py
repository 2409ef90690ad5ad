"""Transport waveforms, their forced response and the Volterra relation between them.

Units are those of the oscillator: lengths in sqrt(hbar/m omega), times in
1/omega, so one trap period is 2 pi.  A *control* is the well-centre path
D(t); the *forced response* F(t) = int_0^t D(s) sin(t - s) ds is where a
particle starting at rest in the well ends up being dragged to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from ._numerics import (
    check_uniform,
    cumulative_gauss,
    cumulative_simpson_uniform,
    derivative4,
    split_edges,
    time_grid,
)

__all__ = [
    "TransportSpec",
    "ControlSignal",
    "HarmonicControl",
    "PiecewiseControl",
    "SampledControl",
    "SumControl",
    "ForcedProfile",
    "make_reference_transport",
    "make_reference_profile",
    "reference_coefficients",
    "volterra_response",
    "control_from_profile",
    "kinematic_phase",
    "commensurate_time",
]


@dataclass(frozen=True)
class TransportSpec:
    """Move a particle by ``distance`` in time ``duration`` (T = 2 pi is one trap period)."""

    distance: float
    duration: float

    def __post_init__(self):
        if not math.isfinite(self.distance):
            raise ValueError(f"distance must be finite, got {self.distance}")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"duration must be positive, got {self.duration}")


def commensurate_time(k: int) -> float:
    """Duration of ``k`` whole trap periods."""
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return 2.0 * math.pi * k


# --------------------------------------------------------------------------
# control signals


class ControlSignal:
    """A well-centre path on [0, duration].

    Subclasses provide ``__call__`` (right-continuous value), ``left`` (the
    left limit, which differs only at ``breakpoints``) and ``rate`` (the time
    derivative wherever it exists).
    """

    duration: float
    breakpoints: tuple = ()

    def __call__(self, t):
        raise NotImplementedError

    def left(self, t):
        return self(t)

    def rate(self, t):
        raise NotImplementedError

    def sample(self, num: int = 4097) -> tuple[np.ndarray, np.ndarray]:
        t = np.linspace(0.0, self.duration, num)
        return t, np.asarray(self(t), dtype=float)

    def to_sampled(self, num: int = 4097) -> SampledControl:
        return SampledControl(*self.sample(num))

    def __add__(self, other: ControlSignal) -> ControlSignal:
        return SumControl((self, other))


@dataclass(frozen=True)
class HarmonicControl(ControlSignal):
    """offset + slope*t + sum_j [s_j sin(w_j t) + c_j cos(w_j t)].

    ``components`` holds (angular frequency, sine amplitude, cosine amplitude)
    triples.  The same form describes closed-form forced responses.
    """

    duration: float
    slope: float = 0.0
    offset: float = 0.0
    components: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "components", tuple(tuple(float(v) for v in c) for c in self.components)
        )

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.offset + self.slope * t
        for w, s, c in self.components:
            out = out + s * np.sin(w * t) + c * np.cos(w * t)
        return out

    def derivative(self) -> HarmonicControl:
        return HarmonicControl(
            self.duration,
            slope=0.0,
            offset=self.slope,
            components=tuple((w, -w * c, w * s) for w, s, c in self.components),
        )

    def rate(self, t):
        return self.derivative()(t)

    def scaled(self, factor: float) -> HarmonicControl:
        return HarmonicControl(
            self.duration,
            slope=factor * self.slope,
            offset=factor * self.offset,
            components=tuple((w, factor * s, factor * c) for w, s, c in self.components),
        )

    def __add__(self, other):
        if isinstance(other, HarmonicControl):
            return HarmonicControl(
                self.duration,
                slope=self.slope + other.slope,
                offset=self.offset + other.offset,
                components=self.components + other.components,
            )
        return SumControl((self, other))

    def resonant_components(self, tol: float = 1e-9) -> list[tuple[float, float, float]]:
        """Components oscillating at the trap frequency (secular driving)."""
        return [c for c in self.components if abs(abs(c[0]) - 1.0) < tol and (c[1] or c[2])]


@dataclass(frozen=True)
class PiecewiseControl(ControlSignal):
    """Stepwise path holding ``values[n]`` around node t_n = n T / N.

    Segment n is the half-open interval [s_n, s_{n+1}) with s_n = (n - 1/2) T/N,
    clipped to [0, T] and closed at T.  With ``tau`` set, each segment relaxes
    exponentially from the previous level: value_n - exp(-(t - s_n)/tau) * jump_n.
    """

    duration: float
    values: tuple[float, ...]
    tau: float | None = None
    starts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 3:
            raise ValueError("piecewise control needs N >= 2 steps (N + 1 node values)")
        if self.tau is not None and not self.tau > 0:
            raise ValueError(f"smoothing time constant must be positive, got {self.tau}")
        object.__setattr__(self, "values", vals)
        n = len(vals) - 1
        inner = (np.arange(1, n + 1) - 0.5) * self.duration / n
        object.__setattr__(self, "starts", np.concatenate(([0.0], inner)))

    @property
    def steps(self) -> int:
        return len(self.values) - 1

    @property
    def breakpoints(self) -> tuple:
        return tuple(self.starts[1:])

    def _eval(self, t, side):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.starts[1:], t, side=side)
        v = np.asarray(self.values)
        out = v[idx]
        if self.tau is not None:
            prev = v[np.maximum(idx - 1, 0)]
            out = out - np.exp(-(t - self.starts[idx]) / self.tau) * (out - prev)
        return out

    def __call__(self, t):
        return self._eval(t, "right")

    def left(self, t):
        return self._eval(t, "left")

    def rate(self, t):
        t = np.asarray(t, dtype=float)
        if self.tau is None:
            return np.zeros_like(t)
        idx = np.searchsorted(self.starts[1:], t, side="right")
        v = np.asarray(self.values)
        jump = v[idx] - v[np.maximum(idx - 1, 0)]
        return jump / self.tau * np.exp(-(t - self.starts[idx]) / self.tau)


class SampledControl(ControlSignal):
    """Uniform samples on [0, T], interpolated by a cubic spline."""

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.size == 0 or times.shape != values.shape:
            raise ValueError("times and values must be non-empty and of equal length")
        self.step = check_uniform(times)
        if abs(times[0]) > 1e-12:
            raise ValueError("sampled control must start at t = 0")
        self.times = times
        self.values = values
        self.duration = float(times[-1])
        self._spline = CubicSpline(times, values)

    def __call__(self, t):
        return self._spline(np.asarray(t, dtype=float))

    def rate(self, t):
        return self._spline(np.asarray(t, dtype=float), 1)

    def sample_rate(self) -> np.ndarray:
        return derivative4(self.values, self.step)

    def __repr__(self):
        return f"SampledControl(samples={self.times.size}, duration={self.duration:.6g})"


class SumControl(ControlSignal):
    def __init__(self, parts):
        self.parts = tuple(parts)
        durations = {p.duration for p in self.parts}
        if len(durations) != 1:
            raise ValueError("summed controls must share a duration")
        self.duration = durations.pop()
        self.breakpoints = tuple(sorted({b for p in self.parts for b in p.breakpoints}))

    def __call__(self, t):
        return sum(p(t) for p in self.parts)

    def left(self, t):
        return sum(p.left(t) for p in self.parts)

    def rate(self, t):
        return sum(p.rate(t) for p in self.parts)


# --------------------------------------------------------------------------
# forced response


@dataclass(frozen=True, eq=False)
class ForcedProfile:
    """F and its first three derivatives plus the kinematic phase on a time grid.

    ``exact`` optionally carries F in closed form; evaluation off the grid then
    uses it instead of interpolation.
    """

    times: np.ndarray
    F: np.ndarray
    dF: np.ndarray
    d2F: np.ndarray | None
    d3F: np.ndarray | None
    phi: np.ndarray
    exact: HarmonicControl | None = None

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    def _check_time(self, t):
        t = np.asarray(t, dtype=float)
        T = self.duration
        if np.any(t < -1e-12 * T) or np.any(t > T * (1 + 1e-12)):
            raise ValueError(f"time outside the profile domain [0, {T}]")
        return np.clip(t, 0.0, T)

    def evaluate(self, t) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(F, F', F'', phi) at arbitrary times in [0, T]."""
        t = self._check_time(t)
        if self.exact is not None:
            d1 = self.exact.derivative()
            d2 = d1.derivative()
            return self.exact(t), d1(t), d2(t), self._exact_phase(t)
        return (
            CubicHermiteSpline(self.times, self.F, self.dF)(t),
            CubicHermiteSpline(self.times, self.dF, self.d2F)(t),
            np.interp(t, self.times, self.d2F),
            CubicHermiteSpline(self.times, self.phi, _phase_rate(self.F, self.dF, self.d2F))(t),
        )

    def _exact_phase(self, t):
        t = np.atleast_1d(t)
        i = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, self.times.size - 1)
        out = np.empty_like(t)
        for k, (ti, a) in enumerate(zip(t, self.times[i])):
            edges = np.linspace(a, ti, 3) if ti > a else np.array([a, a])
            out[k] = self.phi[i[k]] + cumulative_gauss(self._exact_phase_rate, edges)[-1]
        return out if out.size > 1 else out[0]

    def _exact_phase_rate(self, t):
        d1 = self.exact.derivative()
        d2 = d1.derivative()
        return _phase_rate(self.exact(t), d1(t), d2(t))

    def boundary_residuals(self, distance: float) -> dict[str, float]:
        """Deviation from the perfect-transport values at both ends."""
        out = {}
        for name, arr, target in (
            ("F", self.F, distance),
            ("dF", self.dF, 0.0),
            ("d2F", self.d2F, 0.0),
            ("d3F", self.d3F, 0.0),
        ):
            if arr is None:
                continue
            out[f"{name}(0)"] = float(arr[0])
            out[f"{name}(T)"] = float(arr[-1] - target)
        return out


def _phase_rate(F, dF, d2F):
    return 2.0 * F * d2F + d2F**2 + dF**2


def reference_coefficients(harmonics: int = 2) -> np.ndarray:
    """Sine amplitudes a_k (per unit distance) of F = dx [t/T + sum a_k sin(2 pi k t/T)].

    F'(0) and F'''(0) must vanish; all other end conditions hold automatically
    for a ramp plus full-period sines.  With more than two harmonics the extra
    freedom is fixed by also zeroing the higher odd derivatives at the ends.
    """
    if harmonics < 2:
        raise ValueError("at least two harmonics are needed")
    k = np.arange(1, harmonics + 1, dtype=float)
    # row j: d^(2j+1)/dt^(2j+1) at t=0, common factor (2 pi/T)^(2j+1) removed
    A = np.array([(-1.0) ** j * k ** (2 * j + 1) for j in range(harmonics)])
    rhs = np.zeros(harmonics)
    rhs[0] = -1.0 / (2.0 * np.pi)
    return np.linalg.solve(A, rhs)


def make_reference_transport(spec: TransportSpec) -> HarmonicControl:
    """The ramp-plus-two-sines transport function d_o(t)."""
    T, dx = spec.duration, spec.distance
    pi = math.pi
    a = 8 * pi / (3 * T**2) - 2 / (3 * pi)
    b = 1 / (12 * pi) - 4 * pi / (3 * T**2)
    return HarmonicControl(
        T,
        slope=dx / T,
        components=((2 * pi / T, dx * a, 0.0), (4 * pi / T, dx * b, 0.0)),
    )


def make_reference_profile(
    spec: TransportSpec, step: float | None = None, harmonics: int = 2
) -> ForcedProfile:
    """Closed-form forced response meeting all perfect-transport end conditions."""
    T, dx = spec.duration, spec.distance
    coeffs = reference_coefficients(harmonics)
    exact = HarmonicControl(
        T,
        slope=dx / T,
        components=tuple(
            (2 * math.pi * k / T, dx * a, 0.0) for k, a in enumerate(coeffs, start=1)
        ),
    )
    return _profile_from_exact(exact, time_grid(T, step))


def _profile_from_exact(exact: HarmonicControl, t: np.ndarray) -> ForcedProfile:
    d1 = exact.derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    rate = lambda s: _phase_rate(exact(s), d1(s), d2(s))  # noqa: E731
    phi = cumulative_gauss(rate, t)
    return ForcedProfile(t, exact(t), d1(t), d2(t), d3(t), phi, exact=exact)


def volterra_response(control: ControlSignal, step: float | None = None) -> ForcedProfile:
    """Forced response of an arbitrary control by quadrature.

    F(t) = sin t C(t) - cos t S(t) with C, S the running integrals of
    D cos and D sin, accumulated with interior Gauss-Legendre nodes on every
    grid interval (split further at the control's breakpoints).
    """
    if isinstance(control, SampledControl) and step is None:
        t = control.times
    else:
        t = time_grid(control.duration, step)
    edges, idx = split_edges(t, control.breakpoints)

    C = cumulative_gauss(lambda s: control(s) * np.cos(s), edges)[idx]
    S = cumulative_gauss(lambda s: control(s) * np.sin(s), edges)[idx]
    sin_t, cos_t = np.sin(t), np.cos(t)
    F = sin_t * C - cos_t * S
    dF = cos_t * C + sin_t * S

    D = np.asarray(control(t), dtype=float)
    d2F = D - F
    d3F = np.asarray(control.rate(t), dtype=float) - dF

    # phi' = 2 F F'' + F''^2 + F'^2 = F'^2 - F^2 + D^2; the D^2 part may jump
    h = t[1] - t[0]
    phi = cumulative_simpson_uniform(dF**2 - F**2, h)
    phi = phi + cumulative_gauss(lambda s: control(s) ** 2, edges)[idx]
    return ForcedProfile(t, F, dF, d2F, d3F, phi)


def control_from_profile(profile: ForcedProfile) -> ControlSignal:
    """Invert the Volterra relation: D = F'' + F."""
    if profile.exact is not None:
        return profile.exact + profile.exact.derivative().derivative()
    if profile.d2F is None:
        raise ValueError("profile has no second derivative")
    return SampledControl(profile.times, profile.d2F + profile.F)


def kinematic_phase(profile: ForcedProfile, t: float) -> float:
    """Accumulated phase phi(t) = int_0^t (2 F F'' + F''^2 + F'^2)."""
    T = profile.duration
    if not (-1e-12 * T <= t <= T * (1 + 1e-12)):
        raise ValueError(f"t = {t} outside [0, {T}]")
    return float(profile.evaluate(t)[3])
