"""Small quadrature and differencing helpers shared by the physics modules."""

import numpy as np
from scipy.integrate import cumulative_simpson

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)

DEFAULT_INTERVALS = 4096


def time_grid(duration: float, step: float | None = None) -> np.ndarray:
    """Uniform grid on [0, duration] whose step divides the duration."""
    if step is None:
        n = DEFAULT_INTERVALS
    else:
        if not step > 0:
            raise ValueError(f"grid step must be positive, got {step}")
        n = int(round(duration / step))
        if n < 2 or abs(n * step - duration) > 1e-9 * duration:
            raise ValueError(f"step {step} does not divide duration {duration}")
    return np.linspace(0.0, duration, n + 1)


def check_uniform(times: np.ndarray) -> float:
    """Return the step of a uniform ascending grid, raising otherwise."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 3:
        raise ValueError("sample grid needs at least three points")
    steps = np.diff(times)
    h = (times[-1] - times[0]) / (times.size - 1)
    if h <= 0 or np.max(np.abs(steps - h)) > 1e-9 * max(1.0, abs(times[-1])):
        raise ValueError("sample grid must be uniform and strictly increasing")
    return h


def split_edges(times: np.ndarray, breakpoints) -> tuple[np.ndarray, np.ndarray]:
    """Merge breakpoints into a grid.

    Breakpoints within rounding of a grid node are absorbed by that node, so
    the returned index array locates every grid time inside ``edges``.
    """
    times = np.asarray(times, dtype=float)
    tol = 1e-12 * max(1.0, abs(times[-1]))
    extra = []
    for b in breakpoints:
        if times[0] < b < times[-1]:
            i = np.searchsorted(times, b)
            near = min(abs(times[i] - b), abs(times[i - 1] - b))
            if near > tol:
                extra.append(b)
    if not extra:
        return times, np.arange(times.size)
    edges = np.union1d(times, extra)
    return edges, np.searchsorted(edges, times)


def gauss_points(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Interior Gauss-Legendre nodes and weights for every interval of ``edges``.

    Shapes are (intervals, 4). No node touches an interval end, so integrands
    with jumps located on ``edges`` are integrated without one-sided ambiguity.
    """
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * _GL_NODES, half * _GL_WEIGHTS


def cumulative_gauss(f, edges: np.ndarray) -> np.ndarray:
    """Cumulative integral of a vectorised callable at each edge (starts at 0)."""
    pts, w = gauss_points(edges)
    return np.concatenate(([0.0], np.cumsum(np.sum(w * f(pts), axis=1))))


def cumulative_simpson_uniform(y: np.ndarray, h: float) -> np.ndarray:
    return cumulative_simpson(y, dx=h, initial=0.0)


def derivative4(y: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite-difference derivative of uniform samples."""
    y = np.asarray(y, dtype=float)
    if y.size < 5:
        raise ValueError("need at least five samples for the 4th-order stencil")
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    return d
