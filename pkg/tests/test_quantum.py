import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtransport.classical import integrate_trajectory
from qtransport.control import (
    HarmonicControl,
    TransportSpec,
    make_reference_profile,
    make_reference_transport,
    volterra_response,
)
from qtransport.distortion import FourierModel, PiecewiseModel, apply_model
from qtransport.quantum import (
    GridLeakageError,
    SpatialGrid,
    WaveFunction,
    analytic_evolve,
    default_dt,
    eigenstate,
    expectation,
    hermite_functions,
    numeric_evolve,
    translate,
)

PI = math.pi
T0 = 2 * PI


@pytest.fixture(scope="module")
def grid():
    return SpatialGrid(-12.0, 22.0, 1024)


# -- grid and eigenstates


@pytest.mark.parametrize("points", [100, 255, 384, 0])
def test_grid_rejects_bad_points(points):
    with pytest.raises(ValueError):
        SpatialGrid(-1.0, 1.0, points)


def test_grid_geometry():
    g = SpatialGrid(-8.0, 8.0, 256)
    assert g.step == 16 / 256
    assert g.x[0] == -8.0 and g.x[-1] == pytest.approx(8.0 - g.step)
    assert g.doubled().points == 512 and g.doubled().xmin == -8.0
    with pytest.raises(ValueError):
        SpatialGrid(1.0, 1.0, 256)


def test_grid_for_transport_covers_path():
    d = apply_model(make_reference_transport(TransportSpec(10.0, T0)), PiecewiseModel(8))
    g = SpatialGrid.for_transport(10.0, d)
    assert g.xmin <= -12 and g.xmax >= 22 and g.points == 4096


def test_ground_state(grid):
    psi = eigenstate(0, grid)
    assert np.allclose(psi.amplitudes, PI**-0.25 * np.exp(-0.5 * grid.x**2), atol=1e-15)
    assert psi.norm() == pytest.approx(1.0, abs=1e-10)


def test_orthonormality(grid):
    states = [eigenstate(n, grid, 1.3) for n in range(11)]
    gram = np.array([[a.overlap(b) for b in states] for a in states])
    assert np.max(np.abs(gram - np.eye(11))) < 1e-9


def test_hermite_recurrence_against_polynomials():
    # oracle: physicists' Hermite polynomials from numpy, fine for small n
    y = np.linspace(-4, 4, 33)
    ours = hermite_functions(8, y)
    for n in range(9):
        c = np.zeros(n + 1)
        c[n] = 1
        H = np.polynomial.hermite.hermval(y, c)
        ref = H * np.exp(-(y**2) / 2) / math.sqrt(2.0**n * math.factorial(n) * math.sqrt(PI))
        assert np.allclose(ours[n], ref, atol=1e-12)


@pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 30])
def test_static_energy(n, grid):
    assert expectation(eigenstate(n, grid), "energy") == pytest.approx(n + 0.5, abs=1e-8)


def test_ground_state_at_rest(grid):
    psi = eigenstate(0, grid)
    assert abs(expectation(psi, "position")) < 1e-10
    assert abs(expectation(psi, "momentum")) < 1e-10


def test_eigenstate_errors(grid):
    with pytest.raises(ValueError):
        eigenstate(61, grid)
    with pytest.raises(ValueError):
        eigenstate(-1, grid)
    with pytest.raises(ValueError):
        eigenstate(0, grid, center=-10.0)


def test_expectation_errors(grid):
    psi = eigenstate(0, grid)
    with pytest.raises(ValueError):
        expectation(WaveFunction(grid, 2 * psi.amplitudes), "position")
    with pytest.raises(ValueError):
        expectation(psi, "spin")


@settings(max_examples=20, deadline=None)
@given(st.floats(-5, 5))
def test_spectral_translation_is_exact(shift):
    g = SpatialGrid(-14.0, 14.0, 512)
    moved = translate(eigenstate(3, g), shift)
    assert np.max(np.abs(moved.amplitudes - eigenstate(3, g, shift).amplitudes)) < 1e-10


# -- closed-form evolution


@pytest.mark.parametrize("n", [0, 1, 4])
def test_analytic_at_zero_is_eigenstate(n, grid):
    prof = make_reference_profile(TransportSpec(10.0, T0))
    psi = analytic_evolve(n, prof, 0.0, grid)
    assert np.max(np.abs(psi.amplitudes - eigenstate(n, grid).amplitudes)) < 1e-12


def test_analytic_position_follows_F(grid):
    prof = make_reference_profile(TransportSpec(10.0, T0))
    for t in np.linspace(0, T0, 9):
        psi = analytic_evolve(0, prof, t, grid)
        F = float(prof.evaluate(t)[0])
        assert expectation(psi, "position") == pytest.approx(F, abs=1e-10)
        assert np.sum(grid.x * np.abs(psi.amplitudes) ** 2) * grid.step == pytest.approx(F, abs=1e-10)


@pytest.mark.parametrize("n", [0, 1, 3])
def test_analytic_final_state_and_phase(n, grid):
    spec = TransportSpec(10.0, T0)
    prof = make_reference_profile(spec)
    final = analytic_evolve(n, prof, T0, grid)
    target = eigenstate(n, grid, 10.0)
    ov = target.overlap(final)
    assert abs(ov) == pytest.approx(1.0, abs=1e-10)
    expected = -((n + 0.5) * T0 + 0.5 * prof.phi[-1])
    diff = np.angle(ov * np.exp(-1j * expected))
    assert abs(diff) < 1e-4


def test_analytic_leakage_detected():
    g = SpatialGrid(-10.0, 10.0, 256)
    prof = make_reference_profile(TransportSpec(10.0, T0))
    with pytest.raises(GridLeakageError):
        analytic_evolve(0, prof, T0, g)


# -- split-operator evolution


def test_default_dt():
    assert default_dt(T0) == T0 / 2**16


def test_numeric_stationary_state():
    g = SpatialGrid(-12.0, 12.0, 512)
    psi0 = eigenstate(1, g)
    times = np.linspace(0, 3.0, 7)
    snaps = numeric_evolve(psi0, HarmonicControl(3.0), 3.0, 3.0 / 512, times)
    for s, t in zip(snaps, times):
        assert s.time == pytest.approx(t)
        assert abs(psi0.overlap(s)) == pytest.approx(1.0, abs=1e-8)
    ov = psi0.overlap(snaps[-1])
    # phase exp(-i E_1 t) up to the O(dt^2) splitting error
    assert np.angle(ov * np.exp(1.5j * 3.0)) == pytest.approx(0.0, abs=1e-4)


def test_numeric_matches_analytic_and_conserves_norm(grid):
    spec = TransportSpec(10.0, T0)
    prof = make_reference_profile(spec)
    times = np.linspace(0, T0, 17)
    snaps = numeric_evolve(eigenstate(0, grid), make_reference_transport(spec), T0, T0 / 2**13, times)
    for s in snaps:
        assert abs(s.norm() - 1.0) < 1e-8
        ref = analytic_evolve(0, prof, s.time, grid)
        assert abs(ref.overlap(s)) ** 2 > 1 - 1e-6


def test_numeric_second_order_convergence(grid):
    spec = TransportSpec(10.0, T0)
    prof = make_reference_profile(spec)
    ref = analytic_evolve(0, prof, T0, grid).amplitudes
    errs = []
    for dt in (T0 / 2**10, T0 / 2**11):
        (psi,) = numeric_evolve(eigenstate(0, grid), make_reference_transport(spec), T0, dt)
        errs.append(np.sqrt(np.sum(np.abs(psi.amplitudes - ref) ** 2) * grid.step))
    assert errs[0] / errs[1] >= 3.5


def test_numeric_steps_align_with_jumps(grid):
    d = apply_model(make_reference_transport(TransportSpec(10.0, 5.0)), PiecewiseModel(8))
    prof = volterra_response(d)
    (psi,) = numeric_evolve(eigenstate(0, grid), d, 5.0, 5.0 / 2**11)
    assert abs(analytic_evolve(0, prof, 5.0, grid).overlap(psi)) ** 2 > 1 - 1e-6


def test_numeric_input_validation(grid):
    psi0 = eigenstate(0, grid)
    d = HarmonicControl(1.0)
    with pytest.raises(ValueError):
        numeric_evolve(psi0, d, 1.0, dt=0.0)
    with pytest.raises(ValueError):
        numeric_evolve(psi0, d, 2.0)
    with pytest.raises(ValueError):
        numeric_evolve(psi0, d, 1.0, 0.01, [0.5, 0.2])


def test_numeric_leakage_raises():
    g = SpatialGrid(-8.0, 8.0, 256)
    with pytest.raises(GridLeakageError):
        numeric_evolve(eigenstate(0, g), make_reference_transport(TransportSpec(10.0, T0)), T0, T0 / 1024)


def test_ehrenfest_against_classical(grid):
    d = apply_model(make_reference_transport(TransportSpec(10.0, T0)), FourierModel.random(1.3, seed=0))
    times = np.linspace(0, T0, 9)
    psi0 = translate(eigenstate(0, grid), 0.7)
    snaps = numeric_evolve(psi0, d, T0, T0 / 2**13, times)
    x0, p0 = expectation(snaps[0], "position"), expectation(snaps[0], "momentum")
    traj = integrate_trajectory(x0, p0, d, step=T0 / 2**13)
    idx = np.searchsorted(traj.times, times - 1e-12)
    for s, i in zip(snaps, idx):
        assert expectation(s, "position") == pytest.approx(traj.x[i], abs=1e-5)
        assert expectation(s, "momentum") == pytest.approx(traj.p[i], abs=1e-5)


def test_grid_doubling_stability():
    spec = TransportSpec(10.0, T0)
    d = make_reference_transport(spec)
    fids = []
    for g in (SpatialGrid(-12.0, 22.0, 512), SpatialGrid(-12.0, 22.0, 1024)):
        (psi,) = numeric_evolve(eigenstate(0, g), d, T0, T0 / 2**10)
        fids.append(abs(eigenstate(0, g, 10.0).overlap(psi)) ** 2)
    assert abs(fids[0] - fids[1]) < 1e-9
