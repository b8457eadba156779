import csv
import math

import numpy as np
import pytest

from denguevc import (
    BASELINE,
    DomainError,
    ModelParams,
    SeasonalFactor,
    SolverConfig,
    StateVector,
    StiffnessError,
    detect_steady_state,
    disease_free_populations,
    endemic_equilibrium,
    integrate,
)
from denguevc.solver import Trajectory, sample_times, solve

DFP = disease_free_populations(BASELINE)


def disease_free(p=BASELINE, **kw):
    d = disease_free_populations(p)
    base = dict(S_H=d.N_H0, I_H=0.0, R_H=0.0, S_M=d.N_M, L_M=0.0, I_M=0.0, S_E=d.N_E, I_E=0.0)
    base.update(kw)
    return StateVector(**base)


@pytest.mark.parametrize("method", ["rk45", "rk4"])
def test_equilibrium_persists(method):
    eq = endemic_equilibrium(BASELINE).state
    traj = integrate(eq, BASELINE, (0.0, 1000.0), SolverConfig(method=method, step=0.1))
    dev = np.abs(traj.states - eq.to_array()) / eq.to_array()
    assert dev.max() < 1e-3


def test_disease_free_subspace_is_invariant():
    traj = integrate(disease_free(), BASELINE, (0.0, 500.0))
    for name in ("I_H", "R_H", "L_M", "I_M", "I_E"):
        assert np.all(traj.column(name) == 0.0)


def test_adaptive_matches_exact_exponential_decay():
    cfg = SolverConfig(rtol=1e-10, atol=1e-12)
    sol = solve(lambda t, y: -0.3 * y, np.array([2.0]), np.array([0.0, 1.0, 5.0]), cfg)
    np.testing.assert_allclose(sol[:, 0], 2.0 * np.exp(-0.3 * np.array([0.0, 1.0, 5.0])), rtol=1e-8)


def test_rk4_fourth_order_on_linear_problem():
    errs = []
    for h in (0.2, 0.1, 0.05):
        y = solve(lambda t, y: -y, np.array([1.0]), np.array([0.0, 2.0]), SolverConfig(method="rk4", step=h))
        errs.append(abs(y[-1, 0] - math.exp(-2.0)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.8)


def test_rk4_and_adaptive_agree():
    start = disease_free(S_H=DFP.N_H0 - 5, I_H=5.0)
    a = integrate(start, BASELINE, (0.0, 200.0), SolverConfig(method="rk4", step=0.05))
    b = integrate(start, BASELINE, (0.0, 200.0), SolverConfig(rtol=1e-10, atol=1e-9))
    np.testing.assert_allclose(a.states, b.states, rtol=1e-6, atol=1e-8)


def test_egg_total_stays_below_capacity():
    start = disease_free(S_E=0.5 * BASELINE.kappa_E, S_M=10.0, I_H=3.0)
    traj = integrate(start, BASELINE, (0.0, 400.0), SolverConfig(output_every=0.5))
    assert np.all(traj.N_E <= BASELINE.kappa_E)
    assert np.all(traj.states >= 0)


def test_stays_nonnegative_from_extreme_start():
    start = StateVector(1e3, 1e3, 0.0, 1e8, 0.0, 1e8, 0.0, 9e7)
    traj = integrate(start, BASELINE, (0.0, 100.0))
    assert np.all(traj.states >= 0)


def test_output_times_are_hit_exactly():
    traj = integrate(disease_free(), BASELINE, (0.0, 10.0), t_eval=[0.0, 0.3, 7.7, 10.0])
    np.testing.assert_array_equal(traj.times, [0.0, 0.3, 7.7, 10.0])
    np.testing.assert_array_equal(sample_times(0.0, 2.5, 1.0), [0.0, 1.0, 2.0, 2.5])


def test_invalid_inputs():
    with pytest.raises(DomainError):
        integrate(disease_free(I_M=-1.0), BASELINE, (0.0, 1.0))
    with pytest.raises(DomainError):
        integrate(StateVector(0, 0, 0, 1, 0, 0, 1, 0), BASELINE, (0.0, 1.0))
    with pytest.raises(DomainError):
        SolverConfig(method="euler")
    with pytest.raises(DomainError):
        sample_times(5.0, 1.0, 1.0)


def test_step_collapse_raises_stiffness_error():
    cfg = SolverConfig(rtol=1e-12, atol=1e-12, first_step=1.0, min_step=0.5)
    with pytest.raises(StiffnessError):
        solve(lambda t, y: -50.0 * y, np.array([1.0]), np.array([0.0, 10.0]), cfg)


def test_steady_state_detection():
    eq = endemic_equilibrium(BASELINE).state
    const = Trajectory(np.arange(0.0, 400.0), np.tile(eq.to_array(), (400, 1)), BASELINE)
    ok, mean = detect_steady_state(const)
    assert ok
    np.testing.assert_allclose(mean.to_array(), eq.to_array(), rtol=1e-14)
    short = Trajectory(np.arange(0.0, 100.0), np.tile(eq.to_array(), (100, 1)), BASELINE)
    assert not detect_steady_state(short)[0]


def test_seasonal_run_does_not_settle_and_is_annual():
    p = ModelParams(seasonality=SeasonalFactor(d1=0.07, d2=0.03))
    traj = integrate(disease_free(I_H=0.0), p, (0.0, 365.0 * 8))
    assert not detect_steady_state(traj, window=200.0)[0]
    tail = traj.N_M[traj.times >= 365.0 * 4]
    spectrum = np.abs(np.fft.rfft(tail - tail.mean()))
    freqs = np.fft.rfftfreq(len(tail), d=1.0)
    assert freqs[np.argmax(spectrum)] == pytest.approx(1 / 365, rel=0.01)


def test_run_from_closed_form_point_is_detected_as_steady():
    eq = endemic_equilibrium(BASELINE)
    traj = integrate(eq.state, BASELINE, (0.0, 2000.0), SolverConfig(output_every=5.0))
    ok, mean = detect_steady_state(traj)
    assert ok
    np.testing.assert_allclose(mean.to_array(), eq.state.to_array(), rtol=1e-5)


def test_trajectory_csv_round_trips(tmp_path):
    traj = integrate(disease_free(I_H=2.0), BASELINE, (0.0, 3.0))
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0][0] == "t" and len(rows) == len(traj) + 1
    np.testing.assert_array_equal(np.array(rows[1:], dtype=float)[:, 1:], traj.states)
