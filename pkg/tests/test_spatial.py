import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from denguevc import BASELINE, DomainError, SolverConfig, StateVector, disease_free_populations, integrate
from denguevc.spatial import PROFILES, Grid, SpatialField, build_kernel, simulate_spatial, spatial_rhs, _CellParams

DFP = disease_free_populations(BASELINE)
FREE = StateVector(DFP.N_H0, 0.0, 0.0, DFP.N_M, 0.0, 0.0, DFP.N_E, 0.0)
SEEDED = StateVector(DFP.N_H0 - 10, 10.0, 0.0, DFP.N_M, 0.0, 0.0, DFP.N_E, 0.0)
CFG = SolverConfig(output_every=5.0)


@given(
    profile=st.sampled_from(PROFILES),
    radius=st.floats(0.1, 6.0),
    shape=st.sampled_from([(7,), (12,), (4, 5), (3, 3)]),
    spacing=st.floats(0.5, 2.0),
    periodic=st.booleans(),
)
@settings(max_examples=80, deadline=None)
def test_kernel_columns_sum_to_one_and_decay(profile, radius, shape, spacing, periodic):
    grid = Grid(shape, spacing, periodic)
    k = build_kernel(profile, radius, grid)
    assert np.max(np.abs(k.column_sums() - 1.0)) < 1e-12
    assert np.all(k.weights >= 0)
    d = grid.distances()
    for src in range(grid.ncells):
        order = np.argsort(d[:, src], kind="stable")
        w = k.weights[order, src]
        assert np.all(np.diff(w) <= 1e-15)


def test_short_radius_gives_identity():
    for profile in PROFILES:
        assert build_kernel(profile, 0.9, Grid((6,), 1.0)).is_identity


def test_nonpositive_radius_and_unknown_profile_rejected():
    with pytest.raises(DomainError):
        build_kernel("gaussian", 0.0, Grid((4,)))
    with pytest.raises(DomainError):
        build_kernel("cauchy", 2.0, Grid((4,)))


def test_uniform_disk_is_flat_within_radius():
    grid = Grid((10,), 1.0, periodic=True)
    k = build_kernel("uniform-disk", 2.0, grid)
    col = k.weights[:, 0]
    np.testing.assert_allclose(col[[0, 1, 2, 8, 9]], 0.2, rtol=1e-14)
    assert np.all(col[3:8] == 0)


def test_grid_validation():
    with pytest.raises(DomainError):
        Grid((4,), spacing=0.0)
    with pytest.raises(DomainError):
        Grid((2, 2, 2))
    with pytest.raises(DomainError):
        SpatialField(Grid((3,)), -np.ones((8, 3)))


@pytest.mark.parametrize("profile", PROFILES)
def test_uniform_field_reproduces_single_location_run(profile):
    hom = integrate(SEEDED, BASELINE, (0.0, 150.0), CFG).states
    grid = Grid((4, 3), 1.5, periodic=True)
    traj = simulate_spatial(SpatialField.uniform(grid, SEEDED), build_kernel(profile, 3.0, grid),
                            BASELINE, (0.0, 150.0), CFG)
    for i in range(grid.ncells):
        np.testing.assert_allclose(traj.cell(i).states, hom, rtol=1e-6)


def test_refining_the_grid_leaves_uniform_solution_unchanged():
    runs = []
    for n, spacing in ((8, 1.0), (16, 0.5)):
        grid = Grid((n,), spacing, periodic=True)
        traj = simulate_spatial(SpatialField.uniform(grid, SEEDED), build_kernel("gaussian", 2.0, grid),
                                BASELINE, (0.0, 100.0), CFG)
        runs.append(traj.cell(0).states)
    np.testing.assert_allclose(runs[0], runs[1], rtol=1e-6)


def test_identity_kernel_decouples_cells():
    grid = Grid((2,), 1.0, periodic=False)
    p2 = BASELINE.with_values(kappa_H=2 * BASELINE.kappa_H)
    starts = [SEEDED, StateVector(*(2 * v if i < 3 else v for i, v in enumerate(SEEDED)))]
    field = SpatialField(grid, np.column_stack([s.to_array() for s in starts]),
                         {"kappa_H": [BASELINE.kappa_H, p2.kappa_H]})
    traj = simulate_spatial(field, build_kernel("exponential", 0.5, grid), BASELINE, (0.0, 150.0), CFG)
    for i, (p, s) in enumerate(((BASELINE, starts[0]), (p2, starts[1]))):
        np.testing.assert_allclose(traj.cell(i).states, integrate(s, p, (0.0, 150.0), CFG).states, rtol=1e-6)
    assert traj.cell(1).params.kappa_H == p2.kappa_H


def test_infection_front_moves_outward():
    grid = Grid((21,), 1.0, periodic=False)
    states = np.repeat(FREE.to_array()[:, None], 21, axis=1)
    states[5, 0] = 100.0
    traj = simulate_spatial(SpatialField(grid, states), build_kernel("exponential", 3.0, grid),
                            BASELINE, (0.0, 400.0), SolverConfig(output_every=1.0))
    prev = traj.prevalence()
    first = [traj.times[np.argmax(prev[:, i] > 1e-6)] for i in range(21)]
    assert all((prev[:, i] > 1e-6).any() for i in range(21))
    assert np.all(np.diff(first) >= 0)


def test_bite_budget_independent_of_kernel():
    grid = Grid((5, 4), 1.0, periodic=False)
    rng = np.random.default_rng(0)
    y = np.abs(rng.normal(1e5, 3e4, size=(8, grid.ncells)))
    y[0] = 1e9       # all hosts susceptible-dominated so bites are not saturated
    a = rng.uniform(0.1, 0.2, grid.ncells)
    cp = _CellParams(BASELINE, {"a": a, "b": np.ones(grid.ncells)}, grid.ncells)
    budgets = []
    for profile, radius in (("uniform-disk", 2.5), ("gaussian", 3.0), ("exponential", 1.5)):
        W = build_kernel(profile, radius, grid).weights
        infected_bites = W @ (a * y[5])
        budgets.append(infected_bites.sum())
    np.testing.assert_allclose(budgets, (a * y[5]).sum(), rtol=1e-12)
    assert spatial_rhs(y, cp, W, 0.0).shape == y.shape


def test_nonnegative_cells_and_snapshot(tmp_path):
    grid = Grid((3, 3), 1.0, periodic=False)
    states = np.repeat(FREE.to_array()[:, None], 9, axis=1)
    states[5, 4] = 1e4
    traj = simulate_spatial(SpatialField(grid, states), build_kernel("gaussian", 1.5, grid),
                            BASELINE, (0.0, 60.0), CFG)
    assert np.all(traj.states >= 0)
    path = tmp_path / "snap.csv"
    traj.snapshot_to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# t=60.0" and lines[1].startswith("cell,x,y,S_H") and len(lines) == 11


def test_empty_cell_rejected():
    grid = Grid((2,))
    states = np.column_stack([FREE.to_array(), np.zeros(8)])
    with pytest.raises(DomainError):
        simulate_spatial(SpatialField(grid, states), build_kernel("gaussian", 1.0, grid), BASELINE, (0.0, 1.0))
