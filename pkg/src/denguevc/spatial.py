"""Lattice version of the model with bites redistributed by a distance kernel.

Each cell carries its own eight compartments.  A mosquito in cell ``r'``
spreads its bites over hosts in nearby cells ``r`` with weight ``W[r, r']``;
every column of ``W`` sums to one so no bites are created or lost.  Both
contact terms use the same kernel: humans in ``r`` are infected by the bites
arriving from every ``r'``, and mosquitoes in ``r'`` pick up infection from
the hosts they bite.  All other terms (births, deaths, latency, eggs) stay
local to the cell.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields
from typing import Literal, Mapping, Sequence

import numpy as np

from .errors import DomainError
from .model import seasonal_factor
from .params import COMPARTMENTS, ModelParams, StateVector
from .solver import SolverConfig, Trajectory, sample_times, solve

Profile = Literal["uniform-disk", "gaussian", "exponential"]
PROFILES = ("uniform-disk", "gaussian", "exponential")
_SCALAR_FIELDS = tuple(f.name for f in fields(ModelParams) if f.name != "seasonality")


@dataclass(frozen=True)
class Grid:
    shape: tuple[int, ...]
    spacing: float = 1.0
    periodic: bool = True

    def __post_init__(self):
        shape = tuple(int(n) for n in np.atleast_1d(self.shape))
        if len(shape) not in (1, 2) or any(n < 1 for n in shape):
            raise DomainError(f"grid shape must be 1-D or 2-D with positive sizes, got {self.shape}")
        if not self.spacing > 0:
            raise DomainError("grid spacing must be positive")
        object.__setattr__(self, "shape", shape)

    @property
    def ncells(self) -> int:
        return math.prod(self.shape)

    def coords(self) -> np.ndarray:
        """(ncells, ndim) integer lattice coordinates in C order."""
        idx = np.indices(self.shape).reshape(len(self.shape), -1)
        return idx.T

    def index(self, *ij: int) -> int:
        return int(np.ravel_multi_index(ij, self.shape))

    def distances(self) -> np.ndarray:
        """Pairwise cell-centre distances, minimum-image when periodic."""
        c = self.coords().astype(float)
        diff = np.abs(c[:, None, :] - c[None, :, :])
        if self.periodic:
            sizes = np.array(self.shape, dtype=float)
            diff = np.minimum(diff, sizes - diff)
        return self.spacing * np.sqrt((diff ** 2).sum(axis=-1))

    def distance_from(self, cell: int) -> np.ndarray:
        return self.distances()[cell]


def _profile_values(profile: str, d: np.ndarray, radius: float) -> np.ndarray:
    if profile == "uniform-disk":
        w = np.ones_like(d)
    elif profile == "gaussian":
        sigma = radius / 2.0
        w = np.exp(-0.5 * (d / sigma) ** 2)
    elif profile == "exponential":
        w = np.exp(-d / (radius / 3.0))
    else:
        raise DomainError(f"unknown kernel profile {profile!r}; choose from {PROFILES}")
    return np.where(d <= radius * (1 + 1e-12), w, 0.0)


@dataclass(frozen=True)
class BiteKernel:
    profile: str
    radius: float
    grid: Grid
    weights: np.ndarray = field(repr=False)   # W[target, source]

    def column_sums(self) -> np.ndarray:
        return self.weights.sum(axis=0)

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.weights, np.eye(self.grid.ncells)))


def build_kernel(profile: Profile, radius: float, grid: Grid) -> BiteKernel:
    """Discretize a truncated bite-distribution profile on ``grid``.

    A radius below one lattice spacing leaves every bite in the mosquito's own
    cell.  Without periodic wrap the truncated profile is renormalized per
    source cell, so edge cells send proportionally more bites inward.
    """
    if profile not in PROFILES:
        raise DomainError(f"unknown kernel profile {profile!r}; choose from {PROFILES}")
    if not radius > 0:
        raise DomainError(f"kernel radius must be positive, got {radius}")
    n = grid.ncells
    if radius < grid.spacing:
        return BiteKernel(profile, radius, grid, np.eye(n))
    raw = _profile_values(profile, grid.distances(), radius)
    W = raw / raw.sum(axis=0, keepdims=True)
    return BiteKernel(profile, radius, grid, W)


class _CellParams:
    """ModelParams fields broadcast to one value per cell."""

    def __init__(self, p: ModelParams, overrides: Mapping[str, Sequence[float]], n: int):
        for name in _SCALAR_FIELDS:
            setattr(self, name, np.full(n, getattr(p, name), dtype=float))
        for name, values in overrides.items():
            if name not in _SCALAR_FIELDS:
                raise DomainError(f"cannot override {name!r} per cell")
            arr = np.asarray(values, dtype=float)
            if arr.shape != (n,):
                raise DomainError(f"override {name!r} needs {n} values, got shape {arr.shape}")
            if np.any(~np.isfinite(arr)) or np.any(arr < 0):
                raise DomainError(f"override {name!r} must be finite and >= 0")
            setattr(self, name, arr)
        self.seasonality = p.seasonality


@dataclass
class SpatialField:
    grid: Grid
    states: np.ndarray                                  # (8, ncells)
    overrides: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.states = np.array(self.states, dtype=float)
        if self.states.shape != (len(COMPARTMENTS), self.grid.ncells):
            raise DomainError(f"states must have shape (8, {self.grid.ncells}), got {self.states.shape}")
        if np.any(self.states < 0) or not np.all(np.isfinite(self.states)):
            raise DomainError("cell states must be finite and nonnegative")
        self.overrides = {k: np.asarray(v, dtype=float) for k, v in self.overrides.items()}

    @classmethod
    def uniform(cls, grid: Grid, state: StateVector, overrides=None) -> "SpatialField":
        states = np.repeat(state.to_array()[:, None], grid.ncells, axis=1)
        return cls(grid, states, dict(overrides or {}))

    def cell_state(self, i: int) -> StateVector:
        return StateVector.from_array(self.states[:, i])

    def cell_params(self, p: ModelParams, i: int) -> ModelParams:
        return p.with_values(**{k: float(v[i]) for k, v in self.overrides.items()})


def spatial_rhs(y: np.ndarray, cp: _CellParams, W: np.ndarray, t: float) -> np.ndarray:
    S_H, I_H, R_H, S_M, L_M, I_M, S_E, I_E = y
    N_H = S_H + I_H + R_H
    hatch = cp.p * seasonal_factor(t, cp.seasonality)

    arriving_infectious_bites = W @ (cp.a * I_M)          # at host cell r
    bites_on_humans = cp.b * S_H / N_H * arriving_infectious_bites
    host_infectiousness = W.T @ (I_H / N_H)               # seen by mosquitoes of cell r'
    infected_feeds = cp.c * cp.a * S_M * host_infectiousness
    room = 1.0 - (S_E + I_E) / cp.kappa_E
    eggs_from_carriers = cp.r_M * (I_M + L_M)

    out = np.empty_like(y)
    out[0] = -bites_on_humans - cp.mu_H * S_H + cp.r_H * N_H * (1.0 - N_H / cp.kappa_H)
    out[1] = bites_on_humans - (cp.mu_H + cp.alpha_H + cp.gamma_H) * I_H
    out[2] = cp.gamma_H * I_H - cp.mu_H * R_H
    out[3] = hatch * S_E - cp.mu_M * S_M - infected_feeds
    out[4] = infected_feeds - (cp.gamma_M + cp.mu_M) * L_M
    out[5] = cp.gamma_M * L_M - cp.mu_M * I_M + hatch * I_E
    out[6] = (cp.r_M * S_M + (1.0 - cp.g) * eggs_from_carriers) * room - (cp.mu_E + hatch) * S_E
    out[7] = cp.g * eggs_from_carriers * room - (cp.mu_E + hatch) * I_E
    return out


@dataclass
class SpatialTrajectory:
    times: np.ndarray
    states: np.ndarray          # (len(times), 8, ncells)
    field: SpatialField
    params: ModelParams = field(repr=False)

    @property
    def ncells(self) -> int:
        return self.states.shape[2]

    def cell(self, i: int) -> Trajectory:
        return Trajectory(self.times, self.states[:, :, i], self.field.cell_params(self.params, i))

    def prevalence(self) -> np.ndarray:
        """(len(times), ncells) array of I_H / N_H."""
        return self.states[:, 1, :] / self.states[:, 0:3, :].sum(axis=1)

    def snapshot_to_csv(self, path, index: int = -1) -> None:
        coords = self.field.grid.coords()
        axes = ["x", "y"][: coords.shape[1]]
        with open(path, "w", newline="") as fh:
            fh.write(f"# t={float(self.times[index])!r}\n")
            w = csv.writer(fh)
            w.writerow(["cell", *axes, *COMPARTMENTS])
            for i in range(self.ncells):
                w.writerow([i, *(int(c) for c in coords[i])]
                           + [repr(float(v)) for v in self.states[index, :, i]])


def simulate_spatial(
    sfield: SpatialField,
    kernel: BiteKernel,
    p: ModelParams,
    span: tuple[float, float],
    cfg: SolverConfig | None = None,
    t_eval: Sequence[float] | None = None,
) -> SpatialTrajectory:
    cfg = cfg or SolverConfig()
    if kernel.grid.ncells != sfield.grid.ncells:
        raise DomainError("kernel and field were built on different grids")
    if np.any(sfield.states[0:3].sum(axis=0) <= 0):
        raise DomainError("every cell needs a positive host population")
    cp = _CellParams(p, sfield.overrides, sfield.grid.ncells)
    W = kernel.weights
    times = np.asarray(t_eval, dtype=float) if t_eval is not None else sample_times(*span, cfg.output_every)
    states = solve(lambda t, y: spatial_rhs(y, cp, W, t), sfield.states, times, cfg)
    return SpatialTrajectory(times, states, sfield, p)
