"""Time integration of the model: classical RK4 and an adaptive Dormand-Prince 5(4) pair.

Both steppers work on arbitrary-shaped float arrays so the spatial lattice can
reuse them.  Positivity is enforced the same way everywhere: a step that sends
a component below ``-atol`` is rejected (adaptive) or raises (fixed step), and
smaller negative excursions are clamped to zero.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import DomainError, NumericalError, StiffnessError
from .model import rhs_array
from .params import COMPARTMENTS, ModelParams, StateVector

Method = Literal["rk45", "rk4"]


@dataclass(frozen=True)
class SolverConfig:
    method: Method = "rk45"
    step: float = 0.05                # fixed step for rk4 (days)
    rtol: float = 1e-8
    atol: float | Sequence[float] = 1e-6
    first_step: float = 1e-2
    max_step: float = math.inf
    min_step: float = 1e-10           # floor below which the adaptive stepper gives up
    output_every: float = 1.0         # sampling interval of the returned trajectory
    window: float = 365.0             # steady-state detection window (days)
    steady_tol: float = 1e-6

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise DomainError(f"unknown method {self.method!r}")
        if self.step <= 0 or self.rtol <= 0 or self.first_step <= 0 or self.output_every <= 0:
            raise DomainError("steps and tolerances must be positive")
        if np.any(np.asarray(self.atol) <= 0):
            raise DomainError("atol must be positive")
        if self.min_step <= 0 or self.max_step <= 0:
            raise DomainError("step bounds must be positive")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray      # shape (len(times), 8)
    params: ModelParams = field(repr=False)

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> StateVector:
        return StateVector.from_array(self.states[i])

    @property
    def final(self) -> StateVector:
        return self.state(-1)

    def column(self, name: str) -> np.ndarray:
        return self.states[:, COMPARTMENTS.index(name)]

    @property
    def N_H(self):
        return self.states[:, 0:3].sum(axis=1)

    @property
    def N_M(self):
        return self.states[:, 3:6].sum(axis=1)

    @property
    def N_E(self):
        return self.states[:, 6:8].sum(axis=1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("t",) + COMPARTMENTS)
            for t, row in zip(self.times, self.states):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in row])


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _dopri_attempt(f, t, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks) if a != 0.0)
        ks.append(f(t + _C[i] * h, yi))
    y_new = y + h * sum(b * k for b, k in zip(_B5, ks) if b != 0.0)
    # stage 7 is evaluated at y_new (first-same-as-last)
    err = h * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
    return y_new, err, ks[6]


def _clamp(y, atol, where):
    neg = y < 0
    if np.any(neg):
        if np.any(y < -atol):
            raise NumericalError(f"component fell below -atol at {where}")
        y = np.where(neg, 0.0, y)
    return y


def solve(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_eval: np.ndarray,
    cfg: SolverConfig,
) -> np.ndarray:
    """Integrate ``dy/dt = f(t, y)`` and return the states at ``t_eval``.

    ``t_eval[0]`` is the initial time.  Steps are shortened to land exactly
    on every requested time.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.ndim != 1 or len(t_eval) < 1 or np.any(np.diff(t_eval) <= 0):
        raise DomainError("t_eval must be a strictly increasing 1-D array")
    y = np.array(y0, dtype=float)
    atol = np.asarray(cfg.atol, dtype=float)
    if atol.ndim == 1 and y.ndim == 2:
        atol = atol[:, None]         # per-compartment tolerance on a lattice
    atol = np.broadcast_to(atol, y.shape)
    out = np.empty((len(t_eval),) + y.shape)
    out[0] = y
    if cfg.method == "rk4":
        for j in range(1, len(t_eval)):
            t0, t1 = t_eval[j - 1], t_eval[j]
            n = max(1, math.ceil((t1 - t0) / cfg.step - 1e-9))
            h = (t1 - t0) / n
            for i in range(n):
                y = rk4_step(f, t0 + i * h, y, h)
                if not np.all(np.isfinite(y)):
                    raise NumericalError(f"non-finite state at t={t0 + (i + 1) * h}")
                y = _clamp(y, atol, f"t={t0 + (i + 1) * h}")
            out[j] = y
        return out

    t = t_eval[0]
    h = min(cfg.first_step, cfg.max_step)
    k1 = f(t, y)
    for j in range(1, len(t_eval)):
        target = t_eval[j]
        while t < target:
            remaining = target - t
            last = h >= remaining
            h_try = remaining if last else h
            y_new, err, k_last = _dopri_attempt(f, t, y, h_try, k1)
            if not np.all(np.isfinite(y_new)):
                h = 0.25 * h_try
            elif np.any(y_new < -atol):
                h = 0.5 * h_try
            else:
                scale = atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
                norm = float(np.sqrt(np.mean((err / scale) ** 2)))
                fac = 5.0 if norm == 0 else min(5.0, max(0.2, 0.9 * norm ** -0.2))
                if norm <= 1.0:
                    t = target if last else t + h_try
                    if np.any(y_new < 0):
                        y = np.where(y_new < 0, 0.0, y_new)
                        k1 = f(t, y)
                    else:
                        y, k1 = y_new, k_last
                    # a step shortened to hit an output time says nothing new about h
                    if not (last and h_try < h):
                        h = h_try * fac
                    h = min(h, cfg.max_step)
                else:
                    h = h_try * fac
            if h < cfg.min_step:
                raise StiffnessError(f"step size {h:.3e} below floor {cfg.min_step:.3e} at t={t:.6g}")
        out[j] = y
    return out


def sample_times(t0: float, t1: float, every: float) -> np.ndarray:
    if t1 <= t0:
        raise DomainError("span must satisfy t1 > t0")
    n = int(math.floor((t1 - t0) / every + 1e-9))
    times = t0 + every * np.arange(n + 1)
    if times[-1] < t1 - 1e-9 * max(1.0, abs(t1)):
        times = np.append(times, t1)
    return times


def integrate(
    x0: StateVector,
    p: ModelParams,
    span: tuple[float, float],
    cfg: SolverConfig | None = None,
    t_eval: Sequence[float] | None = None,
) -> Trajectory:
    """Solve the initial-value problem from ``x0`` over ``span``."""
    cfg = cfg or SolverConfig()
    y0 = x0.to_array()
    if np.any(y0 < 0):
        raise DomainError(f"negative initial compartment in {x0}")
    if x0.N_H <= 0:
        raise DomainError("initial host population must be positive")
    times = np.asarray(t_eval, dtype=float) if t_eval is not None else sample_times(*span, cfg.output_every)

    def f(t, y):
        return rhs_array(y, p, t)

    states = solve(f, y0, times, cfg)
    return Trajectory(times, states, p)


def detect_steady_state(traj: Trajectory, window: float = 365.0, tol: float = 1e-6):
    """Check whether every compartment is flat over the trailing ``window`` days.

    Returns ``(converged, mean_state)``; a trajectory shorter than the window
    is reported as not converged.
    """
    t_end = traj.times[-1]
    covered = t_end - traj.times[0] >= window
    mask = traj.times >= t_end - window
    tail = traj.states[mask]
    mean = tail.mean(axis=0)
    spread = tail.max(axis=0) - tail.min(axis=0)
    rel = np.divide(spread, np.abs(mean), out=np.zeros_like(spread), where=mean != 0)
    converged = bool(covered and np.all(rel < tol))
    return converged, StateVector.from_array(mean)
