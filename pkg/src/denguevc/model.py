"""Right-hand side of the host-vector-egg system and related helpers."""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .params import ModelParams, SeasonalFactor, StateVector


def seasonal_factor(t, s: SeasonalFactor):
    """Climatic modulation of egg hatching, d1 - d2*sin(2*pi*f*t + phi)."""
    if s.d2 == 0.0:
        return s.d1 if np.ndim(t) == 0 else np.full(np.shape(t), s.d1)
    return s.d1 - s.d2 * np.sin(2.0 * np.pi * s.f * np.asarray(t) + s.phi)


def rhs_array(y: np.ndarray, p: ModelParams, t: float) -> np.ndarray:
    """Unchecked derivative of an (8,) or (8, n) state array.

    Used by the integrators; callers are responsible for N_H > 0.
    """
    S_H, I_H, R_H, S_M, L_M, I_M, S_E, I_E = y
    N_H = S_H + I_H + R_H
    hatch = p.p * seasonal_factor(t, p.seasonality)

    bites_on_humans = p.a * p.b * I_M * S_H / N_H
    infected_feeds = p.a * p.c * S_M * I_H / N_H
    room = 1.0 - (S_E + I_E) / p.kappa_E
    eggs_from_carriers = p.r_M * (I_M + L_M)

    out = np.empty_like(y, dtype=float)
    out[0] = -bites_on_humans - p.mu_H * S_H + p.r_H * N_H * (1.0 - N_H / p.kappa_H)
    out[1] = bites_on_humans - (p.mu_H + p.alpha_H + p.gamma_H) * I_H
    out[2] = p.gamma_H * I_H - p.mu_H * R_H
    out[3] = hatch * S_E - p.mu_M * S_M - infected_feeds
    out[4] = infected_feeds - (p.gamma_M + p.mu_M) * L_M
    out[5] = p.gamma_M * L_M - p.mu_M * I_M + hatch * I_E
    out[6] = (p.r_M * S_M + (1.0 - p.g) * eggs_from_carriers) * room - (p.mu_E + hatch) * S_E
    out[7] = p.g * eggs_from_carriers * room - (p.mu_E + hatch) * I_E
    return out


def rhs(x: StateVector, p: ModelParams, t: float = 0.0) -> StateVector:
    """Time derivative of every compartment at time ``t`` (per day)."""
    y = x.to_array()
    if np.any(y < 0):
        raise DomainError(f"negative compartment in state {x}")
    if x.N_H <= 0:
        raise DomainError("host population is zero; infection terms divide by N_H")
    return StateVector.from_array(rhs_array(y, p, t))


def eip_equivalence(gamma_M: float, mu_M: float) -> tuple[float, float]:
    """Fixed extrinsic incubation period matching exponential latency.

    Returns ``(tau, survival)`` where ``survival = gamma_M / (gamma_M + mu_M)`` is
    the probability a latent mosquito lives to become infectious, and ``tau`` is
    the delay with the same survival under constant mortality,
    ``exp(-mu_M * tau) == survival``.
    """
    if gamma_M <= 0 or mu_M <= 0:
        raise DomainError("gamma_M and mu_M must both be positive")
    survival = gamma_M / (gamma_M + mu_M)
    tau = math.log1p(mu_M / gamma_M) / mu_M
    return tau, survival
