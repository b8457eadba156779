"""Closed-form steady states of the model with a constant climatic factor.

Mosquito and egg totals never depend on the disease.  The host total only
depends on it through dengue-induced mortality ``alpha_H``; with
``alpha_H > 0`` it is the positive root of a quadratic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NumericalError
from .params import COMPARTMENTS, ModelParams, StateVector


@dataclass(frozen=True)
class DiseaseFreePopulations:
    N_H0: float
    N_M: float
    N_E: float
    viable: bool


@dataclass(frozen=True)
class EquilibriumPoint:
    state: StateVector
    N_H: float
    N_M: float
    N_E: float
    endemic: bool
    viable: bool = True

    def __getattr__(self, name):
        if name in COMPARTMENTS:
            return getattr(self.state, name)
        raise AttributeError(name)

    @property
    def prevalence(self) -> float:
        return self.state.I_H / self.N_H


def disease_free_populations(p: ModelParams) -> DiseaseFreePopulations:
    """Host, adult-mosquito and egg totals in the absence of infection.

    When the mosquito growth bracket is nonpositive the vector population dies
    out; this is returned as ``viable=False`` with zero totals, not raised.
    """
    c_S = p.require_constant_climate()
    if p.r_H <= p.mu_H:
        raise DomainError(f"r_H={p.r_H} <= mu_H={p.mu_H}: host population goes extinct")
    if p.mu_M <= 0:
        raise DomainError("mu_M must be positive for a bounded mosquito population")
    N_H0 = p.kappa_H * (p.r_H - p.mu_H) / p.r_H

    hatch = p.p * c_S
    if p.r_M * hatch <= 0:
        return DiseaseFreePopulations(N_H0, 0.0, 0.0, False)
    bracket = 1.0 - p.mu_M * (p.mu_E + hatch) / (p.r_M * hatch)
    if bracket <= 0:
        return DiseaseFreePopulations(N_H0, 0.0, 0.0, False)
    N_E = p.kappa_E * bracket
    N_M = hatch / p.mu_M * N_E
    return DiseaseFreePopulations(N_H0, N_M, N_E, True)


def equilibrium_prevalence(p: ModelParams, N_M: float, N_H: float) -> float:
    """Steady-state I_H/N_H for given vector and host totals.

    Negative values mean no endemic state exists at these totals.
    """
    p.require_g_below_one()
    removal = p.mu_H + p.gamma_H + p.alpha_H
    transmission = (p.gamma_M + p.g * p.mu_M) * p.a ** 2 * p.b * p.c * N_M / N_H
    loss = removal * (p.mu_M + p.gamma_M) * p.mu_M * (1.0 - p.g)
    denom = transmission * (1.0 + p.gamma_H / p.mu_H) + p.a * p.c * removal * (p.mu_M + p.gamma_M)
    if denom <= 0:
        return 0.0 if transmission == loss else -math.inf
    return (transmission - loss) / denom


def _zero_alpha_infected_humans(p: ModelParams, N_M: float, N_H0: float) -> float:
    k = (p.gamma_M + p.g * p.mu_M) * p.a ** 2 * p.b * p.c
    recov = (p.mu_H + p.gamma_H) * (p.mu_M + p.gamma_M)
    num = k * N_M - N_H0 * recov * p.mu_M * (1.0 - p.g)
    den = k * N_M / N_H0 * (1.0 + p.gamma_H / p.mu_H) + p.a * p.c * recov
    if den <= 0:
        return 0.0
    return num / den


def perturbative_host_population(p: ModelParams) -> float:
    """Host total to first order in alpha_H."""
    p.require_g_below_one()
    dfp = disease_free_populations(p)
    I_H0 = max(_zero_alpha_infected_humans(p, dfp.N_M, dfp.N_H0), 0.0)
    return dfp.N_H0 - p.alpha_H * I_H0 / (p.r_H - p.mu_H)


def host_quadratic(p: ModelParams) -> tuple[float, float, float]:
    """Coefficients (Pi, Theta, Omega) of Pi*N^2 + Theta*N + Omega = 0."""
    p.require_g_below_one()
    dfp = disease_free_populations(p)
    s = 1.0 + p.gamma_H / p.mu_H
    Gamma = (p.gamma_M + p.g * p.mu_M) * p.a ** 2 * p.b * p.c * dfp.N_M
    theta = (p.mu_H + p.gamma_H + p.alpha_H) * (p.mu_M + p.gamma_M)
    net = p.r_H - p.mu_H
    Pi = p.a * p.c * p.r_H * theta
    Theta = -(p.a * p.c * theta * p.kappa_H * net - Gamma * p.r_H * s
              + theta * p.mu_M * p.alpha_H * p.kappa_H * (1.0 - p.g))
    Omega = -Gamma * p.kappa_H * net * s + Gamma * p.alpha_H * p.kappa_H
    return Pi, Theta, Omega


def exact_host_population(p: ModelParams) -> float:
    """Endemic host total: the '+sqrt' root of the host quadratic."""
    Pi, Theta, Omega = host_quadratic(p)
    if Pi == 0:
        if Theta == 0:
            raise NumericalError("degenerate host quadratic (Pi = Theta = 0)")
        return -Omega / Theta
    disc = Theta * Theta - 4.0 * Pi * Omega
    if disc < 0:
        raise NumericalError(f"negative discriminant {disc!r} in the host quadratic")
    root = math.sqrt(disc)
    # same root as (-Theta + root) / (2 Pi), rearranged to avoid cancellation
    if Theta > 0:
        return -2.0 * Omega / (Theta + root)
    return (-Theta + root) / (2.0 * Pi)


def _disease_free_point(dfp: DiseaseFreePopulations) -> EquilibriumPoint:
    state = StateVector(dfp.N_H0, 0.0, 0.0, dfp.N_M, 0.0, 0.0, dfp.N_E, 0.0)
    return EquilibriumPoint(state, dfp.N_H0, dfp.N_M, dfp.N_E, endemic=False, viable=dfp.viable)


def endemic_equilibrium(p: ModelParams) -> EquilibriumPoint:
    """Steady state of every compartment with constant c_S.

    Falls back to the disease-free point whenever the threshold is not
    exceeded.  For alpha_H > 0 the host total comes from the exact quadratic
    and the mosquito/egg compartments reuse the alpha_H = 0 expressions with
    that host total and prevalence substituted.
    """
    c_S = p.require_constant_climate()
    p.require_g_below_one()
    dfp = disease_free_populations(p)
    if not dfp.viable or dfp.N_M <= 0:
        return _disease_free_point(dfp)
    if equilibrium_prevalence(p, dfp.N_M, dfp.N_H0) <= 0:
        return _disease_free_point(dfp)

    if p.alpha_H == 0:
        N_H = dfp.N_H0
        I_H = _zero_alpha_infected_humans(p, dfp.N_M, N_H)
        prev = I_H / N_H
    else:
        N_H = exact_host_population(p)
        prev = equilibrium_prevalence(p, dfp.N_M, N_H)
        if not (N_H > 0 and prev > 0):
            raise NumericalError(f"inconsistent endemic root: N_H={N_H}, prevalence={prev}")
        I_H = prev * N_H

    s = 1.0 + p.gamma_H / p.mu_H
    R_H = p.gamma_H / p.mu_H * I_H
    S_H = N_H * (1.0 - s * prev)

    N_M, N_E = dfp.N_M, dfp.N_E
    hatch = p.p * c_S
    free_room = p.kappa_E - N_E
    S_M = ((1.0 - p.g) * p.r_M * N_M * free_room * hatch
           / (p.kappa_E * (p.mu_M + p.a * p.c * prev) * (p.mu_E + hatch)
              - p.g * p.r_M * hatch * free_room))
    I_M = ((p.mu_H + p.gamma_H + p.alpha_H) * I_H
           / (p.a * p.b * (1.0 - s * prev)))
    L_M = p.a * p.c * prev * S_M / (p.gamma_M + p.mu_M)
    S_E = ((p.r_M * S_M + (1.0 - p.g) * p.r_M * (N_M - S_M)) * free_room
           / (p.kappa_E * (p.mu_E + hatch)))
    # direct balance rather than N_E - S_E, which cancels badly when g is small
    I_E = p.g * p.r_M * (L_M + I_M) * free_room / (p.kappa_E * (p.mu_E + hatch))

    state = StateVector(S_H, I_H, R_H, S_M, L_M, I_M, S_E, I_E)
    return EquilibriumPoint(state, N_H, N_M, N_E, endemic=True, viable=True)


def equilibrium_host_population(p: ModelParams) -> float:
    """Host total at the stable steady state (endemic if it exists)."""
    return endemic_equilibrium(p).N_H
