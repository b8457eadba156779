"""Basic reproduction number, endemic threshold and force of infection."""
from __future__ import annotations

from dataclasses import dataclass

from .equilibrium import disease_free_populations, endemic_equilibrium
from .errors import DomainError
from .params import ModelParams


@dataclass(frozen=True)
class ThresholdReport:
    R0: float
    T_h: float
    lambda_: float
    prevalence: float
    I_M_eq: float
    N_M: float
    N_H_bar: float
    N_H: float


def _threshold_ratio(p: ModelParams, N_M: float, N_H: float) -> float:
    p.require_g_below_one()
    if N_H <= 0:
        raise DomainError("host density must be positive")
    if N_M < 0:
        raise DomainError("mosquito density must be nonnegative")
    num = p.a ** 2 * p.b * p.c * (N_M / N_H) * (p.g * p.mu_M + p.gamma_M)
    den = (p.mu_H + p.alpha_H + p.gamma_H) * (p.mu_M + p.gamma_M) * p.mu_M * (1.0 - p.g)
    return num / den


def basic_reproduction_number(p: ModelParams, N_M_bar: float, N_H_bar: float) -> float:
    """R0 at disease-free densities, including vertical transmission through g."""
    return _threshold_ratio(p, N_M_bar, N_H_bar)


def endemic_threshold(p: ModelParams, N_M: float, N_H: float) -> float:
    """Same ratio as R0 but at the supplied (possibly endemic) densities.

    An endemic state exists iff the result is >= 1.
    """
    return _threshold_ratio(p, N_M, N_H)


def force_of_infection_from_prevalence(p: ModelParams, prevalence: float) -> float:
    limit = p.mu_H / (p.mu_H + p.gamma_H)
    if prevalence < 0:
        raise DomainError(f"prevalence must be >= 0, got {prevalence}")
    denom = 1.0 - (1.0 + p.gamma_H / p.mu_H) * prevalence
    if denom <= 0:
        raise DomainError(f"prevalence {prevalence} reaches the pole at {limit}")
    return (p.mu_H + p.alpha_H + p.gamma_H) * prevalence / denom


def prevalence_from_R0(p: ModelParams, R0: float) -> float:
    """Steady-state human prevalence written in terms of the threshold ratio.

    Exact when ``R0`` is the ratio evaluated at the endemic host density (so
    exact for alpha_H = 0 with the disease-free density); clipped at zero.
    """
    p.require_g_below_one()
    if R0 <= 1:
        return 0.0
    s = 1.0 + p.gamma_H / p.mu_H
    vector_side = p.mu_M * (1.0 - p.g)
    return vector_side * (R0 - 1.0) / (vector_side * R0 * s + p.a * p.c)


def force_of_infection_from_R0(p: ModelParams, R0: float) -> float:
    """Force of infection as an affine function of R0 (zero at or below 1)."""
    p.require_g_below_one()
    if R0 <= 1:
        return 0.0
    vector_side = p.mu_M * (1.0 - p.g)
    num = vector_side * (p.mu_H + p.alpha_H + p.gamma_H) * p.mu_H * (R0 - 1.0)
    return num / (vector_side * (p.mu_H + p.gamma_H) + p.mu_H * p.a * p.c)


def infected_mosquitoes_at_equilibrium(p: ModelParams, I_H: float, N_H: float) -> float:
    """Infectious mosquito density that sustains I_H infected humans."""
    if N_H <= 0:
        raise DomainError("host density must be positive")
    prev = I_H / N_H
    denom = 1.0 - (1.0 + p.gamma_H / p.mu_H) * prev
    if denom <= 0:
        raise DomainError(f"prevalence {prev} leaves no susceptible hosts")
    return N_H * (p.mu_H + p.alpha_H + p.gamma_H) * prev / (p.a * p.b * denom)


def threshold_report(p: ModelParams) -> ThresholdReport:
    dfp = disease_free_populations(p)
    eq = endemic_equilibrium(p)
    R0 = basic_reproduction_number(p, dfp.N_M, dfp.N_H0)
    T_h = endemic_threshold(p, eq.N_M, eq.N_H)
    prev = eq.prevalence
    return ThresholdReport(
        R0=R0,
        T_h=T_h,
        lambda_=force_of_infection_from_prevalence(p, prev),
        prevalence=prev,
        I_M_eq=eq.I_M,
        N_M=dfp.N_M,
        N_H_bar=dfp.N_H0,
        N_H=eq.N_H,
    )
