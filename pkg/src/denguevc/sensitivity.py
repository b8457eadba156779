"""Local sensitivity of R0, force of infection and prevalence to the four control parameters.

Each control is perturbed in the direction an intervention moves it:
bite reduction lowers ``a``, source reduction lowers ``kappa_E``, larvicide
raises ``mu_E`` and adulticide raises ``mu_M``.  The reported elasticity is the
relative change of the output divided by the signed relative change of the
parameter, so positive entries mean the output falls when the control acts
on a parameter that is lowered.

The analytic column is the second-order Taylor estimate: the first-order
term comes from closed-form derivatives (chain rule through the mosquito
total), the host-total derivative and the curvature term from central
differences.  The oracle column recomputes the whole equilibrium at the
perturbed parameter.

Throughout this module "R0" is the threshold ratio evaluated at the
equilibrium host density, so it carries the (small) host-total feedback.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import NamedTuple

from .equilibrium import disease_free_populations, endemic_equilibrium, equilibrium_host_population
from .errors import DiseaseFreeTransition, DomainError
from .params import ModelParams
from .thresholds import endemic_threshold, force_of_infection_from_prevalence

QUANTITIES = ("R0", "lambda", "prevalence")
CONTROL_PARAMS = ("a", "kappa_E", "mu_E", "mu_M")
# sign of the relative parameter change applied by each intervention
CONTROL_DIRECTION = {"a": -1.0, "kappa_E": -1.0, "mu_E": 1.0, "mu_M": 1.0}

# published sensitivity table (percent change per 1% change in the control direction)
PUBLISHED_ELASTICITIES = {
    "R0": {"a": 1.94, "kappa_E": 0.69, "mu_E": -8.28e-4, "mu_M": -2.42},
    "lambda": {"a": 5.02, "kappa_E": 2.32, "mu_E": -1.93e-3, "mu_M": -5.40},
    "prevalence": {"a": 2.67, "kappa_E": 1.34, "mu_E": -2.31e-2, "mu_M": -3.20},
}
PUBLISHED_MATCH_RTOL = 0.05
ORACLE_RTOL = 1e-4
# step at which the analytic estimate must agree with recomputation to ORACLE_RTOL;
# at larger steps the third-order remainder alone can exceed that tolerance
ORACLE_STEP = 1e-4
HOST_STEP = 1e-6
CURVATURE_STEP = 1e-3


def equilibrium_outputs(p: ModelParams) -> dict[str, float]:
    eq = endemic_equilibrium(p)
    prev = eq.prevalence
    return {
        "R0": endemic_threshold(p, eq.N_M, eq.N_H),
        "lambda": force_of_infection_from_prevalence(p, prev),
        "prevalence": prev,
        "endemic": eq.endemic,
    }


def _scaled(p: ModelParams, param: str, factor: float) -> ModelParams:
    return p.with_values(**{param: p.get(param) * factor})


def exact_relative_variation(quantity: str, p: ModelParams, param: str, delta_frac: float) -> float:
    """[V(theta*(1+delta)) - V(theta)] / V(theta) through the full equilibrium."""
    if quantity not in QUANTITIES:
        raise KeyError(quantity)
    if delta_frac == 0:
        return 0.0
    base = equilibrium_outputs(p)
    moved = equilibrium_outputs(_scaled(p, param, 1.0 + delta_frac))
    if base["endemic"] != moved["endemic"]:
        warnings.warn(
            f"changing {param} by {delta_frac:+g} crosses the endemic threshold",
            DiseaseFreeTransition,
            stacklevel=2,
        )
    v0 = base[quantity]
    if v0 == 0:
        raise DomainError(f"{quantity} is zero at the reference point; relative change undefined")
    return (moved[quantity] - v0) / v0


def _host_log_derivative(p: ModelParams, param: str) -> float:
    theta = p.get(param)
    up = equilibrium_host_population(_scaled(p, param, 1.0 + HOST_STEP))
    down = equilibrium_host_population(_scaled(p, param, 1.0 - HOST_STEP))
    return (up - down) / (2.0 * HOST_STEP * theta * equilibrium_host_population(p))


def _mosquito_log_derivative(p: ModelParams, param: str, N_M: float) -> float:
    hatch = p.p * p.c_S
    if param == "kappa_E":
        return 1.0 / p.kappa_E
    if param == "mu_E":
        return -p.kappa_E / (p.r_M * N_M)
    if param == "mu_M":
        return -hatch * p.kappa_E / (p.mu_M ** 2 * N_M)
    return 0.0


def log_derivatives(p: ModelParams, param: str) -> dict[str, float]:
    """(1/V) dV/dtheta for every quantity, by the chain rule."""
    if param not in CONTROL_PARAMS:
        raise KeyError(f"{param} is not a control parameter")
    p.require_g_below_one()
    N_M = disease_free_populations(p).N_M
    eq = endemic_equilibrium(p)
    N_H = eq.N_H
    d_ln_NM = _mosquito_log_derivative(p, param, N_M)
    d_ln_NH = _host_log_derivative(p, param)

    # R0 = a^2 b c (N_M/N_H) (g mu_M + gamma_M) / [removal (mu_M + gamma_M) mu_M (1 - g)]
    if param == "a":
        d_ln_vector = 2.0 / p.a
    elif param == "mu_M":
        d_ln_vector = (p.g / (p.g * p.mu_M + p.gamma_M) - 1.0 / (p.mu_M + p.gamma_M) - 1.0 / p.mu_M)
    else:
        d_ln_vector = 0.0
    out = {"R0": d_ln_vector + d_ln_NM - d_ln_NH}

    # prevalence = (X - Y) / (s X + Z)
    s = 1.0 + p.gamma_H / p.mu_H
    removal = p.mu_H + p.gamma_H + p.alpha_H
    X = (p.gamma_M + p.g * p.mu_M) * p.a ** 2 * p.b * p.c * N_M / N_H
    Y = removal * (p.mu_M + p.gamma_M) * p.mu_M * (1.0 - p.g)
    Z = p.a * p.c * removal * (p.mu_M + p.gamma_M)
    d_ln_X = d_ln_NM - d_ln_NH
    dY = dZ = 0.0
    if param == "a":
        d_ln_X += 2.0 / p.a
        dZ = p.c * removal * (p.mu_M + p.gamma_M)
    elif param == "mu_M":
        d_ln_X += p.g / (p.gamma_M + p.g * p.mu_M)
        dY = removal * (1.0 - p.g) * (2.0 * p.mu_M + p.gamma_M)
        dZ = p.a * p.c * removal
    dX = X * d_ln_X
    num, den = X - Y, s * X + Z
    if num <= 0:
        raise DomainError("no endemic equilibrium: prevalence derivatives undefined")
    d_prev = ((dX - dY) * den - num * (s * dX + dZ)) / den ** 2
    out["prevalence"] = d_prev / (num / den)
    out["lambda"] = out["prevalence"] / (1.0 - s * eq.prevalence)
    return out


def analytic_R0_partials(p: ModelParams) -> dict[str, float]:
    """dR0/dtheta for a, kappa_E, mu_E, mu_M (R0 at the equilibrium host density)."""
    R0 = equilibrium_outputs(p)["R0"]
    return {param: R0 * log_derivatives(p, param)["R0"] for param in CONTROL_PARAMS}


def printed_mu_M_partial(p: ModelParams) -> float:
    """The adulticide derivative in the form it usually appears in print.

    Kept for regression comparison only: its first two terms carry the wrong
    sign, so it disagrees with finite differences of R0.
    """
    dfp = disease_free_populations(p)
    out = equilibrium_outputs(p)
    R0 = out["R0"]
    hatch = p.p * p.c_S
    bracket = (1.0 / (p.mu_M + p.gamma_M) + 1.0 / (p.mu_M * (1.0 - p.g))
               - hatch * p.kappa_E / (p.mu_M ** 2 * dfp.N_M)
               - _host_log_derivative(p, "mu_M"))
    return R0 * bracket


def second_order_terms(p: ModelParams, param: str, h: float = CURVATURE_STEP) -> dict[str, float]:
    """(theta^2 / V) d2V/dtheta2 for every quantity by central second differences."""
    mid = equilibrium_outputs(p)
    up = equilibrium_outputs(_scaled(p, param, 1.0 + h))
    down = equilibrium_outputs(_scaled(p, param, 1.0 - h))
    return {q: (up[q] - 2.0 * mid[q] + down[q]) / (h * h * mid[q]) for q in QUANTITIES}


@dataclass(frozen=True)
class SensitivityCell:
    quantity: str
    param: str
    step: float              # signed relative parameter change
    first_order: float       # theta/V dV/dtheta
    second_order: float      # theta^2/V d2V/dtheta2
    elasticity: float        # truncated Taylor estimate of dV/V divided by step
    oracle: float            # exact recomputation divided by step
    published: float | None
    crosscheck_gap: float = 0.0   # analytic vs oracle relative gap at ORACLE_STEP

    @property
    def oracle_discrepancy(self) -> float:
        """Relative gap between estimate and recomputation at this cell's own step."""
        return abs(self.elasticity - self.oracle) / abs(self.oracle)

    @property
    def oracle_flag(self) -> bool:
        return self.crosscheck_gap > ORACLE_RTOL

    @property
    def published_mismatch(self) -> bool:
        """True when the published value cannot be reproduced from the model equations."""
        if self.published is None:
            return False
        return abs(self.elasticity - self.published) > PUBLISHED_MATCH_RTOL * abs(self.published)


@dataclass
class SensitivityReport:
    cells: list[SensitivityCell]
    delta_frac: float

    def cell(self, quantity: str, param: str) -> SensitivityCell:
        for c in self.cells:
            if c.quantity == quantity and c.param == param:
                return c
        raise KeyError((quantity, param))

    def elasticity(self, quantity: str, param: str) -> float:
        return self.cell(quantity, param).elasticity

    HEADER = ("quantity", "param", "step", "first_order", "second_order", "analytic",
              "oracle", "crosscheck_gap", "oracle_flag", "published", "published_mismatch")

    def rows(self) -> list[list]:
        return [
            [c.quantity, c.param, c.step, c.first_order, c.second_order, c.elasticity, c.oracle,
             c.crosscheck_gap, c.oracle_flag, "" if c.published is None else c.published, c.published_mismatch]
            for c in self.cells
        ]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.HEADER)
            for row in self.rows():
                w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])

    def to_text(self) -> str:
        lines = [f"{'quantity':<11}{'param':<9}{'analytic':>13}{'oracle':>13}{'published':>11}  flags"]
        for c in self.cells:
            flags = []
            if c.oracle_flag:
                flags.append("oracle-mismatch")
            if c.published_mismatch:
                flags.append("published-not-reproduced")
            pub = "" if c.published is None else f"{c.published:.4g}"
            lines.append(f"{c.quantity:<11}{c.param:<9}{c.elasticity:>13.5g}{c.oracle:>13.5g}"
                         f"{pub:>11}  {' '.join(flags)}")
        return "\n".join(lines)


def elasticity_table(p: ModelParams, delta_frac: float = 0.01) -> SensitivityReport:
    """Fill the quantity x control-parameter grid of elasticities."""
    if delta_frac <= 0:
        raise DomainError("delta_frac must be positive")
    if not equilibrium_outputs(p)["endemic"]:
        raise DomainError("sensitivity table needs an endemic baseline (R0 > 1)")
    cells = []
    per_param = {}
    for param in CONTROL_PARAMS:
        per_param[param] = (log_derivatives(p, param), second_order_terms(p, param))
    for q in QUANTITIES:
        for param in CONTROL_PARAMS:
            logd, curv = per_param[param]
            theta = p.get(param)
            first = theta * logd[q]
            second = curv[q]

            def estimate_and_oracle(step):
                estimate = first + 0.5 * second * step
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", DiseaseFreeTransition)
                    oracle = exact_relative_variation(q, p, param, step) / step
                return estimate, oracle

            step = CONTROL_DIRECTION[param] * delta_frac
            estimate, oracle = estimate_and_oracle(step)
            check_est, check_oracle = estimate_and_oracle(CONTROL_DIRECTION[param] * ORACLE_STEP)
            gap = abs(check_est - check_oracle) / abs(check_oracle)
            cells.append(SensitivityCell(q, param, step, first, second, estimate, oracle,
                                         PUBLISHED_ELASTICITIES[q][param], gap))
    return SensitivityReport(cells, delta_frac)


STRATEGIES = {
    "mu_M": "adulticide",
    "a": "bite-reduction",
    "kappa_E": "source-reduction",
    "mu_E": "larvicide",
}


class RankedStrategy(NamedTuple):
    strategy: str
    param: str
    elasticity: float


def strategy_ranking(report: SensitivityReport, quantity: str = "lambda") -> list[RankedStrategy]:
    """Control strategies ordered by |elasticity|, ties broken by the R0 column."""
    entries = [
        RankedStrategy(name, param, report.elasticity(quantity, param))
        for param, name in STRATEGIES.items()
    ]
    return sorted(
        entries,
        key=lambda e: (-abs(e.elasticity), -abs(report.elasticity("R0", e.param))),
    )
