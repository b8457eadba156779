"""Parameter and state containers for the host-vector-egg dengue model.

Baseline values are the literature column of the parameter table used to
calibrate the model (Aedes aegypti, urban Brazil).  All rates are per day.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterator

import numpy as np

from .errors import DomainError

COMPARTMENTS = ("S_H", "I_H", "R_H", "S_M", "L_M", "I_M", "S_E", "I_E")


@dataclass(frozen=True)
class SeasonalFactor:
    """c_s(t) = d1 - d2 * sin(2*pi*f*t + phi).

    The constant-climate case is ``d2 == 0`` with ``d1`` playing the role of c_S.
    """

    d1: float = 0.07
    d2: float = 0.0
    f: float = 1.0 / 365.0
    phi: float = 0.0

    def __post_init__(self):
        if not (self.d1 >= self.d2 >= 0.0):
            raise DomainError(f"seasonality needs d1 >= d2 >= 0, got d1={self.d1}, d2={self.d2}")
        if self.f < 0:
            raise DomainError("seasonal frequency must be nonnegative")

    @property
    def constant(self) -> bool:
        return self.d2 == 0.0

    @classmethod
    def constant_value(cls, c_S: float) -> "SeasonalFactor":
        return cls(d1=c_S, d2=0.0)


# names accepted by ModelParams.get / ModelParams.with_values; c_S maps onto seasonality.d1
PARAM_NAMES = (
    "a", "b", "mu_H", "r_H", "kappa_H", "alpha_H", "gamma_H", "p",
    "gamma_M", "mu_M", "r_M", "g", "kappa_E", "mu_E", "c", "c_S",
)
_PROBABILITIES = ("b", "c", "g")


@dataclass(frozen=True)
class ModelParams:
    a: float = 0.164            # bites / mosquito / day
    b: float = 0.6              # mosquito -> human infectivity
    c: float = 0.54             # human -> mosquito susceptibility
    mu_H: float = 3.5e-5
    r_H: float = 9.5e-5
    kappa_H: float = 5.0e6
    alpha_H: float = 3.5e-4
    gamma_H: float = 0.143
    p: float = 0.15             # egg hatching
    gamma_M: float = 0.143      # latent -> infectious mosquito
    mu_M: float = 0.09
    r_M: float = 50.0           # oviposition
    g: float = 0.1              # vertically infected fraction
    kappa_E: float = 9.8e7
    mu_E: float = 0.1
    seasonality: SeasonalFactor = field(default_factory=SeasonalFactor)

    def __post_init__(self):
        for f_ in fields(self):
            if f_.name == "seasonality":
                continue
            v = getattr(self, f_.name)
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"parameter {f_.name} must be finite and >= 0, got {v!r}")
        for name in _PROBABILITIES:
            if getattr(self, name) > 1.0:
                raise DomainError(f"parameter {name} is a probability, got {getattr(self, name)!r}")

    @property
    def c_S(self) -> float:
        """Constant climatic factor; only meaningful without seasonal oscillation."""
        return self.seasonality.d1

    def require_constant_climate(self) -> float:
        if not self.seasonality.constant:
            raise DomainError("steady states exist only with constant seasonality (d2 = 0)")
        return self.seasonality.d1

    def require_g_below_one(self):
        if self.g >= 1.0:
            raise DomainError("g >= 1: vertical transmission makes the threshold undefined")

    def get(self, name: str) -> float:
        if name == "c_S":
            return self.seasonality.d1
        if name not in PARAM_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def with_values(self, **values: float) -> "ModelParams":
        """Copy with some parameters replaced; ``c_S`` rescales the seasonal factor."""
        values = dict(values)
        unknown = set(values) - set(PARAM_NAMES)
        if unknown:
            raise KeyError(f"unknown parameter(s): {sorted(unknown)}")
        season = self.seasonality
        if "c_S" in values:
            new_d1 = float(values.pop("c_S"))
            # keep the oscillation proportional so d1 >= d2 still holds
            scale = new_d1 / season.d1 if season.d1 > 0 else 0.0
            season = replace(season, d1=new_d1, d2=season.d2 * scale)
        return replace(self, seasonality=season, **{k: float(v) for k, v in values.items()})

    def as_dict(self) -> dict[str, float]:
        return {name: self.get(name) for name in PARAM_NAMES}


BASELINE = ModelParams()

# Monte Carlo columns of the published parameter table: (mean, variance, 95% CI half-width)
PUBLISHED_MONTE_CARLO = {
    "a": (0.1682, 0.026, 9.8e-3),
    "b": (0.6062, 0.296, 0.0337),
    "mu_H": (3.55e-5, 1.019e-9, 2.00e-6),
    "r_H": (9.531e-5, 8.959e-9, 5.3e-6),
    "kappa_H": (5.0123e6, 2.052e13, 2.81e5),
    "alpha_H": (3.473e-4, 1.00e-7, 1.97e-5),
    "gamma_H": (0.1434, 0.017, 8.097e-3),
    "p": (0.151, 0.019, 8.55e-3),
    "gamma_M": (0.1434, 0.017, 8.097e-3),
    "mu_M": (0.08329, 1.5e-4, 5.52e-3),
    "r_M": (51.8295, 2073.9, 2.8226),
    "g": (0.0964, 0.008, 5.684e-3),
    "kappa_E": (9.787e7, 8.003e15, 5.545e6),
    "mu_E": (0.101, 0.008, 5.6644e-3),
    "c": (0.5265, 0.249, 0.03191),
    "c_S": (0.07, 0.004, 0.00398),
}


@dataclass(frozen=True)
class StateVector:
    S_H: float
    I_H: float
    R_H: float
    S_M: float
    L_M: float
    I_M: float
    S_E: float
    I_E: float

    @property
    def N_H(self) -> float:
        return self.S_H + self.I_H + self.R_H

    @property
    def N_M(self) -> float:
        return self.S_M + self.L_M + self.I_M

    @property
    def N_E(self) -> float:
        return self.S_E + self.I_E

    def __iter__(self) -> Iterator[float]:
        return (getattr(self, name) for name in COMPARTMENTS)

    def to_array(self) -> np.ndarray:
        return np.array(list(self), dtype=float)

    @classmethod
    def from_array(cls, y) -> "StateVector":
        y = np.asarray(y, dtype=float)
        if y.shape != (8,):
            raise ValueError(f"expected 8 compartments, got shape {y.shape}")
        return cls(*(float(v) for v in y))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(COMPARTMENTS, self))
