"""Parameter uncertainty by symmetric Beta resampling around the baseline.

Every enabled parameter is drawn as ``2 * baseline * Beta(shape, shape)`` so
its distribution is symmetric about the baseline on ``[0, 2 * baseline]``.
Each draw has its own generator seeded from ``(seed, draw index)``, which
makes serial and parallel evaluation produce identical samples.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import median
from typing import Sequence

import numpy as np

from .equilibrium import disease_free_populations, endemic_equilibrium
from .errors import DomainError, InsufficientData, ModelError
from .params import BASELINE, PARAM_NAMES, PUBLISHED_MONTE_CARLO, ModelParams
from .thresholds import basic_reproduction_number, force_of_infection_from_prevalence

OUTPUTS = ("R0", "lambda", "prevalence")
Z95 = 1.959963984540054
# probabilities stay valid even when a wide Beta doubles them
_CAPS = {"b": 1.0, "c": 1.0, "g": 1.0 - 1e-9}


def shape_for_halfwidth(rel_halfwidth: float) -> float:
    """Beta shape whose 2*Beta(s, s) has a central 95% half-width of ``rel_halfwidth``.

    Uses the normal approximation, var(2*Beta(s, s)) = 1 / (2s + 1).
    """
    return ((Z95 / rel_halfwidth) ** 2 - 1.0) / 2.0


def calibrate_shape(baseline: ModelParams = BASELINE) -> float:
    """Median shape implied by the published per-parameter 95% half-widths."""
    shapes = [
        shape_for_halfwidth(ci / baseline.get(name))
        for name, (_, _, ci) in PUBLISHED_MONTE_CARLO.items()
    ]
    return median(shapes)


DEFAULT_SHAPE = 600.0


@dataclass(frozen=True)
class SamplerConfig:
    shape: float = DEFAULT_SHAPE
    n_draws: int = 1000
    seed: int = 2013
    enabled: tuple[str, ...] = PARAM_NAMES

    def __post_init__(self):
        if not self.shape > 0:
            raise DomainError("Beta shape must be positive")
        if self.n_draws < 1:
            raise DomainError("n_draws must be >= 1")
        unknown = set(self.enabled) - set(PARAM_NAMES)
        if unknown:
            raise DomainError(f"unknown parameters in enable mask: {sorted(unknown)}")


def draw_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_parameters(baseline: ModelParams, cfg: SamplerConfig) -> list[ModelParams]:
    enabled = [name for name in PARAM_NAMES if name in cfg.enabled]
    draws = []
    for i in range(cfg.n_draws):
        rng = draw_rng(cfg.seed, i)
        factors = rng.beta(cfg.shape, cfg.shape, size=len(enabled)) * 2.0
        values = {}
        for name, factor in zip(enabled, factors):
            v = baseline.get(name) * factor
            if name in _CAPS:
                v = min(v, _CAPS[name])
            values[name] = v
        draws.append(baseline.with_values(**values))
    return draws


def evaluate_draw(p: ModelParams) -> tuple[float, float, float]:
    """(R0, force of infection, prevalence) for one draw.

    Draws below threshold or with a nonviable mosquito population contribute
    zeros; draws outside the model's domain give NaNs.
    """
    try:
        dfp = disease_free_populations(p)
        R0 = basic_reproduction_number(p, dfp.N_M, dfp.N_H0)
        eq = endemic_equilibrium(p)
    except ModelError:
        return (math.nan, math.nan, math.nan)
    if not eq.endemic:
        return (R0, 0.0, 0.0)
    prev = eq.prevalence
    return (R0, force_of_infection_from_prevalence(p, prev), prev)


def evaluate_draws(draws: Sequence[ModelParams], workers: int = 1) -> np.ndarray:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate_draw, draws, chunksize=max(1, len(draws) // (4 * workers))))
    else:
        rows = [evaluate_draw(p) for p in draws]
    return np.array(rows, dtype=float).reshape(len(draws), len(OUTPUTS))


@dataclass(frozen=True)
class ColumnSummary:
    mean: float
    variance: float
    lo: float
    hi: float
    n: int


@dataclass
class MonteCarloSummary:
    params: dict[str, ColumnSummary]
    outputs: dict[str, ColumnSummary]
    n_draws: int
    n_below_threshold: int
    n_invalid: int
    seed: int | None = None
    shape: float | None = None

    def rows(self):
        for kind, table in (("param", self.params), ("output", self.outputs)):
            for name, s in table.items():
                yield [kind, name, s.mean, s.variance, s.lo, s.hi, s.n]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# seed={self.seed} shape={self.shape!r} n_draws={self.n_draws} "
                     f"below_threshold={self.n_below_threshold} invalid={self.n_invalid}\n")
            w = csv.writer(fh)
            w.writerow(["kind", "name", "mean", "variance", "q2.5", "q97.5", "n"])
            for row in self.rows():
                w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def _column(values: np.ndarray) -> ColumnSummary:
    values = values[np.isfinite(values)]
    if len(values) < 2:
        raise InsufficientData("need at least two valid values per column")
    lo, hi = np.quantile(values, [0.025, 0.975])
    return ColumnSummary(float(values.mean()), float(values.var(ddof=1)), float(lo), float(hi), len(values))


def summarize(draws: Sequence[ModelParams], outputs, seed: int | None = None,
              shape: float | None = None) -> MonteCarloSummary:
    """Mean, unbiased variance and central 95% interval per parameter and output.

    ``outputs`` is either an (n, 3) array in ``OUTPUTS`` order or a mapping
    from output name to a length-n array.
    """
    if len(draws) < 2:
        raise InsufficientData(f"need at least 2 draws, got {len(draws)}")
    if isinstance(outputs, dict):
        out = {k: np.asarray(v, dtype=float) for k, v in outputs.items()}
    else:
        arr = np.asarray(outputs, dtype=float)
        out = {name: arr[:, j] for j, name in enumerate(OUTPUTS)}
    params = {name: _column(np.array([p.get(name) for p in draws])) for name in PARAM_NAMES}
    invalid = np.zeros(len(draws), dtype=bool)
    for v in out.values():
        invalid |= ~np.isfinite(v)
    below = int(np.sum((out["R0"] <= 1) & ~invalid)) if "R0" in out else 0
    return MonteCarloSummary(
        params=params,
        outputs={k: _column(v) for k, v in out.items()},
        n_draws=len(draws),
        n_below_threshold=below,
        n_invalid=int(invalid.sum()),
        seed=seed,
        shape=shape,
    )


@dataclass
class MonteCarloResult:
    draws: list[ModelParams]
    outputs: np.ndarray
    summary: MonteCarloSummary
    config: SamplerConfig = field(default_factory=SamplerConfig)

    def draws_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# seed={self.config.seed} shape={self.config.shape!r}\n")
            w = csv.writer(fh)
            w.writerow(["draw", *PARAM_NAMES, *OUTPUTS])
            for i, (p, row) in enumerate(zip(self.draws, self.outputs)):
                w.writerow([i] + [repr(float(p.get(n))) for n in PARAM_NAMES]
                           + [repr(float(v)) for v in row])


def run_monte_carlo(baseline: ModelParams = BASELINE, cfg: SamplerConfig | None = None,
                    workers: int = 1) -> MonteCarloResult:
    cfg = cfg or SamplerConfig()
    draws = sample_parameters(baseline, cfg)
    outputs = evaluate_draws(draws, workers=workers)
    summary = summarize(draws, outputs, seed=cfg.seed, shape=cfg.shape)
    return MonteCarloResult(draws, outputs, summary, cfg)
