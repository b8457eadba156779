"""Command-line front end: YAML scenarios in, CSV/JSON tables plus a run manifest out.

Every verb works without a config file using the compiled-in baseline
parameters.  Results are computed in full before anything is written, so a
failing run leaves no partial artifacts in the output directory.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .equilibrium import disease_free_populations, endemic_equilibrium
from .errors import ConfigError, ModelError
from .montecarlo import OUTPUTS, SamplerConfig, run_monte_carlo
from .params import BASELINE, COMPARTMENTS, PARAM_NAMES, ModelParams, SeasonalFactor, StateVector
from .sensitivity import QUANTITIES, elasticity_table, strategy_ranking
from .solver import SolverConfig, detect_steady_state, integrate
from .spatial import PROFILES, Grid, SpatialField, build_kernel, simulate_spatial
from .thresholds import threshold_report

MODES = ("equilibrium", "simulate", "sensitivity", "montecarlo", "spatial", "compare-strategies", "sweep")
FORMATS = ("csv", "json")
EXIT_OK, EXIT_CONFIG, EXIT_MODEL = 0, 2, 3


@dataclass
class SimulateOptions:
    t_end: float = 3650.0
    initial: Any = "disease-free"     # "disease-free" | "equilibrium" | {compartment: value}
    infected: float = 1.0             # I_H seeded into the disease-free start


@dataclass
class SpatialOptions:
    shape: list = field(default_factory=lambda: [21])
    spacing: float = 1.0
    periodic: bool = False
    profile: str = "exponential"
    radius: float = 3.0
    t_end: float = 365.0
    seed_cell: int = 0
    seed_I_M: float = 100.0
    overrides: dict = field(default_factory=dict)


@dataclass
class SweepOptions:
    param: str = "mu_M"
    values: list = field(default_factory=list)


@dataclass
class ScenarioConfig:
    mode: str = "equilibrium"
    seed: int = 2013
    out: str = "results"
    format: str = "csv"
    workers: int = 1
    params: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    sampler: dict = field(default_factory=dict)
    simulate: SimulateOptions = field(default_factory=SimulateOptions)
    sensitivity: dict = field(default_factory=lambda: {"delta_frac": 0.01})
    compare: dict = field(default_factory=lambda: {"quantity": "lambda"})
    spatial: SpatialOptions = field(default_factory=SpatialOptions)
    sweep: SweepOptions = field(default_factory=SweepOptions)

    def model_params(self) -> ModelParams:
        values = dict(self.params)
        season = values.pop("seasonality", None)
        unknown = set(values) - set(PARAM_NAMES)
        if unknown:
            raise ConfigError(f"params: unknown parameter(s) {sorted(unknown)}")
        try:
            p = BASELINE
            if season is not None:
                if not isinstance(season, dict):
                    raise ConfigError("params.seasonality must be a mapping")
                p = ModelParams(**{**{f.name: getattr(p, f.name) for f in fields(p)},
                                   "seasonality": SeasonalFactor(**season)})
            return p.with_values(**values)
        except TypeError as exc:
            raise ConfigError(f"params: {exc}") from exc

    def solver_config(self) -> SolverConfig:
        try:
            return SolverConfig(**self.solver)
        except TypeError as exc:
            raise ConfigError(f"solver: {exc}") from exc

    def sampler_config(self) -> SamplerConfig:
        opts = {"seed": self.seed, **self.sampler}
        if "enabled" in opts:
            opts["enabled"] = tuple(opts["enabled"])
        try:
            return SamplerConfig(**opts)
        except TypeError as exc:
            raise ConfigError(f"sampler: {exc}") from exc

    def echo(self) -> dict:
        return asdict(self)


_NESTED = {"simulate": SimulateOptions, "spatial": SpatialOptions, "sweep": SweepOptions}


def config_from_mapping(data: Any) -> ScenarioConfig:
    if not isinstance(data, dict) or not data:
        raise ConfigError("config must be a non-empty mapping")
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    kw = {}
    for key, value in data.items():
        if key in _NESTED:
            if not isinstance(value, dict):
                raise ConfigError(f"{key} must be a mapping")
            try:
                kw[key] = _NESTED[key](**value)
            except TypeError as exc:
                raise ConfigError(f"{key}: {exc}") from exc
        elif key in ("params", "solver", "sampler", "sensitivity", "compare"):
            if not isinstance(value, dict):
                raise ConfigError(f"{key} must be a mapping")
            kw[key] = value
        else:
            kw[key] = value
    cfg = ScenarioConfig(**kw)
    validate(cfg)
    return cfg


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if data is None:
        raise ConfigError(f"config file {path} is empty")
    return config_from_mapping(data)


def validate(cfg: ScenarioConfig) -> None:
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {cfg.mode!r}")
    if cfg.format not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {cfg.format!r}")
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or cfg.seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {cfg.seed!r}")
    if not isinstance(cfg.workers, int) or cfg.workers < 1:
        raise ConfigError("workers must be a positive integer")
    if cfg.compare.get("quantity", "lambda") not in QUANTITIES:
        raise ConfigError(f"compare.quantity must be one of {QUANTITIES}")
    if cfg.spatial.profile not in PROFILES:
        raise ConfigError(f"spatial.profile must be one of {PROFILES}")
    if cfg.sweep.param not in PARAM_NAMES:
        raise ConfigError(f"sweep.param must be one of {PARAM_NAMES}")
    if not isinstance(cfg.sweep.values, list):
        raise ConfigError("sweep.values must be a list")
    # surface misspelled keys before any work is done
    cfg.solver_config()
    cfg.sampler_config()
    cfg.model_params()


# ---------------------------------------------------------------- tables

@dataclass
class Table:
    name: str
    header: list[str]
    rows: list[list]

    def render(self, fmt: str) -> str:
        if fmt == "json":
            records = [dict(zip(self.header, (_plain(v) for v in row))) for row in self.rows]
            return json.dumps(records, indent=1) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _cell(v) -> str:
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


# ---------------------------------------------------------------- modes

def _equilibrium(cfg: ScenarioConfig) -> list[Table]:
    p = cfg.model_params()
    rep = threshold_report(p)
    eq = endemic_equilibrium(p)
    rows = [["R0", rep.R0], ["T_h", rep.T_h], ["lambda", rep.lambda_],
            ["prevalence", rep.prevalence], ["N_H", rep.N_H], ["N_H_bar", rep.N_H_bar],
            ["N_M", rep.N_M], ["N_E", eq.N_E], ["I_M_eq", rep.I_M_eq],
            ["endemic", eq.endemic]]
    rows += [[name, value] for name, value in eq.state.as_dict().items()]
    return [Table("equilibrium", ["quantity", "value"], rows)]


def _initial_state(cfg: ScenarioConfig, p: ModelParams) -> StateVector:
    init = cfg.simulate.initial
    if init == "equilibrium":
        return endemic_equilibrium(p).state
    if init == "disease-free":
        d = disease_free_populations(p)
        k = cfg.simulate.infected
        return StateVector(d.N_H0 - k, k, 0.0, d.N_M, 0.0, 0.0, d.N_E, 0.0)
    if isinstance(init, dict):
        missing = set(COMPARTMENTS) - set(init)
        if missing:
            raise ConfigError(f"simulate.initial is missing {sorted(missing)}")
        return StateVector(**{k: float(init[k]) for k in COMPARTMENTS})
    raise ConfigError("simulate.initial must be 'disease-free', 'equilibrium' or a mapping")


def _simulate(cfg: ScenarioConfig) -> list[Table]:
    p = cfg.model_params()
    scfg = cfg.solver_config()
    traj = integrate(_initial_state(cfg, p), p, (0.0, float(cfg.simulate.t_end)), scfg)
    rows = [[t, *s] for t, s in zip(traj.times, traj.states)]
    converged, mean = detect_steady_state(traj, scfg.window, scfg.steady_tol)
    steady = [["converged", converged]] + [[k, v] for k, v in mean.as_dict().items()]
    return [Table("trajectory", ["t", *COMPARTMENTS], rows),
            Table("steady_state", ["quantity", "value"], steady)]


def _sensitivity(cfg: ScenarioConfig) -> list[Table]:
    report = elasticity_table(cfg.model_params(), float(cfg.sensitivity.get("delta_frac", 0.01)))
    print(report.to_text())
    return [Table("sensitivity", list(report.HEADER), report.rows())]


def _compare(cfg: ScenarioConfig) -> list[Table]:
    quantity = cfg.compare.get("quantity", "lambda")
    report = elasticity_table(cfg.model_params(), float(cfg.sensitivity.get("delta_frac", 0.01)))
    ranking = strategy_ranking(report, quantity)
    rows = [[i + 1, r.strategy, r.param, quantity, r.elasticity, report.elasticity("R0", r.param)]
            for i, r in enumerate(ranking)]
    for row in rows:
        print(f"{row[0]}. {row[1]:<17} ({row[2]}) elasticity {row[4]:+.4g}")
    return [Table("strategies", ["rank", "strategy", "param", "quantity", "elasticity", "R0_elasticity"], rows)]


def _montecarlo(cfg: ScenarioConfig) -> list[Table]:
    result = run_monte_carlo(cfg.model_params(), cfg.sampler_config(), workers=cfg.workers)
    s = result.summary
    summary = [[kind, name, mean, var, lo, hi, n] for kind, name, mean, var, lo, hi, n in s.rows()]
    summary.append(["count", "below_threshold", float(s.n_below_threshold), "", "", "", s.n_draws])
    summary.append(["count", "invalid", float(s.n_invalid), "", "", "", s.n_draws])
    draws = [[i, *(p.get(n) for n in PARAM_NAMES), *row]
             for i, (p, row) in enumerate(zip(result.draws, result.outputs))]
    return [Table("montecarlo_summary", ["kind", "name", "mean", "variance", "q2.5", "q97.5", "n"], summary),
            Table("montecarlo_draws", ["draw", *PARAM_NAMES, *OUTPUTS], draws)]


def _spatial(cfg: ScenarioConfig) -> list[Table]:
    o = cfg.spatial
    p = cfg.model_params()
    grid = Grid(tuple(o.shape), o.spacing, o.periodic)
    kernel = build_kernel(o.profile, o.radius, grid)
    d = disease_free_populations(p)
    base = StateVector(d.N_H0, 0.0, 0.0, d.N_M, 0.0, 0.0, d.N_E, 0.0)
    sfield = SpatialField.uniform(grid, base, {k: np.asarray(v, float) for k, v in o.overrides.items()})
    if not 0 <= o.seed_cell < grid.ncells:
        raise ConfigError(f"spatial.seed_cell must lie in [0, {grid.ncells})")
    sfield.states[COMPARTMENTS.index("I_M"), o.seed_cell] += o.seed_I_M
    traj = simulate_spatial(sfield, kernel, p, (0.0, float(o.t_end)), cfg.solver_config())
    prev = traj.prevalence()
    ncell = grid.ncells
    prevalence = Table("spatial_prevalence", ["t", *(f"cell{i}" for i in range(ncell))],
                       [[t, *row] for t, row in zip(traj.times, prev)])
    coords = grid.coords()
    axes = ["x", "y"][: coords.shape[1]]
    final = Table("spatial_final", ["cell", *axes, *COMPARTMENTS],
                  [[i, *(int(c) for c in coords[i]), *traj.states[-1, :, i]] for i in range(ncell)])
    return [prevalence, final]


def sweep_rows(p: ModelParams, param: str, values: Sequence[float]) -> list[list]:
    """One (value, R0, lambda, prevalence, error) row per value; failures stay in-row."""
    rows = []
    for v in values:
        try:
            rep = threshold_report(p.with_values(**{param: float(v)}))
            rows.append([param, float(v), rep.R0, rep.lambda_, rep.prevalence, ""])
        except (ModelError, ValueError, TypeError) as exc:
            rows.append([param, v, None, None, None, f"{type(exc).__name__}: {exc}"])
    return rows


def _sweep(cfg: ScenarioConfig) -> list[Table]:
    rows = sweep_rows(cfg.model_params(), cfg.sweep.param, cfg.sweep.values)
    return [Table("sweep", ["param", "value", "R0", "lambda", "prevalence", "error"], rows)]


_RUNNERS = {
    "equilibrium": _equilibrium,
    "simulate": _simulate,
    "sensitivity": _sensitivity,
    "montecarlo": _montecarlo,
    "spatial": _spatial,
    "compare-strategies": _compare,
    "sweep": _sweep,
}


def _versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"denguevc": pkg, "numpy": np.__version__, "pyyaml": yaml.__version__,
            "python": platform.python_version()}


def run_scenario(cfg: ScenarioConfig) -> list[Path]:
    """Run one scenario and write its tables plus ``manifest.json``.

    Returns the written paths.  Module errors propagate before any file is
    created.
    """
    validate(cfg)
    tables = _RUNNERS[cfg.mode](cfg)
    ext = "json" if cfg.format == "json" else "csv"
    rendered = {f"{t.name}.{ext}": t.render(cfg.format) for t in tables}
    manifest = {
        "mode": cfg.mode,
        "seed": cfg.seed,
        "config": cfg.echo(),
        "versions": _versions(),
        "artifacts": sorted(rendered),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in rendered.items():
        path = out / name
        path.write_text(text)
        written.append(path)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, default=str) + "\n")
    written.append(out / "manifest.json")
    return written


def _origin(exc: BaseException) -> str:
    tb = exc.__traceback__
    module = "denguevc"
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("denguevc"):
            module = name
        tb = tb.tb_next
    return module


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML scenario file")
    common.add_argument("--seed", type=int, help="random seed (overrides config)")
    common.add_argument("--out", help="output directory (overrides config)")
    common.add_argument("--format", choices=FORMATS, help="table format (overrides config)")

    parser = argparse.ArgumentParser(prog="denguevc", description="Dengue vector-control model runs.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode, parents=[common])
        if mode == "compare-strategies":
            sp.add_argument("--quantity", choices=QUANTITIES)
        if mode == "sweep":
            sp.add_argument("--param", choices=PARAM_NAMES)
            sp.add_argument("--values", type=float, nargs="*")
    run = sub.add_parser("run", parents=[common])
    run.add_argument("--mode", choices=MODES, required=True)
    return parser


def _resolve(args: argparse.Namespace) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    cfg.mode = args.mode if args.verb == "run" else args.verb
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    if args.format is not None:
        cfg.format = args.format
    if getattr(args, "quantity", None):
        cfg.compare = {**cfg.compare, "quantity": args.quantity}
    if getattr(args, "param", None):
        cfg.sweep.param = args.param
    if getattr(args, "values", None) is not None:
        cfg.sweep.values = list(args.values)
    validate(cfg)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        paths = run_scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ModelError, ArithmeticError, ValueError) as exc:
        print(f"{_origin(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL
    if cfg.mode == "equilibrium":
        rows = dict(_equilibrium(cfg)[0].rows)
        print(f"R0={rows['R0']:.4g} prevalence={rows['prevalence']:.4g} lambda={rows['lambda']:.4g}")
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK
