"""Host-vector-egg dengue transmission model with vector-control analysis."""
from .equilibrium import (
    DiseaseFreePopulations,
    EquilibriumPoint,
    disease_free_populations,
    endemic_equilibrium,
    equilibrium_host_population,
    exact_host_population,
    perturbative_host_population,
)
from .errors import (
    ConfigError,
    DiseaseFreeTransition,
    DomainError,
    InsufficientData,
    ModelError,
    NumericalError,
    StiffnessError,
    ViabilityError,
)
from .model import eip_equivalence, rhs, seasonal_factor
from .montecarlo import SamplerConfig, calibrate_shape, run_monte_carlo, sample_parameters, summarize
from .params import BASELINE, COMPARTMENTS, PARAM_NAMES, ModelParams, SeasonalFactor, StateVector
from .sensitivity import elasticity_table, strategy_ranking
from .solver import SolverConfig, Trajectory, detect_steady_state, integrate
from .spatial import BiteKernel, Grid, SpatialField, build_kernel, simulate_spatial
from .thresholds import (
    basic_reproduction_number,
    endemic_threshold,
    force_of_infection_from_prevalence,
    force_of_infection_from_R0,
    prevalence_from_R0,
    threshold_report,
)
