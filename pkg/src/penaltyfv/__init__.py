"""Finite-volume solver and penalty methods for a 1D hyperbolic plasma
transport model near a limiter."""

from .analysis import (
    BlowUpEvent,
    BoundaryLayer,
    ErrorReport,
    RateFit,
    blow_up_detector,
    boundary_layer_thickness,
    error_norms,
    fit_rate,
    observed_orders,
)
from .boundary import BCKind, BoundaryCondition, asymptotic_bc, fill_ghosts
from .cases import (
    CASES,
    AnalyticReference,
    ManufacturedCase,
    NumericalReference,
    case_isoardi,
    case_regular,
    case_stationary,
    reference_two_fields,
    stationary_profile,
)
from .config import ConfigError, RunConfig, SweepConfig, load_config, parse_config
from .errors import BlowUpError, PositivityError, SolverError
from .experiments import RunResult, SweepResult, eta_study, mesh_study, run_config, sweep_eps
from .flux import interface_flux, muscl_reconstruct, rusanov_flux, vfroe_ncv_flux
from .grid import FieldState, Grid1D, RegionMask, alpha_cutoff, build_grid
from .schemes import (
    BlowUpHook,
    PenaltyScheme,
    RunLog,
    SchemeKind,
    StepReport,
    Stepping,
    TwoFieldsForm,
    compute_dt,
    run_until,
    step_heun,
)

__version__ = "0.1.0"
