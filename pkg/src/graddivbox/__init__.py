"""Pseudospectral periodic-box solver for grad-div penalized incompressible flow.

Subpackages:

- `grid`: periodic grids, fields, exact spectral operators
- `forcing`: divergence-free low-mode body forces and their scales F, L, kappa
- `solver`: skew-symmetrized nonlinearity and IMEX time stepping
- `stats`: time-averaged dissipation statistics and the energy-budget audit
- `criterion`: nondimensional groups, dissipation bound, admissible gamma windows
- `config` / `runner` / `cli`: configuration, runs, sweeps, persistence
"""

from .criterion import (
    CriterionInput,
    CriterionReport,
    build_report,
    eps_bound,
    gamma_range_mesh_dependent,
    gamma_range_mesh_independent,
    kolmogorov_eta,
    nondimensional_groups,
)
from .forcing import ForceStats, ForcingSpec, compute_F, compute_kappa, compute_L, realize_force
from .grid import Field, GridSpec, dealias, divergence, grad_div, gradient, laplacian, volume_norm_sq
from .solver import BlowUpError, FlowParams, StepperConfig, rhs, run_mms, step, suggest_dt
from .stats import RunningStats, dissipation_rate, finalize, merge, update

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "CriterionInput",
    "CriterionReport",
    "Field",
    "FlowParams",
    "ForceStats",
    "ForcingSpec",
    "GridSpec",
    "RunningStats",
    "StepperConfig",
    "build_report",
    "compute_F",
    "compute_L",
    "compute_kappa",
    "dealias",
    "dissipation_rate",
    "divergence",
    "eps_bound",
    "finalize",
    "gamma_range_mesh_dependent",
    "gamma_range_mesh_independent",
    "grad_div",
    "gradient",
    "kolmogorov_eta",
    "laplacian",
    "merge",
    "nondimensional_groups",
    "realize_force",
    "rhs",
    "run_mms",
    "step",
    "suggest_dt",
    "update",
    "volume_norm_sq",
]
