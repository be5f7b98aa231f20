"""Enstrophy growth in the one-dimensional viscous Burgers equation.

Pseudo-spectral and Cole-Hopf solvers on the periodic interval, the
instantaneous enstrophy-rate maximizer, closed-form initial data, the
rescaled line-shock solutions and scaling-sweep tooling.
"""

from .errors import (
    BurgersError,
    DomainError,
    NumericalError,
    PeakNotFoundError,
    PreconditionError,
    QuadratureError,
    ResolutionError,
    ValidationError,
)
from .field_core import (
    PeriodicField,
    PeriodicGrid,
    audit_bounds,
    diagnostics,
    energy,
    enstrophy,
    rate_of_change,
    spectral_derivative,
)
from .initial_data import DataFamily, LPolicy, closed_form_KE, closed_form_R, k_from_E, maximize_F, sample
from .periodic_solver import SolverConfig, cole_hopf_periodic, find_enstrophy_peak, integrate
from .line_shock import LineShockParams, LineShockSolution, halfline_diagnostics
from .maximizer import solve_maximizer
from .experiments import SweepSpec, constant_N, fit_power_law, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BurgersError",
    "DomainError",
    "NumericalError",
    "PeakNotFoundError",
    "PreconditionError",
    "QuadratureError",
    "ResolutionError",
    "ValidationError",
    "PeriodicField",
    "PeriodicGrid",
    "audit_bounds",
    "diagnostics",
    "energy",
    "enstrophy",
    "rate_of_change",
    "spectral_derivative",
    "DataFamily",
    "LPolicy",
    "closed_form_KE",
    "closed_form_R",
    "k_from_E",
    "maximize_F",
    "sample",
    "SolverConfig",
    "cole_hopf_periodic",
    "find_enstrophy_peak",
    "integrate",
    "LineShockParams",
    "LineShockSolution",
    "halfline_diagnostics",
    "solve_maximizer",
    "SweepSpec",
    "constant_N",
    "fit_power_law",
    "run_sweep",
]
