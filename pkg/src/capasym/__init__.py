"""Inertial capillary rise: the dimensionless height equation ``u'' + eps u' + sqrt(2u) = 1``,
its small-damping limit, and the long-time asymptotics about the equilibrium ``u = 1/2``."""

from __future__ import annotations

from .errors import (
    CapasymError,
    ConfigurationError,
    DivergenceError,
    DomainError,
    InsufficientHorizonError,
    SingularPointError,
)
from .integrator import (
    Extremum,
    IvpSpec,
    Trajectory,
    energy_residual,
    extrema,
    local_series_start,
    series_coefficients,
    solve_damped,
    solve_undamped,
)
from .model import DimensionlessParams, PhysicalParams, State, energy_lhs, omega_from_physical, rhs
from .perturbation import (
    IC_FAMILIES,
    StudyReport,
    convergence_rate_study,
    remainder_sup,
    u0_eval,
    wdelta_error_study,
)

__version__ = "0.1.0"

__all__ = [
    "CapasymError",
    "ConfigurationError",
    "DivergenceError",
    "DomainError",
    "InsufficientHorizonError",
    "SingularPointError",
    "Extremum",
    "IvpSpec",
    "Trajectory",
    "energy_residual",
    "extrema",
    "local_series_start",
    "series_coefficients",
    "solve_damped",
    "solve_undamped",
    "DimensionlessParams",
    "PhysicalParams",
    "State",
    "energy_lhs",
    "omega_from_physical",
    "rhs",
    "IC_FAMILIES",
    "StudyReport",
    "convergence_rate_study",
    "remainder_sup",
    "u0_eval",
    "wdelta_error_study",
]
