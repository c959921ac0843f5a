"""Parameterizations, vector field and energy of the capillary-rise equation.

In dimensionless form the column height ``u(s)`` obeys

    u'' + eps * u' + sqrt(2 u) = 1,    u(0) = u'(0) = 0,

with ``eps = 1 / sqrt(omega)`` and ``omega = rho^3 g^2 r^5 / (128 mu^2 gamma cos(theta))``.
The Jurin equilibrium sits at ``u = 1/2``; the motion oscillates about it when ``eps < 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "PhysicalParams",
    "DimensionlessParams",
    "State",
    "omega_from_physical",
    "rhs",
    "energy_lhs",
    "ENERGY_COEFF",
]

#: coefficient of u^{3/2} in the potential, 2*sqrt(2)/3
ENERGY_COEFF = 2.0 * math.sqrt(2.0) / 3.0


def _positive_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class PhysicalParams:
    """Tube and liquid properties in SI units; ``contact_angle`` in radians."""

    density: float
    gravity: float
    radius: float
    viscosity: float
    surface_tension: float
    contact_angle: float = 0.0

    def __post_init__(self) -> None:
        for name in ("density", "gravity", "radius", "viscosity", "surface_tension"):
            object.__setattr__(self, name, _positive_finite(name, getattr(self, name)))
        theta = float(self.contact_angle)
        if not (math.isfinite(theta) and 0.0 <= theta < math.pi / 2):
            raise DomainError(f"contact_angle must lie in [0, pi/2), got {theta!r}")
        object.__setattr__(self, "contact_angle", theta)


@dataclass(frozen=True)
class DimensionlessParams:
    omega: float
    epsilon: float

    def __post_init__(self) -> None:
        _positive_finite("omega", self.omega)
        _positive_finite("epsilon", self.epsilon)
        if abs(self.epsilon * math.sqrt(self.omega) - 1.0) > 4 * 2.0**-52:
            raise DomainError("epsilon must equal 1/sqrt(omega)")

    @classmethod
    def from_omega(cls, omega: float) -> DimensionlessParams:
        omega = _positive_finite("omega", omega)
        return cls(omega=omega, epsilon=1.0 / math.sqrt(omega))

    @classmethod
    def from_epsilon(cls, epsilon: float) -> DimensionlessParams:
        epsilon = _positive_finite("epsilon", epsilon)
        return cls(omega=1.0 / (epsilon * epsilon), epsilon=epsilon)

    @property
    def oscillatory_regime(self) -> bool:
        return self.epsilon < 2.0


@dataclass(frozen=True)
class State:
    u: float
    du: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.u) and math.isfinite(self.du)):
            raise DomainError("state components must be finite")
        if self.u < 0.0:
            raise DomainError(f"height must be non-negative, got u = {self.u!r}")

    @property
    def admissible(self) -> bool:
        """Membership of the zero-energy sublevel set reachable from rest."""
        return energy_lhs(self) <= 0.0


def omega_from_physical(p: PhysicalParams) -> DimensionlessParams:
    """Map physical parameters to the dimensionless pair ``(omega, epsilon)``."""
    omega = (p.density**3 * p.gravity**2 * p.radius**5) / (
        128.0 * p.viscosity**2 * p.surface_tension * math.cos(p.contact_angle)
    )
    if not math.isfinite(omega) or omega <= 0.0:
        raise DomainError(f"parameters give a degenerate omega = {omega!r}")
    return DimensionlessParams.from_omega(omega)


def rhs(state: State | tuple[float, float], epsilon: float) -> tuple[float, float]:
    """Return ``(u', u'')`` for the damped equation.

    Raises DomainError when ``u < 0``; the integrator treats that as a rejected step.
    """
    u, du = (state.u, state.du) if isinstance(state, State) else state
    if u < 0.0:
        raise DomainError(f"u = {u!r} < 0 outside the domain of sqrt(2u)")
    return du, 1.0 - math.sqrt(2.0 * u) - epsilon * du


def energy_lhs(state: State | tuple[float, float]) -> float:
    """Kinetic plus potential energy ``u'^2/2 + (2 sqrt 2 / 3) u^{3/2} - u``."""
    u, du = (state.u, state.du) if isinstance(state, State) else state
    if u < 0.0:
        raise DomainError(f"u = {u!r} < 0 outside the domain of the potential")
    return 0.5 * du * du + ENERGY_COEFF * u * math.sqrt(u) - u
