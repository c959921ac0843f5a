"""Liouville transform ``u = 1/2 + phi v`` with ``phi(s) = exp(-eps s / 2)``.

The decaying weight removes the damping term, leaving

    v'' + (2 / (1 + sqrt(1 + 2 phi v)) - eps^2/4) v = 0,

an oscillator whose frequency is modulated by the amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..integrator import IvpSpec, Trajectory, _dopri5, _Run, solve_damped

__all__ = [
    "LiouvilleFrame",
    "to_v",
    "from_v",
    "transformed_defect",
    "green_kernel",
    "TransformedSolution",
    "transformed_reference",
]

# below this anchor the v-equation start is too close to the singular point u = 0
_V_START_MIN = 0.05


@dataclass(frozen=True)
class LiouvilleFrame:
    epsilon: float

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon < 2.0):
            raise DomainError(f"oscillatory regime needs 0 < eps < 2, got {self.epsilon!r}")

    @property
    def tau(self) -> float:
        return math.sqrt(1.0 - 0.25 * self.epsilon * self.epsilon)

    def phi(self, s):
        return np.exp(-0.5 * self.epsilon * np.asarray(s, dtype=float))

    def dphi(self, s):
        return -0.5 * self.epsilon * self.phi(s)

    def lam(self, m: int) -> float:
        """Decay rate of ``phi(t)**m``."""
        return 0.5 * m * self.epsilon


def to_v(u, du, frame: LiouvilleFrame, s):
    phi = frame.phi(s)
    v = (np.asarray(u) - 0.5) / phi
    dv = (np.asarray(du) + 0.5 * frame.epsilon * (np.asarray(u) - 0.5)) / phi
    return v, dv


def from_v(v, dv, frame: LiouvilleFrame, s):
    phi = frame.phi(s)
    u = 0.5 + phi * np.asarray(v)
    du = phi * (np.asarray(dv) - 0.5 * frame.epsilon * np.asarray(v))
    return u, du


def transformed_defect(v, dv, ddv, frame: LiouvilleFrame, s):
    """Residual of the transformed equation; ``dv`` is accepted for interface symmetry."""
    arg = 1.0 + 2.0 * frame.phi(s) * np.asarray(v)
    if np.any(arg <= 0.0):
        raise DomainError("1 + 2 phi v <= 0 corresponds to a negative height")
    return np.asarray(ddv) + (2.0 / (1.0 + np.sqrt(arg)) - 0.25 * frame.epsilon**2) * np.asarray(v)


def green_kernel(z, tau: float):
    """Impulse response ``sin(tau z) / tau`` of ``v'' + tau^2 v``."""
    return np.sin(tau * np.asarray(z)) / tau


@dataclass(frozen=True, eq=False)
class TransformedSolution:
    """Reference ``(v, v')`` on ``[T, s_end]``.

    Past ``s_switch`` it is the integrated transformed equation; any portion before
    that is mapped from the damped ``u`` trajectory.
    """

    frame: LiouvilleFrame
    T: float
    s_switch: float
    v_traj: Trajectory
    u_traj: Trajectory

    @property
    def s_end(self) -> float:
        return self.v_traj.s_end

    def __call__(self, s):
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if np.any(s < self.T - 1e-12) or np.any(s > self.s_end + 1e-12 * max(1.0, self.s_end)):
            raise DomainError(f"evaluation outside [{self.T}, {self.s_end}]")
        v = np.empty_like(s)
        dv = np.empty_like(s)
        tail = s >= self.s_switch
        if np.any(tail):
            v[tail], dv[tail] = self.v_traj(s[tail])
        if np.any(~tail):
            u, du = self.u_traj(s[~tail])
            v[~tail], dv[~tail] = to_v(u, du, self.frame, s[~tail])
        if scalar:
            return float(v[0]), float(dv[0])
        return v, dv

    def v(self, s):
        return self(s)[0]


def transformed_reference(
    frame: LiouvilleFrame, T: float, s_end: float, abs_tol: float = 1e-12, rel_tol: float = 1e-12
) -> TransformedSolution:
    """Reference solution of the transformed equation anchored at the damped ``u(T)``."""
    if T < 0.0 or not s_end > T:
        raise DomainError(f"need 0 <= T < s_end, got T={T!r}, s_end={s_end!r}")
    eps = frame.epsilon
    s_switch = max(T, _V_START_MIN)
    u_traj = solve_damped(IvpSpec(epsilon=eps, s_end=max(s_switch, 1e-3), abs_tol=abs_tol, rel_tol=rel_tol))
    u0, du0 = u_traj(s_switch)
    v0, dv0 = to_v(u0, du0, frame, s_switch)
    quarter = 0.25 * eps * eps
    sqrt, exp = math.sqrt, math.exp

    def f(s: float, v: float, dv: float) -> tuple[float, float]:
        arg = 1.0 + 2.0 * exp(-0.5 * eps * s) * v
        if arg <= 0.0:
            raise DomainError("negative height")
        return dv, -(2.0 / (1.0 + sqrt(arg)) - quarter) * v

    run = _Run(breaks=[s_switch], coeffs=[])
    _dopri5(f, s_switch, (float(v0), float(dv0)), s_end, abs_tol, rel_tol, 1e-3, run)
    v_traj = Trajectory(
        epsilon=eps,
        breaks=np.asarray(run.breaks),
        coeffs=np.asarray(run.coeffs),
        abs_tol=abs_tol,
        rel_tol=rel_tol,
        n_rejected=run.n_rejected,
        variable="v",
    )
    return TransformedSolution(frame=frame, T=T, s_switch=s_switch, v_traj=v_traj, u_traj=u_traj)
