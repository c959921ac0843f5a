"""Integral form of the transformed equation and one numeric Picard sweep.

On ``[T, s]`` the transformed equation is equivalent to

    v(s) = A0 sin(tau s) + B0 cos(tau s)
           - sum_{m>=1} sigma_m int_T^s G(s - t) phi(t)^m v(t)^{m+1} dt,

with ``G(z) = sin(tau z)/tau`` and ``sigma_m = binom(1/2, m+1) 2^(m+1)``, the
coefficients of ``sqrt(1 + 2x) - 1 - x = sum_m sigma_m x^(m+1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad_vec

from ..errors import DomainError
from .liouville import LiouvilleFrame

__all__ = [
    "sigma",
    "sigma_exact",
    "sigma_series",
    "initial_coeffs",
    "free_oscillation",
    "PicardResult",
    "picard_step_numeric",
]


@lru_cache(maxsize=None)
def sigma_exact(m: int) -> Fraction:
    if m < 1:
        raise DomainError(f"sigma is defined for m >= 1, got {m!r}")
    n = m + 1
    num = Fraction(1)
    for i in range(n):
        num *= Fraction(1, 2) - i
    return num / math.factorial(n) * 2**n


def sigma(m: int) -> float:
    return float(sigma_exact(m))


def sigma_series(x, N: int, coeffs: np.ndarray | None = None):
    """Partial sum ``sum_{m=1}^N sigma_m x^(m+1)``; ``coeffs`` overrides the sigmas."""
    c = np.array([sigma(m) for m in range(1, N + 1)]) if coeffs is None else np.asarray(coeffs)
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for cm in c[::-1]:
        acc = acc * x + cm
    return acc * x * x


def initial_coeffs(vT: float, dvT: float, T: float, frame: LiouvilleFrame) -> tuple[float, float]:
    """``(A0, B0)`` such that ``A0 sin(tau s) + B0 cos(tau s)`` matches ``(vT, dvT)`` at ``T``."""
    tau = frame.tau
    c, s = math.cos(T * tau), math.sin(T * tau)
    return dvT * c / tau + vT * s, vT * c - dvT * s / tau


def free_oscillation(A: float, B: float, frame: LiouvilleFrame, s):
    tau = frame.tau
    s = np.asarray(s, dtype=float)
    return A * np.sin(tau * s) + B * np.cos(tau * s)


@dataclass(frozen=True, eq=False)
class PicardResult:
    s: np.ndarray
    v: np.ndarray
    truncation_bound: float
    sup_phi_v: float

    def as_function(self) -> Callable:
        from scipy.interpolate import CubicSpline

        return CubicSpline(self.s, self.v)


def picard_step_numeric(
    v_fn: Callable,
    frame: LiouvilleFrame,
    A0: float,
    B0: float,
    grid,
    N: int = 30,
    quad_tol: float = 1e-12,
) -> PicardResult:
    """Apply the truncated integral operator to ``v_fn`` on ``grid`` (``grid[0] = T``).

    The kernel is split as ``sin(tau(s-t)) = sin(tau s) cos(tau t) - cos(tau s) sin(tau t)``
    and both moments are accumulated interval by interval with adaptive quadrature.
    """
    if N < 1:
        raise DomainError("truncation order N must be >= 1")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing with at least two points")
    eps, tau = frame.epsilon, frame.tau
    T = grid[0]

    probe = np.union1d(grid, 0.5 * (grid[1:] + grid[:-1]))
    vp = np.asarray(v_fn(probe), dtype=float)
    phv = frame.phi(probe) * vp
    sup_phi_v = float(np.max(np.abs(phv)))
    if sup_phi_v >= 0.5:
        raise DomainError(f"sup |phi v| = {sup_phi_v:.3g} >= 1/2: series may diverge")

    sig = np.array([sigma(m) for m in range(1, N + 1)])

    def integrand(t: float) -> np.ndarray:
        p = math.exp(-0.5 * eps * t)
        x = p * float(v_fn(t))
        acc = 0.0
        for cm in sig[::-1]:
            acc = acc * x + cm
        big_f = acc * x * x / p
        return np.array([math.cos(tau * t) * big_f, math.sin(tau * t) * big_f])

    ic = np.zeros(len(grid))
    is_ = np.zeros(len(grid))
    acc = np.zeros(2)
    for i in range(1, len(grid)):
        val, _ = quad_vec(integrand, grid[i - 1], grid[i], epsabs=quad_tol, epsrel=0.0)
        acc = acc + val
        ic[i], is_[i] = acc

    s = grid
    v_new = free_oscillation(A0, B0, frame, s) - (np.sin(tau * s) * ic - np.cos(tau * s) * is_) / tau
    nxt = abs(sigma(N + 1))
    tail = float(np.max(np.abs(phv) ** (N + 2) / frame.phi(probe)))
    bound = nxt * tail * (s[-1] - T) / tau
    return PicardResult(s=s.copy(), v=v_new, truncation_bound=bound, sup_phi_v=sup_phi_v)
