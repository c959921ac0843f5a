"""Quadrature oracles for the damped trigonometric moments."""

from __future__ import annotations

import math
import warnings

from scipy.integrate import IntegrationWarning, quad

from ..errors import DomainError
from .liouville import LiouvilleFrame

__all__ = ["moment_quadrature", "J1_quadrature", "J2_quadrature"]

# exp(-lam t) drops below 1e-16 after this many decay lengths
_DECAY_LENGTHS = 36.85


def moment_quadrature(a: int, b: int, lam: float, tau: float, T: float) -> tuple[float, float]:
    """Adaptive quadrature of ``int_T^inf exp(-lam t) sin^a cos^b`` and an error bound.

    The domain is cut where ``exp(-lam t) < 1e-16`` and integrated half-period by
    half-period; the discarded tail is bounded by ``exp(-lam t_cut) / lam``.
    """
    if not lam > 0.0:
        raise DomainError("decay rate must be positive")
    t_cut = T + _DECAY_LENGTHS / lam
    half = math.pi / tau
    total = 0.0
    err = 0.0
    lo = T
    while lo < t_cut:
        hi = min(lo + half, t_cut)
        # roundoff warnings near the requested floor are expected; the estimate is kept
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            val, e = quad(
                lambda t: math.exp(-lam * t) * math.sin(tau * t) ** a * math.cos(tau * t) ** b,
                lo, hi, epsabs=1e-17, epsrel=1e-14, limit=200,
            )
        total += val
        err += e
        lo = hi
    return total, err + math.exp(-lam * t_cut) / lam


def J1_quadrature(j: int, k: int, m: int, frame: LiouvilleFrame, T: float) -> tuple[float, float]:
    return moment_quadrature(j, k + 1, frame.lam(m), frame.tau, T)


def J2_quadrature(j: int, k: int, m: int, frame: LiouvilleFrame, T: float) -> tuple[float, float]:
    return moment_quadrature(j + 1, k, frame.lam(m), frame.tau, T)
