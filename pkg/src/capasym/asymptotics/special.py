"""Gauss hypergeometric series and the Picard contraction diagnostic."""

from __future__ import annotations

import math

from scipy.optimize import brentq

from ..errors import DivergenceError, DomainError

__all__ = ["hyp2f1", "contraction_bound", "min_contraction_alpha"]

_MAX_TERMS = 100_000


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """``2F1(a, b; c; z)`` by direct power series, for ``|z| < 1``.

    Terms are generated by their ratio and summation stops once a term is below
    ``1e-16`` relative to the running sum (or exactly zero for a terminating series).
    """
    if abs(z) >= 1.0:
        raise DomainError(f"series needs |z| < 1, got z={z!r}")
    if c <= 0 and float(c).is_integer():
        raise DomainError(f"c must not be a non-positive integer, got {c!r}")
    total = 1.0
    term = 1.0
    comp = 0.0
    for k in range(_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        if term == 0.0:
            return total
        # Kahan summation keeps alternating series accurate
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < 1e-16 * abs(total):
            return total
    raise DivergenceError(f"2F1 series did not converge in {_MAX_TERMS} terms")


def _check_hargs(alpha: float, tau: float, C2: float) -> None:
    if not alpha > 0.0:
        raise DomainError("alpha must be positive")
    if not 0.0 < tau <= 1.0:
        raise DomainError("tau must lie in (0, 1]")
    if not 0.0 < C2 < 0.5:
        raise DomainError("C2 must lie in (0, 1/2)")


def contraction_bound(alpha: float, tau: float, C2: float) -> float:
    """``H = -C2/(2 alpha tau) [2F1(1, 3/2; 3; -2 C2) - 2F1(3/2, 2; 3; -2 C2)]``."""
    _check_hargs(alpha, tau, C2)
    z = -2.0 * C2
    return -C2 / (2.0 * alpha * tau) * (hyp2f1(1.0, 1.5, 3.0, z) - hyp2f1(1.5, 2.0, 3.0, z))


def min_contraction_alpha(tau: float, C2: float, target: float = 1.0) -> float:
    """Smallest ``alpha`` with ``|H| < target`` found by bracketing and root finding.

    ``|H|`` is proportional to ``1/alpha``, so the answer is ``|H(1)| / target``; the
    numeric search is kept so the diagnostic does not depend on that structure.
    """
    if not target > 0.0:
        raise DomainError("target must be positive")
    h = lambda a: abs(contraction_bound(a, tau, C2)) - target  # noqa: E731
    hi = 1.0
    while h(hi) >= 0.0:
        hi *= 2.0
        if not math.isfinite(hi):
            raise DivergenceError("no alpha achieves the target")
    lo = hi
    while h(lo) < 0.0:
        lo /= 2.0
        if lo == 0.0:
            return 0.0
    return brentq(h, lo, hi, xtol=1e-15, rtol=1e-15)
