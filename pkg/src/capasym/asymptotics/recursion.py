"""Closed-form amplitude recursion for the long-time behaviour of ``v``.

Substituting ``v_n ~ A_n sin(tau s) + B_n cos(tau s)`` into the integral equation and
letting ``s -> inf`` gives

    A_{n+1} = A0 - (1/tau) sum_m sigma_m sum_{j+k=m+1} C(m+1, j) A_n^j B_n^k J1(j, k, m)
    B_{n+1} = B0 + (1/tau) sum_m sigma_m sum_{j+k=m+1} C(m+1, j) A_n^j B_n^k J2(j, k, m)

where ``J1`` and ``J2`` are damped trigonometric moments over ``[T, inf)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from ..errors import DivergenceError, DomainError, InsufficientHorizonError
from ..integrator import Trajectory, extrema
from .liouville import LiouvilleFrame
from .picard import initial_coeffs, sigma

__all__ = [
    "damped_trig_moment",
    "J1_closed",
    "J2_closed",
    "AsymptoticCoeffs",
    "coeff_iterate",
    "asym_eval",
    "asym_eval_u",
    "BoundsEstimate",
    "bounds_estimate",
]


def damped_trig_moment(a: int, b: int, lam: float, tau: float, T: float) -> float:
    """``int_T^inf exp(-lam t) sin(tau t)^a cos(tau t)^b dt`` in closed form.

    Expands both powers into exponentials, so each term is a damped sinusoid of
    frequency ``nu = tau (a - 2l + b - 2p)`` integrated exactly.
    """
    if a < 0 or b < 0:
        raise DomainError("moment exponents must be non-negative")
    if not lam > 0.0:
        raise DomainError(f"decay rate must be positive, got {lam!r}")
    r = a // 2
    odd = a % 2
    total = 0.0
    for l in range(a + 1):
        sgn = -1.0 if (r + l) % 2 else 1.0
        for p in range(b + 1):
            nu = tau * (a - 2 * l + b - 2 * p)
            c, s = math.cos(nu * T), math.sin(nu * T)
            g = lam * s + nu * c if odd else lam * c - nu * s
            total += comb(a, l) * comb(b, p) * sgn * g / (nu * nu + lam * lam)
    return total * math.exp(-lam * T) / 2.0 ** (a + b)


def _check_jkm(j: int, k: int, m: int) -> None:
    if m < 1 or j < 0 or k < 0 or j + k != m + 1:
        raise DomainError(f"need m >= 1, j, k >= 0 and j + k = m + 1; got j={j}, k={k}, m={m}")


def J1_closed(j: int, k: int, m: int, frame: LiouvilleFrame, T: float) -> float:
    """``int_T^inf exp(-lam_m t) sin^j cos^(k+1)``."""
    _check_jkm(j, k, m)
    return damped_trig_moment(j, k + 1, frame.lam(m), frame.tau, T)


def J2_closed(j: int, k: int, m: int, frame: LiouvilleFrame, T: float) -> float:
    """``int_T^inf exp(-lam_m t) sin^(j+1) cos^k``."""
    _check_jkm(j, k, m)
    return damped_trig_moment(j + 1, k, frame.lam(m), frame.tau, T)


@dataclass(frozen=True)
class AsymptoticCoeffs:
    """``(A_n, B_n)`` after ``n`` recursion steps from the anchor data at ``T``."""

    T: float
    n: int
    A: float
    B: float
    N: int
    vT: float
    dvT: float
    A0: float
    B0: float
    history: tuple[tuple[float, float], ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if self.n < 0 or self.N < 1:
            raise DomainError("need n >= 0 and N >= 1")
        if not (math.isfinite(self.A) and math.isfinite(self.B)):
            raise DomainError("coefficients must be finite")

    def at(self, n: int) -> AsymptoticCoeffs:
        """Coefficients of an earlier iterate, with the same provenance."""
        if not 0 <= n <= self.n:
            raise DomainError(f"iterate {n} not in 0..{self.n}")
        a, b = self.history[n]
        return AsymptoticCoeffs(self.T, n, a, b, self.N, self.vT, self.dvT, self.A0, self.B0, self.history[: n + 1])

    @property
    def amplitude(self) -> float:
        return math.hypot(self.A, self.B)


def _moment_tables(frame: LiouvilleFrame, T: float, N: int) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    tables = []
    for m in range(1, N + 1):
        js = np.arange(m + 2)
        w = np.array([comb(m + 1, j) for j in js], dtype=float) * sigma(m)
        j1 = np.array([J1_closed(j, m + 1 - j, m, frame, T) for j in js])
        j2 = np.array([J2_closed(j, m + 1 - j, m, frame, T) for j in js])
        tables.append((w, j1, j2))
    return tables


def coeff_iterate(frame: LiouvilleFrame, T: float, vT: float, dvT: float, n: int, N: int = 30) -> AsymptoticCoeffs:
    if n < 0:
        raise DomainError("iteration count must be non-negative")
    if N < 1:
        raise DomainError("truncation order must be >= 1")
    if T < 0.0:
        raise DomainError("anchor T must be non-negative")
    tau = frame.tau
    a0, b0 = initial_coeffs(vT, dvT, T, frame)
    tables = _moment_tables(frame, T, N) if n > 0 else []
    a, b = a0, b0
    hist = [(a, b)]
    for _ in range(n):
        sa = sb = 0.0
        for m, (w, j1, j2) in enumerate(tables, start=1):
            js = np.arange(m + 2)
            with np.errstate(over="ignore", invalid="ignore"):
                mono = w * a**js * b ** (m + 1 - js)
                da, db = float(mono @ j1), float(mono @ j2)
            if not (math.isfinite(da) and math.isfinite(db)):
                raise DivergenceError(f"non-finite recursion term at m={m}", m=m)
            sa += da
            sb += db
        a, b = a0 - sa / tau, b0 + sb / tau
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DivergenceError("non-finite coefficients after summation", m=N)
        hist.append((a, b))
    return AsymptoticCoeffs(T, n, a, b, N, float(vT), float(dvT), a0, b0, tuple(hist))


def asym_eval(coeffs: AsymptoticCoeffs, frame: LiouvilleFrame, s):
    s = np.asarray(s, dtype=float)
    if np.any(s < coeffs.T):
        raise DomainError(f"asymptotic form is defined for s >= T = {coeffs.T}")
    tau = frame.tau
    v = coeffs.A * np.sin(tau * s) + coeffs.B * np.cos(tau * s)
    return float(v) if v.ndim == 0 else v


def asym_eval_u(coeffs: AsymptoticCoeffs, frame: LiouvilleFrame, s):
    v = asym_eval(coeffs, frame, s)
    u = 0.5 + frame.phi(s) * v
    return float(u) if np.ndim(u) == 0 else u


@dataclass(frozen=True)
class BoundsEstimate:
    C1: float
    C2: float
    T: float

    def __post_init__(self) -> None:
        if not (-0.5 < self.C1 <= self.C2 < 0.5):
            raise DomainError(f"need -1/2 < C1 <= C2 < 1/2, got ({self.C1}, {self.C2})")


def bounds_estimate(traj: Trajectory, frame: LiouvilleFrame, margin: float = 1e-3) -> BoundsEstimate:
    """Empirical ``(C1, C2)`` with ``C1 <= phi v = u - 1/2 <= C2`` on ``[T, s_end]``.

    ``T`` is the earliest extremum (or the start) after which every later extremum of
    ``u - 1/2`` stays inside ``(-1/2 + margin, 1/2 - margin)``; at least two extrema past
    the first time ``|u - 1/2| < 1/4`` are required.
    """
    ext = extrema(traj)
    w = [(traj.s_start, float(traj.u(traj.s_start)) - 0.5)]
    w += [(e.s, e.u - 0.5) for e in ext]
    w.append((traj.s_end, float(traj.u(traj.s_end)) - 0.5))
    vals = np.array([x for _, x in w])
    if np.all(np.abs(vals) < 1e-14):
        return BoundsEstimate(0.0, 0.0, traj.s_start)

    near = next((s for s, x in w if abs(x) < 0.25), None)
    if near is None or sum(1 for e in ext if e.s > near) < 2:
        raise InsufficientHorizonError("trajectory does not settle near u = 1/2 with two later extrema")

    lim = 0.5 - margin
    start = None
    for i in range(len(w)):
        if np.all(np.abs(vals[i:]) < lim):
            start = i
            break
    if start is None or start == len(w) - 1:
        raise InsufficientHorizonError("no anchor T with the required margin inside the trajectory")
    sub = vals[start:]
    return BoundsEstimate(float(sub.min()), float(sub.max()), w[start][0])
