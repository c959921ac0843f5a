"""Zeroth-order approximation for small damping and the two error studies built on it.

As ``eps -> 0+`` the rest-start solution approaches the period-6 piecewise quartic

    u0(s) = (s - 6(i-1))^2 (6i - s)^2 / 72,    s in [6(i-1), 6i],

which oscillates between 0 and 9/8 on the zero-energy level set.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ._parallel import pmap
from .errors import ConfigurationError, DomainError
from .integrator import IvpSpec, Trajectory, extrema, solve_damped, solve_undamped
from .model import State, energy_lhs

__all__ = [
    "PiecewiseQuartic",
    "U0",
    "u0_eval",
    "u0_deriv",
    "u0_defect",
    "StudyReport",
    "sup_abs_difference",
    "remainder_sup",
    "convergence_rate_study",
    "wdelta_initial_state",
    "wdelta_error",
    "wdelta_error_study",
    "loglog_slope",
    "IC_FAMILIES",
]


@dataclass(frozen=True)
class PiecewiseQuartic:
    period: float = 6.0
    scale: float = 1.0 / 72.0

    def _reduce(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0) or np.any(np.isnan(s)):
            raise DomainError("u0 is defined for s >= 0")
        return np.mod(s, self.period)

    def value(self, s):
        x = self._reduce(s)
        y = self.scale * x * x * (self.period - x) ** 2
        return float(y) if y.ndim == 0 else y

    def deriv(self, s):
        x = self._reduce(s)
        p = self.period
        y = 2.0 * self.scale * x * (p - x) * (p - 2.0 * x)
        return float(y) if y.ndim == 0 else y

    def second_deriv(self, s):
        """Valid away from the knots, where it jumps."""
        x = self._reduce(s)
        p = self.period
        y = 2.0 * self.scale * (p * p - 6.0 * p * x + 6.0 * x * x)
        return float(y) if y.ndim == 0 else y


U0 = PiecewiseQuartic()


def u0_eval(s):
    return U0.value(s)


def u0_deriv(s):
    return U0.deriv(s)


def u0_defect(s):
    """Residual ``u0'' + sqrt(2 u0) - 1``; zero inside each period."""
    return U0.second_deriv(s) + np.sqrt(2.0 * np.asarray(U0.value(s))) - 1.0


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class StudyReport:
    """Rows sorted by the sweep parameter (first column) plus summary and metadata."""

    columns: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    metadata: dict[str, Any] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Unweighted least-squares fit ``log y = p log x + log C``; returns ``(p, C)``."""
    p, logc = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(p), float(math.exp(logc))


def sup_abs_difference(
    f: Callable, g: Callable, a: float, b: float, extra: Sequence[float] = (), per_period: int = 400
) -> float:
    """``max |f - g|`` on ``[a, b]``: dense sampling, the given extra points, then a
    bounded local refinement around the best sample."""
    if b <= a:
        return float(abs(f(a) - g(a)))
    n = max(3, int(math.ceil((b - a) / 6.0 * per_period)) + 1)
    pts = np.unique(np.concatenate([np.linspace(a, b, n), [p for p in extra if a <= p <= b]]))
    d = np.abs(np.asarray(f(pts)) - np.asarray(g(pts)))
    i = int(np.argmax(d))
    best = float(d[i])
    lo, hi = pts[max(i - 1, 0)], pts[min(i + 1, len(pts) - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda s: -abs(float(f(s)) - float(g(s))), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -float(res.fun))
    return best


def _u0_turning_points(a: float, b: float) -> list[float]:
    k = np.arange(math.floor(a / 3.0), math.ceil(b / 3.0) + 1)
    return [float(x) for x in 3.0 * k if a <= x <= b]


# ---------------------------------------------------------------------------
# eps -> 0 remainder


def remainder_sup(epsilon: float, T: float, abs_tol: float = 1e-10, rel_tol: float = 1e-10) -> float:
    """``sup_{[0,T]} |u - u0|`` against a reference damped trajectory."""
    if not epsilon > 0.0:
        raise DomainError("epsilon must be positive")
    if T < 0.0:
        raise DomainError("T must be non-negative")
    if T == 0.0:
        return 0.0
    traj = solve_damped(IvpSpec(epsilon=epsilon, s_end=T, abs_tol=abs_tol, rel_tol=rel_tol))
    extra = [e.s for e in extrema(traj)] + _u0_turning_points(0.0, T)
    return sup_abs_difference(traj.u, u0_eval, 0.0, T, extra)


def convergence_rate_study(
    eps_list: Sequence[float], T: float, abs_tol: float = 1e-10, rel_tol: float = 1e-10
) -> StudyReport:
    """Sup remainder for each eps, compensated by ``-log eps``.

    Summary: least-squares ``C`` of ``err ~ C (-1/log eps)``, the max/min spread of the
    compensated error, and the log-log slope of ``err`` against ``eps``.
    """
    eps = sorted(float(e) for e in eps_list)
    if len(eps) < 3:
        raise ConfigurationError("the rate study needs at least three epsilons")
    if any(not 0.0 < e < 1.0 for e in eps):
        raise ConfigurationError("epsilons must lie in (0, 1)")
    if not T > 0.0:
        raise ConfigurationError("T must be positive")
    errs = pmap(functools.partial(_remainder_job, T=T, abs_tol=abs_tol, rel_tol=rel_tol), eps)
    comp = [e * -math.log(x) for x, e in zip(eps, errs)]
    x = np.array([-1.0 / math.log(e) for e in eps])
    y = np.array(errs)
    c_fit = float(x @ y / (x @ x))
    slope, _ = loglog_slope(eps, errs)
    rows = tuple((e, r, c) for e, r, c in zip(eps, errs, comp))
    return StudyReport(
        columns=("epsilon", "sup_error", "compensated_error"),
        rows=rows,
        metadata={"T": T, "interval": [0.0, T], "abs_tol": abs_tol, "rel_tol": rel_tol},
        summary={
            "C_fit": c_fit,
            "compensated_spread": max(comp) / min(comp),
            "monotone_in_epsilon": bool(all(a < b for a, b in zip(errs, errs[1:]))),
            "eps_loglog_slope": slope,
        },
    )


def _remainder_job(epsilon: float, T: float, abs_tol: float, rel_tol: float) -> float:
    return remainder_sup(epsilon, T, abs_tol, rel_tol)


# ---------------------------------------------------------------------------
# w_delta vs u0

#: initial height and velocity coefficients ``(D1, D2)``: w(delta) = D1 delta^2, w'(delta) = D2 delta
IC_FAMILIES: dict[str, tuple[float, float]] = {
    "A": (1.0 / 2.0, 1.0),
    "B": (7.0 / 18.0, 1.0 / 18.0),
}


def wdelta_initial_state(delta: float, family: str) -> State:
    try:
        d1, d2 = IC_FAMILIES[family]
    except KeyError:
        raise ConfigurationError(f"unknown initial-condition family {family!r}") from None
    return State(d1 * delta * delta, d2 * delta)


def wdelta_error(
    delta: float,
    family: str,
    T: float,
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-10,
    allow_exit: bool = True,
) -> tuple[float, float]:
    """``max |w_delta - u0|`` over ``[delta, T]`` and the time actually reached.

    A start with positive energy leaves the admissible set; with ``allow_exit`` the orbit
    is followed until it reaches ``u = 0`` and the sup is taken up to that time.
    """
    state = wdelta_initial_state(delta, family)
    traj: Trajectory = solve_undamped(delta, state, T, abs_tol, rel_tol, allow_exit=allow_exit)
    end = traj.s_end
    extra = [e.s for e in extrema(traj)] + _u0_turning_points(delta, end)
    return sup_abs_difference(traj.u, u0_eval, delta, end, extra), end


def wdelta_error_study(
    delta_list: Sequence[float],
    family: str,
    T: float = 6.0,
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-10,
    allow_exit: bool = True,
) -> StudyReport:
    deltas = sorted(float(d) for d in delta_list)
    if not deltas:
        raise ConfigurationError("delta list is empty")
    if any(not 0.0 < d < 1.0 for d in deltas):
        raise ConfigurationError("deltas must lie in (0, 1)")
    if T < 6.0:
        raise ConfigurationError("T must be at least one period (6)")
    if family not in IC_FAMILIES:
        raise ConfigurationError(f"unknown initial-condition family {family!r}")
    if not allow_exit:
        for d in deltas:
            st = wdelta_initial_state(d, family)
            if energy_lhs(st) > 0.0:
                raise DomainError(f"family {family} start at delta={d} is outside the admissible set")
    job = functools.partial(
        wdelta_error, family=family, T=T, abs_tol=abs_tol, rel_tol=rel_tol, allow_exit=allow_exit
    )
    results = pmap(job, deltas)
    errs = [r[0] for r in results]
    rows = tuple((d, e, d, d * d, end) for d, (e, end) in zip(deltas, results))
    slope, c = loglog_slope(deltas, errs)
    d1, d2 = IC_FAMILIES[family]
    return StudyReport(
        columns=("delta", "sup_error", "g1", "g2", "s_reached"),
        rows=rows,
        metadata={
            "family": family,
            "w(delta)": f"{d1!r}*delta^2",
            "w'(delta)": f"{d2!r}*delta",
            "T": T,
            "abs_tol": abs_tol,
            "rel_tol": rel_tol,
        },
        summary={
            "slope": slope,
            "C": c,
            "monotone_in_delta": bool(all(a < b for a, b in zip(errs, errs[1:]))),
            "truncated_rows": sum(1 for _, end in results if end < T),
        },
    )
