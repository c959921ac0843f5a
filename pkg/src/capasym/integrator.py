"""Reference integration of the damped and undamped capillary-rise problems.

The vector field ``1 - sqrt(2u) - eps u'`` is not Lipschitz at ``u = 0``, so a rest start
cannot be handed to a Runge-Kutta method directly. The solution is analytic at the origin,
and on ``[0, s0]`` we use its truncated power series

    u(s) = s^2/2 - (1 + eps) s^3/6 + c4 s^4 + c5 s^5,

after which an adaptive Dormand-Prince 5(4) pair with its quartic continuous extension
takes over. Undamped (``eps = 0``) orbits of zero energy return to ``u = 0`` with zero
velocity once per period; each such touchdown is bridged with the mirrored series (the
undamped problem is time reversible) followed by a fresh series start.

All output is a :class:`Trajectory`: a piecewise polynomial in the local variable
``theta = (s - s_k) / h_k`` for both ``u`` and ``u'``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .errors import DomainError, SingularPointError
from .model import ENERGY_COEFF, State, energy_lhs

__all__ = [
    "IvpSpec",
    "Trajectory",
    "Extremum",
    "series_coefficients",
    "default_series_switch",
    "local_series_start",
    "solve_damped",
    "solve_undamped",
    "energy_residual",
    "extrema",
]

log = logging.getLogger(__name__)

REST = State(0.0, 0.0)
MAX_HALVINGS = 40
_DEG = 6  # coefficients stored per interval (quintic)

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# b - bhat
_E = (-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40)
# continuous extension: y(t + theta h) = y + h * K^T P [theta, theta^2, theta^3, theta^4]
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

# 6-point Gauss-Legendre on [0, 1]; exact for the degree-10 integrand du^2
_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W
_GL_V = _GL_X[:, None] ** np.arange(6)


# ---------------------------------------------------------------------------
# local series at a rest point


def series_coefficients(epsilon: float) -> tuple[float, float, float, float]:
    """Coefficients ``(c2, c3, c4, c5)`` of the rest-start expansion of ``u``."""
    c2 = 0.5
    c3 = -(1.0 + epsilon) / 6.0
    c4 = -c3 * (1.0 + 3.0 * epsilon) / 12.0
    c5 = (0.5 * c3 * c3 - (1.0 + 4.0 * epsilon) * c4) / 20.0
    return c2, c3, c4, c5


def default_series_switch(epsilon: float) -> float:
    return min(1e-3, 2.0 / (1.0 + epsilon)) / 10.0


def local_series_start(epsilon: float, s: float, series_switch: float | None = None) -> State:
    """State of the rest-start solution at small ``s`` from the truncated series."""
    if epsilon < 0.0:
        raise DomainError(f"epsilon must be non-negative, got {epsilon!r}")
    limit = 2.0 / (1.0 + epsilon)
    if series_switch is not None:
        limit = min(limit, series_switch)
    if not (0.0 <= s <= limit):
        raise DomainError(f"series start needs 0 <= s <= {limit!r}, got {s!r}")
    c2, c3, c4, c5 = series_coefficients(epsilon)
    u = s * s * (c2 + s * (c3 + s * (c4 + s * c5)))
    du = s * (2 * c2 + s * (3 * c3 + s * (4 * c4 + s * 5 * c5)))
    return State(max(u, 0.0), du)


def _series_interval(epsilon: float, x0: float, dx: float, sign: float) -> np.ndarray:
    """Series on ``x = x0 + theta*dx`` as theta-polynomials; ``sign=-1`` mirrors time."""
    c2, c3, c4, c5 = series_coefficients(epsilon)
    p = Polynomial([0.0, 0.0, c2, c3, c4, c5])
    x = Polynomial([x0, dx])
    out = np.zeros((_DEG, 2))
    u = p(x).coef
    du = (sign * p.deriv()(x)).coef
    out[: len(u), 0] = u
    out[: len(du), 1] = du
    return out


# ---------------------------------------------------------------------------
# trajectories


class Extremum(NamedTuple):
    s: float
    u: float
    kind: str  # "max" | "min"


@dataclass(frozen=True, eq=False)
class IvpSpec:
    """Initial value problem for ``u'' + eps u' + sqrt(2u) = 1``."""

    epsilon: float
    s_end: float
    s_start: float = 0.0
    state: State = REST
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    series_switch: float | None = None
    fixed_step: float | None = None
    max_steps: int = 5_000_000

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon!r}")
        if not (math.isfinite(self.s_end) and self.s_end > self.s_start):
            raise DomainError(f"need s_end > s_start, got [{self.s_start}, {self.s_end}]")
        for name in ("abs_tol", "rel_tol"):
            tol = getattr(self, name)
            if not (0.0 < tol <= 1e-2):
                raise DomainError(f"{name} must lie in (0, 1e-2], got {tol!r}")
        if self.is_rest_start:
            sw = self.switch
            if not (0.0 < sw <= 2.0 / (1.0 + self.epsilon)):
                raise DomainError(f"series_switch must lie in (0, 2/(1+eps)], got {sw!r}")
        if self.fixed_step is not None and not self.fixed_step > 0.0:
            raise DomainError("fixed_step must be positive")

    @property
    def is_rest_start(self) -> bool:
        return self.state.u == 0.0 and self.state.du == 0.0

    @property
    def switch(self) -> float:
        if self.series_switch is None:
            return default_series_switch(self.epsilon)
        return self.series_switch


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Dense solution: per-interval quintic polynomials in ``theta`` for ``(u, u')``.

    ``coeffs[k, i, j]`` multiplies ``theta**i`` for component ``j`` on
    ``[breaks[k], breaks[k+1]]``. ``exit_s`` is set when an undamped orbit outside the
    admissible set reached ``u = 0`` and the integration stopped there.
    """

    epsilon: float
    breaks: np.ndarray
    coeffs: np.ndarray
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    n_rejected: int = 0
    exit_s: float | None = None
    variable: str = "u"
    _end: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.breaks.setflags(write=False)
        self.coeffs.setflags(write=False)
        object.__setattr__(self, "_end", self.coeffs[-1].sum(axis=0))

    @property
    def s_start(self) -> float:
        return float(self.breaks[0])

    @property
    def s_end(self) -> float:
        return float(self.breaks[-1])

    @property
    def n_intervals(self) -> int:
        return len(self.coeffs)

    def nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Node times and states ``(s, u, du)`` including the final node."""
        y = np.vstack([self.coeffs[:, 0, :], self._end[None, :]])
        return self.breaks.copy(), y[:, 0].copy(), y[:, 1].copy()

    def __call__(self, s):
        """Evaluate ``(u, du)``; scalars in, scalars out."""
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=float))
        lo, hi = self.breaks[0], self.breaks[-1]
        slack = 1e-12 * max(1.0, abs(hi))
        if np.any(s < lo - slack) or np.any(s > hi + slack) or np.any(np.isnan(s)):
            raise DomainError(f"evaluation outside [{lo}, {hi}]")
        s = np.clip(s, lo, hi)
        k = np.clip(np.searchsorted(self.breaks, s, side="right") - 1, 0, self.n_intervals - 1)
        h = self.breaks[k + 1] - self.breaks[k]
        th = (s - self.breaks[k]) / h
        c = self.coeffs[k]
        y = c[:, _DEG - 1, :]
        for i in range(_DEG - 2, -1, -1):
            y = y * th[:, None] + c[:, i, :]
        if scalar:
            return float(y[0, 0]), float(y[0, 1])
        return y[:, 0], y[:, 1]

    def u(self, s):
        return self(s)[0]

    def du(self, s):
        return self(s)[1]

    def interval_poly(self, k: int, component: int = 0) -> Polynomial:
        """Component polynomial on interval ``k`` in the variable theta."""
        return Polynomial(self.coeffs[k, :, component])


# ---------------------------------------------------------------------------
# Dormand-Prince core

Field = Callable[[float, float, float], tuple[float, float]]


@dataclass
class _Run:
    breaks: list[float]
    coeffs: list[np.ndarray]
    n_rejected: int = 0
    stopped: bool = False


def _dopri5(
    f: Field,
    s: float,
    y: tuple[float, float],
    s_end: float,
    atol: float,
    rtol: float,
    h: float,
    run: _Run,
    *,
    fixed_step: float | None = None,
    stop: Callable[[float, float], bool] | None = None,
    max_steps: int = 5_000_000,
) -> tuple[float, float, float]:
    """Advance from ``s`` to ``s_end`` appending intervals to ``run``.

    Returns the final ``(s, u, du)``. Stage evaluations that leave the domain raise
    DomainError inside ``f``; the step is then retried with half the size.
    """
    u, du = y
    k1 = f(s, u, du)
    halvings = 0
    steps = 0
    if fixed_step is not None:
        h = fixed_step
    span = s_end - s
    h_min = 4.0 * np.finfo(float).eps * max(1.0, abs(s_end))
    while s < s_end:
        if steps >= max_steps:
            raise SingularPointError("step budget exhausted", s)
        last = s + h >= s_end - 1e-14 * span
        if last:
            h = s_end - s
        try:
            k2 = f(s + _C[1] * h, u + h * _A21 * k1[0], du + h * _A21 * k1[1])
            k3 = f(
                s + _C[2] * h,
                u + h * (_A31 * k1[0] + _A32 * k2[0]),
                du + h * (_A31 * k1[1] + _A32 * k2[1]),
            )
            k4 = f(
                s + _C[3] * h,
                u + h * (_A41 * k1[0] + _A42 * k2[0] + _A43 * k3[0]),
                du + h * (_A41 * k1[1] + _A42 * k2[1] + _A43 * k3[1]),
            )
            k5 = f(
                s + _C[4] * h,
                u + h * (_A51 * k1[0] + _A52 * k2[0] + _A53 * k3[0] + _A54 * k4[0]),
                du + h * (_A51 * k1[1] + _A52 * k2[1] + _A53 * k3[1] + _A54 * k4[1]),
            )
            k6 = f(
                s + h,
                u + h * (_A61 * k1[0] + _A62 * k2[0] + _A63 * k3[0] + _A64 * k4[0] + _A65 * k5[0]),
                du + h * (_A61 * k1[1] + _A62 * k2[1] + _A63 * k3[1] + _A64 * k4[1] + _A65 * k5[1]),
            )
            un = u + h * (_B[0] * k1[0] + _B[2] * k3[0] + _B[3] * k4[0] + _B[4] * k5[0] + _B[5] * k6[0])
            dun = du + h * (_B[0] * k1[1] + _B[2] * k3[1] + _B[3] * k4[1] + _B[4] * k5[1] + _B[5] * k6[1])
            k7 = f(s + h, un, dun)
        except DomainError:
            if fixed_step is not None:
                raise SingularPointError("fixed step left the domain", s) from None
            halvings += 1
            run.n_rejected += 1
            if halvings > MAX_HALVINGS or h < h_min:
                raise SingularPointError("step size underflow near u = 0", s) from None
            h *= 0.5
            continue
        ks = (k1, k2, k3, k4, k5, k6, k7)
        if fixed_step is None:
            e0 = h * sum(ei * ki[0] for ei, ki in zip(_E, ks))
            e1 = h * sum(ei * ki[1] for ei, ki in zip(_E, ks))
            sc0 = atol + rtol * max(abs(u), abs(un))
            sc1 = atol + rtol * max(abs(du), abs(dun))
            err = max(abs(e0) / sc0, abs(e1) / sc1)
            if err > 1.0:
                run.n_rejected += 1
                h *= max(0.2, 0.9 * err**-0.2)
                continue
        halvings = 0
        steps += 1
        kmat = np.array(ks)
        q = h * (kmat.T @ _P)  # (2, 4)
        c = np.zeros((_DEG, 2))
        c[0] = (u, du)
        c[1:5] = q.T
        run.breaks.append(s + h if not last else s_end)
        run.coeffs.append(c)
        s = s + h if not last else s_end
        u, du, k1 = un, dun, k7
        if stop is not None and stop(u, du):
            run.stopped = True
            break
        if fixed_step is None:
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err**-0.2))
            h *= fac
        else:
            h = fixed_step
    return s, u, du


def _field(epsilon: float) -> Field:
    sqrt = math.sqrt

    def f(s: float, u: float, du: float) -> tuple[float, float]:
        if u < 0.0:
            raise DomainError("negative height")
        return du, 1.0 - sqrt(2.0 * u) - epsilon * du

    return f


def _truncate_last(run: _Run, s_new: float) -> None:
    """Shrink the last interval to end at ``s_new`` by rescaling theta."""
    a, b = run.breaks[-2], run.breaks[-1]
    r = (s_new - a) / (b - a)
    run.coeffs[-1] = run.coeffs[-1] * (r ** np.arange(_DEG))[:, None]
    run.breaks[-1] = s_new


def _solve(spec: IvpSpec, allow_exit: bool = False) -> Trajectory:
    eps = spec.epsilon
    f = _field(eps)
    s, s_end = spec.s_start, spec.s_end
    run = _Run(breaks=[s], coeffs=[])
    sw = spec.switch
    exit_s = None

    def series_leg(s0: float, x0: float, length: float, sign: float) -> None:
        run.coeffs.append(_series_interval(eps, x0, sign * length, sign))
        run.breaks.append(s0 + length)

    if spec.is_rest_start:
        if s + sw >= s_end:
            series_leg(s, 0.0, s_end - s, 1.0)
            return _make(spec, run)
        series_leg(s, 0.0, sw, 1.0)
        s += sw
        st = local_series_start(eps, sw)
        u, du = st.u, st.du
        h0 = sw
    else:
        u, du = spec.state.u, spec.state.du
        if u == 0.0 and du < 0.0:
            raise DomainError("initial state leaves u >= 0 immediately")
        h0 = 1e-3

    stop = None
    sw0 = sw
    u_sw = local_series_start(0.0, sw0).u
    touch_tol = max(1e-12, 100.0 * spec.abs_tol)
    if eps == 0.0:

        def stop(uu: float, dd: float) -> bool:
            return dd < 0.0 and uu < u_sw

    h = min(h0, s_end - s)
    while True:
        s, u, du = _dopri5(
            f, s, (u, du), s_end, spec.abs_tol, spec.rel_tol, h, run,
            fixed_step=spec.fixed_step, stop=stop, max_steps=spec.max_steps,
        )
        if not run.stopped:
            break
        run.stopped = False
        # crossing of the series level u_sw inside the last interval
        pu = Polynomial(run.coeffs[-1][:, 0]) - u_sw
        theta = brentq(pu, 0.0, 1.0, xtol=1e-15) if pu(0.0) > 0.0 else 0.0
        a, b = run.breaks[-2], run.breaks[-1]
        s_c = a + theta * (b - a)
        du_c = Polynomial(run.coeffs[-1][:, 1])(theta)
        _truncate_last(run, s_c)
        energy = energy_lhs((u_sw, du_c))
        if energy > touch_tol:
            if allow_exit:
                exit_s = s_c
                break
            raise DomainError(f"orbit reaches u = 0 with nonzero velocity near s = {s_c!r}")
        # zero-energy touchdown: mirrored series down to u = 0, then a fresh rest start
        s_star = s_c + sw0
        if s_star >= s_end:
            length = s_end - s_c
            run.coeffs.append(_series_interval(eps, sw0, -length, -1.0))
            run.breaks.append(s_end)
            break
        run.coeffs.append(_series_interval(eps, sw0, -sw0, -1.0))
        run.breaks.append(s_star)
        if s_star + sw0 >= s_end:
            series_leg(s_star, 0.0, s_end - s_star, 1.0)
            break
        series_leg(s_star, 0.0, sw0, 1.0)
        s = s_star + sw0
        st = local_series_start(eps, sw0)
        u, du = st.u, st.du
        h = sw0
    return _make(spec, run, exit_s=exit_s)


def _make(spec: IvpSpec, run: _Run, exit_s: float | None = None) -> Trajectory:
    return Trajectory(
        epsilon=spec.epsilon,
        breaks=np.asarray(run.breaks, dtype=float),
        coeffs=np.asarray(run.coeffs, dtype=float),
        abs_tol=spec.abs_tol,
        rel_tol=spec.rel_tol,
        n_rejected=run.n_rejected,
        exit_s=exit_s,
    )


def solve_damped(spec: IvpSpec) -> Trajectory:
    """Integrate the damped problem described by ``spec``."""
    traj = _solve(spec)
    resid = energy_residual(traj)
    budget = 100.0 * spec.rel_tol * max(1.0, spec.s_end - spec.s_start)
    if resid > budget:
        log.warning("energy residual %.3e exceeds budget %.3e", resid, budget)
    return traj


def solve_undamped(
    delta: float,
    state: State,
    s_end: float,
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-10,
    *,
    allow_exit: bool = False,
    series_switch: float | None = None,
) -> Trajectory:
    """Integrate ``w'' + sqrt(2w) = 1`` from ``(delta, state)``.

    The initial state must have non-positive energy. With ``allow_exit`` an inadmissible
    start is integrated until the orbit reaches ``u = 0``, where the trajectory ends and
    ``exit_s`` records the exit time.
    """
    if energy_lhs(state) > 0.0 and not allow_exit:
        raise DomainError(f"initial state {state} lies outside the admissible set")
    spec = IvpSpec(
        epsilon=0.0, s_start=delta, state=state, s_end=s_end,
        abs_tol=abs_tol, rel_tol=rel_tol, series_switch=series_switch,
    )
    return _solve(spec, allow_exit=allow_exit)


# ---------------------------------------------------------------------------
# diagnostics


def dissipation_integral(traj: Trajectory) -> np.ndarray:
    """Cumulative ``int u'^2 ds`` at every node (6-point Gauss-Legendre per interval)."""
    vals = traj.coeffs[:, :, 1] @ _GL_V.T  # (K, nodes)
    h = np.diff(traj.breaks)
    per = h * ((vals * vals) @ _GL_W)
    return np.concatenate([[0.0], np.cumsum(per)])


def energy_residual(traj: Trajectory) -> float:
    """Max over nodes of ``|E(s) - E(s0) + eps int_{s0}^s u'^2|``."""
    _, u, du = traj.nodes()
    u = np.maximum(u, 0.0)
    energy = 0.5 * du * du + ENERGY_COEFF * u * np.sqrt(u) - u
    resid = energy - energy[0] + traj.epsilon * dissipation_integral(traj)
    return float(np.max(np.abs(resid)))


def extrema(traj: Trajectory) -> list[Extremum]:
    """Turning points of ``u``: sign changes of ``u'`` located on the dense output."""
    s, u, du = traj.nodes()
    sign = np.sign(du)
    out: list[Extremum] = []
    k = 0
    n = len(s)
    while k < n - 1:
        a, b = sign[k], sign[k + 1]
        if a != 0 and b != 0 and a != b:
            p = traj.interval_poly(k, 1)
            th = brentq(p, 0.0, 1.0, xtol=1e-15)
            sk = s[k] + th * (s[k + 1] - s[k])
            out.append(Extremum(float(sk), float(traj.interval_poly(k, 0)(th)), "max" if a > 0 else "min"))
        elif b == 0 and a != 0:
            # turning point exactly on a node: compare with the next nonzero sign
            j = k + 1
            while j < n and sign[j] == 0:
                j += 1
            if j < n and sign[j] != a:
                out.append(Extremum(float(s[k + 1]), float(u[k + 1]), "max" if a > 0 else "min"))
            k = j - 1
        k += 1
    return out
