from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capasym.asymptotics import (
    AsymptoticCoeffs,
    BoundsEstimate,
    J1_closed,
    J1_quadrature,
    J2_closed,
    J2_quadrature,
    LiouvilleFrame,
    asym_eval,
    asym_eval_u,
    bounds_estimate,
    coeff_iterate,
    contraction_bound,
    damped_trig_moment,
    free_oscillation,
    from_v,
    green_kernel,
    hyp2f1,
    initial_coeffs,
    min_contraction_alpha,
    moment_quadrature,
    picard_step_numeric,
    sigma,
    sigma_exact,
    sigma_series,
    to_v,
    transformed_defect,
    transformed_reference,
)
from capasym.errors import DivergenceError, DomainError, InsufficientHorizonError
from capasym.integrator import IvpSpec, solve_damped, solve_undamped
from capasym.model import State

eps_osc = st.floats(min_value=0.01, max_value=1.99)


@pytest.fixture(scope="module")
def ref_08():
    frame = LiouvilleFrame(0.8)
    return frame, transformed_reference(frame, 6.855, 26.855)


class TestFrame:
    @given(eps=eps_osc)
    def test_invariants(self, eps: float) -> None:
        f = LiouvilleFrame(eps)
        assert 0.0 < f.tau <= 1.0
        assert f.phi(0.0) == 1.0
        s = np.linspace(0.0, 50.0, 101)
        assert np.all(np.diff(f.phi(s)) < 0)
        assert f.lam(3) == pytest.approx(1.5 * eps)
        assert np.allclose(f.dphi(s), -eps / 2 * f.phi(s))

    @pytest.mark.parametrize("eps", [0.0, 2.0, -0.5])
    def test_domain(self, eps: float) -> None:
        with pytest.raises(DomainError):
            LiouvilleFrame(eps)

    def test_green_kernel(self) -> None:
        tau = LiouvilleFrame(0.8).tau
        h = 1e-7
        assert green_kernel(0.0, tau) == 0.0
        assert (green_kernel(h, tau) - green_kernel(-h, tau)) / (2 * h) == pytest.approx(1.0, abs=1e-9)


class TestTransform:
    def test_rest_maps_to_initial_v(self) -> None:
        f = LiouvilleFrame(0.8)
        v, dv = to_v(0.0, 0.0, f, 0.0)
        assert v == -0.5
        assert dv == pytest.approx(-0.8 / 4, abs=1e-16)

    @given(eps=eps_osc, s=st.floats(min_value=0.0, max_value=40.0))
    def test_equilibrium_maps_to_origin(self, eps: float, s: float) -> None:
        v, dv = to_v(0.5, 0.0, LiouvilleFrame(eps), s)
        assert v == 0.0 and dv == 0.0

    @given(
        eps=eps_osc,
        u=st.floats(min_value=0.0, max_value=1.125),
        du=st.floats(min_value=-1.0, max_value=1.0),
        s=st.floats(min_value=0.0, max_value=20.0),
    )
    def test_round_trip(self, eps: float, u: float, du: float, s: float) -> None:
        f = LiouvilleFrame(eps)
        u2, du2 = from_v(*to_v(u, du, f, s), f, s)
        assert abs(u2 - u) <= 4 * np.spacing(max(abs(u - 0.5), 0.5))
        assert abs(du2 - du) <= 4 * np.spacing(max(abs(du), eps * abs(u - 0.5), 1e-300))

    def test_defect_zero_at_origin(self) -> None:
        assert transformed_defect(0.0, 0.0, 0.0, LiouvilleFrame(0.5), 3.0) == 0.0

    def test_defect_domain(self) -> None:
        with pytest.raises(DomainError):
            transformed_defect(-0.6, 0.0, 0.0, LiouvilleFrame(0.5), 0.0)

    def test_harmonic_limit(self) -> None:
        # 2/(1+sqrt(1+x)) -> 1 as x -> 0 and eps -> 0
        f = LiouvilleFrame(1e-8)
        v = 1e-9
        assert transformed_defect(v, 0.0, 0.0, f, 0.0) / v == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("eps", [0.1, 0.8, 1.5])
    def test_defect_on_reference_trajectory(self, eps: float) -> None:
        f = LiouvilleFrame(eps)
        traj = solve_damped(IvpSpec(epsilon=eps, s_end=20.0, abs_tol=1e-12, rel_tol=1e-12))
        s = np.linspace(0.5, 19.5, 400)
        u, du = traj(s)
        v, dv = to_v(u, du, f, s)
        ddu = 1.0 - np.sqrt(2.0 * u) - eps * du
        ddv = (ddu + eps * du + eps * eps / 4 * (u - 0.5)) / f.phi(s)
        assert np.max(np.abs(transformed_defect(v, dv, ddv, f, s) * f.phi(s))) <= 1e-14
        # differential check: central differences of the dense dv
        h = 1e-4
        fd = (to_v(*traj(s + h), f, s + h)[1] - to_v(*traj(s - h), f, s - h)[1]) / (2 * h)
        assert np.max(np.abs(transformed_defect(v, dv, fd, f, s) * f.phi(s))) <= 1e-7


class TestSigma:
    def test_values(self) -> None:
        assert sigma(1) == -0.5
        assert sigma(2) == 0.5
        assert sigma(3) == -0.625
        assert sigma_exact(3) == Fraction(-5, 8)

    def test_domain(self) -> None:
        with pytest.raises(DomainError):
            sigma(0)

    @given(x=st.floats(min_value=-0.4, max_value=0.4), N=st.integers(min_value=1, max_value=30))
    def test_series_tail_bound(self, x: float, N: int) -> None:
        exact = math.sqrt(1 + 2 * x) - 1 - x
        bound = abs(sigma(N + 1)) * abs(x) ** (N + 2) / (1 - 2 * abs(x))
        assert abs(exact - float(sigma_series(x, N))) <= bound + 1e-15

    def test_ratio(self) -> None:
        for m in range(1, 40):
            assert abs(sigma(m + 1) / sigma(m)) < 2.0


class TestInitialCoeffs:
    def test_zero_anchor(self) -> None:
        f = LiouvilleFrame(0.8)
        assert initial_coeffs(0.3, 0.2, 0.0, f) == (0.2 / f.tau, 0.3)
        assert initial_coeffs(0.0, 0.0, 4.0, f) == (0.0, 0.0)

    @given(
        eps=eps_osc,
        vT=st.floats(min_value=-1, max_value=1),
        dvT=st.floats(min_value=-1, max_value=1),
        T=st.floats(min_value=0, max_value=50),
    )
    def test_matches_anchor(self, eps: float, vT: float, dvT: float, T: float) -> None:
        f = LiouvilleFrame(eps)
        a, b = initial_coeffs(vT, dvT, T, f)
        tau = f.tau
        assert free_oscillation(a, b, f, T) == pytest.approx(vT, abs=1e-12)
        assert tau * (a * math.cos(tau * T) - b * math.sin(tau * T)) == pytest.approx(dvT, abs=1e-12)


class TestPicard:
    def test_zero_input(self) -> None:
        f = LiouvilleFrame(0.8)
        g = np.linspace(2.0, 10.0, 41)
        r = picard_step_numeric(lambda s: 0.0 * np.asarray(s), f, 0.3, -0.2, g)
        assert np.array_equal(r.v, free_oscillation(0.3, -0.2, f, g))

    def test_fixed_point(self, ref_08) -> None:
        f, ref = ref_08
        T = 6.855
        a0, b0 = initial_coeffs(*ref(T), T, f)
        g = np.linspace(T, T + 20, 201)
        r = picard_step_numeric(ref.v, f, a0, b0, g)
        assert np.max(np.abs(r.v - ref.v(g))) <= 1e-6
        assert r.truncation_bound < 1e-12

    def test_first_sweep_improves(self, ref_08) -> None:
        f, ref = ref_08
        T = 6.855
        a0, b0 = initial_coeffs(*ref(T), T, f)
        g = np.linspace(T, T + 20, 201)
        v0 = lambda s: free_oscillation(a0, b0, f, s)  # noqa: E731
        r = picard_step_numeric(v0, f, a0, b0, g)
        exact = ref.v(g)
        assert np.max(np.abs(r.v - exact)) < np.max(np.abs(v0(g) - exact))

    def test_divergence_guard(self) -> None:
        f = LiouvilleFrame(0.8)
        with pytest.raises(DomainError):
            picard_step_numeric(lambda s: 0.0 * np.asarray(s) + 0.6, f, 0.0, 0.0, [0.0, 1.0])

    @pytest.mark.parametrize("grid", [[1.0], [2.0, 1.0]])
    def test_bad_grid(self, grid: list) -> None:
        with pytest.raises(DomainError):
            picard_step_numeric(lambda s: 0.0 * np.asarray(s), LiouvilleFrame(0.8), 0.0, 0.0, grid)

    def test_spline(self, ref_08) -> None:
        f, _ = ref_08
        g = np.linspace(0.0, 5.0, 51)
        r = picard_step_numeric(lambda s: 0.0 * np.asarray(s), f, 0.1, 0.2, g)
        assert r.as_function()(2.55) == pytest.approx(free_oscillation(0.1, 0.2, f, 2.55), abs=1e-5)


J_CASES = [(m, j) for m in range(1, 7) for j in range(m + 2)]


class TestJ:
    @pytest.mark.parametrize("eps", [0.1, 0.8])
    @pytest.mark.parametrize("T", [0.0, 6.855])
    @pytest.mark.parametrize("m,j", J_CASES)
    def test_closed_vs_oracle(self, eps: float, T: float, m: int, j: int) -> None:
        f = LiouvilleFrame(eps)
        k = m + 1 - j
        for closed, quad in ((J1_closed, J1_quadrature), (J2_closed, J2_quadrature)):
            c = closed(j, k, m, f, T)
            q, _ = quad(j, k, m, f, T)
            assert abs(c - q) <= 1e-10 * abs(q)

    def test_cos_squared(self) -> None:
        lam, tau, T = 0.4, 0.9, 1.3
        expected = math.exp(-lam * T) * (
            1 / (2 * lam) + (lam * math.cos(2 * tau * T) - 2 * tau * math.sin(2 * tau * T)) / (2 * (lam**2 + 4 * tau**2))
        )
        assert damped_trig_moment(0, 2, lam, tau, T) == pytest.approx(expected, rel=1e-14)

    @settings(max_examples=40)
    @given(
        eps=eps_osc,
        T=st.floats(min_value=0.0, max_value=30.0),
        m=st.integers(min_value=1, max_value=12),
        data=st.data(),
    )
    def test_crude_bound(self, eps: float, T: float, m: int, data) -> None:
        f = LiouvilleFrame(eps)
        j = data.draw(st.integers(min_value=0, max_value=m + 1))
        bound = math.exp(-f.lam(m) * T) / f.lam(m)
        assert abs(J1_closed(j, m + 1 - j, m, f, T)) <= bound * (1 + 1e-12)
        assert abs(J2_closed(j, m + 1 - j, m, f, T)) <= bound * (1 + 1e-12)

    def test_domain(self) -> None:
        f = LiouvilleFrame(0.8)
        with pytest.raises(DomainError):
            J1_closed(1, 1, 2, f, 0.0)
        with pytest.raises(DomainError):
            damped_trig_moment(1, 1, 0.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            moment_quadrature(1, 1, 0.0, 1.0, 0.0)


class TestRecursion:
    def test_zero_iterations(self) -> None:
        f = LiouvilleFrame(0.8)
        c = coeff_iterate(f, 6.855, -0.58, -0.04, 0)
        assert (c.A, c.B) == initial_coeffs(-0.58, -0.04, 6.855, f)
        assert c.n == 0 and c.N == 30

    def test_provenance_and_history(self) -> None:
        f = LiouvilleFrame(0.8)
        c = coeff_iterate(f, 6.855, -0.58, -0.04, 3, N=10)
        assert (c.vT, c.dvT, c.T) == (-0.58, -0.04, 6.855)
        assert len(c.history) == 4
        assert c.at(0).A == c.A0 and c.at(3) == c

    @pytest.mark.parametrize("eps,T", [(0.8, 6.855), (0.1, 40.0)])
    def test_improves_on_free_oscillation(self, eps: float, T: float) -> None:
        f = LiouvilleFrame(eps)
        ref = transformed_reference(f, T, T + 20.0)
        c = coeff_iterate(f, T, *ref(T), 6)
        s = np.linspace(T, T + 20.0, 2001)
        v = ref.v(s)
        d0 = np.max(np.abs(v - asym_eval(c.at(0), f, s)))
        d6 = np.max(np.abs(v - asym_eval(c, f, s)))
        assert d6 < d0

    def test_truncation_converges(self) -> None:
        f = LiouvilleFrame(0.8)
        c20 = coeff_iterate(f, 6.855, -0.58, -0.04, 4, N=20)
        c30 = coeff_iterate(f, 6.855, -0.58, -0.04, 4, N=30)
        assert c20.A == pytest.approx(c30.A, abs=1e-12)
        assert c20.B == pytest.approx(c30.B, abs=1e-12)

    def test_divergence(self) -> None:
        f = LiouvilleFrame(0.05)
        with pytest.raises(DivergenceError) as info:
            coeff_iterate(f, 0.0, 1e30, 1e30, 3, N=30)
        assert info.value.m is not None

    @pytest.mark.parametrize("kw", [dict(n=-1), dict(n=1, N=0)])
    def test_invalid(self, kw: dict) -> None:
        with pytest.raises(DomainError):
            coeff_iterate(LiouvilleFrame(0.5), 1.0, 0.1, 0.1, **kw)


class TestAsymEval:
    def test_zero(self) -> None:
        f = LiouvilleFrame(0.5)
        c = AsymptoticCoeffs(1.0, 0, 0.0, 0.0, 30, 0.0, 0.0, 0.0, 0.0, ((0.0, 0.0),))
        assert asym_eval(c, f, 3.0) == 0.0
        assert asym_eval_u(c, f, 3.0) == 0.5

    def test_before_anchor(self) -> None:
        f = LiouvilleFrame(0.5)
        c = AsymptoticCoeffs(1.0, 0, 0.1, 0.1, 30, 0.1, 0.0, 0.1, 0.1, ((0.1, 0.1),))
        with pytest.raises(DomainError):
            asym_eval(c, f, 0.5)

    def test_decays_to_jurin(self) -> None:
        f = LiouvilleFrame(0.5)
        c = AsymptoticCoeffs(0.0, 0, 0.3, -0.4, 30, 0.0, 0.0, 0.3, -0.4, ((0.3, -0.4),))
        assert asym_eval_u(c, f, 200.0) == pytest.approx(0.5, abs=1e-20)

    @given(
        a=st.floats(min_value=-2, max_value=2),
        b=st.floats(min_value=-2, max_value=2),
        s=st.floats(min_value=0, max_value=100),
    )
    def test_harmonic_bound(self, a: float, b: float, s: float) -> None:
        f = LiouvilleFrame(0.7)
        c = AsymptoticCoeffs(0.0, 0, a, b, 30, 0.0, 0.0, a, b, ((a, b),))
        assert abs(asym_eval(c, f, s)) <= c.amplitude * (1 + 1e-15)


class TestBounds:
    def test_damped(self) -> None:
        f = LiouvilleFrame(0.8)
        b = bounds_estimate(solve_damped(IvpSpec(epsilon=0.8, s_end=40.0)), f)
        assert -0.5 < b.C1 <= b.C2 < 0.5
        assert b.T > 0.0

    def test_constant(self) -> None:
        traj = solve_undamped(0.0, State(0.5, 0.0), 20.0)
        assert bounds_estimate(traj, LiouvilleFrame(0.8)) == BoundsEstimate(0.0, 0.0, 0.0)

    def test_heavy_damping(self) -> None:
        f = LiouvilleFrame(1.9)
        b = bounds_estimate(solve_damped(IvpSpec(epsilon=1.9, s_end=80.0)), f)
        assert -0.5 < b.C1 <= b.C2 < 0.5

    def test_short_horizon(self) -> None:
        with pytest.raises(InsufficientHorizonError):
            bounds_estimate(solve_damped(IvpSpec(epsilon=0.8, s_end=2.0)), LiouvilleFrame(0.8))

    def test_invariant(self) -> None:
        with pytest.raises(DomainError):
            BoundsEstimate(0.2, 0.1, 0.0)


def _compensated_series(a: float, b: float, c: float, z: float, terms: int = 200) -> float:
    out, t = [1.0], 1.0
    for k in range(terms - 1):
        t *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        out.append(t)
    return math.fsum(out)


class TestHyp2f1:
    def test_origin(self) -> None:
        assert hyp2f1(1.3, -2.2, 0.7, 0.0) == 1.0

    def test_log_identity(self) -> None:
        assert abs(hyp2f1(1, 1, 2, 0.5) - 2 * math.log(2)) <= 1e-13

    def test_against_compensated_sum(self) -> None:
        assert hyp2f1(1, 1.5, 3, -0.5) == pytest.approx(_compensated_series(1, 1.5, 3, -0.5), abs=1e-13)

    def test_terminating(self) -> None:
        # 2F1(-2, b; c; z) is a quadratic
        b, c, z = 1.5, 2.0, 0.3
        expected = 1 - 2 * b / c * z + b * (b + 1) / (c * (c + 1)) * z * z
        assert hyp2f1(-2, b, c, z) == pytest.approx(expected, rel=1e-15)

    @given(z=st.floats(min_value=-0.9, max_value=0.9))
    def test_log_identity_everywhere(self, z: float) -> None:
        expected = 1.0 if z == 0 else -math.log1p(-z) / z
        assert hyp2f1(1, 1, 2, z) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("args", [(1, 1, 2, 1.0), (1, 1, 2, -1.5), (1, 1, 0, 0.5), (1, 1, -3, 0.5)])
    def test_domain(self, args: tuple) -> None:
        with pytest.raises(DomainError):
            hyp2f1(*args)


class TestContraction:
    def test_halves(self) -> None:
        h1 = contraction_bound(1.7, 0.9165, 0.4)
        assert contraction_bound(3.4, 0.9165, 0.4) == pytest.approx(h1 / 2, rel=4e-16)

    def test_vanishes(self) -> None:
        assert abs(contraction_bound(1e12, 0.9165, 0.4)) < 1e-12

    def test_min_alpha(self) -> None:
        a = min_contraction_alpha(0.9165, 0.4)
        assert abs(contraction_bound(a * 1.001, 0.9165, 0.4)) < 1.0
        assert abs(contraction_bound(a * 0.999, 0.9165, 0.4)) > 1.0
        assert a == pytest.approx(abs(contraction_bound(1.0, 0.9165, 0.4)), rel=1e-12)

    @pytest.mark.parametrize("args", [(0.0, 0.9, 0.4), (1.0, 0.0, 0.4), (1.0, 1.1, 0.4), (1.0, 0.9, 0.5), (1.0, 0.9, 0.0)])
    def test_domain(self, args: tuple) -> None:
        with pytest.raises(DomainError):
            contraction_bound(*args)
