"""Acceptance gate: one test and one PASS/FAIL summary line per criterion."""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np
import pytest

from capasym.asymptotics import (
    J1_closed,
    J1_quadrature,
    J2_closed,
    J2_quadrature,
    LiouvilleFrame,
    contraction_bound,
    hyp2f1,
    initial_coeffs,
    picard_step_numeric,
    transformed_reference,
)
from capasym.cli import PRESETS, asym_anchor, main
from capasym.integrator import IvpSpec, energy_residual, solve_damped
from capasym.perturbation import convergence_rate_study, u0_defect, u0_eval, wdelta_error_study

pytestmark = pytest.mark.acceptance

DELTAS = [0.2, 0.1, 0.05, 0.02, 0.01]


def test_c01_u0_closed_form(criterion_report) -> None:
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    exact_peak = u0_eval(3.0) == 9 / 8
    s = rng.uniform(0.0, 60.0, 1000)
    period = float(np.max(np.abs(u0_eval(s + 6.0) - u0_eval(s))))
    x = rng.uniform(0.0, 60.0, 20_000)
    x = x[np.abs(x - 6.0 * np.round(x / 6.0)) > 1e-9][:10_000]
    defect = float(np.max(np.abs(u0_defect(x))))
    dt = time.perf_counter() - t0
    ok = exact_peak and period <= 1e-14 and defect <= 1e-12 and len(x) == 10_000 and dt < 1.0
    criterion_report(1, ok, f"u0(3)=9/8:{exact_peak} periodicity={period:.2e} defect={defect:.2e} t={dt:.2f}s")
    assert ok


def test_c02_corridor(criterion_report) -> None:
    t0 = time.perf_counter()
    worst = math.inf
    for eps in (0.1, 0.5, 1.0):
        end = 2.0 / (1.0 + eps)
        traj = solve_damped(IvpSpec(epsilon=eps, s_end=end))
        s = np.linspace(0.0, end, 4001)
        u, du = traj(s)
        margins = (
            u - s * s / 6,
            s * s / 2 - u,
            s * s - 2 * math.sqrt(2) / 9 * s**3 - du * du,
        )
        worst = min(worst, *(float(np.min(m)) for m in margins))
    dt = time.perf_counter() - t0
    ok = worst >= -1e-9 and dt < 10.0
    criterion_report(2, ok, f"worst margin={worst:.3e} t={dt:.2f}s")
    assert ok


def test_c03_energy_identity(criterion_report) -> None:
    t0 = time.perf_counter()
    damped = energy_residual(solve_damped(IvpSpec(epsilon=0.5, s_end=30.0, abs_tol=1e-10, rel_tol=1e-10)))
    drift = energy_residual(solve_damped(IvpSpec(epsilon=0.0, s_end=30.0, abs_tol=1e-10, rel_tol=1e-10)))
    dt = time.perf_counter() - t0
    ok = damped <= 1e-7 and drift <= 1e-9 and dt < 10.0
    criterion_report(3, ok, f"damped residual={damped:.2e} undamped drift={drift:.2e} t={dt:.2f}s")
    assert ok


def test_c04_small_damping_rate(criterion_report) -> None:
    t0 = time.perf_counter()
    rep = convergence_rate_study([1e-1, 1e-2, 1e-3, 1e-4], 12.0)
    errs = rep.column("sup_error")
    decreasing = bool(np.all(np.diff(errs) > 0))  # rows ascend in eps
    spread = rep.summary["compensated_spread"]
    dt = time.perf_counter() - t0
    ok = decreasing and spread <= 3.0 and dt < 120.0
    criterion_report(
        4, ok,
        f"errors={['%.3g' % e for e in errs]} decreasing={decreasing} "
        f"compensated spread={spread:.1f} (limit 3) loglog slope={rep.summary['eps_loglog_slope']:.3f} t={dt:.2f}s",
    )
    assert ok


def test_c05_wdelta_slopes(criterion_report) -> None:
    t0 = time.perf_counter()
    a = wdelta_error_study(DELTAS, "A", 6.0)
    b = wdelta_error_study(DELTAS, "B", 6.0)
    sa, sb = a.summary["slope"], b.summary["slope"]
    mono = a.summary["monotone_in_delta"] and b.summary["monotone_in_delta"]
    dt = time.perf_counter() - t0
    ok = 0.8 <= sa <= 1.3 and 1.7 <= sb <= 2.3 and mono and dt < 60.0
    criterion_report(
        5, ok, f"slope A={sa:.3f} (band [0.8,1.3]) slope B={sb:.3f} (band [1.7,2.3]) monotone={mono} t={dt:.2f}s"
    )
    assert ok


def test_c06_j_closed_form(criterion_report) -> None:
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for eps in (0.1, 0.8):
        frame = LiouvilleFrame(eps)
        for T in (0.0, 6.855):
            for m in range(1, 7):
                for j in range(m + 2):
                    k = m + 1 - j
                    for closed, quad in ((J1_closed, J1_quadrature), (J2_closed, J2_quadrature)):
                        q, _ = quad(j, k, m, frame, T)
                        worst = max(worst, abs(closed(j, k, m, frame, T) - q) / abs(q))
                        count += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 30.0
    criterion_report(6, ok, f"{count} integrals, max rel deviation={worst:.2e} t={dt:.2f}s")
    assert ok


def test_c07_picard_fixed_point(criterion_report) -> None:
    t0 = time.perf_counter()
    frame, T = LiouvilleFrame(0.8), 6.855
    ref = transformed_reference(frame, T, T + 20.0)
    a0, b0 = initial_coeffs(*ref(T), T, frame)
    g = np.linspace(T, T + 20.0, 401)
    res = picard_step_numeric(ref.v, frame, a0, b0, g, N=30)
    dev = float(np.max(np.abs(res.v - ref.v(g))))
    dt = time.perf_counter() - t0
    ok = dev <= 1e-6 and dt < 60.0
    criterion_report(7, ok, f"sup deviation={dev:.2e} truncation bound={res.truncation_bound:.1e} t={dt:.2f}s")
    assert ok


def test_c08_asymptotic_ordering(criterion_report) -> None:
    t0 = time.perf_counter()
    parts = []
    ok = True
    for eps, T, large in ((0.8, 0.5, False), (0.8, 6.855, True), (0.1, 6.291, False), (0.1, 12.582, True)):
        r = asym_anchor(eps, T, 20.0, 6, 30, picard=False)
        c = r["coeffs"]
        good = r["dn"] < r["d0"]
        if large:
            good = good and r["dn"] <= 0.05 * (abs(c.A0) + abs(c.B0))
        ok = ok and good
        parts.append(f"(eps={eps},T={T}: n0={r['d0']:.3g} n6={r['dn']:.3g} {'ok' if good else 'bad'})")
    dt = time.perf_counter() - t0
    ok = ok and dt < 120.0
    criterion_report(8, ok, " ".join(parts) + f" t={dt:.2f}s")
    assert ok


def test_c09_hypergeometric(criterion_report) -> None:
    t0 = time.perf_counter()
    origin = hyp2f1(1.0, 1.5, 3.0, 0.0) == 1.0
    log2 = abs(hyp2f1(1.0, 1.0, 2.0, 0.5) - 2.0 * math.log(2.0))
    h1 = contraction_bound(1.3, 0.9165, 0.4)
    h2 = contraction_bound(2.6, 0.9165, 0.4)
    halving = abs(h2 - h1 / 2) <= 4 * np.spacing(abs(h2))
    dt = time.perf_counter() - t0
    ok = origin and log2 <= 1e-13 and halving and dt < 1.0
    criterion_report(9, ok, f"z=0 exact:{origin} |2F1(1,1;2;1/2)-2ln2|={log2:.1e} halving:{halving} t={dt:.3f}s")
    assert ok


def test_c10_determinism(criterion_report, tmp_path: Path) -> None:
    t0 = time.perf_counter()
    same = []
    for name, preset in sorted(PRESETS.items()):
        blobs = []
        for i in range(2):
            out = tmp_path / f"{name}-{i}.csv"
            assert main([preset["command"], "--preset", name, "--out", str(out)]) == 0
            blobs.append(out.read_bytes())
        same.append(blobs[0] == blobs[1])
    dt = time.perf_counter() - t0
    ok = all(same) and dt < 60.0
    criterion_report(10, ok, f"presets identical={dict(zip(sorted(PRESETS), same))} t={dt:.2f}s")
    assert ok
