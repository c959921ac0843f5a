"""Command-line front end.

Subcommands ``simulate``, ``eps-study``, ``delta-study``, ``asym`` and ``validate`` each
produce an :class:`~capasym.records.OutputRecord` written as CSV or JSON. Settings are
resolved in the order built-in defaults, ``--preset``, ``--config`` file, command-line
flags. Exit codes: 0 success, 1 numeric or validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .errors import CapasymError, ConfigurationError, DomainError
from .integrator import IvpSpec, energy_residual, extrema, solve_damped
from .model import DimensionlessParams, PhysicalParams, omega_from_physical
from .perturbation import (
    IC_FAMILIES,
    convergence_rate_study,
    sup_abs_difference,
    u0_defect,
    u0_eval,
    wdelta_error_study,
)
from .records import OutputRecord

log = logging.getLogger("capasym")

COMMANDS = ("simulate", "eps-study", "delta-study", "asym", "validate")

PRESETS: dict[str, dict[str, Any]] = {
    "fig2a": {"command": "delta-study", "family": "A", "deltas": [0.2, 0.1, 0.05, 0.02, 0.01], "t_end": 6.0},
    "fig2b": {"command": "delta-study", "family": "B", "deltas": [0.2, 0.1, 0.05, 0.02, 0.01], "t_end": 6.0},
    "fig3": {"command": "asym", "epsilon": 0.8, "anchor_T": [0.5, 6.855], "iterations": 6, "truncation": 30},
    "fig4": {"command": "asym", "epsilon": 0.1, "anchor_T": [6.291, 12.582], "iterations": 6, "truncation": 30},
}

_PHYSICAL_KEYS = ("density", "gravity", "radius", "viscosity", "surface_tension", "contact_angle")
_FAULTS = ("none", "sigma")


@dataclass
class RunConfig:
    """Fully resolved settings for one command."""

    command: str
    epsilon: float | None = None
    physical: dict[str, float] | None = None
    t_end: float | None = None
    anchor_T: list[float] = field(default_factory=lambda: [6.855])
    iterations: int = 6
    truncation: int = 30
    window: float = 20.0
    grid: float = 0.05
    tol_abs: float = 1e-10
    tol_rel: float = 1e-10
    epsilons: list[float] = field(default_factory=lambda: [1e-1, 1e-2, 1e-3, 1e-4])
    deltas: list[float] = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.02, 0.01])
    family: str = "A"
    allow_exit: bool = True
    fault: str = "none"
    preset: str | None = None
    out: str | None = None
    format: str = "csv"

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigurationError(f"format must be csv or json, got {self.format!r}")
        for name in ("window", "grid", "tol_abs", "tol_rel"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ConfigurationError(f"{name} must be positive, got {v!r}")
        for name in ("anchor_T", "epsilons", "deltas"):
            if not getattr(self, name):
                raise ConfigurationError(f"{name} must be a non-empty list")
        if self.iterations < 0:
            raise ConfigurationError("iterations must be >= 0")
        if self.truncation < 1:
            raise ConfigurationError("truncation must be >= 1")
        if self.fault not in _FAULTS:
            raise ConfigurationError(f"fault must be one of {_FAULTS}")
        if self.command in ("simulate", "asym"):
            if (self.epsilon is None) == (self.physical is None):
                raise ConfigurationError("give exactly one of --epsilon and --physical")

    def dimensionless(self) -> tuple[float, float | None]:
        """``(epsilon, omega)``; omega is ``None`` for ``epsilon = 0``."""
        if self.physical is not None:
            try:
                d = omega_from_physical(PhysicalParams(**self.physical))
            except (TypeError, DomainError) as exc:
                raise ConfigurationError(f"invalid physical block: {exc}") from None
            return d.epsilon, d.omega
        eps = float(self.epsilon)
        if not (math.isfinite(eps) and eps >= 0.0):
            raise ConfigurationError(f"epsilon must be >= 0, got {eps!r}")
        return eps, (DimensionlessParams.from_epsilon(eps).omega if eps > 0.0 else None)

    def echo(self, keys: Sequence[str]) -> dict[str, Any]:
        out: dict[str, Any] = {"command": self.command}
        if self.preset is not None:
            out["preset"] = self.preset
        for k in keys:
            out[k] = getattr(self, k)
        return out


# ---------------------------------------------------------------------------
# config resolution


def _float_list(text: str | Sequence) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    parts = [p for p in str(text).replace(",", " ").split() if p]
    return [float(p) for p in parts]


_COERCE: dict[str, Callable[[Any], Any]] = {
    "epsilon": float,
    "t_end": float,
    "anchor_T": _float_list,
    "iterations": int,
    "truncation": int,
    "window": float,
    "grid": float,
    "tol_abs": float,
    "tol_rel": float,
    "epsilons": _float_list,
    "deltas": _float_list,
    "family": str,
    "allow_exit": lambda x: x if isinstance(x, bool) else str(x).strip().lower() in ("1", "true", "yes", "on"),
    "fault": str,
    "out": str,
    "format": str,
}


def _read_ini(path: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep key case (anchor_T)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from None
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    try:
        cp.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from None
    return cp


def _physical_block(items: dict[str, str], source: str) -> dict[str, float]:
    unknown = set(items) - set(_PHYSICAL_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown physical keys in {source}: {sorted(unknown)}")
    try:
        return {k: float(items[k]) for k in _PHYSICAL_KEYS if k in items}
    except ValueError as exc:
        raise ConfigurationError(f"bad physical value in {source}: {exc}") from None


def load_physical(path: str) -> dict[str, float]:
    cp = _read_ini(path)
    items: dict[str, str] = {}
    for sec in cp.sections():
        items.update(cp[sec])
    return _physical_block(items, path)


def load_config_file(path: str) -> dict[str, Any]:
    """Flat ``key = value`` settings; section headers only group keys, except
    ``[physical]`` which holds the tube and liquid properties."""
    cp = _read_ini(path)
    out: dict[str, Any] = {}
    for sec in cp.sections():
        if sec == "physical":
            out["physical"] = _physical_block(dict(cp[sec]), path)
            continue
        for k, v in cp[sec].items():
            key = k.replace("-", "_")
            if key not in _COERCE and key != "physical":
                raise ConfigurationError(f"unknown config key {k!r} in {path}")
            out[key] = v
    if isinstance(out.get("physical"), str):
        out["physical"] = load_physical(out["physical"])
    return out


def resolve_config(command: str, ns: argparse.Namespace) -> RunConfig:
    merged: dict[str, Any] = {}
    preset = getattr(ns, "preset", None)
    if preset is not None:
        p = dict(PRESETS[preset])
        if p.pop("command") != command:
            raise ConfigurationError(f"preset {preset!r} belongs to the {PRESETS[preset]['command']} command")
        merged.update(p)
        merged["preset"] = preset
    if getattr(ns, "config", None):
        merged.update(load_config_file(ns.config))
    for k in _COERCE:
        v = getattr(ns, k, None)
        if v is not None:
            merged[k] = v
    if getattr(ns, "physical", None):
        merged["physical"] = load_physical(ns.physical)
        if ns.epsilon is None:
            merged.pop("epsilon", None)
    elif getattr(ns, "epsilon", None) is not None:
        merged.pop("physical", None)
    try:
        kw = {k: (_COERCE[k](v) if k in _COERCE else v) for k, v in merged.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad configuration value: {exc}") from None
    return RunConfig(command=command, **kw)


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(cfg: RunConfig) -> OutputRecord:
    eps, omega = cfg.dimensionless()
    t_end = 40.0 if cfg.t_end is None else cfg.t_end
    if not (math.isfinite(t_end) and t_end > 0.0):
        raise ConfigurationError(f"t_end must be positive, got {t_end!r}")
    n = int(round(t_end / cfg.grid))
    if abs(n * cfg.grid - t_end) > 1e-9 * t_end:
        raise ConfigurationError("t_end must be a multiple of grid")
    traj = solve_damped(IvpSpec(epsilon=eps, s_end=t_end, abs_tol=cfg.tol_abs, rel_tol=cfg.tol_rel))
    s = cfg.grid * np.arange(n + 1)
    s[-1] = min(s[-1], traj.s_end)
    u, du = traj(s)
    z = u0_eval(s)
    rows: list[tuple[Any, ...]] = [
        (float(a), float(b), float(c), float(d), float(b - d), "sample") for a, b, c, d in zip(s, u, du, z)
    ]
    ext = extrema(traj)
    for e in ext:
        su, sdu = traj(e.s)
        z0 = u0_eval(e.s)
        rows.append((e.s, float(su), float(sdu), z0, float(su) - z0, e.kind))
    rows.sort(key=lambda r: (r[0], r[5]))
    config = cfg.echo(["t_end", "grid", "tol_abs", "tol_rel"])
    config["epsilon"] = eps
    config["omega"] = omega
    if cfg.physical is not None:
        config["physical"] = cfg.physical
    return OutputRecord(
        command="simulate",
        config=config,
        columns=("s", "u", "du", "u0", "u_minus_u0", "kind"),
        rows=rows,
        summary={"n_samples": n + 1, "n_extrema": len(ext)},
        diagnostics={
            "energy_residual": energy_residual(traj),
            "n_intervals": traj.n_intervals,
            "n_rejected": traj.n_rejected,
        },
    )


def cmd_eps_study(cfg: RunConfig) -> OutputRecord:
    T = 12.0 if cfg.t_end is None else cfg.t_end
    rep = convergence_rate_study(cfg.epsilons, T, cfg.tol_abs, cfg.tol_rel)
    config = cfg.echo(["epsilons", "tol_abs", "tol_rel"])
    config["t_end"] = T
    return OutputRecord("eps-study", config, rep.columns, list(rep.rows), dict(rep.summary), {})


def cmd_delta_study(cfg: RunConfig) -> OutputRecord:
    if cfg.family not in IC_FAMILIES:
        raise ConfigurationError(f"family must be one of {sorted(IC_FAMILIES)}, got {cfg.family!r}")
    T = 6.0 if cfg.t_end is None else cfg.t_end
    rep = wdelta_error_study(cfg.deltas, cfg.family, T, cfg.tol_abs, cfg.tol_rel, allow_exit=cfg.allow_exit)
    config = cfg.echo(["family", "deltas", "tol_abs", "tol_rel", "allow_exit"])
    config["t_end"] = T
    config.update({k: v for k, v in rep.metadata.items() if k.startswith("w")})
    return OutputRecord("delta-study", config, rep.columns, list(rep.rows), dict(rep.summary), {})


def asym_anchor(eps: float, T: float, window: float, n: int, N: int, picard: bool = True) -> dict[str, Any]:
    """Reference ``v``, coefficient recursion and sup-distances for one anchor."""
    from .asymptotics import (
        LiouvilleFrame,
        asym_eval,
        coeff_iterate,
        picard_step_numeric,
        transformed_reference,
    )

    frame = LiouvilleFrame(eps)
    ref = transformed_reference(frame, T, T + window)
    vT, dvT = ref(T)
    coeffs = coeff_iterate(frame, T, vT, dvT, n, N)
    c0 = coeffs.at(0)
    extra = [T + window]
    d0 = sup_abs_difference(ref.v, lambda s: asym_eval(c0, frame, s), T, T + window, extra)
    dn = sup_abs_difference(ref.v, lambda s: asym_eval(coeffs, frame, s), T, T + window, extra)
    out = {"frame": frame, "ref": ref, "coeffs": coeffs, "d0": d0, "dn": dn, "picard_residual": math.nan}
    if picard:
        g = np.linspace(T, T + window, 201)
        try:
            r = picard_step_numeric(ref.v, frame, coeffs.A0, coeffs.B0, g, N=N)
            out["picard_residual"] = float(np.max(np.abs(r.v - ref.v(g))))
        except DomainError as exc:
            log.warning("Picard step skipped at T=%s: %s", T, exc)
    return out


def cmd_asym(cfg: RunConfig) -> OutputRecord:
    from .asymptotics import asym_eval, asym_eval_u

    eps, omega = cfg.dimensionless()
    if not 0.0 < eps < 2.0:
        raise ConfigurationError(f"asymptotics need 0 < epsilon < 2, got {eps!r}")
    anchors = sorted(cfg.anchor_T)
    if any(not (math.isfinite(T) and T >= 0.0) for T in anchors):
        raise ConfigurationError("anchor times must be non-negative")
    rows: list[tuple[Any, ...]] = []
    summary: dict[str, Any] = {}
    npts = int(round(cfg.window / cfg.grid))
    for i, T in enumerate(anchors):
        res = asym_anchor(eps, T, cfg.window, cfg.iterations, cfg.truncation)
        frame, ref, c = res["frame"], res["ref"], res["coeffs"]
        c0 = c.at(0)
        s = np.minimum(T + cfg.grid * np.arange(npts + 1), T + cfg.window)
        v = ref.v(s)
        u = 0.5 + frame.phi(s) * v
        a0, an = asym_eval(c0, frame, s), asym_eval(c, frame, s)
        un = asym_eval_u(c, frame, s)
        rows += [tuple(float(x) for x in r) for r in zip(np.full_like(s, T), s, v, a0, an, u, un)]
        summary.update(
            {
                f"T{i}": T,
                f"T{i}.vT": c.vT,
                f"T{i}.dvT": c.dvT,
                f"T{i}.A0": c.A0,
                f"T{i}.B0": c.B0,
                f"T{i}.An": c.A,
                f"T{i}.Bn": c.B,
                f"T{i}.sup_dist_n0": res["d0"],
                f"T{i}.sup_dist_n": res["dn"],
                f"T{i}.improved": bool(res["dn"] < res["d0"]),
                f"T{i}.picard_fixed_point_residual": res["picard_residual"],
            }
        )
    config = cfg.echo(["anchor_T", "iterations", "truncation", "window", "grid"])
    config["epsilon"] = eps
    config["omega"] = omega
    if cfg.physical is not None:
        config["physical"] = cfg.physical
    return OutputRecord(
        command="asym",
        config=config,
        columns=("T", "s", "v_numeric", "v_asym_n0", "v_asym_n", "u_numeric", "u_asym_n"),
        rows=rows,
        summary=summary,
        diagnostics={"tau": math.sqrt(1.0 - eps * eps / 4.0)},
    )


def _check_j_grid() -> float:
    from .asymptotics import J1_closed, J1_quadrature, J2_closed, J2_quadrature, LiouvilleFrame

    worst = 0.0
    for eps in (0.1, 0.8):
        frame = LiouvilleFrame(eps)
        for T in (0.0, 6.855):
            for m in range(1, 7):
                for j in range(m + 2):
                    k = m + 1 - j
                    for closed, quad in ((J1_closed, J1_quadrature), (J2_closed, J2_quadrature)):
                        c = closed(j, k, m, frame, T)
                        q, _ = quad(j, k, m, frame, T)
                        worst = max(worst, abs(c - q) / abs(q))
    return worst


def _check_sigma_series(fault: str) -> float:
    """Worst ratio of the truncation error to the next-term bound (pass if <= 1)."""
    from .asymptotics import sigma, sigma_series

    x = np.linspace(-0.4, 0.4, 161)
    exact = np.sqrt(1.0 + 2.0 * x) - 1.0 - x
    worst = 0.0
    for N in (1, 2, 3, 5, 10, 30):
        c = np.array([sigma(m) for m in range(1, N + 1)])
        if fault == "sigma" and N >= 3:
            c[2] *= 1.01
        err = np.abs(exact - sigma_series(x, N, c))
        bound = abs(sigma(N + 1)) * np.abs(x) ** (N + 2) / (1.0 - 2.0 * np.abs(x)) + 1e-15
        worst = max(worst, float(np.max(err / bound)))
    return worst


def _check_round_trip() -> float:
    """Worst round-trip error of ``from_v(to_v(.))`` in units of the local spacing."""
    from .asymptotics import LiouvilleFrame, from_v, to_v

    rng = np.random.default_rng(20240501)
    worst = 0.0
    for eps in (0.1, 0.8, 1.5):
        frame = LiouvilleFrame(eps)
        u = rng.uniform(0.0, 1.125, 2000)
        du = rng.uniform(-1.0, 1.0, 2000)
        s = rng.uniform(0.0, 20.0, 2000)
        v, dv = to_v(u, du, frame, s)
        u2, du2 = from_v(v, dv, frame, s)
        # the map is conditioned by |u - 1/2| and |du|, not by |u|
        su = np.spacing(np.maximum(np.abs(u - 0.5), 0.5))
        sd = np.spacing(np.maximum.reduce([np.abs(du), eps * np.abs(u - 0.5), np.full_like(du, 1e-300)]))
        worst = max(worst, float(np.max(np.abs(u2 - u) / su)), float(np.max(np.abs(du2 - du) / sd)))
    return worst


def _check_u0_defect() -> float:
    rng = np.random.default_rng(7)
    s = rng.uniform(0.0, 60.0, 10_000)
    s = s[np.abs(s - 6.0 * np.round(s / 6.0)) > 1e-6]
    return float(np.max(np.abs(u0_defect(s))))


def cmd_validate(cfg: RunConfig) -> OutputRecord:
    checks = [
        ("j_closed_vs_quadrature", _check_j_grid(), 1e-10),
        ("sigma_series_tail_ratio", _check_sigma_series(cfg.fault), 1.0),
        ("liouville_round_trip_ulps", _check_round_trip(), 4.0),
        ("u0_defect", _check_u0_defect(), 1e-12),
    ]
    rows = [(name, val, thr, bool(val <= thr)) for name, val, thr in checks]
    failed = [r[0] for r in rows if not r[3]]
    return OutputRecord(
        command="validate",
        config=cfg.echo(["fault"]),
        columns=("check", "measured", "threshold", "passed"),
        rows=rows,
        summary={"all_passed": not failed, "failed": failed},
    )


_RUNNERS: dict[str, Callable[[RunConfig], OutputRecord]] = {
    "simulate": cmd_simulate,
    "eps-study": cmd_eps_study,
    "delta-study": cmd_delta_study,
    "asym": cmd_asym,
    "validate": cmd_validate,
}


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse's own exit code is also 2
        raise ConfigurationError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="capasym", description="Capillary-rise dynamics: simulation, studies and asymptotics.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="key=value settings file; flags override it")
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--tol-abs", dest="tol_abs", type=float)
        sp.add_argument("--tol-rel", dest="tol_rel", type=float)
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))

    def params(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--epsilon", type=float)
        sp.add_argument("--physical", help="file with density, gravity, radius, viscosity, surface_tension, contact_angle")

    sp = sub.add_parser("simulate", help="rest-start trajectory sampled on a grid")
    common(sp)
    params(sp)
    sp.add_argument("--t-end", dest="t_end", type=float)
    sp.add_argument("--grid", type=float)

    sp = sub.add_parser("eps-study", help="sup |u - u0| as eps -> 0")
    common(sp)
    sp.add_argument("--epsilons", type=float, nargs="+")
    sp.add_argument("--t-end", dest="t_end", type=float)

    sp = sub.add_parser("delta-study", help="sup |w_delta - u0| against delta")
    common(sp)
    sp.add_argument("--family", choices=sorted(IC_FAMILIES))
    sp.add_argument("--deltas", type=float, nargs="+")
    sp.add_argument("--t-end", dest="t_end", type=float)
    sp.add_argument(
        "--no-exit", dest="allow_exit", action="store_const", const=False,
        help="fail on starts outside the admissible set instead of stopping at u = 0",
    )

    sp = sub.add_parser("asym", help="amplitude recursion against the transformed reference")
    common(sp)
    params(sp)
    sp.add_argument("--anchor-T", dest="anchor_T", type=float, nargs="+")
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--truncation", type=int)
    sp.add_argument("--window", type=float)
    sp.add_argument("--grid", type=float)

    sp = sub.add_parser("validate", help="closed forms and identities against oracles")
    common(sp)
    sp.add_argument("--inject-fault", dest="fault", choices=_FAULTS, help="negative control")
    return p


def _emit_error(exc: BaseException, code: int) -> int:
    obj = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    sys.stderr.write(json.dumps(obj, sort_keys=True) + "\n")
    return code


def run(argv: Sequence[str] | None = None) -> tuple[int, OutputRecord | None]:
    try:
        ns = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        cfg = resolve_config(ns.command, ns)
        t0 = time.perf_counter()
        rec = _RUNNERS[cfg.command](cfg)
        text = rec.render(cfg.format)
        if cfg.out:
            Path(cfg.out).write_bytes(text.encode("utf-8"))
        else:
            sys.stdout.write(text)
        sys.stderr.write(f"wall_time_s={time.perf_counter() - t0:.3f}\n")
    except ConfigurationError as exc:
        return _emit_error(exc, 2), None
    except (CapasymError, ValueError, ArithmeticError) as exc:
        return _emit_error(exc, 1), None
    if cfg.command == "validate" and not rec.summary["all_passed"]:
        sys.stderr.write(f"validation failed: {', '.join(rec.summary['failed'])}\n")
        return 1, rec
    return 0, rec


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
