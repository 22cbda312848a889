"""Batch front-end: JSON experiment configs, subcommands, CSV + manifest output.

One config file describes one experiment family.  Unknown keys are rejected
and every error names the offending key path.  Re-running a written manifest
(or the resolved config it embeds) reproduces the CSV bytes exactly for any
worker count.

Exit codes: 0 success, 1 configuration error, 2 numerical-invariant failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .bath import BathParams
from .classical import LangevinParams, classical_lgi_sweep, eta_from_alpha
from .errors import ConfigError, DegenerateOutcomeError, DomainError, IntegrationError
from .experiments import (
    DEFAULT_MASTER_SEED,
    DEFAULT_TAU_GRID,
    ExperimentConfig,
    lgi_sweep,
    resenergy_sweep,
    run_single_anneal,
)
from .integrate import IntegratorConfig
from .measure import MeasurementParams
from .model import AnnealSchedule

DEFAULT_D_GRID = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)

_SCHEMA = {
    "anneal": {"gamma_x": float, "gamma_z": float, "t_f": float},
    "bath": {"alpha": float, "beta": float, "omega_c": float, "lamb_shift": bool},
    "measure": {"variance": float},
    "integrator": {"dt": float, "renormalize": bool},
    "experiment": {
        "n_traj": int,
        "master_seed": int,
        "tau_grid": list,
        "d_grid": list,
        "mode": str,
        "dynamics": str,
    },
    "classical": {"eta": float, "beta": float, "dt": float, "n_traj": int},
}


@dataclass
class RunConfig:
    """Fully resolved experiment family: quantum config, classical twin, D grid."""

    ec: ExperimentConfig
    lp: LangevinParams
    d_grid: tuple


def _type_name(t) -> str:
    return {float: "number", int: "integer", bool: "boolean", str: "string",
            list: "array"}[t]


def _get(section: dict, section_name: str, key: str, expected, default):
    if key not in section:
        return default
    value = section[key]
    path = f"{section_name}.{key}"
    if expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, "expected a number")
        return float(value)
    if expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, "expected an integer")
        return int(value)
    if expected is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, "expected a boolean")
        return value
    if expected is str:
        if not isinstance(value, str):
            raise ConfigError(path, "expected a string")
        return value
    if expected is list:
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            raise ConfigError(path, "expected an array of numbers")
        return tuple(float(v) for v in value)
    raise AssertionError(expected)


def _check_keys(doc: dict):
    for section_name, section in doc.items():
        if section_name not in _SCHEMA:
            raise ConfigError(section_name, "unknown section")
        if not isinstance(section, dict):
            raise ConfigError(section_name, "expected an object")
        for key in section:
            if key not in _SCHEMA[section_name]:
                raise ConfigError(f"{section_name}.{key}", "unknown key")


def _require_positive(value: float, path: str) -> float:
    if not value > 0:
        raise ConfigError(path, f"must be > 0, got {value!r}")
    return value


def parse_config_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "expected a JSON object")
    if "resolved_config" in doc:  # a manifest: re-run its embedded config
        return parse_config_dict(doc["resolved_config"])
    _check_keys(doc)
    anneal = doc.get("anneal", {})
    bath = doc.get("bath", {})
    measure = doc.get("measure", {})
    integrator = doc.get("integrator", {})
    experiment = doc.get("experiment", {})
    classical = doc.get("classical", {})

    gamma_x = _require_positive(_get(anneal, "anneal", "gamma_x", float, 1.0),
                                "anneal.gamma_x")
    gamma_z = _require_positive(_get(anneal, "anneal", "gamma_z", float, 1.0),
                                "anneal.gamma_z")
    t_f = _require_positive(_get(anneal, "anneal", "t_f", float, 14.0), "anneal.t_f")

    alpha = _get(bath, "bath", "alpha", float, 0.0)
    if alpha < 0:
        raise ConfigError("bath.alpha", f"must be >= 0, got {alpha!r}")
    beta = _require_positive(_get(bath, "bath", "beta", float, 10.0), "bath.beta")
    omega_c = _require_positive(_get(bath, "bath", "omega_c", float, 10.0),
                                "bath.omega_c")
    lamb_shift = _get(bath, "bath", "lamb_shift", bool, True)

    variance = _require_positive(_get(measure, "measure", "variance", float, 20.0),
                                 "measure.variance")

    dt = _require_positive(_get(integrator, "integrator", "dt", float, 1e-3),
                           "integrator.dt")
    if dt > t_f / 100.0:
        raise ConfigError("integrator.dt", f"must be <= t_f/100 = {t_f / 100.0:g}")
    renormalize = _get(integrator, "integrator", "renormalize", bool, True)

    n_traj = _get(experiment, "experiment", "n_traj", int, 100_000)
    if n_traj < 1:
        raise ConfigError("experiment.n_traj", "must be >= 1")
    master_seed = _get(experiment, "experiment", "master_seed", int,
                       DEFAULT_MASTER_SEED)
    tau_grid = _get(experiment, "experiment", "tau_grid", list, DEFAULT_TAU_GRID)
    for tau in tau_grid:
        if not 0.0 <= tau <= t_f / 2.0 + 1e-9:
            raise ConfigError("experiment.tau_grid",
                              f"tau {tau!r} outside [0, t_f/2]")
    d_grid = _get(experiment, "experiment", "d_grid", list, DEFAULT_D_GRID)
    for d in d_grid:
        if not d > 0:
            raise ConfigError("experiment.d_grid", f"variance {d!r} must be > 0")
    mode = _get(experiment, "experiment", "mode", str, "weak")
    if mode not in ("weak", "projective"):
        raise ConfigError("experiment.mode", f"unknown mode {mode!r}")
    dynamics = _get(experiment, "experiment", "dynamics", str, "quantum")
    if dynamics not in ("quantum", "classical"):
        raise ConfigError("experiment.dynamics", f"unknown dynamics {dynamics!r}")

    cl_eta = _get(classical, "classical", "eta", float, eta_from_alpha(alpha))
    if cl_eta < 0:
        raise ConfigError("classical.eta", "must be >= 0")
    cl_beta = _require_positive(_get(classical, "classical", "beta", float, beta),
                                "classical.beta")
    cl_dt = _require_positive(_get(classical, "classical", "dt", float, 1e-3),
                              "classical.dt")
    cl_n = _get(classical, "classical", "n_traj", int, 20_000)
    if cl_n < 1:
        raise ConfigError("classical.n_traj", "must be >= 1")

    ec = ExperimentConfig(
        sched=AnnealSchedule(gamma_x=gamma_x, gamma_z=gamma_z, t_f=t_f),
        bp=BathParams(alpha=alpha, beta=beta, omega_c=omega_c, lamb_shift=lamb_shift),
        mp=MeasurementParams(variance=variance),
        cfg=IntegratorConfig(dt=dt, renormalize=renormalize),
        n_traj=n_traj,
        master_seed=master_seed,
        tau_grid=tau_grid,
        mode=mode,
        dynamics=dynamics,
    )
    lp = LangevinParams(eta=cl_eta, beta=cl_beta, dt=cl_dt, n_traj=cl_n,
                        master_seed=master_seed)
    return RunConfig(ec=ec, lp=lp, d_grid=tuple(d_grid))


def parse_config(path) -> RunConfig:
    """Load and validate a config file (or a manifest embedding one)."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(str(path), "config file not found")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"malformed JSON: {exc}") from exc
    return parse_config_dict(doc)


def serialize_config(rc: RunConfig) -> dict:
    """Fully materialized config document; parse_config_dict round-trips it."""
    ec, lp = rc.ec, rc.lp
    return {
        "anneal": {
            "gamma_x": ec.sched.gamma_x,
            "gamma_z": ec.sched.gamma_z,
            "t_f": ec.sched.t_f,
        },
        "bath": {
            "alpha": ec.bp.alpha,
            "beta": ec.bp.beta,
            "omega_c": ec.bp.omega_c,
            "lamb_shift": ec.bp.lamb_shift,
        },
        "measure": {"variance": ec.mp.variance},
        "integrator": {"dt": ec.cfg.dt, "renormalize": ec.cfg.renormalize},
        "experiment": {
            "n_traj": ec.n_traj,
            "master_seed": ec.master_seed,
            "tau_grid": list(ec.tau_grid),
            "d_grid": list(rc.d_grid),
            "mode": ec.mode,
            "dynamics": ec.dynamics,
        },
        "classical": {
            "eta": lp.eta,
            "beta": lp.beta,
            "dt": lp.dt,
            "n_traj": lp.n_traj,
        },
    }


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[tuple]):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _run_subcommand(name: str, rc: RunConfig, outdir: Path, workers: int) -> list[Path]:
    csv_path = outdir / f"{name.replace('-', '_')}.csv"
    ec = rc.ec
    if name == "anneal":
        result = run_single_anneal(ec)
        _write_csv(csv_path, ["res_energy", "fidelity"],
                   [(result.residual_energy, result.fidelity)])
    elif name == "lgi":
        rows = [(r.tau, r.variant, r.value, r.stderr)
                for r in lgi_sweep(ec, workers=workers)]
        _write_csv(csv_path, ["tau", "variant", "k3", "stderr"], rows)
    elif name == "resenergy":
        rows = [(r.d_var, r.tau, r.res_energy, r.fidelity)
                for r in resenergy_sweep(ec, rc.d_grid, workers=workers)]
        _write_csv(csv_path, ["D", "tau", "res_energy", "fidelity"], rows)
    elif name == "classical-lgi":
        rows = [(r.tau, r.variant, r.value, r.stderr)
                for r in classical_lgi_sweep(rc.lp, ec.sched, ec.tau_grid,
                                             workers=workers)]
        _write_csv(csv_path, ["tau", "variant", "k3", "stderr"], rows)
    else:  # pragma: no cover - argparse restricts choices
        raise AssertionError(name)
    return [csv_path]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lgqa",
        description="Leggett-Garg diagnostics of a single-qubit annealing sweep",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, doc in (
        ("anneal", "deterministic no-measurement sweep"),
        ("lgi", "K3 functions over the tau grid (weak or projective)"),
        ("resenergy", "residual energy / fidelity over the (D, tau) grid"),
        ("classical-lgi", "classical Langevin K3 functions"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--workers", type=int, default=1,
                       help="worker cap (never changes results)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the master seed")
    args = parser.parse_args(argv)

    try:
        rc = parse_config(args.config)
        if args.seed is not None:
            rc = RunConfig(
                ec=ExperimentConfig(
                    sched=rc.ec.sched, bp=rc.ec.bp, mp=rc.ec.mp, cfg=rc.ec.cfg,
                    n_traj=rc.ec.n_traj, master_seed=args.seed,
                    tau_grid=rc.ec.tau_grid, mode=rc.ec.mode,
                    dynamics=rc.ec.dynamics,
                ),
                lp=LangevinParams(eta=rc.lp.eta, beta=rc.lp.beta, dt=rc.lp.dt,
                                  n_traj=rc.lp.n_traj, master_seed=args.seed),
                d_grid=rc.d_grid,
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    try:
        outputs = _run_subcommand(args.subcommand, rc, outdir, max(1, args.workers))
    except (IntegrationError, DegenerateOutcomeError, DomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    duration = time.perf_counter() - started

    manifest = {
        "tool": "lgqa",
        "version": __version__,
        "subcommand": args.subcommand,
        "resolved_config": serialize_config(rc),
        "master_seed": rc.ec.master_seed,
        "workers": args.workers,
        "duration_seconds": duration,
        "outputs": [str(p.resolve()) for p in outputs],
    }
    manifest_path = outdir / f"{args.subcommand.replace('-', '_')}_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {', '.join(str(p) for p in outputs)} and {manifest_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
