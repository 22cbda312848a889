"""Classical comparator: stochastic unit-spin dynamics on the annealing schedule.

A unit magnetization vector carries the classical energy E(m) = b . m with
b(t) = ((1-s) gx/2, 0, s gz/2), and follows damped precession around the
effective field h = -b (minus the energy gradient, so damping descends E):

    dm/dt = -m x (h + xi) - eta * m x (m x (h + xi)),

integrated with the Stratonovich-Heun scheme and renormalized each step.  The
noise amplitude is set by fluctuation-dissipation so the frozen-field ensemble
relaxes to the Boltzmann distribution exp(-beta E) on the sphere:

    <xi_i(t) xi_j(t')> = [2 eta / (beta (1 + eta^2))] delta_ij delta(t - t').

The (1 + eta^2) factor accounts for the noise entering both the precession
and the damping term; it is a sub-0.1% correction at the couplings mapped
from alpha but keeps the equilibrium exact at any damping.

The classical readout is noiseless m_z, so one trajectory ensemble yields all
two-time correlators on the schedule grid at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import DomainError
from .experiments import (
    CorrelatorEstimate,
    K3Result,
    K3_SIGNS,
    _experiment_id,
    _GOLDEN,
    _mix64,
    _run_chunked,
    trajectory_seed,
    DEFAULT_MASTER_SEED,
)
from .measure import open_uniform
from .model import _check_time, _field_components

_MASK21 = np.uint64((1 << 21) - 1)
_INV21 = 2.0 ** -21


@dataclass(frozen=True)
class LangevinParams:
    """Damping eta, inverse temperature beta, step dt, ensemble size, seed."""

    eta: float
    beta: float
    dt: float = 1e-3
    n_traj: int = 20_000
    master_seed: int = DEFAULT_MASTER_SEED

    def __post_init__(self):
        if self.eta < 0:
            raise DomainError("LangevinParams requires eta >= 0")
        if not self.beta > 0:
            raise DomainError("LangevinParams requires beta > 0")
        if not self.dt > 0:
            raise DomainError("LangevinParams requires dt > 0")
        if self.n_traj < 1:
            raise DomainError("LangevinParams requires n_traj >= 1")

    @property
    def noise_sigma(self) -> float:
        return math.sqrt(2.0 * self.eta / (self.beta * (1.0 + self.eta ** 2)))


def eta_from_alpha(alpha: float) -> float:
    """Damping mapped from the quantum coupling: eta = pi * alpha."""
    return math.pi * float(alpha)


INITIAL_SPIN = np.array([-1.0, 0.0, 0.0])


def effective_field(sched, t: float) -> np.ndarray:
    """b(t) = ((1-s) gamma_x / 2, 0, s gamma_z / 2)."""
    t = _check_time(sched, t)
    hx, hz = _field_components(sched, t)
    return np.array([float(hx), 0.0, float(hz)])


def _drift(m: np.ndarray, db: np.ndarray, eta: float) -> np.ndarray:
    precession = np.cross(m, db)
    return -precession - eta * np.cross(m, precession)


def langevin_step(spin, t: float, lp: LangevinParams, sched, rng) -> np.ndarray:
    """One Stratonovich-Heun step; the returned spin is unit length."""
    m = np.asarray(spin, dtype=float).reshape(3)
    dt = lp.dt
    noise = lp.noise_sigma * ndtri(open_uniform(rng.random(3))) * math.sqrt(dt)
    h0 = -effective_field(sched, t)
    h1 = -effective_field(sched, min(t + dt, sched.t_f))
    db0 = h0 * dt + noise
    db1 = h1 * dt + noise
    d0 = _drift(m, db0, lp.eta)
    predictor = m + d0
    out = m + 0.5 * (d0 + _drift(predictor, db1, lp.eta))
    return out / np.linalg.norm(out)


@dataclass
class EnsembleResult:
    """Recorded m_z samples per requested time plus the final spins."""

    records: dict
    m_final: np.ndarray
    n_traj: int


def run_ensemble(lp: LangevinParams, sched, t_final: float, record_times=(),
                 workers: int = 1, m0=INITIAL_SPIN,
                 experiment_tag: str = "classical") -> EnsembleResult:
    """Evolve n_traj spins from m0 over [0, t_final], recording m_z snapshots.

    Per-trajectory noise comes only from trajectory_seed; recorded arrays are
    filled chunk-wise in index order, so results do not depend on workers.
    """
    _check_time(sched, t_final)
    dt = lp.dt
    n_steps = int(round(t_final / dt))
    record_steps = sorted({int(round(float(t) / dt)) for t in record_times})
    for ks in record_steps:
        if ks > n_steps:
            raise DomainError("record time beyond t_final")
    n = lp.n_traj
    records = {ks: np.empty(n) for ks in record_steps}
    m_final = np.empty((n, 3))
    exp_id = _experiment_id(experiment_tag)
    sigma_dt = lp.noise_sigma * math.sqrt(dt)
    eta = lp.eta
    m0 = np.asarray(m0, dtype=float).reshape(3)

    times = np.arange(n_steps + 1) * dt
    hx, hz = _field_components(sched, np.minimum(times, sched.t_f))
    fields = np.zeros((n_steps + 1, 3))  # effective field h = -grad E
    fields[:, 0] = -hx
    fields[:, 2] = -hz

    def work(rng_range):
        lo, hi = rng_range
        count = hi - lo
        idx = np.arange(lo, hi, dtype=np.uint64)
        seeds = trajectory_seed(lp.master_seed, exp_id, idx)
        m = np.tile(m0, (count, 1))
        u = np.empty((count, 3))
        for step in range(n_steps):
            if step in records:
                records[step][lo:hi] = m[:, 2]
            # one 64-bit stream word per (trajectory, step), split into three
            # 21-bit uniforms; ample resolution for the SDE noise
            with np.errstate(over="ignore"):
                word = _mix64(seeds + np.uint64(step + 1) * _GOLDEN)
            u[:, 0] = ((word & _MASK21).astype(np.float64) + 0.5) * _INV21
            u[:, 1] = (((word >> np.uint64(21)) & _MASK21).astype(np.float64) + 0.5) * _INV21
            u[:, 2] = (((word >> np.uint64(42)) & _MASK21).astype(np.float64) + 0.5) * _INV21
            noise = sigma_dt * ndtri(u)
            db0 = fields[step] * dt + noise
            db1 = fields[step + 1] * dt + noise
            d0 = _drift(m, db0, eta)
            m_pred = m + d0
            m = m + 0.5 * (d0 + _drift(m_pred, db1, eta))
            m /= np.linalg.norm(m, axis=1, keepdims=True)
        if n_steps in records:
            records[n_steps][lo:hi] = m[:, 2]
        m_final[lo:hi] = m

    _run_chunked(n, workers, work)
    return EnsembleResult(
        records={ks * dt: records[ks] for ks in record_steps},
        m_final=m_final,
        n_traj=n,
    )


def _snap_time(t: float, dt: float) -> float:
    return int(round(float(t) / dt)) * dt


def classical_correlator(t_i: float, t_j: float, lp: LangevinParams, sched,
                         workers: int = 1) -> CorrelatorEstimate:
    """<m_z(t_i) m_z(t_j)> over trajectories started from (-1, 0, 0)."""
    if not 0.0 <= t_i <= t_j <= sched.t_f + 1e-9:
        raise DomainError("correlator requires 0 <= t_i <= t_j <= t_f")
    ti = _snap_time(t_i, lp.dt)
    tj = _snap_time(t_j, lp.dt)
    res = run_ensemble(lp, sched, tj, record_times=(ti, tj), workers=workers,
                       experiment_tag=f"classical-pair:{ti:.17g}:{tj:.17g}")
    x = res.records[ti] * res.records[tj]
    n = lp.n_traj
    stderr = float(x.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return CorrelatorEstimate(mean=float(x.mean()), stderr=stderr, n=n, t_i=ti, t_j=tj)


def classical_lgi_sweep(lp: LangevinParams, sched, tau_grid,
                        workers: int = 1) -> list[K3Result]:
    """Classical K3 functions with t1=0, t2=tau, t3=2*tau.

    The readout is non-invasive, so a single trajectory ensemble supplies
    every correlator; K3 errors come from the per-trajectory K3 samples.
    """
    taus = [_snap_time(t, lp.dt) for t in tau_grid]
    for tau in taus:
        if not -1e-9 <= 2.0 * tau <= sched.t_f + 1e-9:
            raise DomainError(f"tau {tau:g} outside [0, t_f/2]")
    record = sorted({0.0} | {t for tau in taus for t in (tau, 2.0 * tau)})
    horizon = max(record)
    res = run_ensemble(lp, sched, horizon, record_times=record, workers=workers)
    n = lp.n_traj
    out = []
    for tau in taus:
        z1 = res.records[0.0]
        z2 = res.records[tau]
        z3 = res.records[2.0 * tau]
        c12, c23, c13 = z1 * z2, z2 * z3, z1 * z3
        for variant in ("a", "b", "c"):
            s1, s2, s3 = K3_SIGNS[variant]
            samples = s1 * c12 + s2 * c23 + s3 * c13
            stderr = float(samples.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
            out.append(K3Result(variant=variant, tau=float(tau),
                                value=float(samples.mean()), stderr=stderr))
    return out
