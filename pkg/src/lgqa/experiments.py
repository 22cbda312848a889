"""Trajectory-ensemble experiments: two-time correlators, K3 functions, sweeps.

Randomness contract: every trajectory's draws are a pure function of
(master_seed, experiment_id, trajectory_index) through a splitmix-style
counter stream, and ensemble reductions run over fixed-size chunks combined
in index order.  Results are therefore bit-identical for any worker count.

Measurement-time convention for the three-time Leggett-Garg functions:
t1 = 0, t2 = tau, t3 = 2*tau, all snapped to the integrator grid.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import integrate
from .algebra import DensityMatrix
from .bath import BathParams
from .errors import DomainError, IntegrationError
from .integrate import IntegratorConfig, h_coords, matrix_from_h
from .measure import MeasurementParams, sample_readouts, weak_update_h
from .model import AnnealSchedule, eigensystem, hamiltonian, initial_state

DEFAULT_MASTER_SEED = 112358132134
DEFAULT_TAU_GRID = tuple(np.round(np.arange(0.0, 7.0001, 0.5), 6))
CHUNK = 1 << 14

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


def trajectory_seed(master_seed: int, experiment_id: int, trajectory_index):
    """Collision-free 64-bit per-trajectory seed (splitmix-style avalanche).

    Each stage is a bijection of its newest input, so distinct trajectory
    indices can never collide for a fixed (master_seed, experiment_id).
    Accepts a scalar or an array of indices.
    """
    scalar = np.isscalar(trajectory_index)
    idx = np.atleast_1d(np.asarray(trajectory_index)).astype(np.uint64)
    with np.errstate(over="ignore"):
        ms = np.atleast_1d(np.uint64(int(master_seed) & _MASK64))
        eid = np.uint64(int(experiment_id) & _MASK64)
        stage = _mix64(_mix64(ms + _GOLDEN) + eid)
        s = _mix64(stage + idx)
    if scalar:
        return int(s[0])
    return s


def stream_uniform(seeds: np.ndarray, draw_index: int) -> np.ndarray:
    """draw_index-th uniform of each trajectory stream, open interval (0, 1)."""
    with np.errstate(over="ignore"):
        v = _mix64(seeds + np.uint64(draw_index + 1) * _GOLDEN)
    return ((v >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


class SeedStream:
    """Sequential uniform stream of a single trajectory; drop-in rng for the
    scalar measurement kernels (provides .random())."""

    def __init__(self, seed: int):
        self._seed = np.atleast_1d(np.uint64(seed & _MASK64))
        self._count = 0

    def random(self, size=None):
        if size is None:
            u = stream_uniform(self._seed, self._count)[0]
            self._count += 1
            return float(u)
        out = np.array([self.random() for _ in range(int(size))])
        return out


def _experiment_id(tag: str) -> int:
    return int.from_bytes(hashlib.blake2b(tag.encode(), digest_size=8).digest(), "big")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment family needs, including its random seed."""

    sched: AnnealSchedule = AnnealSchedule()
    bp: BathParams = BathParams(alpha=0.0, beta=10.0)
    mp: MeasurementParams = MeasurementParams()
    cfg: IntegratorConfig = IntegratorConfig()
    n_traj: int = 100_000
    master_seed: int = DEFAULT_MASTER_SEED
    tau_grid: tuple = DEFAULT_TAU_GRID
    mode: str = "weak"
    dynamics: str = "quantum"

    def __post_init__(self):
        if self.n_traj < 1:
            raise DomainError("ExperimentConfig requires n_traj >= 1")
        if self.mode not in ("weak", "projective"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.dynamics not in ("quantum", "classical"):
            raise DomainError(f"unknown dynamics {self.dynamics!r}")
        object.__setattr__(self, "tau_grid", tuple(float(t) for t in self.tau_grid))
        half = self.sched.t_f / 2.0
        for tau in self.tau_grid:
            if not -1e-9 <= tau <= half + 1e-9:
                raise DomainError(f"tau {tau:g} outside [0, t_f/2]")


@dataclass(frozen=True)
class CorrelatorEstimate:
    """Two-time correlator with its Monte Carlo uncertainty (0 for projective)."""

    mean: float
    stderr: float
    n: int
    t_i: float
    t_j: float


@dataclass(frozen=True)
class K3Result:
    variant: str
    tau: float
    value: float
    stderr: float


@dataclass(frozen=True)
class ResEnergyPoint:
    d_var: float
    tau: float
    res_energy: float
    fidelity: float
    res_stderr: float
    fid_stderr: float
    n: int


@dataclass
class SingleAnnealResult:
    rho_final: DensityMatrix
    residual_energy: float
    fidelity: float
    times: np.ndarray
    sigma_z: np.ndarray


K3_SIGNS = {"a": (1.0, 1.0, -1.0), "b": (-1.0, -1.0, -1.0), "c": (-1.0, 1.0, 1.0)}


def k3(c12: float, c23: float, c13: float, variant: str) -> float:
    """Third-order Leggett-Garg combination; classical range is [-3, 1]."""
    try:
        s1, s2, s3 = K3_SIGNS[variant]
    except KeyError:
        raise DomainError(f"unknown K3 variant {variant!r}") from None
    return s1 * c12 + s2 * c23 + s3 * c13


def _chunk_ranges(n: int):
    return [(lo, min(lo + CHUNK, n)) for lo in range(0, n, CHUNK)]


def _run_chunked(n: int, workers: int, fn):
    ranges = _chunk_ranges(n)
    if workers <= 1 or len(ranges) == 1:
        for r in ranges:
            fn(r)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fn, ranges))


def _snap(t: float, cfg: IntegratorConfig) -> int:
    return int(round(float(t) / cfg.dt))


def _check_min_eig(h: np.ndarray, t: float):
    tr = h[:, 0] + h[:, 1]
    lo = 0.5 * tr - np.hypot(0.5 * (h[:, 0] - h[:, 1]), np.hypot(h[:, 2], h[:, 3]))
    worst = float(lo.min())
    if worst < -1e-9:
        raise IntegrationError(f"ensemble positivity violated ({worst:g})", t)


def _propagate_h(h: np.ndarray, T: np.ndarray, renormalize: bool, t: float) -> np.ndarray:
    out = h @ T.T
    if renormalize:
        out = out / (out[:, 0] + out[:, 1])[:, None]
    _check_min_eig(out, t)
    return out


def _energy_weights(sched) -> tuple[np.ndarray, float]:
    h = hamiltonian(sched, sched.t_f)
    e0, _, _, _ = eigensystem(sched, sched.t_f)
    w = np.array([h[0, 0].real, h[1, 1].real, 2.0 * h[0, 1].real, 2.0 * h[0, 1].imag])
    return w, e0


def _fidelity_weights(sched, t: float) -> np.ndarray:
    _, _, v0, _ = eigensystem(sched, t)
    a, b = v0[0], v0[1]
    ab = np.conj(a) * b
    return np.array([abs(a) ** 2, abs(b) ** 2, 2.0 * ab.real, -2.0 * ab.imag])


def _weak_pair(t_i: float, t_j: float, ec: ExperimentConfig, workers: int = 1):
    """Raw per-trajectory products and readouts of the two-measurement protocol."""
    if not 0.0 <= t_i <= t_j <= ec.sched.t_f + 1e-9:
        raise DomainError("correlator requires 0 <= t_i <= t_j <= t_f")
    cfg = ec.cfg
    ki, kj = _snap(t_i, cfg), _snap(t_j, cfg)
    rho_i = integrate.evolve(initial_state(ec.sched), 0.0, ki * cfg.dt,
                             ec.sched, ec.bp, cfg)
    h_i = h_coords(rho_i)
    t_fwd = integrate.density_propagator(ki * cfg.dt, kj * cfg.dt, ec.sched, ec.bp, cfg)
    exp_id = _experiment_id(f"pair:{ki}:{kj}")
    n = ec.n_traj
    x = np.empty(n)
    r1_all = np.empty(n)
    r2_all = np.empty(n)

    def work(rng_range):
        lo, hi = rng_range
        idx = np.arange(lo, hi, dtype=np.uint64)
        seeds = trajectory_seed(ec.master_seed, exp_id, idx)
        r1 = sample_readouts(h_i[1], ec.mp, stream_uniform(seeds, 0),
                             stream_uniform(seeds, 1))
        h = weak_update_h(np.broadcast_to(h_i, (hi - lo, 4)), r1, ec.mp.variance)
        h = _propagate_h(h, t_fwd, cfg.renormalize, kj * cfg.dt)
        p_down = np.clip(h[:, 1], 0.0, 1.0)
        r2 = sample_readouts(p_down, ec.mp, stream_uniform(seeds, 2),
                             stream_uniform(seeds, 3))
        x[lo:hi] = r1 * r2
        r1_all[lo:hi] = r1
        r2_all[lo:hi] = r2

    _run_chunked(n, workers, work)
    return x, r1_all, r2_all, ki * cfg.dt, kj * cfg.dt


def correlator_weak(t_i: float, t_j: float, ec: ExperimentConfig,
                    workers: int = 1) -> CorrelatorEstimate:
    """<r_i * r_j> over n_traj two-measurement runs (weak readout at both times)."""
    x, _, _, ti, tj = _weak_pair(t_i, t_j, ec, workers)
    n = ec.n_traj
    stderr = float(x.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return CorrelatorEstimate(mean=float(x.mean()), stderr=stderr, n=n, t_i=ti, t_j=tj)


def correlator_projective(t_i: float, t_j: float, ec: ExperimentConfig) -> CorrelatorEstimate:
    """Deterministic branch-enumeration correlator: project at t_i, evolve, read sigma_z."""
    if not 0.0 <= t_i <= t_j <= ec.sched.t_f + 1e-9:
        raise DomainError("correlator requires 0 <= t_i <= t_j <= t_f")
    cfg = ec.cfg
    ki, kj = _snap(t_i, cfg), _snap(t_j, cfg)
    rho_i = integrate.evolve(initial_state(ec.sched), 0.0, ki * cfg.dt,
                             ec.sched, ec.bp, cfg)
    t_fwd = integrate.density_propagator(ki * cfg.dt, kj * cfg.dt, ec.sched, ec.bp, cfg)
    val = 0.0
    for outcome, prob, h_branch in (
        (1.0, rho_i.rho_up, np.array([1.0, 0.0, 0.0, 0.0])),
        (-1.0, rho_i.rho_down, np.array([0.0, 1.0, 0.0, 0.0])),
    ):
        if prob < 1e-15:
            continue
        h_out = t_fwd @ h_branch
        tr = h_out[0] + h_out[1]
        val += outcome * prob * (h_out[0] - h_out[1]) / tr
    return CorrelatorEstimate(mean=float(val), stderr=0.0, n=0,
                              t_i=ki * cfg.dt, t_j=kj * cfg.dt)


def _pair_times(tau: float, cfg: IntegratorConfig):
    k = _snap(tau, cfg)
    t2 = k * cfg.dt
    return 0.0, t2, 2.0 * t2


def lgi_sweep(ec: ExperimentConfig, workers: int = 1) -> list[K3Result]:
    """K3 functions over the tau grid with t1=0, t2=tau, t3=2*tau.

    Weak mode runs three independent two-measurement families per tau and
    propagates their errors in quadrature; projective mode is deterministic.
    """
    results = []
    for tau in ec.tau_grid:
        t1, t2, t3 = _pair_times(tau, ec.cfg)
        if ec.mode == "weak":
            c12 = correlator_weak(t1, t2, ec, workers)
            c23 = correlator_weak(t2, t3, ec, workers)
            c13 = correlator_weak(t1, t3, ec, workers)
        else:
            c12 = correlator_projective(t1, t2, ec)
            c23 = correlator_projective(t2, t3, ec)
            c13 = correlator_projective(t1, t3, ec)
        err = float(np.sqrt(c12.stderr ** 2 + c23.stderr ** 2 + c13.stderr ** 2))
        for variant in ("a", "b", "c"):
            results.append(
                K3Result(
                    variant=variant,
                    tau=float(tau),
                    value=k3(c12.mean, c23.mean, c13.mean, variant),
                    stderr=err,
                )
            )
    return results


def resenergy_sweep(ec: ExperimentConfig, d_grid, workers: int = 1) -> list[ResEnergyPoint]:
    """Two weak measurements at (tau, 2*tau), then anneal to t_f.

    For every (D, tau) pair the ensemble of conditional final states is
    averaged and its residual energy / fidelity reported, with per-trajectory
    scatter as the standard error.
    """
    cfg = ec.cfg
    sched = ec.sched
    w_e, e0 = _energy_weights(sched)
    w_f = _fidelity_weights(sched, sched.t_f)
    cache = {}
    rows = []
    for d_var in d_grid:
        mp = MeasurementParams(variance=float(d_var), peak_down=ec.mp.peak_down,
                               peak_up=ec.mp.peak_up)
        for tau in ec.tau_grid:
            k = _snap(tau, cfg)
            if k not in cache:
                rho_1 = integrate.evolve(initial_state(sched), 0.0, k * cfg.dt,
                                         sched, ec.bp, cfg)
                t_12 = integrate.density_propagator(k * cfg.dt, 2 * k * cfg.dt,
                                                    sched, ec.bp, cfg)
                t_2f = integrate.density_propagator(2 * k * cfg.dt, sched.t_f,
                                                    sched, ec.bp, cfg)
                cache[k] = (h_coords(rho_1), t_12, t_2f)
            h_1, t_12, t_2f = cache[k]
            exp_id = _experiment_id(f"res:{float(d_var):.17g}:{k}")
            n = ec.n_traj
            e_samples = np.empty(n)
            f_samples = np.empty(n)
            h_sum = np.zeros((len(_chunk_ranges(n)), 4))

            def work(rng_range, h_1=h_1, t_12=t_12, t_2f=t_2f, mp=mp, k=k,
                     exp_id=exp_id, e_samples=e_samples, f_samples=f_samples,
                     h_sum=h_sum):
                lo, hi = rng_range
                idx = np.arange(lo, hi, dtype=np.uint64)
                seeds = trajectory_seed(ec.master_seed, exp_id, idx)
                r1 = sample_readouts(h_1[1], mp, stream_uniform(seeds, 0),
                                     stream_uniform(seeds, 1))
                h = weak_update_h(np.broadcast_to(h_1, (hi - lo, 4)), r1, mp.variance)
                h = _propagate_h(h, t_12, cfg.renormalize, 2 * k * cfg.dt)
                r2 = sample_readouts(np.clip(h[:, 1], 0.0, 1.0), mp,
                                     stream_uniform(seeds, 2), stream_uniform(seeds, 3))
                h = weak_update_h(h, r2, mp.variance)
                h = _propagate_h(h, t_2f, cfg.renormalize, sched.t_f)
                e_samples[lo:hi] = h @ w_e - e0
                f_samples[lo:hi] = h @ w_f
                h_sum[lo // CHUNK] = h.sum(axis=0)

            _run_chunked(n, workers, work)
            h_mean = h_sum.sum(axis=0) / n
            rows.append(
                ResEnergyPoint(
                    d_var=float(d_var),
                    tau=k * cfg.dt,
                    res_energy=float(h_mean @ w_e - e0),
                    fidelity=float(h_mean @ w_f),
                    res_stderr=float(e_samples.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
                    fid_stderr=float(f_samples.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
                    n=n,
                )
            )
    return rows


def resenergy_oracle(ec: ExperimentConfig, d_var: float, tau: float) -> tuple[float, float]:
    """Deterministic twin of one resenergy_sweep point: non-selective weak
    measurement is exactly an exp(-1/(2D)) damping of the off-diagonals."""
    cfg = ec.cfg
    sched = ec.sched
    k = _snap(tau, cfg)
    factor = np.exp(-1.0 / (2.0 * float(d_var)))
    rho = integrate.evolve(initial_state(sched), 0.0, k * cfg.dt, sched, ec.bp, cfg)
    h = h_coords(rho)
    h[2] *= factor
    h[3] *= factor
    h = integrate.density_propagator(k * cfg.dt, 2 * k * cfg.dt, sched, ec.bp, cfg) @ h
    h[2] *= factor
    h[3] *= factor
    h = integrate.density_propagator(2 * k * cfg.dt, sched.t_f, sched, ec.bp, cfg) @ h
    h = h / (h[0] + h[1])
    w_e, e0 = _energy_weights(sched)
    w_f = _fidelity_weights(sched, sched.t_f)
    return float(h @ w_e - e0), float(h @ w_f)


def run_single_anneal(ec: ExperimentConfig) -> SingleAnnealResult:
    """Deterministic no-measurement sweep over [0, t_f] with a <sigma_z>(t) trace."""
    cfg = ec.cfg
    sched = ec.sched
    table = integrate._density_table(sched, ec.bp, cfg)
    n = table.n_steps
    h = h_coords(initial_state(sched))
    sigma_z = np.empty(n + 1)
    sigma_z[0] = h[0] - h[1]
    for step in range(n):
        h = table.apply(h, step, step + 1, renormalize=cfg.renormalize)
        sigma_z[step + 1] = h[0] - h[1]
    rho = DensityMatrix(matrix_from_h(h), trace_tol=1e-9)
    w_e, e0 = _energy_weights(sched)
    w_f = _fidelity_weights(sched, sched.t_f)
    return SingleAnnealResult(
        rho_final=rho,
        residual_energy=float(h @ w_e - e0),
        fidelity=float(h @ w_f),
        times=np.arange(n + 1) * cfg.dt,
        sigma_z=sigma_z,
    )
