"""Fixed-step RK4 propagation of the master equation and its unitary special case.

The master equation is linear in rho, so every RK4 step is a fixed 4x4 linear
map on the state's Hermitian coordinates (rho_00, rho_11, Re rho_01, Im rho_01).
The per-step maps are precomputed on the dt grid once per (schedule, bath,
config) triple and cached; evolution then reduces to chained small matmuls,
which also yields exact linear propagators for branch and ensemble evolution.

Measurement and query times are snapped to the step grid (nearest multiple
of dt).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import DensityMatrix
from .bath import BathParams, generator_matrices
from .errors import DomainError, IntegrationError
from .model import _check_time, _field_components

POSITIVITY_TOL = -1e-9
TRACE_TOL = 1e-9

# vec(rho) = C @ h with h = (rho00, rho11, Re rho01, Im rho01)
_C = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 1, 1j],
        [0, 0, 1, -1j],
        [0, 1, 0, 0],
    ],
    dtype=complex,
)
_C_INV = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 0, 1],
        [0, 0.5, 0.5, 0],
        [0, -0.5j, 0.5j, 0],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings; renormalize rescales the trace after each step."""

    dt: float = 1e-3
    method: str = "rk4"
    renormalize: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("IntegratorConfig requires dt > 0")
        if self.method != "rk4":
            raise DomainError(f"unsupported integrator method {self.method!r}")


def h_coords(mat) -> np.ndarray:
    """Hermitian coordinates (rho00, rho11, Re rho01, Im rho01) of a 2x2 matrix."""
    m = mat.mat if isinstance(mat, DensityMatrix) else np.asarray(mat, dtype=complex)
    return np.array([m[0, 0].real, m[1, 1].real, m[0, 1].real, m[0, 1].imag])


def matrix_from_h(h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    od = h[2] + 1j * h[3]
    return np.array([[h[0], od], [np.conj(od), h[1]]], dtype=complex)


def _steps_of(t: float, dt: float) -> int:
    return int(round(float(t) / dt))


def _grid_size(sched, cfg: IntegratorConfig) -> int:
    if cfg.dt > sched.t_f / 100.0 + 1e-12:
        raise DomainError("IntegratorConfig requires dt <= t_f / 100")
    n = _steps_of(sched.t_f, cfg.dt)
    return n


def _rk4_step_matrices(gen_fn, t0: np.ndarray, dt: float, dim: int) -> np.ndarray:
    """Classic RK4 transfer matrices for the linear ODE y' = L(t) y.

    gen_fn maps an array of times to (N, dim, dim) generator matrices.
    """
    n = len(t0)
    half_times = np.empty(2 * n + 1)
    half_times[0::2] = np.concatenate([t0, [t0[-1] + dt]]) if n else [0.0]
    half_times[1::2] = t0 + dt / 2.0
    g = gen_fn(half_times)
    k1 = g[0:-1:2]
    mid = g[1::2]
    k4b = g[2::2]
    eye = np.eye(dim, dtype=complex)
    k2 = np.einsum("nij,njk->nik", mid, eye + (dt / 2.0) * k1)
    k3 = np.einsum("nij,njk->nik", mid, eye + (dt / 2.0) * k2)
    k4 = np.einsum("nij,njk->nik", k4b, eye + dt * k3)
    return eye + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _DensityTable:
    """Per-step real 4x4 transfer matrices on Hermitian coordinates."""

    def __init__(self, sched, bp: BathParams, cfg: IntegratorConfig):
        self.sched = sched
        self.bp = bp
        self.cfg = cfg
        self.dt = cfg.dt
        self.n_steps = _grid_size(sched, cfg)
        self.static = sched.is_static

        def gen(times):
            return generator_matrices(sched, np.minimum(times, sched.t_f), bp)

        if self.static:
            m = _rk4_step_matrices(gen, np.array([0.0]), self.dt, 4)
        else:
            t0 = np.arange(self.n_steps) * self.dt
            m = _rk4_step_matrices(gen, t0, self.dt, 4)
        t_real = np.einsum("ij,njk,kl->nil", _C_INV, m, _C)
        defect = float(np.abs(t_real.imag).max())
        if defect > 1e-12:
            raise IntegrationError(
                f"step matrices not Hermiticity-preserving (imag {defect:g})", 0.0
            )
        steps = np.ascontiguousarray(t_real.real)
        self._step0 = steps[0]
        self._steps = None if self.static else steps

    def step_matrix(self, n: int) -> np.ndarray:
        return self._step0 if self.static else self._steps[n]

    def apply(self, h: np.ndarray, a: int, b: int, renormalize: bool,
              check_positivity: bool = True) -> np.ndarray:
        h = np.array(h, dtype=float)
        for n in range(a, b):
            h = self.step_matrix(n) @ h
            tr = h[0] + h[1]
            if renormalize:
                h /= tr
                tr = 1.0
            if check_positivity:
                lo = 0.5 * tr - np.hypot(0.5 * (h[0] - h[1]), np.hypot(h[2], h[3]))
                if lo < POSITIVITY_TOL:
                    raise IntegrationError(
                        f"positivity violated (min eigenvalue {lo:g})",
                        (n + 1) * self.dt,
                    )
        return h

    def propagator(self, a: int, b: int) -> np.ndarray:
        """Linear map of Hermitian coordinates from step a to step b."""
        if b < a:
            raise DomainError("propagator requires a <= b")
        if self.static:
            return np.linalg.matrix_power(self._step0, b - a)
        out = np.eye(4)
        for n in range(a, b):
            out = self._steps[n] @ out
        return out


class _UnitaryTable:
    """Per-step complex 2x2 transfer matrices for the Schroedinger equation."""

    def __init__(self, sched, cfg: IntegratorConfig):
        self.sched = sched
        self.cfg = cfg
        self.dt = cfg.dt
        self.n_steps = _grid_size(sched, cfg)
        self.static = sched.is_static

        def gen(times):
            hx, hz = _field_components(sched, np.minimum(times, sched.t_f))
            n = len(times)
            h = np.zeros((n, 2, 2), dtype=complex)
            h[:, 0, 0] = hz
            h[:, 1, 1] = -hz
            h[:, 0, 1] = hx
            h[:, 1, 0] = hx
            return -1j * h

        if self.static:
            m = _rk4_step_matrices(gen, np.array([0.0]), self.dt, 2)
        else:
            t0 = np.arange(self.n_steps) * self.dt
            m = _rk4_step_matrices(gen, t0, self.dt, 2)
        self._step0 = m[0]
        self._steps = None if self.static else m

    def apply(self, psi: np.ndarray, a: int, b: int, renormalize: bool) -> np.ndarray:
        psi = np.array(psi, dtype=complex)
        steps = self._steps
        for n in range(a, b):
            psi = (self._step0 if steps is None else steps[n]) @ psi
            if renormalize:
                psi /= np.linalg.norm(psi)
        return psi

    def propagator(self, a: int, b: int) -> np.ndarray:
        if self.static:
            return np.linalg.matrix_power(self._step0, b - a)
        out = np.eye(2, dtype=complex)
        for n in range(a, b):
            out = self._steps[n] @ out
        return out


@lru_cache(maxsize=8)
def _density_table(sched, bp: BathParams, cfg: IntegratorConfig) -> _DensityTable:
    return _DensityTable(sched, bp, cfg)


@lru_cache(maxsize=8)
def _unitary_table(sched, cfg: IntegratorConfig) -> _UnitaryTable:
    return _UnitaryTable(sched, cfg)


def _snap_steps(sched, cfg: IntegratorConfig, t0: float, t1: float) -> tuple[int, int]:
    _check_time(sched, t0)
    _check_time(sched, t1)
    if t1 < t0:
        raise DomainError("evolve requires t0 <= t1")
    return _steps_of(t0, cfg.dt), _steps_of(t1, cfg.dt)


def evolve(rho, t0: float, t1: float, sched, bp: BathParams,
           cfg: IntegratorConfig = IntegratorConfig()) -> DensityMatrix:
    """Integrate the master equation from t0 to t1.

    Preserves trace within 1e-9 (exactly when renormalize is on) and raises
    IntegrationError if positivity degrades beyond tolerance.  t0 == t1
    returns the input state unchanged.
    """
    table = _density_table(sched, bp, cfg)
    a, b = _snap_steps(sched, cfg, t0, t1)
    h = h_coords(rho)
    h = table.apply(h, a, b, renormalize=cfg.renormalize)
    tr = h[0] + h[1]
    if abs(tr - 1.0) > TRACE_TOL:
        raise IntegrationError(f"trace drifted to {tr!r}", t1)
    return DensityMatrix(matrix_from_h(h), trace_tol=TRACE_TOL)


def evolve_unitary(state, t0: float, t1: float, sched,
                   cfg: IntegratorConfig = IntegratorConfig()) -> np.ndarray:
    """Propagate a pure state under H(t) alone (fast path for alpha = 0)."""
    table = _unitary_table(sched, cfg)
    a, b = _snap_steps(sched, cfg, t0, t1)
    psi = np.asarray(state, dtype=complex).reshape(2)
    psi = table.apply(psi, a, b, renormalize=cfg.renormalize)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise IntegrationError(f"norm drifted to {norm!r}", t1)
    return psi


def density_propagator(t0: float, t1: float, sched, bp: BathParams,
                       cfg: IntegratorConfig = IntegratorConfig()) -> np.ndarray:
    """Real 4x4 linear map of Hermitian coordinates from t0 to t1."""
    table = _density_table(sched, bp, cfg)
    a, b = _snap_steps(sched, cfg, t0, t1)
    return table.propagator(a, b)


def unitary_propagator(t0: float, t1: float, sched,
                       cfg: IntegratorConfig = IntegratorConfig()) -> np.ndarray:
    table = _unitary_table(sched, cfg)
    a, b = _snap_steps(sched, cfg, t0, t1)
    return table.propagator(a, b)
