"""Annealing schedule: Hamiltonian, instantaneous eigensystem and figures of merit.

The sweep interpolates linearly between a transverse field and the target
longitudinal field,

    H(s) = (1 - s) * (gamma_x / 2) * sigma_x + s * (gamma_z / 2) * sigma_z,

with s = t / t_f.  Energies are measured in units of gamma_x and times in
units of 1 / gamma_x (hbar = 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import SIGMA_X, SIGMA_Z, DensityMatrix, expectation, pure_state
from .errors import ContractViolationError, DomainError


@dataclass(frozen=True)
class AnnealSchedule:
    """Linear sweep parameters: transverse gamma_x, longitudinal gamma_z, duration t_f."""

    gamma_x: float = 1.0
    gamma_z: float = 1.0
    t_f: float = 14.0

    def __post_init__(self):
        if not (self.gamma_x > 0 and self.gamma_z > 0 and self.t_f > 0):
            raise DomainError("AnnealSchedule requires gamma_x, gamma_z, t_f all > 0")

    def s_of_t(self, t):
        """Dimensionless schedule parameter s = t / t_f."""
        return np.asarray(t, dtype=float) / self.t_f

    @property
    def is_static(self) -> bool:
        return False


@dataclass(frozen=True)
class FrozenSchedule:
    """Schedule held at a fixed s; used for stationarity and relaxation checks."""

    gamma_x: float = 1.0
    gamma_z: float = 1.0
    t_f: float = 14.0
    s_frozen: float = 0.0

    def __post_init__(self):
        if not (self.gamma_x > 0 and self.gamma_z > 0 and self.t_f > 0):
            raise DomainError("FrozenSchedule requires gamma_x, gamma_z, t_f all > 0")
        if not 0.0 <= self.s_frozen <= 1.0:
            raise DomainError("FrozenSchedule requires 0 <= s_frozen <= 1")

    def s_of_t(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.s_frozen)

    @property
    def is_static(self) -> bool:
        return True


def freeze(sched, s_star: float, duration: float) -> FrozenSchedule:
    """A schedule whose Hamiltonian is pinned at H(s_star) for the given duration."""
    return FrozenSchedule(sched.gamma_x, sched.gamma_z, duration, s_star)


def _check_time(sched, t: float) -> float:
    t = float(t)
    if not -1e-12 <= t <= sched.t_f + 1e-12:
        raise DomainError(f"time {t:g} outside the schedule window [0, {sched.t_f:g}]")
    return min(max(t, 0.0), sched.t_f)


def _field_components(sched, t):
    """(hx, hz) with H = hx*sigma_x + hz*sigma_z; accepts scalar or array t."""
    s = sched.s_of_t(t)
    hx = (1.0 - s) * (sched.gamma_x / 2.0)
    hz = s * (sched.gamma_z / 2.0)
    return hx, hz


def hamiltonian(sched, t: float) -> np.ndarray:
    """H(t); Hermitian and traceless."""
    t = _check_time(sched, t)
    hx, hz = _field_components(sched, t)
    return float(hx) * SIGMA_X + float(hz) * SIGMA_Z


def gap(sched, t: float) -> float:
    """Instantaneous spectral gap E1 - E0 = sqrt((1-s)^2 gx^2 + s^2 gz^2)."""
    t = _check_time(sched, t)
    hx, hz = _field_components(sched, t)
    return 2.0 * float(np.hypot(hx, hz))


def _eig_arrays(hx, hz):
    """Vectorized closed-form eigensystem of hx*sigma_x + hz*sigma_z.

    Returns (e0, e1, v0, v1) where v* have shape (..., 2), phases fixed so that
    the largest-magnitude component is real-positive (tie -> first component).
    """
    hx = np.asarray(hx, dtype=float)
    hz = np.asarray(hz, dtype=float)
    radius = np.hypot(hx, hz)
    theta = np.arctan2(hx, hz)  # angle of the field from the z axis
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    v1 = np.stack([c, s], axis=-1)
    v0 = np.stack([-s, c], axis=-1)

    def _fix(v):
        m0 = np.abs(v[..., 0])
        m1 = np.abs(v[..., 1])
        # prefer the first component unless the second is clearly larger,
        # so exact-magnitude ties are not broken by rounding noise
        pick_first = m0 >= m1 * (1.0 - 1e-9)
        lead = np.where(pick_first, v[..., 0], v[..., 1])
        sign = np.where(lead < 0.0, -1.0, 1.0)
        return v * sign[..., None]

    return -radius, radius, _fix(v0), _fix(v1)


def eigensystem(sched, t: float):
    """(E0, E1, v0, v1) of H(t) with E0 <= E1 and the fixed phase convention."""
    t = _check_time(sched, t)
    hx, hz = _field_components(sched, t)
    e0, e1, v0, v1 = _eig_arrays(hx, hz)
    return float(e0), float(e1), v0.astype(complex), v1.astype(complex)


def initial_state(sched) -> DensityMatrix:
    """Pure ground state of H(0); equals (|up> - |down>)/sqrt(2) for gamma_x > 0."""
    _, _, v0, _ = eigensystem(sched, 0.0)
    return pure_state(v0)


def residual_energy(rho, sched) -> float:
    """Tr[rho H(t_f)] - E0(t_f); non-negative up to numerical tolerance."""
    h = hamiltonian(sched, sched.t_f)
    e0, _, _, _ = eigensystem(sched, sched.t_f)
    return expectation(rho, h) - e0


def fidelity(rho, sched, t: float) -> float:
    """Instantaneous ground-state population <v0(t)| rho |v0(t)>."""
    _, _, v0, _ = eigensystem(sched, t)
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    val = float(np.real(v0.conj() @ mat @ v0))
    if not -1e-10 <= val <= 1.0 + 1e-10:
        raise ContractViolationError(f"fidelity {val!r} outside [0, 1] tolerance band")
    return val


def thermal_state(sched, t: float, beta: float) -> DensityMatrix:
    """Gibbs state exp(-beta H(t)) / Z in the instantaneous eigenbasis."""
    if beta <= 0:
        raise DomainError("thermal_state requires beta > 0")
    e0, e1, v0, v1 = eigensystem(sched, t)
    w0 = 1.0
    w1 = np.exp(-beta * (e1 - e0))
    z = w0 + w1
    mat = (w0 / z) * np.outer(v0, v0.conj()) + (w1 / z) * np.outer(v1, v1.conj())
    return DensityMatrix(mat)
