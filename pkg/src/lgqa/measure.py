"""Weak and projective sigma_z readout kernels.

A weak readout draws a pointer value from the two-Gaussian mixture

    P(r) = rho_down * G(r; -1, D) + rho_up * G(r; +1, D),

where D is the pointer variance, and conditions the state with the Gaussian
Bayes rule.  Because the likelihood ratio of the two peaks is exp(-2r/D), the
update takes the exponential form

    rho'_down ~ rho_down * e^g,  rho'_up ~ rho_up * e^-g,  g = -r/D,

with the off-diagonal element only rescaled by the common normalization.
Averaging the update over P(r) leaves populations untouched and damps the
coherence by exp(-1/(2D)).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .algebra import DensityMatrix
from .errors import ContractViolationError, DegenerateOutcomeError, DomainError

_LOG_MIN_NORM = np.log(1e-300)


@dataclass(frozen=True)
class MeasurementParams:
    """Pointer variance and the fixed readout means for |down>, |up>."""

    variance: float = 20.0
    peak_down: float = -1.0
    peak_up: float = 1.0

    def __post_init__(self):
        if not self.variance > 0:
            raise DomainError("MeasurementParams requires variance > 0")


@dataclass(frozen=True)
class Readout:
    """A single pointer sample r taken at time t."""

    r: float
    t: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.r):
            raise DomainError("readout value must be finite")


def open_uniform(u):
    """Map [0, 1) uniforms into the open interval (0, 1) for inverse-CDF use."""
    return np.asarray(u, dtype=float) * (1.0 - 2.0 ** -52) + 2.0 ** -53


def sample_readouts(p_down, mp: MeasurementParams, u_comp, u_gauss) -> np.ndarray:
    """Vectorized mixture sampling from component and Gaussian uniforms."""
    p_down = np.asarray(p_down, dtype=float)
    mean = np.where(np.asarray(u_comp) < p_down, mp.peak_down, mp.peak_up)
    return mean + np.sqrt(mp.variance) * ndtri(open_uniform(u_gauss))


def sample_readout(rho: DensityMatrix, mp: MeasurementParams, rng,
                   t: float = 0.0) -> Readout:
    """Draw one pointer value from P(r); rng needs only a .random() method."""
    r = sample_readouts(rho.rho_down, mp, rng.random(), rng.random())
    return Readout(r=float(r), t=t)


def weak_update(rho: DensityMatrix, read: Readout, mp: MeasurementParams) -> DensityMatrix:
    """Conditional state after observing the pointer value ``read.r``.

    Pure states stay pure; the off-diagonal phase is never changed.  A
    normalization below 1e-300 raises DegenerateOutcomeError.
    """
    g = -read.r / mp.variance
    k = abs(g)  # rescale by e^-k so both exponentials are <= 1
    w_down = rho.rho_down * np.exp(g - k)
    w_up = rho.rho_up * np.exp(-g - k)
    norm_scaled = w_down + w_up
    if norm_scaled <= 0.0 or np.log(norm_scaled) + k <= _LOG_MIN_NORM:
        raise DegenerateOutcomeError(
            f"weak update normalization underflow for readout r={read.r:g}"
        )
    od = rho.mat[0, 1] * np.exp(-k) / norm_scaled
    mat = np.array(
        [[w_up / norm_scaled, od], [np.conj(od), w_down / norm_scaled]],
        dtype=complex,
    )
    return DensityMatrix(mat)


def weak_update_h(h: np.ndarray, r: np.ndarray, variance: float) -> np.ndarray:
    """Vectorized weak update on Hermitian coordinates, shape (n, 4)."""
    g = -np.asarray(r, dtype=float) / variance
    k = np.abs(g)
    w_down = h[:, 1] * np.exp(g - k)
    w_up = h[:, 0] * np.exp(-g - k)
    norm = w_down + w_up
    with np.errstate(divide="ignore"):
        log_norm = np.log(np.maximum(norm, 0.0)) + k
    if np.any(norm <= 0.0) or np.any(log_norm <= _LOG_MIN_NORM):
        raise DegenerateOutcomeError("weak update normalization underflow")
    scale = np.exp(-k) / norm
    out = np.empty_like(h)
    out[:, 0] = w_up / norm
    out[:, 1] = w_down / norm
    out[:, 2] = h[:, 2] * scale
    out[:, 3] = h[:, 3] * scale
    return out


def nonselective_dephasing_factor(mp: MeasurementParams) -> float:
    """Coherence damping of the readout-averaged weak measurement: exp(-1/(2D))."""
    return float(np.exp(-1.0 / (2.0 * mp.variance)))


def projective_measure(rho: DensityMatrix, rng=None, enumerate_branches: bool = False):
    """Projective sigma_z measurement.

    Sampling mode draws an outcome from the populations and collapses; in
    enumeration mode both branches are returned as (outcome, probability,
    state) tuples, dropping branches with probability below 1e-15.
    """
    p_up = rho.rho_up
    p_down = rho.rho_down
    up_state = DensityMatrix(np.diag([1.0, 0.0]).astype(complex))
    down_state = DensityMatrix(np.diag([0.0, 1.0]).astype(complex))
    if enumerate_branches:
        branches = []
        if p_up >= 1e-15:
            branches.append((1, p_up, up_state))
        if p_down >= 1e-15:
            branches.append((-1, p_down, down_state))
        return branches
    if rng is None:
        raise ContractViolationError("sampling mode requires an rng")
    if rng.random() < p_up:
        return (1, p_up, up_state)
    return (-1, p_down, down_state)
