"""Closed-form complex 2x2 algebra for a single qubit.

Basis convention used everywhere in this package: ``|up> = (1, 0)``,
``|down> = (0, 1)``, so ``sigma_z = diag(+1, -1)`` and ``|down>`` carries the
sigma_z eigenvalue -1.  Everything here is exact 2x2 arithmetic; no iterative
eigensolvers.
"""
from __future__ import annotations

import numpy as np

from .errors import ContractViolationError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
for _m in (SIGMA_X, SIGMA_Y, SIGMA_Z, IDENTITY):
    _m.setflags(write=False)

HERMITICITY_ATOL = 1e-12
POSITIVITY_TOL = -1e-9


def _as_matrix(obj) -> np.ndarray:
    if isinstance(obj, DensityMatrix):
        return obj.mat
    m = np.asarray(obj, dtype=complex)
    if m.shape != (2, 2):
        raise ContractViolationError(f"expected a 2x2 matrix, got shape {m.shape}")
    return m


def hermiticity_defect(m) -> float:
    """Largest entrywise deviation of ``m`` from its Hermitian conjugate."""
    m = _as_matrix(m)
    return float(np.abs(m - m.conj().T).max())


def commutator(a, b) -> np.ndarray:
    """``a @ b - b @ a``."""
    a = _as_matrix(a)
    b = _as_matrix(b)
    return a @ b - b @ a


def min_eigenvalue(m, atol: float = HERMITICITY_ATOL) -> float:
    """Smaller eigenvalue of a Hermitian 2x2 matrix, from the closed-form roots.

    For ``m = c0*I + c.sigma`` the eigenvalues are ``c0 -/+ |c|``.
    """
    m = _as_matrix(m)
    if hermiticity_defect(m) > atol:
        raise ContractViolationError("min_eigenvalue requires a Hermitian matrix")
    half_tr = 0.5 * (m[0, 0].real + m[1, 1].real)
    radius = np.hypot(0.5 * (m[0, 0].real - m[1, 1].real), abs(m[0, 1]))
    return float(half_tr - radius)


def max_eigenvalue(m, atol: float = HERMITICITY_ATOL) -> float:
    m = _as_matrix(m)
    if hermiticity_defect(m) > atol:
        raise ContractViolationError("max_eigenvalue requires a Hermitian matrix")
    half_tr = 0.5 * (m[0, 0].real + m[1, 1].real)
    radius = np.hypot(0.5 * (m[0, 0].real - m[1, 1].real), abs(m[0, 1]))
    return float(half_tr + radius)


class DensityMatrix:
    """Hermitian, trace-one, positive-semidefinite 2x2 state.

    The stored matrix is exactly Hermitian (``mat[0,1] == conj(mat[1,0])`` by
    construction); trace and positivity are validated against the tolerances
    below when an instance is created.
    """

    __slots__ = ("mat",)

    def __init__(self, mat, *, trace_tol: float = 1e-12, herm_tol: float = 1e-9):
        m = _as_matrix(mat)
        if hermiticity_defect(m) > herm_tol:
            raise ContractViolationError(
                f"density matrix not Hermitian within {herm_tol:g}"
            )
        m = 0.5 * (m + m.conj().T)  # exact: forces a01 == conj(a10)
        tr = m[0, 0].real + m[1, 1].real
        if abs(tr - 1.0) > trace_tol:
            raise ContractViolationError(
                f"density matrix trace {tr!r} deviates from 1 beyond {trace_tol:g}"
            )
        lo = min_eigenvalue(m, atol=np.inf)
        if lo < POSITIVITY_TOL:
            raise ContractViolationError(
                f"density matrix minimum eigenvalue {lo:g} below {POSITIVITY_TOL:g}"
            )
        m.setflags(write=False)
        self.mat = m

    @property
    def rho_up(self) -> float:
        """Population of |up> (sigma_z = +1)."""
        return float(self.mat[0, 0].real)

    @property
    def rho_down(self) -> float:
        """Population of |down> (sigma_z = -1)."""
        return float(self.mat[1, 1].real)

    @property
    def coherence(self) -> complex:
        """Off-diagonal element <down|rho|up>."""
        return complex(self.mat[1, 0])

    def purity(self) -> float:
        return float(np.trace(self.mat @ self.mat).real)

    def bloch(self) -> np.ndarray:
        """Bloch vector (x, y, z) with z = rho_up - rho_down."""
        x = 2.0 * self.mat[0, 1].real
        y = -2.0 * self.mat[0, 1].imag
        z = self.mat[0, 0].real - self.mat[1, 1].real
        return np.array([x, y, z])

    def __repr__(self) -> str:
        return f"DensityMatrix({self.mat.tolist()!r})"


def pure_state(vec) -> DensityMatrix:
    """Density matrix ``|v><v|`` of a normalized 2-vector."""
    v = np.asarray(vec, dtype=complex).reshape(2)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or abs(n - 1.0) > 1e-9:
        raise ContractViolationError(f"state vector norm {n!r} is not 1")
    v = v / n
    return DensityMatrix(np.outer(v, v.conj()))


def expectation(rho, obs, herm_atol: float = HERMITICITY_ATOL) -> float:
    """``Tr[rho @ obs]`` for a Hermitian observable.

    The imaginary part of the trace must be below 1e-10 and is discarded.
    """
    r = _as_matrix(rho)
    a = _as_matrix(obs)
    if hermiticity_defect(a) > herm_atol:
        raise ContractViolationError("expectation requires a Hermitian observable")
    tr = np.trace(r @ a)
    if abs(tr.imag) >= 1e-10:
        raise ContractViolationError(
            f"expectation value has imaginary part {tr.imag:g}"
        )
    return float(tr.real)


def trace_distance(a, b) -> float:
    """``0.5 * ||a - b||_1`` for Hermitian 2x2 matrices (closed form)."""
    d = _as_matrix(a) - _as_matrix(b)
    half_tr = 0.5 * (d[0, 0].real + d[1, 1].real)
    radius = np.hypot(0.5 * (d[0, 0].real - d[1, 1].real), abs(d[0, 1]))
    # eigenvalues of the Hermitian difference are half_tr +- radius
    return 0.5 * (abs(half_tr - radius) + abs(half_tr + radius))
