import numpy as np
import pytest

from lgqa.algebra import (
    DensityMatrix,
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    commutator,
    expectation,
    max_eigenvalue,
    min_eigenvalue,
    pure_state,
    trace_distance,
)
from lgqa.errors import ContractViolationError


def test_expectation_maximally_mixed():
    rho = DensityMatrix(0.5 * IDENTITY)
    assert expectation(rho, SIGMA_Z) == pytest.approx(0.0, abs=1e-14)


def test_expectation_down_eigenstate():
    rho = pure_state([0.0, 1.0])
    assert expectation(rho, SIGMA_Z) == pytest.approx(-1.0, abs=1e-14)


def test_expectation_initial_ground_state():
    rho = pure_state(np.array([1.0, -1.0]) / np.sqrt(2))
    assert expectation(rho, SIGMA_X) == pytest.approx(-1.0, abs=1e-14)


def test_expectation_rejects_non_hermitian():
    with pytest.raises(ContractViolationError):
        expectation(0.5 * IDENTITY, np.array([[0, 1], [0, 0]], dtype=complex))


def test_expectation_linear_in_both_arguments():
    rng = np.random.default_rng(7)
    for _ in range(25):
        c = rng.standard_normal(4)
        obs1 = c[0] * IDENTITY + c[1] * SIGMA_X + c[2] * SIGMA_Y + c[3] * SIGMA_Z
        d = rng.standard_normal(4)
        obs2 = d[0] * IDENTITY + d[1] * SIGMA_X + d[2] * SIGMA_Y + d[3] * SIGMA_Z
        a, b = rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        rho = pure_state(v)
        lhs = expectation(rho, a * obs1 + b * obs2)
        rhs = a * expectation(rho, obs1) + b * expectation(rho, obs2)
        assert lhs == pytest.approx(rhs, abs=1e-12)
        # linearity in the state argument via mixtures
        w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        w /= np.linalg.norm(w)
        sig = pure_state(w)
        lam = rng.random()
        mix = lam * rho.mat + (1 - lam) * sig.mat
        assert expectation(mix, obs1) == pytest.approx(
            lam * expectation(rho, obs1) + (1 - lam) * expectation(sig, obs1),
            abs=1e-12,
        )


def test_commutator_pauli_algebra():
    assert np.allclose(commutator(SIGMA_X, SIGMA_X), 0.0)
    assert np.allclose(commutator(SIGMA_X, SIGMA_Z), -2j * SIGMA_Y)
    m = np.array([[1.0, 2.0 + 1j], [2.0 - 1j, -3.0]])
    assert np.allclose(commutator(IDENTITY, m), 0.0)


def test_min_eigenvalue_examples():
    assert min_eigenvalue(0.5 * IDENTITY) == pytest.approx(0.5, abs=1e-15)
    assert min_eigenvalue(SIGMA_Z) == pytest.approx(-1.0, abs=1e-15)
    assert min_eigenvalue(np.diag([0.999, 0.001]).astype(complex)) == pytest.approx(
        0.001, abs=1e-15
    )
    with pytest.raises(ContractViolationError):
        min_eigenvalue(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eigenvalues_match_pauli_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(100):
        c0 = rng.standard_normal()
        c = rng.standard_normal(3)
        m = c0 * IDENTITY + c[0] * SIGMA_X + c[1] * SIGMA_Y + c[2] * SIGMA_Z
        r = np.linalg.norm(c)
        assert min_eigenvalue(m) == pytest.approx(c0 - r, abs=1e-12)
        assert max_eigenvalue(m) == pytest.approx(c0 + r, abs=1e-12)


def test_density_matrix_enforces_hermiticity_exactly():
    mat = np.array([[0.5, 0.1 + 0.2j], [0.1 - 0.2j, 0.5]])
    rho = DensityMatrix(mat)
    assert rho.mat[0, 1] == np.conj(rho.mat[1, 0])
    with pytest.raises(ContractViolationError):
        DensityMatrix(np.array([[0.5, 0.3], [0.0, 0.5]]))


def test_density_matrix_trace_and_positivity_guards():
    with pytest.raises(ContractViolationError):
        DensityMatrix(np.diag([0.7, 0.7]).astype(complex))
    with pytest.raises(ContractViolationError):
        DensityMatrix(np.array([[0.5, 0.6], [0.6, 0.5]], dtype=complex))


def test_pure_state_requires_normalization():
    with pytest.raises(ContractViolationError):
        pure_state([1.0, 1.0])


def test_trace_distance():
    up = pure_state([1.0, 0.0])
    down = pure_state([0.0, 1.0])
    assert trace_distance(up, down) == pytest.approx(1.0, abs=1e-14)
    assert trace_distance(up, up) == pytest.approx(0.0, abs=1e-15)
    mixed = DensityMatrix(0.5 * IDENTITY)
    assert trace_distance(up, mixed) == pytest.approx(0.5, abs=1e-14)
