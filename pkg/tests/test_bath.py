import numpy as np
import pytest

from lgqa.algebra import SIGMA_X, SIGMA_Z, pure_state, trace_distance
from lgqa.bath import (
    BathParams,
    generator_matrices,
    lamb_shift_S,
    lindblad_terms,
    master_rhs,
    rate_gamma,
)
from lgqa.errors import DomainError
from lgqa.integrate import IntegratorConfig, evolve
from lgqa.model import AnnealSchedule, freeze, initial_state, thermal_state


@pytest.fixture
def sched():
    return AnnealSchedule()


def test_bath_params_validation():
    with pytest.raises(DomainError):
        BathParams(alpha=-0.1, beta=1.0)
    with pytest.raises(DomainError):
        BathParams(alpha=0.0, beta=0.0)


def test_rate_zero_frequency_limit():
    bp = BathParams(alpha=1e-3, beta=10.0)
    assert rate_gamma(0.0, bp) == pytest.approx(2 * np.pi * 1e-4, rel=1e-12)
    # continuity at the origin
    assert rate_gamma(1e-9, bp) == pytest.approx(rate_gamma(0.0, bp), rel=1e-6)


def test_rate_decoupled_bath():
    bp = BathParams(alpha=0.0, beta=10.0)
    for w in (-1.0, 0.0, 0.5):
        assert rate_gamma(w, bp) == 0.0


def test_rate_kms_example():
    bp = BathParams(alpha=1e-3, beta=10.0)
    w = 1 / np.sqrt(2)
    ratio = rate_gamma(-w, bp) / rate_gamma(w, bp)
    assert ratio == pytest.approx(np.exp(-10 / np.sqrt(2)), rel=1e-12)


@pytest.mark.parametrize("beta", [1.0, 10.0, 100.0])
def test_rate_kms_identity_grid(beta):
    bp = BathParams(alpha=2e-3, beta=beta)
    for w in np.geomspace(0.01, 10.0, 25):
        lhs = rate_gamma(-w, bp)
        rhs = np.exp(-beta * w) * rate_gamma(w, bp)
        if rhs == 0.0:
            assert lhs == 0.0
        else:
            assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_rate_positive():
    bp = BathParams(alpha=0.05, beta=3.0)
    w = np.linspace(-5, 5, 101)
    from lgqa.bath import _rate_array

    assert np.all(_rate_array(w, bp) >= 0.0)


def test_lamb_shift_switches():
    assert lamb_shift_S(0.7, BathParams(alpha=0.0, beta=10.0)) == 0.0
    assert lamb_shift_S(0.7, BathParams(alpha=1e-2, beta=10.0, lamb_shift=False)) == 0.0


def test_lamb_shift_quadrature_refinement():
    bp = BathParams(alpha=1e-2, beta=10.0)
    for w in (-0.9, 0.0, 0.7071):
        s1 = lamb_shift_S(w, bp, num_nodes=4096)
        s2 = lamb_shift_S(w, bp, num_nodes=8192)
        assert abs(s2 - s1) < 1e-6 * max(1.0, abs(s1))


def test_lindblad_terms_structure(sched):
    bp = BathParams(alpha=1e-2, beta=10.0)
    # at t_f the coupling operator is diagonal in its own eigenbasis
    terms = lindblad_terms(sched, sched.t_f, bp)
    by_omega = {round(t.omega, 9): t for t in terms}
    assert len(terms) == 3
    assert np.abs(by_omega[1.0].op).max() < 1e-14
    assert np.abs(by_omega[-1.0].op).max() < 1e-14
    assert np.allclose(by_omega[0.0].op, SIGMA_Z)
    # at t=0 the coupling is fully off-diagonal
    terms0 = lindblad_terms(sched, 0.0, bp)
    l0 = [t for t in terms0 if t.omega == 0.0][0]
    assert np.abs(l0.op).max() < 1e-14
    lp = [t for t in terms0 if t.omega > 0][0]
    assert np.linalg.norm(lp.op) == pytest.approx(1.0, abs=1e-12)
    # completeness at arbitrary times
    for t in np.linspace(0.0, sched.t_f, 11):
        total = sum(term.op for term in lindblad_terms(sched, t, bp))
        assert np.allclose(total, SIGMA_Z, atol=1e-12)
    # rates are never negative
    for term in terms0:
        assert term.rate >= 0.0


def test_master_rhs_unitary_limit(sched):
    bp = BathParams(alpha=0.0, beta=10.0)
    rho = initial_state(sched)
    from lgqa.model import hamiltonian

    for t in (0.0, 6.0, 13.0):
        h = hamiltonian(sched, t)
        expect = -1j * (h @ rho.mat - rho.mat @ h)
        assert np.allclose(master_rhs(rho, sched, t, bp), expect, atol=1e-15)


def test_master_rhs_gibbs_stationary():
    sched = AnnealSchedule()
    fr = freeze(sched, 0.45, 10.0)
    bp = BathParams(alpha=1e-2, beta=10.0, lamb_shift=False)
    gibbs = thermal_state(fr, 0.0, 10.0)
    assert np.abs(master_rhs(gibbs, fr, 0.0, bp)).max() < 1e-10


def test_master_rhs_trace_and_hermiticity(sched):
    bp = BathParams(alpha=5e-3, beta=7.0)
    rng = np.random.default_rng(21)
    for _ in range(20):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        rho = pure_state(v)
        t = rng.random() * sched.t_f
        d = master_rhs(rho, sched, t, bp)
        assert abs(np.trace(d)) < 1e-12
        assert np.abs(d - d.conj().T).max() < 1e-12


def test_generator_matches_master_rhs(sched):
    bp = BathParams(alpha=1e-2, beta=10.0)  # lamb shift on
    rng = np.random.default_rng(2)
    times = np.array([0.0, 2.7, 7.0, 11.9, 14.0])
    gens = generator_matrices(sched, times, bp)
    for i, t in enumerate(times):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        rho = pure_state(v).mat
        direct = master_rhs(rho, sched, t, bp)
        via = (gens[i] @ rho.flatten()).reshape(2, 2)
        assert np.abs(direct - via).max() < 1e-9


def test_frozen_schedule_relaxes_to_gibbs():
    sched = AnnealSchedule()
    fr = freeze(sched, 0.3, 400.0)
    bp = BathParams(alpha=1e-2, beta=10.0, lamb_shift=False)
    rho = evolve(initial_state(fr), 0.0, 400.0, fr, bp, IntegratorConfig())
    gibbs = thermal_state(fr, 0.0, 10.0)
    assert trace_distance(rho, gibbs) < 1e-6
