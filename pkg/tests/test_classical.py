import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from lgqa.classical import (
    INITIAL_SPIN,
    LangevinParams,
    classical_correlator,
    classical_lgi_sweep,
    effective_field,
    eta_from_alpha,
    langevin_step,
    run_ensemble,
)
from lgqa.errors import DomainError
from lgqa.model import AnnealSchedule, freeze


@pytest.fixture
def sched():
    return AnnealSchedule()


class HalfUniform:
    """Uniforms pinned at 1/2 make the inverse-CDF noise exactly zero."""

    def random(self, n=None):
        return np.full(n, 0.5) if n is not None else 0.5


def test_params_validation():
    with pytest.raises(DomainError):
        LangevinParams(eta=-0.1, beta=1.0)
    with pytest.raises(DomainError):
        LangevinParams(eta=0.0, beta=0.0)
    assert eta_from_alpha(1e-3) == pytest.approx(np.pi * 1e-3)


def test_effective_field_examples(sched):
    assert np.allclose(effective_field(sched, 0.0), [0.5, 0.0, 0.0])
    assert np.allclose(effective_field(sched, 14.0), [0.0, 0.0, 0.5])
    assert np.allclose(effective_field(sched, 7.0), [0.25, 0.0, 0.25])


def test_precession_invariants(sched):
    # eta = 0, zero noise: |m| and m.b conserved over one period
    fr = freeze(sched, 0.0, 20.0)
    b = effective_field(fr, 0.0)
    lp = LangevinParams(eta=0.0, beta=10.0, dt=1e-3)
    m = np.array([0.0, 0.6, 0.8])
    mb0 = m @ b
    t = 0.0
    for _ in range(int(round(2 * np.pi / np.linalg.norm(b) / lp.dt))):
        m = langevin_step(m, t, lp, fr, HalfUniform())
        t += lp.dt
        assert abs(np.linalg.norm(m) - 1.0) < 1e-9
    assert abs(m @ b - mb0) < 1e-10


def test_damped_noiseless_energy_descent(sched):
    fr = freeze(sched, 0.0, 50.0)
    b = effective_field(fr, 0.0)
    lp = LangevinParams(eta=0.5, beta=10.0, dt=1e-3)
    m = np.array([1e-6, 1.0, 0.0])
    m /= np.linalg.norm(m)
    energy = m @ b
    t = 0.0
    for _ in range(40_000):
        m = langevin_step(m, t, lp, fr, HalfUniform())
        t += lp.dt
        e = m @ b
        assert e <= energy + 1e-12
        energy = e
    bhat = b / np.linalg.norm(b)
    assert m @ bhat == pytest.approx(-1.0, abs=1e-7)


def test_deterministic_llg_against_ivp_oracle(sched):
    # independent oracle: adaptive integration of the noise-free equations
    fr = freeze(sched, 0.25, 10.0)
    b = effective_field(fr, 0.0)
    eta = 0.3

    def rhs(_t, m):
        h = -b
        prec = np.cross(m, h)
        return -prec - eta * np.cross(m, prec)

    m0 = np.array([0.0, 0.8, -0.6])
    sol = solve_ivp(rhs, (0.0, 5.0), m0, rtol=1e-11, atol=1e-13)
    oracle = sol.y[:, -1] / np.linalg.norm(sol.y[:, -1])
    lp = LangevinParams(eta=eta, beta=10.0, dt=5e-4)
    m = m0.copy()
    t = 0.0
    for _ in range(int(round(5.0 / lp.dt))):
        m = langevin_step(m, t, lp, fr, HalfUniform())
        t += lp.dt
    assert np.abs(m - oracle).max() < 1e-5


def test_equilibrium_matches_boltzmann_sphere_average(sched):
    # frozen field; compare <m . bhat> to the 1-D quadrature oracle
    fr = freeze(sched, 0.0, 15.0)
    b = effective_field(fr, 0.0)
    beta = 3.0
    lp = LangevinParams(eta=1.0, beta=beta, dt=5e-3, n_traj=6000, master_seed=77)
    res = run_ensemble(lp, fr, 15.0, workers=2)
    bhat = b / np.linalg.norm(b)
    u = res.m_final @ bhat
    x = beta * np.linalg.norm(b)
    num = quad(lambda s: s * np.exp(-x * s), -1, 1)[0]
    den = quad(lambda s: np.exp(-x * s), -1, 1)[0]
    oracle = num / den
    se = u.std() / np.sqrt(len(u))
    assert abs(u.mean() - oracle) < 3 * se
    # spins stay unit length
    assert np.abs(np.linalg.norm(res.m_final, axis=1) - 1.0).max() < 1e-9


def test_noise_free_correlator_equals_deterministic_product(sched):
    lp = LangevinParams(eta=0.0, beta=10.0, dt=1e-3, n_traj=64)
    est = classical_correlator(3.0, 9.0, lp, sched)
    assert est.stderr == 0.0

    def rhs(t, m):
        h = -effective_field(sched, min(t, sched.t_f))
        prec = np.cross(m, h)
        return -prec

    sol = solve_ivp(rhs, (0.0, 9.0), INITIAL_SPIN, rtol=1e-11, atol=1e-13,
                    dense_output=True)
    mz3 = sol.sol(3.0)[2] / np.linalg.norm(sol.sol(3.0))
    mz9 = sol.sol(9.0)[2] / np.linalg.norm(sol.sol(9.0))
    assert est.mean == pytest.approx(mz3 * mz9, abs=1e-5)


def test_equal_time_classical_correlator(sched):
    lp = LangevinParams(eta=0.0, beta=10.0, dt=1e-3, n_traj=16)
    est = classical_correlator(5.0, 5.0, lp, sched)
    assert 0.0 <= est.mean <= 1.0


def test_classical_lgi_sweep(sched):
    lp = LangevinParams(eta=eta_from_alpha(1e-3), beta=10.0, dt=2e-3, n_traj=4000)
    res = classical_lgi_sweep(lp, sched, (0.0, 3.5, 7.0), workers=2)
    assert len(res) == 9
    by = {(r.variant, r.tau): r for r in res}
    # initial transverse spin: mz(0) = 0 exactly, so K3a(0) = 0
    assert by[("a", 0.0)].value == pytest.approx(0.0, abs=1e-12)
    for r in res:
        assert r.value <= 1.0 + 3 * r.stderr + 1e-12


def test_classical_worker_independence(sched):
    lp = LangevinParams(eta=eta_from_alpha(1e-2), beta=10.0, dt=5e-3, n_traj=3000)
    a = classical_lgi_sweep(lp, sched, (3.5,), workers=1)
    b = classical_lgi_sweep(lp, sched, (3.5,), workers=8)
    assert a == b
