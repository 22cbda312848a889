"""Leggett-Garg diagnostics of single-qubit quantum annealing under weak measurement.

A numpy/scipy library that evolves a dissipative annealing sweep (adiabatic
Lindblad master equation with an ohmic sigma_z bath), weakly measures sigma_z
with a Gaussian-pointer ancilla model, estimates two-time correlators and the
third-order Leggett-Garg functions from trajectory ensembles, and contrasts
them with classical stochastic spin dynamics on the same schedule.
"""

__version__ = "0.1.0"

from .algebra import (
    DensityMatrix,
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    commutator,
    expectation,
    min_eigenvalue,
    pure_state,
    trace_distance,
)
from .bath import BathParams, LindbladTerm, lamb_shift_S, lindblad_terms, master_rhs, rate_gamma
from .classical import (
    LangevinParams,
    classical_correlator,
    classical_lgi_sweep,
    effective_field,
    eta_from_alpha,
    langevin_step,
    run_ensemble,
)
from .errors import (
    ConfigError,
    ContractViolationError,
    DegenerateOutcomeError,
    DomainError,
    IntegrationError,
)
from .experiments import (
    CorrelatorEstimate,
    ExperimentConfig,
    K3Result,
    ResEnergyPoint,
    correlator_projective,
    correlator_weak,
    k3,
    lgi_sweep,
    resenergy_oracle,
    resenergy_sweep,
    run_single_anneal,
    trajectory_seed,
)
from .integrate import (
    IntegratorConfig,
    density_propagator,
    evolve,
    evolve_unitary,
    unitary_propagator,
)
from .measure import (
    MeasurementParams,
    Readout,
    nonselective_dephasing_factor,
    projective_measure,
    sample_readout,
    weak_update,
)
from .model import (
    AnnealSchedule,
    FrozenSchedule,
    eigensystem,
    fidelity,
    freeze,
    gap,
    hamiltonian,
    initial_state,
    residual_energy,
    thermal_state,
)

__all__ = [name for name in dir() if not name.startswith("_")]
