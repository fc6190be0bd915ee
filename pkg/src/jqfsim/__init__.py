"""Simulator for a data qubit protected by a Josephson quantum filter on a
semi-infinite waveguide: closed-form single-excitation decay, rigorous
retarded (delay) dynamics, and driven master-equation / moment-system
evolution."""

from .backends import COMPILED, backend_name
from .decay import (
    AmplitudeTrajectory,
    Branch,
    PhotonWavepacket,
    SubradiantSplit,
    adiabatic_complex_frequency,
    decay_amplitudes,
    decay_rate_with_loss,
    effective_cavity_frequencies,
    photon_wavepacket,
    subradiant_decomposition,
    survival_probability,
)
from .delay import (
    DdeComparison,
    DelaySystem,
    compare_with_approximation,
    default_step,
    solve_dde,
)
from .driven import (
    DriveEnvelope,
    Segment,
    StateTrajectory,
    amplitude_for_rabi,
    evolve_master,
    evolve_moments,
    free_rabi,
    moments_from_density,
    pi_pulse_amplitude,
    purity,
    rabi_frequency,
    scenario_pi_pulse,
    scenario_pulse_train,
)
from .exceptions import (
    ConfigError,
    CouplingNodeError,
    GeometryError,
    IntegrationError,
    JqfsimError,
    NonColocatedError,
    PhysicsError,
    ResonantFilterError,
    StepSizeError,
)
from .history import HistoryBuffer
from .model import (
    DerivedCouplings,
    OmegaRef,
    SystemParameters,
    default_parameters,
    derive_couplings,
    gate_time,
    radiative_lifetime,
    tradeoff_bound,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
