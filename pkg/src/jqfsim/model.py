"""Physical parameters and derived coupling quantities.

Two qubits couple to a semi-infinite waveguide terminated by a mirror at
r = 0: the data qubit (DQ, index 1) near the end and the Josephson quantum
filter (JQF, index 2) about half a wavelength away.  All frequencies and
rates are stored as angular quantities (rad/s); ordinary frequencies (Hz)
enter only through :meth:`SystemParameters.from_hz` and the config layer.

The central derived object is the complex coupling matrix

    xi[m, n] = sqrt(gamma_m gamma_n)/2 * (e^{i(th_m+th_n)} + e^{i|th_m-th_n|})

with th_m = omega_ref * l_m / v.  Its real part is the dissipative (Gram)
matrix of the collective decay channel and its imaginary part the coherent
photon-mediated exchange J.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import CouplingNodeError

#: cos(theta) below this magnitude is treated as an exact node.
_NODE_TOL = 1e-12


class OmegaRef(enum.Enum):
    """Choice of the reference frequency used for all phase factors."""

    DQ = "dq"
    JQF = "jqf"
    MEAN = "mean"


@dataclass(frozen=True)
class SystemParameters:
    """All physical inputs, in angular units (rad/s) and meters.

    gamma1, gamma2 are the radiative rates the qubits would have on an
    infinite waveguide; gamma_i1, gamma_i2 are intrinsic (non-radiative)
    rates.  No ordering of l1, l2 is enforced: l1 > l2 is a supported
    analysis branch.
    """

    omega1: float
    omega2: float
    l1: float
    l2: float
    gamma1: float
    gamma2: float
    gamma_i1: float = 0.0
    gamma_i2: float = 0.0
    velocity: float = 1.0e8

    def __post_init__(self):
        for name in ("omega1", "omega2", "gamma1", "gamma2", "gamma_i1", "gamma_i2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and non-negative, got {value!r}")
        if not math.isfinite(self.velocity) or self.velocity <= 0.0:
            raise ValueError(f"velocity must be positive, got {self.velocity!r}")
        for name in ("l1", "l2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and non-negative, got {value!r}")

    @classmethod
    def from_hz(
        cls,
        omega1_hz: float,
        omega2_hz: float,
        l1: float,
        l2: float,
        gamma1_hz: float,
        gamma2_hz: float,
        gamma_i1_hz: float = 0.0,
        gamma_i2_hz: float = 0.0,
        velocity: float = 1.0e8,
    ) -> "SystemParameters":
        """Build from ordinary frequencies (Hz); converted by 2*pi."""
        twopi = 2.0 * math.pi
        return cls(
            omega1=twopi * omega1_hz,
            omega2=twopi * omega2_hz,
            l1=l1,
            l2=l2,
            gamma1=twopi * gamma1_hz,
            gamma2=twopi * gamma2_hz,
            gamma_i1=twopi * gamma_i1_hz,
            gamma_i2=twopi * gamma_i2_hz,
            velocity=velocity,
        )

    @property
    def wavelength(self) -> float:
        """Resonance wavelength 2*pi*v/omega1 of the data qubit."""
        return 2.0 * math.pi * self.velocity / self.omega1

    def replace(self, **changes) -> "SystemParameters":
        return replace(self, **changes)


def default_parameters(**changes) -> SystemParameters:
    """Standard working point: 5 GHz qubits, l1 = 0, l2 = lambda/2 = 10 mm,
    gamma1/2pi = 2 kHz, gamma2/2pi = 100 MHz, v = 1e8 m/s."""
    p = SystemParameters.from_hz(
        omega1_hz=5e9,
        omega2_hz=5e9,
        l1=0.0,
        l2=0.01,
        gamma1_hz=2e3,
        gamma2_hz=100e6,
        velocity=1e8,
    )
    return p.replace(**changes) if changes else p


@dataclass(frozen=True)
class DerivedCouplings:
    """Coupling quantities derived from :class:`SystemParameters`.

    xi        -- 2x2 complex coupling matrix (rad/s)
    J         -- 2x2 real exchange matrix, J = Im(xi) (rad/s)
    s_coeff   -- weights of sigma_m in the collective dissipator,
                 sqrt(2 gamma_m) cos(th_m)  (sqrt(rad/s))
    omega_bar -- Lamb-shifted DQ frequency (rad/s)
    eta       -- drive/decay coupling constant of the DQ, equal to s_coeff[0]
    omega_ref -- reference frequency used for all phases (rad/s)
    params    -- the source parameters
    """

    xi: np.ndarray
    J: np.ndarray
    s_coeff: np.ndarray
    omega_bar: float
    eta: float
    omega_ref: float
    params: SystemParameters

    def __post_init__(self):
        for arr in (self.xi, self.J, self.s_coeff):
            arr.flags.writeable = False

    @property
    def thetas(self) -> tuple:
        """Phases (omega_ref * l_m / v) of the two coupling points."""
        p = self.params
        return (self.omega_ref * p.l1 / p.velocity, self.omega_ref * p.l2 / p.velocity)


def _resolve_omega_ref(p: SystemParameters, choice: OmegaRef) -> float:
    if choice is OmegaRef.DQ:
        return p.omega1
    if choice is OmegaRef.JQF:
        return p.omega2
    return 0.5 * (p.omega1 + p.omega2)


def derive_couplings(
    p: SystemParameters, omega_ref_choice: OmegaRef = OmegaRef.DQ
) -> DerivedCouplings:
    """Populate all derived couplings for the given parameters.

    Total on valid parameters.  The reference frequency defaults to the DQ
    frequency; detuning is then carried by the driven/decay solvers, not by
    the phase factors.
    """
    omega_ref = _resolve_omega_ref(p, omega_ref_choice)
    gammas = np.array([p.gamma1, p.gamma2])
    thetas = omega_ref * np.array([p.l1, p.l2]) / p.velocity

    root = np.sqrt(np.outer(gammas, gammas))
    tsum = thetas[:, None] + thetas[None, :]
    tdiff = np.abs(thetas[:, None] - thetas[None, :])
    xi = 0.5 * root * (np.exp(1j * tsum) + np.exp(1j * tdiff))
    s_coeff = np.sqrt(2.0 * gammas) * np.cos(thetas)
    omega_bar = omega_ref + 0.5 * p.gamma1 * math.sin(2.0 * thetas[0])
    return DerivedCouplings(
        xi=xi,
        J=np.ascontiguousarray(xi.imag),
        s_coeff=s_coeff,
        omega_bar=omega_bar,
        eta=float(s_coeff[0]),
        omega_ref=omega_ref,
        params=p,
    )


def radiative_lifetime(p: SystemParameters) -> float:
    """Radiative lifetime 1/eta^2 of the DQ alone on the semi-infinite line.

    Raises :class:`CouplingNodeError` when the DQ sits at a field node
    (cos(th1) = 0), where the lifetime diverges.
    """
    theta1 = p.omega1 * p.l1 / p.velocity
    c = math.cos(theta1)
    if abs(c) < _NODE_TOL:
        raise CouplingNodeError(
            f"DQ at a standing-wave node (cos(omega l1/v) = {c:.2e}): "
            "radiative lifetime diverges"
        )
    return 1.0 / (2.0 * p.gamma1 * c * c)


def gate_time(p: SystemParameters, drive_amplitude: float) -> float:
    """pi-pulse duration pi/(2 eta |E_d|) for a resonant drive of amplitude
    |E_d| (units sqrt(photons/s))."""
    if drive_amplitude <= 0.0:
        raise ValueError("drive_amplitude must be positive")
    theta1 = p.omega1 * p.l1 / p.velocity
    eta = math.sqrt(2.0 * p.gamma1) * math.cos(theta1)
    if abs(eta) < _NODE_TOL * math.sqrt(2.0 * p.gamma1) or p.gamma1 == 0.0:
        raise CouplingNodeError("zero drive coupling: eta = 0 (DQ decoupled from line)")
    return math.pi / (2.0 * abs(eta) * drive_amplitude)


def tradeoff_bound(drive_amplitude: float) -> float:
    """Upper bound 4|E_d|^2/pi^2 on T_1 / T_g^2 at photon rate |E_d|^2."""
    if drive_amplitude <= 0.0:
        raise ValueError("drive_amplitude must be positive")
    return 4.0 * drive_amplitude**2 / math.pi**2
