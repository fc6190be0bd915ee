"""Closed-form single-excitation dynamics.

One excitation shared by the DQ, the JQF and the field: the amplitude pair
(alpha1, alpha2) obeys two linear equations whose solution is a sum of two
exponentials exp(mu_{1,2} t) on top of the carrier exp(-i omega1 t).  The
roots mu solve

    (z + a11)(z + a22) - xi12 xi21 = 0

with a_mm = xi_mm + gamma_im/2 (+ i detuning on the filter entry).  Detuning
omega2 - omega1 and intrinsic losses are taken from the parameters attached
to the couplings; for the resonant lossless case this reduces to the plain
xi form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NonColocatedError, ResonantFilterError
from .model import DerivedCouplings, SystemParameters, derive_couplings

#: relative root separation below which the confluent (double-root) form is used
_DEGENERATE_TOL = 1e-8


@dataclass(frozen=True)
class AmplitudeTrajectory:
    """Time series of the two excitation amplitudes (carrier included)."""

    times: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    mu1: complex
    mu2: complex

    def __post_init__(self):
        for arr in (self.times, self.alpha1, self.alpha2, self.p1, self.p2):
            arr.flags.writeable = False


@dataclass(frozen=True)
class PhotonWavepacket:
    """Emitted-photon wavepacket f(r, t) on a grid of retarded positions.

    Positions are in time units (r/v, seconds), so that the quadrature
    integral of |f|^2 over ``positions`` is dimensionless.
    """

    positions: np.ndarray
    amplitude: np.ndarray

    def __post_init__(self):
        for arr in (self.positions, self.amplitude):
            arr.flags.writeable = False

    def norm(self) -> float:
        """Trapezoidal integral of |f|^2 over the grid."""
        return float(np.trapezoid(np.abs(self.amplitude) ** 2, self.positions))


class Branch:
    """Geometry branch for the adiabatically eliminated filter."""

    DQ_INSIDE = "dq_inside"  # l1 < l2 (DQ between mirror and filter)
    DQ_OUTSIDE = "dq_outside"  # l1 > l2


def _diagonal_terms(c: DerivedCouplings):
    """Complex diagonal entries of the envelope evolution matrix, frame at
    omega1: a11 = xi11 + gi1/2, a22 = i(omega2-omega1) + xi22 + gi2/2."""
    p = c.params
    a11 = c.xi[0, 0] + 0.5 * p.gamma_i1
    a22 = 1j * (p.omega2 - p.omega1) + c.xi[1, 1] + 0.5 * p.gamma_i2
    return a11, a22


def _envelope_roots(a11: complex, a22: complex, x12: complex, x21: complex):
    """Roots mu1 (slow), mu2 (fast) of (z + a11)(z + a22) - x12 x21."""
    b = a11 + a22
    det = a11 * a22 - x12 * x21
    disc = np.sqrt(complex(b * b - 4.0 * det))
    mu_a = 0.5 * (-b + disc)
    mu_b = 0.5 * (-b - disc)
    if mu_a.real >= mu_b.real:
        return mu_a, mu_b
    return mu_b, mu_a


def _envelopes(c: DerivedCouplings, tau: np.ndarray):
    """Rotating-frame amplitudes (alpha_j e^{i omega1 t}) at times tau >= 0."""
    a11, a22 = _diagonal_terms(c)
    x12, x21 = c.xi[0, 1], c.xi[1, 0]
    mu1, mu2 = _envelope_roots(a11, a22, x12, x21)
    scale = abs(mu1) + abs(mu2) + c.params.gamma2
    if abs(mu1 - mu2) < _DEGENERATE_TOL * scale:
        # confluent limit of the two-exponential form
        mu = 0.5 * (mu1 + mu2)
        grow = np.exp(mu * tau)
        e1 = grow * (1.0 - (mu + a11) * tau)
        e2 = -x21 * tau * grow
    else:
        g1t = np.exp(mu1 * tau)
        g2t = np.exp(mu2 * tau)
        e1 = ((mu2 + a11) * g1t - (mu1 + a11) * g2t) / (mu2 - mu1)
        e2 = x21 * (g1t - g2t) / (mu2 - mu1)
    return e1, e2, mu1, mu2


def decay_amplitudes(c: DerivedCouplings, times) -> AmplitudeTrajectory:
    """Closed-form decay from the initially excited DQ, alpha1(0) = 1.

    ``times`` must be sorted and non-negative.  Detuning and intrinsic
    losses present in ``c.params`` are included.
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a non-empty 1-d array")
    if np.any(t < 0.0) or np.any(np.diff(t) < 0.0):
        raise ValueError("times must be sorted and non-negative")
    e1, e2, mu1, mu2 = _envelopes(c, t)
    carrier = np.exp(-1j * c.params.omega1 * t)
    a1 = e1 * carrier
    a2 = e2 * carrier
    return AmplitudeTrajectory(
        times=t,
        alpha1=a1,
        alpha2=a2,
        p1=np.abs(a1) ** 2,
        p2=np.abs(a2) ** 2,
        mu1=complex(mu1),
        mu2=complex(mu2),
    )


def survival_probability(c: DerivedCouplings, t) -> np.ndarray:
    """P1(t) = |alpha1(t)|^2 for scalar or array t."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    e1, _, _, _ = _envelopes(c, t_arr)
    p = np.abs(e1) ** 2
    return float(p[0]) if np.isscalar(t) or np.ndim(t) == 0 else p


def adiabatic_complex_frequency(
    c: DerivedCouplings, branch: str, cos_tol: float = 0.05
) -> complex:
    """Renormalized DQ frequency after adiabatic elimination of the filter.

    DQ_INSIDE (l1 <= l2) returns the exactly real value
        omega_ref - gamma1 cos(th1) sin(th2 - th1) / cos(th2);
    DQ_OUTSIDE (l1 >= l2) returns
        omega_ref - gamma1 e^{i d} sin(d),  d = th1 - th2.
    The decay rate is -2 Im of the result.  Raises
    :class:`ResonantFilterError` on the inside branch when |cos(th2)| falls
    below ``cos_tol`` (filter near an odd multiple of lambda/4, resonant
    effective cavity).
    """
    p = c.params
    th1, th2 = c.thetas
    g1 = p.gamma1
    if branch == Branch.DQ_INSIDE:
        if p.l1 > p.l2:
            raise ValueError("DQ_INSIDE branch requires l1 <= l2")
        c2 = math.cos(th2)
        if abs(c2) < cos_tol:
            raise ResonantFilterError(
                f"filter near a quarter-wave point (|cos th2| = {abs(c2):.3g} "
                f"< {cos_tol}): effective cavity resonant with the qubit"
            )
        return complex(c.omega_ref - g1 * math.cos(th1) * math.sin(th2 - th1) / c2)
    if branch == Branch.DQ_OUTSIDE:
        if p.l1 < p.l2:
            raise ValueError("DQ_OUTSIDE branch requires l1 >= l2")
        d = th1 - th2
        return c.omega_ref - g1 * np.exp(1j * d) * math.sin(d)
    raise ValueError(f"unknown branch {branch!r}")


def decay_rate_with_loss(p: SystemParameters) -> float:
    """Adiabatic DQ decay rate with detuning and intrinsic losses.

    At the optimal geometry (l1 = 0, l2 a multiple of lambda/2) this is

        gamma_i1 + 2 gamma1 [1 - gamma2 G / (G^2 + dw^2)],
        G = gamma2 + gamma_i2/2,  dw = omega2 - omega1;

    elsewhere the general form with the xi couplings is used.  Always >= 0.
    """
    dw = p.omega2 - p.omega1
    c = derive_couplings(p)
    th1, th2 = c.thetas
    optimal = abs(th1) < 1e-9 and abs(math.remainder(th2, math.pi)) < 1e-9
    if optimal:
        big_g = p.gamma2 + 0.5 * p.gamma_i2
        rate = p.gamma_i1 + 2.0 * p.gamma1 * (1.0 - p.gamma2 * big_g / (big_g**2 + dw**2))
        return max(0.0, rate)
    denom = c.xi[1, 1] + 0.5 * p.gamma_i2 + 1j * dw
    if abs(denom) < 1e-9 * max(p.gamma2, p.gamma1, 1.0):
        raise ResonantFilterError(
            "filter response vanishes (resonant quarter-wave geometry with no "
            "loss or detuning): adiabatic elimination invalid"
        )
    rate = p.gamma_i1 + 2.0 * c.xi[0, 0].real - 2.0 * (c.xi[0, 1] * c.xi[1, 0] / denom).real
    return max(0.0, rate)


@dataclass(frozen=True)
class SubradiantSplit:
    """Weights of the initially excited DQ on the super/subradiant states
    and the superradiant decay rate."""

    sup_weight: float
    sub_weight: float
    sup_rate: float


def subradiant_decomposition(c: DerivedCouplings) -> SubradiantSplit:
    """Decompose the excited DQ over the collective states for l1 = l2 = 0.

    The squared overlaps are gamma1/(gamma1+gamma2) on the superradiant and
    gamma2/(gamma1+gamma2) on the subradiant state; the superradiant state
    decays at 2(gamma1+gamma2).
    """
    th1, th2 = c.thetas
    if abs(th1) > 1e-9 or abs(th2) > 1e-9:
        raise NonColocatedError(
            "subradiant decomposition requires both qubits at the waveguide end "
            f"(l1 = l2 = 0); got phases ({th1:.3g}, {th2:.3g})"
        )
    p = c.params
    total = p.gamma1 + p.gamma2
    if total == 0.0:
        raise ValueError("gamma1 + gamma2 must be positive")
    return SubradiantSplit(
        sup_weight=p.gamma1 / total,
        sub_weight=p.gamma2 / total,
        sup_rate=2.0 * total,
    )


def photon_wavepacket(
    c: DerivedCouplings, traj: AmplitudeTrajectory, t: float, step: float = None
) -> PhotonWavepacket:
    """Emitted-photon wavepacket at time t (within the trajectory range).

    f(r, t) = -i [s1 alpha1(t - r) + s2 alpha2(t - r)] on 0 <= r <= t and
    zero elsewhere; amplitudes are re-evaluated from the closed form of the
    couplings ``c``.  The default grid step min(1/(50 gamma2), t/1000)
    resolves the fast filter transient.
    """
    if t < 0.0 or t > traj.times[-1] * (1.0 + 1e-12):
        raise ValueError("t must lie within the trajectory time range")
    if t == 0.0:
        zero = np.zeros(1)
        return PhotonWavepacket(positions=zero, amplitude=zero.astype(complex))
    if step is None:
        g2 = c.params.gamma2
        step = min(1.0 / (50.0 * g2) if g2 > 0.0 else math.inf, t / 1000.0)
    n = max(2, int(math.ceil(t / step)) + 1)
    r = np.linspace(0.0, t, n)
    e1, e2, _, _ = _envelopes(c, t - r)
    carrier = np.exp(-1j * c.params.omega1 * (t - r))
    s1, s2 = c.s_coeff
    f = -1j * (s1 * e1 + s2 * e2) * carrier
    return PhotonWavepacket(positions=r, amplitude=f)


def effective_cavity_frequencies(l2: float, n_max: int, velocity: float) -> np.ndarray:
    """Eigenfrequencies (n + 1/2) pi v / l2 of the mirror-filter cavity."""
    if l2 <= 0.0:
        raise ValueError("l2 must be positive")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    n = np.arange(n_max)
    return (0.5 + n) * math.pi * velocity / l2
