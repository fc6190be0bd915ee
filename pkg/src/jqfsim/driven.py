"""Driven two-qubit dynamics under a classical control field.

Two equivalent integrations are provided:

* :func:`evolve_master` -- reference 4x4 density-matrix master equation with
  the collective dissipator built from the standing-wave weights, the
  photon-mediated exchange Hamiltonian, local intrinsic dissipators and the
  coherent drive term.
* :func:`evolve_moments` -- the closed system of 9 operator expectations
  obtained from the adjoint equation with the noise operators replaced by
  their coherent-state expectation values.

Both integrate with fixed-step RK4 in a frame rotating at the drive carrier.
Within each piecewise-constant drive segment the generator is time
independent, so n RK4 steps are applied as the n-th power of the one-step
matrix (identical to sequential stepping in exact arithmetic).  Signed
moments are stored in the integration frame; populations and purity are
frame independent.

The drive convention follows the equation of motion of the DQ lowering
operator: d<s1>/dt = ... + i(1 - 2<n1>) <N1(t)>, with <Nj(t)> =
sqrt(2 gamma_j) cos(th_j) E_in(t).  Observables depend on |E_in| only.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import CouplingNodeError, IntegrationError
from .model import DerivedCouplings, SystemParameters, derive_couplings

# two-qubit operators, basis |q1 q2> with index 2*e1 + e2 (0 = ground)
_I2 = np.eye(2, dtype=complex)
_SM = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA1 = np.kron(_SM, _I2)
SIGMA2 = np.kron(_I2, _SM)
N1_OP = SIGMA1.conj().T @ SIGMA1
N2_OP = SIGMA2.conj().T @ SIGMA2

#: operators of the 9 tracked expectation values, in canonical order
MOMENT_OPS = (
    SIGMA1,
    SIGMA2,
    N1_OP,
    N2_OP,
    SIGMA2.conj().T @ SIGMA1,
    SIGMA1 @ SIGMA2,
    N1_OP @ SIGMA2,
    SIGMA1 @ N2_OP,
    N1_OP @ N2_OP,
)

for _op in (SIGMA1, SIGMA2, N1_OP, N2_OP) + MOMENT_OPS:
    _op.flags.writeable = False

MOMENT_LABELS = (
    "sigma1",
    "sigma2",
    "n1",
    "n2",
    "sigma2d_sigma1",
    "sigma1_sigma2",
    "n1_sigma2",
    "sigma1_n2",
    "n1_n2",
)


@dataclass(frozen=True)
class Segment:
    """One piecewise-constant stretch of the drive: amplitude and carrier."""

    t_start: float
    t_end: Optional[float]  # None = open ended
    amplitude: complex
    carrier: float

    def closed_end(self, horizon: float) -> float:
        return horizon if self.t_end is None else min(self.t_end, horizon)


@dataclass(frozen=True)
class DriveEnvelope:
    """Ordered, non-overlapping drive segments; gaps mean drive off.

    |amplitude|^2 is the incoming photon rate (photons/s)."""

    segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        prev_end = -math.inf
        for seg in self.segments:
            if seg.t_end is not None and seg.t_end <= seg.t_start:
                raise ValueError(f"segment has non-positive length: {seg}")
            if seg.t_start < prev_end:
                raise ValueError("drive segments overlap or are out of order")
            prev_end = math.inf if seg.t_end is None else seg.t_end

    @classmethod
    def off(cls) -> "DriveEnvelope":
        return cls(())

    @classmethod
    def continuous(cls, amplitude: complex, carrier: float, t_start: float = 0.0):
        return cls((Segment(t_start, None, complex(amplitude), float(carrier)),))

    @classmethod
    def square_pulse(cls, amplitude: complex, carrier: float, duration: float,
                     t_start: float = 0.0):
        return cls((Segment(t_start, t_start + duration, complex(amplitude),
                            float(carrier)),))

    @classmethod
    def pulse_train(cls, amplitude: complex, carrier: float, duration: float,
                    period: float, n_pulses: int):
        if duration > period:
            raise ValueError("pulse duration exceeds the train period")
        segs = tuple(
            Segment(k * period, k * period + duration, complex(amplitude), float(carrier))
            for k in range(n_pulses)
        )
        return cls(segs)

    def carriers(self) -> set:
        return {s.carrier for s in self.segments if s.amplitude != 0}

    def lookup(self, t: float) -> Optional[Segment]:
        for seg in self.segments:
            end = math.inf if seg.t_end is None else seg.t_end
            if seg.t_start <= t < end:
                return seg
        return None


@dataclass(frozen=True)
class StateTrajectory:
    """Sampled driven trajectory in the integration frame.

    Exactly one of ``rho`` (n,4,4) and ``moments`` (n,9) is set, tagged by
    ``representation`` ("density-matrix" or "moments").
    """

    times: np.ndarray
    representation: str
    p1: np.ndarray
    p2: np.ndarray
    purity: np.ndarray
    frame: float
    rho: Optional[np.ndarray] = None
    moments: Optional[np.ndarray] = None

    def __post_init__(self):
        for arr in (self.times, self.p1, self.p2, self.purity, self.rho, self.moments):
            if arr is not None:
                arr.flags.writeable = False


# ---------------------------------------------------------------------------
# calibration helpers

def rabi_frequency(c: DerivedCouplings, amplitude: float) -> float:
    """Free-DQ Rabi frequency 2|eta||E_d| (reduces to sqrt(8 gamma1)|E_d|
    at l1 = 0)."""
    return 2.0 * abs(c.eta) * abs(amplitude)


def amplitude_for_rabi(c: DerivedCouplings, rabi: float) -> float:
    """Drive amplitude giving the requested free-DQ Rabi frequency."""
    if abs(c.eta) < 1e-12 * math.sqrt(2.0 * c.params.gamma1 + 1.0):
        raise CouplingNodeError("zero drive coupling: DQ at a standing-wave node")
    return rabi / (2.0 * abs(c.eta))


def pi_pulse_amplitude(c: DerivedCouplings, duration: float) -> float:
    """Amplitude of a square pi pulse of the given duration (Omega T = pi)."""
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    return amplitude_for_rabi(c, math.pi / duration)


# ---------------------------------------------------------------------------
# generators

def _hamiltonian(c: DerivedCouplings, delta1: float, delta2: float, amp: complex):
    """Frame Hamiltonian: detunings + exchange (incl. Lamb shifts) + drive."""
    J = c.J
    H = (
        (delta1 + J[0, 0]) * N1_OP
        + (delta2 + J[1, 1]) * N2_OP
        + J[0, 1] * (SIGMA1.conj().T @ SIGMA2)
        + J[1, 0] * (SIGMA2.conj().T @ SIGMA1)
    )
    if amp != 0:
        S = c.s_coeff[0] * SIGMA1 + c.s_coeff[1] * SIGMA2
        H = H - (np.conj(amp) * S + amp * S.conj().T)
    return H


def _dissipator_super(cop: np.ndarray) -> np.ndarray:
    """Superoperator of D[c] on row-major vec(rho)."""
    I4 = np.eye(4, dtype=complex)
    cd = cop.conj().T
    cdc = cd @ cop
    return (
        np.kron(cop, cd.T)
        - 0.5 * np.kron(cdc, I4)
        - 0.5 * np.kron(I4, cdc.T)
    )


def _liouvillian(c: DerivedCouplings, delta1: float, delta2: float,
                 amp: complex) -> np.ndarray:
    """16x16 generator of d vec(rho)/dt in the rotating frame."""
    p = c.params
    H = _hamiltonian(c, delta1, delta2, amp)
    I4 = np.eye(4, dtype=complex)
    L = -1j * (np.kron(H, I4) - np.kron(I4, H.T))
    S = c.s_coeff[0] * SIGMA1 + c.s_coeff[1] * SIGMA2
    L += _dissipator_super(S)
    if p.gamma_i1 > 0.0:
        L += p.gamma_i1 * _dissipator_super(SIGMA1)
    if p.gamma_i2 > 0.0:
        L += p.gamma_i2 * _dissipator_super(SIGMA2)
    return L


def _moment_rhs(m: np.ndarray, xi: np.ndarray, delta1: float, delta2: float,
                gi1: float, gi2: float, n1_amp: complex, n2_amp: complex) -> np.ndarray:
    """Right-hand side of the closed 9-moment system.

    n1_amp, n2_amp are the coherent noise expectations <Nj(t)> =
    s_coeff[j] * E_in(t).  The system couples the moments to their complex
    conjugates, so it is linear only over the reals.
    """
    m1, m2, m3, m4, m5, m6, m7, m8, m9 = m
    x11, x12, x21, x22 = xi[0, 0], xi[0, 1], xi[1, 0], xi[1, 1]
    N1, N2 = n1_amp, n2_amp
    co = np.conj
    d = np.empty(9, dtype=complex)
    d[0] = (-(1j * delta1 + x11 + gi1 / 2) * m1 - x12 * m2 + 2 * x12 * m7

            + 1j * N1 * (1 - 2 * m3))
    d[1] = (-(1j * delta2 + x22 + gi2 / 2) * m2 - x21 * m1 + 2 * x21 * m8
            + 1j * N2 * (1 - 2 * m4))
    d[2] = (-(2 * x11.real + gi1) * m3 - x12 * co(m5) - co(x12) * m5
            + 1j * N1 * co(m1) - 1j * co(N1) * m1)
    d[3] = (-(2 * x22.real + gi2) * m4 - x21 * m5 - co(x21) * co(m5)
            + 1j * N2 * co(m2) - 1j * co(N2) * m2)
    d[4] = ((1j * (delta2 - delta1) - x11 - co(x22) - (gi1 + gi2) / 2) * m5
            - x12 * m4 - co(x21) * m3 + 2 * (x12 + co(x21)) * m9
            + 1j * N1 * co(m2) - 2j * N1 * co(m7) - 1j * co(N2) * m1 + 2j * co(N2) * m8)
    d[5] = ((-1j * (delta1 + delta2) - x11 - x22 - (gi1 + gi2) / 2) * m6
            + 1j * N1 * m2 - 2j * N1 * m7 + 1j * N2 * m1 - 2j * N2 * m8)
    d[6] = ((-1j * delta2 - 2 * x11.real - x22 - gi1 - gi2 / 2) * m7 - co(x12) * m8
            + 1j * N1 * co(m5) - 1j * co(N1) * m6 + 1j * N2 * m3 - 2j * N2 * m9)
    d[7] = ((-1j * delta1 - x11 - 2 * x22.real - gi1 / 2 - gi2) * m8 - co(x21) * m7
            + 1j * N1 * m4 - 2j * N1 * m9 + 1j * N2 * m5 - 1j * co(N2) * m6)
    d[8] = (-(2 * x11.real + 2 * x22.real + gi1 + gi2) * m9
            + 1j * N1 * co(m8) - 1j * co(N1) * m8 + 1j * N2 * co(m7) - 1j * co(N2) * m7)
    return d


def _moment_affine_real(c: DerivedCouplings, delta1: float, delta2: float,
                        amp: complex) -> np.ndarray:
    """Real 19x19 augmented generator of the moment system at fixed amplitude.

    The complex system dm/dt = A m + B conj(m) + const is probed column by
    column and embedded as d(Re m, Im m, 1)/dt = T (Re m, Im m, 1)."""
    p = c.params
    args = (c.xi, delta1, delta2, p.gamma_i1, p.gamma_i2,
            c.s_coeff[0] * amp, c.s_coeff[1] * amp)
    zero = np.zeros(9, dtype=complex)
    const = _moment_rhs(zero, *args)
    A = np.empty((9, 9), dtype=complex)
    B = np.empty((9, 9), dtype=complex)
    for j in range(9):
        e = np.zeros(9, dtype=complex)
        e[j] = 1.0
        r_re = _moment_rhs(e, *args) - const
        e[j] = 1.0j
        r_im = _moment_rhs(e, *args) - const
        A[:, j] = 0.5 * (r_re - 1j * r_im)
        B[:, j] = 0.5 * (r_re + 1j * r_im)
    T = np.zeros((19, 19))
    T[0:9, 0:9] = A.real + B.real
    T[0:9, 9:18] = -A.imag + B.imag
    T[9:18, 0:9] = A.imag + B.imag
    T[9:18, 9:18] = A.real - B.real
    T[0:9, 18] = const.real
    T[9:18, 18] = const.imag
    return T


# ---------------------------------------------------------------------------
# fixed-step RK4 machinery

def _rk4_step_matrix(gen: np.ndarray, h: float) -> np.ndarray:
    """One-step map of fixed-step RK4 for y' = gen @ y (4th-order Taylor)."""
    n = gen.shape[0]
    M = np.eye(n, dtype=gen.dtype)
    term = np.eye(n, dtype=gen.dtype)
    for k in (1, 2, 3, 4):
        term = term @ gen * (h / k)
        M = M + term
    return M


def _matrix_power(M: np.ndarray, n: int) -> np.ndarray:
    out = np.eye(M.shape[0], dtype=M.dtype)
    base = M
    while n:
        if n & 1:
            out = out @ base
        base = base @ base
        n >>= 1
    return out


def _step_limit(c: DerivedCouplings, amp_abs: float, delta1: float, delta2: float,
                modulation: float) -> float:
    """Accuracy-driven step bound 1/(100 * stiffest rate)."""
    p = c.params
    rates = (
        p.gamma1, p.gamma2, p.gamma_i1, p.gamma_i2,
        abs(delta1), abs(delta2), abs(modulation),
        2.0 * abs(c.s_coeff[0]) * amp_abs,  # DQ Rabi frequency
        2.0 * abs(c.s_coeff[1]) * amp_abs,  # JQF Rabi frequency
    )
    fastest = max(rates)
    return math.inf if fastest == 0.0 else 1.0 / (100.0 * fastest)


@dataclass(frozen=True)
class _Piece:
    t0: float
    t1: float
    amplitude: complex
    carrier: float
    n_steps: int
    h: float


def _plan_pieces(drive: DriveEnvelope, times: np.ndarray, frame: float,
                 c: DerivedCouplings, max_step: Optional[float]):
    """Split [0, t_end] at drive edges and sample times; fix steps per piece."""
    t_end = float(times[-1])
    bounds = {0.0, t_end}
    bounds.update(float(t) for t in times)
    for seg in drive.segments:
        for edge in (seg.t_start, seg.t_end):
            if edge is not None and 0.0 < edge < t_end:
                bounds.add(float(edge))
    bounds = np.array(sorted(bounds))
    pieces = []
    for t0, t1 in zip(bounds[:-1], bounds[1:]):
        seg = drive.lookup(0.5 * (t0 + t1))
        amp = seg.amplitude if seg is not None else 0.0
        carrier = seg.carrier if seg is not None else frame
        modulation = carrier - frame if amp != 0 else 0.0
        if max_step is not None:
            h_max = max_step  # explicit override of the automatic rule
        else:
            h_max = _step_limit(c, abs(amp), c.params.omega1 - frame,
                                c.params.omega2 - frame, modulation)
            h_max = min(h_max, (t1 - t0) / 20.0)
        n = max(1, int(math.ceil((t1 - t0) / h_max - 1e-12)))
        pieces.append(_Piece(t0, t1, complex(amp), carrier, n, (t1 - t0) / n))
    return bounds, pieces


def _resolve_frame(drive: DriveEnvelope, c: DerivedCouplings,
                   frame: Optional[float]) -> float:
    if frame is not None:
        return float(frame)
    carriers = drive.carriers()
    if not carriers:
        return c.omega_ref
    if len(carriers) > 1:
        raise ValueError(
            "drive has several carriers; pass frame= explicitly to evolve in "
            "a single rotating frame"
        )
    return carriers.pop()


def _validate_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a non-empty 1-d array")
    if t[0] < 0.0 or np.any(np.diff(t) <= 0.0):
        raise ValueError("times must be strictly increasing and non-negative")
    return t


def _check_consistent(p: SystemParameters, c: DerivedCouplings):
    if c.params != p:
        raise ValueError("couplings were derived from different parameters")


def _march(pieces, sample_mask, y0, frame, gen_for, rhs_for, prop_fix=None):
    """Generic march: propagator powers on resonant pieces, RK4 loop else.

    Generators and whole-piece propagators are cached on (amplitude, steps,
    step size), so repeated identical pieces (pulse trains, uniform sample
    grids) cost one matrix-vector product each.  ``prop_fix`` restores exact
    structural invariants of the discrete map on each cached propagator.
    """
    y = np.array(y0)
    out = []
    if sample_mask[0]:
        out.append(y.copy())
    gen_cache = {}
    prop_cache = {}
    for piece, want in zip(pieces, sample_mask[1:]):
        resonant = piece.amplitude == 0 or piece.carrier == frame
        if resonant:
            akey = (piece.amplitude.real, piece.amplitude.imag)
            pkey = (akey, piece.n_steps, piece.h)
            prop = prop_cache.get(pkey)
            if prop is None:
                gen = gen_cache.get(akey)
                if gen is None:
                    gen = gen_for(piece, piece.amplitude)
                    gen_cache[akey] = gen
                prop = _matrix_power(_rk4_step_matrix(gen, piece.h), piece.n_steps)
                if prop_fix is not None:
                    prop = prop_fix(prop)
                prop_cache[pkey] = prop
            y = prop @ y
        else:
            rhs = rhs_for(piece)
            h = piece.h
            t = piece.t0
            for _ in range(piece.n_steps):
                k1 = rhs(t, y)
                k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
                k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
                k4 = rhs(t + h, y + h * k3)
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                t += h
        if not np.all(np.isfinite(y.view(float))):
            raise IntegrationError(
                f"non-finite state after piece ending at t = {piece.t1:.3e} s "
                f"(h = {piece.h:.3e} s)"
            )
        if want:
            out.append(y.copy())
    return out


def _purity_from(p1: np.ndarray, coh1: np.ndarray) -> np.ndarray:
    return p1**2 + (1.0 - p1) ** 2 + 2.0 * np.abs(coh1) ** 2


def evolve_master(
    p: SystemParameters,
    c: DerivedCouplings,
    drive: DriveEnvelope,
    times,
    rho0: Optional[np.ndarray] = None,
    frame: Optional[float] = None,
    max_step: Optional[float] = None,
) -> StateTrajectory:
    """Integrate the density-matrix master equation on the requested times.

    Both qubits start in the ground state unless ``rho0`` is given.  The
    integration frame defaults to the drive carrier.  ``max_step`` replaces
    the automatic step rule (used by convergence tests).  Raises
    :class:`IntegrationError` if a sampled state violates trace (1e-10),
    hermiticity or positivity (eigenvalues >= -1e-9).
    """
    _check_consistent(p, c)
    t = _validate_times(times)
    frame_omega = _resolve_frame(drive, c, frame)
    bounds, pieces = _plan_pieces(drive, t, frame_omega, c, max_step)
    sample_mask = np.isin(bounds, t)

    if rho0 is None:
        rho_init = np.zeros((4, 4), dtype=complex)
        rho_init[0, 0] = 1.0
    else:
        rho_init = np.asarray(rho0, dtype=complex)
        if rho_init.shape != (4, 4):
            raise ValueError("rho0 must be a 4x4 matrix")
    d1 = p.omega1 - frame_omega
    d2 = p.omega2 - frame_omega

    # drive-linear parts: L(E) = L0 + E*LP + conj(E)*LM
    S = c.s_coeff[0] * SIGMA1 + c.s_coeff[1] * SIGMA2
    I4 = np.eye(4, dtype=complex)
    Sd = S.conj().T
    LP = 1j * (np.kron(Sd, I4) - np.kron(I4, Sd.T))  # coefficient of E
    LM = 1j * (np.kron(S, I4) - np.kron(I4, S.T))  # coefficient of conj(E)
    L0 = _liouvillian(c, d1, d2, 0.0)

    def gen_for(piece, amp):
        if amp == 0:
            return L0
        return L0 + amp * LP + np.conj(amp) * LM

    def rhs_for(piece):
        dmod = piece.carrier - frame_omega

        def rhs(tt, y):
            amp = piece.amplitude * cmath.exp(-1j * dmod * tt)
            return (L0 + amp * LP + np.conj(amp) * LM) @ y

        return rhs

    trace_row = np.eye(4, dtype=complex).reshape(16)

    def fix_trace(prop):
        # exact RK4 preserves the trace identically; cancel the powering
        # roundoff by projecting the propagator back onto that invariant
        defect = trace_row @ prop - trace_row
        return prop - np.outer(trace_row, defect) / 4.0

    samples = _march(pieces, sample_mask, rho_init.reshape(16), frame_omega,
                     gen_for, rhs_for, prop_fix=fix_trace)
    rho = np.array([s.reshape(4, 4) for s in samples])
    rho = 0.5 * (rho + np.conj(np.swapaxes(rho, 1, 2)))  # roundoff hygiene

    traces = np.einsum("kii->k", rho)
    if np.any(np.abs(traces - 1.0) > 1e-10):
        raise IntegrationError(
            f"trace deviates from 1 by up to {np.max(np.abs(traces - 1.0)):.2e} "
            "(reduce the step size)"
        )
    eigmin = min(np.linalg.eigvalsh(r)[0] for r in rho)
    if eigmin < -1e-9:
        raise IntegrationError(
            f"density matrix lost positivity (min eigenvalue {eigmin:.2e}); "
            "the integration step is too large"
        )

    p1 = np.einsum("kij,ji->k", rho, N1_OP).real
    p2 = np.einsum("kij,ji->k", rho, N2_OP).real
    coh1 = np.einsum("kij,ji->k", rho, SIGMA1)
    return StateTrajectory(
        times=t,
        representation="density-matrix",
        rho=rho,
        p1=p1,
        p2=p2,
        purity=_purity_from(p1, coh1),
        frame=frame_omega,
    )


def evolve_moments(
    p: SystemParameters,
    c: DerivedCouplings,
    drive: DriveEnvelope,
    times,
    frame: Optional[float] = None,
    max_step: Optional[float] = None,
) -> StateTrajectory:
    """Integrate the closed 9-moment system from the two-qubit ground state.

    Shares the segmenting and step rule of :func:`evolve_master`, so the two
    integrations agree to roundoff on all nine moments.
    """
    _check_consistent(p, c)
    t = _validate_times(times)
    frame_omega = _resolve_frame(drive, c, frame)
    bounds, pieces = _plan_pieces(drive, t, frame_omega, c, max_step)
    sample_mask = np.isin(bounds, t)
    d1 = p.omega1 - frame_omega
    d2 = p.omega2 - frame_omega

    def gen_for(piece, amp):
        return _moment_affine_real(c, d1, d2, amp)

    def rhs_for(piece):
        dmod = piece.carrier - frame_omega
        args_static = (c.xi, d1, d2, p.gamma_i1, p.gamma_i2)

        def rhs(tt, y):
            amp = piece.amplitude * cmath.exp(-1j * dmod * tt)
            m = y[0:9] + 1j * y[9:18]
            dm = _moment_rhs(m, *args_static, c.s_coeff[0] * amp, c.s_coeff[1] * amp)
            out = np.empty(19)
            out[0:9] = dm.real
            out[9:18] = dm.imag
            out[18] = 0.0
            return out

        return rhs

    y0 = np.zeros(19)
    y0[18] = 1.0
    samples = _march(pieces, sample_mask, y0, frame_omega, gen_for, rhs_for)
    m = np.array([s[0:9] + 1j * s[9:18] for s in samples])

    tol = 1e-9
    pops = np.concatenate([m[:, 2], m[:, 3], m[:, 8]])
    if np.any(np.abs(pops.imag) > tol) or np.any(pops.real < -tol) or np.any(
            m[:, 2:4].real > 1.0 + tol):
        raise IntegrationError(
            "moment populations left [0, 1] beyond tolerance; "
            "the integration step is too large"
        )
    if np.any(m[:, 8].real > np.minimum(m[:, 2].real, m[:, 3].real) + tol):
        raise IntegrationError("double-excitation moment exceeds single-qubit "
                               "populations beyond tolerance")

    p1 = m[:, 2].real
    p2 = m[:, 3].real
    return StateTrajectory(
        times=t,
        representation="moments",
        moments=m,
        p1=p1,
        p2=p2,
        purity=_purity_from(p1, m[:, 0]),
        frame=frame_omega,
    )


def moments_from_density(traj: StateTrajectory) -> np.ndarray:
    """Extract the 9 canonical moments from a density-matrix trajectory."""
    if traj.representation != "density-matrix":
        raise ValueError("trajectory does not carry density matrices")
    ops = np.array(MOMENT_OPS)
    return np.einsum("kij,mji->km", traj.rho, ops)


def purity(traj: StateTrajectory) -> np.ndarray:
    """Purity of the reduced DQ state, recomputed from the stored states."""
    if traj.representation == "density-matrix":
        p1 = np.einsum("kij,ji->k", traj.rho, N1_OP).real
        coh1 = np.einsum("kij,ji->k", traj.rho, SIGMA1)
    else:
        p1 = traj.moments[:, 2].real
        coh1 = traj.moments[:, 0]
    return _purity_from(p1, coh1)


def free_rabi(gamma1: float, amplitude: float, times) -> np.ndarray:
    """Damped Rabi oscillation of a lone resonantly driven DQ at l1 = 0.

    P(t) = Om^2/(2(Om^2+2 g1^2)) [1 - e^{-3 g1 t/2}(cos Om' t
           + (3 g1 / 2 Om') sin Om' t)],  Om = sqrt(8 g1)|E|,
    with Om' = sqrt(Om^2 - (g1/2)^2) continued analytically (hyperbolic)
    in the overdamped regime Om < g1/2.
    """
    if gamma1 <= 0.0:
        raise ValueError("gamma1 must be positive")
    t = np.asarray(times, dtype=float)
    om = math.sqrt(8.0 * gamma1) * abs(amplitude)
    om_t = cmath.sqrt(complex(om * om - 0.25 * gamma1 * gamma1))
    pref = om * om / (2.0 * (om * om + 2.0 * gamma1 * gamma1))
    z = om_t * t
    if abs(om_t) < 1e-300:
        sin_term = t.astype(complex)
    else:
        sin_term = np.sin(z) / om_t
    osc = np.cos(z) + 1.5 * gamma1 * sin_term
    return pref * (1.0 - np.exp(-1.5 * gamma1 * t) * osc).real


def scenario_pi_pulse(p: SystemParameters, duration: float, times,
                      rho0: Optional[np.ndarray] = None) -> StateTrajectory:
    """Resonant square pi pulse on [0, duration], then free evolution."""
    c = derive_couplings(p)
    amp = pi_pulse_amplitude(c, duration)
    drive = DriveEnvelope.square_pulse(amp, c.omega_ref, duration)
    return evolve_master(p, c, drive, times, rho0=rho0)


def scenario_pulse_train(p: SystemParameters, duration: float, period: float,
                         n_pulses: int, times) -> StateTrajectory:
    """Train of resonant square pi pulses starting at multiples of period."""
    c = derive_couplings(p)
    amp = pi_pulse_amplitude(c, duration)
    drive = DriveEnvelope.pulse_train(amp, c.omega_ref, duration, period, n_pulses)
    return evolve_master(p, c, drive, times)
