import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from jqfsim import (
    Branch,
    NonColocatedError,
    ResonantFilterError,
    adiabatic_complex_frequency,
    decay_amplitudes,
    decay_rate_with_loss,
    default_parameters,
    derive_couplings,
    effective_cavity_frequencies,
    photon_wavepacket,
    subradiant_decomposition,
    survival_probability,
)

TWO_PI = 2.0 * math.pi


def _ode_oracle(c, times):
    """Direct numeric integration of the two envelope amplitude equations."""
    p = c.params
    a = np.array(
        [[c.xi[0, 0] + 0.5 * p.gamma_i1, c.xi[0, 1]],
         [c.xi[1, 0], 1j * (p.omega2 - p.omega1) + c.xi[1, 1] + 0.5 * p.gamma_i2]]
    )

    def rhs(t, y):
        return -a @ y

    sol = solve_ivp(rhs, (0.0, times[-1]), np.array([1.0 + 0j, 0j]),
                    t_eval=times, rtol=1e-12, atol=1e-14)
    return sol.y.T


def test_two_exponential_form_at_defaults():
    p = default_parameters()
    c = derive_couplings(p)
    g1, g2 = p.gamma1, p.gamma2
    t = np.linspace(0.0, 50e-9, 301)
    traj = decay_amplitudes(c, t)
    # roots: one dark, one at the combined rate
    assert abs(traj.mu1) < 1e-6 * g2
    assert traj.mu2.real == pytest.approx(-(g1 + g2), rel=1e-9)
    # printed reduced form of the surviving amplitude
    expected = (g2 + g1 * np.exp(-(g1 + g2) * t)) / (g1 + g2)
    assert np.max(np.abs(np.abs(traj.alpha1) - expected)) < 1e-12
    # carrier phase
    assert np.allclose(traj.alpha1 * np.exp(1j * p.omega1 * t), np.abs(traj.alpha1),
                       atol=1e-9)


def test_stationary_limit_and_monotonicity_in_gamma2():
    p = default_parameters()
    c = derive_couplings(p)
    t_inf = 60.0 / (p.gamma1 + p.gamma2)
    expected = (p.gamma2 / (p.gamma1 + p.gamma2)) ** 2
    assert survival_probability(c, t_inf) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.99996, abs=1e-5)
    previous = 0.0
    for g2_hz in (10e6, 30e6, 100e6, 300e6, 1e9):
        pp = p.replace(gamma2=TWO_PI * g2_hz)
        value = survival_probability(derive_couplings(pp),
                                     60.0 / (pp.gamma1 + pp.gamma2))
        assert value > previous
        previous = value


def test_no_filter_gives_plain_exponential():
    p = default_parameters(gamma2=0.0, l1=1.3e-3)
    c = derive_couplings(p)
    t = np.linspace(0.0, 40e-6, 200)
    traj = decay_amplitudes(c, t)
    theta1 = p.omega1 * p.l1 / p.velocity
    assert np.allclose(traj.p1, np.exp(-2 * p.gamma1 * math.cos(theta1) ** 2 * t),
                       atol=1e-12)
    assert np.all(traj.p2 == 0.0)


@pytest.mark.parametrize("l2_frac,detuned,lossy", [
    (0.5, False, False),
    (0.25, False, False),
    (0.37, False, False),
    (0.5, True, True),
])
def test_closed_form_against_ode_oracle(l2_frac, detuned, lossy):
    p = default_parameters()
    p = p.replace(l2=l2_frac * p.wavelength)
    if detuned:
        p = p.replace(omega2=p.omega1 + TWO_PI * 40e6)
    if lossy:
        p = p.replace(gamma_i1=0.3 * p.gamma1, gamma_i2=1e-3 * p.gamma2)
    c = derive_couplings(p)
    t = np.linspace(0.0, 10.0 / p.gamma2, 501)
    traj = decay_amplitudes(c, t)
    ref = _ode_oracle(c, t)
    carrier = np.exp(-1j * p.omega1 * t)
    assert np.max(np.abs(traj.alpha1 - ref[:, 0] * carrier)) < 1e-9
    assert np.max(np.abs(traj.alpha2 - ref[:, 1] * carrier)) < 1e-9


def test_confluent_root_limit_against_ode_oracle():
    # gamma2 = gamma1/4 at the quarter-wave point makes the two roots exactly
    # degenerate, forcing the confluent branch
    p = default_parameters()
    p = p.replace(gamma2=p.gamma1 / 4.0, l2=p.wavelength / 4.0)
    c = derive_couplings(p)
    mu_scale = abs(c.xi[0, 0] + c.xi[1, 1])
    t = np.linspace(0.0, 10.0 / p.gamma1, 401)
    traj = decay_amplitudes(c, t)
    assert abs(traj.mu1 - traj.mu2) < 1e-7 * mu_scale
    ref = _ode_oracle(c, t)
    carrier = np.exp(-1j * p.omega1 * t)
    assert np.max(np.abs(traj.alpha1 - ref[:, 0] * carrier)) < 1e-9
    assert np.max(np.abs(traj.alpha2 - ref[:, 1] * carrier)) < 1e-9
    # continuity against a slightly split pair of roots
    p_near = p.replace(gamma2=p.gamma2 * (1.0 + 1e-6))
    near = decay_amplitudes(derive_couplings(p_near), t)
    assert np.max(np.abs(near.alpha1 - traj.alpha1)) < 1e-5


def test_root_identities_on_random_draws():
    rng = np.random.default_rng(11)
    p0 = default_parameters()
    lam = p0.wavelength
    for _ in range(300):
        p = p0.replace(
            l1=float(rng.uniform(0, lam)),
            l2=float(rng.uniform(0, lam)),
            gamma1=float(10 ** rng.uniform(3, 7)),
            gamma2=float(10 ** rng.uniform(6, 10)),
        )
        c = derive_couplings(p)
        traj = decay_amplitudes(c, np.array([0.0]))
        tr = c.xi[0, 0] + c.xi[1, 1]
        det = c.xi[0, 0] * c.xi[1, 1] - c.xi[0, 1] * c.xi[1, 0]
        assert abs((traj.mu1 + traj.mu2) + tr) <= 1e-12 * abs(tr)
        assert abs(traj.mu1 * traj.mu2 - det) <= 1e-12 * max(abs(det), abs(tr) ** 2)


def test_probability_invariants():
    p = default_parameters()
    c = derive_couplings(p)
    t = np.linspace(0.0, 100e-9, 2000)
    traj = decay_amplitudes(c, t)
    assert traj.p1[0] == 1.0 and traj.p2[0] == 0.0
    total = traj.p1 + traj.p2
    assert np.all(total <= 1.0 + 1e-12)
    assert np.all(np.diff(total) <= 1e-12)


def test_adiabatic_inside_is_real_for_any_position():
    p = default_parameters()
    lam = p.wavelength
    for l1_frac, l2_frac in ((0.0, 0.35), (0.1, 0.5), (0.2, 0.43), (0.0, 0.6)):
        c = derive_couplings(p.replace(l1=l1_frac * lam, l2=l2_frac * lam))
        w = adiabatic_complex_frequency(c, Branch.DQ_INSIDE)
        assert w.imag == 0.0  # infinite radiative lifetime
        assert -2.0 * w.imag < 1e-10 * p.gamma1
    # value agrees with the coupling-matrix expression
    c = derive_couplings(p.replace(l1=0.0, l2=0.35 * lam))
    w = adiabatic_complex_frequency(c, Branch.DQ_INSIDE)
    w_xi = c.omega_ref - 1j * (c.xi[0, 0] - c.xi[0, 1] * c.xi[1, 0] / c.xi[1, 1])
    assert abs(w - w_xi) < 1e-6 * p.gamma2


def test_adiabatic_inside_rejects_resonant_cavity():
    p = default_parameters()
    c = derive_couplings(p.replace(l2=0.25 * p.wavelength))
    with pytest.raises(ResonantFilterError):
        adiabatic_complex_frequency(c, Branch.DQ_INSIDE)


def test_adiabatic_outside_branch():
    p = default_parameters()
    lam = p.wavelength
    # half-wave separation: no decay
    c = derive_couplings(p.replace(l1=0.75 * lam, l2=0.25 * lam))
    w = adiabatic_complex_frequency(c, Branch.DQ_OUTSIDE)
    assert abs(w.imag) < 1e-12 * p.gamma1
    # eighth-wave separation decays at gamma1
    c = derive_couplings(p.replace(l1=0.25 * lam + lam / 8, l2=0.25 * lam))
    w = adiabatic_complex_frequency(c, Branch.DQ_OUTSIDE)
    assert -2.0 * w.imag == pytest.approx(p.gamma1, rel=1e-9)
    with pytest.raises(ValueError):
        adiabatic_complex_frequency(c, Branch.DQ_INSIDE)


def test_decay_rate_with_loss_examples():
    p = default_parameters()
    g1, g2 = p.gamma1, p.gamma2
    # perfect protection
    assert decay_rate_with_loss(p) == 0.0
    # detuning by gamma2 restores half the bare rate: half-depth point
    assert decay_rate_with_loss(p.replace(omega2=p.omega1 + g2)) == pytest.approx(
        g1, rel=1e-12)
    # dip width at half depth equals 2 gamma2 (2 pi x 200 MHz)
    assert 2.0 * g2 == pytest.approx(TWO_PI * 200e6, rel=1e-12)
    # small filter loss leaks at gamma1 * (gamma_i2 / gamma2)
    gi2 = 1e-3 * g2
    rate = decay_rate_with_loss(p.replace(gamma_i2=gi2))
    assert rate == pytest.approx(g1 * gi2 / g2, rel=1e-3)
    # intrinsic qubit loss adds through unchanged
    rate = decay_rate_with_loss(p.replace(gamma_i1=0.5 * g1))
    assert rate == pytest.approx(0.5 * g1, rel=1e-12)


def test_decay_rate_with_loss_matches_exact_slow_root():
    p0 = default_parameters()
    lam = p0.wavelength
    for l2_frac, dw_hz, gi2_frac in ((0.5, 50e6, 0.0), (0.5, 120e6, 1e-3),
                                     (0.38, 60e6, 0.0), (0.42, 0.0, 2e-3)):
        p = p0.replace(l2=l2_frac * lam, omega2=p0.omega1 + TWO_PI * dw_hz,
                       gamma_i2=gi2_frac * p0.gamma2)
        c = derive_couplings(p)
        traj = decay_amplitudes(c, np.array([0.0]))
        exact = -2.0 * traj.mu1.real
        formula = decay_rate_with_loss(p)
        assert formula == pytest.approx(exact, rel=2e-2, abs=1e-7 * p.gamma1)


def test_decay_rate_general_path_matches_optimal_formula():
    p = default_parameters(omega2=TWO_PI * 5e9 + TWO_PI * 70e6, gamma_i2=1e5)
    # move epsilon off the optimal point: the general expression must agree
    p_off = p.replace(l2=p.l2 * (1.0 + 1e-7))
    assert decay_rate_with_loss(p_off) == pytest.approx(decay_rate_with_loss(p),
                                                        rel=1e-4)


def test_subradiant_decomposition():
    p = default_parameters(l1=0.0, l2=0.0)
    c = derive_couplings(p)
    split = subradiant_decomposition(c)
    total = p.gamma1 + p.gamma2
    assert split.sup_weight == pytest.approx(p.gamma1 / total, rel=1e-12)
    assert split.sub_weight == pytest.approx(p.gamma2 / total, rel=1e-12)
    assert split.sub_weight == pytest.approx(0.99998, abs=1e-5)
    assert split.sup_rate == pytest.approx(TWO_PI * 200.004e6, rel=1e-9)
    sym = subradiant_decomposition(derive_couplings(
        p.replace(gamma2=p.gamma1)))
    assert sym.sup_weight == pytest.approx(0.5)
    assert sym.sub_weight == pytest.approx(0.5)
    with pytest.raises(NonColocatedError):
        subradiant_decomposition(derive_couplings(default_parameters()))


def test_wavepacket_normalization_and_limits():
    p = default_parameters()
    c = derive_couplings(p)
    t_end = 48e-9
    traj = decay_amplitudes(c, np.array([0.0, t_end]))
    wp = photon_wavepacket(c, traj, t_end)
    norm = traj.p1[-1] + traj.p2[-1] + wp.norm()
    assert norm == pytest.approx(1.0, abs=1e-6)
    # emitted fraction approaches 1 - stationary survival
    expected = 1.0 - (p.gamma2 / (p.gamma1 + p.gamma2)) ** 2
    assert wp.norm() == pytest.approx(expected, abs=1e-6)
    # nothing emitted at t = 0
    wp0 = photon_wavepacket(c, traj, 0.0)
    assert np.all(wp0.amplitude == 0.0)


def test_wavepacket_full_emission_without_filter():
    p = default_parameters(gamma2=0.0)
    c = derive_couplings(p)
    t_end = 6.0 / (2.0 * p.gamma1)
    traj = decay_amplitudes(c, np.array([0.0, t_end]))
    wp = photon_wavepacket(c, traj, t_end, step=t_end / 20000)
    assert wp.norm() + traj.p1[-1] == pytest.approx(1.0, abs=1e-6)
    assert wp.norm() == pytest.approx(1.0, abs=1e-2)


def test_effective_cavity_frequencies():
    p = default_parameters()
    lam = p.wavelength
    w = effective_cavity_frequencies(lam / 2, 3, p.velocity)
    assert w[0] == pytest.approx(p.omega1 / 2, rel=1e-12)
    w4 = effective_cavity_frequencies(lam / 4, 3, p.velocity)
    assert w4[0] == pytest.approx(p.omega1, rel=1e-12)  # resonant: no protection
    n = np.arange(5)
    wn = effective_cavity_frequencies(lam / 2, 5, p.velocity)
    assert np.allclose(np.diff(wn), wn[1] - wn[0])
    assert np.allclose(wn, (0.5 + n) * math.pi * p.velocity / (lam / 2))


def _full_hamiltonian_p1(p, times, n_center=1200, w_center_rates=12.0,
                         n_tail=500, tail_frac=0.85):
    """Single-photon dynamics by exact diagonalization of the discretized
    waveguide Hamiltonian (dense near resonance, geometric tails)."""
    omega = p.omega1
    w_center = w_center_rates * max(p.gamma1, p.gamma2)
    kc = np.linspace(omega - w_center, omega + w_center, n_center)
    tail = np.geomspace(w_center, tail_frac * omega, n_tail)
    ks = np.unique(np.concatenate([kc, omega - tail, omega + tail]))
    ks = ks[ks > 0]
    weights = np.zeros_like(ks)
    weights[1:-1] = 0.5 * (ks[2:] - ks[:-2])
    weights[0] = ks[1] - ks[0]
    weights[-1] = ks[-1] - ks[-2]
    sq = np.sqrt(weights)
    g1k = math.sqrt(p.gamma1 / math.pi) * np.cos(ks * p.l1 / p.velocity) * sq
    g2k = math.sqrt(p.gamma2 / math.pi) * np.cos(ks * p.l2 / p.velocity) * sq
    n = len(ks) + 2
    h = np.zeros((n, n))
    h[0, 0] = p.omega1
    h[1, 1] = p.omega2
    h[range(2, n), range(2, n)] = ks
    h[0, 2:] = g1k
    h[2:, 0] = g1k
    h[1, 2:] = g2k
    h[2:, 1] = g2k
    evals, evecs = np.linalg.eigh(h)
    c0 = evecs.T[:, 0]
    out = np.empty(len(times))
    for i, t in enumerate(times):
        out[i] = abs(evecs[0] @ (np.exp(-1j * evals * t) * c0)) ** 2
    return out


def test_full_hamiltonian_oracle_confirms_protection():
    p = default_parameters()
    t = np.linspace(0.0, 30e-9, 40)
    ref = _full_hamiltonian_p1(p, t)
    closed = decay_amplitudes(derive_couplings(p), t).p1
    assert np.max(np.abs(ref - closed)) < 5e-4


def test_full_hamiltonian_oracle_quarter_wave_exchange():
    # at the quarter-wave point the exchange coupling sqrt(gamma1 gamma2)
    # swaps the excitation into the filter instead of letting it decay freely
    p = default_parameters()
    p = p.replace(l2=0.25 * p.wavelength)
    t = np.linspace(0.0, 1.5e-6, 40)
    ref = _full_hamiltonian_p1(p, t)
    assert ref.min() < 0.15  # full model sloshes far below the free curve
    free = np.exp(-2.0 * p.gamma1 * t)
    assert free.min() > 0.9
    closed = decay_amplitudes(derive_couplings(p), t).p1
    assert closed.min() < 0.05


def test_trajectory_input_validation():
    c = derive_couplings(default_parameters())
    with pytest.raises(ValueError):
        decay_amplitudes(c, np.array([1e-9, 0.0]))
    with pytest.raises(ValueError):
        decay_amplitudes(c, np.array([-1e-9, 0.0]))
    with pytest.raises(ValueError):
        decay_amplitudes(c, np.array([]))
    traj = decay_amplitudes(c, np.array([0.0, 1e-9]))
    with pytest.raises(ValueError):
        photon_wavepacket(c, traj, 2e-9)
