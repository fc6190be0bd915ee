import math

import numpy as np
import pytest
from scipy.integrate import quad

from jqfsim import (
    CouplingNodeError,
    OmegaRef,
    SystemParameters,
    default_parameters,
    derive_couplings,
    gate_time,
    radiative_lifetime,
    tradeoff_bound,
)

TWO_PI = 2.0 * math.pi


def test_default_parameters_match_working_point():
    p = default_parameters()
    assert p.omega1 == pytest.approx(TWO_PI * 5e9)
    assert p.omega2 == p.omega1
    assert p.wavelength == pytest.approx(0.02)
    assert p.l2 == pytest.approx(p.wavelength / 2)
    assert p.gamma1 == pytest.approx(TWO_PI * 2e3)
    assert p.gamma2 == pytest.approx(TWO_PI * 100e6)


def test_parameter_validation():
    with pytest.raises(ValueError):
        default_parameters(velocity=0.0)
    with pytest.raises(ValueError):
        default_parameters(gamma1=-1.0)
    with pytest.raises(ValueError):
        default_parameters(l1=-1e-3)
    with pytest.raises(ValueError):
        default_parameters(omega1=math.inf)


def test_couplings_at_optimal_position():
    p = default_parameters()
    c = derive_couplings(p)
    g1, g2 = p.gamma1, p.gamma2
    assert c.xi[0, 0] == pytest.approx(g1, rel=1e-12)
    assert c.xi[1, 1].real == pytest.approx(g2, rel=1e-6)
    assert c.xi[0, 1].real == pytest.approx(-math.sqrt(g1 * g2), rel=1e-12)
    assert abs(c.xi[0, 1].imag) < 1e-6 * math.sqrt(g1 * g2)
    assert c.eta == pytest.approx(math.sqrt(2 * g1))
    assert c.omega_bar == pytest.approx(p.omega1)


def test_couplings_colocated():
    p = default_parameters(l1=0.0, l2=0.0)
    c = derive_couplings(p)
    g1, g2 = p.gamma1, p.gamma2
    root = math.sqrt(g1 * g2)
    assert np.allclose(c.xi, [[g1, root], [root, g2]])
    assert np.allclose(c.J, 0.0)


def test_couplings_quarter_wave_decouples_filter():
    p = default_parameters()
    c = derive_couplings(p.replace(l2=p.wavelength / 4))
    assert abs(c.xi[1, 1].real) < 1e-12 * p.gamma2
    assert abs(c.s_coeff[1]) < 1e-12 * math.sqrt(2 * p.gamma2)


def test_omega_ref_choices():
    p = default_parameters(omega2=TWO_PI * 5.1e9)
    assert derive_couplings(p, OmegaRef.DQ).omega_ref == p.omega1
    assert derive_couplings(p, OmegaRef.JQF).omega_ref == p.omega2
    assert derive_couplings(p, OmegaRef.MEAN).omega_ref == pytest.approx(
        0.5 * (p.omega1 + p.omega2))


def test_radiative_lifetime_values():
    p = default_parameters()
    assert radiative_lifetime(p) == pytest.approx(1.0 / (2 * p.gamma1))
    assert radiative_lifetime(p) == pytest.approx(39.8e-6, rel=1e-3)
    lam = p.wavelength
    # half-wave offset restores the end-of-line rate
    assert radiative_lifetime(p.replace(l1=lam / 2)) == pytest.approx(
        radiative_lifetime(p), rel=1e-12)
    with pytest.raises(CouplingNodeError):
        radiative_lifetime(p.replace(l1=lam / 4))


def test_gate_time_and_tradeoff():
    p = default_parameters()
    # 25 MHz Rabi frequency gives a 20 ns pi pulse
    amp = TWO_PI * 25e6 / math.sqrt(8 * p.gamma1)
    assert gate_time(p, amp) == pytest.approx(20e-9, rel=1e-12)
    assert amp**2 / p.gamma2 == pytest.approx(390.625, rel=1e-12)
    # 2.5 MHz Rabi frequency corresponds to photon-rate ratio 3.91
    amp_low = TWO_PI * 2.5e6 / math.sqrt(8 * p.gamma1)
    assert amp_low**2 / p.gamma2 == pytest.approx(3.906, abs=5e-3)
    # doubling the amplitude halves the gate time
    assert gate_time(p, 2 * amp) == pytest.approx(10e-9, rel=1e-12)
    with pytest.raises(CouplingNodeError):
        gate_time(p.replace(l1=p.wavelength / 4), amp)
    assert tradeoff_bound(amp) == pytest.approx(4 * amp**2 / math.pi**2)
    # the bound is saturated by the lossless radiative limit T_r / T_g^2
    t_r = radiative_lifetime(p)
    assert t_r / gate_time(p, amp) ** 2 <= tradeoff_bound(amp) * (1 + 1e-12)


def test_xi_identities_on_random_draws():
    rng = np.random.default_rng(7)
    p0 = default_parameters()
    lam = p0.wavelength
    for _ in range(1000):
        p = p0.replace(
            l1=float(rng.uniform(0, lam)),
            l2=float(rng.uniform(0, lam)),
            gamma1=float(10 ** rng.uniform(2, 7)),
            gamma2=float(10 ** rng.uniform(4, 10)),
        )
        c = derive_couplings(p)
        scales = np.sqrt(np.outer([p.gamma1, p.gamma2], [p.gamma1, p.gamma2]))
        # exact symmetry
        assert c.xi[0, 1] == c.xi[1, 0]
        # dissipative part is the rank-1 Gram matrix of the collective mode
        gram = 0.5 * np.outer(c.s_coeff, c.s_coeff)
        assert np.max(np.abs(c.xi.real - gram) / scales) < 1e-12
        assert np.linalg.eigvalsh(c.xi.real).min() >= -1e-12 * scales[1, 1]
        # exchange part agrees with the independent min/max form
        th = np.array(c.thetas)
        jind = scales * np.cos(np.minimum.outer(th, th)) * np.sin(
            np.maximum.outer(th, th))
        assert np.max(np.abs(c.J - jind) / scales) < 1e-12
        assert np.max(np.abs(c.xi.imag - c.J)) == 0.0


def test_couplings_periodic_in_reference_wavelength():
    p = default_parameters(l1=1.7e-3, l2=6.3e-3)
    c = derive_couplings(p)
    lam = TWO_PI * p.velocity / c.omega_ref
    shifted = derive_couplings(p.replace(l1=p.l1 + lam, l2=p.l2 + lam))
    assert np.allclose(shifted.xi, c.xi, rtol=1e-12, atol=1e-12 * p.gamma2)
    assert np.allclose(shifted.s_coeff, c.s_coeff, rtol=0,
                       atol=1e-12 * math.sqrt(2 * p.gamma2))


def _xi_from_mode_integral(p, m, n):
    """Coupling via the waveguide-mode integrals: resonant (delta-function)
    dissipative part plus the principal-value exchange part.

    The mode index runs over the extended frequency axis (the formal
    continuation to negative frequencies).  The product of cosine mode
    functions splits into cos(k a) components; each principal value is
    integrated by quadrature on a symmetric window around the resonance,
    with the oscillatory tail outside the window summed analytically via
    the sine integral.
    """
    from scipy.special import sici

    omega = p.omega1
    ls = (p.l1, p.l2)
    gs = (p.gamma1, p.gamma2)
    v = p.velocity
    prefactor = math.sqrt(gs[m] * gs[n]) / math.pi

    re_part = math.pi * prefactor * math.cos(omega * ls[m] / v) * math.cos(
        omega * ls[n] / v)
    W = 100.0 * omega

    def pv_cos(a):
        # P.V. over the full line of cos(k a) / (k - omega)
        if a == 0.0:
            return 0.0
        window, _ = quad(lambda k: math.cos(k * a), omega - W, omega + W,
                         weight="cauchy", wvar=omega, limit=4000,
                         epsabs=1e-13, epsrel=1e-11)
        si, _ = sici(W * a)
        tail = -2.0 * math.sin(omega * a) * (0.5 * math.pi - si)
        return window + tail

    a_minus = abs(ls[m] - ls[n]) / v
    a_plus = (ls[m] + ls[n]) / v
    exchange = -0.5 * prefactor * (pv_cos(a_minus) + pv_cos(a_plus))
    return re_part + 1j * exchange


@pytest.mark.parametrize("l1_frac,l2_frac", [(0.0, 0.5), (0.0, 0.31), (0.13, 0.46)])
def test_xi_against_mode_function_integral(l1_frac, l2_frac):
    p = default_parameters()
    lam = p.wavelength
    p = p.replace(l1=l1_frac * lam, l2=l2_frac * lam)
    c = derive_couplings(p)
    gs = (p.gamma1, p.gamma2)
    for m, n in ((0, 0), (0, 1), (1, 1)):
        ref = _xi_from_mode_integral(p, m, n)
        assert abs(c.xi[m, n] - ref) < 1e-6 * math.sqrt(gs[m] * gs[n])
