"""Stress laws, materials, media, averages, and effective speeds."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

import stratawave as sw
from stratawave.medium import (AmbientState, CubicLaw, ExponentialLaw, Layer,
                               LinearLaw, Material, Medium, PowerLaw,
                               StressRangeError, StrainDomainError)

ALL_LAWS = [
    ExponentialLaw(1.0),
    ExponentialLaw(4.0),
    LinearLaw(2.0),
    PowerLaw(1.5, gamma=1.4),
    PowerLaw(2.0, gamma=1.0),
    CubicLaw(1.0, beta=1.0),
    CubicLaw(0.5, beta=0.0),
]


def admissible_strains(law, rng, n=1000):
    if isinstance(law, PowerLaw):
        return rng.uniform(-0.9, 3.0, n)
    return rng.uniform(-2.0, 2.0, n)


# ---------------------------------------------------------------------------
# stress evaluation


def test_sigma_zero_at_zero_strain():
    for law in ALL_LAWS:
        assert law.sigma(0.0) == 0.0


def test_sigma_exponential_hand_value():
    # sigma = exp(4 * ln(2)/4) - 1 = 1 exactly
    law = ExponentialLaw(4.0)
    assert law.sigma(math.log(2.0) / 4.0) == pytest.approx(1.0, abs=1e-14)


def test_sigma_linear_proportional():
    assert LinearLaw(2.0).sigma(0.3) == pytest.approx(0.6, rel=1e-15)


def test_sigma_strictly_increasing():
    rng = np.random.default_rng(11)
    for law in ALL_LAWS:
        eps = np.sort(admissible_strains(law, rng, 200))
        sig = law.sigma(eps)
        assert np.all(np.diff(sig) > 0.0)


def test_power_law_domain_error():
    law = PowerLaw(1.0, gamma=1.4)
    with pytest.raises(StrainDomainError):
        law.sigma(-1.0)
    with pytest.raises(StrainDomainError):
        law.dsigma(-1.5)


# ---------------------------------------------------------------------------
# derivative


def test_dsigma_exponential_values():
    assert ExponentialLaw(1.0).dsigma(0.0) == pytest.approx(1.0, rel=1e-14)
    # at the strain where sigma=1: sigma' = K*(sigma+1) = 8
    law = ExponentialLaw(4.0)
    assert law.dsigma(law.strain(1.0)) == pytest.approx(8.0, rel=1e-13)


def test_dsigma_cubic_value():
    assert CubicLaw(1.0, beta=1.0).dsigma(2.0) == pytest.approx(13.0, rel=1e-14)


def test_dsigma_matches_finite_difference():
    rng = np.random.default_rng(5)
    h = 1e-6
    for law in ALL_LAWS:
        for eps in admissible_strains(law, rng, 40):
            fd = (law.sigma(eps + h) - law.sigma(eps - h)) / (2 * h)
            assert law.dsigma(eps) == pytest.approx(fd, rel=1e-6)


# ---------------------------------------------------------------------------
# inverse


def test_strain_exponential_closed_form():
    assert ExponentialLaw(1.0).strain(1.0) == pytest.approx(math.log(2.0), rel=1e-14)


def test_strain_zero_stress():
    for law in ALL_LAWS:
        assert law.strain(0.0) == pytest.approx(0.0, abs=1e-14)


def test_strain_linear():
    assert LinearLaw(2.0).strain(0.6) == pytest.approx(0.3, rel=1e-15)


def test_strain_range_errors():
    with pytest.raises(StressRangeError):
        ExponentialLaw(1.0).strain(-1.0)
    with pytest.raises(StressRangeError):
        PowerLaw(2.0, gamma=1.4).strain(2.0)


@given(st.sampled_from(range(len(ALL_LAWS))), st.floats(-0.9, 3.0))
@settings(max_examples=200, deadline=None)
def test_strain_stress_round_trip(law_idx, eps):
    law = ALL_LAWS[law_idx]
    if not isinstance(law, PowerLaw):
        eps = eps * 0.7 - 0.5  # stretch into the two-sided domain
    sigma = law.sigma(eps)
    assert abs(law.strain(sigma) - eps) <= 1e-11 * (1.0 + abs(eps))


def test_round_trip_bulk_random():
    rng = np.random.default_rng(2)
    for law in ALL_LAWS:
        eps = admissible_strains(law, rng, 1000)
        back = np.array([law.strain(law.sigma(e)) for e in eps])
        assert np.all(np.abs(back - eps) <= 1e-11 * (1.0 + np.abs(eps)))


# ---------------------------------------------------------------------------
# entropy potential


def test_potential_exponential_value():
    # int_0^1 (e^s - 1) ds = e - 2
    assert ExponentialLaw(1.0).potential(1.0) == pytest.approx(math.e - 2.0, rel=1e-14)


def test_potential_zero():
    for law in ALL_LAWS:
        assert law.potential(0.0) == 0.0


def test_potential_linear():
    assert LinearLaw(2.0).potential(0.3) == pytest.approx(0.09, rel=1e-14)


def test_potential_matches_quadrature():
    rng = np.random.default_rng(7)
    for law in ALL_LAWS:
        for eps in admissible_strains(law, rng, 12):
            ref, _ = quad(law.sigma, 0.0, eps, epsabs=1e-13, epsrel=1e-13)
            assert law.potential(eps) == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_potential_convex():
    rng = np.random.default_rng(13)
    for law in ALL_LAWS:
        eps = np.sort(admissible_strains(law, rng, 100))
        phi = np.array([law.potential(e) for e in eps])
        # convexity: second differences of Phi on a sorted irregular grid
        chord = np.diff(phi) / np.diff(eps)
        assert np.all(np.diff(chord) > -1e-10)


# ---------------------------------------------------------------------------
# material / medium construction


def test_material_impedance_positive():
    mat = Material(2.0, ExponentialLaw(3.0))
    for eps in (-1.0, 0.0, 2.0):
        z = mat.impedance(eps)
        assert np.isfinite(z) and z > 0.0


def test_medium_fraction_validation():
    mat = Material(1.0, LinearLaw(1.0))
    with pytest.raises(ValueError):
        Medium(1.0, (Layer(0.5, mat), Layer(0.4, mat)))
    with pytest.raises(ValueError):
        Medium(1.0, ())


def test_ly_medium_pattern():
    med = sw.ly_medium(4.0)
    assert med.material_at(0.25).rho == 1.0
    assert med.material_at(0.75).rho == 4.0
    assert med.material_at(7.25).rho == 1.0   # periodic repetition
    assert med.material_at(7.75).law.K == 4.0


# ---------------------------------------------------------------------------
# averages


def quad_mean(medium, f, harmonic=False):
    g = (lambda x: 1.0 / f(medium.material_at(x))) if harmonic \
        else (lambda x: f(medium.material_at(x)))
    val, _ = quad(g, 0.0, medium.period, limit=400,
                  points=[medium.period * 0.5])
    val /= medium.period
    return 1.0 / val if harmonic else val


def test_mean_arithmetic_ly():
    med = sw.ly_medium(4.0)
    bar = sw.mean_arithmetic(med, lambda m: m.rho)
    assert bar == pytest.approx(2.5, rel=1e-14)
    assert bar == pytest.approx(quad_mean(med, lambda m: m.rho), rel=1e-9)


def test_mean_harmonic_ly():
    med = sw.ly_medium(4.0)
    hat = sw.mean_harmonic(med, lambda m: m.law.K)
    assert hat == pytest.approx(1.6, rel=1e-14)
    assert hat == pytest.approx(quad_mean(med, lambda m: m.law.K, harmonic=True),
                                rel=1e-9)


def test_means_of_constant():
    med = sw.ly_medium(3.0)
    assert sw.mean_arithmetic(med, lambda m: 7.0) == pytest.approx(7.0)
    assert sw.mean_harmonic(med, lambda m: 7.0) == pytest.approx(7.0)


def test_harmonic_leq_arithmetic():
    rng = np.random.default_rng(23)
    for _ in range(50):
        k = rng.integers(1, 5)
        widths = rng.uniform(0.1, 1.0, k)
        widths /= widths.sum()
        mats = [Material(rng.uniform(0.2, 5.0), LinearLaw(rng.uniform(0.2, 5.0)))
                for _ in range(k)]
        med = Medium(1.0, tuple(Layer(w, m) for w, m in zip(widths, mats)))
        bar = sw.mean_arithmetic(med, lambda m: m.rho)
        hat = sw.mean_harmonic(med, lambda m: m.rho)
        assert hat <= bar + 1e-14


def test_harmonic_requires_positive():
    med = sw.ly_medium(2.0)
    with pytest.raises(ValueError):
        sw.mean_harmonic(med, lambda m: m.rho - 4.0)


# ---------------------------------------------------------------------------
# effective speeds


def test_c_hat_unity_for_matched_media():
    for z in (1.0, 2.0, 4.0, 7.3):
        assert sw.c_hat(sw.ly_medium(z), 0.0) == pytest.approx(1.0, rel=1e-14)


def test_c_hat_homogeneous():
    med = Medium.homogeneous(4.0, LinearLaw(9.0))
    assert sw.c_hat(med, 0.0) == pytest.approx(1.5, rel=1e-14)


def test_c_hat_harmonic_of_speeds():
    mats = (Material(1.0, LinearLaw(1.0)), Material(4.0, LinearLaw(1.0)))
    med = Medium.bilayer(*mats)
    # speeds 1 and 1/2 -> harmonic mean 2/3
    assert sw.c_hat(med, 0.0) == pytest.approx(2.0 / 3.0, rel=1e-14)


def test_c_eff_ly():
    assert sw.c_eff(sw.ly_medium(4.0), AmbientState(0.0)) == pytest.approx(0.8, rel=1e-14)


def test_c_eff_homogeneous_is_sound_speed():
    med = Medium.homogeneous(2.0, LinearLaw(8.0))
    assert sw.c_eff(med, 0.0) == pytest.approx(2.0, rel=1e-14)


def test_c_eff_z2():
    assert sw.c_eff(sw.ly_medium(2.0), 0.0) == pytest.approx(math.sqrt(8.0 / 9.0),
                                                             rel=1e-13)


def test_c_eff_leq_c_hat():
    rng = np.random.default_rng(31)
    for _ in range(30):
        med = Medium.bilayer(
            Material(rng.uniform(0.5, 5.0), ExponentialLaw(rng.uniform(0.5, 5.0))),
            Material(rng.uniform(0.5, 5.0), ExponentialLaw(rng.uniform(0.5, 5.0))))
        sig0 = rng.uniform(-0.5, 2.0)
        assert sw.c_eff(med, sig0) <= sw.c_hat(med, sig0) + 1e-13


def oracle_s_eff(medium, sigma_l, sigma_r):
    """Direct quadrature evaluation of the effective jump speed."""
    def inv_chord(x):
        mat = medium.material_at(x)
        deps = mat.law.strain(sigma_r) - mat.law.strain(sigma_l)
        return deps / (sigma_r - sigma_l)
    hat_inv, _ = quad(inv_chord, 0.0, medium.period, limit=400,
                      points=[0.5 * medium.period])
    hat = medium.period / hat_inv
    rho_bar = quad_mean(medium, lambda m: m.rho)
    return math.sqrt(hat / rho_bar)


def test_s_eff_homogeneous_is_rh_speed():
    med = Medium.homogeneous(2.0, ExponentialLaw(3.0))
    law = med.materials[0].law
    sl, sr = 1.0, 0.0
    rh = math.sqrt((sl - sr) / ((law.strain(sl) - law.strain(sr)) * 2.0))
    assert sw.s_eff(med, sl, sr) == pytest.approx(rh, rel=1e-14)


def test_s_eff_values_against_quadrature():
    z2 = sw.ly_medium(2.0)
    z4 = sw.ly_medium(4.0)
    assert sw.s_eff(z2, 1.0, 0.0) == pytest.approx(oracle_s_eff(z2, 1.0, 0.0), rel=1e-9)
    assert sw.s_eff(z4, 0.1, 0.0) == pytest.approx(oracle_s_eff(z4, 0.1, 0.0), rel=1e-9)
    # frozen values from the closed-form oracle
    assert sw.s_eff(z2, 1.0, 0.0) == pytest.approx(1.13242, abs=1e-4)
    assert sw.s_eff(z4, 0.1, 0.0) == pytest.approx(0.81945, abs=1e-4)


def test_s_eff_relative_verdicts():
    assert sw.s_eff_relative(sw.ly_medium(2.0), 1.0, 0.0) == pytest.approx(1.13242, abs=1e-4)
    assert sw.s_eff_relative(sw.ly_medium(4.0), 0.1, 0.0) == pytest.approx(0.81945, abs=1e-4)
    hom = Medium.homogeneous(1.0, ExponentialLaw(1.0))
    for sl in (0.01, 0.5, 3.0):
        assert sw.s_eff_relative(hom, sl, 0.0) > 1.0


def test_s_eff_equal_states_error():
    with pytest.raises(ValueError):
        sw.s_eff(sw.ly_medium(2.0), 0.5, 0.5)


def test_s_eff_rotation_invariant():
    med = sw.ly_medium(3.0)
    rotated = Medium(med.period, tuple(reversed(med.layers)))
    assert sw.s_eff(med, 1.0, 0.0) == pytest.approx(sw.s_eff(rotated, 1.0, 0.0),
                                                    rel=1e-14)
    assert sw.s_eff_relative(med, 1.0, 0.0) == pytest.approx(
        sw.s_eff_relative(rotated, 1.0, 0.0), rel=1e-14)


def test_s_eff_small_jump_limit():
    med = sw.ly_medium(4.0)
    sr = 0.3
    val = sw.s_eff(med, sr + 1e-8, sr)
    assert val == pytest.approx(sw.c_eff(med, sr), rel=1e-6)
