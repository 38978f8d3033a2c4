import math

import numpy as np
import pytest
from scipy import stats

from photoion.quantities import (DomainError, Quantity, SampledSpectrum, celsius_to_kelvin, constants,
                                 gaussian_spectrum, integrate_spectrum, kelvin_to_celsius, photon_energy,
                                 wavenumber_cm)


def test_unit_conversions():
    assert Quantity(846.0, "nm").to("µm").value == pytest.approx(0.846, rel=1e-15)
    assert Quantity(1.0, "um").to("nm").value == pytest.approx(1000.0)
    assert Quantity(150.0, "uW").to("mW").value == pytest.approx(0.15)
    assert Quantity(20.0, "°C").to("K").value == pytest.approx(293.15)
    assert Quantity(293.15, "K").to("C").value == pytest.approx(20.0)


def test_temperature_helpers_invert():
    for t in (-40.0, 0.0, 19.9, 120.0):
        assert kelvin_to_celsius(celsius_to_kelvin(t)) == pytest.approx(t, abs=1e-12)


def test_bad_units_and_values():
    with pytest.raises(DomainError):
        Quantity(-1.0, "mm")
    with pytest.raises(ValueError):
        Quantity(1.0, "nm").to("mW")
    with pytest.raises(ValueError):
        Quantity(1.0, "furlong")


def test_quantity_string_carries_unit():
    assert str(Quantity(4.05, "µm")).endswith("µm")


def test_photon_energy_matches_hc_over_lambda():
    # hc = 1.98644586e-25 J·m from the exact SI constants
    assert photon_energy(393.0) == pytest.approx(1.98644586e-25 / 393e-9, rel=1e-8)
    assert constants().hc == pytest.approx(1.98644586e-25, rel=1e-8)


def test_wavenumber_roundtrip():
    assert wavenumber_cm(389.89) == pytest.approx(25648.2598, rel=1e-8)
    assert 1e7 / wavenumber_cm(389.89) == pytest.approx(389.89, rel=1e-14)


def test_trapezoid_exact_on_linear_density():
    wl = np.linspace(300.0, 400.0, 11)
    s = SampledSpectrum(wl, 2.0 + 0.01 * wl)
    # ∫(2 + 0.01λ)dλ from 320.5 to 377.3, interpolation is exact for a line
    a, b = 320.5, 377.3
    exact = 2 * (b - a) + 0.005 * (b**2 - a**2)
    assert integrate_spectrum(s, (a, b)) == pytest.approx(exact, rel=1e-13)


def test_band_outside_support_is_clamped_with_warning():
    s = SampledSpectrum(np.array([300.0, 400.0]), np.array([1.0, 1.0]))
    with pytest.warns(UserWarning):
        assert integrate_spectrum(s, (250.0, 350.0)) == pytest.approx(50.0)


def test_spectrum_rejects_bad_samples():
    with pytest.raises(DomainError):
        SampledSpectrum(np.array([300.0, 290.0]), np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        SampledSpectrum(np.array([300.0, 310.0]), np.array([1.0, -1.0]))


def test_gaussian_spectrum_matches_normal_cdf():
    g = gaussian_spectrum(380.0, 30.0, 1.0)
    sigma = 30.0 / (2 * math.sqrt(2 * math.log(2)))
    nd = stats.norm(380.0, sigma)
    expected = nd.cdf(391.0) - nd.cdf(365.0)
    assert integrate_spectrum(g, (365.0, 391.0)) == pytest.approx(expected, rel=1e-5)
    assert g.total_power == pytest.approx(1.0, rel=1e-12)


def test_spectrum_csv_roundtrip():
    g = gaussian_spectrum(380.0, 30.0, 2.5, step_nm=0.5)
    back = SampledSpectrum.from_csv(g.to_csv())
    np.testing.assert_allclose(back.wavelength_nm, g.wavelength_nm, rtol=1e-12)
    np.testing.assert_allclose(back.density_w_per_nm, g.density_w_per_nm, rtol=1e-9)
