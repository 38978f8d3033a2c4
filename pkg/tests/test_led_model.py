import math

import numpy as np
import pytest
from scipy import stats

from photoion import led_model as lm
from photoion.quantities import DomainError, SampledSpectrum

BAND = (365.0, 391.0)
SIGMA = 30.0 / (2 * math.sqrt(2 * math.log(2)))


def normal_share(a, b):
    nd = stats.norm(380.0, SIGMA)
    return nd.cdf(b) - nd.cdf(a)


def test_band_fraction_matches_normal_cdf():
    led = lm.LedSpec(100.0)
    assert lm.band_fraction(led, BAND) == pytest.approx(normal_share(*BAND), rel=1e-5)
    assert lm.band_fraction(led, BAND) == pytest.approx(0.6865, abs=1e-4)


def test_sub_threshold_share():
    # [389.89, 391] nm holds about 2.5 % of a 380/30 nm Gaussian
    led = lm.LedSpec(1.0)
    share = lm.band_fraction(led, (389.89, 391.0))
    assert share == pytest.approx(normal_share(389.89, 391.0), rel=1e-4)
    assert share == pytest.approx(0.024, abs=0.001)


def test_band_power_additive():
    led = lm.LedSpec(150.0)
    whole = lm.band_power(led, BAND)
    parts = lm.band_power(led, (365.0, 380.0)) + lm.band_power(led, (380.0, 391.0))
    assert parts == pytest.approx(whole, rel=1e-12)


def test_degenerate_band_warns():
    with pytest.warns(UserWarning):
        assert lm.band_power(lm.LedSpec(1.0), (391.0, 391.0)) == 0.0


def test_rescale_sets_density():
    led = lm.LedSpec(1.0)
    out = lm.rescale_from_resonant_power(led, 1.4e-11, 393.0, 1e-5)
    assert out.density_uw_per_nm(393.0) == pytest.approx(1.4e-11 * 1e6 / 1e-5, rel=1e-12)
    # shape is untouched
    assert lm.band_fraction(out, BAND) == pytest.approx(lm.band_fraction(led, BAND), rel=1e-12)


def test_rescale_errors():
    led = lm.LedSpec(1.0)
    with pytest.raises(DomainError):
        lm.rescale_from_resonant_power(led, 1e-11, 393.0, 0.0)
    with pytest.raises(DomainError):
        lm.rescale_from_resonant_power(led, 1e-11, 600.0, 1e-5)


@pytest.mark.parametrize("target", [50.0, 144.0, 400.0])
def test_calibration_inverts_rescale(target):
    led = lm.LedSpec(1.0)
    bw = lm.calibrate_effective_bandwidth(led, 1.4e-11, 393.0, BAND, target)
    out = lm.rescale_from_resonant_power(led, 1.4e-11, 393.0, bw)
    assert lm.band_power(out, BAND) == pytest.approx(target, rel=1e-10)


def test_shipped_bandwidth_gives_144():
    out = lm.rescale_from_resonant_power(lm.LedSpec(1.0), 1.4e-11, 393.0, 3.5874711e-06)
    assert lm.band_power(out, BAND) == pytest.approx(144.0, rel=0.01)


def test_tabulated_default_matches_gaussian():
    tab = lm.LedSpec.from_csv(None, 100.0)
    gauss = lm.LedSpec(100.0)
    assert lm.band_power(tab, BAND) == pytest.approx(lm.band_power(gauss, BAND), rel=1e-3)
    assert tab.spectrum.total_power == pytest.approx(100.0, rel=1e-12)


def test_tabulated_renormalized():
    wl = np.linspace(350.0, 410.0, 61)
    s = SampledSpectrum(wl, np.ones_like(wl))
    led = lm.LedSpec(30.0, None, None, s)
    assert lm.band_power(led, (360.0, 370.0)) == pytest.approx(5.0, rel=1e-12)


def test_led_validation():
    with pytest.raises(DomainError):
        lm.LedSpec(0.0)
    with pytest.raises(DomainError):
        lm.LedSpec(1.0, 380.0, -1.0)
