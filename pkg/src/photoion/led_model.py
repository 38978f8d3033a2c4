"""LED spectral power distribution: band powers and rescaling from a resonant power."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

from .quantities import (DomainError, SampledSpectrum, data_text, gaussian_spectrum,
                         integrate_spectrum)

DEFAULT_SPECTRUM_FILE = "led_spectrum_default.csv"


@dataclass(frozen=True, eq=False)
class LedSpec:
    """LED spectrum with the power it carries at some reference plane.

    Either ``center_nm``/``fwhm_nm`` (Gaussian) or ``tabulated`` is given.
    Tabulated shapes are renormalized to ``total_power_uw``.
    """

    total_power_uw: float
    center_nm: float | None = 380.0
    fwhm_nm: float | None = 30.0
    tabulated: SampledSpectrum | None = None

    def __post_init__(self):
        if not self.total_power_uw > 0:
            raise DomainError("LED total power must be positive")
        if self.tabulated is None:
            if self.center_nm is None or self.fwhm_nm is None:
                raise DomainError("Gaussian LED needs center and FWHM")
            if not self.fwhm_nm > 0:
                raise DomainError("LED FWHM must be positive")

    @cached_property
    def spectrum(self) -> SampledSpectrum:
        """Density in µW/nm."""
        if self.tabulated is not None:
            return self.tabulated.normalized(self.total_power_uw)
        return gaussian_spectrum(self.center_nm, self.fwhm_nm, self.total_power_uw)

    @classmethod
    def from_csv(cls, path: str | Path | None, total_power_uw: float) -> "LedSpec":
        text = data_text(DEFAULT_SPECTRUM_FILE) if path is None else Path(path).read_text(encoding="utf-8")
        return cls(total_power_uw, None, None, SampledSpectrum.from_csv(text))

    def density_uw_per_nm(self, wavelength_nm: float) -> float:
        return float(self.spectrum.density(wavelength_nm))


def band_power(led: LedSpec, band: Sequence[float]) -> float:
    """Power in µW emitted inside ``band`` nm."""
    lo, hi = float(band[0]), float(band[1])
    if hi <= lo:
        warnings.warn(f"degenerate band [{lo}, {hi}] nm", stacklevel=2)
        return 0.0
    return integrate_spectrum(led.spectrum, (lo, hi))


def band_fraction(led: LedSpec, band: Sequence[float]) -> float:
    return band_power(led, band) / led.spectrum.total_power


def rescale_from_resonant_power(led: LedSpec, resonant_power_w: float, wavelength_nm: float,
                                effective_bandwidth_nm: float) -> LedSpec:
    """LED whose density at ``wavelength_nm`` is resonant power / effective bandwidth.

    The returned spectrum keeps the shape of ``led``; its total power is in µW.
    """
    if not effective_bandwidth_nm > 0:
        raise DomainError("effective bandwidth must be positive")
    if resonant_power_w < 0:
        raise DomainError("resonant power must be non-negative")
    lo, hi = led.spectrum.support
    if not lo <= wavelength_nm <= hi:
        raise DomainError(f"{wavelength_nm} nm outside spectrum support [{lo}, {hi}] nm")
    current = led.density_uw_per_nm(wavelength_nm)
    if current <= 0:
        raise DomainError(f"spectral density is zero at {wavelength_nm} nm")
    target = resonant_power_w * 1e6 / effective_bandwidth_nm
    factor = target / current
    scaled = led.spectrum.scaled(factor)
    out = LedSpec(led.total_power_uw * factor, led.center_nm, led.fwhm_nm,
                  scaled if led.tabulated is not None else None)
    # keep the exact scaled samples rather than resampling the Gaussian
    out.__dict__["spectrum"] = scaled
    return out


def calibrate_effective_bandwidth(led: LedSpec, resonant_power_w: float, wavelength_nm: float,
                                  band: Sequence[float], target_band_power_uw: float) -> float:
    """Bandwidth (nm) for which ``rescale_from_resonant_power`` yields the target band power."""
    if target_band_power_uw <= 0:
        raise DomainError("target band power must be positive")
    frac = band_power(led, band) / led.spectrum.total_power
    density_shape = led.density_uw_per_nm(wavelength_nm) / led.spectrum.total_power
    total_needed = target_band_power_uw / frac
    return resonant_power_w * 1e6 / (density_shape * total_needed)
