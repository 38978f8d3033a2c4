"""Neutral Ca excitation, Rydberg series and a two-step loading-rate model."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .quantities import DomainError, constants, data_text, read_two_column_csv

SERIES_LIMIT_FROM_1P1_CM = 1e7 / 389.89


@dataclass(frozen=True)
class TransitionSpec:
    wavelength_nm: float = 422.67
    linewidth_mhz: float = 35.4  # Γ/2π
    saturation_intensity_mw_mm2: float = 3.7

    def __post_init__(self):
        for name in ("wavelength_nm", "linewidth_mhz", "saturation_intensity_mw_mm2"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    def two_level_saturation_intensity(self) -> float:
        """π·h·c·Γ/(3λ³) in mW/mm²."""
        k = constants()
        gamma = 2 * math.pi * self.linewidth_mhz * 1e6
        lam = self.wavelength_nm * 1e-9
        return math.pi * k.hc * gamma / (3 * lam**3) * 1e-3

    def saturation_consistency(self) -> float:
        """Ratio of the stated I_sat to the two-level value; ~1 when consistent."""
        return self.saturation_intensity_mw_mm2 / self.two_level_saturation_intensity()


@dataclass(frozen=True)
class IsotopeLine:
    mass_number: int
    isotope_shift_mhz: float


@lru_cache(maxsize=None)
def isotope_table() -> tuple[IsotopeLine, ...]:
    mass, shift = read_two_column_csv(data_text("isotopes_ca_423.csv"),
                                      ("mass_number", "isotope_shift_mhz"))
    return tuple(IsotopeLine(int(a), float(s)) for a, s in zip(mass, shift))


def _lorentz_fraction(s, detuning_mhz, linewidth_mhz):
    x = 2 * np.asarray(detuning_mhz, dtype=float) / linewidth_mhz
    return (s / 2) / (1 + s + x * x)


def excitation_fraction(t: TransitionSpec, intensity_mw_mm2: float, detuning_mhz: float = 0.0,
                        doppler_fwhm_mhz: float = 0.0) -> float:
    """Steady-state excited population of the two-level S–P transition.

    With ``doppler_fwhm_mhz > 0`` the result is averaged over a Gaussian
    distribution of detunings of that FWHM.
    """
    if intensity_mw_mm2 < 0:
        raise DomainError("intensity must be non-negative")
    s = intensity_mw_mm2 / t.saturation_intensity_mw_mm2
    if doppler_fwhm_mhz <= 0:
        return float(_lorentz_fraction(s, detuning_mhz, t.linewidth_mhz))
    # ρ(δ) is a Lorentzian of half width (Γ/2)·sqrt(1 + s); its Gaussian average is a Voigt profile
    sigma = doppler_fwhm_mhz / (2 * math.sqrt(2 * math.log(2)))
    gamma = t.linewidth_mhz / 2 * math.sqrt(1 + s)
    peak = (s / 2) / (1 + s)
    return float(peak * math.pi * gamma * special.voigt_profile(detuning_mhz, sigma, gamma))


def isotope_suppression(t: TransitionSpec, shift_mhz: float, s: float) -> float:
    """Resonant over shifted excitation at equal saturation parameter ``s``."""
    if s < 0:
        raise DomainError("saturation parameter must be non-negative")
    x = 2 * shift_mhz / t.linewidth_mhz
    return (1 + s + x * x) / (1 + s)


@dataclass(frozen=True)
class RydbergSeries:
    series_limit_from_1p1_cm: float = SERIES_LIMIT_FROM_1P1_CM
    quantum_defect: float = 0.0

    def __post_init__(self):
        if not self.series_limit_from_1p1_cm > 0:
            raise DomainError("series limit must be positive")
        if not 0 <= self.quantum_defect < 5:
            raise DomainError("quantum defect must lie in [0, 5)")

    @property
    def limit_wavelength_nm(self) -> float:
        return 1e7 / self.series_limit_from_1p1_cm


def rydberg_wavelength(r: RydbergSeries, n: int) -> float:
    """Wavelength (nm) of the 4s4p ¹P₁ → n Rydberg step."""
    if n < 10:
        raise DomainError(f"quantum-defect formula used only for n >= 10, got {n}")
    energy = r.series_limit_from_1p1_cm - constants().rydberg_ca / (n - r.quantum_defect) ** 2
    if energy <= 0:
        raise DomainError(f"state n={n} lies below the 1P1 level")
    return 1e7 / energy


def field_ionization_threshold(n: int, quantum_defect: float = 0.0) -> float:
    """Classical saddle-point field F = 1/(16·n*⁴) a.u., in V/cm."""
    n_eff = n - quantum_defect
    if not n_eff > 1:
        raise DomainError("effective principal quantum number must exceed 1")
    return constants().atomic_unit_field / 16 / n_eff**4


@dataclass(frozen=True)
class LoadingScenario:
    atom_flux_per_s: float
    interaction_length_um: float
    mean_atom_speed_m_s: float
    ionization_rate_per_s: float

    def __post_init__(self):
        for name in ("atom_flux_per_s", "interaction_length_um", "mean_atom_speed_m_s"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.ionization_rate_per_s < 0:
            raise DomainError("ionization rate must be non-negative")

    @property
    def transit_time_s(self) -> float:
        return self.interaction_length_um * 1e-6 / self.mean_atom_speed_m_s


def loading_rate(scenario: LoadingScenario, excited_fraction: float) -> float:
    """Ions per second: flux × ρ × (1 − exp(−Γ_ion·t_transit))."""
    if not 0 <= excited_fraction <= 0.5:
        raise DomainError("excited fraction must lie in [0, 0.5]")
    if math.isinf(scenario.ionization_rate_per_s):
        p_ion = 1.0
    else:
        p_ion = -math.expm1(-scenario.ionization_rate_per_s * scenario.transit_time_s)
    return scenario.atom_flux_per_s * excited_fraction * p_ion
