"""Unit-carrying scalars, shipped constants and sampled spectra.

Only the handful of units needed by the rest of the package are known here.
Conversions are plain ratios to a base unit per dimension, except for
temperature which carries the 273.15 K offset.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class DomainError(ValueError):
    """Input outside the physical domain of an operation."""


# unit -> (dimension, factor to the dimension's base unit)
_UNITS: dict[str, tuple[str, float]] = {
    "m": ("length", 1.0),
    "mm": ("length", 1e-3),
    "µm": ("length", 1e-6),
    "nm": ("length", 1e-9),
    "s": ("time", 1.0),
    "ns": ("time", 1e-9),
    "Hz": ("frequency", 1.0),
    "MHz": ("frequency", 1e6),
    "K": ("temperature", 1.0),
    "°C": ("temperature", 1.0),
    "W": ("power", 1.0),
    "mW": ("power", 1e-3),
    "µW": ("power", 1e-6),
    "pW": ("power", 1e-12),
    "W/m²": ("intensity", 1.0),
    "W/mm²": ("intensity", 1e6),
    "mW/mm²": ("intensity", 1e3),
    "pW/mm²": ("intensity", 1e-6),
    "W/nm": ("spectral_density", 1.0),
    "cm⁻¹": ("wavenumber", 1.0),
    "V/cm": ("field", 1.0),
    "": ("dimensionless", 1.0),
}
_ALIASES = {"um": "µm", "uW": "µW", "C": "°C", "degC": "°C", "mW/mm2": "mW/mm²",
            "W/mm2": "W/mm²", "W/m2": "W/m²", "pW/mm2": "pW/mm²", "cm-1": "cm⁻¹",
            "1": ""}
_NON_NEGATIVE = {"length", "power", "intensity", "spectral_density"}
KELVIN_OFFSET = 273.15


def _canonical(unit: str) -> str:
    unit = _ALIASES.get(unit, unit)
    if unit not in _UNITS:
        raise ValueError(f"unknown unit {unit!r}")
    return unit


@dataclass(frozen=True)
class Quantity:
    value: float
    unit: str = ""

    def __post_init__(self):
        unit = _canonical(self.unit)
        object.__setattr__(self, "unit", unit)
        value = float(self.value)
        if not math.isfinite(value):
            raise DomainError(f"non-finite quantity {value} {unit}")
        dim = _UNITS[unit][0]
        if dim in _NON_NEGATIVE and value < 0:
            raise DomainError(f"negative {dim} not allowed: {value} {unit}")
        if unit == "K" and value < 0:
            raise DomainError(f"negative absolute temperature: {value} K")
        object.__setattr__(self, "value", value)

    @property
    def dimension(self) -> str:
        return _UNITS[self.unit][0]

    def to(self, unit: str) -> "Quantity":
        unit = _canonical(unit)
        dim, factor = _UNITS[unit]
        if dim != self.dimension:
            raise ValueError(f"cannot convert {self.unit!r} to {unit!r}")
        if dim == "temperature":
            kelvin = self.value + KELVIN_OFFSET if self.unit == "°C" else self.value
            return Quantity(kelvin - KELVIN_OFFSET if unit == "°C" else kelvin, unit)
        src = _UNITS[self.unit][1]
        if src == factor:
            return Quantity(self.value, unit)
        # divide by the larger ratio so decimal factors round-trip cleanly
        if src > factor:
            return Quantity(self.value * (src / factor), unit)
        return Quantity(self.value / (factor / src), unit)

    def __format__(self, spec: str) -> str:
        text = format(self.value, spec or "g")
        return f"{text} {self.unit}" if self.unit else text

    def __str__(self) -> str:
        return format(self, "")


def celsius_to_kelvin(t_c: float) -> float:
    return t_c + KELVIN_OFFSET


def kelvin_to_celsius(t_k: float) -> float:
    return t_k - KELVIN_OFFSET


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def read_key_values(text: str) -> dict[str, str]:
    """Parse ``name=value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected name=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def data_text(name: str) -> str:
    return resources.files("photoion.data").joinpath(name).read_text(encoding="utf-8")


@dataclass(frozen=True)
class Constants:
    h: float
    c: float
    epsilon_0: float
    rydberg_inf: float
    rydberg_ca: float
    atomic_unit_field: float

    @property
    def hc(self) -> float:
        return self.h * self.c


@lru_cache(maxsize=None)
def constants() -> Constants:
    kv = read_key_values(data_text("constants.txt"))
    return Constants(
        h=float(kv["h"]),
        c=float(kv["c"]),
        epsilon_0=float(kv["epsilon_0"]),
        rydberg_inf=float(kv["rydberg_inf"]),
        rydberg_ca=float(kv["rydberg_ca"]),
        atomic_unit_field=float(kv["atomic_unit_field"]),
    )


def photon_energy(wavelength_nm: float) -> float:
    """Photon energy in joules for a vacuum wavelength in nm."""
    if not wavelength_nm > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength_nm} nm")
    return constants().hc / (wavelength_nm * 1e-9)


def wavenumber_cm(wavelength_nm: float) -> float:
    if not wavelength_nm > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength_nm} nm")
    return 1e7 / wavelength_nm


# ---------------------------------------------------------------------------
# sampled spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SampledSpectrum:
    """Spectral power density (W/nm) on a strictly increasing wavelength grid.

    Between samples the density is linear, so the trapezoid rule is exact
    for the represented function.
    """

    wavelength_nm: np.ndarray
    density_w_per_nm: np.ndarray

    def __post_init__(self):
        wl = np.asarray(self.wavelength_nm, dtype=float)
        dens = np.asarray(self.density_w_per_nm, dtype=float)
        if wl.ndim != 1 or wl.shape != dens.shape:
            raise ValueError("wavelength and density must be 1-D arrays of equal length")
        if wl.size == 0:
            raise DomainError("empty spectrum")
        if not (np.all(np.isfinite(wl)) and np.all(np.isfinite(dens))):
            raise DomainError("spectrum contains non-finite values")
        if np.any(np.diff(wl) <= 0):
            raise DomainError("wavelengths must be strictly increasing")
        if np.any(wl <= 0):
            raise DomainError("wavelengths must be positive")
        if np.any(dens < 0):
            raise DomainError("spectral densities must be non-negative")
        wl.setflags(write=False)
        dens.setflags(write=False)
        object.__setattr__(self, "wavelength_nm", wl)
        object.__setattr__(self, "density_w_per_nm", dens)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.wavelength_nm[0]), float(self.wavelength_nm[-1])

    @property
    def total_power(self) -> float:
        return float(np.trapezoid(self.density_w_per_nm, self.wavelength_nm))

    def density(self, wavelength_nm):
        return np.interp(wavelength_nm, self.wavelength_nm, self.density_w_per_nm,
                         left=0.0, right=0.0)

    def scaled(self, factor: float) -> "SampledSpectrum":
        if factor < 0:
            raise DomainError("scale factor must be non-negative")
        return SampledSpectrum(self.wavelength_nm, self.density_w_per_nm * factor)

    def normalized(self, total_power: float = 1.0) -> "SampledSpectrum":
        tot = self.total_power
        if tot <= 0:
            raise DomainError("cannot normalize a spectrum with zero power")
        return self.scaled(total_power / tot)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["wavelength_nm", "density_w_per_nm"])
        for wl, d in zip(self.wavelength_nm, self.density_w_per_nm):
            writer.writerow([repr(float(wl)), repr(float(d))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SampledSpectrum":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [h.strip() for h in rows[0]] != ["wavelength_nm", "density_w_per_nm"]:
            raise ValueError("spectrum CSV needs header 'wavelength_nm,density_w_per_nm'")
        data = [(float(a), float(b)) for a, b in (r for r in rows[1:] if r)]
        if not data:
            raise DomainError("empty spectrum")
        wl, dens = zip(*data)
        return cls(np.array(wl), np.array(dens))

    @classmethod
    def load(cls, path: str | Path) -> "SampledSpectrum":
        return cls.from_csv(Path(path).read_text(encoding="utf-8"))


def integrate_spectrum(spectrum: SampledSpectrum, band: Sequence[float]) -> float:
    """Power in W inside ``band = (lo, hi)`` nm.

    Bands reaching past the sampled support are clamped with a warning.
    """
    lo, hi = float(band[0]), float(band[1])
    if hi < lo:
        raise DomainError(f"band must satisfy lo <= hi, got [{lo}, {hi}]")
    s_lo, s_hi = spectrum.support
    if lo < s_lo or hi > s_hi:
        warnings.warn(f"band [{lo}, {hi}] nm clamped to spectrum support [{s_lo}, {s_hi}] nm",
                      stacklevel=2)
        lo, hi = max(lo, s_lo), min(hi, s_hi)
        if hi <= lo:
            return 0.0
    if hi == lo:
        return 0.0
    wl = spectrum.wavelength_nm
    inner = (wl > lo) & (wl < hi)
    x = np.concatenate(([lo], wl[inner], [hi]))
    y = spectrum.density(x)
    return float(np.trapezoid(y, x))


def gaussian_spectrum(center_nm: float, fwhm_nm: float, total_power_w: float = 1.0,
                      step_nm: float = 0.01, half_span_fwhm: float = 4.0) -> SampledSpectrum:
    """Gaussian line sampled on a uniform grid and normalized to ``total_power_w``."""
    if fwhm_nm <= 0:
        raise DomainError("FWHM must be positive")
    sigma = fwhm_nm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    half = half_span_fwhm * fwhm_nm
    n = int(round(2 * half / step_nm)) + 1
    wl = np.linspace(center_nm - half, center_nm + half, n)
    if wl[0] <= 0:
        raise DomainError("Gaussian extends to non-positive wavelengths")
    dens = np.exp(-0.5 * ((wl - center_nm) / sigma) ** 2)
    return SampledSpectrum(wl, dens).normalized(total_power_w)


def read_two_column_csv(text: str, header: Iterable[str]) -> tuple[np.ndarray, np.ndarray]:
    header = list(header)
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != header:
        raise ValueError(f"CSV needs header {','.join(header)!r}")
    data = [(float(a), float(b)) for a, b in (r for r in rows[1:] if r)]
    if not data:
        raise ValueError("CSV has no data rows")
    a, b = zip(*data)
    return np.array(a), np.array(b)
