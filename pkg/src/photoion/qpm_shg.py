"""Quasi-phase-matched SHG in periodically poled crystals.

Dispersion is loaded from ``name=value`` files (see ``data/``).  Wavelengths
are vacuum wavelengths in nm, temperatures in °C.  Lengths inside formulas
are SI unless a function states otherwise.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from scipy import integrate, optimize

from .quantities import DomainError, constants, data_text, read_key_values

DEFAULT_DISPERSION = "ktp_z_fradkin_emanueli.txt"


class RangeError(DomainError):
    """Wavelength outside the validity range of a dispersion set."""


def _sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


@lru_cache(maxsize=None)
def sinc2_half_power_point() -> float:
    """Positive x with sinc²(x) = 1/2 (≈ 1.39156)."""
    return optimize.brentq(lambda x: math.sin(x) ** 2 / x**2 - 0.5, 1.0, 2.0, xtol=1e-15)


@dataclass(frozen=True)
class DispersionSet:
    """Sellmeier plus polynomial thermo-optic model for one crystal axis.

    n²(λ) = A + B/(1 − C/λ²) + D/(1 − E/λ²) − F·λ²  (λ in µm), and
    n(λ, T) = n(λ) + n1(λ)·ΔT + n2(λ)·ΔT², ΔT = T − t_ref, where
    n1 = Σ a_m/λ^m · 1e-6 and n2 = Σ b_m/λ^m · 1e-8.
    """

    id: str
    axis: str
    sellmeier: tuple[float, float, float, float, float, float]
    dndt1: tuple[float, ...]
    dndt2: tuple[float, ...]
    t_ref_c: float
    valid_range_nm: tuple[float, float]

    @classmethod
    def from_text(cls, text: str) -> "DispersionSet":
        kv = read_key_values(text)
        try:
            sell = tuple(float(kv[f"sellmeier_{k}"]) for k in "ABCDEF")
            d1 = tuple(float(kv[k]) for k in sorted(kv) if k.startswith("dndt1_"))
            d2 = tuple(float(kv[k]) for k in sorted(kv) if k.startswith("dndt2_"))
            out = cls(
                id=kv["id"], axis=kv["axis"], sellmeier=sell, dndt1=d1, dndt2=d2,
                t_ref_c=float(kv["t_ref_c"]),
                valid_range_nm=(float(kv["lambda_min_nm"]), float(kv["lambda_max_nm"])),
            )
        except KeyError as exc:
            raise ValueError(f"dispersion file missing key {exc.args[0]!r}") from None
        lo, hi = out.valid_range_nm
        if not 0 < lo < hi:
            raise ValueError(f"invalid validity range {out.valid_range_nm}")
        return out

    @classmethod
    def load(cls, path: str | Path) -> "DispersionSet":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def _check(self, wavelength_nm):
        lo, hi = self.valid_range_nm
        wl = np.asarray(wavelength_nm, dtype=float)
        if np.any(wl < lo) or np.any(wl > hi):
            raise RangeError(f"wavelength {wavelength_nm} nm outside valid range "
                             f"[{lo}, {hi}] nm of {self.id!r}")

    def index_at_reference(self, wavelength_nm):
        self._check(wavelength_nm)
        lam2 = (np.asarray(wavelength_nm, dtype=float) * 1e-3) ** 2
        a, b, c, d, e, f = self.sellmeier
        return np.sqrt(a + b / (1 - c / lam2) + d / (1 - e / lam2) - f * lam2)

    def thermo_optic(self, wavelength_nm, temperature_c):
        lam = np.asarray(wavelength_nm, dtype=float) * 1e-3
        dt = np.asarray(temperature_c, dtype=float) - self.t_ref_c
        n1 = sum(a / lam**m for m, a in enumerate(self.dndt1)) * 1e-6
        n2 = sum(b / lam**m for m, b in enumerate(self.dndt2)) * 1e-8
        return n1 * dt + n2 * dt**2

    def n(self, wavelength_nm, temperature_c):
        return self.index_at_reference(wavelength_nm) + self.thermo_optic(wavelength_nm, temperature_c)


@lru_cache(maxsize=None)
def default_dispersion() -> DispersionSet:
    return DispersionSet.from_text(data_text(DEFAULT_DISPERSION))


def refractive_index(d: DispersionSet, axis: str, wavelength_nm, temperature_c):
    if axis != d.axis:
        raise DomainError(f"dispersion set {d.id!r} covers axis {d.axis!r}, not {axis!r}")
    out = d.n(wavelength_nm, temperature_c)
    return float(out) if np.ndim(out) == 0 else out


def _check_order(order: int):
    if int(order) != order or order < 1 or order % 2 == 0:
        raise DomainError(f"QPM order must be a positive odd integer, got {order}")


def qpm_period(d: DispersionSet, pump_nm: float, temperature_c: float, order: int = 1) -> float:
    """First-order (or ``order``-th) poling period in µm for type-0 SHG."""
    _check_order(order)
    n_w = refractive_index(d, d.axis, pump_nm, temperature_c)
    n_2w = refractive_index(d, d.axis, pump_nm / 2, temperature_c)
    if n_2w <= n_w:
        raise DomainError(f"n(2ω)={n_2w:.6f} <= n(ω)={n_w:.6f}: no QPM solution")
    return order * (pump_nm * 1e-3) / (2.0 * (n_2w - n_w))


@dataclass(frozen=True)
class CrystalSpec:
    length_mm: float = 20.0
    poling_period_um: float = 4.05
    duty_cycle: float = 0.5
    qpm_order: int = 1
    d33_pm_per_v: float = 16.9
    absorption_2w_per_cm: float = 0.1
    dispersion: DispersionSet = field(default_factory=default_dispersion)

    def __post_init__(self):
        if not self.length_mm > 0:
            raise DomainError("crystal length must be positive")
        if not self.poling_period_um > 0:
            raise DomainError("poling period must be positive")
        if not 0 < self.duty_cycle < 1:
            raise DomainError("duty cycle must lie in (0, 1)")
        _check_order(self.qpm_order)
        if self.absorption_2w_per_cm < 0:
            raise DomainError("absorption coefficient must be non-negative")

    @property
    def d_eff_pm_per_v(self) -> float:
        m = self.qpm_order
        return 2.0 / (m * math.pi) * self.d33_pm_per_v * abs(math.sin(m * math.pi * self.duty_cycle))

    @property
    def grating_wavevector(self) -> float:
        """2π·order/Λ in 1/m."""
        return 2 * math.pi * self.qpm_order / (self.poling_period_um * 1e-6)


@dataclass(frozen=True)
class PumpBeam:
    wavelength_nm: float = 846.0
    power_mw: float = 119.0
    waist_um: float | None = None  # None: Boyd-Kleinman optimum for the crystal
    focus_position_mm: float | None = None  # None: crystal center
    linewidth_mhz: float = 3.5
    mode_count: Literal["single", "many"] = "single"

    def __post_init__(self):
        for name in ("wavelength_nm", "power_mw", "linewidth_mhz"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.waist_um is not None and not self.waist_um > 0:
            raise DomainError("waist must be positive")
        if self.focus_position_mm is not None and self.focus_position_mm < 0:
            raise DomainError("focus position must lie inside the crystal")
        if self.mode_count not in ("single", "many"):
            raise DomainError(f"mode_count must be 'single' or 'many', got {self.mode_count!r}")


def phase_mismatch(c: CrystalSpec, pump_nm: float, temperature_c):
    """Δk = 4π/λ·(n(2ω) − n(ω)) − 2π·order/Λ in 1/m; vectorized over temperature."""
    d = c.dispersion
    dn = d.n(pump_nm / 2, temperature_c) - d.n(pump_nm, temperature_c)
    out = 4 * math.pi / (pump_nm * 1e-9) * dn - c.grating_wavevector
    return float(out) if np.ndim(out) == 0 else out


def phase_matching_temperature(c: CrystalSpec, pump_nm: float,
                               t_range: Sequence[float] = (-20.0, 120.0)) -> float:
    lo, hi = float(t_range[0]), float(t_range[1])
    f_lo, f_hi = phase_mismatch(c, pump_nm, lo), phase_mismatch(c, pump_nm, hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise DomainError(f"no phase-matching temperature in [{lo}, {hi}] °C: "
                          f"Δk({lo})={f_lo:+.4g} 1/m and Δk({hi})={f_hi:+.4g} 1/m have the same sign")
    return optimize.brentq(lambda t: phase_mismatch(c, pump_nm, t), lo, hi, xtol=1e-12, rtol=1e-15)


@dataclass(frozen=True, eq=False)
class TuningCurve:
    temperature_c: np.ndarray
    normalized_power: np.ndarray
    peak_t_c: float
    fwhm_c: float
    half_width_low_c: float
    half_width_high_c: float

    @property
    def asymmetry_c(self) -> float:
        """High-side minus low-side half width."""
        return self.half_width_high_c - self.half_width_low_c

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["temperature_C", "normalized_power"])
        for t, p in zip(self.temperature_c, self.normalized_power):
            writer.writerow([f"{t:.6f}", f"{p:.9f}"])
        return buf.getvalue()


def _evaluate(fn, temps: np.ndarray, workers: int | None) -> np.ndarray:
    if not workers or workers <= 1 or temps.size < 2:
        return np.asarray(fn(temps), dtype=float)
    chunks = np.array_split(temps, min(workers, temps.size))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(fn, chunks))
    return np.concatenate(parts).astype(float)


def _bracket_root(g, a: float, b: float) -> float:
    return optimize.brentq(g, a, b, xtol=1e-12, rtol=1e-14)


def _finish_curve(response, temps, peak_t, workers, t_range):
    """Normalize ``response`` to its peak and locate the half-power points."""
    peak = float(response(np.array([peak_t]))[0])
    values = np.clip(_evaluate(response, temps, workers) / peak, 0.0, 1.0)
    single = lambda t: float(response(np.array([t]))[0]) / peak - 0.5  # noqa: E731
    lo, hi = float(t_range[0]), float(t_range[1])
    if single(lo) >= 0 or single(hi) >= 0:
        raise DomainError(f"temperature range [{lo}, {hi}] °C does not contain both half-power points")
    # walk outwards from the peak so side lobes are not mistaken for the edge
    step = (hi - lo) / 2000

    def edge(direction):
        t = peak_t
        while single(t + direction * step) >= 0:
            t += direction * step
        a, b = sorted((t, t + direction * step))
        return _bracket_root(single, a, b)

    t_low, t_high = edge(-1), edge(+1)
    return TuningCurve(temps, values, peak_t, t_high - t_low, peak_t - t_low, t_high - peak_t)


def planewave_tuning_curve(c: CrystalSpec, pump_nm: float, t_range: Sequence[float],
                           n_points: int = 401, workers: int | None = None) -> TuningCurve:
    """sinc²(Δk·L/2) temperature response for a collimated pump."""
    lo, hi = float(t_range[0]), float(t_range[1])
    peak_t = phase_matching_temperature(c, pump_nm, (lo, hi))
    half_l = c.length_mm * 1e-3 / 2

    def response(t):
        return _sinc(phase_mismatch(c, pump_nm, np.asarray(t)) * half_l) ** 2

    temps = np.linspace(lo, hi, n_points)
    values = _evaluate(response, temps, workers)
    # half-power points are analytic in Δk
    x = sinc2_half_power_point() / half_l
    dk = lambda target: (lambda t: phase_mismatch(c, pump_nm, t) - target)  # noqa: E731
    slope = np.sign(phase_mismatch(c, pump_nm, hi) - phase_mismatch(c, pump_nm, lo))
    if dk(-slope * x)(lo) * slope > 0 or dk(slope * x)(hi) * slope < 0:
        raise DomainError(f"temperature range [{lo}, {hi}] °C does not contain both half-power points")
    t_a = _bracket_root(dk(-slope * x), lo, peak_t)
    t_b = _bracket_root(dk(+slope * x), peak_t, hi)
    return TuningCurve(temps, values, peak_t, t_b - t_a, peak_t - t_a, t_b - peak_t)


def far_field_divergence(c: CrystalSpec, pump: PumpBeam, temperature_c: float) -> float:
    """Internal 1/e² half-angle divergence of the pump, radians."""
    n_w = c.dispersion.n(pump.wavelength_nm, temperature_c)
    waist = pump.waist_um if pump.waist_um is not None else optimal_waist_um(c, pump.wavelength_nm, temperature_c)
    return pump.wavelength_nm * 1e-9 / (math.pi * n_w * waist * 1e-6)


# Grid in x = 2θ²/θ0² for the exponential weight of a 2-D Gaussian angular spectrum.
_ANGLE_X = np.linspace(0.0, 40.0, 4001)
_ANGLE_W = np.exp(-_ANGLE_X)
_ANGLE_W /= np.trapezoid(_ANGLE_W, _ANGLE_X)


def focused_tuning_curve(c: CrystalSpec, pump: PumpBeam, t_range: Sequence[float],
                         n_points: int = 401, workers: int | None = None) -> TuningCurve:
    """Temperature response averaged over the pump's angular spectrum.

    A pump component tilted by θ sees the grating projected on its axis,
    Δk(T, θ) ≈ Δk(T) − (2π·order/Λ)·θ²/2.  Its weight follows the Gaussian
    far field exp(−2θ²/θ0²) over the 2-D angle plane.  Every tilt shifts
    Δk the same way, which is what skews the curve.
    """
    lo, hi = float(t_range[0]), float(t_range[1])
    t_pm = phase_matching_temperature(c, pump.wavelength_nm, (lo, hi))
    theta0 = far_field_divergence(c, pump, t_pm)
    half_l = c.length_mm * 1e-3 / 2
    shifts = c.grating_wavevector * (theta0**2 * _ANGLE_X / 2) / 2

    def response(t):
        dk = np.atleast_1d(phase_mismatch(c, pump.wavelength_nm, np.asarray(t, dtype=float)))
        arg = (dk[:, None] - shifts[None, :]) * half_l
        return np.trapezoid(_sinc(arg) ** 2 * _ANGLE_W[None, :], _ANGLE_X, axis=1)

    temps = np.linspace(lo, hi, n_points)
    coarse = _evaluate(response, temps, workers)
    i = int(np.argmax(coarse))
    a, b = temps[max(i - 1, 0)], temps[min(i + 1, temps.size - 1)]
    res = optimize.minimize_scalar(lambda t: -float(response(np.array([t]))[0]),
                                   bounds=(a, b), method="bounded", options={"xatol": 1e-10})
    return _finish_curve(response, temps, float(res.x), workers, (lo, hi))


# ---------------------------------------------------------------------------
# Boyd-Kleinman focusing
# ---------------------------------------------------------------------------

def _bk_integral(sigma: float, xi: float, mu: float) -> complex:
    a, b = -xi * (1 - mu), xi * (1 + mu)
    re = integrate.quad(lambda t: (math.cos(sigma * t) + t * math.sin(sigma * t)) / (1 + t * t),
                        a, b, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    if mu == 0:
        return complex(re, 0.0)
    im = integrate.quad(lambda t: (math.sin(sigma * t) - t * math.cos(sigma * t)) / (1 + t * t),
                        a, b, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    return complex(re, im)


def boyd_kleinman_h_sigma(sigma: float, xi: float, mu: float = 0.0) -> float:
    """Focusing factor at fixed phase parameter σ, no walk-off."""
    return abs(_bk_integral(sigma, xi, mu)) ** 2 / (4 * xi)


def boyd_kleinman_h(xi: float, mu: float = 0.0, return_sigma: bool = False):
    """Boyd-Kleinman focusing factor h(ξ), maximized over the phase parameter σ.

    ``mu`` is the focus offset from the crystal center in units of L/2
    (0 = centered).  No walk-off (QPM along a principal axis).
    """
    if not xi > 0:
        raise DomainError(f"focusing parameter must be positive, got {xi}")
    if not -1 <= mu <= 1:
        raise DomainError(f"focus offset mu must lie in [-1, 1], got {mu}")
    grid = np.linspace(-0.5, 4.0, 91)
    vals = [boyd_kleinman_h_sigma(s, xi, mu) for s in grid]
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(lambda s: -boyd_kleinman_h_sigma(s, xi, mu), bounds=(a, b),
                                   method="bounded", options={"xatol": 1e-9})
    h, sigma = -float(res.fun), float(res.x)
    if vals[i] > h:
        h, sigma = vals[i], float(grid[i])
    return (h, sigma) if return_sigma else h


@lru_cache(maxsize=None)
def optimal_focusing(bounds: tuple[float, float] = (0.1, 20.0)) -> tuple[float, float]:
    """(ξ*, h*) maximizing the centered-focus factor."""
    res = optimize.minimize_scalar(lambda x: -boyd_kleinman_h(x), bounds=bounds,
                                   method="bounded", options={"xatol": 1e-7})
    return float(res.x), -float(res.fun)


def focusing_parameter(c: CrystalSpec, pump_nm: float, waist_um: float, temperature_c: float) -> float:
    """ξ = L/b with confocal parameter b = 2π·n·w0²/λ inside the crystal."""
    n_w = c.dispersion.n(pump_nm, temperature_c)
    b = 2 * math.pi * n_w * (waist_um * 1e-6) ** 2 / (pump_nm * 1e-9)
    return c.length_mm * 1e-3 / b


def optimal_waist_um(c: CrystalSpec, pump_nm: float, temperature_c: float) -> float:
    xi_opt, _ = optimal_focusing()
    n_w = c.dispersion.n(pump_nm, temperature_c)
    b = c.length_mm * 1e-3 / xi_opt
    return math.sqrt(b * pump_nm * 1e-9 / (2 * math.pi * n_w)) * 1e6


def shg_power(c: CrystalSpec, pump: PumpBeam, temperature_c: float | None = None,
              length_unit_m: float = 1.0) -> float:
    """Undepleted-pump SHG power in mW.

    P(2ω) = 16π²·d_eff²·L·P(ω)²·h(ξ, μ) / (ε0·c·λ³·n(ω)·n(2ω)) · exp(−αL/2) · M

    with M = 2 for a many-mode pump.  ``length_unit_m`` selects the length
    unit used internally (1.0 for metres, 1e-3 for millimetres); the result
    does not depend on it.
    """
    if temperature_c is None:
        temperature_c = phase_matching_temperature(c, pump.wavelength_nm)
    else:
        phase_mismatch(c, pump.wavelength_nm, temperature_c)
    k = constants()
    s = length_unit_m
    d = c.dispersion
    n_w = float(d.n(pump.wavelength_nm, temperature_c))
    n_2w = float(d.n(pump.wavelength_nm / 2, temperature_c))
    waist = pump.waist_um if pump.waist_um is not None else optimal_waist_um(c, pump.wavelength_nm, temperature_c)
    xi = focusing_parameter(c, pump.wavelength_nm, waist, temperature_c)
    focus = c.length_mm / 2 if pump.focus_position_mm is None else pump.focus_position_mm
    if focus > c.length_mm:
        raise DomainError("focus position must lie inside the crystal")
    mu = (c.length_mm - 2 * focus) / c.length_mm
    h = boyd_kleinman_h(xi, mu)

    # quantities expressed in the chosen length unit
    d_eff = c.d_eff_pm_per_v * 1e-12 / s
    length = c.length_mm * 1e-3 / s
    lam = pump.wavelength_nm * 1e-9 / s
    eps0 = k.epsilon_0 * s
    light = k.c / s
    p_w = pump.power_mw * 1e-3
    alpha = c.absorption_2w_per_cm * 1e2 * s

    p_2w = (16 * math.pi**2 * d_eff**2 * length * p_w**2 * h
            / (eps0 * light * lam**3 * n_w * n_2w))
    p_2w *= math.exp(-alpha * length / 2)
    p_2w *= 2.0 if pump.mode_count == "many" else 1.0
    return p_2w * 1e3


def normalized_efficiency(pump_w: float, shg_w: float, length_cm: float) -> float:
    """η = P(2ω) / (P(ω)²·L) in 1/(W·cm)."""
    if pump_w <= 0:
        raise DomainError("pump power must be positive")
    if shg_w < 0 or length_cm <= 0:
        raise DomainError("SHG power must be non-negative and length positive")
    return shg_w / (pump_w**2 * length_cm)


def with_period(c: CrystalSpec, period_um: float) -> CrystalSpec:
    return replace(c, poling_period_um=period_um)
