"""Paraxial imaging, collection and delivery budgets for extended sources.

Lengths are in mm unless a name says otherwise (``_um`` for µm).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy import integrate

from .quantities import DomainError, data_text, read_two_column_csv

# transmittance of the lens pair + viewport in the UV band, and of the 423 nm path
FITTED_UV_NONFIBER_TRANSMITTANCE = 0.952
FITTED_BLUE_PATH_TRANSMITTANCE = 0.78
DEFAULT_PATTERN_FILE = "led_angular_pattern.csv"


@dataclass(frozen=True)
class OpticalElement:
    kind: Literal["thin_lens", "free_space", "aperture", "flat_window"]
    value: float  # f for lenses, d for free space, diameter for apertures, thickness for windows
    transmittance: float = 1.0
    index: float = 1.5  # flat windows only

    def __post_init__(self):
        if self.kind not in ("thin_lens", "free_space", "aperture", "flat_window"):
            raise DomainError(f"unknown element kind {self.kind!r}")
        if self.kind == "thin_lens" and self.value == 0:
            raise DomainError("thin lens focal length must be non-zero")
        if self.kind in ("free_space", "flat_window") and self.value < 0:
            raise DomainError(f"{self.kind} length must be non-negative")
        if self.kind == "aperture" and self.value <= 0:
            raise DomainError("aperture diameter must be positive")
        if not 0 < self.transmittance <= 1:
            raise DomainError("transmittance must lie in (0, 1]")
        if self.index < 1:
            raise DomainError("window index must be >= 1")

    def matrix(self) -> np.ndarray:
        if self.kind == "thin_lens":
            return np.array([[1.0, 0.0], [-1.0 / self.value, 1.0]])
        if self.kind == "free_space":
            return np.array([[1.0, self.value], [0.0, 1.0]])
        if self.kind == "flat_window":
            # reduced thickness; entry and exit media are the same
            return np.array([[1.0, self.value / self.index], [0.0, 1.0]])
        return np.eye(2)


def thin_lens(f: float, transmittance: float = 1.0) -> OpticalElement:
    return OpticalElement("thin_lens", f, transmittance)


def free_space(d: float) -> OpticalElement:
    return OpticalElement("free_space", d)


@dataclass(frozen=True)
class ImagingTrain:
    elements: tuple[OpticalElement, ...]
    aberration_factor: float = 1.0  # actual / geometric spot size

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.aberration_factor < 1:
            raise DomainError("aberration factor must be >= 1")

    @property
    def transmittance(self) -> float:
        return math.prod(e.transmittance for e in self.elements)


def abcd_compose(train: ImagingTrain | Sequence[OpticalElement]) -> np.ndarray:
    """Ray matrix of the train; the first element is met first."""
    elements = train.elements if isinstance(train, ImagingTrain) else tuple(train)
    if not elements:
        raise DomainError("empty optical train")
    m = np.eye(2)
    for e in elements:
        m = e.matrix() @ m
    if not np.all(np.isfinite(m)):
        raise DomainError("composite ray matrix is not finite")
    return m


def two_lens_relay(f1: float, f2: float, gap: float | None = None, aberration_factor: float = 1.0,
                   transmittance: float = 1.0) -> ImagingTrain:
    """Source at the front focus of f1, then f2 after ``gap`` (default f1 + f2)."""
    gap = f1 + f2 if gap is None else gap
    return ImagingTrain((free_space(f1), thin_lens(f1, transmittance), free_space(gap),
                         thin_lens(f2, transmittance)), aberration_factor)


@dataclass(frozen=True)
class SourcePatch:
    size_mm: float
    angular_model: Literal["lambertian", "uniform_cone", "tabulated"] = "lambertian"
    total_power_mw: float = 1.0
    polarized_fraction: float = 1.0
    cone_half_angle: float = math.pi / 2  # uniform_cone only, radians
    pattern_deg: tuple[tuple[float, float], ...] = ()  # tabulated only

    def __post_init__(self):
        if not self.size_mm > 0:
            raise DomainError("source size must be positive")
        if self.total_power_mw < 0:
            raise DomainError("source power must be non-negative")
        if not 0 < self.polarized_fraction <= 1:
            raise DomainError("polarized fraction must lie in (0, 1]")
        if self.angular_model == "uniform_cone" and not 0 < self.cone_half_angle <= math.pi / 2:
            raise DomainError("uniform cone half angle must lie in (0, π/2]")
        if self.angular_model == "tabulated":
            if len(self.pattern_deg) < 2:
                raise DomainError("tabulated pattern needs at least two points")
            ang = np.array([p[0] for p in self.pattern_deg])
            rel = np.array([p[1] for p in self.pattern_deg])
            if np.any(np.diff(ang) <= 0) or ang[0] < 0 or ang[-1] > 90:
                raise DomainError("pattern angles must increase within [0, 90] degrees")
            if np.any(rel < 0):
                raise DomainError("pattern intensities must be non-negative")
            peak = rel.max()
            if peak <= 0:
                raise DomainError("pattern is identically zero")
            object.__setattr__(self, "pattern_deg",
                               tuple((float(a), float(r / peak)) for a, r in zip(ang, rel)))
        elif self.angular_model not in ("lambertian", "uniform_cone"):
            raise DomainError(f"unknown angular model {self.angular_model!r}")


def load_angular_pattern(path: str | Path | None = None) -> tuple[tuple[float, float], ...]:
    text = data_text(DEFAULT_PATTERN_FILE) if path is None else Path(path).read_text(encoding="utf-8")
    ang, rel = read_two_column_csv(text, ("angle_deg", "relative_intensity"))
    return tuple(zip(ang.tolist(), rel.tolist()))


# --- collection cone helpers ------------------------------------------------

def half_angle_from_na(na: float) -> float:
    if not 0 < na < 1:
        raise DomainError("numerical aperture must lie in (0, 1)")
    return math.asin(na)


def half_angle_from_aperture(diameter: float, distance: float) -> float:
    if diameter <= 0 or distance <= 0:
        raise DomainError("aperture diameter and distance must be positive")
    return math.atan(diameter / 2 / distance)


def half_angle_from_solid_angle_fraction(fraction: float) -> float:
    """Cone half-angle whose solid angle is ``fraction`` × 2π."""
    if not 0 < fraction < 1:
        raise DomainError("solid-angle fraction must lie in (0, 1)")
    return math.acos(1 - fraction)


def _cone_fraction(src: SourcePatch, theta: float) -> float:
    if src.angular_model == "lambertian":
        return math.sin(theta) ** 2
    if src.angular_model == "uniform_cone":
        a = src.cone_half_angle
        return min(1.0, (1 - math.cos(theta)) / (1 - math.cos(a)))
    ang = np.radians([p[0] for p in src.pattern_deg])
    rel = np.array([p[1] for p in src.pattern_deg])

    def radiant(t):
        return np.interp(t, ang, rel, left=rel[0], right=0.0) * math.sin(t)

    breaks = [a for a in ang if 0 < a < math.pi / 2]
    total = integrate.quad(radiant, 0, math.pi / 2, points=breaks, limit=500, epsabs=0, epsrel=1e-12)[0]
    inside = integrate.quad(radiant, 0, theta, points=[b for b in breaks if b < theta] or None,
                            limit=500, epsabs=0, epsrel=1e-12)[0]
    return inside / total


@dataclass(frozen=True)
class Collection:
    half_angle: float
    solid_angle_fraction: float  # of 2π
    angular_fraction: float  # share of emitted power inside the cone
    power_fraction: float  # angular_fraction × polarized_fraction
    collected_power_mw: float


def collection_fraction(src: SourcePatch, half_angle: float) -> Collection:
    """Share of the source output collected by a cone of ``half_angle`` (rad)."""
    if not half_angle > 0:
        raise DomainError("collection half angle must be positive")
    if half_angle >= math.pi / 2:
        raise DomainError("collection half angle must be below π/2")
    ang = _cone_fraction(src, half_angle)
    power = ang * src.polarized_fraction
    return Collection(half_angle, 1 - math.cos(half_angle), ang, power, power * src.total_power_mw)


@dataclass(frozen=True)
class ImageResult:
    magnification: float  # |A| at the image plane
    signed_magnification: float
    image_distance_mm: float
    geometric_size_um: float
    size_um: float  # including the train's aberration factor
    image_na: float | None = None


def image_extended_source(src: SourcePatch, train: ImagingTrain, object_na: float | None = None,
                          max_distance_mm: float = 1e5) -> ImageResult:
    """Locate the image plane behind the train and size the geometric image."""
    m = abcd_compose(train)
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    if d == 0:
        raise DomainError("train images the source to infinity (D = 0)")
    dist = -b / d
    if abs(dist) < 1e-12 * max(1.0, abs(b)):
        dist = 0.0
    if dist < 0 or dist > max_distance_mm:
        raise DomainError(f"no real image plane within [0, {max_distance_mm}] mm "
                          f"(conjugate at {dist:.6g} mm)")
    mag = a + dist * c
    size = src.size_mm * 1e3 * abs(mag)
    image_na = None
    if object_na is not None:
        image_na = object_na / abs(mag)
    return ImageResult(abs(mag), mag, dist, size, size * train.aberration_factor, image_na)


@dataclass(frozen=True)
class FiberSpec:
    core_diameter_um: float = 200.0
    numerical_aperture: float = 0.22
    length_m: float = 2.0
    transmittance: float = 0.75

    def __post_init__(self):
        if not self.core_diameter_um > 0:
            raise DomainError("core diameter must be positive")
        if not 0 < self.numerical_aperture < 1:
            raise DomainError("fiber NA must lie in (0, 1)")
        if not 0 < self.transmittance <= 1:
            raise DomainError("fiber transmittance must lie in (0, 1]")


def fiber_coupling_feasible(image_size_um: float, converging_na: float,
                            fiber: FiberSpec) -> tuple[bool, float]:
    """(feasible, étendue ratio) for a spot of ``image_size_um`` converging at ``converging_na``."""
    if image_size_um <= 0 or converging_na <= 0:
        raise DomainError("image size and NA must be positive")
    feasible = image_size_um <= fiber.core_diameter_um and converging_na <= fiber.numerical_aperture
    ratio = (image_size_um * converging_na) ** 2 / (fiber.core_diameter_um * fiber.numerical_aperture) ** 2
    return feasible, ratio


def transmission_budget(p_in: float, chain: Iterable[float] = ()) -> float:
    """Power after a chain of transmittances (same unit as ``p_in``)."""
    out = float(p_in)
    for t in chain:
        if not 0 < t <= 1:
            raise DomainError(f"transmittance {t} outside (0, 1]")
        out *= t
    return out


def intensity_at_spot(power_uw: float, spot_diameter_um: float) -> float:
    """Flat-top intensity in mW/mm²."""
    if power_uw < 0 or spot_diameter_um <= 0:
        raise DomainError("power must be non-negative and spot diameter positive")
    area_mm2 = math.pi * (spot_diameter_um * 1e-3 / 2) ** 2
    return power_uw * 1e-3 / area_mm2


def spot_area_mm2(diameter_um: float) -> float:
    return math.pi * (diameter_um * 1e-3 / 2) ** 2


def beam_collimation_half_angle(orifice_diameter_mm: float, distance_mm: float) -> float:
    if orifice_diameter_mm <= 0 or distance_mm <= 0:
        raise DomainError("orifice diameter and distance must be positive")
    return math.atan(orifice_diameter_mm / 2 / distance_mm)


@lru_cache(maxsize=None)
def default_pattern() -> tuple[tuple[float, float], ...]:
    return load_angular_pattern()
