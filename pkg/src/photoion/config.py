"""Run configuration: one YAML document with a section per subsystem.

Unknown keys are rejected and every section is checked against the
invariants of the object it builds, so a config that loads is usable.
"""
from __future__ import annotations

import math
from importlib import resources
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import beam_optics as bo
from .ion_physics import LoadingScenario, RydbergSeries, TransitionSpec
from .led_model import LedSpec
from .qpm_shg import CrystalSpec, DispersionSet, PumpBeam, default_dispersion
from .quantities import DomainError
from .quantum_jumps import IonLevelScheme, SpotGeometry

DEFAULTS_FILE = "defaults.yaml"


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CrystalConfig(_Section):
    length_mm: float
    poling_period_um: float
    duty_cycle: float
    qpm_order: int
    d33_pm_per_v: float
    absorption_2w_per_cm: float
    dispersion_file: str | None = None


class PumpConfig(_Section):
    wavelength_nm: float
    power_mw: float
    waist_um: float | None = None
    focus_position_mm: float | None = None
    linewidth_mhz: float
    mode_count: Literal["single", "many"]


class ShgMeasuredConfig(_Section):
    shg_power_uw: float
    peak_temperature_c: float
    fwhm_c: float
    efficiency_percent_per_w_cm: float


class TuneConfig(_Section):
    t_min_c: float
    t_max_c: float
    n_points: int = Field(gt=2)
    focused_waist_um: float


class ElementConfig(_Section):
    kind: Literal["thin_lens", "free_space", "aperture", "flat_window"]
    value: float
    transmittance: float = 1.0


class TrainConfig(_Section):
    elements: list[ElementConfig]
    aberration_factor: float = 1.0
    object_na: float | None = None


class SourceConfig(_Section):
    size_mm: float
    total_power_mw: float
    polarized_fraction: float
    angular_model: Literal["lambertian", "uniform_cone", "tabulated"]
    cone_half_angle_deg: float = 90.0
    pattern_file: str | None = None


class FiberConfig(_Section):
    core_diameter_um: float
    numerical_aperture: float
    length_m: float
    transmittance: float


class OpticsConfig(_Section):
    source: SourceConfig
    collection_solid_angle_fraction: float
    trains: dict[str, TrainConfig]
    fiber: FiberConfig
    uv_nonfiber_transmittance: float
    blue_path_transmittance: float
    spot_diameter_um: float
    orifice_diameter_mm: float
    orifice_distance_mm: float


class LedConfig(_Section):
    center_nm: float
    fwhm_nm: float
    spectrum_file: str | None = None
    band_nm: tuple[float, float]
    ionization_threshold_nm: float

    @model_validator(mode="after")
    def _band_order(self):
        if not self.band_nm[0] < self.band_nm[1]:
            raise ValueError("band_nm must be increasing")
        return self


class LoadingConfig(_Section):
    atom_flux_per_s: float
    interaction_length_um: float
    mean_atom_speed_m_s: float
    ionization_rate_per_s: float


class IonConfig(_Section):
    wavelength_nm: float
    linewidth_mhz: float
    saturation_intensity_mw_mm2: float
    intensity_mw_mm2: float
    doppler_fwhm_mhz: float = 0.0
    series_limit_nm: float
    quantum_defect: float
    rydberg_n: int
    loading: LoadingConfig


class JumpsConfig(_Section):
    wavelength_sp_nm: float
    oscillator_strength: float
    branching_d52: float
    tau_d52_s: float
    tau_p_ns: float
    spot_diameter_um: float
    rate_qj_hz: float
    simulate_duration_s: float
    resonant_power_w: float
    effective_bandwidth_nm: float


class RunConfig(_Section):
    seed: int
    crystal: CrystalConfig
    pump: PumpConfig
    shg_measured: ShgMeasuredConfig
    tune: TuneConfig
    optics: OpticsConfig
    led: LedConfig
    ion: IonConfig
    jumps: JumpsConfig

    # -- builders ---------------------------------------------------------

    def dispersion(self) -> DispersionSet:
        if self.crystal.dispersion_file is None:
            return default_dispersion()
        return DispersionSet.load(self.crystal.dispersion_file)

    def crystal_spec(self) -> CrystalSpec:
        c = self.crystal
        return CrystalSpec(c.length_mm, c.poling_period_um, c.duty_cycle, c.qpm_order,
                           c.d33_pm_per_v, c.absorption_2w_per_cm, self.dispersion())

    def pump_beam(self, **overrides) -> PumpBeam:
        return PumpBeam(**{**self.pump.model_dump(), **overrides})

    def train(self, name: str) -> bo.ImagingTrain:
        try:
            t = self.optics.trains[name]
        except KeyError:
            raise ConfigError(f"optics.trains.{name}", "no such train") from None
        return bo.ImagingTrain(tuple(bo.OpticalElement(e.kind, e.value, e.transmittance) for e in t.elements),
                               t.aberration_factor)

    def source(self) -> bo.SourcePatch:
        s = self.optics.source
        pattern = ()
        if s.angular_model == "tabulated":
            pattern = bo.default_pattern() if s.pattern_file is None else bo.load_angular_pattern(s.pattern_file)
        return bo.SourcePatch(s.size_mm, s.angular_model, s.total_power_mw, s.polarized_fraction,
                              math.radians(s.cone_half_angle_deg), pattern)

    def fiber(self) -> bo.FiberSpec:
        return bo.FiberSpec(**self.optics.fiber.model_dump())

    def led_spec(self, total_power_uw: float) -> LedSpec:
        if self.led.spectrum_file is not None:
            return LedSpec.from_csv(self.led.spectrum_file, total_power_uw)
        return LedSpec(total_power_uw, self.led.center_nm, self.led.fwhm_nm)

    def transition(self) -> TransitionSpec:
        i = self.ion
        return TransitionSpec(i.wavelength_nm, i.linewidth_mhz, i.saturation_intensity_mw_mm2)

    def rydberg(self) -> RydbergSeries:
        return RydbergSeries(1e7 / self.ion.series_limit_nm, self.ion.quantum_defect)

    def loading(self) -> LoadingScenario:
        return LoadingScenario(**self.ion.loading.model_dump())

    def ion_scheme(self) -> IonLevelScheme:
        j = self.jumps
        return IonLevelScheme(j.wavelength_sp_nm, j.oscillator_strength, j.branching_d52,
                              j.tau_d52_s, j.tau_p_ns)

    def spot(self) -> SpotGeometry:
        return SpotGeometry(self.jumps.spot_diameter_um)

    def check_physics(self) -> None:
        """Build every object once; domain violations become ConfigErrors."""
        checks = {
            "crystal": self.crystal_spec,
            "pump": self.pump_beam,
            "optics.source": self.source,
            "optics.fiber": self.fiber,
            "led": lambda: self.led_spec(1.0),
            "ion": lambda: (self.transition(), self.rydberg()),
            "ion.loading": self.loading,
            "jumps": lambda: (self.ion_scheme(), self.spot()),
        }
        for name in self.optics.trains:
            checks[f"optics.trains.{name}"] = lambda name=name: self.train(name)
        for key, build in checks.items():
            try:
                build()
            except DomainError as exc:
                raise ConfigError(key, str(exc)) from None
        for key, value in (("optics.uv_nonfiber_transmittance", self.optics.uv_nonfiber_transmittance),
                           ("optics.blue_path_transmittance", self.optics.blue_path_transmittance)):
            if not 0 < value <= 1:
                raise ConfigError(key, "transmittance must lie in (0, 1]")
        if not 0 < self.optics.collection_solid_angle_fraction < 1:
            raise ConfigError("optics.collection_solid_angle_fraction", "must lie in (0, 1)")
        if self.jumps.effective_bandwidth_nm <= 0:
            raise ConfigError("jumps.effective_bandwidth_nm", "must be positive")

    def dump(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False, allow_unicode=True)


def _format_validation(exc: ValidationError) -> ConfigError:
    err = exc.errors()[0]
    key = ".".join(str(p) for p in err["loc"]) or "<root>"
    return ConfigError(key, err["msg"])


def parse_config(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"invalid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a mapping")
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise _format_validation(exc) from None
    cfg.check_physics()
    return cfg


def defaults_text() -> str:
    return resources.files("photoion.data").joinpath(DEFAULTS_FILE).read_text(encoding="utf-8")


def load_config(path: str | Path | None = None) -> RunConfig:
    text = defaults_text() if path is None else Path(path).read_text(encoding="utf-8")
    return parse_config(text)
