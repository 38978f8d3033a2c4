"""Comparison table of computed values against the experiment's printed numbers."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from . import beam_optics as bo
from . import ion_physics as ip
from . import led_model as lm
from . import qpm_shg as shg
from . import quantum_jumps as qj
from .config import RunConfig


@dataclass(frozen=True)
class Row:
    quantity: str
    unit: str
    reported: str
    computed: float
    check: str  # human-readable tolerance
    passed: bool | None  # None for informational rows
    provenance: str  # first-principles | fitted-default | informational
    reference: float | None = None

    @property
    def relative_deviation(self) -> float | None:
        if self.reference in (None, 0):
            return None
        return (self.computed - self.reference) / self.reference

    @property
    def status(self) -> str:
        return {True: "ok", False: "FAIL", None: "info"}[self.passed]


def _rel(quantity, unit, reported, computed, reference, tol, provenance="first-principles"):
    ok = abs(computed - reference) <= tol * abs(reference)
    return Row(quantity, unit, reported, computed, f"±{tol:.1%} of {reference:g}", ok, provenance, reference)


def _abs(quantity, unit, reported, computed, reference, tol, provenance="first-principles"):
    ok = abs(computed - reference) <= tol
    return Row(quantity, unit, reported, computed, f"{reference:g} ± {tol:g}", ok, provenance, reference)


def _range(quantity, unit, reported, computed, lo, hi, provenance="first-principles", reference=None):
    return Row(quantity, unit, reported, computed, f"in [{lo:g}, {hi:g}]", lo <= computed <= hi,
               provenance, reference)


def _info(quantity, unit, reported, computed, reference=None, note="not gated"):
    return Row(quantity, unit, reported, computed, note, None, "informational", reference)


def build_report(cfg: RunConfig) -> list[Row]:
    rows: list[Row] = []
    lam = cfg.pump.wavelength_nm
    crystal = cfg.crystal_spec()
    disp = crystal.dispersion

    # SHG
    period = shg.qpm_period(disp, lam, 20.0, cfg.crystal.qpm_order)
    rows.append(_rel("QPM period at 846 nm, 20 °C", "µm", "4.05", period, 4.05, 0.02))
    t_pm = shg.phase_matching_temperature(crystal, lam)
    rows.append(_range("phase-matching temperature", "°C", "19.9 (sample)", t_pm, 0.0, 50.0,
                       reference=cfg.shg_measured.peak_temperature_c))
    m = cfg.shg_measured
    eta = shg.normalized_efficiency(cfg.pump.power_mw * 1e-3, m.shg_power_uw * 1e-6, crystal.length_mm / 10)
    rows.append(_rel("measured normalized efficiency", "%/(W·cm)", "1.11", eta * 100,
                     m.efficiency_percent_per_w_cm, 0.005))
    pump = cfg.pump_beam()
    p_ideal = shg.shg_power(crystal, pump, t_pm)
    eta_ideal = shg.normalized_efficiency(pump.power_mw * 1e-3, p_ideal * 1e-3, crystal.length_mm / 10)
    rows.append(_range("ideal / measured efficiency", "", "> 1 (poling, beam shape)", eta_ideal / eta, 1.0, 10.0))
    xi, h = shg.optimal_focusing()
    rows.append(_abs("Boyd-Kleinman optimal ξ", "", "Boyd-Kleinman theory", xi, 2.84, 0.02))
    rows.append(_abs("Boyd-Kleinman h(ξ*)", "", "Boyd-Kleinman theory", h, 1.068, 0.005))
    t = cfg.tune
    curve = shg.planewave_tuning_curve(crystal, lam, (t.t_min_c, t.t_max_c), t.n_points)
    rows.append(_range("plane-wave tuning FWHM", "°C", "1.4 (measured)", curve.fwhm_c, 0.5, 3.0,
                       reference=m.fwhm_c))
    focused = shg.focused_tuning_curve(crystal, cfg.pump_beam(waist_um=t.focused_waist_um),
                                       (t.t_min_c, t.t_max_c), t.n_points)
    analytic = np.sinc(shg.phase_mismatch(crystal, lam, curve.temperature_c) * crystal.length_mm * 5e-4
                       / np.pi) ** 2
    rows.append(_abs("plane-wave curve vs analytic sinc²", "", "sinc² law",
                     float(np.max(np.abs(curve.normalized_power - analytic))), 0.0, 1e-9))
    collimated = shg.focused_tuning_curve(crystal, cfg.pump_beam(waist_um=1e6), (t.t_min_c, t.t_max_c),
                                          t.n_points)
    rows.append(_abs("collimated focused curve vs plane wave", "", "sinc² law",
                     float(np.max(np.abs(collimated.normalized_power - curve.normalized_power))), 0.0, 1e-3))
    rows.append(Row("focused-curve half-width asymmetry", "°C", "asymmetric",
                    focused.asymmetry_c, "non-zero", focused.asymmetry_c != 0, "first-principles"))

    # optics
    src = cfg.source()
    relay = bo.image_extended_source(src, cfg.train("led_relay"))
    rows.append(_abs("LED relay magnification", "", "≈1/5", relay.magnification, 0.2, 1e-12))
    rows.append(_abs("LED relay geometric image", "µm", "215 (with aberrations)", relay.geometric_size_um,
                     200.0, 1e-9))
    fiber_img = bo.image_extended_source(src, cfg.train("fiber_relay"))
    rows.append(_abs("fiber relay magnification", "", "one-to-one", fiber_img.magnification, 1.0, 1e-12))
    cone = bo.half_angle_from_solid_angle_fraction(cfg.optics.collection_solid_angle_fraction)
    coll = bo.collection_fraction(src, cone)
    collected_uw = coll.collected_power_mw * 1e3
    rows.append(_rel("collected LED power", "µW", "210", collected_uw, 210.0, 0.01, "fitted-default"))
    fiber = cfg.fiber()
    at_trap = bo.transmission_budget(collected_uw, [fiber.transmittance, cfg.optics.uv_nonfiber_transmittance])
    rows.append(_rel("LED power 365-391 nm at trap", "µW", "≈150", at_trap, 150.0, 0.10, "fitted-default"))
    spot = cfg.optics.spot_diameter_um
    i_uv = bo.intensity_at_spot(150.0, spot)
    rows.append(_rel("intensity of 150 µW on 250 µm", "mW/mm²", "≈3", i_uv, 3.06, 0.02))
    blue = bo.transmission_budget(m.shg_power_uw, [cfg.optics.blue_path_transmittance])
    i_blue = bo.intensity_at_spot(blue, spot)
    rows.append(_rel("423 nm intensity at trap", "mW/mm²", "≈5", i_blue, 5.0, 0.05, "fitted-default"))
    rows.append(_info("oven beam collimation half-angle", "mrad", "1 mm at 19.8 mm",
                      1e3 * bo.beam_collimation_half_angle(cfg.optics.orifice_diameter_mm,
                                                           cfg.optics.orifice_distance_mm)))

    # LED spectrum
    led = cfg.led_spec(at_trap)
    band = cfg.led.band_nm
    frac = lm.band_fraction(led, band)
    rows.append(_info("LED fraction in 365-391 nm", "", "n/a", frac))
    sub = lm.band_power(cfg.led_spec(150.0 / frac), (cfg.led.ionization_threshold_nm, band[1]))
    rows.append(_info("LED power 389.89-391 nm (of 150 µW in band)", "µW", "2.3", sub, 2.3,
                      "model-dependent spectrum"))

    # ion physics
    trans = cfg.transition()
    rows.append(_info("excited fraction at 5 mW/mm²", "", "saturated", ip.excitation_fraction(
        trans, cfg.ion.intensity_mw_mm2, 0.0, cfg.ion.doppler_fwhm_mhz)))
    rows.append(_info("stated / two-level I_sat", "", "3.7 mW/mm²", trans.saturation_consistency()))
    ryd = cfg.rydberg()
    rows.append(_abs("series-limit wavelength", "nm", "389.89", ip.rydberg_wavelength(ryd, 10**6),
                     389.89, 0.01))
    rows.append(_range("Rydberg wavelength n = 40", "nm", "≈391", ip.rydberg_wavelength(ryd, 40), 390.8, 391.0))
    f40 = ip.field_ionization_threshold(40, ryd.quantum_defect)
    rows.append(_rel("field-ionization threshold n = 40", "V/cm", "n/a", f40, 125.5, 0.01))

    # quantum jumps
    ion = cfg.ion_scheme()
    jspot = cfg.spot()
    p_res, i_res = qj.infer_resonant_power(cfg.jumps.rate_qj_hz, ion, jspot)
    rows.append(_rel("resonant LED power at ion", "pW", "14", p_res * 1e12, 13.7, 0.05))
    rows.append(_rel("resonant LED intensity at ion", "pW/mm²", "280", i_res * 1e12, 279.0, 0.05))
    back = qj.shelving_rate(p_res, ion, jspot)
    rows.append(_abs("forward/inverse rate roundtrip", "Hz", "0.5", back, cfg.jumps.rate_qj_hz,
                     1e-12 * cfg.jumps.rate_qj_hz))
    trace = qj.simulate_telegraph(cfg.jumps.rate_qj_hz, ion.tau_d52_s, cfg.jumps.simulate_duration_s, cfg.seed)
    est = qj.estimate_rates(trace)
    z_rate = abs(est.rate_qj_hz - cfg.jumps.rate_qj_hz) / est.rate_qj_se_hz
    z_dark = abs(est.mean_dark_time_s - ion.tau_d52_s) / est.mean_dark_time_se_s
    rows.append(Row("simulated jump rate", "Hz", "≈0.5", est.rate_qj_hz,
                    "within 3 standard errors", z_rate <= 3, "first-principles", cfg.jumps.rate_qj_hz))
    rows.append(Row("simulated mean dark time", "s", "≈1", est.mean_dark_time_s,
                    "within 3 standard errors", z_dark <= 3, "first-principles", ion.tau_d52_s))
    again = qj.simulate_telegraph(cfg.jumps.rate_qj_hz, ion.tau_d52_s, cfg.jumps.simulate_duration_s, cfg.seed)
    identical = again.states == trace.states and again.durations.tobytes() == trace.durations.tobytes()
    rows.append(Row("trace reproducible at fixed seed", "", "n/a", float(identical), "bit-identical",
                    identical, "first-principles"))
    bright = trace.durations_of(qj.BRIGHT)
    ks = stats.kstest(bright, "expon", args=(0, 1 / cfg.jumps.rate_qj_hz))
    rows.append(Row("bright-time KS p-value", "", "exponential", float(ks.pvalue), "p > 0.01",
                    ks.pvalue > 0.01, "first-principles"))

    inverse_led = lm.rescale_from_resonant_power(cfg.led_spec(1.0), cfg.jumps.resonant_power_w,
                                                 ion.wavelength_sp_nm, cfg.jumps.effective_bandwidth_nm)
    inverse = lm.band_power(inverse_led, band)
    rows.append(_rel("inverse LED power 365-391 nm", "µW", "144", inverse, 144.0, 0.01, "fitted-default"))
    rows.append(_rel("forward vs inverse band power", "µW", "150 vs 144", at_trap, inverse, 0.10,
                     "fitted-default"))
    return rows


def all_gated_passed(rows: list[Row]) -> bool:
    return all(r.passed is not False for r in rows)


def format_table(rows: list[Row]) -> str:
    header = ("quantity", "unit", "reported", "computed", "rel. dev.", "check", "provenance", "status")
    body = []
    for r in rows:
        dev = r.relative_deviation
        body.append((r.quantity, r.unit or "-", r.reported, f"{r.computed:.6g}",
                     "-" if dev is None else f"{dev:+.2%}", r.check, r.provenance, r.status))
    widths = [max(len(str(x[i])) for x in [header, *body]) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*b) for b in body]
    return "\n".join(lines) + "\n"


def rows_to_json(rows: list[Row]) -> str:
    out = []
    for r in rows:
        d = asdict(r)
        d["relative_deviation"] = r.relative_deviation
        d["status"] = r.status
        out.append(d)
    return json.dumps(out, indent=2, ensure_ascii=False)
