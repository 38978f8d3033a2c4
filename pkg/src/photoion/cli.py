"""Command-line entry point: ``photoion <group> <command> [options]``.

Exit codes: 0 success, 1 report deviation, 2 config error, 3 domain error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import beam_optics as bo
from . import ion_physics as ip
from . import led_model as lm
from . import qpm_shg as shg
from . import quantum_jumps as qj
from .config import ConfigError, RunConfig, load_config
from .quantities import DomainError
from .report import all_gated_passed, build_report, format_table, rows_to_json

EXIT_OK, EXIT_DEVIATION, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3


def _emit(items, as_json: bool, out=None) -> None:
    """Print ``(quantity, value, unit[, note])`` tuples as a table or JSON."""
    out = out or sys.stdout
    if as_json:
        payload = []
        for item in items:
            d = {"quantity": item[0], "value": item[1], "unit": item[2]}
            if len(item) > 3:
                d["note"] = item[3]
            payload.append(d)
        out.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
        return
    width = max(len(i[0]) for i in items)
    for item in items:
        value = item[1]
        if isinstance(value, bool):
            text = "yes" if value else "no"
        elif isinstance(value, float):
            text = f"{value:.6g}"
        else:
            text = str(value)
        unit = f" {item[2]}" if item[2] else ""
        note = f"  [{item[3]}]" if len(item) > 3 else ""
        out.write(f"{item[0]:<{width}}  {text}{unit}{note}\n")


# --- shg ---------------------------------------------------------------------

def cmd_shg(args, cfg: RunConfig):
    crystal = cfg.crystal_spec()
    lam = args.wavelength if args.wavelength is not None else cfg.pump.wavelength_nm
    if args.command == "period":
        temp = 20.0 if args.temp is None else args.temp
        period = shg.qpm_period(crystal.dispersion, lam, temp, args.order)
        return [("poling period", period, "µm"), ("pump wavelength", lam, "nm"), ("temperature", temp, "°C"),
                ("dispersion set", crystal.dispersion.id, "")]
    if args.command == "tune":
        t_range = (cfg.tune.t_min_c if args.t_min is None else args.t_min,
                   cfg.tune.t_max_c if args.t_max is None else args.t_max)
        if args.waist_um is not None:
            curve = shg.focused_tuning_curve(crystal, cfg.pump_beam(wavelength_nm=lam, waist_um=args.waist_um),
                                             t_range, cfg.tune.n_points)
        else:
            curve = shg.planewave_tuning_curve(crystal, lam, t_range, cfg.tune.n_points)
        if args.out:
            Path(args.out).write_text(curve.to_csv(), encoding="utf-8")
        items = [("peak temperature", curve.peak_t_c, "°C"), ("FWHM", curve.fwhm_c, "°C"),
                 ("half width low side", curve.half_width_low_c, "°C"),
                 ("half width high side", curve.half_width_high_c, "°C"),
                 ("peak normalized power", float(curve.normalized_power.max()), "")]
        if args.out:
            items.append(("curve CSV", args.out, ""))
        return items
    if args.command == "power":
        overrides = {"wavelength_nm": lam}
        if args.pump_mw is not None:
            overrides["power_mw"] = args.pump_mw
        if args.waist_um is not None:
            overrides["waist_um"] = args.waist_um
        if args.many_mode:
            overrides["mode_count"] = "many"
        pump = cfg.pump_beam(**overrides)
        t_pm = shg.phase_matching_temperature(crystal, lam) if args.temp is None else args.temp
        waist = pump.waist_um or shg.optimal_waist_um(crystal, lam, t_pm)
        xi = shg.focusing_parameter(crystal, lam, waist, t_pm)
        p = shg.shg_power(crystal, pump, t_pm)
        eta = shg.normalized_efficiency(pump.power_mw * 1e-3, p * 1e-3, crystal.length_mm / 10)
        return [("phase-matching temperature", t_pm, "°C"), ("pump waist", waist, "µm"),
                ("focusing parameter", xi, ""), ("focusing factor h", shg.boyd_kleinman_h(xi), ""),
                ("SHG power", p, "mW"), ("normalized efficiency", eta * 100, "%/(W·cm)")]
    if args.command == "efficiency":
        pump_mw = cfg.pump.power_mw if args.pump_mw is None else args.pump_mw
        shg_uw = cfg.shg_measured.shg_power_uw if args.shg_uw is None else args.shg_uw
        length_cm = cfg.crystal.length_mm / 10 if args.length_cm is None else args.length_cm
        eta = shg.normalized_efficiency(pump_mw * 1e-3, shg_uw * 1e-6, length_cm)
        return [("normalized efficiency", eta * 100, "%/(W·cm)")]
    raise AssertionError(args.command)


# --- optics ------------------------------------------------------------------

def _forward_budget(cfg: RunConfig):
    src = cfg.source()
    cone = bo.half_angle_from_solid_angle_fraction(cfg.optics.collection_solid_angle_fraction)
    coll = bo.collection_fraction(src, cone)
    collected = coll.collected_power_mw * 1e3
    at_trap = bo.transmission_budget(collected, [cfg.fiber().transmittance, cfg.optics.uv_nonfiber_transmittance])
    return coll, collected, at_trap


def cmd_optics(args, cfg: RunConfig):
    if args.command == "image":
        result = bo.image_extended_source(cfg.source(), cfg.train(args.train),
                                          object_na=cfg.optics.trains[args.train].object_na)
        items = [("magnification", result.magnification, ""),
                 ("image distance", result.image_distance_mm, "mm"),
                 ("geometric image size", result.geometric_size_um, "µm"),
                 ("image size incl. aberrations", result.size_um, "µm", "fitted aberration factor")]
        if result.image_na is not None:
            ok, ratio = bo.fiber_coupling_feasible(result.geometric_size_um, result.image_na, cfg.fiber())
            items += [("image-side NA", result.image_na, ""), ("fits fiber", ok, ""),
                      ("étendue ratio to fiber", ratio, "")]
        return items
    if args.command == "collect":
        coll, collected, _ = _forward_budget(cfg)
        return [("collection half angle", math.degrees(coll.half_angle), "deg"),
                ("solid angle fraction of 2π", coll.solid_angle_fraction * 100, "%"),
                ("angular power fraction", coll.angular_fraction * 100, "%", "fitted pattern"),
                ("collected power", collected, "µW")]
    if args.command == "budget":
        _, collected, at_trap = _forward_budget(cfg)
        band = cfg.led.band_nm
        return [("collected LED power", collected, "µW"),
                ("fiber transmittance", cfg.fiber().transmittance, ""),
                ("lens + viewport transmittance", cfg.optics.uv_nonfiber_transmittance, "", "fitted"),
                (f"power {band[0]:g}-{band[1]:g} nm at trap", at_trap, "µW", "fitted"),
                ("intensity at trap", bo.intensity_at_spot(at_trap, cfg.optics.spot_diameter_um), "mW/mm²")]
    if args.command == "intensity":
        power = args.power_uw
        spot = cfg.optics.spot_diameter_um if args.spot_um is None else args.spot_um
        return [("intensity", bo.intensity_at_spot(power, spot), "mW/mm²"), ("power", power, "µW"),
                ("spot diameter", spot, "µm")]
    raise AssertionError(args.command)


# --- ion ---------------------------------------------------------------------

def cmd_ion(args, cfg: RunConfig):
    trans = cfg.transition()
    if args.command == "excite":
        if args.isat is not None:
            trans = ip.TransitionSpec(trans.wavelength_nm, trans.linewidth_mhz, args.isat)
        intensity = cfg.ion.intensity_mw_mm2 if args.i is None else args.i
        rho = ip.excitation_fraction(trans, intensity, args.detuning, cfg.ion.doppler_fwhm_mhz)
        s = intensity / trans.saturation_intensity_mw_mm2
        items = [("excited fraction", rho, ""), ("saturation parameter", s, "")]
        for iso in ip.isotope_table()[1:]:
            items.append((f"suppression of {iso.mass_number}Ca", ip.isotope_suppression(
                trans, iso.isotope_shift_mhz, s), ""))
        return items
    if args.command == "rydberg":
        ryd = cfg.rydberg()
        if args.defect is not None:
            ryd = ip.RydbergSeries(ryd.series_limit_from_1p1_cm, args.defect)
        n = cfg.ion.rydberg_n if args.n is None else args.n
        return [("wavelength", ip.rydberg_wavelength(ryd, n), "nm"), ("n", n, ""),
                ("series limit", ryd.limit_wavelength_nm, "nm")]
    if args.command == "field":
        n = cfg.ion.rydberg_n if args.n is None else args.n
        defect = cfg.ion.quantum_defect if args.defect is None else args.defect
        return [("field-ionization threshold", ip.field_ionization_threshold(n, defect), "V/cm"), ("n", n, "")]
    if args.command == "load":
        scen = cfg.loading()
        rho = ip.excitation_fraction(trans, cfg.ion.intensity_mw_mm2, 0.0, cfg.ion.doppler_fwhm_mhz)
        return [("excited fraction", rho, ""), ("transit time", scen.transit_time_s * 1e6, "µs"),
                ("loading rate", ip.loading_rate(scen, rho), "ions/s", "illustrative scenario")]
    raise AssertionError(args.command)


# --- jumps -------------------------------------------------------------------

def cmd_jumps(args, cfg: RunConfig, seed: int):
    ion = cfg.ion_scheme()
    rate = cfg.jumps.rate_qj_hz if args.rate is None else args.rate
    tau = ion.tau_d52_s if args.tau is None else args.tau
    duration = cfg.jumps.simulate_duration_s if args.duration is None else args.duration
    if args.command == "simulate":
        trace = qj.simulate_telegraph(rate, tau, duration, seed)
        text = trace.to_csv()
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
            return [("intervals", len(trace), ""), ("duration", duration, "s"), ("seed", seed, ""),
                    ("trace CSV", args.out, "")]
        sys.stdout.write(text)
        return None
    if args.command == "estimate":
        if args.trace:
            trace = qj.TelegraphTrace.from_csv(Path(args.trace).read_text(encoding="utf-8"))
        else:
            trace = qj.simulate_telegraph(rate, tau, duration, seed)
        st = qj.estimate_rates(trace)
        if args.json:
            sys.stdout.write(st.to_json() + "\n")
        else:
            sys.stdout.write(st.to_report())
        return None
    if args.command == "infer":
        spot = cfg.spot() if args.spot_um is None else qj.SpotGeometry(args.spot_um)
        p, i = qj.infer_resonant_power(rate, ion, spot)
        items = [("scattering probability", qj.scattering_probability(ion, spot), ""),
                 ("resonant power", p * 1e12, "pW"), ("resonant intensity", i * 1e12, "pW/mm²")]
        if args.resonant_pw is None:
            led = lm.rescale_from_resonant_power(cfg.led_spec(1.0), p, ion.wavelength_sp_nm,
                                                 cfg.jumps.effective_bandwidth_nm)
            items.append(("LED power in band (from inferred power)", lm.band_power(led, cfg.led.band_nm), "µW",
                          "fitted effective bandwidth"))
        printed = cfg.jumps.resonant_power_w if args.resonant_pw is None else args.resonant_pw * 1e-12
        led = lm.rescale_from_resonant_power(cfg.led_spec(1.0), printed, ion.wavelength_sp_nm,
                                             cfg.jumps.effective_bandwidth_nm)
        items.append((f"LED power in band (from {printed * 1e12:g} pW)", lm.band_power(led, cfg.led.band_nm), "µW",
                      "fitted effective bandwidth"))
        items.append(("effective bandwidth", cfg.jumps.effective_bandwidth_nm, "nm", "fitted"))
        return items
    raise AssertionError(args.command)


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="photoion", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="YAML run config (default: shipped defaults)")
    p.add_argument("--json", action="store_true", help="structured JSON instead of a table")
    p.add_argument("--seed", type=int, help="master seed, overrides the config")
    sub = p.add_subparsers(dest="group", required=True)

    g = sub.add_parser("shg", help="phase matching and conversion")
    gs = g.add_subparsers(dest="command", required=True)
    for name in ("period", "tune", "power", "efficiency"):
        c = gs.add_parser(name)
        c.add_argument("--lambda", dest="wavelength", type=float, help="pump wavelength, nm")
        if name in ("period", "power"):
            c.add_argument("--temp", type=float, help="crystal temperature, °C")
        if name == "period":
            c.add_argument("--order", type=int, default=1)
        if name == "tune":
            c.add_argument("--t-min", type=float)
            c.add_argument("--t-max", type=float)
            c.add_argument("--waist-um", type=float, help="focused curve for this waist")
            c.add_argument("--out", help="write the TuningCurve CSV here")
        if name == "power":
            c.add_argument("--pump-mw", type=float)
            c.add_argument("--waist-um", type=float)
            c.add_argument("--many-mode", action="store_true")
        if name == "efficiency":
            c.add_argument("--pump-mw", type=float)
            c.add_argument("--shg-uw", type=float)
            c.add_argument("--length-cm", type=float)

    g = sub.add_parser("optics", help="imaging and power budgets")
    gs = g.add_subparsers(dest="command", required=True)
    c = gs.add_parser("image")
    c.add_argument("--train", default="led_relay")
    gs.add_parser("collect")
    gs.add_parser("budget")
    c = gs.add_parser("intensity")
    c.add_argument("--power-uw", type=float, required=True)
    c.add_argument("--spot-um", type=float)

    g = sub.add_parser("ion", help="neutral Ca excitation and Rydberg states")
    gs = g.add_subparsers(dest="command", required=True)
    c = gs.add_parser("excite")
    c.add_argument("--i", type=float, help="intensity, mW/mm²")
    c.add_argument("--isat", type=float, help="saturation intensity, mW/mm²")
    c.add_argument("--detuning", type=float, default=0.0, help="MHz")
    for name in ("rydberg", "field"):
        c = gs.add_parser(name)
        c.add_argument("--n", type=int)
        c.add_argument("--defect", type=float)
    gs.add_parser("load")

    g = sub.add_parser("jumps", help="quantum-jump simulation and inference")
    gs = g.add_subparsers(dest="command", required=True)
    for name in ("simulate", "estimate", "infer"):
        c = gs.add_parser(name)
        c.add_argument("--rate", type=float, help="jump rate, Hz")
        c.add_argument("--tau", type=float, help="dark lifetime, s")
        c.add_argument("--duration", type=float, help="s")
        if name == "simulate":
            c.add_argument("--out", help="write the trace CSV here")
        if name == "estimate":
            c.add_argument("--trace", help="trace CSV (default: simulate one)")
        if name == "infer":
            c.add_argument("--spot-um", type=float)
            c.add_argument("--resonant-pw", type=float, help="resonant power for the inverse step, pW")
        # accept the global flags after the subcommand as well
        c.add_argument("--seed", type=int, dest="sub_seed", help=argparse.SUPPRESS)

    sub.add_parser("report", help="computed vs printed values")
    g = sub.add_parser("config", help="show the effective config")
    g.add_argument("action", choices=["dump", "validate"])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    seed = cfg.seed
    if args.seed is not None:
        seed = args.seed
    if getattr(args, "sub_seed", None) is not None:
        seed = args.sub_seed
    try:
        if args.group == "report":
            rows = build_report(cfg.model_copy(update={"seed": seed}))
            sys.stdout.write(rows_to_json(rows) + "\n" if args.json else format_table(rows))
            return EXIT_OK if all_gated_passed(rows) else EXIT_DEVIATION
        if args.group == "config":
            if args.action == "dump":
                sys.stdout.write(cfg.dump())
            else:
                _emit([("config", "valid", "")], args.json)
            return EXIT_OK
        handler = {"shg": cmd_shg, "optics": cmd_optics, "ion": cmd_ion}.get(args.group)
        items = handler(args, cfg) if handler else cmd_jumps(args, cfg, seed)
        if items is not None:
            _emit(items, args.json)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except DomainError as exc:
        sys.stderr.write(f"domain error: {exc}\n")
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
