import math

import numpy as np
import pytest
from scipy import integrate, optimize

from photoion import qpm_shg as shg
from photoion.qpm_shg import CrystalSpec, PumpBeam, RangeError
from photoion.quantities import DomainError

DISP = shg.default_dispersion()


def test_index_pinned_values():
    # frozen outputs of the shipped KTP z-axis set
    assert shg.refractive_index(DISP, "z", 846.0, 20.0) == pytest.approx(1.8415676113463026, abs=1e-9)
    assert shg.refractive_index(DISP, "z", 423.0, 20.0) == pytest.approx(1.945858249074503, abs=1e-9)


def test_index_near_published_1064():
    # widely tabulated n_z(1064 nm) of flux-grown KTP is 1.830
    assert shg.refractive_index(DISP, "z", 1064.0, 25.0) == pytest.approx(1.830, abs=1e-3)


def test_thermo_optic_zero_at_reference():
    assert DISP.thermo_optic(846.0, DISP.t_ref_c) == 0.0
    assert DISP.thermo_optic(846.0, 40.0) > 0


def test_axis_and_range_errors():
    with pytest.raises(DomainError):
        shg.refractive_index(DISP, "y", 846.0, 20.0)
    with pytest.raises(RangeError):
        shg.refractive_index(DISP, "z", 200.0, 20.0)
    with pytest.raises(RangeError):
        shg.qpm_period(DISP, 700.0, 20.0)  # second harmonic at 350 nm


def test_period_near_846():
    assert shg.qpm_period(DISP, 846.0, 20.0) == pytest.approx(4.05, rel=0.02)


def test_period_definition_and_order():
    lam, t = 846.0, 20.0
    n1, n2 = DISP.n(lam, t), DISP.n(lam / 2, t)
    assert shg.qpm_period(DISP, lam, t) == pytest.approx(lam * 1e-3 / (2 * (n2 - n1)), rel=1e-14)
    assert shg.qpm_period(DISP, lam, t, order=3) == pytest.approx(3 * shg.qpm_period(DISP, lam, t), rel=1e-14)
    with pytest.raises(DomainError):
        shg.qpm_period(DISP, lam, t, order=2)


def test_period_derivative_finite_difference():
    # dΛ/dλ from the analytic index derivative vs central differences
    lam, t, h = 846.0, 20.0, 1e-3
    fd = (shg.qpm_period(DISP, lam + h, t) - shg.qpm_period(DISP, lam - h, t)) / (2 * h)
    fd2 = (shg.qpm_period(DISP, lam + 2 * h, t) - shg.qpm_period(DISP, lam - 2 * h, t)) / (4 * h)
    assert fd == pytest.approx(fd2, rel=1e-5)
    assert fd > 0  # longer pumps need coarser gratings in KTP


def test_phase_mismatch_zero_at_matching_temperature():
    c = CrystalSpec()
    t = shg.phase_matching_temperature(c, 846.0)
    assert abs(shg.phase_mismatch(c, 846.0, t)) < 1e-6
    assert 0.0 < t < 50.0


def test_no_phase_matching_in_window():
    with pytest.raises(DomainError):
        shg.phase_matching_temperature(CrystalSpec(poling_period_um=3.0), 846.0, (0.0, 50.0))


def test_sinc2_half_power_point():
    x = shg.sinc2_half_power_point()
    assert x == pytest.approx(1.39156, abs=1e-5)
    assert (math.sin(x) / x) ** 2 == pytest.approx(0.5, abs=1e-14)


def test_planewave_curve_is_sinc2():
    c = CrystalSpec()
    curve = shg.planewave_tuning_curve(c, 846.0, (15.0, 40.0), 301)
    dk = shg.phase_mismatch(c, 846.0, curve.temperature_c)
    x = dk * c.length_mm * 1e-3 / 2
    analytic = np.where(x == 0, 1.0, np.sin(x) / np.where(x == 0, 1.0, x)) ** 2
    assert np.max(np.abs(curve.normalized_power - analytic)) < 1e-9


def test_planewave_fwhm_linearized_oracle():
    # FWHM ≈ 4·x½ / (L·|dΔk/dT|) for a nearly linear Δk(T)
    c = CrystalSpec()
    curve = shg.planewave_tuning_curve(c, 846.0, (15.0, 40.0))
    t0, h = curve.peak_t_c, 1e-3
    slope = (shg.phase_mismatch(c, 846.0, t0 + h) - shg.phase_mismatch(c, 846.0, t0 - h)) / (2 * h)
    expected = 4 * shg.sinc2_half_power_point() / (c.length_mm * 1e-3 * abs(slope))
    assert curve.fwhm_c == pytest.approx(expected, rel=1e-3)
    assert 0.5 <= curve.fwhm_c <= 3.0


def test_fwhm_scales_inversely_with_length():
    a = shg.planewave_tuning_curve(CrystalSpec(length_mm=10.0), 846.0, (10.0, 45.0)).fwhm_c
    b = shg.planewave_tuning_curve(CrystalSpec(length_mm=20.0), 846.0, (10.0, 45.0)).fwhm_c
    assert a / b == pytest.approx(2.0, rel=2e-3)


def test_focused_curve_collimated_limit_and_asymmetry():
    c = CrystalSpec()
    flat = shg.planewave_tuning_curve(c, 846.0, (15.0, 40.0), 301)
    collimated = shg.focused_tuning_curve(c, PumpBeam(waist_um=1e6), (15.0, 40.0), 301)
    assert np.max(np.abs(collimated.normalized_power - flat.normalized_power)) < 1e-3
    wide = shg.focused_tuning_curve(c, PumpBeam(waist_um=30.0), (15.0, 40.0), 301)
    tight = shg.focused_tuning_curve(c, PumpBeam(waist_um=10.0), (15.0, 40.0), 301)
    assert wide.asymmetry_c != 0
    assert abs(tight.asymmetry_c) > abs(wide.asymmetry_c)
    assert tight.normalized_power.max() == pytest.approx(1.0, abs=1e-3)


def test_tuning_range_must_contain_edges():
    with pytest.raises(DomainError):
        shg.planewave_tuning_curve(CrystalSpec(), 846.0, (26.9, 27.5))


def test_tuning_curve_csv_header():
    curve = shg.planewave_tuning_curve(CrystalSpec(), 846.0, (15.0, 40.0), 11)
    lines = curve.to_csv().splitlines()
    assert lines[0] == "temperature_C,normalized_power"
    assert len(lines) == 12


def test_threaded_sampling_matches_serial():
    c = CrystalSpec()
    serial = shg.focused_tuning_curve(c, PumpBeam(waist_um=30.0), (15.0, 40.0), 101)
    threaded = shg.focused_tuning_curve(c, PumpBeam(waist_um=30.0), (15.0, 40.0), 101, workers=4)
    np.testing.assert_array_equal(serial.normalized_power, threaded.normalized_power)


# ---- Boyd-Kleinman ----------------------------------------------------------

def _brute_h(xi):
    """Dense Simpson rule over τ and a two-stage σ grid search."""
    tau = np.linspace(-xi, xi, 2001)
    kernel = 1.0 / (1.0 + 1j * tau)

    def h_of(sig):
        vals = integrate.simpson(np.exp(1j * np.outer(sig, tau)) * kernel, x=tau, axis=1)
        return np.abs(vals) ** 2 / (4 * xi)

    coarse = np.arange(-0.5, 4.0, 0.02)
    hc = h_of(coarse)
    s0 = coarse[np.argmax(hc)]
    fine = np.linspace(s0 - 0.02, s0 + 0.02, 401)
    return h_of(fine).max()


def test_bk_against_brute_force_oracle():
    rng = np.random.default_rng(20240611)
    for xi in np.sort(rng.uniform(0.05, 10.0, 50)):
        assert shg.boyd_kleinman_h(xi) == pytest.approx(_brute_h(xi), abs=1e-6), xi


def test_bk_optimum():
    xi, h = shg.optimal_focusing()
    assert xi == pytest.approx(2.84, abs=0.02)
    assert h == pytest.approx(1.068, abs=0.005)
    # maximize the brute-force oracle over ξ independently
    res = optimize.minimize_scalar(lambda x: -_brute_h(x), bounds=(2.5, 3.2), method="bounded",
                                   options={"xatol": 1e-3})
    assert res.x == pytest.approx(xi, abs=0.01)
    assert -res.fun == pytest.approx(h, abs=1e-6)


def test_bk_weak_focusing_limit():
    assert shg.boyd_kleinman_h(0.01) == pytest.approx(0.01, rel=1e-3)


def test_bk_offset_focus_is_worse():
    h0 = shg.boyd_kleinman_h(2.84)
    assert shg.boyd_kleinman_h(2.84, mu=0.5) < h0
    assert shg.boyd_kleinman_h(2.84, mu=0.5) == pytest.approx(shg.boyd_kleinman_h(2.84, mu=-0.5), rel=1e-8)


def test_bk_domain():
    with pytest.raises(DomainError):
        shg.boyd_kleinman_h(0.0)
    with pytest.raises(DomainError):
        shg.boyd_kleinman_h(1.0, mu=1.5)


# ---- power and efficiency ---------------------------------------------------

def test_efficiency_arithmetic():
    eta = shg.normalized_efficiency(0.119, 315.5e-6, 2.0)
    assert eta == pytest.approx(315.5e-6 / (0.119**2 * 2.0), rel=1e-15)
    assert eta * 100 == pytest.approx(1.11, rel=0.005)


def test_power_independent_of_length_unit():
    c, p = CrystalSpec(), PumpBeam()
    metres = shg.shg_power(c, p, length_unit_m=1.0)
    assert shg.shg_power(c, p, length_unit_m=1e-3) == pytest.approx(metres, rel=1e-12)
    assert shg.shg_power(c, p, length_unit_m=1e-2) == pytest.approx(metres, rel=1e-12)


def test_power_scalings():
    c = CrystalSpec()
    base = shg.shg_power(c, PumpBeam())
    assert shg.shg_power(c, PumpBeam(mode_count="many")) == pytest.approx(2 * base, rel=1e-12)
    assert shg.shg_power(c, PumpBeam(power_mw=238.0)) == pytest.approx(4 * base, rel=1e-12)
    third = CrystalSpec(qpm_order=3, poling_period_um=3 * c.poling_period_um)
    assert third.d_eff_pm_per_v == pytest.approx(c.d_eff_pm_per_v / 3, rel=1e-14)
    assert shg.shg_power(third, PumpBeam()) == pytest.approx(base / 9, rel=1e-9)
    assert c.d_eff_pm_per_v == pytest.approx(2 / math.pi * 16.9, rel=1e-14)


def test_ideal_efficiency_exceeds_measured_by_less_than_ten():
    c = CrystalSpec()
    ideal = shg.normalized_efficiency(0.119, shg.shg_power(c, PumpBeam()) * 1e-3, 2.0)
    measured = shg.normalized_efficiency(0.119, 315.5e-6, 2.0)
    assert 1.0 < ideal / measured < 10.0


def test_optimal_waist_gives_optimal_xi():
    c = CrystalSpec()
    t = shg.phase_matching_temperature(c, 846.0)
    w = shg.optimal_waist_um(c, 846.0, t)
    assert shg.focusing_parameter(c, 846.0, w, t) == pytest.approx(shg.optimal_focusing()[0], rel=1e-12)


def test_pump_and_crystal_validation():
    with pytest.raises(DomainError):
        PumpBeam(power_mw=0.0)
    with pytest.raises(DomainError):
        CrystalSpec(duty_cycle=1.2)
    with pytest.raises(DomainError):
        shg.shg_power(CrystalSpec(), PumpBeam(focus_position_mm=25.0))
