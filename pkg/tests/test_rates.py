"""Unit tests for the closed-form rate expressions."""

import warnings

import numpy as np
import pytest

from nvspin import model, rates

G1 = model.PumpingParams().gamma1


def test_dwell_stats_room_temperature_closed_form():
    # R = gamma1: tau_g = 1/gamma1, tau_e = 1/(2 gamma1),
    # cycle = 3/(2 gamma1), rms tau_e = sqrt(2)/(3 gamma1)
    p = model.PumpingParams(pump_rate=G1)
    ds = rates.dwell_stats(p, room_temperature=True)
    assert ds.cycle == pytest.approx(1.5 / G1, rel=1e-12)
    assert ds.tau_e == pytest.approx(np.sqrt(2.0) / (3.0 * G1), rel=1e-12)


def test_dwell_stats_finite_dephasing_correction():
    # the finite-gamma_phi correction is a small increase of tau_e
    p = model.PumpingParams(pump_rate=G1)
    full = rates.dwell_stats(p).tau_e
    rt = rates.dwell_stats(p, room_temperature=True).tau_e
    assert full > rt
    assert full / rt == pytest.approx(1.0, rel=1e-3)


def test_dwell_stats_singlet_cycle():
    p = model.PumpingParams(pump_rate=G1)
    ds = rates.dwell_stats(p)
    want = 2.0 / p.gamma_s1 + 1.0 / p.gamma_s2 + 1.0 / p.gamma_s
    assert ds.cycle_tilde == pytest.approx(want, rel=1e-12)
    assert ds.tau1_tilde == pytest.approx(2.0 / p.gamma_s1, rel=1e-12)


def test_two_level_rates_values():
    p = model.PumpingParams(pump_rate=G1)
    wg = np.array([0.0, 0.0, 1.0])
    we = np.array([2.0, 0.0, 1.0])
    frame = model.tilted_frame([0.0, 0.0, 1.0])
    rs = rates.two_level_rates(p, wg, we, frame, room_temperature=True)
    ds = rates.dwell_stats(p, room_temperature=True)
    pref = ds.tau_e**2 / (2.0 * ds.cycle)
    # delta = (2, 0, 0): purely transverse in this frame
    assert rs.gamma_phi == 0.0
    assert rs.gamma_plus == pytest.approx(0.5 * pref * 4.0, rel=1e-12)
    assert rs.gamma_minus == rs.gamma_plus


def test_two_level_rates_warns_outside_motional_narrowing():
    p = model.PumpingParams(pump_rate=G1)
    frame = model.tilted_frame([0.0, 0.0, 100.0])  # omega_bar ~ gamma1
    with pytest.warns(UserWarning, match="not small against"):
        rates.two_level_rates(p, [0.0, 0.0, 1.0], [1.0, 0.0, 1.0], frame)


def test_rateset_times():
    rs = rates.RateSet(gamma_phi=0.3, gamma_plus=0.1, gamma_minus=0.1)
    assert rs.relaxation_sum == pytest.approx(0.2)
    assert rs.t1 == pytest.approx(5.0)
    assert rs.t2 == pytest.approx(1.0 / (0.3 + 0.1))


def test_seven_level_populations_normalized():
    for ratio in (0.1, 1.0, 10.0):
        p = model.PumpingParams(pump_rate=ratio * G1)
        pops = rates.seven_level_populations(p)
        total = sum(v for k, v in pops.items() if not k.startswith("_"))
        assert total == pytest.approx(1.0, abs=1e-14)
        assert abs(pops["_defect"]) < 0.05


def test_seven_level_populations_pump_off():
    pops = rates.seven_level_populations(model.PumpingParams(pump_rate=0.0))
    assert pops["0_g"] == 1.0
    assert all(v == 0.0 for k, v in pops.items()
               if k not in ("0_g", "_defect"))


def test_relaxation_suppressed_at_large_splitting():
    # Gamma_pm carries the Lorentzian suppression with |omega_bar|, Gamma_phi
    # does not
    p = model.PumpingParams(pump_rate=G1)
    b_f = np.array([1.0, 0.0, 0.5])
    small = rates.pm1_subspace_rates(p, b_f, b_f, 0.01)
    large = rates.pm1_subspace_rates(p, b_f, b_f, 1e4)
    assert large[0] == pytest.approx(small[0], rel=1e-12)  # dephasing
    assert large[1] < 1e-3 * small[1]
    assert large[2] < 1e-3 * small[2]


def test_saturation_rates_are_limits():
    # plateau closed forms match the full expressions at very strong pumping
    tens = model.carbon13b_tensors()
    f = model.FieldSetup(b_field=[0.0, 3.0, 2.0])
    pv = model.precession_vectors(f, tens)
    p = model.PumpingParams(pump_rate=1e4 * G1)
    pops = rates.seven_level_populations(p)
    frame = model.mean_frame(f, pv, pops)
    rs = rates.seven_level_rates(p, pv, frame, pops)
    b_g_f, b_e_f = frame.components(pv.b_g), frame.components(pv.b_e)
    a_g_f, a_e_f = frame.components(pv.a_g), frame.components(pv.a_e)
    phi1, plus1, _ = rates.pm1_saturation_rates(p, b_g_f, b_e_f)
    phi0, plus0, _ = rates.zero_saturation_rates(p, a_g_f, a_e_f)
    assert rs.gamma_phi == pytest.approx(phi0 + phi1, rel=2e-3)
    # the relaxation channel keeps its finite-|omega_bar| Lorentzian factor,
    # which the plateau forms drop; allow for it
    assert rs.gamma_plus == pytest.approx(plus0 + plus1, rel=1e-2)


def test_lorentzian_width_closed_form():
    p = model.PumpingParams(pump_rate=G1)
    r, g1, gs1 = p.rate, p.gamma1, p.gamma_s1
    gn_rad = model.TWO_PI * model.GAMMA_N_MHZ_PER_MT
    want = np.sqrt(r * r / ((2 * r + g1) ** 2 + 2 * (r + g1) * gs1 + gs1**2)) \
        * gs1 / abs(gn_rad)
    assert rates.lorentzian_width(p, gn_rad) == pytest.approx(want, rel=1e-12)
    with pytest.raises(ValueError):
        rates.lorentzian_width(p, 0.0)


def test_bloch_signal_limits():
    frame = model.tilted_frame([0.0, 0.0, 1.0])
    t = np.array([0.0, 1.0])
    y = rates.bloch_signal(frame, 10.0, 5.0, 2.0, t)
    # theta = 0: pure oscillatory branch, amplitude 1/2 at t=0
    assert y[0] == pytest.approx(0.5)
    assert y[1] == pytest.approx(0.5 * np.exp(-1.0 / 5.0) * np.cos(2.0))


def test_seven_level_rates_components_sum():
    p = model.PumpingParams(pump_rate=G1)
    f = model.FieldSetup(b_field=[0.0, 3.0, 2.0])
    pv = model.precession_vectors(f, model.carbon13b_tensors())
    pops = rates.seven_level_populations(p)
    frame = model.mean_frame(f, pv, pops)
    rs = rates.seven_level_rates(p, pv, frame, pops)
    assert rs.gamma_phi == pytest.approx(rs.gamma_phi_0 + rs.gamma_phi_1)
    assert rs.gamma_plus == pytest.approx(rs.gamma_plus_0 + rs.gamma_plus_1)
    assert rs.gamma_minus == pytest.approx(rs.gamma_minus_0 + rs.gamma_minus_1)
    assert rs.omega_bar_mag == pytest.approx(frame.omega_bar_mag)
