"""Unit tests for the superoperator, steady state, and resolvent correlators."""

import numpy as np
import pytest

from nvspin import liouville, model, numerics, rates

G1 = model.PumpingParams().gamma1


def _setup(kind="seven-level-rate", ratio=1.0):
    p = model.PumpingParams(pump_rate=ratio * G1)
    m = model.build_electron_model(kind, p)
    sup = liouville.build_superoperator(m)
    ss = liouville.steady_state(m, sup)
    return p, m, sup, ss


def test_superoperator_annihilates_steady_state():
    _, _, sup, ss = _setup()
    resid = sup.matrix @ numerics.vec(ss.rho)
    assert np.linalg.norm(resid) < 1e-12 * np.linalg.norm(sup.matrix)


def test_superoperator_preserves_trace():
    _, m, sup, _ = _setup()
    left = numerics.vec(np.eye(m.dim))
    assert np.linalg.norm(left @ sup.matrix) < 1e-10 * np.linalg.norm(sup.matrix)


def test_steady_state_populations():
    _, _, _, ss = _setup()
    pops = ss.populations
    assert sum(pops.values()) == pytest.approx(1.0, abs=1e-12)
    assert all(v >= -1e-14 for v in pops.values())
    assert np.trace(ss.rho).real == pytest.approx(1.0, abs=1e-12)
    # symmetry between the +-1 manifolds of the optical cycle
    assert pops["+1_g"] == pytest.approx(pops["-1_g"], rel=1e-10)
    assert pops["+1_e"] == pytest.approx(pops["-1_e"], rel=1e-10)


def test_two_level_steady_state_closed_form():
    p, _, _, ss = _setup(kind="two-level", ratio=3.0)
    lam = 2.0 * p.rate + p.gamma1
    assert ss.populations["g"] == pytest.approx((p.rate + p.gamma1) / lam,
                                                rel=1e-12)
    assert ss.populations["e"] == pytest.approx(p.rate / lam, rel=1e-12)


def test_correlation_two_level_closed_form():
    # <dn_e dn_e>_omega for the two-level telegraph has the Lorentzian
    # closed form p_g p_e lambda / (lambda^2 + omega^2)
    p, m, sup, ss = _setup(kind="two-level", ratio=1.0)
    lam = 2.0 * p.rate + p.gamma1
    pe = ss.populations["e"]
    ne = m.projector("e")
    for w in (0.0, 0.5, 5.0):
        got = liouville.correlation(m, ne, ne, w, sup, ss).value
        want = pe * (1.0 - pe) * lam / (lam**2 + w**2) \
            + 1j * w * pe * (1.0 - pe) / (lam**2 + w**2)
        assert got.real == pytest.approx(want.real, rel=1e-10)


def test_correlation_reality_symmetry():
    # classical observables: Re<a;b>_w is even in omega for a = b
    p, m, sup, ss = _setup()
    op = m.projector("0_g")
    plus = liouville.correlation(m, op, op, 2.0, sup, ss).value
    minus = liouville.correlation(m, op, op, -2.0, sup, ss).value
    assert plus.real == pytest.approx(minus.real, rel=1e-10)


def test_markov_rates_numeric_matches_analytic_two_level():
    p = model.PumpingParams(pump_rate=G1)
    f = model.FieldSetup(b_field=[0.0, 1.0, 0.0])
    pv = model.precession_vectors(f, model.carbon13b_tensors().scaled(10.0))
    m = model.build_electron_model("two-level", p)
    sup = liouville.build_superoperator(m)
    ss = liouville.steady_state(m, sup)
    omega_g = f.zeeman_nuclear + pv.a_g
    omega_e = f.zeeman_nuclear + pv.a_e
    frame = model.mean_frame(f, pv, ss.populations)
    rs_num = liouville.markov_rates_numeric(
        m, model.two_level_coupling(pv, omega_g, omega_e), frame, sup, ss)
    rs_an = rates.two_level_rates(p, omega_g, omega_e, frame,
                                  room_temperature=True)
    assert rs_num.gamma_phi == pytest.approx(rs_an.gamma_phi, rel=1e-6)
    assert rs_num.gamma_plus == pytest.approx(rs_an.gamma_plus, rel=1e-2)
    assert rs_num.gamma_minus == pytest.approx(rs_an.gamma_minus, rel=1e-2)


def test_markov_rates_numeric_matches_analytic_seven_level():
    p = model.PumpingParams(pump_rate=G1)
    h = model.carbon13b_tensors()
    f = model.FieldSetup(b_field=[0.0, 10.0, 0.0])
    pv = model.precession_vectors(f, h)
    pops = rates.seven_level_populations(p)
    frame = model.mean_frame(f, pv, pops)
    m = model.build_electron_model("seven-level-rate", p)
    sup = liouville.build_superoperator(m)
    ss = liouville.steady_state(m, sup)
    f_ops = model.hyperfine_operator(h, f, "seven-level-rate")
    rs_num = liouville.markov_rates_numeric(m, f_ops, frame, sup, ss)
    rs_an = rates.seven_level_rates(p, pv, frame)
    for name in ("gamma_phi", "gamma_plus", "gamma_minus"):
        assert getattr(rs_num, name) == pytest.approx(
            getattr(rs_an, name), rel=2e-2), name
