"""Unit tests for model parameters, electron models, and frames."""

import numpy as np
import pytest

from nvspin import model, rates
from nvspin.errors import PerturbationInvalid, UnknownKind


def test_pumping_defaults():
    p = model.PumpingParams()
    assert p.gamma1 == pytest.approx(1.0 / 0.012)
    assert p.gamma_s == pytest.approx(1.0 / 0.143)
    assert p.gamma_s1 == pytest.approx(p.gamma1)
    assert p.gamma_s2 == pytest.approx(p.gamma_s1 / 25.0)


def test_pump_rate_explicit_overrides_optical():
    p = model.PumpingParams(pump_rate=12.5)
    assert p.rate == 12.5


def test_pumping_rate_lorentzian_line():
    # R = 2 pi (Omega_R/2)^2 delta_gamma(Delta) with a Lorentzian line of
    # HWHM gamma = (gamma1 + gamma_phi)/2; on resonance
    # delta_gamma(0) = 1/(pi gamma)
    p = model.PumpingParams(omega_rabi=2.0, detuning=0.0)
    gamma = 0.5 * (p.gamma1 + p.gamma_phi)
    want = model.TWO_PI * 1.0 / (np.pi * gamma)
    assert model.pumping_rate(p) == pytest.approx(want, rel=1e-12)
    # detuned by the HWHM: half the on-resonance rate
    pd = model.PumpingParams(omega_rabi=2.0, detuning=gamma)
    assert model.pumping_rate(pd) == pytest.approx(0.5 * want, rel=1e-12)


def test_build_electron_model_kinds():
    p = model.PumpingParams(pump_rate=10.0)
    for kind, dim in (("two-level", 2), ("seven-level-rate", 7),
                      ("seven-level-lindblad", 7)):
        m = model.build_electron_model(kind, p)
        assert m.dim == dim
        assert len(m.labels) == dim
    with pytest.raises(UnknownKind):
        model.build_electron_model("three-level", p)


def test_carbon13b_tensors_scaled():
    h = model.carbon13b_tensors()
    assert h.a_ground[0, 0] == pytest.approx(-8.0)
    hs = h.scaled(100.0)
    np.testing.assert_allclose(hs.a_ground, h.a_ground / 100.0)
    np.testing.assert_allclose(hs.a_excited, h.a_excited / 100.0)


def test_zeeman_nuclear():
    f = model.FieldSetup(b_field=[0.0, 0.0, 2.0])
    want = model.TWO_PI * model.GAMMA_N_MHZ_PER_MT * 2.0
    np.testing.assert_allclose(f.zeeman_nuclear, [0.0, 0.0, want])


def test_precession_vectors_first_order_mixing():
    h = model.carbon13b_tensors()
    f = model.FieldSetup(b_field=[3.0, 0.0, 1.0])
    pv = model.precession_vectors(f, h)
    # a_g = -(2 gamma_e / D_gs) B_T . A_g in rad/us
    want = -model.TWO_PI * (2.0 * f.gamma_e / f.d_gs) * (
        np.array([3.0, 0.0, 0.0]) @ h.a_ground)
    np.testing.assert_allclose(pv.a_g, want, atol=1e-12)
    # b vectors are the z-rows, independent of the field
    np.testing.assert_allclose(pv.b_g, model.TWO_PI * h.a_ground[2])


def test_precession_vectors_perturbation_guard():
    f = model.FieldSetup(b_field=[20.0, 0.0, 0.0])  # gamma_e B_T / D_es > 0.3
    with pytest.raises(PerturbationInvalid):
        model.precession_vectors(f, model.carbon13b_tensors())


def test_tilted_frame_orthonormal():
    frame = model.tilted_frame([0.3, -0.2, 0.5])
    triad = np.array([frame.e_x, frame.e_y, frame.e_z])
    np.testing.assert_allclose(triad @ triad.T, np.eye(3), atol=1e-13)
    np.testing.assert_allclose(
        frame.e_z, np.array([0.3, -0.2, 0.5]) / np.linalg.norm([0.3, -0.2, 0.5]))
    assert not frame.degenerate
    # components() resolves a vector onto the triad
    np.testing.assert_allclose(frame.components(frame.e_z), [0.0, 0.0, 1.0],
                               atol=1e-13)


def test_tilted_frame_degenerate():
    frame = model.tilted_frame([0.0, 0.0, 0.0])
    assert frame.degenerate
    assert frame.omega_bar_mag == 0.0
    np.testing.assert_allclose(frame.e_z, [0.0, 0.0, 1.0])


def test_mean_frame_weights():
    p = model.PumpingParams(pump_rate=2.0 * model.PumpingParams().gamma1)
    pops = rates.seven_level_populations(p)
    f = model.FieldSetup(b_field=[0.0, 3.0, 2.0])
    pv = model.precession_vectors(f, model.carbon13b_tensors())
    frame = model.mean_frame(f, pv, pops)
    want = f.zeeman_nuclear + pops["0_g"] * pv.a_g + pops["0_e"] * pv.a_e
    np.testing.assert_allclose(frame.omega_bar, want, atol=1e-13)


def test_hyperfine_operator_shapes_and_hermiticity():
    h = model.carbon13b_tensors()
    f = model.FieldSetup(b_field=[0.0, 3.0, 2.0])
    ops = model.hyperfine_operator(h, f, kind="seven-level-rate")
    assert len(ops) == 3
    for op in ops:
        assert op.shape == (7, 7)
        np.testing.assert_allclose(op, op.conj().T, atol=1e-13)
