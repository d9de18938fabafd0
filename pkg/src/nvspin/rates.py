"""Closed-form dephasing/relaxation rates, steady populations, dwell-time
statistics, and the measured-signal decomposition.

All rates are in 1/us and frequencies in rad/us.  Frame-resolved vectors
(suffix ``_f``) are 3-vectors of (X, Y, Z) components in the tilted frame.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RateSet", "DwellStats", "dwell_stats", "two_level_rates",
    "sum_rule_check", "seven_level_populations", "sz_correlator",
    "sigma_correlators_zero", "pm1_subspace_rates", "zero_subspace_rates",
    "seven_level_rates", "pm1_saturation_rates", "zero_saturation_rates",
    "lorentzian_width", "bloch_signal",
]


@dataclass(frozen=True)
class RateSet:
    """Nuclear dephasing and relaxation rates in the tilted frame.

    Subspace components (suffix _0 for the m=0 channel, _1 for m=+-1) are
    populated only by the seven-level analytic engine.
    """

    gamma_phi: float
    gamma_plus: float
    gamma_minus: float
    omega_bar_mag: float = 0.0
    gamma_phi_0: float = None
    gamma_phi_1: float = None
    gamma_plus_0: float = None
    gamma_plus_1: float = None
    gamma_minus_0: float = None
    gamma_minus_1: float = None

    @property
    def relaxation_sum(self):
        return self.gamma_plus + self.gamma_minus

    @property
    def t1(self):
        """1 / (Gamma_+ + Gamma_-), in us."""
        s = self.relaxation_sum
        return 1.0 / s if s > 0 else float("inf")

    @property
    def t2(self):
        """1 / (Gamma_phi + (Gamma_+ + Gamma_-)/2), in us."""
        s = self.gamma_phi + 0.5 * self.relaxation_sum
        return 1.0 / s if s > 0 else float("inf")


@dataclass(frozen=True)
class DwellStats:
    """Hopping-cycle statistics of the electron telegraph process (us).

    tau_e is the rms dwell-time fluctuation per optical cycle of the
    two-level model and T the mean cycle duration; tau0/tau1/T_tilde are the
    seven-level analogues for the m=0 and m=+-1 subspaces.
    """

    tau_e: float
    cycle: float
    tau0_tilde: float
    tau1_tilde: float
    cycle_tilde: float


def _lorentzian_delta(x, gamma):
    return (gamma / np.pi) / (x * x + gamma * gamma)


def dwell_stats(p, room_temperature=False):
    """Dwell-time statistics for pumping rate R = p.rate.

    The full tau_e includes the gamma_phi and detuning corrections; with
    room_temperature=True the sqrt prefactor is dropped (the gamma_phi ->
    infinity limit).
    """
    r = p.rate
    g1 = p.gamma1
    cycle = (1.0 / r if r > 0 else float("inf")) + 1.0 / (g1 + r)
    tau_e = np.sqrt(2.0) / (2.0 * r + g1)
    if not room_temperature:
        gamma = 0.5 * (g1 + p.gamma_phi)
        num = r + g1 * p.gamma_phi / (g1 + p.gamma_phi) \
            + np.pi * g1 * g1 * _lorentzian_delta(p.detuning, gamma)
        tau_e *= np.sqrt(num / (r + g1))

    gs1, gs2, gs = p.gamma_s1, p.gamma_s2, p.gamma_s
    cycle_tilde = 2.0 / gs1 + (1.0 / gs2 if gs2 > 0 else float("inf")) + 1.0 / gs
    tau1_tilde = 2.0 / gs1
    if gs2 > 0 and np.isfinite(cycle_tilde):
        # rms of the per-cycle dwell statistic P_rest tau_0 - P_0 tau_rest;
        # equals the renewal variance P_rest^2 Var(tau_0) + P_0^2
        # Var(tau_rest) of the m=0 occupancy, evaluated at saturation.
        tau0_tilde = (2.0 / (gs2 * cycle_tilde)) * np.sqrt(
            2.0 / gs1**2 + 1.0 / (gs1 * gs) + 1.0 / (2.0 * gs**2))
    else:
        tau0_tilde = float("nan")
    return DwellStats(float(tau_e), float(cycle), float(tau0_tilde),
                      float(tau1_tilde), float(cycle_tilde))


def two_level_rates(p, omega_g, omega_e, frame, room_temperature=False):
    """Two-level fluctuator rates from the dwell-time picture.

    Gamma_phi = (tau_e^2 / 2T) |(w_e - w_g)_Z|^2 and
    Gamma_+- = (tau_e^2 / 4T) |(w_e - w_g)_perp|^2, valid for
    |omega_bar| << gamma1, gamma_phi (warned otherwise).
    """
    if frame.omega_bar_mag > 0.1 * min(p.gamma1, p.gamma_phi):
        warnings.warn("nuclear splitting not small against electron rates; "
                      "two-level closed forms lose accuracy")
    ds = dwell_stats(p, room_temperature=room_temperature)
    delta = frame.components(np.asarray(omega_e) - np.asarray(omega_g))
    pref = ds.tau_e**2 / (2.0 * ds.cycle)
    gamma_phi = pref * delta[2] ** 2
    gamma_pm = 0.5 * pref * (delta[0] ** 2 + delta[1] ** 2)
    return RateSet(gamma_phi=float(gamma_phi), gamma_plus=float(gamma_pm),
                   gamma_minus=float(gamma_pm),
                   omega_bar_mag=frame.omega_bar_mag)


def sum_rule_check(rs, p, omega_g, omega_e, room_temperature=False):
    """Residual of Gamma_phi + Gamma_+ + Gamma_- = (tau_e^2/2T)|w_e - w_g|^2."""
    ds = dwell_stats(p, room_temperature=room_temperature)
    delta = np.asarray(omega_e, dtype=float) - np.asarray(omega_g, dtype=float)
    total = ds.tau_e**2 / (2.0 * ds.cycle) * float(delta @ delta)
    return rs.gamma_phi + rs.gamma_plus + rs.gamma_minus - total


def seven_level_populations(p):
    """Approximate steady populations of the seven-level rate model.

    Renormalized to sum exactly to 1; the raw normalization defect of the
    closed forms is returned alongside under key "_defect".
    """
    r, g1, gs1, gs2, gs = p.rate, p.gamma1, p.gamma_s1, p.gamma_s2, p.gamma_s
    pops = {lab: 0.0 for lab in
            ("0_g", "-1_g", "+1_g", "0_e", "-1_e", "+1_e", "S")}
    if r == 0:
        # Pump off: the NV relaxes into (and stays in) |0_g>.
        pops["0_g"] = 1.0
        pops["_defect"] = 0.0
        return pops
    p0g = (r + g1 + 2 * gs2) / (
        2 * r + g1 + 2 * gs2 * ((2 * r + g1 + 2 * gs1) / gs1 + r / gs))
    p0e = r / (r + g1 + 2 * gs2) * p0g
    p1e = gs2 / gs1 * p0e
    p1g = (r + g1 + gs1) / r * p1e
    ps = 2 * gs1 / gs * p1e
    raw = p0g + p0e + 2 * p1e + 2 * p1g + ps
    scale = 1.0 / raw
    pops["0_g"] = p0g * scale
    pops["0_e"] = p0e * scale
    pops["-1_g"] = pops["+1_g"] = p1g * scale
    pops["-1_e"] = pops["+1_e"] = p1e * scale
    pops["S"] = ps * scale
    pops["_defect"] = raw - 1.0
    return pops


def sz_correlator(pair, p, omega, populations=None):
    """Closed-form finite-frequency correlators of the S_{g,z}/S_{e,z} family.

    ``pair`` is one of "ee", "gg", "eg", "ge" naming <S_{a,z}; S_{b,z}>_w
    with a the first letter.  Populations default to the approximate closed
    forms; pass exact ones for tight cross-checks against the resolvent.
    """
    pops = populations if populations is not None else seven_level_populations(p)
    r, g1, gs1 = p.rate, p.gamma1, p.gamma_s1
    w = omega
    denom = r * gs1 + 1j * (2 * r + g1 + gs1) * w - w * w
    if pair == "ee":
        return 2.0 * (r + 1j * w) / denom * pops["-1_e"]
    if pair == "gg":
        return 2.0 * (r + g1 + gs1 + 1j * w) / denom * pops["-1_g"]
    if pair == "eg":
        return 2.0 * r / denom * pops["-1_g"]
    if pair == "ge":
        return 2.0 * (r + g1) / denom * pops["-1_e"]
    raise ValueError(f"unknown correlator pair {pair!r}")


def sigma_correlators_zero(p, populations=None):
    """Zero-frequency correlators of the m=0 projector family.

    Returns {"ee", "gg", "eg", "ge"} for <sigma_{0a,0a}; sigma_{0b,0b}>_0
    with a the first letter.
    """
    pops = populations if populations is not None else seven_level_populations(p)
    r, g1, gs1, gs2, gs = p.rate, p.gamma1, p.gamma_s1, p.gamma_s2, p.gamma_s
    p0g, p0e, ps = pops["0_g"], pops["0_e"], pops["S"]
    p1g_sum = pops["-1_g"] + pops["+1_g"]
    p1e_sum = pops["-1_e"] + pops["+1_e"]
    rest = 1.0 - p0e - p0g
    eta = 2 * gs2 / gs1 + 2 * (r + 2 * gs) * gs2 / (gs * (2 * r + g1))
    norm = 1.0 + eta
    d2 = 2 * r + g1

    c_ee = (p0e * p0g / d2
            + p0e * rest * ((r + gs) / (d2 * gs) + 1.0 / gs1)
            + p0e * p1g_sum / d2
            - p0e * ps / gs1) / norm
    c_gg = (p0g * p0e * ((1.0 - 2 * gs2 / r) / d2 + eta / r)
            + p0g * rest * (1.0 / r + gs1 / (gs * d2)) * (r + g1 + 2 * gs2) / gs1
            + p0g * p1e_sum * (1.0 / r) * (r + g1 + 2 * gs2) / d2
            - p0g * ps * (1.0 / r) * (r + g1 + 2 * gs2) / gs1) / norm
    c_eg = (-p0g * p0e / d2
            + p0g * rest * (1.0 / gs1 + r / (d2 * gs))
            + p0g * p1g_sum / d2
            - p0g * ps / gs1) / norm
    c_ge = (-p0e * (1.0 - p0e) * (1.0 + 2 * gs2 / r) / d2
            - 2 * p0e * p0g * (gs2 / (r * gs1) + gs2 / (d2 * gs))
            + p0e * p1g_sum * (1.0 / r - (1.0 - 2 * gs1 / r) / d2)
            + p0e * rest * ((r + g1) / (r * gs1) + (r + g1) / (d2 * gs))
            - p0e * ps * (r + g1 + 2 * gs2) / (r * gs1)) / norm
    # Residual terms of first order in gs2, obtained by solving the
    # population-sector equations of motion exactly.  Without them c_gg and
    # c_ge deviate from the exact correlators by O(gs2/gs1) while c_ee and
    # c_eg are already exact.
    d3 = norm**3 * gs1 * d2**3
    c_gg += 2 * gs2 * (g1 + gs1) * (r + g1 + 2 * gs2) ** 2 / (r * d3)
    c_ge += -4 * gs2 * (gs1 - gs2) * (r + g1 + gs1) / d3
    return {"ee": c_ee, "gg": c_gg, "eg": c_eg, "ge": c_ge}


def _quadratic_form(corr, v_g, v_e, transverse):
    """Assemble a rate from the four (g/e) correlators and frame components.

    ``corr`` maps pair -> correlator value at the evaluation frequency.
    For the dephasing channel (transverse=False) the Z components enter;
    for relaxation the circular components v_pm = v_X +- i v_Y enter with
    the <a;b> pairing of the adiabatic second-order expansion.
    """
    if not transverse:
        g_z, e_z = v_g[2], v_e[2]
        val = (g_z * g_z * corr["gg"] + e_z * e_z * corr["ee"]
               + g_z * e_z * (corr["ge"] + corr["eg"]))
        return np.real(val)
    raise AssertionError("use _relaxation_form for transverse channels")


def _relaxation_form(corr, v_g, v_e, sign):
    """Gamma_+ (sign=+1) or Gamma_- (sign=-1) quadratic form.

    Gamma_pm = Re( |v_g_perp|^2 <g;g> + |v_e_perp|^2 <e;e>
                   + v_{g,pm} v_{e,mp} <g;e> + v_{g,mp} v_{e,pm} <e;g> ) / 2
    evaluated at omega = pm |omega_bar|.
    """
    gp = v_g[0] + 1j * sign * v_g[1]
    gm = v_g[0] - 1j * sign * v_g[1]
    ep = v_e[0] + 1j * sign * v_e[1]
    em = v_e[0] - 1j * sign * v_e[1]
    val = (abs(gp) ** 2 * corr["gg"] + abs(ep) ** 2 * corr["ee"]
           + gp * em * corr["ge"] + gm * ep * corr["eg"])
    return 0.5 * np.real(val)


def pm1_subspace_rates(p, b_g_f, b_e_f, omega_bar_mag, populations=None):
    """m=+-1 subspace contribution (Gamma_phi^1, Gamma_+^1, Gamma_-^1).

    Assembled from the closed-form S_z correlators; at omega_bar -> 0 this
    reduces to the hopping-cycle forms, and at finite frequency it carries
    the Lorentzian f(|omega_bar|) suppression.
    """
    corr0 = {k: sz_correlator(k, p, 0.0, populations) for k in
             ("gg", "ee", "ge", "eg")}
    gamma_phi = _quadratic_form(corr0, b_g_f, b_e_f, transverse=False)
    corr_p = {k: sz_correlator(k, p, +omega_bar_mag, populations) for k in
              ("gg", "ee", "ge", "eg")}
    corr_m = {k: sz_correlator(k, p, -omega_bar_mag, populations) for k in
              ("gg", "ee", "ge", "eg")}
    gamma_plus = _relaxation_form(corr_p, b_g_f, b_e_f, +1)
    gamma_minus = _relaxation_form(corr_m, b_g_f, b_e_f, -1)
    return gamma_phi, gamma_plus, gamma_minus


def zero_subspace_rates(p, a_g_f, a_e_f, omega_bar_mag, populations=None,
                        correlator=None):
    """m=0 subspace contribution (Gamma_phi^0, Gamma_+^0, Gamma_-^0).

    Dephasing uses the zero-frequency closed forms of the projector
    correlators.  The relaxation channel needs those correlators at
    +-|omega_bar|, for which no closed forms exist; it is evaluated with the
    numerical resolvent of the seven-level rate model (``correlator`` may
    supply a prebuilt ``pair, omega -> value`` callable to reuse
    factorizations).
    """
    corr0 = sigma_correlators_zero(p, populations)
    gamma_phi = _quadratic_form(corr0, a_g_f, a_e_f, transverse=False)

    if correlator is None:
        correlator = _resolvent_sigma_correlator(p)
    corr_p = {k: correlator(k, +omega_bar_mag) for k in ("gg", "ee", "ge", "eg")}
    corr_m = {k: correlator(k, -omega_bar_mag) for k in ("gg", "ee", "ge", "eg")}
    gamma_plus = _relaxation_form(corr_p, a_g_f, a_e_f, +1)
    gamma_minus = _relaxation_form(corr_m, a_g_f, a_e_f, -1)
    return gamma_phi, gamma_plus, gamma_minus


def _resolvent_sigma_correlator(p):
    """pair, omega -> <sigma_{0a}; sigma_{0b}>_omega via the resolvent."""
    from . import liouville
    from .model import build_electron_model

    m = build_electron_model("seven-level-rate", p)
    sup = liouville.build_superoperator(m)
    ss = liouville.steady_state(m, sup)
    ops = {"g": m.projector("0_g"), "e": m.projector("0_e")}

    def corr(pair, omega):
        return liouville.correlation(m, ops[pair[0]], ops[pair[1]], omega,
                                     sup, ss).value

    return corr


def seven_level_rates(p, pv, frame, populations=None, correlator=None):
    """Total analytic rates of the seven-level model, with components."""
    b_g_f = frame.components(pv.b_g)
    b_e_f = frame.components(pv.b_e)
    a_g_f = frame.components(pv.a_g)
    a_e_f = frame.components(pv.a_e)
    w = frame.omega_bar_mag
    phi1, plus1, minus1 = pm1_subspace_rates(p, b_g_f, b_e_f, w, populations)
    phi0, plus0, minus0 = zero_subspace_rates(p, a_g_f, a_e_f, w, populations,
                                              correlator)
    return RateSet(
        gamma_phi=phi0 + phi1, gamma_plus=plus0 + plus1,
        gamma_minus=minus0 + minus1, omega_bar_mag=w,
        gamma_phi_0=phi0, gamma_phi_1=phi1,
        gamma_plus_0=plus0, gamma_plus_1=plus1,
        gamma_minus_0=minus0, gamma_minus_1=minus1)


def pm1_saturation_rates(p, b_g_f, b_e_f):
    """Saturated-pumping plateau of the m=+-1 contribution."""
    ds = dwell_stats(p)
    mean = 0.5 * (np.asarray(b_g_f) + np.asarray(b_e_f))
    pref = ds.tau1_tilde**2 / (2.0 * ds.cycle_tilde)
    gamma_phi = 2.0 * pref * mean[2] ** 2
    # Per-rate plateau; the leading 2 counts the m=+1 and m=-1 subspaces.
    gamma_pm = 2.0 * 0.5 * pref * (mean[0] ** 2 + mean[1] ** 2)
    return gamma_phi, gamma_pm, gamma_pm


def zero_saturation_rates(p, a_g_f, a_e_f):
    """Saturated-pumping plateau of the m=0 contribution."""
    ds = dwell_stats(p)
    mean = 0.5 * (np.asarray(a_g_f) + np.asarray(a_e_f))
    pref = ds.tau0_tilde**2 / (2.0 * ds.cycle_tilde)
    gamma_phi = pref * mean[2] ** 2
    gamma_pm = 0.5 * pref * (mean[0] ** 2 + mean[1] ** 2)
    return gamma_phi, gamma_pm, gamma_pm


def lorentzian_width(p, gamma_n_rad):
    """Characteristic field width (mT) of the relaxation Lorentzian.

    delta_B = sqrt(R^2 / ((2R+g1)^2 + 2(R+g1)gs1 + gs1^2)) * gs1 / |gamma_N|
    with gamma_n_rad in rad/us per mT.
    """
    if gamma_n_rad == 0:
        raise ValueError("gamma_N must be nonzero")
    r, g1, gs1 = p.rate, p.gamma1, p.gamma_s1
    radical = r * r / ((2 * r + g1) ** 2 + 2 * (r + g1) * gs1 + gs1 * gs1)
    return np.sqrt(radical) * gs1 / abs(gamma_n_rad)


def bloch_signal(frame, t1, t2, omega_bar_mag, t):
    """Predicted <I_x(t)> for the (|up> + |down>)/sqrt(2) initial state.

    Non-oscillatory term exp(-t/T1) sin^2(theta) cos^2(phi) / 2 plus the
    oscillatory term exp(-t/T2) (1 - cos^2(phi) sin^2(theta))
    cos(|omega_bar| t) / 2.
    """
    t = np.asarray(t, dtype=float)
    s2c2 = np.sin(frame.theta) ** 2 * np.cos(frame.phi) ** 2
    non_osc = np.exp(-t / t1) * s2c2 / 2.0
    osc = np.exp(-t / t2) * (1.0 - s2c2) * np.cos(omega_bar_mag * t) / 2.0
    return non_osc + osc
