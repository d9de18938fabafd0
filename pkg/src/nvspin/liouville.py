"""Liouvillian superoperators, steady states, and resolvent correlators.

Column-stacking convention throughout:
L = -i (I kron H - H.T kron I)
    + sum_a gamma_a [ conj(L_a) kron L_a
                      - (I kron L_a^dag L_a + (L_a^dag L_a).T kron I) / 2 ].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .rates import RateSet

__all__ = [
    "Superoperator", "SteadyState", "CorrelationValue", "build_superoperator",
    "steady_state", "correlation", "markov_rates_numeric",
]


@dataclass(frozen=True)
class Superoperator:
    """Vectorized generator of an electron model."""

    matrix: np.ndarray
    model: object


@dataclass(frozen=True)
class SteadyState:
    """Steady density matrix with populations keyed by level label."""

    rho: np.ndarray
    populations: dict

    def population(self, label):
        return self.populations[label]


@dataclass(frozen=True)
class CorrelationValue:
    """Steady-state correlator <a; b>_omega = -Tr a~ (L - i w)^-1 b~ P."""

    value: complex
    omega: float


def build_superoperator(m):
    """Lindblad-form superoperator of an :class:`ElectronModel`."""
    dim = m.dim
    eye = np.eye(dim, dtype=complex)
    h = m.hamiltonian
    lmat = -1j * (numerics.kron(eye, h) - numerics.kron(h.T, eye))
    for op, rate in m.jumps:
        if rate == 0.0:
            continue
        op = np.asarray(op, dtype=complex)
        ldl = op.conj().T @ op
        lmat = lmat + rate * (
            numerics.kron(op.conj(), op)
            - 0.5 * numerics.kron(eye, ldl)
            - 0.5 * numerics.kron(ldl.T, eye))
    return Superoperator(lmat, m)


def steady_state(m, superop=None):
    """Unique steady state of the model's Liouvillian."""
    sup = superop if superop is not None else build_superoperator(m)
    v = numerics.nullspace_steady(sup.matrix, kind="superoperator")
    rho = numerics.unvec(v, m.dim)
    pops = {lab: float(rho[i, i].real) for i, lab in enumerate(m.labels)}
    return SteadyState(rho, pops)


def _fluctuation(op, rho_ss):
    return op - np.trace(op @ rho_ss) * np.eye(op.shape[0])


def correlation(m, a_op, b_op, omega, superop=None, steady=None):
    """<a; b>_omega via the numerical resolvent.

    Fluctuation parts a~ = a - <a>, b~ = b - <b> are formed internally
    against the steady state; at omega = 0 the solve deflates the
    steady-state direction.
    """
    sup = superop if superop is not None else build_superoperator(m)
    ss = steady if steady is not None else steady_state(m, sup)
    a_t = _fluctuation(np.asarray(a_op, dtype=complex), ss.rho)
    b_t = _fluctuation(np.asarray(b_op, dtype=complex), ss.rho)
    x = numerics.resolvent_solve(sup.matrix, omega, b_t @ ss.rho)
    value = -np.trace(a_t @ x)
    return CorrelationValue(complex(value), float(omega))


def markov_rates_numeric(m, f_ops, frame, superop=None, steady=None):
    """Markovian nuclear rates from resolvent correlators of the coupling.

    Gamma_phi = Re <F_Z; F_Z>_0 and Gamma_pm = Re <F_pm; F_mp>_{pm |w|} / 2,
    with F resolved in the tilted frame.  ``f_ops`` are the (F_x, F_y, F_z)
    electron-space components of the diagonal (no-spin-flip) coupling.
    """
    sup = superop if superop is not None else build_superoperator(m)
    ss = steady if steady is not None else steady_state(m, sup)

    f_arr = np.array([np.asarray(op, dtype=complex) for op in f_ops])
    f_x = np.tensordot(frame.e_x, f_arr, axes=(0, 0))
    f_y = np.tensordot(frame.e_y, f_arr, axes=(0, 0))
    f_z = np.tensordot(frame.e_z, f_arr, axes=(0, 0))
    f_plus = f_x + 1j * f_y
    f_minus = f_x - 1j * f_y
    w = frame.omega_bar_mag

    gamma_phi = correlation(m, f_z, f_z, 0.0, sup, ss).value.real
    gamma_plus = 0.5 * correlation(m, f_plus, f_minus, +w, sup, ss).value.real
    gamma_minus = 0.5 * correlation(m, f_minus, f_plus, -w, sup, ss).value.real
    return RateSet(gamma_phi=gamma_phi, gamma_plus=gamma_plus,
                   gamma_minus=gamma_minus, omega_bar_mag=w)
