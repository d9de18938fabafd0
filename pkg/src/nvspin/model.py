"""NV electron models, hyperfine geometry, and the tilted nuclear frame.

Unit conventions (used consistently across the package):

* time in us, magnetic field in mT;
* quantities quoted in MHz (hyperfine tensors, zero-field splittings,
  gamma_e * B, gamma_N * B) are linear frequencies and carry a 2*pi when
  converted to angular rad/us;
* decay and pumping rates (gamma1, gamma_s, gamma_s1, gamma_s2, gamma_phi,
  R) are rate constants in 1/us with no 2*pi.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import PerturbationInvalid, UnknownKind

__all__ = [
    "TWO_PI", "GAMMA_E_MHZ_PER_MT", "GAMMA_N_MHZ_PER_MT", "D_GS_MHZ",
    "D_ES_MHZ", "SEVEN_LABELS", "TWO_LABELS", "PumpingParams",
    "HyperfineTensors", "FieldSetup", "ElectronModel", "PrecessionVectors",
    "Frame", "carbon13b_tensors", "pumping_rate", "build_electron_model",
    "precession_vectors", "mean_frame", "tilted_frame", "hyperfine_operator",
    "two_level_coupling",
]

TWO_PI = 2.0 * np.pi

GAMMA_E_MHZ_PER_MT = 28.025      # NV electron gyromagnetic ratio
GAMMA_N_MHZ_PER_MT = -10.705e-3  # 13C nuclear gyromagnetic ratio
D_GS_MHZ = 2870.0                # ground-state zero-field splitting
D_ES_MHZ = 1410.0                # excited-state zero-field splitting

GAMMA_N_RAD_PER_US_MT = TWO_PI * GAMMA_N_MHZ_PER_MT

# Level ordering used everywhere for the seven-level models.
SEVEN_LABELS = ("0_g", "-1_g", "+1_g", "0_e", "-1_e", "+1_e", "S")
TWO_LABELS = ("g", "e")


@dataclass(frozen=True)
class PumpingParams:
    """Optical driving and dissipation rates of the NV electron (1/us).

    The default gamma1 = 1/(12 ns) and gamma_s = 1/(143 ns); gamma_s1
    defaults to gamma1 and gamma_s2 to gamma_s1/25.  ``pump_rate`` overrides
    the value computed from (omega_rabi, detuning, gamma_phi) when set.
    """

    omega_rabi: float = 0.0        # rad/us
    detuning: float = 0.0          # rad/us
    gamma1: float = 1.0 / 0.012
    gamma_phi: float = 1.0e7       # room-temperature orbital dephasing
    gamma_s1: float = None
    gamma_s2: float = None
    gamma_s: float = 1.0 / 0.143
    pump_rate: float = None        # R, 1/us

    def __post_init__(self):
        if self.gamma_s1 is None:
            object.__setattr__(self, "gamma_s1", self.gamma1)
        if self.gamma_s2 is None:
            object.__setattr__(self, "gamma_s2", self.gamma_s1 / 25.0)
        for name in ("gamma1", "gamma_phi", "gamma_s1", "gamma_s2", "gamma_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.pump_rate is not None and self.pump_rate < 0:
            raise ValueError("pump_rate must be >= 0")

    @property
    def rate(self):
        """Optical pumping rate R, user-set or derived from the drive."""
        if self.pump_rate is not None:
            return self.pump_rate
        return pumping_rate(self)

    def with_rate(self, r):
        return replace(self, pump_rate=float(r))


@dataclass(frozen=True)
class HyperfineTensors:
    """Ground and excited 3x3 hyperfine tensors in MHz (linear frequency)."""

    a_ground: np.ndarray
    a_excited: np.ndarray

    def __post_init__(self):
        for name in ("a_ground", "a_excited"):
            t = np.array(getattr(self, name), dtype=float)
            if t.shape != (3, 3) or not np.all(np.isfinite(t)):
                raise ValueError(f"{name} must be a finite 3x3 matrix")
            if np.max(np.abs(t - t.T)) > 1e-9 * max(1.0, np.max(np.abs(t))):
                raise ValueError(f"{name} must be symmetric")
            object.__setattr__(self, name, t)

    def scaled(self, eta):
        """Tensors divided by a dimensionless factor eta."""
        return HyperfineTensors(self.a_ground / eta, self.a_excited / eta)


def carbon13b_tensors():
    """Ab initio hyperfine tensors of the strongly coupled 13C_b site (MHz)."""
    a_g = np.array([[-8.0, 0.0, -0.7],
                    [0.0, -8.99, 0.0],
                    [-0.7, 0.0, -8.00]])
    a_e = np.array([[-3.78, 0.19, -1.47],
                    [0.19, -5.83, 0.22],
                    [-1.47, 0.22, -4.12]])
    return HyperfineTensors(a_g, a_e)


@dataclass(frozen=True)
class FieldSetup:
    """External magnetic field (mT) plus the fixed NV constants."""

    b_field: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gamma_e: float = GAMMA_E_MHZ_PER_MT     # MHz/mT
    gamma_n: float = GAMMA_N_MHZ_PER_MT     # MHz/mT
    d_gs: float = D_GS_MHZ                  # MHz
    d_es: float = D_ES_MHZ                  # MHz

    def __post_init__(self):
        b = np.array(self.b_field, dtype=float)
        if b.shape != (3,) or not np.all(np.isfinite(b)):
            raise ValueError("b_field must be a finite 3-vector")
        object.__setattr__(self, "b_field", b)

    @property
    def b_transverse(self):
        return np.array([self.b_field[0], self.b_field[1], 0.0])

    @property
    def gamma_n_rad(self):
        """Nuclear gyromagnetic ratio in rad/us per mT."""
        return TWO_PI * self.gamma_n

    @property
    def zeeman_nuclear(self):
        """gamma_N * B in rad/us."""
        return self.gamma_n_rad * self.b_field


@dataclass(frozen=True)
class ElectronModel:
    """Electron level structure with Hamiltonian and Lindblad jumps.

    ``jumps`` is a tuple of (operator, rate) pairs with rates in 1/us;
    the Hamiltonian is in rad/us.
    """

    kind: str
    labels: tuple
    hamiltonian: np.ndarray
    jumps: tuple

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if np.max(np.abs(h - h.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(h))):
            raise ValueError("Hamiltonian must be Hermitian")
        object.__setattr__(self, "hamiltonian", h)
        for _, rate in self.jumps:
            if rate < 0:
                raise ValueError("jump rates must be >= 0")

    @property
    def dim(self):
        return len(self.labels)

    def index(self, label):
        return self.labels.index(label)

    def projector(self, label):
        op = np.zeros((self.dim, self.dim), dtype=complex)
        i = self.index(label)
        op[i, i] = 1.0
        return op


@dataclass(frozen=True)
class PrecessionVectors:
    """Conditional nuclear precession frequencies per electron level (rad/us)."""

    a_g: np.ndarray
    a_e: np.ndarray
    b_g: np.ndarray
    b_e: np.ndarray


@dataclass(frozen=True)
class Frame:
    """Tilted orthonormal triad with e_Z along the mean precession frequency."""

    e_x: np.ndarray
    e_y: np.ndarray
    e_z: np.ndarray      # capital-Z axis of the tilted frame
    theta: float
    phi: float
    omega_bar: np.ndarray    # rad/us
    degenerate: bool = False

    @property
    def omega_bar_mag(self):
        return float(np.linalg.norm(self.omega_bar))

    def components(self, v):
        """Resolve a lab-frame vector into (X, Y, Z) tilted components."""
        v = np.asarray(v, dtype=float)
        return np.array([v @ self.e_x, v @ self.e_y, v @ self.e_z])


def pumping_rate(p):
    """Optical pumping rate R = 2*pi*(Omega_R/2)^2 * delta_gamma(Delta).

    delta_gamma is the Lorentzian-broadened delta function of half width
    gamma = (gamma1 + gamma_phi)/2; at zero detuning this reduces to
    Omega_R^2 / (gamma1 + gamma_phi).
    """
    gamma = 0.5 * (p.gamma1 + p.gamma_phi)
    if gamma <= 0:
        raise ValueError("gamma1 + gamma_phi must be positive")
    lorentz = (gamma / np.pi) / (p.detuning**2 + gamma**2)
    return TWO_PI * (p.omega_rabi / 2.0) ** 2 * lorentz


def _spin1_matrices():
    """Spin-1 operators in the (0, -1, +1) level ordering."""
    # Standard basis ordering (+1, 0, -1):
    sx = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / np.sqrt(2)
    sy = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / np.sqrt(2)
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    # Permute (+1, 0, -1) -> (0, -1, +1).
    perm = np.zeros((3, 3))
    for new, old in enumerate([1, 2, 0]):
        perm[new, old] = 1.0
    return tuple(perm @ s @ perm.T for s in (sx, sy, sz))


SPIN1_X, SPIN1_Y, SPIN1_Z = _spin1_matrices()


def _triplet_hamiltonian(d_mhz, f):
    """D*Sz^2 + gamma_e B.S on one triplet, in rad/us, (0,-1,+1) ordering."""
    h = d_mhz * (SPIN1_Z @ SPIN1_Z)
    for s_op, b in zip((SPIN1_X, SPIN1_Y, SPIN1_Z), f.b_field):
        h = h + f.gamma_e * b * s_op
    return TWO_PI * h


def _ket(dim, i):
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


def _transfer(dim, i_to, i_from):
    op = np.zeros((dim, dim), dtype=complex)
    op[i_to, i_from] = 1.0
    return op


def build_electron_model(kind, p, f=None):
    """Construct the two-level or seven-level NV electron model.

    Kinds: "two-level" (coherently driven optical cycle), "seven-level-rate"
    (incoherent pumping jumps |m_g> -> |m_e> at rate R, the room-temperature
    default), "seven-level-lindblad" (coherent Omega_R drive with the full
    orbital-dephasing jump).
    """
    f = f if f is not None else FieldSetup()
    if kind == "two-level":
        h = np.zeros((2, 2), dtype=complex)
        h[1, 1] = p.detuning
        h[1, 0] = p.omega_rabi / 2.0
        h[0, 1] = p.omega_rabi / 2.0
        jumps = [
            (_transfer(2, 0, 1), p.gamma1),          # spontaneous emission
            (np.diag([0.0, 1.0]).astype(complex), p.gamma_phi),
        ]
        if p.pump_rate is not None:
            # Explicit R: incoherent pumping both ways (absorption plus
            # stimulated emission), as for the seven-level rate variant.
            jumps.append((_transfer(2, 1, 0), p.pump_rate))
            jumps.append((_transfer(2, 0, 1), p.pump_rate))
        return ElectronModel(kind, TWO_LABELS, h, tuple(jumps))

    if kind not in ("seven-level-rate", "seven-level-lindblad"):
        raise UnknownKind(f"unknown electron model kind: {kind!r}")

    dim = 7
    idx = {lab: i for i, lab in enumerate(SEVEN_LABELS)}
    ground = ("0_g", "-1_g", "+1_g")
    excited = ("0_e", "-1_e", "+1_e")

    jumps = []
    for mg, me in zip(ground, excited):
        jumps.append((_transfer(dim, idx[mg], idx[me]), p.gamma1))
    for me in ("-1_e", "+1_e"):
        jumps.append((_transfer(dim, idx["S"], idx[me]), p.gamma_s1))
    jumps.append((_transfer(dim, idx["0_g"], idx["S"]), p.gamma_s))
    for mg in ("-1_g", "+1_g"):
        jumps.append((_transfer(dim, idx[mg], idx["0_e"]), p.gamma_s2))

    if kind == "seven-level-rate":
        # Optical coherence replaced by incoherent spin-conserving pumping at
        # rate R both ways (absorption and stimulated emission); the
        # Hamiltonian plays no role for diagonal couplings, so leave it 0.
        for mg, me in zip(ground, excited):
            jumps.append((_transfer(dim, idx[me], idx[mg]), p.rate))
            jumps.append((_transfer(dim, idx[mg], idx[me]), p.rate))
        h = np.zeros((dim, dim), dtype=complex)
        return ElectronModel(kind, SEVEN_LABELS, h, tuple(jumps))

    h = np.zeros((dim, dim), dtype=complex)
    h[:3, :3] = _triplet_hamiltonian(f.d_gs, f)
    h[3:6, 3:6] = _triplet_hamiltonian(f.d_es, f)
    for me in excited:
        h[idx[me], idx[me]] += p.detuning
    for mg, me in zip(ground, excited):
        h[idx[me], idx[mg]] += p.omega_rabi / 2.0
        h[idx[mg], idx[me]] += p.omega_rabi / 2.0
    dephase = np.zeros((dim, dim), dtype=complex)
    for me in excited:
        dephase[idx[me], idx[me]] = 1.0
    jumps.append((dephase, p.gamma_phi))
    return ElectronModel(kind, SEVEN_LABELS, h, tuple(jumps))


def precession_vectors(f, h):
    """Hyperfine precession vectors a_{g,e}, b_{g,e} in rad/us.

    a_g = -(2 gamma_e / D_gs) B_T . A_g (and likewise a_e with D_es);
    b_{g,e} = e_z . A_{g,e}.  Valid to first order in gamma_e |B_T| / D.
    """
    bt = f.b_transverse
    zeeman_t = f.gamma_e * np.linalg.norm(bt)
    if zeeman_t / f.d_es > 0.3:
        raise PerturbationInvalid(
            f"gamma_e |B_T| / D_es = {zeeman_t / f.d_es:.2f} > 0.3")
    if zeeman_t / f.d_gs > 0.1:
        warnings.warn("transverse Zeeman energy above 10% of D_gs; "
                      "first-order mixing is getting inaccurate")
    a_g = -(2.0 * f.gamma_e / f.d_gs) * (bt @ h.a_ground)
    a_e = -(2.0 * f.gamma_e / f.d_es) * (bt @ h.a_excited)
    b_g = h.a_ground[2, :]
    b_e = h.a_excited[2, :]
    return PrecessionVectors(TWO_PI * a_g, TWO_PI * a_e,
                             TWO_PI * b_g, TWO_PI * b_e)


def tilted_frame(omega_bar):
    """Build the tilted triad (e_X, e_Y, e_Z) with e_Z along omega_bar.

    For |omega_bar| below 1e-12 rad/us the z-aligned fallback frame is
    returned with the degenerate flag set.  When omega_bar has no transverse
    part the azimuth is fixed to pi/2, which makes the frame reduce to
    (e_x, e_y, e_z) for omega_bar along +z and (e_x, -e_y, -e_z) along -z.
    """
    w = np.asarray(omega_bar, dtype=float)
    mag = np.linalg.norm(w)
    if mag < 1e-12:
        return Frame(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]),
                     np.array([0, 0, 1.0]), 0.0, np.pi / 2, w, degenerate=True)
    theta = float(np.arccos(np.clip(w[2] / mag, -1.0, 1.0)))
    if np.hypot(w[0], w[1]) < 1e-12 * mag:
        phi = np.pi / 2
    else:
        phi = float(np.arctan2(w[1], w[0]))
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    e_x = np.array([sp, -cp, 0.0])
    e_y = np.array([cp * ct, sp * ct, -st])
    e_z = np.array([st * cp, st * sp, ct])
    return Frame(e_x, e_y, e_z, theta, phi, w)


def mean_frame(f, pv, populations):
    """Frame of the mean precession frequency.

    omega_bar = gamma_N B + P_0g a_g + P_0e a_e, with the populations taken
    from the mapping by label ("0_g"/"0_e", or "g"/"e" for the two-level
    model).  Populations must sum to 1.
    """
    total = sum(populations.values())
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"populations sum to {total}, expected 1")
    p0g = populations.get("0_g", populations.get("g", 0.0))
    p0e = populations.get("0_e", populations.get("e", 0.0))
    omega_bar = f.zeeman_nuclear + p0g * pv.a_g + p0e * pv.a_e
    return tilted_frame(omega_bar)


def _embedded_spin(dim, offset, component):
    op = np.zeros((dim, dim), dtype=complex)
    op[offset:offset + 3, offset:offset + 3] = component
    return op


def _mixing_unitary(h_triplet):
    """Eigenbasis of a 3x3 triplet Hamiltonian, columns matched to bare levels."""
    _, vecs = np.linalg.eigh(h_triplet)
    # Match each eigenvector to the bare level it overlaps most.
    u = np.zeros_like(vecs)
    taken = set()
    for col in range(3):
        overlaps = np.abs(vecs[:, col]).copy()
        for t in taken:
            overlaps[t] = -1
        row = int(np.argmax(overlaps))
        taken.add(row)
        phase = vecs[row, col] / abs(vecs[row, col])
        u[:, row] = vecs[:, col] / phase
    return u


def hyperfine_operator(h, f, kind="seven-level-rate", include_spin_flip=False,
                       basis="mixed"):
    """Electron-space coupling operator components (F_x, F_y, F_z), rad/us.

    With include_spin_flip=False the diagonal form
    F = S_gz b_g + S_ez b_e + |0_g><0_g| a_g + |0_e><0_e| a_e
    is returned (no electron-spin-flip terms).  With True the full
    F = S_g . A_g + S_e . A_e is built, expressed in the bare or
    field-mixed basis.
    """
    if kind == "two-level":
        pv = precession_vectors(f, h)
        return two_level_coupling(pv)
    if kind not in ("seven-level-rate", "seven-level-lindblad"):
        raise UnknownKind(f"unknown electron model kind: {kind!r}")

    dim = 7
    pv = precession_vectors(f, h)
    if not include_spin_flip:
        s_gz = np.zeros((dim, dim), dtype=complex)
        s_gz[:3, :3] = SPIN1_Z
        s_ez = np.zeros((dim, dim), dtype=complex)
        s_ez[3:6, 3:6] = SPIN1_Z
        p_0g = np.zeros((dim, dim), dtype=complex)
        p_0g[0, 0] = 1.0
        p_0e = np.zeros((dim, dim), dtype=complex)
        p_0e[3, 3] = 1.0
        return tuple(
            s_gz * pv.b_g[alpha] + s_ez * pv.b_e[alpha]
            + p_0g * pv.a_g[alpha] + p_0e * pv.a_e[alpha]
            for alpha in range(3))

    spin = (SPIN1_X, SPIN1_Y, SPIN1_Z)
    comps = []
    for alpha in range(3):
        op = np.zeros((dim, dim), dtype=complex)
        for beta in range(3):
            op += _embedded_spin(dim, 0, spin[beta]) * TWO_PI * h.a_ground[beta, alpha]
            op += _embedded_spin(dim, 3, spin[beta]) * TWO_PI * h.a_excited[beta, alpha]
        comps.append(op)
    if basis == "mixed":
        u_g = _mixing_unitary(_triplet_hamiltonian(f.d_gs, f))
        u_e = _mixing_unitary(_triplet_hamiltonian(f.d_es, f))
        u = np.eye(dim, dtype=complex)
        u[:3, :3] = u_g
        u[3:6, 3:6] = u_e
        comps = [u.conj().T @ c @ u for c in comps]
    elif basis != "bare":
        raise ValueError("basis must be 'mixed' or 'bare'")
    return tuple(comps)


def two_level_coupling(pv, omega_g=None, omega_e=None):
    """Diagonal coupling sigma_gg omega_g + sigma_ee omega_e on the two-level
    model; by default omega_g = a_g and omega_e = a_e."""
    w_g = pv.a_g if omega_g is None else np.asarray(omega_g, dtype=float)
    w_e = pv.a_e if omega_e is None else np.asarray(omega_e, dtype=float)
    comps = []
    for alpha in range(3):
        comps.append(np.diag([w_g[alpha], w_e[alpha]]).astype(complex))
    return tuple(comps)
