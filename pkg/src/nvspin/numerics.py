"""Dense complex linear algebra and decay-curve fitting.

Everything here operates on plain numpy arrays.  Matrices are small
(<= 200 x 200), so robustness is preferred over speed: nullspaces and
resolvents go through full SVDs rather than iterative methods.

Vectorization of density matrices uses the column-stacking convention,
vec(A @ rho @ B) = (B.T kron A) @ vec(rho), so vec/unvec use Fortran order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.signal

from .errors import DegenerateNullspace, InsufficientDecay, NotTracePreserving, \
    SingularAtFrequency

__all__ = [
    "DecayFit", "kron", "vec", "unvec", "nullspace_steady",
    "resolvent_solve", "fit_decay",
]

# Second-smallest singular value of a Liouvillian must exceed this times the
# largest one, otherwise the steady state is ambiguous.
DEGENERACY_THRESHOLD = 1e-8


def kron(a, b):
    """Kronecker product, (A kron B)[i*rB+k, j*cB+l] = A[i,j] B[k,l]."""
    return np.kron(np.asarray(a), np.asarray(b))


def vec(rho):
    """Column-stack a matrix into a vector."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim=None):
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    if dim is None:
        dim = round(np.sqrt(v.size))
        if dim * dim != v.size:
            raise ValueError(f"vector of length {v.size} is not a stacked square matrix")
    return v.reshape(dim, dim, order="F")


def _is_square_dim(k):
    r = round(np.sqrt(k))
    return r * r == k


def nullspace_steady(lmat, kind="auto"):
    """Steady state of a trace-preserving generator ``lmat``.

    kind="superoperator": lmat is dim^2 x dim^2 in column-stacking convention;
    returns the vectorized density matrix, Hermitized and normalized to
    trace 1.  kind="rate": lmat is a classical rate matrix (columns sum to
    zero); returns the population vector normalized to sum 1.  kind="auto"
    picks "superoperator" when the dimension is a perfect square.

    Raises DegenerateNullspace when a second singular value falls below
    threshold and NotTracePreserving when the trace functional is not a left
    null vector.
    """
    lmat = np.asarray(lmat, dtype=complex)
    k = lmat.shape[0]
    if lmat.shape != (k, k):
        raise ValueError("generator must be square")
    if kind == "auto":
        kind = "superoperator" if _is_square_dim(k) else "rate"

    scale = np.linalg.norm(lmat)
    if kind == "superoperator":
        dim = round(np.sqrt(k))
        left = vec(np.eye(dim))
    else:
        left = np.ones(k)
    if scale > 0 and np.linalg.norm(left @ lmat) > 1e-10 * scale:
        raise NotTracePreserving(
            "identity is not a left null vector of the generator")

    _, s, vh = np.linalg.svd(lmat)
    if s[0] > 0 and s[-2] < DEGENERACY_THRESHOLD * s[0]:
        raise DegenerateNullspace(
            f"two singular values below threshold (s={s[-2:]})")
    v = vh[-1].conj()

    if kind == "rate":
        pops = v.real
        total = pops.sum()
        if abs(total) < 1e-12:
            raise DegenerateNullspace("null vector has zero total population")
        pops = pops / total
        return pops

    rho = unvec(v)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise DegenerateNullspace("null vector has zero trace")
    rho = rho / tr
    rho = 0.5 * (rho + rho.conj().T)
    return vec(rho)


def resolvent_solve(lmat, omega, rhs):
    """Solve (L - i*omega) x = rhs, deflating the steady-state direction.

    ``rhs`` may be a matrix (column-stacked internally) or a vector; the
    result has the same shape.  At omega = 0 the right-hand side must be
    traceless (it is b~ P by construction) and the solve is performed in the
    complement of the one-dimensional nullspace via a rank-revealing
    pseudo-inverse.  The residual is checked to 1e-10 relative.
    """
    lmat = np.asarray(lmat, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    matrix_input = rhs.ndim == 2
    r = vec(rhs) if matrix_input else rhs

    a = lmat - 1j * omega * np.eye(lmat.shape[0])
    u, s, vh = np.linalg.svd(a)
    cutoff = 1e-12 * s[0] if s[0] > 0 else 0.0
    n_small = int(np.sum(s <= cutoff))
    if n_small > 1:
        raise SingularAtFrequency(
            f"deflated operator rank-deficient at omega={omega} "
            f"({n_small} singular values below cutoff)")
    sinv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    x = vh.conj().T @ (sinv * (u.conj().T @ r))

    rnorm = np.linalg.norm(r)
    if rnorm > 0:
        residual = np.linalg.norm(a @ x - r) / rnorm
        if residual > 1e-10:
            raise SingularAtFrequency(
                f"resolvent residual {residual:.2e} at omega={omega}")
    if matrix_input:
        return unvec(x, rhs.shape[0])
    return x


@dataclass(frozen=True)
class DecayFit:
    """Exponential decay parameters extracted from a sampled signal."""

    rate: float          # 1/us
    frequency: float     # rad/us, zero in non-oscillatory mode
    amplitude: float
    residual: float      # rms of the fit error over the fitted window


# The fit window ends where the amplitude has dropped to e^-3 of its peak:
# three decay constants of usable signal, before noise-floor bias sets in.
_WINDOW_FLOOR = np.exp(-3.0)


def _loglinear_fit(t, y):
    """Least-squares line through (t, log y); returns (rate, amplitude, rms)."""
    logy = np.log(y)
    coeff = np.polyfit(t, logy, 1)
    fit = np.polyval(coeff, t)
    rms = float(np.sqrt(np.mean((logy - fit) ** 2)))
    return -coeff[0], float(np.exp(coeff[1])), rms


def fit_decay(times, values, oscillatory=False):
    """Fit an exponential decay rate (and carrier frequency) to a signal.

    Non-oscillatory mode fits ln|values| by least squares over the window
    where |value| > max * e^-3.  Oscillatory mode fits the envelope of the
    analytic signal the same way, estimates the carrier from zero crossings,
    and refines (rate, frequency) with a damped-cosine least-squares fit.

    Raises InsufficientDecay if the signal decays by less than a factor e
    over the grid.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size < 20:
        raise ValueError("need at least 20 samples")
    if t.size != y.size:
        raise ValueError("times and values must have equal length")

    mag = np.abs(y)
    peak = mag.max()
    if peak < 1e-6:
        raise InsufficientDecay("signal starts below the 1e-6 noise floor")

    if not oscillatory:
        window = mag > peak * _WINDOW_FLOOR
        if mag[window].min() > peak * np.exp(-1.0):
            raise InsufficientDecay("signal decays by less than a factor e")
        rate, amp, rms = _loglinear_fit(t[window], mag[window])
        return DecayFit(rate=float(rate), frequency=0.0,
                        amplitude=amp, residual=rms)

    env = np.abs(scipy.signal.hilbert(y))
    # Trim the edge artifacts of the analytic signal.
    guard = max(2, t.size // 10)
    core = slice(guard, t.size - guard)
    t_core, env_core = t[core], env[core]
    window = env_core > peak * _WINDOW_FLOOR
    if env_core[window].min() > peak * np.exp(-1.0):
        raise InsufficientDecay("envelope decays by less than a factor e")
    rate0, amp0, _ = _loglinear_fit(t_core[window], env_core[window])

    crossings = np.sum(np.sign(y[1:]) * np.sign(y[:-1]) < 0)
    span = t[-1] - t[0]
    freq0 = np.pi * crossings / span if span > 0 else 0.0

    def damped_cosine(tt, amp, rate, freq, phase):
        return amp * np.exp(-rate * tt) * np.cos(freq * tt + phase)

    try:
        popt, _ = scipy.optimize.curve_fit(
            damped_cosine, t, y, p0=[amp0, max(rate0, 0.0), freq0, 0.0],
            maxfev=5000)
        amp, rate, freq = abs(popt[0]), popt[1], abs(popt[2])
        resid = float(np.sqrt(np.mean((y - damped_cosine(t, *popt)) ** 2)))
    except RuntimeError:
        amp, rate, freq = amp0, rate0, freq0
        resid = float("nan")
    return DecayFit(rate=float(rate), frequency=float(freq),
                    amplitude=float(amp), residual=resid)
