"""Hot kernels for the Monte Carlo telegraph sampler.

Two interchangeable backends: numba-compiled per-path loops (default when
numba imports) and vectorized numpy fallbacks.  Selection is made at import
time; set NVSPIN_NO_NUMBA=1 to force the numpy path.  Both backends consume
pre-drawn random arrays, so path samples are bit-identical across backends
for the same seed.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:          # pragma: no cover - numba is an install extra
    numba = None

_DISABLED = os.environ.get("NVSPIN_NO_NUMBA", "").lower() in ("1", "true", "yes")
USE_NUMBA = numba is not None and not _DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"


# --------------------------------------------------------------------------
# continuous-time Markov chain sampling
#
# states[i, j] is the level occupied during segment j of path i, dwells[i, j]
# its duration; counts[i] segments total, the last one truncated at t_max.
# counts[i] = -1 flags random-budget overflow (caller re-runs with more).

def _sample_numpy(q, cum_probs, exp_rnd, uni_rnd, init, t_max,
                  states, dwells, counts):
    n, m = exp_rnd.shape
    t = np.zeros(n)
    s = init.copy()
    done = np.zeros(n, dtype=bool)
    states[:, 0] = s
    counts[:] = -1
    for j in range(m):
        qs = q[s]
        full = np.where(qs > 0, exp_rnd[:, j] / np.where(qs > 0, qs, 1.0),
                        np.inf)
        ends_now = ~done & (t + full >= t_max)
        dwells[ends_now, j] = t_max - t[ends_now]
        counts[ends_now] = j + 1
        done |= ends_now
        if done.all():
            return
        cont = ~done
        dwells[cont, j] = full[cont]
        t[cont] += full[cont]
        nxt = np.minimum((uni_rnd[cont, j, None]
                          > cum_probs[s[cont]]).sum(axis=1),
                         cum_probs.shape[1] - 1)
        s[cont] = nxt
        states[cont, j + 1] = nxt


def _sample_loop(q, cum_probs, exp_rnd, uni_rnd, init, t_max,
                 states, dwells, counts):
    n, m = exp_rnd.shape
    n_levels = cum_probs.shape[1]
    for i in range(n):
        t = 0.0
        s = init[i]
        states[i, 0] = s
        counts[i] = -1
        for j in range(m):
            qs = q[s]
            if qs > 0.0:
                full = exp_rnd[i, j] / qs
            else:
                full = np.inf
            if t + full >= t_max:
                dwells[i, j] = t_max - t
                counts[i] = j + 1
                break
            dwells[i, j] = full
            t += full
            u = uni_rnd[i, j]
            nxt = 0
            while nxt < n_levels - 1 and u > cum_probs[s, nxt]:
                nxt += 1
            s = nxt
            states[i, j + 1] = s


# --------------------------------------------------------------------------
# phase-factor accumulation: sums of e^{-i phi(t)} on a time grid

def _phase_numpy(states, dwells, counts, wz, grid, re_out, im_out):
    n, _ = dwells.shape
    ends = np.cumsum(dwells, axis=1, dtype=np.float64)
    starts = ends - dwells
    phi_cum = np.cumsum(wz[states] * dwells, axis=1)
    rows = np.arange(n)
    for k, t in enumerate(grid):
        j = np.minimum((ends < t).sum(axis=1), counts - 1)
        phi0 = np.where(j > 0, phi_cum[rows, np.maximum(j - 1, 0)], 0.0)
        phi = phi0 + wz[states[rows, j]] * (t - starts[rows, j])
        re_out[k] += np.cos(phi).sum()
        im_out[k] += -np.sin(phi).sum()


def _phase_loop(states, dwells, counts, wz, grid, re_out, im_out):
    n, _ = dwells.shape
    n_grid = grid.shape[0]
    for i in range(n):
        phi = 0.0
        t0 = 0.0
        k = 0
        for j in range(counts[i]):
            w = wz[states[i, j]]
            t1 = t0 + dwells[i, j]
            last = j == counts[i] - 1
            while k < n_grid and (grid[k] < t1 or last):
                p = phi + w * (grid[k] - t0)
                re_out[k] += np.cos(p)
                im_out[k] += -np.sin(p)
                k += 1
            phi += w * dwells[i, j]
            t0 = t1


# --------------------------------------------------------------------------
# classical Bloch-vector rotation: sums of v(t) . e_Z on a time grid

def _rotate(v, axis, angle):
    c, s = np.cos(angle), np.sin(angle)
    dot = axis[0] * v[0] + axis[1] * v[1] + axis[2] * v[2]
    cross0 = axis[1] * v[2] - axis[2] * v[1]
    cross1 = axis[2] * v[0] - axis[0] * v[2]
    cross2 = axis[0] * v[1] - axis[1] * v[0]
    return np.array([
        v[0] * c + cross0 * s + axis[0] * dot * (1.0 - c),
        v[1] * c + cross1 * s + axis[1] * dot * (1.0 - c),
        v[2] * c + cross2 * s + axis[2] * dot * (1.0 - c),
    ])


def _bloch_numpy(states, dwells, counts, axes, mags, e_z, grid, z_out):
    n, m = dwells.shape
    ends = np.cumsum(dwells, axis=1, dtype=np.float64)
    starts = ends - dwells
    rows = np.arange(n)

    # Bloch vector at the start of every segment, path-chunked for memory.
    v_starts = np.empty((n, m, 3))
    v = np.broadcast_to(e_z, (n, 3)).copy()
    for j in range(int(counts.max())):
        v_starts[:, j] = v
        ax = axes[states[:, j]]
        ang = mags[states[:, j]] * dwells[:, j]
        c, s = np.cos(ang)[:, None], np.sin(ang)[:, None]
        dot = (ax * v).sum(axis=1, keepdims=True)
        v = v * c + np.cross(ax, v) * s + ax * dot * (1.0 - c)

    for k, t in enumerate(grid):
        j = np.minimum((ends < t).sum(axis=1), counts - 1)
        v0 = v_starts[rows, j]
        ax = axes[states[rows, j]]
        ang = mags[states[rows, j]] * (t - starts[rows, j])
        c, s = np.cos(ang)[:, None], np.sin(ang)[:, None]
        dot = (ax * v0).sum(axis=1, keepdims=True)
        vt = v0 * c + np.cross(ax, v0) * s + ax * dot * (1.0 - c)
        z_out[k] += (vt @ e_z).sum()


def _bloch_loop(states, dwells, counts, axes, mags, e_z, grid, z_out):
    n, _ = dwells.shape
    n_grid = grid.shape[0]
    for i in range(n):
        v = e_z.copy()
        t0 = 0.0
        k = 0
        for j in range(counts[i]):
            s = states[i, j]
            t1 = t0 + dwells[i, j]
            last = j == counts[i] - 1
            while k < n_grid and (grid[k] < t1 or last):
                vt = _rotate(v, axes[s], mags[s] * (grid[k] - t0))
                z_out[k] += vt[0] * e_z[0] + vt[1] * e_z[1] + vt[2] * e_z[2]
                k += 1
            v = _rotate(v, axes[s], mags[s] * dwells[i, j])
            t0 = t1


if USE_NUMBA:
    _rotate = numba.njit(cache=True)(_rotate)
    sample_kernel = numba.njit(cache=True)(_sample_loop)
    phase_kernel = numba.njit(cache=True)(_phase_loop)
    bloch_kernel = numba.njit(cache=True)(_bloch_loop)
else:
    sample_kernel = _sample_numpy
    phase_kernel = _phase_numpy
    bloch_kernel = _bloch_numpy
