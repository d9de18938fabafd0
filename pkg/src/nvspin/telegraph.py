"""Monte Carlo telegraph oracle for nuclear dephasing and relaxation.

The electron is a classical continuous-time Markov chain hopping between
levels; the nucleus accumulates phase (dephasing channel) or rotates as a
classical Bloch vector (relaxation channel) under the piecewise-constant
per-level precession field.  Classical vector rotation is exact for
spin-1/2 expectation values, so this engine is fully independent of the
Lindblad machinery it validates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from ._telegraph_kernels import BACKEND, bloch_kernel, phase_kernel, \
    sample_kernel
from .errors import InsufficientDecay, StatisticsTooPoor

__all__ = [
    "BACKEND", "TelegraphModel", "HoppingPath", "PathEnsemble",
    "OracleEstimate", "DwellEstimate", "sample_paths", "dephasing_estimate",
    "oracle_estimate", "dwell_statistics", "two_level_telegraph",
    "seven_level_telegraph",
]

_CHUNK = 16384


@dataclass(frozen=True)
class TelegraphModel:
    """Classical hopping model: rate matrix (1/us) and per-level precession
    vectors (rad/us)."""

    k_matrix: np.ndarray
    freq: np.ndarray

    def __post_init__(self):
        k = np.array(self.k_matrix, dtype=float)
        w = np.array(self.freq, dtype=float)
        n = k.shape[0]
        if k.shape != (n, n):
            raise ValueError("k_matrix must be square")
        if w.shape != (n, 3):
            raise ValueError(f"freq must be {n}x3")
        off = k - np.diag(np.diag(k))
        if off.min() < 0:
            raise ValueError("off-diagonal rates must be >= 0")
        col = np.abs(k.sum(axis=0))
        if col.max() > 1e-9 * max(1.0, np.abs(k).max()):
            raise ValueError("k_matrix columns must sum to zero")
        object.__setattr__(self, "k_matrix", k)
        object.__setattr__(self, "freq", w)

    @property
    def n_levels(self):
        return self.k_matrix.shape[0]

    def steady(self):
        """Stationary distribution of the chain."""
        return numerics.nullspace_steady(self.k_matrix, kind="rate")


@dataclass(frozen=True)
class HoppingPath:
    """One sampled electron path: levels and dwell durations per segment."""

    levels: np.ndarray
    dwells: np.ndarray

    @property
    def jump_times(self):
        """Times of the level changes (strictly increasing)."""
        return np.cumsum(self.dwells)[:-1]

    def cycle_dwells(self, ground=0, excited=1):
        """(tau_g, tau_e) arrays over complete ground-excited cycles.

        Only valid for strictly alternating two-level paths; the final
        (censored) segment is dropped.
        """
        lev = self.levels[:-1]
        dw = self.dwells[:-1]
        g_idx = np.flatnonzero(lev == ground)
        g_idx = g_idx[g_idx + 1 < lev.size]
        if g_idx.size and not np.all(lev[g_idx + 1] == excited):
            raise ValueError("path does not alternate ground/excited")
        return dw[g_idx], dw[g_idx + 1]


class PathEnsemble:
    """Rectangular storage of n sampled paths; indexable as HoppingPath."""

    def __init__(self, states, dwells, counts, t_max, model):
        self.states = states
        self.dwells = dwells
        self.counts = counts
        self.t_max = float(t_max)
        self.model = model

    def __len__(self):
        return self.counts.size

    def __getitem__(self, i):
        c = self.counts[i]
        return HoppingPath(self.states[i, :c].copy(), self.dwells[i, :c].copy())

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def _budget(q_max, t_max):
    mean = q_max * t_max
    return int(np.ceil(mean + 6.0 * np.sqrt(mean + 1.0) + 20.0))


def sample_paths(tm, t_max, n, seed, initial_state="steady"):
    """Sample n telegraph paths of duration t_max; deterministic per seed.

    ``initial_state`` is "steady" (sampled from the stationary distribution)
    or a level index.  Identical seeds give identical paths bit-for-bit,
    independent of the kernel backend.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.default_rng(seed)
    k = tm.k_matrix
    n_levels = tm.n_levels
    q = -np.diag(k).copy()
    probs = np.where(q > 0, (k - np.diag(np.diag(k))).T
                     / np.where(q > 0, q, 1.0)[:, None], 0.0)
    cum_probs = np.cumsum(probs, axis=1)

    m = _budget(q.max(initial=0.0), t_max)
    states = np.zeros((n, m + 1), dtype=np.int16)
    dwells = np.zeros((n, m + 1), dtype=np.float32)
    counts = np.zeros(n, dtype=np.int64)

    if initial_state == "steady":
        init_all = rng.choice(n_levels, size=n, p=tm.steady())
    else:
        init_all = np.full(n, int(initial_state), dtype=np.int16)
    init_all = np.ascontiguousarray(init_all, dtype=np.int16)

    # Keep the pre-drawn random blocks near 10^7 elements regardless of the
    # per-path jump budget.
    chunk = max(256, min(_CHUNK, int(1e7 // max(m, 1)) + 1))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        exp_rnd = rng.standard_exponential((hi - lo, m))
        uni_rnd = rng.random((hi - lo, m))
        sample_kernel(q, cum_probs, exp_rnd, uni_rnd, init_all[lo:hi],
                      float(t_max), states[lo:hi], dwells[lo:hi],
                      counts[lo:hi])
    if (counts < 0).any():
        raise RuntimeError("random budget exhausted; t_max * max rate "
                           "exceeded the 6-sigma jump allowance")
    return PathEnsemble(states, dwells, counts, t_max, tm)


@dataclass(frozen=True)
class OracleEstimate:
    """Monte Carlo rate estimates with batch-resampled standard errors."""

    gamma_phi: float
    gamma_phi_err: float
    gamma_relax: float          # Gamma_+ + Gamma_- (decay rate of <v_Z>)
    gamma_relax_err: float
    n_paths: int


def _snr_slice(curve, floor):
    """Contiguous prefix of the curve that stays above the noise floor.

    ``floor`` may be a scalar or a per-point array.  Truncating at the first
    crossing (rather than masking) removes the selection bias of tail points
    that fluctuate back above the floor.
    """
    below = np.nonzero(np.abs(curve) < floor)[0]
    stop = int(below[0]) if below.size else np.size(curve)
    return slice(0, max(stop, 2))


def _batch_fit(grid, pooled, pooled_slice, batch_curves, max_rel_err):
    """Central rate from the pooled curve; error from batch-fit scatter.

    Fitting each noisy batch curve and averaging biases the rate (the fit
    window couples to the noise floor), so batches set only the standard
    error while the far-less-noisy pooled curve sets the estimate.  The
    pooled curve arrives pre-truncated at its noise floor; each
    ``batch_curves`` element is a (curve, floor) pair truncated here.
    """
    if pooled_slice.stop < 20:
        raise StatisticsTooPoor(
            f"pooled curve hits the noise floor after {pooled_slice.stop} "
            "grid points; too few paths for this decay window")
    est = float(numerics.fit_decay(grid[pooled_slice], pooled[pooled_slice],
                                   oscillatory=False).rate)
    fits = []
    for curve, floor in batch_curves:
        sl = _snr_slice(curve, floor)
        if sl.stop < 20:
            continue
        try:
            fits.append(numerics.fit_decay(grid[sl], curve[sl],
                                           oscillatory=False).rate)
        except InsufficientDecay:
            continue
    if len(fits) < 2:
        raise StatisticsTooPoor("fewer than two batches produced a decay fit")
    fits = np.asarray(fits)
    err = float(fits.std(ddof=1) / np.sqrt(fits.size))
    if abs(est) > 0 and err / abs(est) > max_rel_err:
        raise StatisticsTooPoor(
            f"relative standard error {err / abs(est):.2f} exceeds "
            f"{max_rel_err:.2f}")
    return est, err


def dephasing_estimate(ens, tm, frame, n_grid=200, n_batches=10,
                       max_rel_err=0.2, channels="both"):
    """Estimate (Gamma_phi, Gamma_+ + Gamma_-) from a path ensemble.

    Gamma_phi comes from the decay of |<e^{-i int omega_Z dt}>| across
    paths, the relaxation sum from the decay of the ensemble-averaged
    Bloch-vector component along e_Z.  Standard errors are resampled over
    ``n_batches`` contiguous path batches; StatisticsTooPoor is raised above
    ``max_rel_err`` relative error.

    When the two rates are very different, sample one ensemble per channel
    (t_max matched to that channel's decay) and pass ``channels`` as "phase"
    or "relax"; the skipped channel's fields come back as nan.
    """
    if channels not in ("both", "phase", "relax"):
        raise ValueError(f"unknown channels selector {channels!r}")
    want_phase = channels in ("both", "phase")
    want_relax = channels in ("both", "relax")
    n = len(ens)
    if n < n_batches:
        raise ValueError("need at least one path per batch")
    wz = np.ascontiguousarray(tm.freq @ frame.e_z)
    mags = np.linalg.norm(tm.freq, axis=1)
    axes = np.where(mags[:, None] > 0,
                    tm.freq / np.where(mags > 0, mags, 1.0)[:, None], 0.0)
    axes = np.ascontiguousarray(axes)
    grid = np.linspace(0.0, ens.t_max, n_grid)
    e_z = np.ascontiguousarray(frame.e_z, dtype=float)

    bounds = np.linspace(0, n, n_batches + 1).astype(int)
    coh2 = np.empty((n_batches, n_grid))
    long = np.empty((n_batches, n_grid))
    for b in range(n_batches):
        lo, hi = bounds[b], bounds[b + 1]
        re = np.zeros(n_grid)
        im = np.zeros(n_grid)
        z = np.zeros(n_grid)
        for clo in range(lo, hi, _CHUNK):
            chi = min(clo + _CHUNK, hi)
            st = np.ascontiguousarray(ens.states[clo:chi])
            dw = np.ascontiguousarray(ens.dwells[clo:chi])
            ct = np.ascontiguousarray(ens.counts[clo:chi])
            if want_phase:
                phase_kernel(st, dw, ct, wz, grid, re, im)
            if want_relax:
                bloch_kernel(st, dw, ct, axes, mags, e_z, grid, z)
        # |mean|^2 of n_b unit phasors overestimates the true squared
        # coherence by (1 - |m|^2)/n_b; remove that exactly before the
        # square root so the fit tail is not noise-floor biased.
        n_b = hi - lo
        h2 = (re / n_b) ** 2 + (im / n_b) ** 2
        # keep the debiased squared coherence SIGNED here; clipping each
        # batch at the noise floor would bias the pooled tail upward and
        # flatten the fitted decay
        coh2[b] = (n_b * h2 - 1.0) / (n_b - 1.0)
        long[b] = z / n_b

    return _fit_channels(grid, coh2, long, np.diff(bounds), want_phase,
                         want_relax, max_rel_err)


def _fit_channels(grid, coh2, long, batch_sizes, want_phase, want_relax,
                  max_rel_err):
    n = int(batch_sizes.sum())
    weights = batch_sizes[:, None] / n
    gp = gp_err = gr = gr_err = float("nan")
    n_batches = len(batch_sizes)
    if want_phase:
        # Pool the signed squared coherences (linear in the per-path phasor
        # sums) and clip only the pooled curve; per-batch magnitudes are
        # needed solely for the scatter-based error bar.  The noise floor is
        # measured from the point-wise batch scatter and the fits truncated
        # where the signal sinks into it.
        pooled2 = (coh2 * weights).sum(axis=0)
        sig2 = coh2.std(axis=0, ddof=1)
        sl = _snr_slice(pooled2, 3.0 * sig2 / np.sqrt(n_batches))
        pooled_coh = np.sqrt(np.maximum(pooled2, 1e-30))
        floor2 = np.sqrt(np.maximum(3.0 * sig2, 1e-30))
        batch_coh = np.sqrt(np.maximum(coh2, 1e-30))
        gp, gp_err = _batch_fit(grid, pooled_coh, sl,
                                [(c, floor2) for c in batch_coh],
                                max_rel_err)
    if want_relax:
        pooled_long = (long * weights).sum(axis=0)
        sigl = long.std(axis=0, ddof=1)
        sl = _snr_slice(pooled_long, 3.0 * sigl / np.sqrt(n_batches))
        gl_floor = 3.0 * sigl
        gr, gr_err = _batch_fit(grid, pooled_long, sl,
                                [(c, gl_floor) for c in long], max_rel_err)
    return OracleEstimate(gp, gp_err, gr, gr_err, n)


def oracle_estimate(tm, frame, t_max, n, seed, n_grid=200, n_batches=10,
                    max_rel_err=0.2, channels="both", initial_state="steady"):
    """Streaming Monte Carlo rate estimate without retaining paths.

    Same estimator as :func:`dephasing_estimate`, but paths are sampled in
    chunks and reduced to the grid sums immediately, so memory stays bounded
    even when t_max spans millions of hops per path.  Deterministic per seed
    (but not bit-compatible with a sample_paths + dephasing_estimate run).
    """
    if channels not in ("both", "phase", "relax"):
        raise ValueError(f"unknown channels selector {channels!r}")
    if n < n_batches:
        raise ValueError("need at least one path per batch")
    want_phase = channels in ("both", "phase")
    want_relax = channels in ("both", "relax")

    rng = np.random.default_rng(seed)
    k = tm.k_matrix
    q = -np.diag(k).copy()
    probs = np.where(q > 0, (k - np.diag(np.diag(k))).T
                     / np.where(q > 0, q, 1.0)[:, None], 0.0)
    cum_probs = np.cumsum(probs, axis=1)
    m = _budget(q.max(initial=0.0), t_max)
    if m > 2e7 or float(m) * n > 1e10:
        raise StatisticsTooPoor(
            f"oracle infeasible: {m} expected hops per path over "
            f"t_max={t_max:.3g} us; the decay is too slow relative to the "
            "hopping rate for direct path sampling")
    chunk = max(8, min(_CHUNK, int(1e7 // max(m, 1)) + 1))

    wz = np.ascontiguousarray(tm.freq @ frame.e_z)
    mags = np.linalg.norm(tm.freq, axis=1)
    axes = np.where(mags[:, None] > 0,
                    tm.freq / np.where(mags > 0, mags, 1.0)[:, None], 0.0)
    axes = np.ascontiguousarray(axes)
    e_z = np.ascontiguousarray(frame.e_z, dtype=float)
    grid = np.linspace(0.0, t_max, n_grid)

    bounds = np.linspace(0, n, n_batches + 1).astype(int)
    coh2 = np.empty((n_batches, n_grid))
    long = np.empty((n_batches, n_grid))
    steady = tm.steady()
    for b in range(n_batches):
        lo, hi = bounds[b], bounds[b + 1]
        re = np.zeros(n_grid)
        im = np.zeros(n_grid)
        z = np.zeros(n_grid)
        for clo in range(lo, hi, chunk):
            nc = min(clo + chunk, hi) - clo
            states = np.zeros((nc, m + 1), dtype=np.int16)
            dwells = np.zeros((nc, m + 1), dtype=np.float32)
            counts = np.zeros(nc, dtype=np.int64)
            if initial_state == "steady":
                init = rng.choice(tm.n_levels, size=nc, p=steady)
            else:
                init = np.full(nc, int(initial_state))
            init = np.ascontiguousarray(init, dtype=np.int16)
            exp_rnd = rng.standard_exponential((nc, m))
            uni_rnd = rng.random((nc, m))
            sample_kernel(q, cum_probs, exp_rnd, uni_rnd, init,
                          float(t_max), states, dwells, counts)
            if (counts < 0).any():
                raise RuntimeError("random budget exhausted; t_max * max "
                                   "rate exceeded the 6-sigma jump allowance")
            if want_phase:
                phase_kernel(states, dwells, counts, wz, grid, re, im)
            if want_relax:
                bloch_kernel(states, dwells, counts, axes, mags, e_z, grid, z)
        n_b = hi - lo
        h2 = (re / n_b) ** 2 + (im / n_b) ** 2
        # keep the debiased squared coherence SIGNED here; clipping each
        # batch at the noise floor would bias the pooled tail upward and
        # flatten the fitted decay
        coh2[b] = (n_b * h2 - 1.0) / (n_b - 1.0)
        long[b] = z / n_b
    return _fit_channels(grid, coh2, long, np.diff(bounds), want_phase,
                         want_relax, max_rel_err)


@dataclass(frozen=True)
class DwellEstimate:
    """Per-cycle dwell statistics of a two-level ensemble."""

    cycle_mean: float     # us
    tau_rms: float        # us, rms of P_g tau_e - P_e tau_g per cycle
    n_cycles: int


def dwell_statistics(ens, ground=0, excited=1):
    """Monte Carlo estimate of the cycle duration and dwell-time rms.

    The statistic per complete cycle k is s_k = P_g tau_k^e - P_e tau_k^g,
    whose rms is the dwell-time uncertainty entering the dephasing rate;
    censored final segments are excluded.
    """
    p_steady = ens.model.steady()
    p_g, p_e = p_steady[ground], p_steady[excited]
    taus_g, taus_e = [], []
    lev = ens.states
    dw = ens.dwells
    for i in range(len(ens)):
        c = ens.counts[i]
        g, e = HoppingPath(lev[i, :c], dw[i, :c]).cycle_dwells(ground, excited)
        taus_g.append(g)
        taus_e.append(e)
    tau_g = np.concatenate(taus_g)
    tau_e = np.concatenate(taus_e)
    if tau_g.size == 0:
        raise StatisticsTooPoor("no complete hopping cycles sampled")
    s = p_g * tau_e - p_e * tau_g
    cycle = float(np.mean(tau_g + tau_e))
    return DwellEstimate(cycle, float(np.sqrt(np.mean(s * s))), s.size)


def two_level_telegraph(p, omega_g, omega_e):
    """Two-level fluctuator: pumping R up, gamma1 + R down."""
    r, g1 = p.rate, p.gamma1
    k = np.array([[-r, g1 + r], [r, -(g1 + r)]])
    return TelegraphModel(k, np.array([omega_g, omega_e], dtype=float))


def seven_level_telegraph(p, pv, zeeman_nuclear):
    """Seven-level optical cycle with per-level nuclear precession vectors.

    Level order (0_g, -1_g, +1_g, 0_e, -1_e, +1_e, S); frequencies are
    gamma_N B plus a_g/a_e on the m=0 levels and -+ b_g/b_e on m=-+1.
    """
    r, g1, gs1, gs2, gs = p.rate, p.gamma1, p.gamma_s1, p.gamma_s2, p.gamma_s
    n = 7
    k = np.zeros((n, n))

    def add(src, dst, rate):
        k[dst, src] += rate
        k[src, src] -= rate

    for mg, me in ((0, 3), (1, 4), (2, 5)):
        add(mg, me, r)
        add(me, mg, g1 + r)
    add(4, 6, gs1)
    add(5, 6, gs1)
    add(6, 0, gs)
    add(3, 1, gs2)
    add(3, 2, gs2)

    w = np.asarray(zeeman_nuclear, dtype=float)
    freq = np.array([
        w + pv.a_g, w - pv.b_g, w + pv.b_g,
        w + pv.a_e, w - pv.b_e, w + pv.b_e,
        w,
    ])
    return TelegraphModel(k, freq)
