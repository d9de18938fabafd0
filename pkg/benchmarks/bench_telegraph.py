"""Benchmark the telegraph sampler kernels: numba vs pure-numpy backend.

The kernel backend is chosen at import time from the NVSPIN_NO_NUMBA
environment flag, so each backend runs in a fresh subprocess and the two
timings are compared at the end.  Path samples are seed-deterministic and
bit-identical across backends; the benchmark asserts that too.

Usage: python3 benchmarks/bench_telegraph.py [--n 4000] [--t-max 4.0]
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time

_WORKER = """
import json, sys, time, hashlib
import numpy as np
from nvspin import model, telegraph

n, t_max, seed = json.loads(sys.argv[1])
p = model.PumpingParams(pump_rate=model.PumpingParams().gamma1)
lam = 2 * p.rate + p.gamma1
tm = telegraph.two_level_telegraph(
    p, [0.0, 0.0, lam / 4], [lam / 4, 0.0, lam / 4])
frame = model.tilted_frame([lam / 12, 0.0, lam / 4])

# warm-up compiles the numba kernels (no-op for the numpy backend)
from nvspin.errors import NvspinError
try:
    telegraph.dephasing_estimate(
        telegraph.sample_paths(tm, 0.5, 64, seed), tm, frame,
        max_rel_err=np.inf)
except NvspinError:
    pass

# the two channels decay on very different time scales, so each gets an
# ensemble with a matched duration (the recommended per-channel pattern)
t0 = time.perf_counter()
ens = telegraph.sample_paths(tm, t_max, n, seed)
ens_r = telegraph.sample_paths(tm, t_max / 10.0, n, seed + 1)
t_sample = time.perf_counter() - t0

t0 = time.perf_counter()
est_p = telegraph.dephasing_estimate(ens, tm, frame, max_rel_err=np.inf,
                                     channels="phase")
est_r = telegraph.dephasing_estimate(ens_r, tm, frame, max_rel_err=np.inf,
                                     channels="relax")
t_estimate = time.perf_counter() - t0

h = hashlib.sha256()
h.update(ens.states.tobytes())
h.update(ens.dwells.tobytes())
h.update(ens.counts.tobytes())
json.dump({
    "backend": telegraph.BACKEND,
    "sample_s": t_sample,
    "estimate_s": t_estimate,
    "gamma_phi": est_p.gamma_phi,
    "gamma_relax": est_r.gamma_relax,
    "paths_sha256": h.hexdigest(),
}, sys.stdout)
"""


def run_backend(no_numba, n, t_max, seed):
    env = dict(os.environ)
    if no_numba:
        env["NVSPIN_NO_NUMBA"] = "1"
    else:
        env.pop("NVSPIN_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, json.dumps([n, t_max, seed])],
        env=env, capture_output=True, text=True)
    if out.returncode != 0:
        sys.stderr.write(out.stderr)
        raise SystemExit(out.returncode)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4000, help="number of paths")
    ap.add_argument("--t-max", type=float, default=15.0,
                    help="path duration in us")
    ap.add_argument("--seed", type=int, default=20240901)
    args = ap.parse_args(argv)

    results = []
    for no_numba in (False, True):
        res = run_backend(no_numba, args.n, args.t_max, args.seed)
        results.append(res)
        print(f"{res['backend']:>6}: sample {res['sample_s']:8.3f} s   "
              f"estimate {res['estimate_s']:8.3f} s   "
              f"gamma_phi {res['gamma_phi']:.5f}   "
              f"gamma_relax {res['gamma_relax']:.5f}")

    numba_res, numpy_res = results
    if numba_res["paths_sha256"] != numpy_res["paths_sha256"]:
        print("ERROR: backends produced different paths for the same seed")
        return 1
    print("paths bit-identical across backends (sha256 "
          f"{numba_res['paths_sha256'][:16]}...)")
    total = lambda r: r["sample_s"] + r["estimate_s"]  # noqa: E731
    print(f"speedup (numpy / numba): {total(numpy_res) / total(numba_res):.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
