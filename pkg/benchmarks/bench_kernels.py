#!/usr/bin/env python3
"""Compare the numba-compiled hot kernels against their fallback paths.

Run as `python benchmarks/bench_kernels.py [--repeats N]`. To time the whole
package on the fallback path instead, set SOLARCAST_NUMBA=0 and rerun.
"""

import argparse
import time

import numpy as np

from solarcast._accel import NUMBA_ENABLED
from solarcast.kernels import (
    _lstm_backward,
    _lstm_forward,
    arma_residuals_lfilter,
    arma_residuals_loop,
)


def timeit(func, *args, repeats=20):
    func(*args)  # warm-up / compile
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        func(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def lstm_params(rng, n_hidden, n_in, n_out):
    p = []
    for _ in range(4):
        p += [rng.normal(0, 0.1, (n_hidden, n_in)),
              rng.normal(0, 0.1, (n_hidden, n_hidden)),
              np.zeros(n_hidden)]
    p += [rng.normal(0, 0.1, (n_out, n_hidden)), np.zeros(n_out)]
    return p


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    rows = []

    for n in (130, 2000):
        y = rng.normal(0, 1, n)
        phi = np.array([0.6, -0.2])
        theta = np.array([0.3])
        t_loop = timeit(arma_residuals_loop, y, phi, theta, repeats=args.repeats)
        t_filt = timeit(arma_residuals_lfilter, y, phi, theta, repeats=args.repeats)
        label = "numba loop" if NUMBA_ENABLED else "python loop"
        rows.append((f"arma_residuals n={n}", label, t_loop, "scipy lfilter", t_filt))

    for n_hidden, n_steps in ((130, 130), (10, 10)):
        x = rng.uniform(0, 1, (n_steps, 1))
        params = lstm_params(rng, n_hidden, 1, 13)
        jit_fwd = _lstm_forward
        py_fwd = getattr(_lstm_forward, "py_func", _lstm_forward)
        t_jit = timeit(jit_fwd, x, *params, repeats=args.repeats)
        out = jit_fwd(x, *params)
        caches = out[1:]
        dy = rng.normal(0, 1, 13)
        whi, whf, whg, who = params[1], params[4], params[7], params[10]
        wy = params[12]
        jit_bwd = _lstm_backward
        py_bwd = getattr(_lstm_backward, "py_func", _lstm_backward)
        t_jit_b = timeit(jit_bwd, x, *caches, dy, whi, whf, whg, who, wy,
                         repeats=args.repeats)
        if NUMBA_ENABLED:
            t_py = timeit(py_fwd, x, *params, repeats=args.repeats)
            t_py_b = timeit(py_bwd, x, *caches, dy, whi, whf, whg, who, wy,
                            repeats=args.repeats)
            rows.append((f"lstm_forward H={n_hidden} T={n_steps}", "numba",
                         t_jit, "numpy loop", t_py))
            rows.append((f"lstm_backward H={n_hidden} T={n_steps}", "numba",
                         t_jit_b, "numpy loop", t_py_b))
        else:
            rows.append((f"lstm_forward H={n_hidden} T={n_steps}", "numpy loop",
                         t_jit, "-", None))
            rows.append((f"lstm_backward H={n_hidden} T={n_steps}", "numpy loop",
                         t_jit_b, "-", None))

    print(f"backend enabled: {'numba' if NUMBA_ENABLED else 'numpy fallback'}")
    print(f"{'kernel':<32} {'path A':<12} {'best A':>10} {'path B':<14} "
          f"{'best B':>10} {'speedup':>8}")
    for name, la, ta, lb, tb in rows:
        if tb is None:
            print(f"{name:<32} {la:<12} {ta*1e6:>8.1f}us {lb:<14} {'-':>10} {'-':>8}")
        else:
            print(f"{name:<32} {la:<12} {ta*1e6:>8.1f}us {lb:<14} "
                  f"{tb*1e6:>8.1f}us {tb/ta:>7.1f}x")


if __name__ == "__main__":
    main()
