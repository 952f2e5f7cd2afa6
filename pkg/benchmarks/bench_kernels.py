#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

The two hot paths are the oscillation panel ladder (built once per process
for the remark2 density, ~6e5 panels) and the batched log-sinc integral
behind remark5 entropy evaluation.  Run with EXTENSO_NO_NUMBA=1 to confirm
the numpy path produces the same numbers it is benchmarked with here.
"""
import math
import time

import numpy as np

from extenso import _kernels


def _time(fn, *args, repeats=5):
    best = math.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_panel_moments(n_panels=600_000):
    j = np.arange(n_panels + 1, 0, -1, dtype=np.float64)
    breaks = 2.0 / (j * math.pi)
    lo, hi = breaks[:-1], breaks[1:]
    print(f"panel moments ({n_panels} panels):")
    t_np, (g_np, _) = _time(_kernels.osc_panel_moments_numpy, lo, hi)
    print(f"  numpy : {t_np * 1e3:8.2f} ms")
    if _kernels.osc_panel_moments_numba is not None:
        _kernels.osc_panel_moments_numba(lo[:8], hi[:8])  # warm up JIT
        t_nb, (g_nb, _) = _time(_kernels.osc_panel_moments_numba, lo, hi)
        print(f"  numba : {t_nb * 1e3:8.2f} ms   speedup {t_np / t_nb:5.2f}x")
        print(f"  max |diff| = {np.abs(g_np - g_nb).max():.3e}")
    else:
        print("  numba : not available")
    print()


def bench_logsinc(n_points=200_000):
    rng = np.random.default_rng(7)
    r = rng.uniform(1e-6, 1.0, n_points)
    print(f"log-sinc integral ({n_points} points):")
    t_np, v_np = _time(_kernels.logsinc_integral_numpy, r)
    print(f"  numpy : {t_np * 1e3:8.2f} ms")
    if _kernels.logsinc_integral_numba is not None:
        _kernels.logsinc_integral_numba(r[:8])  # warm up JIT
        t_nb, v_nb = _time(_kernels.logsinc_integral_numba, r)
        print(f"  numba : {t_nb * 1e3:8.2f} ms   speedup {t_np / t_nb:5.2f}x")
        print(f"  max |diff| = {np.abs(v_np - v_nb).max():.3e}")
    else:
        print("  numba : not available")
    print()


if __name__ == "__main__":
    print("=" * 60)
    print(f"numba available: {_kernels.HAS_NUMBA}   active: {_kernels.USING_NUMBA}")
    print("=" * 60)
    bench_panel_moments()
    bench_logsinc()
