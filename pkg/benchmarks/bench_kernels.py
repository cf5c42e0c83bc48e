#!/usr/bin/env python3
"""Benchmark the compiled Numerov propagators against the numpy fallback.

Run after building the extension:

    python benchmarks/bench_kernels.py

Sizes mirror the heavy production paths: the batched complex propagation is
what the delta-sequence checks at L = 200 lean on, and the Wronskian scan is
the bound-state search inner loop.
"""

import time

import numpy as np

from marchenko_kit._kernels import _fallback as fb

try:
    from marchenko_kit._kernels import _core as core
except ImportError:
    core = None


def timeit(fn, *args, repeat=3, **kwargs):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_propagate_complex(nx, nk):
    x = np.linspace(-200.0, 200.0, nx)
    h = x[1] - x[0]
    v = -2.0 / np.cosh(x) ** 2
    k = np.linspace(0.2, 2.2, nk)
    u0 = np.exp(-1j * k * x[0])
    u1 = np.exp(-1j * k * x[1])
    args = (v, h, k**2, u0, u1)
    t_py, ref = timeit(fb.propagate_complex, *args)
    row = {"case": f"propagate_complex nx={nx} nk={nk}", "python": t_py}
    if core is not None:
        t_c, got = timeit(core.propagate_complex, *args)
        # complex-division rounding differs between C and numpy; the drift
        # over ~10^4 steps stays near 1e-12 (tight parity is unit-tested)
        assert np.allclose(got, ref, rtol=1e-9, atol=1e-9)
        row["compiled"] = t_c
    return row


def bench_shoot_wronskian(nx, nk):
    x = np.linspace(-30.0, 30.0, nx)
    h = x[1] - x[0]
    v = -6.0 / np.cosh(x) ** 2
    kap = np.linspace(0.01, 2.6, nk)
    t_py, ref = timeit(fb.shoot_wronskian, v, h, kap)
    row = {"case": f"shoot_wronskian nx={nx} nk={nk}", "python": t_py}
    if core is not None:
        t_c, got = timeit(core.shoot_wronskian, v, h, kap)
        assert np.all(np.sign(got) == np.sign(ref))
        row["compiled"] = t_c
    return row


def bench_propagate_real(nx, nk):
    x = np.linspace(-30.0, 30.0, nx)
    h = x[1] - x[0]
    v = -6.0 / np.cosh(x) ** 2
    kap = np.linspace(0.2, 2.4, nk)
    t_py, ref = timeit(fb.propagate_real, v, h, kap, True)
    row = {"case": f"propagate_real nx={nx} nk={nk}", "python": t_py}
    if core is not None:
        t_c, got = timeit(core.propagate_real, v, h, kap, True)
        assert np.allclose(got, ref, rtol=1e-10)
        row["compiled"] = t_c
    return row


def main():
    rows = [
        bench_propagate_complex(8001, 256),
        bench_propagate_complex(16001, 1024),
        bench_propagate_real(1201, 256),
        bench_shoot_wronskian(1201, 1000),
        bench_shoot_wronskian(2401, 1000),
    ]
    width = max(len(r["case"]) for r in rows)
    header = f"{'case':<{width}}  {'python':>10}  {'compiled':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for r in rows:
        py = r["python"]
        if "compiled" in r:
            print(f"{r['case']:<{width}}  {py:>9.4f}s  {r['compiled']:>9.4f}s  "
                  f"{py / r['compiled']:>7.1f}x")
        else:
            print(f"{r['case']:<{width}}  {py:>9.4f}s  {'n/a':>10}  {'':>8}")
    if core is None:
        print("\ncompiled core not available; fallback timings only")


if __name__ == "__main__":
    main()
