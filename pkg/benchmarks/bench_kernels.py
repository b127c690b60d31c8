"""Benchmark the numba kernels against the pure-numpy fallback.

Run: python benchmarks/bench_kernels.py

Times the two hot kernels at the sizes the pipeline actually hits: frame
Gram batches over density-extraction grids (two epsilon passes of N points)
and resolvent-norm fans from the growth diagnostics.
"""

import time

import numpy as np

from snodelab import backends


def _time(fn, n_warmup=2, n_runs=5):
    for _ in range(n_warmup):
        fn()
    times = []
    for _ in range(n_runs):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return np.mean(times), np.std(times)


def _report(label, numba_stats, numpy_stats):
    tn, sn = numba_stats
    tp, sp = numpy_stats
    speedup = tp / tn if tn > 0 else float("inf")
    print(f"{label:42s} numba {tn * 1e3:8.2f} +- {sn * 1e3:5.2f} ms   "
          f"numpy {tp * 1e3:8.2f} +- {sp * 1e3:5.2f} ms   x{speedup:.2f}")


def bench_gram(n, p, k, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = 0.5 * a / np.linalg.norm(a, 2)
    c = rng.standard_normal((n, 2 * p)) + 1j * rng.standard_normal((n, 2 * p))
    pi_h = rng.standard_normal((2 * p, n)) + 1j * rng.standard_normal((2 * p, n))
    zs = rng.uniform(-3, 3, k) + 1j * rng.uniform(0.05, 2.0, k)

    ref = backends.gram_batch(a, c, pi_h, zs[:8], backend="numpy")
    got = backends.gram_batch(a, c, pi_h, zs[:8], backend="numba")
    err = np.abs(ref - got).max()
    assert err <= 1e-10, f"backend mismatch: {err}"

    _report(
        f"gram_batch   n={n:3d} p={p} K={k}",
        _time(lambda: backends.gram_batch(a, c, pi_h, zs, backend="numba")),
        _time(lambda: backends.gram_batch(a, c, pi_h, zs, backend="numpy")),
    )


def bench_resolvent(n, k, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = 0.5 * a / np.linalg.norm(a, 2)
    zs = rng.uniform(-50, 50, k) + 1j * rng.uniform(-50, 50, k)

    _report(
        f"resolvent_norm_batch n={n:3d} K={k}",
        _time(lambda: backends.resolvent_norm_batch(a, zs, backend="numba")),
        _time(lambda: backends.resolvent_norm_batch(a, zs, backend="numpy")),
    )


def main():
    if not backends.HAS_NUMBA:
        print("numba not available; nothing to compare")
        return
    print(backends.backend_info())
    backends.warmup()
    rng = np.random.default_rng(0)
    for n, p in ((8, 1), (16, 2), (32, 2), (64, 3)):
        bench_gram(n, p, 8192, rng)
    for n in (8, 32, 64):
        bench_resolvent(n, 2048, rng)


if __name__ == "__main__":
    main()
