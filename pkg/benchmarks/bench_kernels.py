"""Benchmark the fused gate kernels: compiled-loop backend vs numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--batch 64] [--hidden 256] [--reps 200]

Both backends are timed in-process by calling the backend-specific functions
directly, so no environment juggling is needed. Forward and backward passes
are timed separately, and the outputs are cross-checked before timing.
"""

import argparse
import time

import numpy as np

from affectseq import kernels


def _time(fn, reps):
    fn()  # warm-up (also triggers JIT compilation)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--batch", type=int, default=64)
    ap.add_argument("--hidden", type=int, default=256)
    ap.add_argument("--reps", type=int, default=200)
    args = ap.parse_args()

    B, H = args.batch, args.hidden
    rng = np.random.default_rng(0)
    z = rng.normal(size=(B, 4 * H))
    c = rng.normal(size=(B, H))
    d_h = rng.normal(size=(B, H))
    d_c = rng.normal(size=(B, H))

    backends = {"numpy": (kernels._gates_forward_numpy, kernels._gates_backward_numpy)}
    try:
        from numba import njit
    except ImportError:
        print("numba not installed; timing numpy backend only")
    else:
        backends["numba"] = (
            njit(cache=True)(kernels._gates_forward_loop),
            njit(cache=True)(kernels._gates_backward_loop),
        )

    # cross-check outputs before timing
    ref_fwd = backends["numpy"][0](z, c)
    for name, (fwd, bwd) in backends.items():
        out = fwd(z, c)
        for a, b in zip(ref_fwd, out):
            assert np.abs(a - b).max() < 1e-12, f"{name} forward mismatch"

    print(f"batch={B} hidden={H} reps={args.reps} (times are per call)")
    print(f"{'backend':<8} {'forward':>12} {'backward':>12}")
    results = {}
    for name, (fwd, bwd) in backends.items():
        i, f_, g, o, c_new, _h = fwd(z, c)
        t_f = _time(lambda: fwd(z, c), args.reps)
        t_b = _time(lambda: bwd(d_h, d_c, i, f_, g, o, c_new, c), args.reps)
        results[name] = (t_f, t_b)
        print(f"{name:<8} {t_f * 1e6:>10.1f}us {t_b * 1e6:>10.1f}us")

    if "numba" in results:
        sf = results["numpy"][0] / results["numba"][0]
        sb = results["numpy"][1] / results["numba"][1]
        print(f"speedup (numpy/numba): forward {sf:.2f}x, backward {sb:.2f}x")
    print(f"active backend for this process: {kernels.BACKEND}")


if __name__ == "__main__":
    main()
