"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Also times the BLAS-bound paths (fit, cross-validation) for context; those do
not depend on the kernel backend.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from wdspca import _fallback, synth
from wdspca.crossval import run_crossval
from wdspca.pca import fit

try:
    from wdspca import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    scales = np.linspace(3.0, 0.1, 100)
    a = np.random.default_rng(0).standard_normal((1000, 4096))
    b = a + 1e-3
    cases = [
        ("normal_block 20000x100", lambda m: m.normal_block(7, 0, 20000, scales)),
        ("sq_diff_sum 1000x4096", lambda m: m.sq_diff_sum(a, b)),
        ("sq_diff_sum self 1000x4096", lambda m: m.sq_diff_sum(a)),
    ]
    print(f"{'kernel':<28}{'python':>12}{'cython':>12}{'speedup':>10}")
    for name, call in cases:
        tp = best_of(lambda: call(_fallback), args.repeat)
        if _ckernels is None:
            print(f"{name:<28}{tp * 1e3:>10.2f}ms{'n/a':>12}{'':>10}")
            continue
        tc = best_of(lambda: call(_ckernels), args.repeat)
        print(f"{name:<28}{tp * 1e3:>10.2f}ms{tc * 1e3:>10.2f}ms{tp / tc:>9.1f}x")

    if _ckernels is not None:
        same = _fallback.normal_block(7, 0, 20000, scales).tobytes() == _ckernels.normal_block(7, 0, 20000, scales).tobytes()
        print(f"normal_block backends bit-identical: {same}")

    data, _ = synth.make(300, 20000, 50, noise_std=0.1, seed=1)
    print(f"fit 300x20000: {best_of(lambda: fit(data), args.repeat) * 1e3:.1f}ms")
    print(f"crossval K=10 300x20000: {best_of(lambda: run_crossval(data, 10, m_values=[0, 10, 50, 100]), 1):.2f}s")


if __name__ == "__main__":
    main()
