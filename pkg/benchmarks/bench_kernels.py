"""Compare the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--samples N] [--repeat K]
"""

import argparse
import contextlib
import time

import numpy as np

from cvsteer import _kernels, lossy_cluster, reconstruct, simulate_variances


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


@contextlib.contextmanager
def backend(name):
    saved = _kernels.sampled_second_moment, _kernels.quadratic_forms
    if name == "numpy":
        _kernels.sampled_second_moment = _kernels.sampled_second_moment_numpy
        _kernels.quadratic_forms = _kernels.quadratic_forms_numpy
    else:
        _kernels.sampled_second_moment = _kernels.sampled_second_moment_numba
        _kernels.quadratic_forms = _kernels.quadratic_forms_numba
    try:
        yield
    finally:
        _kernels.sampled_second_moment, _kernels.quadratic_forms = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=10**6)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if _kernels.numba is None:
        print("numba unavailable or disabled; only the numpy path can run")
        backends = ["numpy"]
    else:
        backends = ["numpy", "numba"]

    cm = lossy_cluster(eta=0.8)
    sub = cm.data[:6, :6]
    factor = np.linalg.cholesky(sub)
    weights = np.array([0.0, 1.0, 0.0, 0.0, -1.0, 0.0])
    forms_w = np.random.default_rng(0).standard_normal((4096, 8))

    cases = {
        f"second moment, n={args.samples}": lambda: _kernels.sampled_second_moment(
            np.random.default_rng(1), factor, weights, args.samples),
        "4096 quadratic forms (8x8)": lambda: _kernels.quadratic_forms(cm.data, forms_w),
        f"32-setting reconstruction, n={args.samples}": lambda: reconstruct(
            simulate_variances(cm, samples=args.samples, seed=2)),
    }

    results = {}
    for name in backends:
        with backend(name):
            for fn in cases.values():
                fn()  # compile / warm caches
            results[name] = {case: best_of(fn, args.repeat) for case, fn in cases.items()}

    width = max(map(len, cases))
    header = f"{'case':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
    if len(backends) == 2:
        header += "   speedup"
    print(header)
    for case in cases:
        row = f"{case:<{width}}  " + "  ".join(f"{results[b][case] * 1e3:>8.2f}ms" for b in backends)
        if len(backends) == 2:
            row += f"  {results['numpy'][case] / results['numba'][case]:>7.2f}x"
        print(row)


if __name__ == "__main__":
    main()
