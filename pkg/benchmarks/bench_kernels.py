"""Timing harness for the kernel backends (compiled vs pure).

Workloads mirror the hot paths of the response-function series: the
vectorized J0 sweep of the nonlocal series, J_m tables for the
azimuthal fold, the scaled modified-Bessel pair over the image-tail
arguments, and the graded-panel switching integral.  Reported times
are the best of --repeat runs (steady-state, cache-warm).

Usage:
    python benchmarks/bench_kernels.py [--n 200000] [--repeat 5]
"""

import argparse
import math
import time

import numpy as np

from udwcavity import kernels


def _bench(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(n):
    # McMahon-order stand-ins for the J0 zero table: the actual zeros
    # are irrelevant to timing, only the argument magnitudes matter.
    zeros = (np.arange(1, n + 1) - 0.25) * math.pi
    eta = 0.37
    x_small = np.linspace(0.0, 30.0, n)
    x_tail = 0.5 * (0.025 * zeros) ** 2
    bs = 0.025 * zeros[:4000]
    return [
        ("j0v, series sweep (x = eta*zeros)", lambda b: b.j0v(zeros * eta)),
        ("j1v, denominator table", lambda b: b.j1v(zeros[: n // 4])),
        ("jnv m=8, azimuthal fold", lambda b: b.jnv(8, x_small)),
        ("jnv m=40, azimuthal fold", lambda b: b.jnv(40, x_small)),
        ("i0ev, image tail", lambda b: b.i0ev(x_tail)),
        ("k0ev, image tail", lambda b: b.k0ev(x_tail)),
        ("gauss_cosh_batch, 4000 modes", lambda b: b.gauss_cosh_batch(1.0, bs)),
        ("jn(60, x) scalar x2000",
         lambda b: [b.jn(60, 0.05 * k) for k in range(1, 2001)]),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200000,
                    help="array length for the vector workloads")
    ap.add_argument("--repeat", type=int, default=5,
                    help="repetitions per workload (best is reported)")
    args = ap.parse_args()

    names = kernels.available_backends()
    backends = [kernels.get_backend(k) for k in names]
    print(f"backends: {', '.join(names)}   n = {args.n}\n")

    header = f"{'workload':38s}" + "".join(f"{k + ' [ms]':>12s}" for k in names)
    if len(backends) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    print("-" * len(header))
    for label, work in workloads(args.n):
        times = []
        for b in backends:
            work(b)  # warm-up (fills caches, JIT-touches pages)
            times.append(_bench(lambda: work(b), args.repeat))
        row = f"{label:38s}" + "".join(f"{1e3 * t:12.2f}" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:10.2f}x"
        print(row)


if __name__ == "__main__":
    main()
