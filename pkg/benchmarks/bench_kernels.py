"""Compare the numba and numpy variants of every hot kernel.

    python benchmarks/bench_kernels.py [--sizes 1000,100000,1000000] [--reps 20]

Prints one CSV row per (kernel, backend, n) with the median time in
milliseconds and the speed-up of numba over numpy.
"""
import argparse
import statistics
import time

import numpy as np

from hlps import kernels


def median_ms(fn, args, reps):
    fn(*args)  # compile / warm caches
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*args)
        times.append((time.perf_counter() - t0) * 1000.0)
    return statistics.median(times)


def kernel_args(name, n, rng):
    if name == "coord_sum":
        return (rng.uniform(0, 1000, (n, 2)),)
    xs, ys = rng.uniform(0, 1000, (2, n))
    if name == "within_radius":
        return (xs, ys, 500.0, 500.0, 125.0)
    return (xs, ys, 500.0, 500.0, 125.0, 600.0, 500.0, 125.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,100000,1000000")
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)

    print(f"# active backend: {kernels.BACKEND}")
    print("kernel,backend,n,median_ms,speedup")
    for name, impls in kernels.IMPLEMENTATIONS.items():
        for n in sizes:
            fargs = kernel_args(name, n, rng)
            t_np = median_ms(impls["numpy"], fargs, args.reps)
            print(f"{name},numpy,{n},{t_np:.4f},1.00")
            if "numba" in impls:
                t_nb = median_ms(impls["numba"], fargs, args.reps)
                print(f"{name},numba,{n},{t_nb:.4f},{t_np / t_nb:.2f}")


if __name__ == "__main__":
    main()
