"""Time the numba and numpy paths of the hot kernels.

Run with ``python3 benchmarks/bench_backends.py``. Each timing is the best
of several repeats after one warm-up call, so JIT compilation is excluded.
"""
import argparse
import math
import timeit

import numpy as np

from spindec import _backend, _kernels as kern

K0SQ = (2 * math.pi * 560e3 / 299792458.0) ** 2


def cases(n):
    x = np.linspace(0, 60, n)
    K = np.geomspace(1e2, 1e7, n)
    eps = np.array([1.0, 2j * 7.4e12, 2.25 + 0j])
    thick = np.array([math.inf, 5e-6, math.inf])
    return {
        "bessel_j012": lambda jit: kern.bessel_j012(x, use_numba=jit),
        "stack_reflection TE": lambda jit: kern.stack_reflection(K, K0SQ, eps, thick, 0, use_numba=jit),
        "stack_reflection TM": lambda jit: kern.stack_reflection(K, K0SQ, eps, thick, 1, use_numba=jit),
    }


def best(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=100_000)
    p.add_argument("--repeat", type=int, default=7)
    args = p.parse_args(argv)
    print(f"{'kernel':<22}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}")
    for name, fn in cases(args.points).items():
        t_np = best(lambda: fn(False), args.repeat)
        if _backend.HAVE_NUMBA:
            t_nb = best(lambda: fn(True), args.repeat)
            print(f"{name:<22}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.1f}")
        else:
            print(f"{name:<22}{1e3 * t_np:>12.2f}{'n/a':>12}{'':>10}")


if __name__ == "__main__":
    main()
