"""Compare the compiled kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--qubits 3 6 8] [--repeat 200]
"""

import argparse
import timeit

import numpy as np

from blindsim import _kernels_py

try:
    from blindsim import _kernels
except ImportError:
    _kernels = None

H = np.ascontiguousarray(np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2))
CZ = np.ascontiguousarray(np.diag([1, 1, 1, -1]).astype(complex))


def random_state(n, rng):
    a = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(size=(1 << n, 1 << n))
    rho = a @ a.conj().T
    return np.ascontiguousarray(rho / np.trace(rho))


def cases(n):
    return {
        "apply_1q": lambda m, r: m.apply_1q(r, H, n // 2, n),
        "apply_2q": lambda m, r: m.apply_2q(r, CZ, 0, n - 1, n),
        "depolarize_1q": lambda m, r: m.depolarize_1q(r, 1, n, 0.01),
        "thermal_relax": lambda m, r: m.thermal_relax(r, 0, n, 0.99, 0.98),
        "project": lambda m, r: m.project(r, n - 1, n, 0),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, nargs="+", default=[3, 6, 8])
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()
    rng = np.random.default_rng(1)
    if _kernels is None:
        print("compiled extension not built; timing the numpy fallback only")
    print(f"{'kernel':<15}{'n':>3}{'numpy us':>12}{'cython us':>12}{'speedup':>9}")
    for n in args.qubits:
        rho = random_state(n, rng)
        for name, fn in cases(n).items():
            work = rho.copy()
            t_py = timeit.timeit(lambda: fn(_kernels_py, work), number=args.repeat) / args.repeat
            if _kernels is None:
                print(f"{name:<15}{n:>3}{t_py * 1e6:>12.1f}{'-':>12}{'-':>9}")
                continue
            work = rho.copy()
            t_cy = timeit.timeit(lambda: fn(_kernels, work), number=args.repeat) / args.repeat
            print(f"{name:<15}{n:>3}{t_py * 1e6:>12.1f}{t_cy * 1e6:>12.1f}{t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
