"""Time the compiled kernels against the NumPy fallback.

Usage::

    python benchmarks/bench_kernels.py [--n 200000] [--repeat 5]

Each kernel is run ``repeat`` times per backend on identical inputs; the
best wall time is reported together with the speed-up and the largest
relative difference between the two outputs.
"""

import argparse
import sys
import timeit

import numpy as np

from selfsing._backend import get_kernels


def _cases(n, rng):
    s = rng.uniform(-1.2, 1.2, n)
    x, y, z = rng.uniform(-1.1, 1.1, (3, n))
    r = rng.uniform(0.0, 1.2, n)
    centers = np.array([[0.0, 0.0, 0.0], [0.8, 0.0, 0.8]])
    side = int(np.sqrt(n / 2))
    u0 = rng.standard_normal((side, 2 * side))
    f = rng.standard_normal(u0.shape)
    return {
        "bump": lambda K: K.bump(s),
        "bridge": lambda K: K.bridge(s),
        "cartesian_base": lambda K: K.cartesian_base(0.05, x, y, z, 9 / 8, 0.04, 1.0, centers),
        "radial_base": lambda K: K.radial_base(0.05, r, y, 1.3, 0.1, 1.0, 1.0, True, 1.0),
        "heat_step_radial": lambda K: _heat(K, u0, f),
    }


def _heat(K, u0, f):
    u = u0.copy()
    for _ in range(10):
        K.heat_step_radial(u, f, 1e-2, 1e-6)
    return u


def _flat(out):
    if isinstance(out, tuple):
        return np.concatenate([np.ravel(o) for o in out])
    return np.ravel(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="points per kernel call")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    py = get_kernels("python")
    try:
        cy = get_kernels("compiled")
    except ImportError:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    cases = _cases(args.n, np.random.default_rng(0))
    print(f"{'kernel':<18} {'python [ms]':>12} {'compiled [ms]':>14} {'speed-up':>9} {'max rel diff':>13}")
    for name, call in cases.items():
        tp = min(timeit.repeat(lambda: call(py), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: call(cy), number=1, repeat=args.repeat))
        a, b = _flat(call(py)), _flat(call(cy))
        diff = float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))
        print(f"{name:<18} {1e3 * tp:>12.2f} {1e3 * tc:>14.2f} {tp / tc:>9.2f} {diff:>13.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
