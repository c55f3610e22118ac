"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from tglsdv import _pykernels

try:
    from tglsdv import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    x48 = rng.normal(size=48).cumsum()
    u = rng.uniform(size=3807)
    t = np.r_[[0.0] * 4, np.linspace(0, 1, 7)[1:-1], [1.0] * 4]
    A = rng.normal(size=(3807, 40))
    G, g, yy = A.T @ A, A.T @ rng.normal(size=3807), 1.0e4
    n_sel = 1000
    lengths = rng.integers(4, 30, n_sel).astype(np.int32)
    idx = np.zeros((n_sel, 30), dtype=np.int32)
    for r, m in enumerate(lengths):
        idx[r, :m] = np.sort(rng.choice(40, m, replace=False))
    return {
        "hp_trend T=48 (x81)": lambda k: [k.hp_trend(x48, 100.0) for _ in range(81)],
        "bspline_basis N=3807, 5 knots": lambda k: k.bspline_basis(u, t, 3),
        "subset_rss 1000 subsets": lambda k: k.subset_rss(G, g, yy, idx, lengths),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"{'kernel':<34}" + "".join(f"{b:>12}" for b, _ in backends) + f"{'speedup':>10}")
    for name, fn in cases(rng).items():
        times = []
        for _, mod in backends:
            number = 3
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat))
            times.append(best / number)
        row = f"{name:<34}" + "".join(f"{1e3 * s:>10.3f}ms" for s in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
