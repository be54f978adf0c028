"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --n 800 --repeat 3
"""
import argparse
import sys
import timeit

import numpy as np

from lorentz import _fallback
from lorentz.generators import GeneratorSpec, generate

try:
    from lorentz import _kernels
except ImportError:
    _kernels = None


def _graph(n, seed):
    rng = np.random.default_rng(seed)
    links = [(i, j, float(rng.random())) for i in range(n)
             for j in range(i + 1, min(n, i + 12)) if rng.random() < 0.5]
    links.sort(key=lambda e: (e[1], e[0]))
    indptr = np.zeros(n + 1, dtype=np.intp)
    for _, j, _ in links:
        indptr[j + 1] += 1
    indptr = np.cumsum(indptr).astype(np.intp)
    idx = np.array([i for i, _, _ in links], dtype=np.intp)
    w = np.array([x for _, _, x in links])
    return np.arange(n, dtype=np.intp), indptr, idx, w


def cases(n, seed=0):
    sp, _ = generate(GeneratorSpec("minkowski_diamond", n=n, seed=seed))
    tau = np.ascontiguousarray(sp.tau)
    leq = np.ascontiguousarray(sp.leq)
    F = np.ascontiguousarray(np.concatenate([tau, tau.T], axis=1))
    A = np.where(leq, tau, -np.inf)
    P, Q = np.nonzero(tau > 0.5 * tau.max())
    P, Q = P.astype(np.intp), Q.astype(np.intp)
    allowed = np.ones(sp.n, dtype=bool)
    budget = tau[P, Q].copy()
    g = _graph(n, seed)
    return {
        "longest_paths": lambda m: m.longest_paths(*g),
        "reverse_triangle_defects": lambda m: m.reverse_triangle_defects(tau, leq, 1e-9, 10),
        "sup_distance": lambda m: m.sup_distance(F, F),
        "maxplus": lambda m: m.maxplus(A, A),
        "extension_scan": lambda m: m.extension_scan(tau, P, Q, allowed, budget, 1e-9,
                                                     np.zeros(sp.n, dtype=np.uint8)),
    }


def run(n, repeat, out=sys.stdout):
    rows = []
    backends = [("python", _fallback)] + ([("cython", _kernels)] if _kernels is not None else [])
    for name, fn in cases(n).items():
        times = {b: min(timeit.repeat(lambda: fn(m), number=1, repeat=repeat)) for b, m in backends}
        rows.append((name, times))
    print(f"n={n} repeat={repeat}", file=out)
    print(f"{'kernel':26s}{'python [s]':>12s}{'cython [s]':>12s}{'speedup':>10s}", file=out)
    for name, t in rows:
        c = t.get("cython")
        cs = f"{c:12.4f}" if c is not None else f"{'-':>12s}"
        sp = f"{t['python'] / c:10.1f}" if c else f"{'-':>10s}"
        print(f"{name:26s}{t['python']:12.4f}{cs}{sp}", file=out)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=800)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    run(args.n, args.repeat)


if __name__ == "__main__":
    main()
