"""Benchmark the compiled kernels against the pure-Python fallback.

    python3 -m gwbox.bench [--n 2000] [--k 300] [--size 60] [--repeat 3]

Prints best-of-``repeat`` wall times per backend and checks that both
backends return bitwise-identical results.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels
from .uncertainty import MIN_CANDIDATE_SIZE, Z_95


def _best(fn, repeat: int) -> tuple[float, object]:
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(n: int = 2000, k: int = 300, size: int = 60, repeat: int = 3, seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    wh = rng.uniform(0.05, 0.5, size=(n, 2))
    means = np.column_stack([rng.uniform(0.2, 0.8, size=(n, 2)), wh])
    sigmas = rng.uniform(0.005, 0.1, size=(n, 4))
    cost = rng.uniform(-1.0, 0.0, size=(size, size))

    backends = ["python"] + (["compiled"] if _kernels.has_compiled() else [])
    results = []
    for kernel, call in (
        (f"sweep_top5 n={n} k={k}", lambda m: m.sweep_top5(means, sigmas, k, Z_95, MIN_CANDIDATE_SIZE)),
        (f"solve_square n={size}", lambda m: m.solve_square(cost)[0]),
    ):
        outs = {}
        row = {"kernel": kernel}
        for name in backends:
            mod = _kernels.get(name)
            row[name], outs[name] = _best(lambda: call(mod), repeat)
        if len(outs) == 2:
            row["identical"] = bool(np.array_equal(outs["python"], outs["compiled"]))
            row["speedup"] = row["python"] / row["compiled"]
        results.append(row)
    return results


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(prog="python3 -m gwbox.bench", description="compiled vs python kernels")
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--k", type=int, default=300)
    ap.add_argument("--size", type=int, default=60)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _kernels.has_compiled():
        print("compiled extension not available; timing the python fallback only")
    for row in bench(args.n, args.k, args.size, args.repeat):
        line = f"{row['kernel']:<28} python {row['python']:.4f}s"
        if "compiled" in row:
            line += f"  compiled {row['compiled']:.4f}s  speedup {row['speedup']:.1f}x  identical={row['identical']}"
        print(line)


if __name__ == "__main__":
    main()
