#!/usr/bin/env python3
"""Timing comparison: compiled direction-scan kernels vs the numpy fallback.

Runs the two kernels that dominate sweep and experiment workloads on
identical inputs under both backends, checks the outputs agree bit for
bit, and reports per-call times plus an end-to-end perturbation sweep.

Usage: python3 benchmarks/bench_backends.py [--dirs N] [--cases N]
"""

import argparse
import math
import time

import numpy as np

from pseudoell import _kernels, planar_two_link
from pseudoell._kernels import _pykernels
from pseudoell.ellipsoid import ORTH_TOL
from pseudoell.sensitivity import perturbation_sweep

try:
    from pseudoell._kernels import _ckernels
except ImportError:
    _ckernels = None


def random_ellipsoid_arrays(rng, m):
    radii = np.sort(np.exp(rng.uniform(np.log(0.05), np.log(5.0), m)))[::-1]
    q, r = np.linalg.qr(rng.normal(size=(m, m)))
    return np.ascontiguousarray(radii), np.ascontiguousarray(q * np.sign(np.diag(r)))


def unit_rows(rng, k, m):
    d = rng.normal(size=(k, m))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def best_time(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(backends, cases, dirs, repeats, rng):
    inputs = []
    for _ in range(cases):
        radii, axes = random_ellipsoid_arrays(rng, 3)
        radii_b, axes_b = random_ellipsoid_arrays(rng, 3)
        inputs.append((radii, axes, radii_b, axes_b, unit_rows(rng, dirs, 3)))

    rows = []
    for label, runner in (
        ("scan_metrics",
         lambda impl: [impl.scan_metrics(r, a, 3, d, ORTH_TOL)
                       for r, a, _, _, d in inputs]),
        ("scan_max_abs_dev",
         lambda impl: [impl.scan_max_abs_dev(r, a, 3, rb, ab, 3, d, ORTH_TOL)
                       for r, a, rb, ab, d in inputs]),
    ):
        results = {}
        times = {}
        for name, impl in backends:
            times[name] = best_time(lambda: runner(impl), repeats)
            results[name] = runner(impl)
        if len(results) == 2:
            for got, want in zip(*results.values()):
                for x, y in zip(np.atleast_1d(got), np.atleast_1d(want)):
                    assert np.array_equal(np.asarray(x), np.asarray(y)), \
                        f"{label}: backends disagree"
        rows.append((label, times))
    return rows


def bench_sweep(backends, repeats):
    chain = planar_two_link(0.3, 0.3)
    q = np.radians([30.0, 10.0])
    times = {}
    saved = _kernels._impl
    try:
        for name, impl in backends:
            _kernels._impl = impl
            times[name] = best_time(
                lambda: perturbation_sweep(chain, q, range_rad=math.radians(5.0),
                                           grid_n=21, dir_samples=720),
                repeats)
    finally:
        _kernels._impl = saved
    return times


def print_table(rows):
    names = sorted({name for _, times in rows for name in times})
    header = f"{'kernel':<22}" + "".join(f"{n:>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, times in rows:
        line = f"{label:<22}"
        for n in names:
            line += f"{1000.0 * times[n]:>12.2f}ms"
        if len(names) == 2:
            line += f"{times['python'] / times['compiled']:>9.1f}x"
        print(line)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cases", type=int, default=200,
                        help="ellipsoid pairs per kernel benchmark")
    parser.add_argument("--dirs", type=int, default=1024,
                        help="directions per scan")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats (best is reported)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.insert(0, ("compiled", _ckernels))
    else:
        print("note: compiled extension not importable, timing fallback only")

    rng = np.random.default_rng(args.seed)
    print(f"active package backend: {_kernels.get_backend()}")
    print(f"{args.cases} ellipsoids x {args.dirs} directions, "
          f"best of {args.repeats}\n")
    rows = bench_kernels(backends, args.cases, args.dirs, args.repeats, rng)
    rows.append(("sweep 21x21x720", bench_sweep(backends, args.repeats)))
    print_table(rows)


if __name__ == "__main__":
    main()
