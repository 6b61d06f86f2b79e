"""Benchmark the compiled free-form-deformation kernel against the pure
numpy fallback.

Usage: python benchmarks/bench_ffd.py [--points N] [--repeats R]
"""

import argparse
import time

import numpy as np

from hullrom.geometry import ControlLattice, ffd_deform_points
from hullrom.geometry import lattice as lattice_mod


def build_lattice(counts=(4, 3, 3)):
    n_params = 6
    bindings = []
    slot = 0
    for i in range(counts[0]):
        for axis in (1, 2):
            if slot >= n_params:
                break
            bindings.append(((i, 1, 1), axis, slot))
            slot += 1
    return ControlLattice(
        origin=[0.0, 0.0, 0.0],
        edge_vectors=np.eye(3),
        counts=counts,
        bindings=bindings,
        param_box=[[-1.0, 1.0]] * n_params,
    )


def time_kernel(lattice, mu, points, use_compiled, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        out = ffd_deform_points(lattice, mu, points, use_compiled=use_compiled)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    counts = (4, 3, 3)
    lattice = build_lattice(counts)
    rng = np.random.default_rng(0)
    points = rng.uniform(-0.1, 1.1, (args.points, 3))
    mu = rng.uniform(-0.5, 0.5, 6)

    print(f"points: {args.points}, lattice: {counts}, "
          f"compiled extension available: {lattice_mod.HAVE_COMPILED}")

    t_np, out_np = time_kernel(lattice, mu, points, False, args.repeats)
    print(f"numpy fallback   : {t_np * 1e3:8.2f} ms")

    if lattice_mod.HAVE_COMPILED:
        t_cy, out_cy = time_kernel(lattice, mu, points, True, args.repeats)
        print(f"compiled kernel  : {t_cy * 1e3:8.2f} ms  "
              f"({t_np / t_cy:.2f}x vs numpy)")
        print(f"max |difference| : {np.max(np.abs(out_cy - out_np)):.3e}")
    else:
        print("compiled kernel unavailable; only the fallback was timed")


if __name__ == "__main__":
    main()
