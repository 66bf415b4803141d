"""Dyadic frequency blocks: partition of unity, block norms, two-norm scaling.

Splits a field into its dyadic frequency blocks, verifies they sum back to
the field, and prints the per-block sup norms.  Then walks the high-frequency
stress family up three rungs to show the two norm scales separating: the
smooth-norm cost grows while the flat-norm size shrinks.
"""

import numpy as np

from oldroyd2d import Grid, ScalarField, forward_transform, lp_norm
from oldroyd2d.bands import BesovSpec, besov_norm, build_partition, dyadic_block, partition_sum
from oldroyd2d.initial_data import remark_large


def main():
    grid = Grid(128, 2.0 * np.pi)
    part = build_partition(grid)
    print(f"partition on n={grid.n}: blocks j = -1 .. {part.j_max}")
    dev = np.abs(partition_sum(part) - 1.0).max()
    print(f"multiplier sum deviates from 1 by {dev:.2e}")

    rng = np.random.default_rng(0)
    f = ScalarField(grid, rng.standard_normal((grid.n, grid.n)))
    spec = forward_transform(f)
    total = np.zeros((grid.n, grid.n))
    print("block sup norms of a white-noise field:")
    for j in range(-1, part.j_max + 1):
        block = dyadic_block(spec, j, part)
        total += block.samples
        print(f"  j={j:+d}: {np.abs(block.samples).max():9.4f}")
    print(f"reconstruction error: {np.abs(total - f.samples).max():.2e}")

    print("\nhigh-frequency stress family (carrier at 2^N, amplitude 1/N):")
    smooth = BesovSpec(1.0, 2, 1)
    flat = BesovSpec(0.0, np.inf, 1)
    print(f"  {'N':>3} {'smooth norm':>12} {'flat norm + L2':>15}")
    for n_freq in (2, 3, 4):
        bump = remark_large(grid, n_freq).t11
        hi = besov_norm(bump, smooth, part)
        lo = besov_norm(bump, flat, part) + lp_norm(bump, 2)
        print(f"  {n_freq:>3} {hi:12.4f} {lo:15.4f}")
    print("the smooth norm climbs each rung while the flat norm decays like 1/N")


if __name__ == "__main__":
    main()
