"""Benchmark the compiled pCN kernel against the pure-numpy fallback.

Run with ``python -m torusgibbs.benchmark [--steps N] [--points N]``.
Both backends consume identical pre-drawn noise, so the comparison is purely
about the inner loop.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import kernels
from .grid import SpectralWeights, TorusGrid
from .mcmc import GibbsParams, potential
from .gff import mass_of_values


def run_backend(runner, params, grid, steps, seed):
    rng = np.random.default_rng(seed)
    weights = SpectralWeights(params.alpha, grid)
    z = rng.standard_normal((steps, 2, grid.n))
    coeffs = weights.sigma * (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)
    noise = np.ascontiguousarray((grid.n / np.sqrt(grid.length))
                                 * np.fft.ifft(coeffs, axis=1))
    uniforms = rng.random(steps)
    u = np.zeros(grid.n, dtype=np.complex128)
    snap_mask = np.zeros(steps, dtype=np.uint8)
    snap_values = np.empty((0, grid.n), dtype=np.complex128)
    snap_scalar = np.empty(0)
    s = 0.3
    t0 = time.perf_counter()
    acc, phi, m, _ = runner(u, noise, uniforms, np.sqrt(1 - s * s), s, grid.dx,
                            params.potential_coefficient, params.p,
                            params.mass_cutoff, 0.0, 0.0, snap_mask,
                            snap_values, snap_scalar, snap_scalar)
    elapsed = time.perf_counter() - t0
    assert abs(phi - potential(params, u, grid.dx)) <= 1e-8 * max(1.0, abs(phi))
    assert abs(m - mass_of_values(u, grid.dx)) <= 1e-8 * max(1.0, m)
    return elapsed, acc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--points", type=int, default=512)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    params = GibbsParams(p=4.0, beta=1.0, alpha=1.0, mass_density=1.0,
                         gamma=0.0, length=32.0)
    grid = TorusGrid(params.length, args.points)
    print(f"pCN inner loop, n={args.points}, {args.steps} steps "
          f"(selected backend: {kernels.BACKEND})")
    results = {}
    for name, runner in kernels.backends().items():
        elapsed, acc = run_backend(runner, params, grid, args.steps, args.seed)
        rate = args.steps / elapsed
        results[name] = rate
        print(f"  {name:9s} {elapsed:8.3f} s   {rate:10.0f} steps/s   "
              f"accepted {acc}")
    if "compiled" in results and "python" in results:
        print(f"  speedup: {results['compiled'] / results['python']:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
