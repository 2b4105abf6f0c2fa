"""Time the numba kernels against their numpy/Python fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--grid 128]

Each kernel is run once to trigger compilation, then timed ``--repeat``
times; the table reports the best run of each path and the speed-up.
Results of both paths are compared so a mismatch shows up next to the timing.
"""
import argparse
import time

import numpy as np

from lemnikit import kernels
from lemnikit.capacity import Box, CondenserSpec, Disk, Exterior, _neighbor_count, optimal_omega
from lemnikit.level import seed_on_level
from lemnikit.poly import Polynomial, find_roots
from lemnikit.topology import _capture_radii


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(grid):
    P = Polynomial.from_roots([1, -1, 0.5j, -0.3 - 0.8j, 1.2 + 0.7j])
    c = P.array
    t = 0.3
    seed = seed_on_level(P, 1.0, t)
    step = 0.05 * 2 * P.degree * abs(P(seed) / P.derivative()(seed))
    roots = find_roots(P).locations
    radii = _capture_radii(P)
    starts = [complex(x, y) for x in np.linspace(-1.5, 1.5, 5) for y in np.linspace(-1.2, 1.2, 4)]

    def trace(k):
        return lambda: k(c, seed, t, step, 2 * np.pi / 320, 0.1, 1e-9 * step, 1e-13, 200_000)[1]

    def descent(k):
        return lambda: [int(k(c, z, roots, radii, 0.3, 1e-12, 20_000)[0]) for z in starts]

    rng = np.random.default_rng(0)
    ang = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
    vx, vy = np.cos(ang) * (1 + 0.3 * np.cos(5 * ang)), np.sin(ang) * (1 + 0.3 * np.cos(5 * ang))
    px, py = rng.uniform(-1.5, 1.5, 20_000), rng.uniform(-1.5, 1.5, 20_000)

    def inside(k):
        return lambda: int(k(px, py, vx, vy).sum())

    spec = CondenserSpec((Exterior(0j, 4.0),), (Disk(0j, 1.0),), Box(-4.2, 4.2, -4.2, 4.2))
    g, m0, m1 = spec.rasterize(grid)
    fixed = m0 | m1
    nb = _neighbor_count(fixed.shape, False)
    omega = optimal_omega(fixed.shape, False)

    def sor(k):
        def run():
            u = np.where(m1, 1.0, 0.0)
            sweeps, _ = k(u, fixed, nb, False, omega, 1e-10, 200_000)
            return sweeps, round(kernels.dirichlet_energy(u, False), 9)
        return run

    return [
        ("trace", trace(kernels.trace_py), trace(kernels.trace_jit)),
        ("descent x20", descent(kernels.descent_py), descent(kernels.descent_jit)),
        ("inside 20k x 2k", inside(kernels.inside_py), inside(kernels.inside_jit)),
        (f"sor {grid}^2", sor(kernels.sor_py), sor(kernels.sor_jit)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--grid", type=int, default=128)
    args = ap.parse_args()
    if kernels.trace_jit is None:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':<18}{'numpy/py [s]':>14}{'numba [s]':>12}{'speed-up':>10}  same result")
    for name, slow, fast in cases(args.grid):
        fast()  # compile
        t_fast, r_fast = best_of(fast, args.repeat)
        t_slow, r_slow = best_of(slow, max(1, args.repeat // 3))
        print(f"{name:<18}{t_slow:>14.4f}{t_fast:>12.4f}{t_slow / t_fast:>9.1f}x  {r_slow == r_fast}")


if __name__ == "__main__":
    main()
