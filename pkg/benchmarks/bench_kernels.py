"""Time the numpy kernel backend against the compiled one.

Builds realistic quotient forms (a graded interval and a triangulated
square), pulls out their assembly arrays, and times every kernel from
both backends on identical inputs. Values are cross-checked before
timing so a speedup never hides a semantic drift.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --n1d 200000 --h2d 0.01 --repeats 30
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from robinhardy import BoundaryPartition, ConvexPolygon, Interval, QuotientForm
from robinhardy.mesh import build_interval_mesh, build_polygon_mesh
from robinhardy._kernels import _pure

try:
    from robinhardy._kernels import _core
except ImportError:
    _core = None


def _best_of(repeats, fn, *args):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(n1d, h2d, p):
    interval = Interval(0.0, 1.0)
    part1 = BoundaryPartition.from_sigmas({0: math.inf, 1: 1.0})
    f1 = QuotientForm(interval, part1, build_interval_mesh(interval, n1d, toward=(0,)), p)
    u1 = np.sin(np.linspace(0.0, 3.0, f1.pinned.size)) + 0.3

    square = ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    part2 = BoundaryPartition.from_sigmas({0: math.inf, 1: 1.0, 2: 2.0, 3: 0.5})
    f2 = QuotientForm(square, part2, build_polygon_mesh(square, h2d), p)
    rng = np.random.default_rng(42)
    u2 = rng.standard_normal(len(f2.mesh.vertices))

    g1 = np.zeros_like(u1)
    g2 = np.zeros_like(u2)
    eps2 = 0.0 if p >= 2.0 else 1e-24
    return [
        ("seg_mass", (u1, f1.i0, f1.i1, f1.mass_qw, f1.phi0, f1.phi1, p)),
        ("seg_mass_grad", (u1, f1.i0, f1.i1, f1.mass_qw, f1.phi0, f1.phi1, p, g1)),
        ("seg_grad_energy", (u1, f1.i0, f1.i1, f1.inv_h, f1.grad_measure, p)),
        ("seg_grad_energy_grad", (u1, f1.i0, f1.i1, f1.inv_h, f1.grad_measure, p, eps2, g1)),
        ("tri_mass", (u2, f2.tri, f2.mass_qw, f2.bary, p)),
        ("tri_mass_grad", (u2, f2.tri, f2.mass_qw, f2.bary, p, g2)),
        ("tri_grad_energy", (u2, f2.tri, f2.gx, f2.gy, f2.grad_measure, p)),
        ("tri_grad_energy_grad", (u2, f2.tri, f2.gx, f2.gy, f2.grad_measure, p, eps2, g2)),
    ]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n1d", type=int, default=100_000, help="interval cells (default 100000)")
    ap.add_argument("--h2d", type=float, default=0.02, help="square target edge (default 0.02)")
    ap.add_argument("--repeats", type=int, default=15, help="best-of repeats per kernel")
    ap.add_argument("--p", type=float, default=3.0, help="exponent (p=2 hits the fast paths)")
    args = ap.parse_args()

    if _core is None:
        print("compiled backend unavailable; timing the numpy backend only")

    print(f"p = {args.p}, interval cells = {args.n1d}, square h = {args.h2d}")
    header = f"{'kernel':<22}{'numpy':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, arg_tuple in _cases(args.n1d, args.h2d, args.p):
        pure_fn = getattr(_pure, name)
        ref = pure_fn(*arg_tuple)
        if _core is not None:
            got = getattr(_core, name)(*arg_tuple)
            if not math.isclose(ref, got, rel_tol=1e-10, abs_tol=1e-12):
                raise SystemExit(f"{name}: backends disagree ({ref!r} vs {got!r})")
        t_pure = _best_of(args.repeats, pure_fn, *arg_tuple)
        if _core is None:
            print(f"{name:<22}{t_pure * 1e3:>10.3f}ms{'-':>12}{'-':>10}")
            continue
        t_core = _best_of(args.repeats, getattr(_core, name), *arg_tuple)
        print(f"{name:<22}{t_pure * 1e3:>10.3f}ms{t_core * 1e3:>10.3f}ms{t_pure / t_core:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
