#!/usr/bin/env python3
"""Benchmark: compiled kernel vs pure-Python fallback.

Times the operations that dominate real runs -- single shooting passes,
augmented (energy-derivative) passes, and shooting across a derived potential
whose evaluation walks dense-output data -- on both backends, and prints the
speedups.  Run from the repository root:

    python benchmarks/bench_kernels.py [--repeats N]
"""
import argparse
import math
import time

import numpy as np

from darboux1d._kernel import get_backend

A, B = -math.pi, math.pi


def build_derived(mod):
    """Assemble a first-step derived potential purely from one backend.

    u1 = sin(x + pi) at energy 1, u2 = exp(-2ix) at energy 4; the Wronskian
    carrier starts from W(a) = u1 u2' - u1' u2 = -1 at the left endpoint.
    """
    base = mod.ConstPotential(0.0)
    r1 = mod.solve_chain(base, 1.0, 1, [0.0, 1.0], A, B, 1e-11, 1e-13, want_dense=True)
    r2 = mod.solve_chain(base, 4.0, 1, [1.0, -2j], A, B, 1e-11, 1e-13, want_dense=True)
    rw = mod.solve_quad(0, r1.dense, 0, r2.dense, 0, 1.0 - 4.0, A, B,
                        1e-11, 1e-16, y0=-1.0 + 0j, want_dense=True)
    return mod.DarbouxPotential(base, r1.dense, r2.dense, rw.dense,
                                1.0, 4.0, A, B, None, None)


CASES = [
    ("shoot, zero potential, depth 1",
     lambda mod, ctx: mod.solve_chain(mod.ConstPotential(0.0), 5.5, 1,
                                      [0.0, 1.0], A, B, 1e-11, 1e-13)),
    ("shoot, closed-form complex potential, depth 2",
     lambda mod, ctx: mod.solve_chain(mod.TrigPTPotential(1.0, 2.0), 4.0, 2,
                                      [0.0, 1.0, 0.0, 0.0], A, B, 1e-11, 1e-13)),
    ("shoot, derived potential (dense-data evaluation), depth 2",
     lambda mod, ctx: mod.solve_chain(ctx["derived"], 4.0, 2,
                                      [0.0, 1.0, 0.0, 0.0], A, B, 1e-11, 1e-13)),
    ("grid sampling of one solution on 2001 nodes",
     lambda mod, ctx: mod.solve_chain(mod.TrigPTPotential(1.0, 2.0), 2.25, 1,
                                      [0.0, 1.0], A, B, 1e-11, 1e-13,
                                      grid=ctx["grid"], want_dense=True)),
]


def run(repeats):
    backends = {}
    for name in ("c", "python"):
        try:
            backends[name] = get_backend(name)
        except ImportError:
            print(f"backend {name!r} unavailable, skipping")
    grid = np.linspace(A, B, 2001)
    contexts = {n: {"derived": build_derived(m), "grid": grid}
                for n, m in backends.items()}

    print(f"{'case':<55} " + " ".join(f"{n:>12}" for n in backends) + "   speedup")
    for label, fn in CASES:
        times = {}
        for name, mod in backends.items():
            fn(mod, contexts[name])  # warm-up
            t0 = time.perf_counter()
            for _ in range(repeats):
                res = fn(mod, contexts[name])
            dt = (time.perf_counter() - t0) / repeats
            times[name] = dt
        row = f"{label:<55} " + " ".join(f"{times[n] * 1e3:>10.2f}ms" for n in backends)
        if "c" in times and "python" in times:
            row += f"   {times['python'] / times['c']:>6.1f}x"
        print(row)
        if "c" in backends and "python" in backends:
            rc = CASES_check(backends["c"], contexts["c"], fn)
            rp = CASES_check(backends["python"], contexts["python"], fn)
            assert abs(rc - rp) < 1e-10 * max(1.0, abs(rc)), (label, rc, rp)


def CASES_check(mod, ctx, fn):
    res = fn(mod, ctx)
    return complex(res.y_final[0])


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    run(args.repeats)
