#!/usr/bin/env python3
"""Times the hot kernels on both execution paths (numba JIT vs pure numpy).

Run as: python benchmarks/bench_kernels.py [--size 256] [--repeats 20]
The same comparison at the whole-solver level is done by timing a fixed
number of damped-flow steps in separate subprocesses, one per path, since
the path is chosen at import time via SVDDF_PURE_NUMPY.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

import svddf
from svddf import _accel


def time_call(fn, *args, repeats):
    fn(*args)  # warm-up / JIT
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(size, repeats):
    rng = np.random.default_rng(0)
    grid = svddf.ImageGrid(rng.uniform(size=(size, size)))
    kern = svddf.make_kernel(1.0)
    fld = svddf.diffusivity_half(grid, 1e-2, 1.0, kern)
    op = svddf.assemble(fld, 1.0)
    x = rng.standard_normal(op.dim)
    taps = svddf.SsimConfig().taps()

    cases = [
        ("csr_matvec", (op.indptr, op.indices, op.data, x)),
        ("sep_correlate_same", (grid.pixels, kern.dg, kern.g)),
        ("sep_correlate_valid", (grid.pixels, taps, taps)),
    ]
    print(f"kernel timings on {size}x{size} (best of {repeats}):")
    header = f"{'kernel':24s}" + "".join(f"{name:>12s}" for name in _accel.IMPLEMENTATIONS)
    print(header)
    for name, args in cases:
        row = f"{name:24s}"
        times = {}
        for impl_name, impl in _accel.IMPLEMENTATIONS.items():
            times[impl_name] = time_call(impl[name], *args, repeats=repeats)
            row += f"{times[impl_name] * 1e3:11.3f}m"
        if "numba" in times:
            row += f"   speedup {times['numpy'] / times['numba']:.1f}x"
        print(row)


SOLVER_SNIPPET = """
import time
import numpy as np
import svddf

rng = np.random.default_rng(0)
grid = svddf.ImageGrid(rng.uniform(size=({size}, {size})))
cfg = svddf.SolverConfig(eta=2.0, exponent_p=1.0, max_steps={steps},
                         stopping=svddf.MaxStepsOnly())
svddf.run_svddf(grid, svddf.SolverConfig(eta=2.0, max_steps=2, stopping=svddf.MaxStepsOnly()))
t0 = time.perf_counter()
out, log = svddf.run_svddf(grid, cfg)
print(f"{{time.perf_counter() - t0:.3f}}")
"""


def bench_solver(size, steps):
    print(f"\nfull damped-flow run, {steps} steps on {size}x{size}:")
    for flag, label in (("0", "numba"), ("1", "numpy")):
        env = dict(os.environ, SVDDF_PURE_NUMPY=flag)
        out = subprocess.run(
            [sys.executable, "-c", SOLVER_SNIPPET.format(size=size, steps=steps)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        print(f"  {label:6s}: {float(out.stdout.strip()):.3f}s")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--steps", type=int, default=50)
    args = ap.parse_args()
    bench_kernels(args.size, args.repeats)
    bench_solver(args.size, args.steps)
