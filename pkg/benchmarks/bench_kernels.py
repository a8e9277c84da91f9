"""Numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--sizes 1000 100000] [--repeat 5]

Each kernel is timed on both backends (after one warm-up call, so numba
compilation is excluded) and the outputs are compared.  A final pair of
end-to-end solves runs in subprocesses with CCCBVP_DISABLE_NUMBA unset/set.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from cccbvp import kernels


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def _band(n, lower, upper, rng):
    ab = rng.uniform(0.1, 1.0, (n, lower + upper + 1))
    ab[:, lower] += lower + upper + 1.0   # diagonally dominant, no pivoting needed
    return ab


def cases(n, rng):
    g, m = 12, 3
    coefs = rng.standard_normal((n, m, g))
    idx = rng.integers(0, n, 4 * n)
    s = rng.uniform(-1, 1, 4 * n)
    ab = _band(n, 2, 2, rng)
    lu = ab.copy()
    kernels.vec.banded_lu(lu, 2, 2)
    rhs = rng.standard_normal(n)
    decay = np.exp(-rng.uniform(0, 5, n))
    loc = rng.standard_normal(n)
    x = rng.standard_normal(n)
    return {
        "legendre_rows": lambda b: b.legendre_rows(coefs, idx, s),
        "banded_lu": lambda b: b.banded_lu(ab.copy(), 2, 2),
        "banded_solve": lambda b: b.banded_solve(lu, 2, 2, rhs),
        "banded_solve_t": lambda b: b.banded_solve_t(lu, 2, 2, rhs),
        "exp_scan": lambda b: b.exp_scan(decay, loc, False),
        "cumsum0": lambda b: b.cumsum0(x),
    }


def end_to_end(subintervals):
    code = (
        "import time;from cccbvp import get_example, solve, BACKEND;"
        "ex=get_example('1a');solve(ex.problem,ex.mv,20,'colloc','green');"
        f"t=time.perf_counter();s=solve(ex.problem,ex.mv,{subintervals},'colloc','green');"
        "import numpy as np;s(np.linspace(0,1,200001));"
        "print(BACKEND, time.perf_counter()-t)"
    )
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, CCCBVP_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, secs = res.stdout.split()
        out[name] = float(secs)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 100000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--subintervals", type=int, default=20480)
    args = ap.parse_args()
    rng = np.random.default_rng(1)
    print(f"{'kernel':<16}{'n':>9}{'numba [s]':>13}{'numpy [s]':>13}{'speedup':>10}{'max diff':>12}")
    for n in args.sizes:
        for name, run in cases(n, rng).items():
            tj = _best(lambda: run(kernels.jit), args.repeat)
            tv = _best(lambda: run(kernels.vec), args.repeat)
            diff = np.max(np.abs(np.asarray(run(kernels.jit)) - np.asarray(run(kernels.vec))))
            print(f"{name:<16}{n:>9}{tj:>13.3e}{tv:>13.3e}{tv / tj:>10.1f}{diff:>12.2e}")
    e2e = end_to_end(args.subintervals)
    print(f"\nexample 1a collocation, {args.subintervals} subintervals, solve + 200001 evaluations:")
    for name, secs in e2e.items():
        print(f"  {name:<6} {secs:.3f} s")


if __name__ == "__main__":
    main()
