"""Command line entry point: solve, convergence, greville, bsplines."""
import argparse
import io
import json
import sys

import numpy as np

from .bvp import ALGORITHMS, METHODS, reduced_space, solve
from .examples import EXAMPLES, get_example
from .harness import FLOAT_FMT, ExperimentConfig, emit_profile, run_convergence, sup_error
from .measures import FAMILIES, family
from .operators import greville_points
from .splines import SplineSpace, build_uniform_partition


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _space(args):
    mv = family(args.family, p=args.p, k=args.k)
    knots = build_uniform_partition(mv.a, mv.b, args.subintervals, mv.k).knots
    if args.level:
        return reduced_space(mv, knots, args.level)
    return SplineSpace(mv, knots, keep={mv.k})


def cmd_solve(args):
    ex = get_example(args.example, args.p, args.family, args.k)
    handle = solve(ex.problem, ex.mv, args.subintervals, args.method, args.algorithm, args.accumulate)
    text = emit_profile(handle, ex.exact, samples_per_interval=args.samples)
    _write(text, args.output)
    err = sup_error(handle, ex.exact, args.samples)
    print(f"n={handle.n} method={args.method} algorithm={args.algorithm} error={err:.6e}", file=sys.stderr)


def cmd_convergence(args):
    cfg = ExperimentConfig.load(args.config) if args.config else None
    pairs = list(args.settings)
    if cfg is not None:
        base = {k: v for k, v in vars(cfg).items() if v is not None}
        base["methods"] = ",".join(cfg.methods)
        base["algorithms"] = ",".join(cfg.algorithms)
        pairs = [f"{k}={v}" for k, v in base.items()] + pairs
    cfg = ExperimentConfig.from_pairs(pairs)
    report = run_convergence(cfg)
    if cfg.output is None:
        sys.stdout.write(report.to_csv())


def cmd_greville(args):
    space = _space(args)
    g = greville_points(space)
    buf = io.StringIO()
    buf.write("i,zeta,eta\n")
    for i, (z, e) in enumerate(zip(g.nodes, g.eta), start=1):
        buf.write(f"{i},{FLOAT_FMT % z},{FLOAT_FMT % e}\n")
    _write(buf.getvalue(), args.output)


def cmd_bsplines(args):
    space = _space(args)
    mesh = np.unique(space.knots)
    s = np.linspace(0.0, 1.0, args.samples + 1)
    x = np.unique((mesh[:-1, None] + np.diff(mesh)[:, None] * s[None, :]).ravel())
    n = space.dim()
    first, vals = space.basis(x)
    table = np.zeros((len(x), n))
    for r in range(vals.shape[1]):
        idx = first + r
        ok = (idx >= 0) & (idx < n)
        table[np.nonzero(ok)[0], idx[ok]] = vals[ok, r]
    buf = io.StringIO()
    buf.write(",".join(["x"] + [f"T{i}" for i in range(1, n + 1)]) + "\n")
    np.savetxt(buf, np.column_stack([x, table]), fmt=FLOAT_FMT, delimiter=",")
    _write(buf.getvalue(), args.output)


def _fail(kind, message):
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("UsageError", message)
        sys.exit(2)


def build_parser():
    ap = _Parser(prog="cccbvp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", help="solve one example and write its profile CSV")
    sp.add_argument("--example", required=True, choices=EXAMPLES)
    sp.add_argument("--p", type=float)
    sp.add_argument("--family", choices=FAMILIES, help="replace the appended measures")
    sp.add_argument("--k", type=int)
    sp.add_argument("--subintervals", type=int, default=20)
    sp.add_argument("--method", choices=METHODS, default="quasi")
    sp.add_argument("--algorithm", choices=ALGORITHMS, default="green")
    sp.add_argument("--accumulate", choices=("forward", "two-sided"), default="forward",
                    help="coefficient summation of the deboor algorithm")
    sp.add_argument("--samples", type=int, default=20, help="samples per mesh interval")
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("convergence", help="run a mesh-doubling study")
    sp.add_argument("--config", help="key = value file")
    sp.add_argument("settings", nargs="*", help="key=value overrides")
    sp.set_defaults(func=cmd_convergence)

    for name, func, help_ in (("greville", cmd_greville, "Greville nodes as CSV"),
                              ("bsplines", cmd_bsplines, "B-spline values as CSV")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--family", required=True, choices=FAMILIES)
        sp.add_argument("--p", type=float)
        sp.add_argument("--k", type=int)
        sp.add_argument("--subintervals", type=int, default=20)
        sp.add_argument("--level", type=int, default=0, help="reduced-space level")
        sp.add_argument("--output", "-o")
        if name == "bsplines":
            sp.add_argument("--samples", type=int, default=20)
        sp.set_defaults(func=func)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            args.func(args)
    except Exception as exc:  # reported as one JSON line for scripts
        _fail(type(exc).__name__, str(exc).strip("'\""))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
