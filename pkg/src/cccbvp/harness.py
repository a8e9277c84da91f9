"""Convergence runs, sup-norm errors and CSV output."""
import csv
import io
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .bvp import ALGORITHMS, METHODS, solve
from .examples import EXAMPLES, get_example
from .splines import UnstableComputationError

FLOAT_FMT = "%.17e"
LAYER_OFFSETS = np.array([0.25, 0.5, 1.0, 2.0, 4.0, 8.0])


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return FLOAT_FMT % v


def _split(v):
    return [s.strip() for s in str(v).split(",") if s.strip()]


@dataclass
class ExperimentConfig:
    example: str = "1a"
    p: float = None
    subintervals_start: int = 20
    doublings: int = 13
    methods: list = field(default_factory=lambda: ["quasi"])
    algorithms: list = field(default_factory=lambda: ["green"])
    samples_per_interval: int = 20
    family: str = None
    k: int = None
    accumulate: str = "forward"
    output: str = None

    def __post_init__(self):
        self.example = str(self.example)
        if self.example not in EXAMPLES:
            raise KeyError(f"unknown example {self.example!r}")
        if self.p is not None:
            self.p = float(self.p)
            if not self.p > 0:
                raise ValueError("p must be positive")
        self.methods = _split(self.methods) if isinstance(self.methods, str) else list(self.methods)
        self.algorithms = _split(self.algorithms) if isinstance(self.algorithms, str) else list(self.algorithms)
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r}")
        if self.accumulate not in ("forward", "two-sided"):
            raise ValueError(f"unknown accumulation {self.accumulate!r}")
        self.subintervals_start = int(self.subintervals_start)
        self.doublings = int(self.doublings)
        self.samples_per_interval = int(self.samples_per_interval)
        if self.subintervals_start < 1 or self.doublings < 0 or self.samples_per_interval < 1:
            raise ValueError("subintervals_start and samples_per_interval must be >= 1, doublings >= 0")

    @property
    def schedule(self):
        return [self.subintervals_start * 2 ** j for j in range(self.doublings + 1)]

    @classmethod
    def from_pairs(cls, pairs):
        """Build from key=value strings; ``method``/``algorithm`` are accepted for the list keys."""
        alias = {"method": "methods", "algorithm": "algorithms"}
        known = {f.name for f in fields(cls)}
        kw = {}
        for item in pairs:
            key, sep, value = item.partition("=")
            key = alias.get(key.strip(), key.strip())
            if not sep or key not in known:
                raise ValueError(f"bad config entry {item!r}")
            kw[key] = value.strip() or None
        return cls(**kw)

    @classmethod
    def from_text(cls, text):
        lines = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if line:
                lines.append(line)
        return cls.from_pairs(lines)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())


# ----------------------------------------------------------------- errors --

def sample_points(mesh, samples_per_interval=20, scale=None):
    """Uniform samples per mesh interval plus knots; points at the layer scale next to every knot."""
    mesh = np.asarray(mesh, dtype=float)
    s = np.linspace(0.0, 1.0, samples_per_interval + 1)
    x = (mesh[:-1, None] + np.diff(mesh)[:, None] * s[None, :]).ravel()
    parts = [x, mesh]
    if scale is not None and scale < np.max(np.diff(mesh)):
        off = scale * LAYER_OFFSETS
        parts.append((mesh[:, None] + np.concatenate([off, -off])[None, :]).ravel())
    x = np.concatenate(parts)
    return np.unique(np.clip(x, mesh[0], mesh[-1]))


def _refine(g, x, i, rounds=3, width=40):
    """Dense resampling around the sample i where |g| peaked."""
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, len(x) - 1)]
    best_x, best = x[i], abs(g(np.array([x[i]]))[0])
    for _ in range(rounds):
        t = np.linspace(lo, hi, width + 1)
        v = np.abs(g(t))
        j = int(np.argmax(v))
        if v[j] > best:
            best, best_x = float(v[j]), t[j]
        step = (hi - lo) / width
        lo, hi = max(best_x - step, x[0]), min(best_x + step, x[-1])
    return best


def sup_norm(g, mesh, samples_per_interval=20, scale=None, refine=True):
    x = sample_points(mesh, samples_per_interval, scale)
    v = np.abs(g(x))
    i = int(np.argmax(v))
    if not np.isfinite(v[i]) or not refine:
        return float(v[i])
    return max(float(v[i]), _refine(g, x, i))


def sup_error(handle, exact, samples_per_interval=20, refine=True):
    """max |s - y| over the sample set of ``sample_points`` (with a local refinement at the peak)."""
    return sup_norm(lambda x: handle(x) - exact.y(x), handle.mesh, samples_per_interval, exact.scale, refine)


def rhs_error(handle, exact, samples_per_interval=20):
    """max |Q[f] - f|, i.e. the size of L2 s - f."""
    return sup_norm(lambda x: handle.Qf(x) - exact.f(x), handle.mesh, samples_per_interval, exact.scale)


def mesh_statistics(mv, mesh):
    """h_1 = max mesh width and h_j = max sigma_j increments for j = 2..k."""
    out = {"h1": float(np.max(np.diff(mesh)))}
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(2, mv.k + 1):
            out[f"h{j}"] = float(np.max(mv.sigma(j).diff(mesh[:-1], mesh[1:])))
    return out


# ------------------------------------------------------------ convergence --

@dataclass
class ConvergenceRow:
    subintervals: int
    n: int
    mesh_stats: dict
    errors: dict = field(default_factory=dict)       # (method, algorithm) -> sup error
    rhs_errors: dict = field(default_factory=dict)   # method -> ||Q[f] - f||
    kappa: dict = field(default_factory=dict)        # method -> condition estimate
    failures: dict = field(default_factory=dict)     # (method, algorithm) -> message
    unstable: dict = field(default_factory=dict)


@dataclass
class ConvergenceReport:
    config: ExperimentConfig
    k: int
    y_norm: float
    rows: list

    @property
    def columns(self):
        return [(m, a) for m in self.config.methods for a in self.config.algorithms]

    def errors(self, method, algorithm):
        return np.array([r.errors.get((method, algorithm), np.nan) for r in self.rows])

    def orders(self, method, algorithm):
        """log2(e_j / e_{j+1}), one shorter than the rows."""
        e = self.errors(method, algorithm)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log2(e[:-1] / e[1:])

    def n_values(self):
        return [r.n for r in self.rows]

    def header(self):
        cols = ["subintervals", "n"]
        for m, a in self.columns:
            cols += [f"error_{m}_{a}", f"order_{m}_{a}", f"unstable_{m}_{a}"]
        for m in self.config.methods:
            cols.append(f"rhs_error_{m}")
            if m == "colloc":
                cols.append("kappa_colloc")
        cols += list(self.rows[0].mesh_stats) if self.rows else []
        return cols

    def table(self):
        out = []
        orders = {c: self.orders(*c) for c in self.columns}
        for i, r in enumerate(self.rows):
            row = [r.subintervals, r.n]
            for c in self.columns:
                row += [r.errors.get(c), orders[c][i - 1] if i else None, r.unstable.get(c, False)]
            for m in self.config.methods:
                row.append(r.rhs_errors.get(m))
                if m == "colloc":
                    row.append(r.kappa.get(m))
            row += list(r.mesh_stats.values())
            out.append(row)
        return out

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for row in self.table():
            w.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _flag(errors, y_norm, algorithm):
    """Per-row instability: non-finite, at least |y| in size, or (de Boor route) not decreasing."""
    flags = []
    prev = None
    for e in errors:
        bad = not math.isfinite(e) or e >= y_norm
        if algorithm == "deboor" and prev is not None and math.isfinite(prev):
            bad = bad or e >= prev
        flags.append(bad)
        prev = e
    return flags


def run_convergence(config):
    ex = get_example(config.example, config.p, config.family, config.k)
    y_norm = sup_norm(ex.exact.y, np.linspace(ex.problem.a, ex.problem.b, 2001), 1, ex.exact.scale, False)
    rows = []
    for sub in config.schedule:
        mesh = np.linspace(ex.problem.a, ex.problem.b, sub + 1)
        row = ConvergenceRow(sub, sub + ex.mv.k - 1, mesh_statistics(ex.mv, mesh))
        for m in config.methods:
            for a in config.algorithms:
                try:
                    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                        h = solve(ex.problem, ex.mv, sub, m, a, config.accumulate)
                        row.errors[(m, a)] = sup_error(h, ex.exact, config.samples_per_interval)
                except (UnstableComputationError, FloatingPointError, np.linalg.LinAlgError) as exc:
                    row.errors[(m, a)] = math.nan
                    row.failures[(m, a)] = f"{type(exc).__name__}: {exc}"
                    continue
                if m not in row.rhs_errors:
                    row.rhs_errors[m] = rhs_error(h, ex.exact, config.samples_per_interval)
                    rep = getattr(h.Q, "report", None)
                    if rep is not None:
                        row.kappa[m] = rep.cond
        rows.append(row)
    report = ConvergenceReport(config, ex.mv.k, y_norm, rows)
    for c in report.columns:
        for r, bad in zip(rows, _flag(report.errors(*c), y_norm, c[1])):
            r.unstable[c] = bad
    if config.output:
        report.to_csv(config.output)
    return report


# ---------------------------------------------------------------- profile --

PROFILE_COLUMNS = ("x", "s", "y", "error", "Q", "f")


def emit_profile(handle, exact, path=None, samples_per_interval=20):
    """CSV of x, s(x), y(x), |s - y|, Q[f](x), f(x) on the error sample set."""
    x = sample_points(handle.mesh, samples_per_interval, exact.scale if exact is not None else None)
    s = handle(x)
    cols = [x, s]
    header = ["x", "s"]
    if exact is not None:
        y = exact.y(x)
        cols += [y, np.abs(s - y), handle.Qf(x), exact.f(x)]
        header += ["y", "error", "Q", "f"]
    else:
        cols.append(handle.Qf(x))
        header.append("Q")
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    np.savetxt(buf, np.column_stack(cols), fmt=FLOAT_FMT, delimiter=",")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
