"""Greville points, the CCC-Schoenberg operator and spline interpolation."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, onenormest

from . import kernels
from .closedform import ClosedFormSpace
from .splines import SplineFunction, greville_generic

PIVOT_FLOOR = 1e-13


@dataclass(frozen=True)
class GrevillePoints:
    nodes: np.ndarray
    eta: np.ndarray


def _tension_greville(l, r, p):
    """(1/p) arcsinh(sinh(p m) / cosh(p h / 2)), m and h the midpoint and length of [l, r]."""
    m = 0.5 * (l + r)
    h = r - l
    sgn = np.sign(m)
    pm = p * np.abs(m)
    out = np.empty_like(pm)
    small = pm < 20.0
    out[small] = np.arcsinh(np.sinh(pm[small]) / np.cosh(0.5 * p * h[small]))
    pb, hb = pm[~small], 0.5 * p * h[~small]
    lny = pb - hb + np.log1p(-np.exp(-2.0 * pb)) - np.log1p(np.exp(-2.0 * hb))
    out[~small] = lny + np.log1p(np.sqrt(1.0 + np.exp(-2.0 * lny)))
    return sgn * out / p


def greville_points(space):
    """CCC-Greville nodes of ``space`` (closed forms where the family has one)."""
    m = space.k
    if m < 2:
        raise ValueError("Greville points need order >= 2")
    t = space.knots
    n = space.n
    meas = space.mv.measures[0]
    kinds = {ms.kind for ms in space.mv.measures}
    i = np.arange(n)
    if m == 2:
        zeta = t[i + 1].copy()
    elif kinds == {"lebesgue"}:
        zeta = np.mean(t[i[:, None] + np.arange(1, m)[None, :]], axis=1)
    elif m == 3 and isinstance(space, ClosedFormSpace) and space.kind == "zpoly":
        z1, z2 = np.sqrt(t[i + 1]), np.sqrt(t[i + 2])
        den = z1 + z2
        with np.errstate(invalid="ignore", divide="ignore"):
            zeta = np.where(den > 0, ((2.0 / 3.0) * (z1 * z1 + z1 * z2 + z2 * z2) / den) ** 2, 0.0)
    elif m == 3 and isinstance(space, ClosedFormSpace) and space.kind == "tension":
        zeta = _tension_greville(t[i + 1], t[i + 2], space.p)
    else:
        zeta, eta = greville_generic(space)
        return GrevillePoints(zeta, eta)
    zeta[0], zeta[-1] = t[0], t[-1]
    with np.errstate(over="ignore", invalid="ignore"):
        eta = meas.diff(t[0], zeta)
    return GrevillePoints(zeta, eta)


def _piecewise(space, coefs):
    if isinstance(space, ClosedFormSpace):
        return space.combine(coefs)
    return lambda x: space.eval(coefs, x)


def schoenberg_apply(space, f, nodes=None):
    """S[f] = sum f(zeta_i) T_i."""
    if not space.mv.u1.is_one:
        raise ValueError("the Schoenberg operator is built on spaces with u1 = 1")
    zeta = greville_points(space).nodes if nodes is None else np.asarray(nodes, dtype=float)
    return SplineFunction(space, np.asarray(f(zeta), dtype=float))


@dataclass
class InterpolationReport:
    spline: SplineFunction
    nodes: np.ndarray
    residual: float
    cond: float
    pivoted: bool
    norm_inf: float


class _BandSystem:
    """Banded collocation matrix with LU (no pivoting) or a pivoted fallback."""

    def __init__(self, ab, lower, upper):
        self.ab = ab
        self.lower = lower
        self.upper = upper
        self.n = ab.shape[0]
        lu = ab.copy()
        ratio = kernels.banded_lu(lu, lower, upper)
        self.pivoted = not ratio >= PIVOT_FLOOR
        self.lu = None if self.pivoted else lu

    def _scipy_band(self, transpose=False):
        n, lo, up = self.n, self.lower, self.upper
        i, c = np.nonzero(np.ones_like(self.ab, dtype=bool))
        j = i + c - lo
        ok = (j >= 0) & (j < n)
        i, j, v = i[ok], j[ok], self.ab[i[ok], c[ok]]
        if transpose:
            i, j, lo, up = j, i, up, lo
        band = np.zeros((lo + up + 1, n))
        band[up + i - j, j] = v
        return (lo, up), band

    def solve(self, rhs):
        if not self.pivoted:
            return kernels.banded_solve(self.lu, self.lower, self.upper, rhs)
        lu, band = self._scipy_band()
        return scipy.linalg.solve_banded(lu, band, rhs)

    def solve_t(self, rhs):
        if not self.pivoted:
            return kernels.banded_solve_t(self.lu, self.lower, self.upper, rhs)
        lu, band = self._scipy_band(transpose=True)
        return scipy.linalg.solve_banded(lu, band, rhs)

    def matvec(self, c):
        n, lo = self.n, self.lower
        out = np.zeros(n)
        for col in range(self.ab.shape[1]):
            j = np.arange(n) + col - lo
            ok = (j >= 0) & (j < n)
            out[ok] += self.ab[ok, col] * c[j[ok]]
        return out

    def norm_inf(self):
        return float(np.max(np.sum(np.abs(self.ab), axis=1)))

    def inv_norm_inf(self):
        n = self.n
        if n <= 4:
            return float(np.max(np.sum(np.abs(np.column_stack([self.solve(e) for e in np.eye(n)])), axis=1)))
        # Totally positive A has a checkerboard inverse, so one solve with
        # alternating signs gives every absolute row sum exactly. Both this and
        # onenormest are lower bounds in general; keep the larger.
        checker = float(np.max(np.abs(self.solve((-1.0) ** np.arange(n)))))
        op = LinearOperator((n, n), matvec=self.solve_t, rmatvec=self.solve, dtype=float)
        state = np.random.get_state()
        np.random.seed(0)  # onenormest draws from the global generator
        try:
            est = float(onenormest(op))
        finally:
            np.random.set_state(state)
        return max(checker, est)


def collocation_matrix(space, nodes):
    """Band storage of A[i, j] = T_j(tau_i) plus (lower, upper)."""
    nodes = np.asarray(nodes, dtype=float)
    n = space.dim()
    if nodes.shape != (n,):
        raise ValueError(f"need exactly {n} nodes")
    if np.any(np.diff(nodes) <= 0):
        raise ValueError("interpolation nodes must be strictly increasing")
    first, vals = space.basis(nodes)
    m = vals.shape[1]
    rows = np.arange(n)
    r = rows - first
    inside = (r >= 0) & (r < m)
    diag = np.where(inside, vals[rows, np.clip(r, 0, m - 1)], 0.0)
    scale = np.max(np.abs(vals), axis=1)
    bad = np.nonzero(~(diag > 1e-14 * np.maximum(scale, 1e-300)))[0]
    if bad.size:
        raise ValueError(f"Schoenberg-Whitney condition violated at node index {int(bad[0]) + 1}")
    cols = first[:, None] + np.arange(m)[None, :]
    valid = (cols >= 0) & (cols < n) & (vals != 0.0)
    off = np.where(valid, cols - rows[:, None], 0)
    lower = int(max(0, -off.min()))
    upper = int(max(0, off.max()))
    ab = np.zeros((n, lower + upper + 1))
    rr = np.broadcast_to(rows[:, None], cols.shape)[valid]
    ab[rr, (cols - rows[:, None])[valid] + lower] = vals[valid]
    return ab, lower, upper


def interpolate(space, f, nodes=None):
    """Spline I[f] with I[f](tau_i) = f(tau_i); nodes default to the Greville points."""
    nodes = greville_points(space).nodes if nodes is None else np.asarray(nodes, dtype=float)
    ab, lower, upper = collocation_matrix(space, nodes)
    system = _BandSystem(ab, lower, upper)
    rhs = np.asarray(f(nodes), dtype=float)
    coefs = system.solve(rhs)
    if not np.all(np.isfinite(coefs)):
        raise np.linalg.LinAlgError("interpolation system is numerically singular")
    residual = float(np.max(np.abs(system.matvec(coefs) - rhs)))
    norm = system.norm_inf()
    cond = norm * system.inv_norm_inf()
    return InterpolationReport(SplineFunction(space, coefs), nodes, residual, cond, system.pivoted, norm)


def condition_estimate(report):
    return report.cond


def as_callable(spline):
    """Fast evaluator for a SplineFunction (closed-form spaces combine once)."""
    return _piecewise(spline.space, spline.coefs)
