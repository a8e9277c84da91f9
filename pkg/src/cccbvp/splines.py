"""Extended partitions and the generic CCC B-spline engine.

B-splines of every order are built bottom-up from the derivative formula:
order-1 splines are indicators of knot intervals and

    T_i^{m+1}(x) = N_i(x) - N_{i+1}(x),   N_i(x) = int_{t_i}^x T_i^m dsigma / C_i^m,

with the order-m splines integrated against the measure that sits k-m slots
deep in the vector.  Inside each knot interval every spline is held as a
Legendre series in a local coordinate (sqrt(x) when a 1/sqrt density is
present, so those pieces stay polynomial).  The final order is multiplied by
u1.  A degenerate spline (C = 0) contributes a unit step at its left knot.
"""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .quadrature import from_y, legendre_tables, to_y


class UnstableComputationError(ArithmeticError):
    """Raised when intermediate quantities overflow, vanish or turn non-finite."""


@dataclass(frozen=True)
class ExtendedPartition:
    a: float
    b: float
    breakpoints: tuple
    multiplicities: tuple
    k: int

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if np.any(np.diff(bp) <= 0) or (bp.size and (bp[0] <= self.a or bp[-1] >= self.b)):
            raise ValueError("breakpoints must be strictly increasing inside (a, b)")
        if len(self.multiplicities) != len(self.breakpoints):
            raise ValueError("one multiplicity per breakpoint")
        if any(not 0 < m <= self.k for m in self.multiplicities):
            raise ValueError("multiplicities must lie in 1..k")

    @property
    def M(self):
        return int(sum(self.multiplicities))

    @property
    def n(self):
        return self.k + self.M

    @property
    def knots(self):
        inner = np.repeat(np.asarray(self.breakpoints, dtype=float), self.multiplicities)
        return np.concatenate([np.full(self.k, self.a), inner, np.full(self.k, self.b)])

    @property
    def simple(self):
        return all(m == 1 for m in self.multiplicities)

    @property
    def mesh(self):
        return np.concatenate([[self.a], np.asarray(self.breakpoints, dtype=float), [self.b]])


def build_uniform_partition(a, b, subintervals, k):
    if subintervals < 1:
        raise ValueError("need at least one subinterval")
    bp = np.linspace(a, b, int(subintervals) + 1)[1:-1]
    return ExtendedPartition(float(a), float(b), tuple(bp), (1,) * len(bp), int(k))


def reduced_knots(knots, level):
    """Knot vector of the level-th reduced space (boundary multiplicities drop by ``level``)."""
    return knots[level:len(knots) - level] if level else knots


# Largest p*h one Legendre panel per knot interval resolves (basis error ~1e-10).
MAX_TENSION_WIDTH = 10.0


def auto_nodes(mv, knots):
    """Legendre nodes per interval: 2k+2, raised for exponential densities with p*h large."""
    g = 2 * mv.k + 2
    ps = [m.p for m in mv.measures if m.exponential]
    if ps:
        width = max(ps) * float(np.max(np.diff(knots)))
        if width > MAX_TENSION_WIDTH * (1 + 1e-12):
            raise UnstableComputationError(
                f"p*h = {width:.3g} exceeds {MAX_TENSION_WIDTH:g}; refine the mesh for the generic engine"
            )
        g += int(np.ceil(10.0 * width))
    return min(g, 64)


class SplineSpace:
    """CCC-spline space over ``mv`` with the knot vector ``knots`` (length n + k).

    ``keep`` lists the orders whose basis stays evaluable (default: k, k-1, k-2).
    C-integrals are stored for every order below k.
    """

    def __init__(self, mv, knots, g=None, keep=None):
        if isinstance(knots, ExtendedPartition):
            knots = knots.knots
        t = np.asarray(knots, dtype=float)
        self.mv = mv
        self.k = k = mv.k
        self.knots = t
        self.n = n = len(t) - k
        if n < k:
            raise ValueError("knot vector too short for the order")
        if np.any(np.diff(t) < 0):
            raise ValueError("knots must be non-decreasing")
        if t[0] != mv.a or t[-1] != mv.b:
            raise ValueError("knot vector does not span the measure vector's interval")
        if np.any(t[:n] >= t[k:]):
            raise ValueError("need t_i < t_{i+k} for every basis function")
        self.coord = mv.coord
        self.g = int(g) if g else auto_nodes(mv, t)
        self.keep = set(keep) if keep is not None else {k, k - 1, k - 2}
        self._build()

    # -- construction ------------------------------------------------------
    def _build(self):
        k, t, g = self.k, self.knots, self.g
        nodes, weights, to_coef, cum = legendre_tables(g)
        self.y_knots = yk = to_y(t, self.coord)
        hy = np.diff(yk)
        self._hy = hy
        nint = len(hy)
        live = hy > 0
        ynod = yk[:-1, None] + 0.5 * (nodes[None, :] + 1.0) * hy[:, None]
        self._C = {}
        self._coefs = {}

        vals = np.zeros((nint, 1, g))
        vals[live, 0, :] = 1.0
        self._store(1, vals, to_coef)
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            try:
                for m in range(1, k):
                    meas = self.mv.measures[k - m - 1]
                    dens = meas.density_y(ynod, self.coord) * (0.5 * hy)[:, None]
                    dens[~live] = 0.0
                    vals = self._raise_order(vals, dens, m, weights, cum)
                    vals[~live] = 0.0
                    self._store(m + 1, vals, to_coef)
            except FloatingPointError as exc:
                raise UnstableComputationError(f"B-spline recurrence overflowed: {exc}") from None

    def _store(self, order, vals, to_coef):
        if order in self.keep:
            self._coefs[order] = np.ascontiguousarray(vals @ to_coef.T)

    def _raise_order(self, vals, dens, m, weights, cum):
        nint = vals.shape[0]
        integrand = vals * dens[:, None, :]
        part = integrand @ cum.T            # from the interval's left end to each node
        full = integrand @ weights          # (nint, m)
        nfun = nint - m + 1
        i = np.arange(nfun)[:, None]
        q = np.arange(m)[None, :]
        per = full[i + q, m - 1 - q]        # contribution of interval i+q to spline i
        pre = np.cumsum(per, axis=1) - per
        C = per.sum(axis=1)
        if not np.all(np.isfinite(C)):
            raise UnstableComputationError(f"non-finite C-integrals at order {m}")
        self._C[m] = C
        J = np.arange(nint)[:, None]
        r = np.arange(m)[None, :]
        fi = J - m + 1 + r
        ok = (fi >= 0) & (fi < nfun)
        fic = np.clip(fi, 0, nfun - 1)
        qq = m - 1 - r
        base = np.where(ok, pre[fic, np.broadcast_to(qq, fic.shape)], 0.0)
        Cf = np.where(ok, C[fic], 0.0)
        safe = Cf > 0
        N = np.empty((nint, m + 2, vals.shape[2]))
        N[:, 0, :] = 1.0
        N[:, m + 1, :] = 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            act = (base[:, :, None] + part) / np.where(safe, Cf, 1.0)[:, :, None]
        N[:, 1:m + 1, :] = np.where(safe[:, :, None], act, 1.0)
        return N[:, :-1, :] - N[:, 1:, :]

    # -- queries -----------------------------------------------------------
    def dim(self, order=None):
        order = self.k if order is None else order
        return self.n - self.k + order

    def c_integrals(self, order):
        """C-integrals of the non-trivial order-``order`` splines, in index order."""
        if order not in self._C:
            raise ValueError(f"C-integrals exist for orders 1..{self.k - 1}")
        return self._C[order][self.k - order:self.n]

    def locate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.knots[0]) or np.any(x > self.knots[-1]):
            raise ValueError("evaluation point outside [a, b]")
        J = np.searchsorted(self.knots, x, side="right") - 1
        J = np.clip(J, self.k - 1, self.n - 1)
        y = to_y(x, self.coord)
        s = 2.0 * (y - self.y_knots[J]) / self._hy[J] - 1.0
        return J, s

    def basis(self, x, order=None):
        """Active splines at x: returns (first, values) with values[:, r] = T_{first+r}.

        ``first`` is the 0-based index within the order's own space.
        """
        order = self.k if order is None else order
        if order not in self._coefs:
            raise ValueError(f"order {order} not retained (keep={sorted(self.keep)})")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        J, s = self.locate(x)
        vals = kernels.legendre_rows(self._coefs[order], J, s)
        if order == self.k and not self.mv.u1.is_one:
            vals = vals * self.mv.u1(x)[:, None]
        return J - order + 1 - (self.k - order), vals

    def eval(self, coefs, x, order=None):
        order = self.k if order is None else order
        coefs = np.asarray(coefs, dtype=float)
        if coefs.shape[0] != self.dim(order):
            raise ValueError(f"expected {self.dim(order)} coefficients, got {coefs.shape[0]}")
        x = np.asarray(x, dtype=float)
        first, vals = self.basis(x.ravel(), order)
        idx = first[:, None] + np.arange(vals.shape[1])[None, :]
        return np.sum(vals * coefs[idx], axis=1).reshape(x.shape)

    def reduced(self, level):
        """Stand-alone space of the level-th reduced vector over the reduced knots."""
        return SplineSpace(self.mv.reduced(level), reduced_knots(self.knots, level))

    def __repr__(self):
        return f"SplineSpace(k={self.k}, n={self.n}, mv={self.mv!r})"


def bspline_eval(space, i, x, order=None):
    """T_i^order(x); ``i`` is 1-based within the order's own space."""
    order = space.k if order is None else order
    if not 1 <= order <= space.k:
        raise ValueError("order out of range")
    if not 1 <= i <= space.dim(order):
        raise IndexError(f"basis index {i} outside 1..{space.dim(order)}")
    x = np.asarray(x, dtype=float)
    first, vals = space.basis(x.ravel(), order)
    r = (i - 1) - first
    hit = (r >= 0) & (r < vals.shape[1])
    out = np.where(hit, vals[np.arange(len(r)), np.clip(r, 0, vals.shape[1] - 1)], 0.0)
    return out.reshape(x.shape)


def c_integral(space, i, order):
    """C_i^order with ``i`` the 1-based index on the space's full knot vector."""
    if not 1 <= order < space.k:
        raise ValueError("C-integrals are defined for orders below k")
    C = space._C[order]
    if not 1 <= i <= len(C):
        raise IndexError("index outside the knot vector")
    return float(C[i - 1])


@dataclass
class SplineFunction:
    space: object
    coefs: np.ndarray
    d: np.ndarray = field(default=None, repr=False)
    f: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.coefs = np.asarray(self.coefs, dtype=float)

    def __call__(self, x):
        return spline_eval(self, x)

    def L1(self, x):
        if self.d is None:
            raise ValueError("derive_chain has not been run")
        return self.space.eval(self.d, x, self.space.k - 1)

    def L2(self, x):
        if self.f is None:
            raise ValueError("derive_chain has not been run")
        return self.space.eval(self.f, x, self.space.k - 2)


def spline_eval(s, x):
    return s.space.eval(s.coefs, x)


def derive_chain(s):
    """Fill in d_i = (a_i - a_{i-1}) / C_i^{k-1} and f_i = (d_i - d_{i-1}) / C_i^{k-2}."""
    sp = s.space
    k = sp.k
    d = np.diff(s.coefs) / sp.c_integrals(k - 1)
    f = np.diff(d) / sp.c_integrals(k - 2) if k >= 3 else None
    return SplineFunction(sp, s.coefs, d, f)


def greville_generic(space):
    """Greville nodes from C-integrals: eta_i = sum_{j=2}^i C_j^{k-1}, zeta = sigma^{-1}(sigma(a) + eta)."""
    meas = space.mv.measures[0]
    eta = np.concatenate([[0.0], np.cumsum(space.c_integrals(space.k - 1))])
    a, b = space.knots[0], space.knots[-1]
    zeta = meas.inverse(meas.sigma(a) + eta)
    zeta[0], zeta[-1] = a, b
    return np.clip(zeta, a, b), eta
