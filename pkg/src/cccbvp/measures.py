"""Measures, measure vectors, canonical functions and generalized derivatives.

A measure is stored through its distribution ``sigma`` (an antiderivative of
the density).  Built-in kinds have closed forms for ``sigma``, its inverse and
stable differences ``sigma(x1) - sigma(x0)``; the tension kinds take a
parameter ``p``.  ``CustomMeasure`` wraps an arbitrary density and integrates
it numerically.
"""
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize


class Measure:
    """Base class.  Subclasses fill in ``sigma``, ``density`` and friends."""

    kind = "abstract"
    closed = True
    singular = False
    exponential = False
    p = 0.0
    domain = (-np.inf, np.inf)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any(x < lo) or np.any(x > hi):
            raise ValueError(f"{self!r}: point outside the extended domain [{lo}, {hi}]")
        return x

    def sigma(self, x):
        raise NotImplementedError

    def density(self, x):
        raise NotImplementedError

    def diff(self, x0, x1):
        """sigma(x1) - sigma(x0), evaluated without needless cancellation."""
        return self.sigma(x1) - self.sigma(x0)

    def inverse(self, s):
        raise NotImplementedError

    def density_y(self, y, coord):
        """Density with respect to ``y`` where ``x = y`` or ``x = y**2``."""
        y = np.asarray(y, dtype=float)
        if coord == "identity":
            return self.density(y)
        return self.density(y * y) * 2.0 * y

    def __eq__(self, other):
        return type(self) is type(other) and self.p == other.p

    def __hash__(self):
        return hash((type(self).__name__, self.p))

    def __repr__(self):
        return f"{type(self).__name__}()" if not self.p else f"{type(self).__name__}(p={self.p:g})"


class Lebesgue(Measure):
    kind = "lebesgue"

    def sigma(self, x):
        return self._check(x) * 1.0

    def density(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def diff(self, x0, x1):
        return np.asarray(x1, dtype=float) - np.asarray(x0, dtype=float)

    def inverse(self, s):
        return np.asarray(s, dtype=float) * 1.0


class Singular(Measure):
    """Density 1/sqrt(x) on x >= 0; sigma(x) = 2 sqrt(x), extended oddly below 0."""

    kind = "singular"
    singular = True

    def sigma(self, x):
        x = self._check(x)
        return 2.0 * np.sign(x) * np.sqrt(np.abs(x))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / np.sqrt(np.abs(x))

    def diff(self, x0, x1):
        x0 = np.asarray(x0, dtype=float)
        x1 = np.asarray(x1, dtype=float)
        if np.all(x0 >= 0) and np.all(x1 >= 0):
            den = np.sqrt(x1) + np.sqrt(x0)
            with np.errstate(invalid="ignore", divide="ignore"):
                out = 2.0 * (x1 - x0) / den
            return np.where(den > 0, out, 0.0)
        return self.sigma(x1) - self.sigma(x0)

    def inverse(self, s):
        s = np.asarray(s, dtype=float)
        return np.sign(s) * (s / 2.0) ** 2

    def density_y(self, y, coord):
        if coord == "identity":
            return self.density(y)
        # dx / sqrt(x) = 2 dz exactly; avoids 0/0 at the origin
        return np.full_like(np.asarray(y, dtype=float), 2.0)


class Cosh(Measure):
    """Density cosh(p x); sigma(x) = sinh(p x) / p."""

    kind = "cosh"
    exponential = True

    def __init__(self, p):
        if not p > 0:
            raise ValueError("tension parameter p must be positive")
        self.p = float(p)

    def sigma(self, x):
        return np.sinh(self.p * self._check(x)) / self.p

    def density(self, x):
        return np.cosh(self.p * np.asarray(x, dtype=float))

    def diff(self, x0, x1):
        p = self.p
        x0 = np.asarray(x0, dtype=float)
        x1 = np.asarray(x1, dtype=float)
        return 2.0 * np.cosh(0.5 * p * (x0 + x1)) * np.sinh(0.5 * p * (x1 - x0)) / p

    def inverse(self, s):
        return np.arcsinh(self.p * np.asarray(s, dtype=float)) / self.p


class Sech2(Measure):
    """Density 1/cosh(p x)^2; sigma(x) = tanh(p x) / p."""

    kind = "sech2"
    exponential = True

    def __init__(self, p):
        if not p > 0:
            raise ValueError("tension parameter p must be positive")
        self.p = float(p)

    def sigma(self, x):
        return np.tanh(self.p * self._check(x)) / self.p

    def density(self, x):
        return 1.0 / np.cosh(self.p * np.asarray(x, dtype=float)) ** 2

    def diff(self, x0, x1):
        p = self.p
        x0 = np.asarray(x0, dtype=float)
        x1 = np.asarray(x1, dtype=float)
        # sinh(p(x1-x0)) / (cosh(p x0) cosh(p x1)), written with bounded factors
        d = x1 - x0
        lg = np.logaddexp(p * x0, -p * x0) + np.logaddexp(p * x1, -p * x1) - 2 * np.log(2.0)
        num = np.sign(d) * np.exp(p * np.abs(d) - np.log(2.0) - lg) * -np.expm1(-2 * p * np.abs(d))
        return num / p

    def inverse(self, s):
        return np.arctanh(self.p * np.asarray(s, dtype=float)) / self.p


class CustomMeasure(Measure):
    """Measure given by a density on [lo, hi], integrated numerically from ``lo``.

    ``antiderivative`` may be supplied, in which case it is used as sigma
    directly.  Only densities with the pole and zero patterns of the built-in
    kinds have been exercised.
    """

    kind = "custom"

    def __init__(self, density, lo, hi, antiderivative=None):
        self._density = density
        self._anti = antiderivative
        self.closed = antiderivative is not None
        self.domain = (float(lo), float(hi))

    @lru_cache(maxsize=4096)
    def _sigma_scalar(self, x):
        val, _ = integrate.quad(self._density, self.domain[0], x, epsabs=1e-14, epsrel=1e-13, limit=200)
        return val

    def sigma(self, x):
        x = self._check(x)
        if self._anti is not None:
            return np.asarray(self._anti(x), dtype=float) - float(self._anti(self.domain[0]))
        flat = np.array([self._sigma_scalar(float(v)) for v in x.ravel()])
        return flat.reshape(x.shape)

    def density(self, x):
        return np.asarray(np.vectorize(self._density)(np.asarray(x, dtype=float)), dtype=float)

    def inverse(self, s):
        lo, hi = self.domain
        out = [optimize.brentq(lambda x: float(self.sigma(x)) - v, lo, hi, xtol=1e-15) for v in np.ravel(s)]
        return np.reshape(out, np.shape(s))

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)


class Weight:
    """The positive function u1.  ``kind`` is "one", "cosh" or "custom"."""

    def __init__(self, kind="one", p=0.0, func=None):
        self.kind = kind
        self.p = float(p)
        self._func = func

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "one":
            return np.ones_like(x)
        if self.kind == "cosh":
            return np.cosh(self.p * x)
        return np.asarray(self._func(x), dtype=float)

    def log(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "one":
            return np.zeros_like(x)
        if self.kind == "cosh":
            return np.logaddexp(self.p * x, -self.p * x) - np.log(2.0)
        return np.log(self(x))

    def ratio(self, x, y):
        """u1(x) / u1(y) without overflow."""
        if self.kind == "one":
            return np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        return np.exp(self.log(x) - self.log(y))

    @property
    def is_one(self):
        return self.kind == "one"

    def __eq__(self, other):
        return isinstance(other, Weight) and (self.kind, self.p, self._func) == (other.kind, other.p, other._func)

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        return "Weight(one)" if self.kind == "one" else f"Weight({self.kind}, p={self.p:g})"


ONE = Weight()


class MeasureVector:
    """u1 together with (d sigma_2, ..., d sigma_k)."""

    def __init__(self, measures, u1=ONE, a=0.0, b=1.0, name=None):
        self.measures = tuple(measures)
        if len(self.measures) < 1:
            raise ValueError("need at least one measure (order k >= 2)")
        self.u1 = u1
        self.a = float(a)
        self.b = float(b)
        self.name = name

    @property
    def k(self):
        return len(self.measures) + 1

    @property
    def coord(self):
        """Working coordinate: sqrt when a 1/sqrt density is present."""
        if any(m.singular for m in self.measures):
            if self.a < 0:
                raise ValueError("singular measures need a >= 0")
            return "sqrt"
        return "identity"

    def sigma(self, j):
        """The measure d sigma_j, 2 <= j <= k."""
        return self.measures[j - 2]

    def reduced(self, i):
        """Reduced vector (d sigma_{i+2}, ..., d sigma_k) with u1 = 1."""
        if not 0 <= i <= self.k - 2:
            raise ValueError(f"reduction level {i} outside 0..{self.k - 2}")
        if i == 0:
            return MeasureVector(self.measures, self.u1, self.a, self.b, self.name)
        return MeasureVector(self.measures[i:], ONE, self.a, self.b)

    def __eq__(self, other):
        return (
            isinstance(other, MeasureVector)
            and self.measures == other.measures
            and self.u1 == other.u1
            and (self.a, self.b) == (other.a, other.b)
        )

    def __repr__(self):
        return f"MeasureVector(k={self.k}, u1={self.u1!r}, measures={list(self.measures)!r})"


def reduced_vector(mv, i):
    return mv.reduced(i)


# ---------------------------------------------------------------- families --

FAMILIES = ("poly", "singular", "tension4", "tension5")


def family(name, p=None, k=None, a=0.0, b=1.0):
    """Measure vector of a built-in family."""
    if name == "poly":
        k = 4 if k is None else int(k)
        if k < 2:
            raise ValueError("order must be >= 2")
        return MeasureVector([Lebesgue()] * (k - 1), ONE, a, b, name)
    if name == "singular":
        k = 5 if k is None else int(k)
        ms = [Singular() if j % 2 == 0 else Lebesgue() for j in range(k - 1)]
        return MeasureVector(ms, ONE, a, b, name)
    if name in ("tension4", "tension5"):
        if p is None or not p > 0:
            raise ValueError(f"family {name!r} needs a tension parameter p > 0")
        if name == "tension4":
            return MeasureVector([Sech2(p), Cosh(p), Lebesgue()], Weight("cosh", p), a, b, name)
        return MeasureVector([Lebesgue(), Lebesgue(), Cosh(p), Sech2(p)], ONE, a, b, name)
    raise KeyError(f"unknown family {name!r}; known: {', '.join(FAMILIES)}")


# ------------------------------------------------------ canonical functions --

class CanonicalFunctions:
    """u_1..u_k of a measure vector, from nested integration on Legendre panels.

    The all-Lebesgue case uses the closed form (x-a)^(j-1)/(j-1)!.
    """

    def __init__(self, mv, panels=64, nodes=24):
        from .quadrature import LegendrePanels

        self.mv = mv
        self.k = mv.k
        self._poly = all(m.kind == "lebesgue" for m in mv.measures)
        if self._poly:
            return
        coord = mv.coord
        ya, yb = (mv.a, mv.b) if coord == "identity" else (np.sqrt(mv.a), np.sqrt(mv.b))
        self._lp = LegendrePanels(np.linspace(ya, yb, panels + 1), nodes, coord)
        y = self._lp.y_nodes
        dens = [m.density_y(y, coord) for m in mv.measures]
        # g[j] holds the nested integral for u_{j+1} / u1, j = 0..k-1
        self._g = [np.ones_like(y)]
        for j in range(2, self.k + 1):
            inner = np.ones_like(y)
            for i in range(j, 1, -1):
                inner = self._lp.cumulative(inner * dens[i - 2])
            self._g.append(inner)
        self._coefs = [self._lp.to_coefs(g) for g in self._g]

    def __call__(self, j, x):
        """u_j(x), 1 <= j <= k."""
        if not 1 <= j <= self.k:
            raise ValueError(f"canonical index {j} outside 1..{self.k}")
        x = np.asarray(x, dtype=float)
        if j == 1:
            return self.mv.u1(x) * np.ones_like(x)
        if self._poly:
            from math import factorial

            g = (x - self.mv.a) ** (j - 1) / factorial(j - 1)
        else:
            g = self._lp.evaluate(self._coefs[j - 1], x)
        return self.mv.u1(x) * g

    def function(self, j):
        return lambda x: self(j, x)


def canonical_functions(mv, **kw):
    return CanonicalFunctions(mv, **kw)


# --------------------------------------------------- generalized derivative --

def generalized_derivative(mv, j, f, x, step=1e-6, mode="central", lower=None):
    """L_j f(x) = D_j ... D_1 D_0 f(x).

    Each D_i (i >= 1) is the quotient of differences of L_{i-1} f and of
    sigma_{i+1} between x +- ``step`` (second order, and it never leaves the
    range of a saturating sigma); ``mode`` is "central" or "right" (the
    one-sided limit).  ``lower`` may supply L_{j-1} f exactly, in which case only the
    outermost quotient is taken numerically.
    """
    if not 0 <= j <= mv.k - 1:
        raise ValueError(f"derivative order {j} outside 0..{mv.k - 1}")
    x = np.asarray(x, dtype=float)
    if j == 0:
        return np.asarray(f(x), dtype=float) / mv.u1(x)
    if lower is None:
        def lower(t):
            return generalized_derivative(mv, j - 1, f, t, step, mode)
    m = mv.sigma(j + 1)
    if mode == "right":
        xp = x + step
        out = (lower(xp) - lower(x)) / m.diff(x, xp)
    elif mode == "central":
        xp, xm = x + step, x - step
        out = (lower(xp) - lower(xm)) / m.diff(xm, xp)
    else:
        raise ValueError(f"unknown difference mode {mode!r}")
    if not np.all(np.isfinite(out)):
        raise ValueError("generalized derivative not evaluable at the requested point")
    return out
