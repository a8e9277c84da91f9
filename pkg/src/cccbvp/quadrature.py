"""Quadrature rules, exponential moments and Legendre panel tables."""
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial import legendre as npleg

from . import kernels


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    degree: int  # exact for polynomials up to this degree on [-1, 1]

    def integrate(self, g, lo, hi):
        """Integral of g over [lo, hi] with the affinely mapped rule."""
        half = 0.5 * (hi - lo)
        t = 0.5 * (hi + lo) + half * self.nodes
        return half * np.dot(self.weights, g(t))

    def mapped(self, lo, hi):
        """Nodes and weights on [lo, hi]; lo, hi may be arrays (broadcast along a new last axis)."""
        lo = np.asarray(lo, dtype=float)[..., None]
        hi = np.asarray(hi, dtype=float)[..., None]
        half = 0.5 * (hi - lo)
        return 0.5 * (hi + lo) + half * self.nodes, half * self.weights


@lru_cache(maxsize=None)
def gauss_legendre(points):
    """Classical Gauss-Legendre rule on [-1, 1], exact up to degree 2*points - 1."""
    points = int(points)
    if not 1 <= points <= 64:
        raise ValueError("points must lie in 1..64")
    x, w = npleg.leggauss(points)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(x, w, 2 * points - 1)


def sqrt_mapped_integral(g, lo, hi, rule):
    """Integral of g(t) over [lo, hi] computed as the integral of 2 z g(z^2) over [sqrt lo, sqrt hi]."""
    if lo < 0 or hi < 0:
        raise ValueError("sqrt substitution needs non-negative bounds")
    return rule.integrate(lambda z: 2.0 * z * g(z * z), np.sqrt(lo), np.sqrt(hi))


def exp_moments(mu, width, mmax):
    """E_m = integral over [0, width] of w^m exp(-mu w) dw for m = 0..mmax.

    ``mu >= 0``; broadcasting over ``mu`` and ``width``.  Output has a trailing
    axis of length mmax + 1.
    """
    mu, width = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(width, dtype=float))
    out = np.empty(mu.shape + (mmax + 1,))
    t = mu * width
    small = t < 1.0
    # power series, good to full precision for t < 1
    if np.any(small):
        ts = t[small]
        ws = width[small]
        for m in range(mmax + 1):
            acc = np.zeros_like(ts)
            term = np.ones_like(ts)
            for j in range(30):
                acc += term / (m + j + 1)
                term = term * (-ts) / (j + 1)
            out[small, m] = ws ** (m + 1) * acc
    big = ~small
    if np.any(big):
        mb = mu[big]
        wb = width[big]
        ew = np.exp(-mb * wb)
        e = -np.expm1(-mb * wb) / mb
        out[big, 0] = e
        for m in range(1, mmax + 1):
            e = (m * e - wb ** m * ew) / mb
            out[big, m] = e
    return out


def exp_poly_integral(coefs, q, lo, hi):
    """Integral over [lo, hi] of sum_m coefs[m] t^m exp(q t), referenced at the endpoint
    where the exponent is largest so that no intermediate grows beyond the result."""
    coefs = np.asarray(coefs, dtype=float)
    mmax = len(coefs) - 1
    width = hi - lo
    if width == 0:
        return 0.0
    if q >= 0:
        ref, sgn = hi, -1.0   # t = hi - w
    else:
        ref, sgn = lo, 1.0    # t = lo + w
    mom = exp_moments(abs(q), width, mmax)
    total = 0.0
    for m, c in enumerate(coefs):
        if c == 0:
            continue
        # (ref + sgn w)^m = sum_j C(m, j) ref^(m-j) (sgn w)^j
        total += c * sum(comb(m, j) * ref ** (m - j) * sgn ** j * mom[j] for j in range(m + 1))
    return np.exp(q * ref) * total


_TENSION_BASIS = ("1", "x", "cosh", "sinh", "xcosh", "xsinh")


def tension_exact_integral(coef, q, lo, hi):
    """Exact integral of sum_b coef[b] * b(t) over [lo, hi].

    Basis names: "1", "x", "cosh", "sinh", "xcosh", "xsinh" with hyperbolic
    argument q t.  Products such as sinh(q(c - t)) x cosh(q t) should be
    expanded into this basis by the caller (the Green kernels do this via
    exponential moments directly).
    """
    if not q > 0:
        raise ValueError("q must be positive")
    unknown = set(coef) - set(_TENSION_BASIS)
    if unknown:
        raise ValueError(f"unknown basis names {sorted(unknown)}")
    if hi == lo:
        return 0.0
    c = {b: float(coef.get(b, 0.0)) for b in _TENSION_BASIS}
    poly = c["1"] * (hi - lo) + c["x"] * (hi * hi - lo * lo) / 2.0
    plus = [0.5 * (c["cosh"] + c["sinh"]), 0.5 * (c["xcosh"] + c["xsinh"])]
    minus = [0.5 * (c["cosh"] - c["sinh"]), 0.5 * (c["xcosh"] - c["xsinh"])]
    return poly + exp_poly_integral(plus, q, lo, hi) + exp_poly_integral(minus, -q, lo, hi)


# ------------------------------------------------------------ Legendre tools --

@lru_cache(maxsize=None)
def legendre_tables(g):
    """Nodes, weights, values->coefficients map and cumulative integration matrix on [-1, 1].

    ``cum @ v`` gives the integral from -1 to each node of the degree g-1
    interpolant of the nodal values ``v``.
    """
    rule = gauss_legendre(g)
    vand = npleg.legvander(rule.nodes, g - 1)
    to_coef = np.linalg.inv(vand)
    cum = np.empty((g, g))
    for j in range(g):
        cint = npleg.legint(to_coef[:, j], lbnd=-1.0)
        cum[:, j] = npleg.legval(rule.nodes, cint)
    for arr in (to_coef, cum):
        arr.setflags(write=False)
    return rule.nodes, rule.weights, to_coef, cum


def to_y(x, coord):
    x = np.asarray(x, dtype=float)
    return x if coord == "identity" else np.sqrt(np.maximum(x, 0.0))


def from_y(y, coord):
    y = np.asarray(y, dtype=float)
    return y if coord == "identity" else y * y


class LegendrePanels:
    """Piecewise Legendre representation on panels of a working coordinate y."""

    def __init__(self, y_edges, g, coord="identity"):
        self.edges = np.asarray(y_edges, dtype=float)
        self.g = int(g)
        self.coord = coord
        nodes, self.weights, self.to_coef, self.cum = legendre_tables(self.g)
        self.half = 0.5 * np.diff(self.edges)
        mid = 0.5 * (self.edges[1:] + self.edges[:-1])
        self.y_nodes = mid[:, None] + self.half[:, None] * nodes[None, :]

    def cumulative(self, vals):
        """Integral from the first edge to every node of dy-weighted nodal values."""
        loc = (vals @ self.cum.T) * self.half[:, None]
        tot = (vals @ self.weights) * self.half
        return loc + kernels.cumsum0(tot)[:-1, None]

    def to_coefs(self, vals):
        return vals @ self.to_coef.T

    def locate(self, x):
        y = to_y(x, self.coord)
        j = np.clip(np.searchsorted(self.edges, y, side="right") - 1, 0, len(self.edges) - 2)
        s = (y - self.edges[j]) / self.half[j] - 1.0
        return j, s

    def evaluate(self, coefs, x):
        x = np.asarray(x, dtype=float)
        j, s = self.locate(x.ravel())
        vals = kernels.legendre_rows(coefs[:, None, :], j, s)[:, 0]
        return vals.reshape(x.shape)
