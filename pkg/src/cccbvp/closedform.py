"""Closed-form reduced spaces of order 1, 2 and 3.

Every spline is written, interval by interval, in a small local basis:

    poly     1, u, u^2           u = x - t_J
    zpoly    1, d, d^2, d^3      d = sqrt(x) - sqrt(t_J)
    tension  1, e+, e-           e+ = exp(p (x - t_{J+1})), e- = exp(-p (x - t_J))

The tension pieces are scaled by cosh at a knot so nothing overflows for
large p; the scale cancels inside each N = (partial integral) / C.
"""
import numpy as np

from .splines import UnstableComputationError


def _pair_kind(mv):
    ms = mv.measures
    kinds = tuple(m.kind for m in ms)
    if len(ms) == 0:
        return "poly"
    if len(ms) == 1:
        return {"lebesgue": "poly", "singular": "zpoly"}.get(kinds[0])
    if len(ms) == 2:
        if kinds == ("lebesgue", "lebesgue"):
            return "poly"
        if kinds == ("singular", "lebesgue"):
            return "zpoly"
        if kinds == ("cosh", "sech2") and ms[0].p == ms[1].p:
            return "tension"
    return None


def supports(mv):
    return mv.u1.is_one and mv.k <= 3 and _pair_kind(mv) is not None


class ClosedFormSpace:
    """Spline space of order <= 3 for the measure pairs the built-in families produce."""

    def __init__(self, mv, knots):
        if not supports(mv):
            raise NotImplementedError(f"no closed form for {mv!r}")
        t = np.asarray(knots, dtype=float)
        self.mv = mv
        self.k = m = mv.k
        self.knots = t
        self.n = len(t) - m
        self.kind = _pair_kind(mv)
        self.p = mv.measures[0].p if self.kind == "tension" else 0.0
        self.coord = "sqrt" if self.kind == "zpoly" else "identity"
        self.h = np.diff(t)
        self.live = self.h > 0
        self._build()

    @property
    def ncomp(self):
        return {"poly": self.k, "zpoly": 2 * self.k - 2 if self.k > 1 else 1, "tension": 3}[self.kind]

    def _build(self):
        m, nint = self.k, len(self.h)
        nc = self.ncomp
        T = np.zeros((nint, m, nc))
        if m == 1:
            T[self.live, 0, 0] = 1.0
        elif m == 2:
            v = np.zeros((nint, nc))
            if self.kind == "poly":
                v[self.live, 1] = 1.0 / self.h[self.live]
            else:
                dz = np.diff(np.sqrt(self.knots))
                v[self.live, 1] = 1.0 / dz[self.live]
            T[:, 0, 0] = 1.0
            T[:, 0, :] -= v
            T[:, 1, :] = v
        else:
            rise, fall, R, F = self._rise_fall()
            C = R[:-1] + F[1:]               # C of the order-2 hat starting at interval i
            self._C2 = C
            e0 = np.zeros(nc)
            e0[0] = 1.0
            J = np.nonzero(self.live)[0]
            Nl = (R[J - 1, None] * e0[None, :] + fall[J]) / C[J - 1, None]
            Nr = rise[J] / C[J, None]
            T[J, 0] = e0[None, :] - Nl
            T[J, 1] = Nl - Nr
            T[J, 2] = Nr
        T[~self.live] = 0.0
        if not np.all(np.isfinite(T)):
            raise UnstableComputationError("closed-form B-spline coefficients are not finite")
        self.T = T

    def _rise_fall(self):
        """Local coefficients of the rising and falling hat integrals and their full values."""
        nint = len(self.h)
        h = self.h
        live = self.live
        rise = np.zeros((nint, self.ncomp))
        fall = np.zeros((nint, self.ncomp))
        R = np.zeros(nint)
        F = np.zeros(nint)
        hl = h[live]
        if self.kind == "poly":
            rise[live, 2] = 0.5 / hl
            fall[live, 1] = 1.0
            fall[live, 2] = -0.5 / hl
            R[live] = F[live] = 0.5 * hl
        elif self.kind == "zpoly":
            z = np.sqrt(self.knots)
            zl = z[:-1][live]
            dz = np.diff(z)[live]
            rise[live, 2] = 2.0 * zl / hl
            rise[live, 3] = 2.0 / (3.0 * hl)
            fall[live, 1] = 2.0
            fall[live, 2] = -rise[live, 2]
            fall[live, 3] = -rise[live, 3]
            R[live] = rise[live, 2] * dz ** 2 + rise[live, 3] * dz ** 3
            F[live] = 2.0 * dz - R[live]
        else:
            p = self.p
            E = np.exp(-p * hl)
            den = p * -np.expm1(-2.0 * p * hl)
            rise[live, 0] = -2.0 * E / den
            rise[live, 1] = 1.0 / den
            rise[live, 2] = E / den
            fall[live, 0] = (1.0 + E * E) / den
            fall[live, 1] = -E / den
            fall[live, 2] = -1.0 / den
            R[live] = F[live] = np.tanh(0.5 * p * hl) / p
        return rise, fall, R, F

    # -- evaluation --------------------------------------------------------
    def dim(self, order=None):
        if order not in (None, self.k):
            raise ValueError("closed-form spaces only expose their own order")
        return self.n

    def locate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.knots[0]) or np.any(x > self.knots[-1]):
            raise ValueError("evaluation point outside [a, b]")
        J = np.searchsorted(self.knots, x, side="right") - 1
        return np.clip(J, self.k - 1, self.n - 1)

    def components(self, x, J):
        """Local basis values at x inside interval J, shape (len(x), ncomp)."""
        x = np.asarray(x, dtype=float)
        t = self.knots
        if self.kind == "poly":
            u = x - t[J]
            return u[:, None] ** np.arange(self.ncomp)[None, :]
        if self.kind == "zpoly":
            d = np.sqrt(x) - np.sqrt(t[J])
            return d[:, None] ** np.arange(self.ncomp)[None, :]
        p = self.p
        return np.stack(
            [np.ones_like(x), np.exp(p * np.minimum(x - t[J + 1], 0.0)), np.exp(-p * np.maximum(x - t[J], 0.0))],
            axis=1,
        )

    def basis(self, x, order=None):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        J = self.locate(x)
        comp = self.components(x, J)
        vals = np.einsum("prc,pc->pr", self.T[J], comp)
        return J - self.k + 1, vals

    def eval(self, coefs, x, order=None):
        return self.combine(coefs)(x)

    def combine(self, coefs):
        coefs = np.asarray(coefs, dtype=float)
        if coefs.shape[0] != self.n:
            raise ValueError(f"expected {self.n} coefficients, got {coefs.shape[0]}")
        m = self.k
        J = np.arange(len(self.h))
        idx = np.clip(J[:, None] - m + 1 + np.arange(m)[None, :], 0, self.n - 1)
        qc = np.einsum("jrc,jr->jc", self.T, coefs[idx])
        return PiecewiseFunction(self, qc)

    def c_integrals(self, order):
        """Unscaled C-integrals of the order-2 hats (order 3 spaces only)."""
        if self.k != 3 or order != 2:
            raise ValueError("closed-form C-integrals are provided for order 2 inside order-3 spaces")
        C = self._C2[1:self.n]
        if self.kind == "tension":
            with np.errstate(over="ignore"):
                C = C * np.cosh(self.p * self.knots[2:self.n + 1])
        return C

    def __repr__(self):
        return f"ClosedFormSpace(kind={self.kind}, order={self.k}, n={self.n})"


class PiecewiseFunction:
    """A spline of a closed-form space held as per-interval local coefficients."""

    def __init__(self, space, qc):
        self.space = space
        self.qc = qc

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        J = self.space.locate(flat)
        return self.on(flat, J).reshape(x.shape)

    def on(self, x, J):
        """Values at x known to lie in intervals J."""
        comp = self.space.components(np.asarray(x, dtype=float), J)
        return np.einsum("pc,pc->p", self.qc[J], comp)
