"""Boundary value problem L2 y = f, y(a) = alpha, y(b) = beta, with L2 = D2 D1 D0.

Two solution routes share the reduced-space approximation Q[f] (interpolation
or the Schoenberg operator at Greville nodes):

* ``solve_deboor`` telescopes the coefficient chains f -> d -> a of the full
  order-k spline and evaluates it with the generic B-spline engine;
* ``solve_green`` evaluates u(x) + u1(x) int G(x, t) Q[f](t) dsigma3(t)
  directly, integrating exactly piece by piece.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .closedform import ClosedFormSpace, supports
from .measures import generalized_derivative
from .operators import interpolate, schoenberg_apply
from .quadrature import exp_moments, from_y, gauss_legendre, to_y
from .splines import (
    ExtendedPartition,
    SplineFunction,
    SplineSpace,
    UnstableComputationError,
    build_uniform_partition,
    derive_chain,
    reduced_knots,
)

METHODS = ("colloc", "quasi")
ALGORITHMS = ("deboor", "green")


@dataclass(frozen=True)
class BVPProblem:
    a: float
    b: float
    u1: object
    sigma2: object
    sigma3: object
    f: object
    alpha: float = 0.0
    beta: float = 0.0

    @classmethod
    def from_vector(cls, mv, f, alpha=0.0, beta=0.0):
        return cls(mv.a, mv.b, mv.u1, mv.measures[0], mv.measures[1], f, alpha, beta)

    @property
    def span(self):
        """S = sigma2(b) - sigma2(a)."""
        return float(self.sigma2.diff(self.a, self.b))


# ------------------------------------------------------------------ kernel --

def greens_eval(problem, x, y):
    """G(x, y) = -(sigma2(min) - sigma2(a)) (sigma2(b) - sigma2(max)) / S."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any((x < problem.a) | (x > problem.b) | (y < problem.a) | (y > problem.b)):
        raise ValueError("Green's function arguments must lie in [a, b]")
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    s2 = problem.sigma2
    return -s2.diff(problem.a, lo) * s2.diff(hi, problem.b) / problem.span


def _endpoint_weights(problem, x):
    """lambda_a(x) = u1(x)/u1(a) (sigma2(b)-sigma2(x))/S and its mirror lambda_b."""
    x = np.asarray(x, dtype=float)
    u1, s2 = problem.u1, problem.sigma2
    if u1.kind == "cosh" and s2.kind == "sech2" and u1.p == s2.p:
        # reduces to sinh(p(b-x))/sinh(p(b-a)) and sinh(p(x-a))/sinh(p(b-a))
        return _sinh_ratio(problem.b - x, problem.b - problem.a, u1.p), _sinh_ratio(
            x - problem.a, problem.b - problem.a, u1.p
        )
    S = problem.span
    return (
        u1.ratio(x, problem.a) * s2.diff(x, problem.b) / S,
        u1.ratio(x, problem.b) * s2.diff(problem.a, x) / S,
    )


def _sinh_ratio(num, den, p):
    """sinh(p num) / sinh(p den) for 0 <= num <= den."""
    num = np.asarray(num, dtype=float)
    return np.exp(-p * (den - num)) * np.expm1(-2 * p * num) / np.expm1(-2 * p * den)


@dataclass
class BoundaryElement:
    """u = c1 u1 + c2 u2 with u(a) = alpha and u(b) = beta."""

    problem: BVPProblem

    @property
    def coefficients(self):
        pr = self.problem
        ua, ub = float(pr.u1(pr.a)), float(pr.u1(pr.b))
        return pr.alpha / ua, (pr.beta / ub - pr.alpha / ua) / pr.span

    def __call__(self, x):
        pr = self.problem
        x = np.asarray(x, dtype=float)
        if pr.alpha == 0 and pr.beta == 0:
            return np.zeros_like(x)
        la, lb = _endpoint_weights(pr, x)
        return pr.alpha * la + pr.beta * lb


def boundary_element(problem):
    return BoundaryElement(problem)


# ------------------------------------------------------- reduced-space data --

def _knots(mv, mesh):
    if isinstance(mesh, ExtendedPartition):
        if not mesh.simple:
            raise ValueError("solver paths need simple interior knots")
        return mesh.knots
    if np.ndim(mesh) == 0:
        return build_uniform_partition(mv.a, mv.b, int(mesh), mv.k).knots
    return np.asarray(mesh, dtype=float)


def reduced_space(mv, knots, level=2):
    """The level-th reduced space over the matching knots; closed form when available."""
    rmv = mv.reduced(level)
    kn = reduced_knots(knots, level)
    if supports(rmv):
        return ClosedFormSpace(rmv, kn)
    return SplineSpace(rmv, kn, keep={rmv.k})


def approximate_rhs(problem, space, method):
    """Q[f] = I[f] (collocation) or S[f] (quasi-collocation) in the second reduced space."""
    if method == "colloc":
        rep = interpolate(space, problem.f)
        q = rep.spline
        q.report = rep
        return q
    if method == "quasi":
        return schoenberg_apply(space, problem.f)
    raise ValueError(f"unknown method {method!r}; use one of {METHODS}")


def _q_callable(q):
    if isinstance(q.space, ClosedFormSpace):
        return q.space.combine(q.coefs)
    return lambda x: q.space.eval(q.coefs, x)


def _check_vector(problem, mv):
    if mv.k < 3:
        raise ValueError("the BVP needs spline order k >= 3")
    if (mv.measures[0], mv.measures[1]) != (problem.sigma2, problem.sigma3) or mv.u1 != problem.u1:
        raise ValueError("measure vector does not start with the problem's (u1, dsigma2, dsigma3)")
    if (mv.a, mv.b) != (problem.a, problem.b):
        raise ValueError("measure vector and problem live on different intervals")


class Solution:
    """Common part of both solution handles."""

    method: str
    algorithm: str

    def __init__(self, problem, mv, knots, method, Q):
        self.problem = problem
        self.mv = mv
        self.knots = knots
        self.method = method
        self.Q = Q
        self.Qf = _q_callable(Q)
        self.u = BoundaryElement(problem)

    @property
    def n(self):
        return len(self.knots) - self.mv.k

    @property
    def mesh(self):
        return np.unique(self.knots)


# ----------------------------------------------------------- de Boor route --

class DeBoorSolution(Solution):
    algorithm = "deboor"

    def __init__(self, problem, mv, knots, method, Q, space, a, chain):
        super().__init__(problem, mv, knots, method, Q)
        self.space = space
        self.coefs = a
        self.spline = chain

    def __call__(self, x):
        return self.space.eval(self.coefs, x)

    def L2(self, x):
        return self.spline.L2(x)


def deboor_coefficients(fq, C1, C2, alpha_over_u1a, beta_over_u1b, accumulate="forward"):
    """Full coefficients a_1..a_n from f_3..f_n and C-integrals C^{k-1}_2..n, C^{k-2}_3..n.

    ``accumulate="forward"`` sums a_i = a_1 + sum_{l<=i} C_l d_l left to right.
    ``"two-sided"`` also sums a_i = a_n - sum_{l>i} C_l d_l from the right end
    and keeps, per index, the side with the smaller running magnitude; this
    avoids the cancellation that swamps the small coefficients next to b
    when u1(b) is huge.
    """
    if not (np.all(np.isfinite(C1)) and np.all(np.isfinite(C2))) or np.any(C1 <= 0) or np.any(C2 <= 0):
        raise UnstableComputationError("C-integrals are not finite and positive")
    # S_l = sum_{j=3}^{l} f_j C_j^{k-2}, l = 2..n (S_2 = 0)
    S = kernels.cumsum0(fq * C2)
    A1 = float(np.sum(C1))
    A2 = float(np.dot(C1, S))
    d2 = (beta_over_u1b - alpha_over_u1a - A2) / A1
    d = d2 + S
    t = C1 * d
    a = alpha_over_u1a + kernels.cumsum0(t)
    if accumulate == "two-sided":
        back = beta_over_u1b - kernels.cumsum0(t[::-1])[::-1]
        size = np.abs(t)
        a = np.where(kernels.cumsum0(size) <= kernels.cumsum0(size[::-1])[::-1], a, back)
    elif accumulate != "forward":
        raise ValueError(f"unknown accumulation {accumulate!r}")
    if not np.all(np.isfinite(a)):
        raise UnstableComputationError("de Boor coefficients are not finite")
    return a, d2, A1, A2


def solve_deboor(problem, mv, mesh, method="quasi", accumulate="forward"):
    _check_vector(problem, mv)
    knots = _knots(mv, mesh)
    Q = approximate_rhs(problem, reduced_space(mv, knots), method)
    k = mv.k
    space = SplineSpace(mv, knots)
    C1 = space.c_integrals(k - 1)
    C2 = space.c_integrals(k - 2)
    ua, ub = problem.u1(problem.a), problem.u1(problem.b)
    with np.errstate(over="ignore"):
        a, d2, A1, A2 = deboor_coefficients(Q.coefs, C1, C2, problem.alpha / ua, problem.beta / ub, accumulate)
    chain = derive_chain(SplineFunction(space, a))
    sol = DeBoorSolution(problem, mv, knots, method, Q, space, a, chain)
    sol.d2, sol.A1, sol.A2 = d2, A1, A2
    return sol


# ------------------------------------------------------------- Green route --

def _poly_degree_y(mv_reduced, space, coord):
    """Degree of Q in the working coordinate (None if Q is not polynomial there)."""
    if isinstance(space, ClosedFormSpace):
        if space.kind == "poly":
            return (space.k - 1) * (2 if coord == "sqrt" else 1)
        if space.kind == "zpoly":
            return 2 * space.k - 3 if coord == "sqrt" else None
        return None
    if any(m.kind not in ("lebesgue", "singular") for m in mv_reduced.measures):
        return None
    if coord == "identity":
        return None if any(m.singular for m in mv_reduced.measures) else mv_reduced.k - 1
    return sum(2 if m.kind == "lebesgue" else 1 for m in mv_reduced.measures)


_SIGMA_DEG = {("identity", "lebesgue"): (1, 0), ("sqrt", "lebesgue"): (2, 1), ("sqrt", "singular"): (1, 0)}


class GaussGreen:
    """Gauss-Legendre integration in x or sqrt(x), exact when every piece is polynomial there."""

    def __init__(self, problem, mesh, Qf, points, coord):
        self.pr = problem
        self.mesh = mesh
        self.Qf = Qf
        self.rule = gauss_legendre(points)
        self.coord = coord
        self.ym = to_y(mesh, coord)
        yn, wn = self.rule.mapped(self.ym[:-1], self.ym[1:])
        k1, k2 = self._integrands(yn)
        self.A = kernels.cumsum0(np.sum(wn * k1, axis=1))
        full2 = np.sum(wn * k2, axis=1)
        self.B = kernels.cumsum0(full2[::-1])[::-1]

    def _integrands(self, yn):
        pr = self.pr
        xn = from_y(yn, self.coord)
        q = self.Qf(xn.ravel()).reshape(xn.shape)
        w3 = pr.sigma3.density_y(yn, self.coord)
        return q * pr.sigma2.diff(pr.a, xn) * w3, q * pr.sigma2.diff(xn, pr.b) * w3

    def integrals(self, x, j):
        y = to_y(x, self.coord)
        yl, wl = self.rule.mapped(self.ym[j], y)
        yr, wr = self.rule.mapped(y, self.ym[j + 1])
        l1, _ = self._integrands(yl)
        _, r2 = self._integrands(yr)
        return self.A[j] + np.sum(wl * l1, axis=1), self.B[j + 1] + np.sum(wr * r2, axis=1)

    def __call__(self, x, j):
        pr = self.pr
        A, B = self.integrals(x, j)
        s2 = pr.sigma2
        return -pr.u1(x) * (s2.diff(x, pr.b) * A + s2.diff(pr.a, x) * B) / pr.span


def _tension_piece_integrals(c0, cp, cm, l, r, lo, hi, p, a, b):
    """Exact integrals of Q(t)(t-a) and Q(t)(b-t) over [lo, hi] inside a piece [l, r] where
    Q = c0 + cp exp(p(t-r)) + cm exp(-p(t-l))."""
    d = hi - lo
    E = exp_moments(p, d, 1)
    E0, E1 = E[..., 0], E[..., 1]
    ep = np.exp(p * (hi - r))
    em = np.exp(-p * (lo - l))
    mid = 0.5 * (lo + hi)
    i1 = c0 * d * (mid - a) + cp * ep * ((hi - a) * E0 - E1) + cm * em * ((lo - a) * E0 + E1)
    i2 = c0 * d * (b - mid) + cp * ep * ((b - hi) * E0 + E1) + cm * em * ((b - lo) * E0 - E1)
    return i1, i2


class TensionPiecesGreen:
    """u1 = 1, Lebesgue sigma2 and sigma3, Q with pieces in span{1, cosh, sinh}."""

    def __init__(self, problem, mesh, space, qc):
        self.pr = problem
        self.mesh = mesh
        self.p = space.p
        live = np.nonzero(space.live)[0]
        self.qc = qc[live]
        l, r = mesh[:-1], mesh[1:]
        i1, i2 = _tension_piece_integrals(*self.qc.T, l, r, l, r, self.p, problem.a, problem.b)
        self.A = kernels.cumsum0(i1)
        self.B = kernels.cumsum0(i2[::-1])[::-1]

    def __call__(self, x, j):
        pr = self.pr
        c0, cp, cm = self.qc[j].T
        l, r = self.mesh[j], self.mesh[j + 1]
        i1, _ = _tension_piece_integrals(c0, cp, cm, l, r, l, x, self.p, pr.a, pr.b)
        _, i2 = _tension_piece_integrals(c0, cp, cm, l, r, x, r, self.p, pr.a, pr.b)
        A = self.A[j] + i1
        B = self.B[j + 1] + i2
        return -((pr.b - x) * A + (x - pr.a) * B) / (pr.b - pr.a)


class _OneSidedTension:
    """T(xi) = sinh(p(L-xi)) / (p sinh(pL)) * int_0^xi Q(eta) sinh(p eta) d eta for linear-spline Q,
    via P(xi) = int Q e^{-p(xi-eta)} and M(xi) = int Q e^{-p eta}."""

    def __init__(self, nodes, ql, slope, p):
        self.nodes = nodes
        self.ql = ql
        self.slope = slope
        self.p = p
        self.L = nodes[-1]
        h = np.diff(nodes)
        E = exp_moments(p, h, 1)
        qr = ql + slope * h
        self.P = kernels.exp_scan(np.exp(-p * h), qr * E[:, 0] - slope * E[:, 1])
        self.M = kernels.cumsum0(np.exp(-p * nodes[:-1]) * (ql * E[:, 0] + slope * E[:, 1]))

    def __call__(self, xi, j):
        p, L = self.p, self.L
        d = xi - self.nodes[j]
        E = exp_moments(p, d, 1)
        ql, sl = self.ql[j], self.slope[j]
        qx = ql + sl * d
        P = np.exp(-p * d) * self.P[j] + qx * E[:, 0] - sl * E[:, 1]
        M = self.M[j] + np.exp(-p * self.nodes[j]) * (ql * E[:, 0] + sl * E[:, 1])
        return -np.expm1(-2 * p * (L - xi)) * (P - np.exp(-p * xi) * M) / (2 * p * -np.expm1(-2 * p * L))


class TensionKernelGreen:
    """u1 = cosh(p x), dsigma2 = dx / cosh^2(p x), dsigma3 = cosh(p x) dx, Q a linear spline.

    u1(x) G(x, t) w3(t) = -sinh(p(t-a)) sinh(p(b-x)) / (p sinh(p(b-a))) for t < x (and mirrored),
    so both one-sided integrals are scans over exponentially weighted moments.
    """

    def __init__(self, problem, mesh, space, qc):
        self.pr = problem
        self.mesh = mesh
        p = problem.u1.p
        live = np.nonzero(space.live)[0]
        ql, sl = qc[live, 0], qc[live, 1]
        h = np.diff(mesh)
        nodes = mesh - problem.a
        self.left = _OneSidedTension(nodes, ql, sl, p)
        L = nodes[-1]
        qr = ql + sl * h
        self.right = _OneSidedTension(L - nodes[::-1], qr[::-1], -sl[::-1], p)
        self.N = len(h)

    def __call__(self, x, j):
        xi = x - self.pr.a
        t1 = self.left(xi, j)
        t2 = self.right(self.left.L - xi, self.N - 1 - j)
        return -(t1 + t2)


def green_integrator(problem, mv, knots, Q):
    """Pick the exact integration scheme for the family's reduced space."""
    mesh = np.unique(knots)
    space = Q.space
    u1, s2, s3 = problem.u1, problem.sigma2, problem.sigma3
    if isinstance(space, ClosedFormSpace):
        qc = space.combine(Q.coefs).qc
        if (u1.kind == "cosh" and s2.kind == "sech2" and s3.kind == "cosh"
                and u1.p == s2.p == s3.p and space.kind == "poly" and space.k == 2):
            return TensionKernelGreen(problem, mesh, space, qc)
        if u1.is_one and s2.kind == s3.kind == "lebesgue" and space.kind == "tension":
            return TensionPiecesGreen(problem, mesh, space, qc)
    coord = "sqrt" if (s2.singular or s3.singular or getattr(space, "coord", "identity") == "sqrt") else "identity"
    deg_q = _poly_degree_y(Q.space.mv, space, coord)
    try:
        dk = _SIGMA_DEG[(coord, s2.kind)][0] + _SIGMA_DEG[(coord, s3.kind)][1]
    except KeyError:
        dk = None
    if deg_q is None or dk is None or not u1.is_one:
        raise NotImplementedError(f"no exact quadrature pairing for {mv!r}")
    points = max(1, -(-(deg_q + dk + 1) // 2))
    return GaussGreen(problem, mesh, _q_callable(Q), points, coord)


class GreenSolution(Solution):
    algorithm = "green"

    def __init__(self, problem, mv, knots, method, Q, integrator):
        super().__init__(problem, mv, knots, method, Q)
        self.integrator = integrator

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        pr = self.problem
        if np.any(flat < pr.a) or np.any(flat > pr.b):
            raise ValueError("evaluation point outside [a, b]")
        mesh = self.integrator.mesh
        j = np.clip(np.searchsorted(mesh, flat, side="right") - 1, 0, len(mesh) - 2)
        out = self.u(flat) + self.integrator(flat, j)
        return out.reshape(x.shape)

    def L2(self, x):
        """L2 s = Q[f] by construction of the Green representation."""
        return self.Qf(np.asarray(x, dtype=float))


def solve_green(problem, mv, mesh, method="quasi"):
    _check_vector(problem, mv)
    knots = _knots(mv, mesh)
    Q = approximate_rhs(problem, reduced_space(mv, knots), method)
    return GreenSolution(problem, mv, knots, method, Q, green_integrator(problem, mv, knots, Q))


def solve(problem, mv, mesh, method="quasi", algorithm="green", accumulate="forward"):
    if algorithm == "green":
        return solve_green(problem, mv, mesh, method)
    if algorithm == "deboor":
        return solve_deboor(problem, mv, mesh, method, accumulate)
    raise ValueError(f"unknown algorithm {algorithm!r}; use one of {ALGORITHMS}")


def residual_check(handle, problem, x, step=1e-4):
    """max |L2 s - Q[f]| over x.

    For de Boor handles L2 s comes from the derived coefficient chain; for
    Green handles it is a nested central difference of s in sigma coordinates.
    """
    x = np.asarray(x, dtype=float)
    q = handle.Qf(x)
    if isinstance(handle, DeBoorSolution):
        l2 = handle.L2(x)
    else:
        l2 = generalized_derivative(handle.mv, 2, handle, x, step=step)
    return float(np.max(np.abs(l2 - q)))
