"""Registered test problems with closed-form solutions.

Each solution carries its flux D1 D0 y in closed form; registration checks
L2 y = f by differentiating the flux once more with a five-point stencil.
"""
from dataclasses import dataclass, field
from math import erf, sqrt, pi

import numpy as np
from scipy.special import erf as verf

from .bvp import BVPProblem
from .measures import family

EXAMPLES = ("1a", "1b", "2", "3")
DEFAULT_P = {"2": 10.0, "3": 1.0e4}


@dataclass
class ExactSolution:
    name: str
    y: object
    f: object
    l2: object = field(repr=False)
    scale: float = 1.0          # width of the thinnest layer
    note: str = ""

    def residual(self, x):
        return np.abs(self.l2(x) - self.f(x))


@dataclass
class Example:
    name: str
    mv: object
    problem: BVPProblem
    exact: ExactSolution
    p: float = None


def _d5(g, x, h):
    return (g(x - 2 * h) - 8 * g(x - h) + 8 * g(x + h) - g(x + 2 * h)) / (12 * h)


def _step(x, a, b, scale):
    return 0.005 * np.minimum(np.minimum(x - a, b - x), scale)


def _sinh_ratio(t, p):
    """sinh(p t) / sinh(p), 0 <= t <= 1."""
    return np.exp(-p * (1 - t)) * np.expm1(-2 * p * t) / np.expm1(-2 * p)


def _cosh_ratio(t, p):
    """cosh(p t) / sinh(p)."""
    return np.exp(-p * (1 - t)) * (1 + np.exp(-2 * p * t)) / -np.expm1(-2 * p)


def _example_1a():
    def y(x):
        x = np.asarray(x, dtype=float)
        return (2 / 21) * x ** 3.5 + x ** 4 / 14 - np.sqrt(x) / 6

    def flux(x):  # sqrt(x) y'
        return x ** 3 / 3 + (2 / 7) * x ** 3.5 - 1 / 12

    def f(x):
        x = np.asarray(x, dtype=float)
        return x ** 2 + x ** 2.5

    def l2(x):
        return _d5(flux, x, _step(x, 0.0, 1.0, 1.0))

    return ExactSolution("1a", y, f, l2, 1.0, "y = 2/21 x^(7/2) + x^4/14 - sqrt(x)/6")


def _example_1b():
    D = -np.expm1(-100.0)
    c2 = -(2 / 3 - 0.02 + sqrt(pi) * erf(10.0) / 1000) / D

    def y(x):
        x = np.asarray(x, dtype=float)
        z = np.sqrt(x)
        return ((2 / 3) * x * z - 0.02 * z + sqrt(pi) / 1000 * verf(10 * z)) / D + c2 * z

    def flux(x):
        return (x + np.expm1(-100 * x) / 100) / D + 0.5 * c2

    def f(x):
        x = np.asarray(x, dtype=float)
        return -np.expm1(-100 * x) / D

    def l2(x):
        return _d5(flux, x, _step(x, 0.0, 1.0, 0.01))

    return ExactSolution("1b", y, f, l2, 0.01, "twice-integrated f with erf(10 sqrt x)")


def _example_2(p):
    def y(x):
        x = np.asarray(x, dtype=float)
        return (2 / p ** 4) * _sinh_ratio(1 - x, p) + (1 / p ** 2 + 2 / p ** 4) * _sinh_ratio(x, p) - x ** 2 / p ** 2 - 2 / p ** 4

    def dy(x):
        return -(2 / p ** 3) * _cosh_ratio(1 - x, p) + (1 / p + 2 / p ** 3) * _cosh_ratio(x, p) - 2 * x / p ** 2

    def g(x):  # flux / cosh(px) = y' - p tanh(px) y
        return dy(x) - p * np.tanh(p * x) * y(x)

    def f(x):
        return np.asarray(x, dtype=float) ** 2

    def l2(x):
        return _d5(g, x, _step(x, 0.0, 1.0, 1 / p)) + p * np.tanh(p * x) * g(x)

    return ExactSolution("2", y, f, l2, 1 / p, "y'' - p^2 y = x^2 in sinh-ratio form")


def _example_3(p):
    inv_sinh = 2 * np.exp(-p) / -np.expm1(-2 * p)
    coth = (1 + np.exp(-2 * p)) / -np.expm1(-2 * p)
    c1 = -1 / p + 2 * coth / p ** 2 - 2 * inv_sinh / p ** 2

    def y(x):
        x = np.asarray(x, dtype=float)
        return x * _sinh_ratio(x, p) / p - 2 * (_cosh_ratio(x, p) - inv_sinh) / p ** 2 + c1 * x

    def flux(x):
        return x * _cosh_ratio(x, p) - _sinh_ratio(x, p) / p + c1

    def f(x):
        x = np.asarray(x, dtype=float)
        return p * x * _sinh_ratio(x, p)

    def l2(x):
        return _d5(flux, x, _step(x, 0.0, 1.0, 1 / p))

    return ExactSolution("3", y, f, l2, 1 / p, "twice-integrated p x sinh(px)/sinh(p)")


def verify(exact, a=0.0, b=1.0, points=100, rtol=1e-9):
    """Boundary values and L2 y = f at interior sample points (plus a few inside the layers)."""
    layer = exact.scale * np.array([0.5, 1.0, 2.0, 4.0])
    x = np.concatenate([np.linspace(a, b, points + 2)[1:-1], a + layer, b - layer])
    x = x[(x > a) & (x < b)]
    fn = float(np.max(np.abs(exact.f(np.linspace(a, b, 2001)))))
    res = float(np.max(exact.residual(x)))
    ends = float(np.max(np.abs(exact.y(np.array([a, b])))))
    if res > rtol * fn or ends > 1e-14:
        raise ArithmeticError(f"exact solution {exact.name} fails self-check (residual {res:.3e})")
    return res / fn


def get_example(name, p=None, family_name=None, k=None):
    """Problem, exact solution and measure vector of a registered example.

    ``family_name``/``k`` replace the appended measures (e.g. polynomial
    splines for example 3); the problem itself is unchanged.
    """
    name = str(name)
    if name not in EXAMPLES:
        raise KeyError(f"unknown example {name!r}; registered: {', '.join(EXAMPLES)}")
    if name in ("2", "3"):
        p = float(DEFAULT_P[name] if p is None else p)
        if not p > 0:
            raise ValueError("p must be positive")
    else:
        p = None
    if name == "1a":
        mv, exact = family("singular"), _example_1a()
    elif name == "1b":
        mv, exact = family("singular"), _example_1b()
    elif name == "2":
        mv, exact = family("tension4", p=p), _example_2(p)
    else:
        mv, exact = family("tension5", p=p), _example_3(p)
    problem = BVPProblem.from_vector(mv, exact.f)
    if family_name is not None:
        mv = family(family_name, p=p, k=k)
    return Example(name, mv, problem, exact, p)


def exact_solution(name, p=None, check=True):
    ex = get_example(name, p)
    if check:
        verify(ex.exact)
    return ex.exact
