import numpy as np
import pytest
from scipy.interpolate import BSpline

from cccbvp.measures import Lebesgue, MeasureVector, Singular, canonical_functions, family
from cccbvp.operators import greville_points
from cccbvp.splines import (
    ExtendedPartition,
    SplineFunction,
    SplineSpace,
    bspline_eval,
    build_uniform_partition,
    c_integral,
    derive_chain,
    reduced_knots,
    spline_eval,
)

FAMILY_CASES = [("poly", None), ("singular", None), ("tension4", 5.0), ("tension5", 5.0)]


def _space(name, p=None, sub=7, k=None):
    mv = family(name, p=p, k=k)
    return SplineSpace(mv, build_uniform_partition(0, 1, sub, mv.k))


def test_uniform_partition_dimensions():
    assert build_uniform_partition(0, 1, 20, 5).n == 24
    assert build_uniform_partition(0, 1, 20, 4).n == 23
    part = build_uniform_partition(0, 1, 1, 4)
    assert part.n == 4 and part.breakpoints == ()
    with pytest.raises(ValueError):
        build_uniform_partition(0, 1, 0, 4)
    t = build_uniform_partition(0, 1, 5, 3).knots
    assert np.all(t[:3] == 0) and np.all(t[-3:] == 1)


def test_extended_partition_validation():
    with pytest.raises(ValueError):
        ExtendedPartition(0.0, 1.0, (0.5, 0.4), (1, 1), 3)
    with pytest.raises(ValueError):
        ExtendedPartition(0.0, 1.0, (0.5,), (4,), 3)
    p = ExtendedPartition(0.0, 1.0, (0.5,), (2,), 3)
    assert p.M == 2 and p.n == 5 and not p.simple
    assert list(p.knots) == [0, 0, 0, 0.5, 0.5, 1, 1, 1]


def test_hat_peak():
    mv = family("poly", k=2)
    sp = SplineSpace(mv, [0, 0, 0.5, 1, 1])
    assert bspline_eval(sp, 2, 0.5) == pytest.approx(1.0)
    assert bspline_eval(sp, 2, 0.25) == pytest.approx(0.5)


@pytest.mark.parametrize("name,p", FAMILY_CASES)
def test_partition_of_unity(name, p, rng):
    sp = _space(name, p)
    x = rng.uniform(0, 1, 100)
    tot = sp.eval(np.ones(sp.n), x)
    u1 = sp.mv.u1(x)
    tol = 1e-12 if name == "poly" else 1e-8
    assert np.max(np.abs(tot - u1)) <= tol * np.max(u1)


def test_sum_equals_cosh_weight():
    sp = _space("tension4", 3.0)
    x = np.linspace(0, 1, 41)
    assert np.allclose(spline_eval(SplineFunction(sp, np.ones(sp.n)), x), np.cosh(3 * x), rtol=1e-12)


def test_polynomial_matches_scipy(rng):
    sp = _space("poly", sub=9)
    c = rng.standard_normal(sp.n)
    x = rng.uniform(0, 1, 200)
    ref = BSpline(sp.knots, c, 3)(x)
    assert np.allclose(sp.eval(c, x), ref, atol=1e-13)


@pytest.mark.parametrize("name,p", FAMILY_CASES)
def test_support_and_positivity(name, p):
    sp = _space(name, p, sub=6)
    t = sp.knots
    for i in range(1, sp.n + 1):
        lo, hi = t[i - 1], t[i - 1 + sp.k]
        inside = np.linspace(lo, hi, 25)[1:-1]
        assert np.all(bspline_eval(sp, i, inside) > 0)
        grid = np.linspace(0, 1, 61)
        outside = grid[(grid < lo) | (grid > hi)]
        if outside.size:
            assert np.all(np.abs(bspline_eval(sp, i, outside)) < 1e-13)


def test_local_support_structure():
    sp = _space("singular", sub=6)
    first, vals = sp.basis(np.array([0.3]))
    J = np.searchsorted(sp.knots, 0.3, side="right") - 1
    assert first[0] == J - sp.k + 1 and vals.shape[1] == sp.k


def test_singular_order3_against_piecewise_solve():
    # interior B-spline of span{1, sqrt x, x^1.5} with C^0 and sqrt(x) D continuity
    knots = np.array([0, 0, 0, 0.2, 0.4, 0.6, 0.8, 1, 1, 1.0])
    sp = SplineSpace(family("singular", k=3), knots)
    i = 4                                            # support [0.2, 0.8]
    supp = knots[3:7]

    def rows(x):
        z = np.sqrt(x)
        return np.array([1.0, z, x * z]), np.array([0.0, 0.5, 1.5 * x])   # value, sqrt(x) * derivative

    A = []
    for j, x in enumerate(supp):
        v, d = rows(x)
        for vec in (v, d):
            row = np.zeros(9)
            if j > 0:
                row[3 * (j - 1):3 * j] = vec
            if j < 3:
                row[3 * j:3 * j + 3] -= vec
            A.append(row)
    null = np.linalg.svd(np.array(A))[2][-1]
    xs = np.linspace(0.21, 0.79, 30)
    piece = np.clip(np.searchsorted(supp, xs, side="right") - 1, 0, 2)
    brute = np.array([rows(x)[0] @ null[3 * p:3 * p + 3] for x, p in zip(xs, piece)])
    ours = bspline_eval(sp, i, xs)
    scale = ours[10] / brute[10]
    assert np.allclose(brute * scale, ours, rtol=1e-10, atol=1e-13)


def test_c_integral_examples():
    knots = np.array([0, 0, 0, 0.2, 0.5, 1, 1, 1.0])
    sp = SplineSpace(family("poly", k=3), knots)
    t = knots
    for i in range(3, 6):
        assert c_integral(sp, i, 1) == pytest.approx(t[i] - t[i - 1])
    for i in range(2, 6):
        assert c_integral(sp, i, 2) == pytest.approx((t[i + 1] - t[i - 1]) / 2)
    sps = SplineSpace(MeasureVector([Singular(), Lebesgue()]), knots)
    # order-1 C-integrals use the last measure of the vector
    sp2 = SplineSpace(MeasureVector([Lebesgue(), Singular()]), knots)
    for i in range(3, 6):
        assert c_integral(sp2, i, 1) == pytest.approx(2 * (np.sqrt(t[i]) - np.sqrt(t[i - 1])), rel=1e-13)
    assert np.all(sps.c_integrals(2) > 0)
    with pytest.raises(ValueError):
        c_integral(sp, 1, 3)
    with pytest.raises(IndexError):
        c_integral(sp, 99, 1)


def test_bspline_eval_errors():
    sp = _space("poly", sub=3)
    with pytest.raises(IndexError):
        bspline_eval(sp, 0, 0.5)
    with pytest.raises(IndexError):
        bspline_eval(sp, sp.n + 1, 0.5)
    with pytest.raises(ValueError):
        bspline_eval(sp, 1, 0.5, order=sp.k + 1)
    with pytest.raises(ValueError):
        sp.eval(np.ones(sp.n), 1.5)


def test_derive_chain_examples():
    sp = _space("singular", sub=6)
    s = derive_chain(SplineFunction(sp, np.full(sp.n, 3.0)))
    assert np.allclose(s.d, 0.0)
    e = np.zeros(sp.n)
    e[-1] = 1.0
    s = derive_chain(SplineFunction(sp, e))
    assert np.count_nonzero(s.d) == 1
    assert s.d[-1] == pytest.approx(1.0 / sp.c_integrals(sp.k - 1)[-1])
    eta = greville_points(sp).eta
    s = derive_chain(SplineFunction(sp, eta))
    x = np.linspace(0.01, 1, 20)
    assert np.allclose(s.L1(x), 1.0, atol=1e-8)
    assert np.allclose(s(x), 2 * np.sqrt(x), atol=1e-12)
    with pytest.raises(ValueError):
        SplineFunction(sp, eta).L1(x)


@pytest.mark.parametrize("name,p", [("poly", None), ("singular", None), ("tension5", 2.0)])
def test_derivative_formula(name, p):
    sp = _space(name, p, sub=5)
    k = sp.k
    m2 = sp.mv.sigma(2)
    C = sp._C[k - 1]
    h = 1e-6
    x = np.array([0.13, 0.37, 0.61, 0.88])
    for i in range(2, sp.n):
        xp = x + h
        q = (bspline_eval(sp, i, xp) - bspline_eval(sp, i, x)) / m2.diff(x, xp)
        fi = i - 1   # 0-based full index
        lo = bspline_eval(sp, i - 1, x, k - 1) / C[fi] if i - 1 >= 1 else 0.0
        hi = bspline_eval(sp, i, x, k - 1) / C[fi + 1] if i <= sp.dim(k - 1) else 0.0
        assert np.allclose(q, lo - hi, atol=1e-4 * (1 + np.abs(q)))


def test_reduced_space_matches_reduced_knots():
    sp = _space("singular", sub=4)
    r = sp.reduced(2)
    assert r.k == 3 and np.array_equal(r.knots, reduced_knots(sp.knots, 2))
    canon = canonical_functions(r.mv)
    x = np.linspace(0, 1, 9)
    assert np.allclose(r.eval(np.ones(r.n), x), canon(1, x))


def test_space_validation():
    mv = family("poly")
    with pytest.raises(ValueError):
        SplineSpace(mv, [0, 0, 0, 0, 1, 1, 1])
    with pytest.raises(ValueError):
        SplineSpace(mv, [0, 0, 0, 0, 0.5, 0.4, 1, 1, 1, 1])
    with pytest.raises(ValueError):
        SplineSpace(mv, [0, 0, 0, 0, 0.5, 0.5, 0.5, 0.5, 0.5, 1, 1, 1, 1])


def test_generic_engine_refuses_wide_tension_intervals():
    from cccbvp.splines import UnstableComputationError
    mv = family("tension5", p=50.0)
    with pytest.raises(UnstableComputationError, match="p\\*h"):
        SplineSpace(mv, build_uniform_partition(0, 1, 4, mv.k).knots)
    SplineSpace(mv, build_uniform_partition(0, 1, 5, mv.k).knots)
