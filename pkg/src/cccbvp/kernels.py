"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names at the bottom of the module dispatch on
``cccbvp._accel.USE_NUMBA``; both flavours stay importable as
``kernels.jit.<name>`` and ``kernels.vec.<name>`` so tests and the benchmark
can run them side by side.

Band storage convention used throughout: ``ab[i, j - i + lower] = A[i, j]``
for ``-lower <= j - i <= upper``.
"""
from types import SimpleNamespace

import numpy as np
from numpy.polynomial import legendre as npleg

from ._accel import USE_NUMBA, njit


# ---------------------------------------------------------------- numba ----

@njit
def _legendre_rows_jit(coefs, idx, s):
    npts = s.shape[0]
    m = coefs.shape[1]
    g = coefs.shape[2]
    out = np.zeros((npts, m))
    for q in range(npts):
        j = idx[q]
        x = s[q]
        p0 = 1.0
        p1 = x
        for r in range(m):
            out[q, r] = coefs[j, r, 0]
        if g > 1:
            for r in range(m):
                out[q, r] += coefs[j, r, 1] * x
        for ell in range(2, g):
            p2 = ((2 * ell - 1) * x * p1 - (ell - 1) * p0) / ell
            for r in range(m):
                out[q, r] += coefs[j, r, ell] * p2
            p0 = p1
            p1 = p2
    return out


@njit
def _banded_lu_jit(ab, lower, upper):
    n = ab.shape[0]
    rowmax = np.zeros(n)
    for k in range(n):
        for c in range(ab.shape[1]):
            v = abs(ab[k, c])
            if v > rowmax[k]:
                rowmax[k] = v
        if rowmax[k] == 0.0:
            return 0.0
    worst = np.inf
    for k in range(n):
        piv = ab[k, lower]
        ratio = abs(piv) / rowmax[k]
        if ratio < worst:
            worst = ratio
        if piv == 0.0:
            return 0.0
        for i in range(k + 1, min(n, k + lower + 1)):
            ab[i, k - i + lower] /= piv
            lik = ab[i, k - i + lower]
            if lik != 0.0:
                for j in range(k + 1, min(n, k + upper + 1)):
                    ab[i, j - i + lower] -= lik * ab[k, j - k + lower]
    return worst


@njit
def _banded_solve_jit(lu, lower, upper, rhs):
    n = lu.shape[0]
    x = rhs.copy()
    for i in range(n):
        acc = x[i]
        for k in range(max(0, i - lower), i):
            acc -= lu[i, k - i + lower] * x[k]
        x[i] = acc
    for i in range(n - 1, -1, -1):
        acc = x[i]
        for j in range(i + 1, min(n, i + upper + 1)):
            acc -= lu[i, j - i + lower] * x[j]
        x[i] = acc / lu[i, lower]
    return x


@njit
def _banded_solve_t_jit(lu, lower, upper, rhs):
    n = lu.shape[0]
    x = rhs.copy()
    for i in range(n):
        acc = x[i]
        for k in range(max(0, i - upper), i):
            acc -= lu[k, i - k + lower] * x[k]
        x[i] = acc / lu[i, lower]
    for i in range(n - 1, -1, -1):
        acc = x[i]
        for k in range(i + 1, min(n, i + lower + 1)):
            acc -= lu[k, i - k + lower] * x[k]
        x[i] = acc
    return x


@njit
def _exp_scan_jit(decay, loc, reverse):
    n = loc.shape[0]
    out = np.zeros(n + 1)
    if reverse:
        for j in range(n - 1, -1, -1):
            out[j] = decay[j] * out[j + 1] + loc[j]
    else:
        for j in range(n):
            out[j + 1] = decay[j] * out[j] + loc[j]
    return out


@njit
def _cumsum0_jit(x):
    n = x.shape[0]
    out = np.zeros(n + 1)
    acc = 0.0
    err = 0.0
    for j in range(n):
        t = acc + x[j]
        bv = t - acc
        err += (acc - (t - bv)) + (x[j] - bv)
        acc = t
        out[j + 1] = acc + err
    return out


# ---------------------------------------------------------------- numpy ----

def _legendre_rows_vec(coefs, idx, s):
    g = coefs.shape[2]
    vand = npleg.legvander(s, g - 1)
    return np.einsum("pg,prg->pr", vand, coefs[idx])


def _banded_lu_vec(ab, lower, upper):
    n = ab.shape[0]
    rowmax = np.abs(ab).max(axis=1)
    if np.any(rowmax == 0.0):
        return 0.0
    worst = np.inf
    for k in range(n):
        piv = ab[k, lower]
        worst = min(worst, abs(piv) / rowmax[k])
        if piv == 0.0:
            return 0.0
        hi = min(n, k + lower + 1)
        if hi == k + 1:
            continue
        rows = np.arange(k + 1, hi)
        lcol = k - rows + lower
        ab[rows, lcol] /= piv
        jhi = min(n, k + upper + 1)
        if jhi == k + 1:
            continue
        cols = np.arange(k + 1, jhi)
        urow = ab[k, cols - k + lower]
        ab[rows[:, None], cols[None, :] - rows[:, None] + lower] -= (
            ab[rows, lcol][:, None] * urow[None, :]
        )
    return float(worst)


def _banded_solve_vec(lu, lower, upper, rhs):
    n = lu.shape[0]
    x = np.array(rhs, dtype=float)
    for i in range(n):
        k0 = max(0, i - lower)
        if k0 < i:
            x[i] -= lu[i, k0 - i + lower:lower] @ x[k0:i]
    for i in range(n - 1, -1, -1):
        j1 = min(n, i + upper + 1)
        if j1 > i + 1:
            x[i] -= lu[i, lower + 1:lower + 1 + j1 - i - 1] @ x[i + 1:j1]
        x[i] /= lu[i, lower]
    return x


def _banded_solve_t_vec(lu, lower, upper, rhs):
    n = lu.shape[0]
    x = np.array(rhs, dtype=float)
    for i in range(n):
        k0 = max(0, i - upper)
        if k0 < i:
            ks = np.arange(k0, i)
            x[i] -= lu[ks, i - ks + lower] @ x[k0:i]
        x[i] /= lu[i, lower]
    for i in range(n - 1, -1, -1):
        k1 = min(n, i + lower + 1)
        if k1 > i + 1:
            ks = np.arange(i + 1, k1)
            x[i] -= lu[ks, i - ks + lower] @ x[i + 1:k1]
    return x


def _exp_scan_vec(decay, loc, reverse):
    n = loc.shape[0]
    out = np.zeros(n + 1)
    d = decay.tolist()
    v = loc.tolist()
    acc = 0.0
    if reverse:
        for j in range(n - 1, -1, -1):
            acc = d[j] * acc + v[j]
            out[j] = acc
    else:
        for j in range(n):
            acc = d[j] * acc + v[j]
            out[j + 1] = acc
    return out


def _cumsum0_vec(x):
    out = np.zeros(x.shape[0] + 1)
    np.cumsum(x, out=out[1:])
    # exact rounding error of every step (TwoSum), summed and folded back in
    a, s = out[:-1], out[1:]
    bv = s - a
    av = s - bv
    err = (a - av) + (x - bv)
    out[1:] += np.cumsum(err)
    return out


jit = SimpleNamespace(
    legendre_rows=_legendre_rows_jit,
    banded_lu=_banded_lu_jit,
    banded_solve=_banded_solve_jit,
    banded_solve_t=_banded_solve_t_jit,
    exp_scan=_exp_scan_jit,
    cumsum0=_cumsum0_jit,
)

vec = SimpleNamespace(
    legendre_rows=_legendre_rows_vec,
    banded_lu=_banded_lu_vec,
    banded_solve=_banded_solve_vec,
    banded_solve_t=_banded_solve_t_vec,
    exp_scan=_exp_scan_vec,
    cumsum0=_cumsum0_vec,
)

_active = jit if USE_NUMBA else vec
BACKEND = "numba" if USE_NUMBA else "numpy"


def legendre_rows(coefs, idx, s):
    """Evaluate ``coefs[idx[q], r, :]`` as Legendre series at ``s[q]``; shape (len(s), m)."""
    return _active.legendre_rows(
        np.ascontiguousarray(coefs, dtype=float),
        np.ascontiguousarray(idx, dtype=np.int64),
        np.ascontiguousarray(s, dtype=float),
    )


def banded_lu(ab, lower, upper):
    """In-place LU without pivoting. Returns the smallest |pivot| / row-max ratio."""
    return float(_active.banded_lu(ab, int(lower), int(upper)))


def banded_solve(lu, lower, upper, rhs):
    return _active.banded_solve(lu, int(lower), int(upper), np.ascontiguousarray(rhs, dtype=float))


def banded_solve_t(lu, lower, upper, rhs):
    """Solve ``A.T x = rhs`` from the factors of ``A``."""
    return _active.banded_solve_t(lu, int(lower), int(upper), np.ascontiguousarray(rhs, dtype=float))


def exp_scan(decay, loc, reverse=False):
    """Linear recurrence ``P[j+1] = decay[j] P[j] + loc[j]`` (or its mirror), P starting at 0."""
    return _active.exp_scan(
        np.ascontiguousarray(decay, dtype=float), np.ascontiguousarray(loc, dtype=float), bool(reverse)
    )


def cumsum0(x):
    """Compensated prefix sums with a leading zero."""
    return _active.cumsum0(np.ascontiguousarray(x, dtype=float))
