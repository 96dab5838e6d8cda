# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend (Cython twin of ``_pykernels``).

Exposes the same flat API as the pure numpy/scipy fallback:

* cylindrical Bessel functions ``j0/j1/jn`` plus vectorized variants,
* exponentially scaled modified Bessel functions ``i0e/k0e``,
* the Gaussian-of-cosh switching integral ``gauss_cosh``.

Everything is implemented locally against libm -- power series at small
argument, Hankel/uniform asymptotics at large argument (DLMF 10.17.3,
10.40.1), the periodic-trapezoid Bessel integral in the intermediate
band (the midpoint rule on (1/pi) int_0^pi cos(m t - x sin t) dt is
exponentially accurate; its aliasing error is a Bessel function of
order ~ 2N, see DLMF 10.9.2), Miller's downward recurrence for higher
orders (Numerical Recipes sec. 6.5), and graded Gauss-Legendre panels
for the switching integral using the identical node layout as the pure
backend.  Agreement between the two backends is enforced by the
cross-backend test suite.
"""

import numpy as np

from libc.math cimport M_PI, NAN, cos, exp, fabs, fmin, log, sin, sqrt

name = "c"

# exp(-x) underflows to exactly 0.0 below -745.13; (a + b)^2 past this
# threshold makes every sample of the switching integrand an exact zero.
cdef double _EXP_UNDERFLOW = 745.0
cdef double _SQRT_UNDERFLOW = sqrt(745.0)
cdef double _EULER_GAMMA = 0.5772156649015328606065120900824024

cdef double _INF = float("inf")

# Gauss-Legendre tables, filled once at import: the 24-point rule on
# [0, 1] for the switching-integral panels (identical nodes to the pure
# backend, which calls the same numpy routine), and a 48-point rule on
# [0, 6] for the K0 half-line quadrature.
cdef double GL_X[24]
cdef double GL_W[24]
cdef double K0_U[48]
cdef double K0_W[48]


def _fill_tables():
    gx, gw = np.polynomial.legendre.leggauss(24)
    for i in range(24):
        GL_X[i] = 0.5 * (gx[i] + 1.0)
        GL_W[i] = 0.5 * gw[i]
    kx, kw = np.polynomial.legendre.leggauss(48)
    for i in range(48):
        K0_U[i] = 3.0 * (kx[i] + 1.0)
        K0_W[i] = 3.0 * kw[i]


_fill_tables()


# ---------------------------------------------------------------------------
# Bessel J0 / J1
# ---------------------------------------------------------------------------

cdef double _j0_series(double x) noexcept nogil:
    # sum_k (-1)^k (x^2/4)^k / (k!)^2; cancellation stays mild for x <= 5
    cdef double y = 0.25 * x * x
    cdef double term = 1.0
    cdef double acc = 1.0
    cdef int k
    for k in range(1, 64):
        term *= -y / (<double>k * k)
        acc += term
        if fabs(term) <= 1e-17 * fabs(acc) + 1e-300:
            break
    return acc


cdef double _j1_series(double x) noexcept nogil:
    # (x/2) sum_k (-1)^k (x^2/4)^k / (k! (k+1)!)
    cdef double y = 0.25 * x * x
    cdef double term = 1.0
    cdef double acc = 1.0
    cdef int k
    for k in range(1, 64):
        term *= -y / (<double>k * (k + 1.0))
        acc += term
        if fabs(term) <= 1e-17 * fabs(acc) + 1e-300:
            break
    return 0.5 * x * acc


cdef double _j_mid(int m, double x) noexcept nogil:
    # midpoint rule on (1/pi) int_0^pi cos(m t - x sin t) dt; with 32
    # nodes the aliasing error is O(J_{64-m}(x)) ~ 1e-30 for x < 16
    cdef int N = 32
    cdef double acc = 0.0
    cdef double th
    cdef int j
    for j in range(N):
        th = M_PI * (j + 0.5) / N
        acc += cos(m * th - x * sin(th))
    return acc / N


cdef double _j_asym(int nu, double x) noexcept nogil:
    # Hankel expansion, DLMF 10.17.3, truncated at its smallest term.
    # a_k(nu) = prod_{j<=k} (4 nu^2 - (2j-1)^2) / (k! 8^k)
    cdef double mu = 4.0 * nu * nu
    cdef double omega = x - (0.5 * nu + 0.25) * M_PI
    cdef double p = 1.0
    cdef double q = 0.0
    cdef double ak = 1.0
    cdef double xk = 1.0
    cdef double prev = _INF
    cdef double t
    cdef int k, j
    for k in range(1, 64):
        ak *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k)
        xk *= x
        t = ak / xk
        if fabs(t) >= prev:
            break                      # asymptotic tail started diverging
        prev = fabs(t)
        if k & 1:
            j = (k - 1) >> 1
            q += -t if (j & 1) else t
        else:
            j = k >> 1
            p += -t if (j & 1) else t
        if fabs(t) < 1e-18:
            break
    return sqrt(2.0 / (M_PI * x)) * (cos(omega) * p - sin(omega) * q)


cdef double _j0(double x) noexcept nogil:
    cdef double ax = fabs(x)
    if ax <= 5.0:
        return _j0_series(ax)
    if ax < 16.0:
        return _j_mid(0, ax)
    return _j_asym(0, ax)


cdef double _j1(double x) noexcept nogil:
    cdef double ax = fabs(x)
    cdef double v
    if ax <= 5.0:
        v = _j1_series(ax)
    elif ax < 16.0:
        v = _j_mid(1, ax)
    else:
        v = _j_asym(1, ax)
    return -v if x < 0.0 else v


cdef double _jn(int m, double x) noexcept nogil:
    cdef double ax = fabs(x)
    cdef double sign = 1.0
    cdef double bjm, bj, bjp, norm, ans
    cdef int k, idx, mstart
    if m == 0:
        return _j0(x)
    if x < 0.0 and (m & 1):
        sign = -1.0
    if m == 1:
        return sign * _j1(ax)
    if ax == 0.0:
        return 0.0
    if m < ax:
        # forward recurrence, stable below the turning point m ~ x
        bjm = _j0(ax)
        bj = _j1(ax)
        for k in range(1, m):
            bjp = (2.0 * k / ax) * bj - bjm
            bjm = bj
            bj = bjp
        return sign * bj
    # Miller's downward recurrence with the J0 + 2 J2 + 2 J4 + ... = 1
    # normalization (Numerical Recipes sec. 6.5)
    mstart = m + <int>sqrt(40.0 * m) + 16
    if mstart & 1:
        mstart += 1
    bjp = 0.0
    bj = 1e-30
    norm = 0.0
    ans = 0.0
    for k in range(mstart, 0, -1):
        bjm = (2.0 * k / ax) * bj - bjp
        bjp = bj
        bj = bjm
        if fabs(bj) > 1e10:
            bj *= 1e-10
            bjp *= 1e-10
            norm *= 1e-10
            ans *= 1e-10
        idx = k - 1
        if idx > 0 and not (idx & 1):
            norm += 2.0 * bj
        if idx == m:
            ans = bj
    norm += bj                         # the k = 0 term
    return sign * ans / norm


# ---------------------------------------------------------------------------
# modified Bessel I0, K0 (exponentially scaled)
# ---------------------------------------------------------------------------

cdef double _i0_series(double y) noexcept nogil:
    # I0 power series in y = x^2/4; all terms positive (perfectly
    # conditioned), used up to x = 18
    cdef double term = 1.0
    cdef double acc = 1.0
    cdef int k
    for k in range(1, 90):
        term *= y / (<double>k * k)
        acc += term
        if term <= 1e-17 * acc:
            break
    return acc


cdef double _i0e(double x) noexcept nogil:
    cdef double ax = fabs(x)
    cdef double t, acc, prev
    cdef int k
    if ax <= 18.0:
        return exp(-ax) * _i0_series(0.25 * ax * ax)
    # i0e ~ (2 pi x)^{-1/2} sum_k a_k / x^k, a_k = ((2k-1)!!)^2/(k! 8^k)
    # (DLMF 10.40.1); truncated at the smallest term, < 1e-15 for x > 18
    t = 1.0
    acc = 1.0
    prev = _INF
    for k in range(1, 64):
        t *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * ax)
        if t >= prev:
            break
        prev = t
        acc += t
        if t <= 1e-17 * acc:
            break
    return acc / sqrt(2.0 * M_PI * ax)


cdef double _k0e(double x) noexcept nogil:
    cdef double y, term, harm, st, k0, acc, u
    cdef int k, i
    if x < 0.0:
        return NAN
    if x == 0.0:
        return _INF
    if x <= 2.0:
        # K0 = -(log(x/2) + gamma) I0(x) + sum_{k>=1} H_k y^k/(k!)^2,
        # y = x^2/4, H_k the harmonic numbers (DLMF 10.31.2)
        y = 0.25 * x * x
        term = 1.0
        harm = 0.0
        st = 0.0
        for k in range(1, 40):
            term *= y / (<double>k * k)
            harm += 1.0 / k
            st += term * harm
            if term * harm <= 1e-17 * st + 1e-300:
                break
        k0 = -(log(0.5 * x) + _EULER_GAMMA) * _i0_series(y) + st
        return exp(x) * k0
    if x >= 50.0:
        # alternating asymptotic sum, k0e ~ sqrt(pi/2x) sum (-1)^k
        # a_k/x^k (DLMF 10.40.2); optimal-truncation error ~ e^{-2x}
        term = 1.0
        acc = 1.0
        for k in range(1, 24):
            term *= -(2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x)
            acc += term
            if fabs(term) <= 1e-17 * acc:
                break
        return acc * sqrt(0.5 * M_PI / x)
    # x(cosh t - 1) = u^2 turns e^x K0 into 2 int_0^inf e^{-u^2}
    # / sqrt(u^2 + 2x) du: entire Gaussian integrand, nearest pole at
    # u = i sqrt(2x), so a 48-point rule on [0, 6] is exact to spare
    acc = 0.0
    for i in range(48):
        u = K0_U[i]
        acc += K0_W[i] * exp(-u * u) / sqrt(u * u + 2.0 * x)
    return 2.0 * acc


# ---------------------------------------------------------------------------
# switching integral
# ---------------------------------------------------------------------------

cdef double _gauss_cosh(double a, double b) noexcept nogil:
    # same graded-panel layout as the pure backend (_pykernels._v_panels):
    # after b(cosh s - 1) = v^2 the half-line integral is
    # 2 int_0^vhi e^{-((a+b)+v^2)^2} / sqrt(v^2 + 2b) dv, panels growing
    # with min(local algebraic scale, Gaussian scale)
    cdef double peak = a + b
    cdef double v_hi, gauss_scale, acc, v0, v1, h, hh, v, vsq, z, zz
    cdef int i
    if peak >= _SQRT_UNDERFLOW:
        return 0.0
    v_hi = sqrt(48.0 / (peak + sqrt(peak * peak + 48.0)))
    gauss_scale = 1.0 / sqrt(2.0 * fabs(peak) + 2.0)
    acc = 0.0
    v0 = 0.0
    while v0 < v_hi:
        h = fmin(0.7 * sqrt(v0 * v0 + 2.0 * b), 0.5 * gauss_scale)
        v1 = fmin(v0 + h, v_hi)
        hh = v1 - v0
        for i in range(24):
            v = v0 + hh * GL_X[i]
            vsq = v * v
            z = peak + vsq
            zz = z * z
            if zz > 760.0:
                zz = 760.0
            acc += hh * GL_W[i] * exp(-zz) / sqrt(vsq + 2.0 * b)
        v0 = v1
    return 4.0 * acc


# ---------------------------------------------------------------------------
# Python-facing API (same surface as _pykernels)
# ---------------------------------------------------------------------------

def j0(double x):
    return _j0(x)


def j1(double x):
    return _j1(x)


def jn(int m, double x):
    if m < 0:
        raise ValueError(f"order must be >= 0, got {m}")
    return _jn(m, x)


def i0e(double x):
    return _i0e(x)


def k0e(double x):
    return _k0e(x)


def gauss_cosh(double a, double b):
    """Integral of exp(-(a + b*cosh s)^2) over the whole real line.

    Identical algorithm and panel layout as the pure backend; returns
    exactly 0.0 once the peak value exp(-(a+b)^2) underflows.
    """
    return _gauss_cosh(a, b)


cdef _vectorize1(fn, x):
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    out = np.empty_like(arr)
    cdef const double[::1] a = arr.ravel()
    cdef double[::1] o = out.ravel()
    cdef Py_ssize_t i, n = a.shape[0]
    cdef int which = fn
    with nogil:
        for i in range(n):
            if which == 0:
                o[i] = _j0(a[i])
            elif which == 1:
                o[i] = _j1(a[i])
            elif which == 2:
                o[i] = _i0e(a[i])
            else:
                o[i] = _k0e(a[i])
    if out.ndim == 0:
        return out[()]
    return out


def j0v(x):
    return _vectorize1(0, x)


def j1v(x):
    return _vectorize1(1, x)


def i0ev(x):
    return _vectorize1(2, x)


def k0ev(x):
    return _vectorize1(3, x)


def jnv(int m, x):
    if m < 0:
        raise ValueError(f"order must be >= 0, got {m}")
    if m == 0:
        return j0v(x)
    if m == 1:
        return j1v(x)
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    out = np.empty_like(arr)
    cdef const double[::1] a = arr.ravel()
    cdef double[::1] o = out.ravel()
    cdef Py_ssize_t i, n = a.shape[0]
    cdef int mm = m
    with nogil:
        for i in range(n):
            o[i] = _jn(mm, a[i])
    if out.ndim == 0:
        return out[()]
    return out


def gauss_cosh_batch(double a, bs):
    """Vectorized ``gauss_cosh`` over an array of b values (shared a)."""
    arr = np.ascontiguousarray(np.asarray(bs, dtype=np.float64))
    out = np.empty_like(arr)
    cdef const double[::1] bv = arr.ravel()
    cdef double[::1] o = out.ravel()
    cdef Py_ssize_t i, n = bv.shape[0]
    with nogil:
        for i in range(n):
            o[i] = _gauss_cosh(a, bv[i])
    return out
