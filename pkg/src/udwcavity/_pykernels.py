"""Pure numpy/scipy kernel backend.

This is the fallback twin of the compiled extension ``_ckernels``.  Both
expose the same flat API (see ``kernels``):

* cylindrical Bessel functions ``j0/j1/jn`` plus vectorized variants,
* exponentially scaled modified Bessel functions ``i0e/k0e``,
* the Gaussian-of-cosh switching integral ``gauss_cosh``:

      gauss_cosh(a, b) = \\int_{-inf}^{inf} exp(-(a + b*cosh(s))^2) ds

The Bessel evaluations delegate to scipy.special (Cephes); the switching
integral is composite Gauss-Legendre on a graded panel layout that tracks
the width of the integrand peak at s = 0.
"""

import math

import numpy as np
import scipy.special as sp

name = "py"

# exp(-x) underflows to exactly 0.0 below -745.13; (a + b)^2 past this
# threshold makes every sample of the integrand an exact zero.
_EXP_UNDERFLOW = 745.0
_SQRT_UNDERFLOW = math.sqrt(_EXP_UNDERFLOW)

# 24-point Gauss-Legendre base rule, mapped onto each panel.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
_GL_X01 = 0.5 * (_GL_X + 1.0)  # nodes on [0, 1]
_GL_W01 = 0.5 * _GL_W


# ---------------------------------------------------------------------------
# Bessel functions
# ---------------------------------------------------------------------------

def j0(x):
    return float(sp.j0(x))


def j1(x):
    return float(sp.j1(x))


def jn(m, x):
    if m < 0:
        raise ValueError(f"order must be >= 0, got {m}")
    if m == 0:
        return float(sp.j0(x))
    if m == 1:
        return float(sp.j1(x))
    return float(sp.jv(m, x))


def j0v(x):
    return sp.j0(x)


def j1v(x):
    return sp.j1(x)


def jnv(m, x):
    if m < 0:
        raise ValueError(f"order must be >= 0, got {m}")
    if m == 0:
        return sp.j0(x)
    if m == 1:
        return sp.j1(x)
    return sp.jv(m, x)


def i0e(x):
    return float(sp.i0e(x))


def k0e(x):
    return float(sp.k0e(x))


def i0ev(x):
    return sp.i0e(x)


def k0ev(x):
    return sp.k0e(x)


# ---------------------------------------------------------------------------
# Switching integral
# ---------------------------------------------------------------------------

def _v_panels(a, b):
    """Graded panel layout for the substituted switching integrand.

    With b*(cosh s - 1) = v**2 the half-line integral becomes

        2 * int_0^inf e^{-((a+b) + v^2)^2} / sqrt(v^2 + 2b) dv,

    whose only sharp features are the algebraic factor (complex
    singularity at v = i*sqrt(2b), so local scale ~ sqrt(v^2 + 2b)) and
    the Gaussian factor (scale ~ 1/sqrt(|a+b|)).  Panels grow with the
    smaller of the two, which bounds the Gauss-Legendre error per panel
    far below the 1e-10 relative target.
    """
    peak = a + b
    # cutoff where (peak + v^2)^2 = peak^2 + 48: an e^-48 relative tail
    v_hi = math.sqrt(48.0 / (peak + math.sqrt(peak * peak + 48.0)))
    gauss_scale = 1.0 / math.sqrt(2.0 * abs(peak) + 2.0)

    edges = [0.0]
    while edges[-1] < v_hi:
        v0 = edges[-1]
        h = min(0.7 * math.sqrt(v0 * v0 + 2.0 * b), 0.5 * gauss_scale)
        edges.append(min(v0 + h, v_hi))
    return np.asarray(edges)


def gauss_cosh(a, b):
    """Integral of exp(-(a + b*cosh s)^2) over the whole real line.

    The integrand is even in s: evaluated on s >= 0 and doubled, after
    the substitution b*(cosh s - 1) = v**2 which removes the Jacobian
    endpoint singularity (see _v_panels).  Returns exactly 0.0 once the
    peak value exp(-(a+b)^2) underflows.
    """
    if (a + b) >= _SQRT_UNDERFLOW:
        return 0.0
    edges = _v_panels(a, b)
    lo = edges[:-1]
    h = np.diff(edges)
    v = (lo[:, None] + h[:, None] * _GL_X01[None, :]).ravel()
    wts = (h[:, None] * _GL_W01[None, :]).ravel()
    vsq = v * v
    z = (a + b) + vsq
    val = np.exp(-np.minimum(z * z, 760.0)) / np.sqrt(vsq + 2.0 * b)
    return 4.0 * float(np.dot(wts, val))


def gauss_cosh_batch(a, bs):
    """Vectorized ``gauss_cosh`` over an array of b values (shared a)."""
    return np.array([gauss_cosh(a, float(b)) for b in bs])
