"""Free-space (no-cavity) baseline for the same pair of static detectors.

For two static detectors a distance d apart in Minkowski space the
massless-scalar two-point function along the trajectories is

    W(tau) = -1/(4 pi^2) * 1/((tau - i eps)^2 - d^2),

and the Gaussian-switched response integrals reduce to half-line
quadratures of this distribution.  The i-eps prescription is resolved
by the principal-value + delta decomposition,

    1/((tau - i eps)^2 - d^2) -> PV 1/(tau^2 - d^2)
                                 + (i pi / 2d) delta(tau - d),

and the PV is evaluated *exactly* through the identity
PV int_0^inf dtau / (tau^2 - d^2) = 0: subtracting the windowed
numerator's pole value makes the integrand regular without changing
the integral.  The coincidence-limit (self) kernel uses the d -> 0
limit of the same subtraction, whose delta sector contributes
+pi Omega / 2 to the regulated integral (the d -> 0 limit of the
cross-term sector (pi/2d) e^{-d^2/4 sigma^2} sin(Omega d)).

All quadratures run in detector-scaled variables (a = Omega sigma,
delta = d / sigma), so integrand magnitudes are O(1) and absolute
error thresholds are meaningful.  For a > 3.5 the X entries switch to
the frequency representation of the same response (the tau-form
requires ~a^2 / ln 10 cancelling digits there; the k-form is a
manifestly positive Gaussian tail).  M_AB keeps the tau route at all
frequencies since its Gaussian suppression e^{-a^2} sits in an exact
prefactor.

Independent checks used by the test suite: an epsilon-shifted
quadrature Richardson-extrapolated in eps, the frequency-route
quadrature at moderate a, and two closed forms,

    X_AA  = (lambda^2 / 4 pi) [e^{-a^2} - sqrt(pi) a erfc(a)],
    M_AB  = (lambda^2 e^{-a^2} / 4 pi delta)
            [-dawsn(delta/2) + i (sqrt(pi)/2) e^{-delta^2/4}],

both obtained by closing the k-integrals of the frequency route.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.integrate as si
import scipy.special as ss

from .response import CorrelationSet, DetectorParams
from .series import SumDiagnostics

__all__ = [
    "FreeSpaceParams",
    "QuadratureFailure",
    "FreeBoundaryPoint",
    "free_x_aa",
    "free_x_ab",
    "free_m_ab",
    "free_corrs",
    "closed_x_aa",
    "closed_m_ab",
    "frequency_x_ab",
    "eps_oracle_corrs",
    "free_negativity_boundary",
    "boundary_csv_lines",
    "BOUNDARY_CSV_COLUMNS",
]

# beyond this a = Omega*sigma the tau-route X quadratures lose more
# than half their digits to cancellation against the delta sector
_FREQ_SWITCH_A = 3.5

# quadrature-error ceiling for the O(1) scaled integrals
_ABS_TOL = 1e-9


class QuadratureFailure(RuntimeError):
    """A free-space quadrature did not reach its error target."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class FreeSpaceParams:
    """Static-detector pair in free space: gap, switching width, coupling,
    spatial separation d (equals rho0 of the matched cavity setup)."""

    omega: float
    sigma: float
    d: float
    lam: float = 0.1

    def __post_init__(self):
        if not self.omega >= 0:
            raise ValueError(f"omega must be nonnegative, got {self.omega!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam!r}")
        if not self.d >= 0:
            raise ValueError(f"separation d must be nonnegative, got {self.d!r}")

    @property
    def a(self):
        return self.omega * self.sigma

    @property
    def delta(self):
        return self.d / self.sigma


def _quad(func, lo, hi, points=None, tag=""):
    val, err = si.quad(func, lo, hi, points=points, limit=400,
                       epsabs=1e-13, epsrel=1e-11)
    if err > max(_ABS_TOL, 1e-8 * abs(val)):
        raise QuadratureFailure(
            f"quadrature error {err:.3e} too large for piece {tag!r}",
            {"piece": tag, "value": val, "abserr": err},
        )
    return val, err


def _pv_integral(numerator, pole_value, delta, tag):
    """int_0^inf (numerator(t) - pole_value) / (t^2 - delta^2) dt.

    Equals the PV integral of numerator/(t^2 - delta^2) because the
    subtracted constant integrates to exactly zero on the half line.
    The Gaussian-windowed numerator is cut at T with the constant's
    tail restored in closed form.
    """
    top = max(14.0, delta + 6.0)

    def f(t):
        den = (t - delta) * (t + delta)
        if den == 0.0:
            return 0.0          # removable; never hit by open rules
        return (numerator(t) - pole_value) / den

    pts = [p for p in (delta, 1.0, 4.0) if 0.0 < p < top]
    val, err = _quad(f, 0.0, top, points=sorted(set(pts)), tag=tag)
    if delta > 0.0:
        tail = 0.5 / delta * math.log((top + delta) / (top - delta))
    else:
        tail = 1.0 / top
    return val - pole_value * tail, err


def free_x_aa(p):
    """Local response of either detector (X_AA = X_BB in free space).

    Sign check on the delta sector: d/da of the regulated integral is
    -(pi/2) erf(a), which integrates to J0(a) = -sqrt(pi)/2
    - (pi/2)[a erf(a) + (e^{-a^2} - 1)/sqrt(pi)]; only J0 + pi a/2
    reproduces the closed erfc form.
    """
    if p.a > _FREQ_SWITCH_A:
        return closed_x_aa(p)
    a = p.a
    pv, _ = _pv_integral(lambda t: math.exp(-0.25 * t * t) * math.cos(a * t),
                         1.0, 0.0, "x_aa")
    return -(math.sqrt(math.pi) * p.lam**2 / (2.0 * math.pi**2)) * (
        pv + 0.5 * math.pi * a
    )


def free_x_ab(p):
    """Cross response X_AB of the separated pair."""
    if p.d == 0.0:
        return free_x_aa(p)
    if p.a > _FREQ_SWITCH_A:
        return frequency_x_ab(p)
    a, delta = p.a, p.delta
    g_pole = math.exp(-0.25 * delta * delta) * math.cos(a * delta)
    pv, _ = _pv_integral(lambda t: math.exp(-0.25 * t * t) * math.cos(a * t),
                         g_pole, delta, "x_ab")
    delta_term = (0.5 * math.pi / delta) * math.exp(-0.25 * delta * delta) \
        * math.sin(a * delta)
    return -(math.sqrt(math.pi) * p.lam**2 / (2.0 * math.pi**2)) * (
        pv + delta_term
    )


def free_m_ab(p):
    """Pair coherence M_AB; ultraviolet-divergent at coincidence.

    The delta sector contributes i pi/(2 delta) e^{-delta^2/4}, which
    grows without bound as d -> 0, so co-located detectors are outside
    the domain (mirroring the cavity-side restriction).
    """
    if p.d == 0.0:
        raise ValueError(
            "m_ab requires d > 0 (coincident detectors make the nonlocal "
            "term ultraviolet-divergent)"
        )
    delta = p.delta
    pole = math.exp(-0.25 * delta * delta)
    pv, _ = _pv_integral(lambda t: math.exp(-0.25 * t * t), pole, delta, "m_ab")
    pref = math.sqrt(math.pi) * p.lam**2 * math.exp(-p.a**2) / (4.0 * math.pi**2)
    return pref * complex(pv, 0.5 * math.pi / delta * pole)


def _diag(value, note):
    return SumDiagnostics(
        indices=np.asarray([1]),
        values=np.asarray([value]),
        rel_changes=np.asarray([0.0]),
        terms_used=1,
        converged=True,
        estimate=value,
        mode="quadrature",
        note=note,
    )


def free_corrs(p):
    """All four correlation entries of the free-space pair.

    X_AA = X_BB by symmetry of the static configuration; the set is
    validated against the same positivity and Cauchy-Schwarz
    constraints as the cavity output.
    """
    x_aa = free_x_aa(p)
    x_ab = free_x_ab(p)
    m_ab = free_m_ab(p)
    diags = {
        "x_aa": _diag(x_aa, "free-space pv+delta"),
        "x_bb": _diag(x_aa, "free-space pv+delta (symmetry copy of x_aa)"),
        "x_ab": _diag(x_ab, "free-space pv+delta"),
        "m_ab": _diag(m_ab, "free-space pv+delta"),
    }
    det = DetectorParams(omega=p.omega, sigma=p.sigma, lam=p.lam)
    return CorrelationSet(
        x_aa=x_aa, x_bb=x_aa, x_ab=x_ab, m_ab=m_ab,
        diagnostics=diags, det=det, cav=None, cut=None,
    ).validate()


# ---------------------------------------------------------------------------
# independent routes (oracles for the tests)
# ---------------------------------------------------------------------------

def closed_x_aa(p):
    """X_AA = (lambda^2/4pi) [e^{-a^2} - sqrt(pi) a erfc(a)].

    Frequency route in closed form: (lambda^2/2pi) int_a^inf
    (u - a) e^{-u^2} du; DLMF 7.7.5 for the erfc moment.
    """
    a = p.a
    return p.lam**2 / (4.0 * math.pi) * (
        math.exp(-a * a) - math.sqrt(math.pi) * a * ss.erfc(a)
    )


def closed_m_ab(p):
    """M_AB via the Dawson-function closure of the frequency route."""
    if p.d == 0.0:
        raise ValueError("m_ab requires d > 0")
    a, delta = p.a, p.delta
    pref = p.lam**2 * math.exp(-a * a) / (4.0 * math.pi * delta)
    return pref * complex(
        -ss.dawsn(0.5 * delta),
        0.5 * math.sqrt(math.pi) * math.exp(-0.25 * delta * delta),
    )


def frequency_x_ab(p):
    """Frequency route X_AB = (lambda^2 / 2 pi delta) int_0^inf
    sin(u delta) e^{-(u+a)^2} du, closed via the Faddeeva function:

        int = (sqrt(pi)/2) e^{-a^2} Im w(delta/2 + i a)

    (DLMF 7.2.3, w(z) = e^{-z^2} erfc(-iz)); manifestly positive
    Gaussian damping, so safe arbitrarily deep in the a tail.  The
    d -> 0 limit reproduces the closed X_AA erfc form through
    w'(z) = -2 z w(z) + 2i/sqrt(pi)."""
    if p.d == 0.0:
        return closed_x_aa(p)
    a, delta = p.a, p.delta
    wval = ss.wofz(complex(0.5 * delta, a))
    return (p.lam**2 * math.sqrt(math.pi) * math.exp(-a * a)
            / (4.0 * math.pi * delta)) * wval.imag


def _complex_quad(func, lo, hi, points):
    # the near-pole breakpoints sit within ~eps of each other, which
    # makes QUADPACK emit roundoff chatter even when the returned error
    # meets the target; the explicit threshold below is authoritative
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", si.IntegrationWarning)
        re, re_err = si.quad(lambda t: func(t).real, lo, hi, points=points,
                             limit=800, epsabs=1e-12, epsrel=1e-11)
        im, im_err = si.quad(lambda t: func(t).imag, lo, hi, points=points,
                             limit=800, epsabs=1e-12, epsrel=1e-11)
    err = max(re_err, im_err)
    if err > 1e-8:
        raise QuadratureFailure(
            f"eps-shifted quadrature error {err:.3e} too large",
            {"piece": "eps-oracle", "value": complex(re, im), "abserr": err},
        )
    return complex(re, im), err


def _lagrange_zero(eps, vals):
    """Polynomial extrapolation of vals(eps) to eps = 0."""
    out = 0.0
    for i, (ei, vi) in enumerate(zip(eps, vals)):
        w = 1.0
        for j, ej in enumerate(eps):
            if j != i:
                w *= ej / (ej - ei)
        out += w * vi
    return out


def eps_oracle_corrs(p, eps_over_sigma=(1e-3, 5e-4, 2.5e-4)):
    """(x_aa, x_ab, m_ab) by epsilon-shifted quadrature, Richardson-
    extrapolated to eps -> 0.

    The self term is integrated by parts first (the surface term
    i f(0)/eps is purely imaginary and drops from Re), leaving the
    mild kernel f'(t) / (t - i eps).  The cross kernels use the exact
    partial fractions (1/2 delta)[1/(t - delta - i eps)
    - 1/(t + delta - i eps)] with breakpoints straddling the peak.
    """
    a, delta = p.a, p.delta
    top = max(14.0, delta + 6.0)
    pref_x = -(math.sqrt(math.pi) * p.lam**2 / (2.0 * math.pi**2))
    pref_m = math.sqrt(math.pi) * p.lam**2 * math.exp(-a * a) / (4.0 * math.pi**2)

    aa_vals, ab_vals, m_vals = [], [], []
    for eps in eps_over_sigma:
        def fprime_over_pole(t, eps=eps):
            f = np.exp(-0.25 * t * t) * np.exp(-1j * a * t)
            return f * (-0.5 * t - 1j * a) / (t - 1j * eps)

        pts = sorted({eps, 10 * eps, 100 * eps, 1.0, 4.0})
        val, _ = _complex_quad(fprime_over_pole, 0.0, top, pts)
        aa_vals.append(val.real)

        if delta > 0.0:
            def pair_kernel(t, eps=eps):
                return (1.0 / (t - delta - 1j * eps)
                        - 1.0 / (t + delta - 1j * eps)) / (2.0 * delta)

            pts = sorted({max(delta - 30 * eps, 0.0), max(delta - 3 * eps, 0.0),
                          delta, delta + 3 * eps, delta + 30 * eps, 1.0, 4.0})
            pts = [q for q in pts if 0.0 < q < top]
            val, _ = _complex_quad(
                lambda t: np.exp(-0.25 * t * t) * np.exp(-1j * a * t)
                * pair_kernel(t), 0.0, top, pts)
            ab_vals.append(val.real)
            val, _ = _complex_quad(
                lambda t: np.exp(-0.25 * t * t) * pair_kernel(t),
                0.0, top, pts)
            m_vals.append(val)

    x_aa = pref_x * _lagrange_zero(eps_over_sigma, aa_vals)
    if delta > 0.0:
        x_ab = pref_x * _lagrange_zero(eps_over_sigma, ab_vals)
        m_re = _lagrange_zero(eps_over_sigma, [v.real for v in m_vals])
        m_im = _lagrange_zero(eps_over_sigma, [v.imag for v in m_vals])
        m_ab = pref_m * complex(m_re, m_im)
    else:
        x_ab, m_ab = x_aa, complex(math.nan, math.nan)
    return x_aa, x_ab, m_ab


# ---------------------------------------------------------------------------
# entanglement boundary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreeBoundaryPoint:
    omega_sigma: float
    d_over_sigma: float     # nan when flagged
    flag: str               # "ok" | "all_entangled" | "never_entangled"


def free_negativity_boundary(omega_sigma_grid, d_over_sigma_grid,
                             lam=0.1, tol=1e-6):
    """Zero crossing of the free-space negativity per Omega sigma.

    The perturbative flag |M| - (X_AA + X_BB)/2 = |M| - X_AA changes
    sign where the exact one |M|^2 - X_AA X_BB does (the symmetric
    populations make the two boundaries coincide).  For each Omega
    sigma the d grid is scanned for a bracketing pair and the crossing
    bisected to width tol; grids with no sign change are flagged, not
    extrapolated.
    """
    om = np.asarray(omega_sigma_grid, dtype=float)
    dd = np.asarray(d_over_sigma_grid, dtype=float)
    if om.ndim != 1 or dd.ndim != 1 or len(om) < 1 or len(dd) < 2:
        raise ValueError("need one omega grid and a d grid of length >= 2")
    if np.any(np.diff(om) <= 0) or np.any(np.diff(dd) <= 0):
        raise ValueError("grids must be strictly increasing")
    if np.any(dd <= 0):
        raise ValueError("d grid must be positive (coincidence excluded)")

    points = []
    for a in om:
        x_aa = free_x_aa(FreeSpaceParams(omega=a, sigma=1.0, d=dd[0], lam=lam))

        def gap(d):
            m = free_m_ab(FreeSpaceParams(omega=a, sigma=1.0, d=d, lam=lam))
            return abs(m) - x_aa

        vals = [gap(d) for d in dd]
        bracket = None
        for lo, hi, glo, ghi in zip(dd[:-1], dd[1:], vals[:-1], vals[1:]):
            if glo == 0.0:
                bracket = (lo, lo)
                break
            if glo * ghi < 0.0:
                bracket = (lo, hi)
                break
        if bracket is None:
            flag = "all_entangled" if vals[0] > 0 else "never_entangled"
            points.append(FreeBoundaryPoint(float(a), math.nan, flag))
            continue
        lo, hi = bracket
        glo = gap(lo)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            gm = gap(mid)
            if gm == 0.0:
                lo = hi = mid
                break
            if glo * gm < 0.0:
                hi = mid
            else:
                lo, glo = mid, gm
        points.append(FreeBoundaryPoint(float(a), 0.5 * (lo + hi), "ok"))
    return points


BOUNDARY_CSV_COLUMNS = ("omega_sigma", "d_over_sigma_boundary", "flag")


def boundary_csv_lines(points):
    """CSV lines (header first) for a boundary curve, %.17g, NaN spelled nan."""
    lines = [",".join(BOUNDARY_CSV_COLUMNS)]
    for pt in points:
        lines.append(
            f"{pt.omega_sigma:.17g},{pt.d_over_sigma:.17g},{pt.flag}"
        )
    return lines
