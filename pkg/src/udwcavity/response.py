"""Response-matrix entries for two static detectors in a cylindrical cavity.

Closed mode-sum forms for the local terms X_AA, X_BB, the correlation
term X_AB, and the nonlocal term M_AB, for Gaussian switching of width
sigma, detector A on the cavity axis and detector B at radial offset
rho0 inside a Dirichlet cylinder of radius R.  Every X-type term is

    (lambda^2 sigma^2 / 2 pi R^2) * sum  J.J/J'^2 * G(sigma*Omega, sigma*xi/R)

with G the cosh-Gaussian switching integral, and the M-type term trades
G for the scaled modified-Bessel combination (-K0 + i pi I0) evaluated
at x_n = (xi_0n sigma / R)^2 / 2.

A brute-force oracle path (time-domain quadrature against the truncated
Hankel-function Wightman sum) lives alongside for end-to-end checks at
matched mode truncation; it shares nothing with the closed forms except
the zero table.
"""

import math
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate as si
import scipy.special as ss

from . import kernels
from .series import (
    NotConverged,
    SumConfig,
    SumDiagnostics,
    partial_sum_trace,
    sum_absolute,
    sum_oscillatory,
)
from .specfun import bessel_zeros

__all__ = [
    "DetectorParams",
    "CavityConfig",
    "ModeCutoffs",
    "CorrelationSet",
    "x_aa",
    "x_bb",
    "x_ab",
    "m_ab",
    "correlations",
    "x_aa_truncated",
    "x_bb_truncated",
    "x_ab_truncated",
    "m_ab_truncated",
    "m_ab_trace",
    "wightman_cavity",
    "oracle_x",
    "oracle_m",
    "PERTURBATIVITY_THRESHOLD",
]

# Eq.-(15)-style reduced state is an O(lambda^2) truncation; warn when
# the excitation probabilities leave the perturbative regime.
PERTURBATIVITY_THRESHOLD = 0.1


@dataclass(frozen=True)
class DetectorParams:
    """Shared parameters of the two identical detectors.

    omega: energy gap (inverse length, c = hbar = 1); sigma: Gaussian
    switching width (length); lam: dimensionless coupling.
    """

    omega: float
    sigma: float
    lam: float = 0.1

    def __post_init__(self):
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam!r}")


@dataclass(frozen=True)
class CavityConfig:
    """Cavity radius and the radial position of detector B.

    Detector A sits on the axis (rho = 0).  rho0 = radius is admitted so
    the Dirichlet-wall limits can be evaluated; sweep-level validation
    keeps production grids strictly inside the cavity.
    """

    radius: float
    rho0: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius!r}")
        if not 0 <= self.rho0 <= self.radius:
            raise ValueError(
                f"need 0 <= rho0 <= radius, got rho0={self.rho0!r}, "
                f"radius={self.radius!r}"
            )

    @property
    def eta(self):
        return self.rho0 / self.radius


@dataclass(frozen=True)
class ModeCutoffs:
    """Truncation caps and the target relative tolerance of the sums."""

    n_max_x: int = 2000
    m_max: int = 30
    n_max_m: int = 200000
    tol: float = 1e-3

    def __post_init__(self):
        if min(self.n_max_x, self.n_max_m) < 1 or self.m_max < 0:
            raise ValueError("radial cutoffs must be >= 1 and m_max >= 0")
        if not 0 < self.tol < 1:
            raise ValueError(f"tol must be in (0, 1), got {self.tol!r}")


@dataclass
class CorrelationSet:
    """The four second-order response entries plus their diagnostics."""

    x_aa: float
    x_bb: float
    x_ab: float
    m_ab: complex
    diagnostics: dict = field(default_factory=dict)
    det: DetectorParams = None
    cav: CavityConfig = None
    cut: ModeCutoffs = None

    def validate(self):
        if self.x_aa < 0 or self.x_bb < 0:
            raise ValueError(
                f"excitation probabilities must be nonnegative: "
                f"x_aa={self.x_aa!r}, x_bb={self.x_bb!r}"
            )
        if abs(self.x_ab) ** 2 > self.x_aa * self.x_bb + 1e-12:
            raise ValueError(
                f"Cauchy-Schwarz violated: |x_ab|^2={abs(self.x_ab) ** 2:.6e} "
                f"> x_aa*x_bb={self.x_aa * self.x_bb:.6e}"
            )
        return self

    @property
    def converged_flags(self):
        """Convergence bits in x_aa, x_bb, x_ab, m_ab order (e.g. '1111')."""
        bits = []
        for key in ("x_aa", "x_bb", "x_ab", "m_ab"):
            d = self.diagnostics.get(key)
            bits.append("1" if (d is not None and d.converged) else "0")
        return "".join(bits)

    @property
    def all_converged(self):
        return self.converged_flags == "1111"

    def provenance(self):
        """Parameters, cutoffs, convergence flags and terms used, as a dict."""
        from . import __version__

        out = {
            "version": __version__,
            "values": {
                "x_aa": self.x_aa,
                "x_bb": self.x_bb,
                "x_ab": self.x_ab,
                "m_ab_re": complex(self.m_ab).real,
                "m_ab_im": complex(self.m_ab).imag,
            },
            "converged": {
                k: bool(d.converged) for k, d in sorted(self.diagnostics.items())
            },
            "terms_used": {
                k: int(d.terms_used) for k, d in sorted(self.diagnostics.items())
            },
        }
        if self.det is not None:
            out["parameters"] = {
                "omega": self.det.omega,
                "sigma": self.det.sigma,
                "lambda": self.det.lam,
            }
        if self.cav is not None:
            out.setdefault("parameters", {}).update(
                radius=self.cav.radius, rho0=self.cav.rho0
            )
        if self.cut is not None:
            out["cutoffs"] = {
                "n_max_x": self.cut.n_max_x,
                "m_max": self.cut.m_max,
                "n_max_m": self.cut.n_max_m,
                "tol": self.cut.tol,
            }
        return out


# ---------------------------------------------------------------------------
# cached per-mode factors
# ---------------------------------------------------------------------------

_cache_lock = threading.Lock()
_denom_cache = {}    # (m, n_max) -> (zeros xi_mn, J_{m+1}(xi_mn)^2)
_mfac_cache = {}     # (sigma_over_R, n_max) -> complex (-e^-2x k0e + i pi i0e)


def _mode_denominators(m, n_max):
    key = (m, n_max)
    hit = _denom_cache.get(key)
    if hit is not None:
        return hit
    zeros = bessel_zeros(m, n_max)
    with _cache_lock:
        hit = _denom_cache.get(key)
        if hit is None:
            jnext = kernels.jnv(m + 1, zeros)
            jsq = jnext * jnext
            jsq.flags.writeable = False
            hit = (zeros, jsq)
            _denom_cache[key] = hit
    return hit


def _m_factors(sigma_over_R, n_max):
    """Vector of (-K0 + i pi I0)(x_n) e^{-x_n}, overflow-safe scaled form."""
    key = (sigma_over_R, n_max)
    hit = _mfac_cache.get(key)
    if hit is not None:
        return hit
    zeros, _ = _mode_denominators(0, n_max)
    with _cache_lock:
        hit = _mfac_cache.get(key)
        if hit is None:
            x = 0.5 * (sigma_over_R * zeros) ** 2
            # e^-x (-K0 + i pi I0) = -e^-2x k0e + i pi i0e
            hit = -np.exp(-2.0 * x) * kernels.k0ev(x) + 1j * math.pi * kernels.i0ev(x)
            hit.flags.writeable = False
            _mfac_cache[key] = hit
    return hit


def _x_prefactor(det, cav):
    return det.lam * det.lam * det.sigma * det.sigma / (
        2.0 * math.pi * cav.radius * cav.radius
    )


def _j0_at_eta(zeros, eta):
    """J_0(xi_0n eta), exact at the Dirichlet wall.

    At eta = 1 the mode functions vanish identically (that is what
    defines xi_0n), so the factor is pinned to 0.0 instead of the
    ~1e-16 residual of evaluating J_0 at a rounded zero.
    """
    if eta == 1.0:
        return np.zeros(len(zeros))
    return kernels.j0v(zeros * eta)


# ---------------------------------------------------------------------------
# closed-form series
# ---------------------------------------------------------------------------

def x_aa(det, cav, cut=None):
    """Local response of the on-axis detector; independent of rho0."""
    cut = cut or ModeCutoffs()
    a = det.omega * det.sigma
    sr = det.sigma / cav.radius
    zeros, j1sq = _mode_denominators(0, cut.n_max_x)
    pref = _x_prefactor(det, cav)

    def term(k):
        g = kernels.gauss_cosh(a, sr * zeros[k - 1])
        return pref * g / j1sq[k - 1]

    cfg = SumConfig(tol=cut.tol, n_max=cut.n_max_x, mode="absolute")
    val, diag = sum_absolute(term, cfg)
    return float(val), diag


def x_bb(det, cav, cut=None):
    """Local response of the offset detector: folded double mode sum.

    Azimuthal orders are folded to m >= 0 with weight (2 - delta_m0);
    each m-slice is an absolutely convergent n-series, and the outer
    m-sum stops once a slice contributes less than tol of the running
    total.  The returned diagnostics describe the outer sum (indices are
    m + 1), with terms_used counting every inner term evaluated.
    """
    cut = cut or ModeCutoffs()
    a = det.omega * det.sigma
    sr = det.sigma / cav.radius
    eta = cav.eta
    pref = _x_prefactor(det, cav)
    cfg = SumConfig(tol=cut.tol, n_max=cut.n_max_x, mode="absolute")

    total = 0.0
    comp = 0.0
    slice_vals = []
    rels = []
    inner_terms = 0
    stopped = False
    for m in range(cut.m_max + 1):
        zeros, jsq = _mode_denominators(m, cut.n_max_x)
        jfac = kernels.jnv(m, zeros * eta)
        weight = 1.0 if m == 0 else 2.0
        num = weight * jfac * jfac

        def term(k):
            g = kernels.gauss_cosh(a, sr * zeros[k - 1])
            return pref * num[k - 1] * g / jsq[k - 1]

        sl, d = sum_absolute(term, cfg)
        inner_terms += d.terms_used
        y = sl - comp
        t = total + y
        comp = (t - total) - y
        total = t
        slice_vals.append(total)
        rels.append(sl / total if total != 0.0 else 0.0)
        if m >= 1 and sl < cut.tol * total:
            stopped = True
            break
    diag = SumDiagnostics(
        indices=np.arange(1, len(slice_vals) + 1),
        values=np.asarray(slice_vals, dtype=complex),
        rel_changes=np.asarray(rels),
        terms_used=inner_terms,
        converged=stopped,
        estimate=total,
        mode="absolute",
        note="outer m-fold",
    )
    if not stopped:
        raise NotConverged(
            f"x_bb outer m-sum still contributing at m_max={cut.m_max}", diag
        )
    return float(total), diag


def x_ab(det, cav, cut=None):
    """Correlation term: m = 0 series carrying J_0(xi_0n rho0/R)."""
    cut = cut or ModeCutoffs()
    a = det.omega * det.sigma
    sr = det.sigma / cav.radius
    zeros, j1sq = _mode_denominators(0, cut.n_max_x)
    j0fac = _j0_at_eta(zeros, cav.eta)
    pref = _x_prefactor(det, cav)

    def term(k):
        g = kernels.gauss_cosh(a, sr * zeros[k - 1])
        return pref * j0fac[k - 1] * g / j1sq[k - 1]

    cfg = SumConfig(tol=cut.tol, n_max=cut.n_max_x, mode="absolute")
    val, diag = sum_absolute(term, cfg)
    return float(val), diag


def _m_ab_terms(det, cav, n_max):
    """Vector of M-series terms (the n-th term at index n-1)."""
    sr = det.sigma / cav.radius
    zeros, j1sq = _mode_denominators(0, n_max)
    mfac = _m_factors(sr, n_max)
    pref = (
        det.lam * det.lam * det.sigma * det.sigma
        / (4.0 * math.pi * cav.radius * cav.radius)
        * math.exp(-((det.omega * det.sigma) ** 2))
    )
    j0fac = _j0_at_eta(zeros, cav.eta)
    return pref * j0fac / j1sq * mfac


def m_ab(det, cav, cut=None):
    """Nonlocal term: conditionally convergent oscillatory m = 0 series.

    Requires rho0 > 0: at coincidence the series (like the underlying
    Gaussian-windowed integral of 1/tau^2) diverges, and its monotone
    partial sums would defeat the oscillation-envelope estimator.  The
    sign pattern of J_0(xi_0n rho0/R) flips roughly every R/(pi rho0)
    terms, so eta below ~20/n_max_m never completes enough oscillation
    periods inside the cap to be trusted either; production grids stay
    far from that corner.
    """
    cut = cut or ModeCutoffs()
    if cav.rho0 == 0:
        raise ValueError(
            "m_ab requires rho0 > 0 (coincident detectors make the "
            "nonlocal term ultraviolet-divergent)"
        )
    terms = _m_ab_terms(det, cav, cut.n_max_m)
    cfg = SumConfig(tol=cut.tol, n_max=cut.n_max_m, mode="oscillatory")
    val, diag = sum_oscillatory(lambda k: terms[k - 1], cfg)
    return complex(val), diag


def m_ab_trace(det, cav, n_points, spacing="log", n_max=None, cut=None):
    """Partial-sum trace of the M series (for convergence-figure output)."""
    cut = cut or ModeCutoffs()
    n_max = n_max or cut.n_max_m
    terms = _m_ab_terms(det, cav, n_max)
    return partial_sum_trace(
        lambda k: terms[k - 1], n_points, spacing=spacing, n_max=n_max
    )


def correlations(det, cav, cut=None):
    """All four response entries as a validated CorrelationSet.

    Emits a UserWarning when x_aa + x_bb exceeds the perturbativity
    threshold (the O(lambda^2) state stops being trustworthy there).
    """
    cut = cut or ModeCutoffs()
    vaa, daa = x_aa(det, cav, cut)
    vbb, dbb = x_bb(det, cav, cut)
    vab, dab = x_ab(det, cav, cut)
    vm, dm = m_ab(det, cav, cut)
    cs = CorrelationSet(
        x_aa=vaa,
        x_bb=vbb,
        x_ab=vab,
        m_ab=vm,
        diagnostics={"x_aa": daa, "x_bb": dbb, "x_ab": dab, "m_ab": dm},
        det=det,
        cav=cav,
        cut=cut,
    )
    cs.validate()
    if vaa + vbb > PERTURBATIVITY_THRESHOLD:
        warnings.warn(
            f"x_aa + x_bb = {vaa + vbb:.3g} exceeds the perturbative regime "
            f"(> {PERTURBATIVITY_THRESHOLD})",
            stacklevel=2,
        )
    return cs


# ---------------------------------------------------------------------------
# fixed-truncation variants (for matched-mode oracle comparisons)
# ---------------------------------------------------------------------------

def x_aa_truncated(det, cav, n_modes):
    """Plain sum of the first n_modes X_AA terms (no stopping rule)."""
    a = det.omega * det.sigma
    sr = det.sigma / cav.radius
    zeros, j1sq = _mode_denominators(0, n_modes)
    pref = _x_prefactor(det, cav)
    g = kernels.gauss_cosh_batch(a, sr * zeros)
    return float(math.fsum(pref * g / j1sq))


def x_bb_truncated(det, cav, n_modes, m_max=10):
    a = det.omega * det.sigma
    sr = det.sigma / cav.radius
    eta = cav.eta
    pref = _x_prefactor(det, cav)
    parts = []
    for m in range(m_max + 1):
        zeros, jsq = _mode_denominators(m, n_modes)
        jfac = kernels.jnv(m, zeros * eta)
        weight = 1.0 if m == 0 else 2.0
        g = kernels.gauss_cosh_batch(a, sr * zeros)
        parts.extend((pref * weight * jfac * jfac * g / jsq).tolist())
    return float(math.fsum(parts))


def x_ab_truncated(det, cav, n_modes):
    a = det.omega * det.sigma
    sr = det.sigma / cav.radius
    zeros, j1sq = _mode_denominators(0, n_modes)
    j0fac = _j0_at_eta(zeros, cav.eta)
    pref = _x_prefactor(det, cav)
    g = kernels.gauss_cosh_batch(a, sr * zeros)
    return float(math.fsum(pref * j0fac * g / j1sq))


def m_ab_truncated(det, cav, n_modes):
    terms = _m_ab_terms(det, cav, n_modes)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


# ---------------------------------------------------------------------------
# brute-force oracle path (time-domain quadrature; scipy special/quad)
# ---------------------------------------------------------------------------

def wightman_cavity(tau_minus, rho_i, rho_j, cav, cut=None):
    """Truncated mode-sum Wightman function W(tau_minus; rho_i, rho_j).

    Hankel-function form: for tau > 0 the n-th m-sector term carries
    H_0^(2)(xi tau / R), for tau < 0 its conjugate H_0^(1); the overall
    factor is -i/(4 pi R^2) with the (2 - delta_m0) azimuthal fold.
    Oracle-path only — the production series never touch this.
    """
    if tau_minus == 0:
        raise ValueError("tau_minus = 0 sits on the lightlike singularity")
    cut = cut or ModeCutoffs()
    if rho_i < 0 or rho_j < 0 or rho_i > cav.radius or rho_j > cav.radius:
        raise ValueError("detector radii must lie inside the cavity")
    r = cav.radius
    m_top = cut.m_max if (rho_i > 0 and rho_j > 0) else 0
    at = abs(tau_minus)
    acc = 0.0 + 0.0j
    for m in range(m_top + 1):
        zeros = bessel_zeros(m, cut.n_max_x)
        jnext = ss.jv(m + 1, zeros)
        num = ss.jv(m, zeros * rho_i / r) * ss.jv(m, zeros * rho_j / r)
        weight = 1.0 if m == 0 else 2.0
        z = zeros * at / r
        h2 = ss.j0(z) - 1j * ss.y0(z)
        acc += weight * np.sum(num / (jnext * jnext) * h2)
    w = -1j / (4.0 * math.pi * r * r) * acc
    return w if tau_minus > 0 else np.conj(w)


def _label_rho(label, cav):
    key = str(label).strip().lower()
    if key == "a":
        return 0.0
    if key == "b":
        return cav.rho0
    raise ValueError(f"detector label must be 'A' or 'B', got {label!r}")


def oracle_x(i, j, det, cav, n_modes=200, m_max=10, window_sigmas=10.0):
    """Brute-force X_ij: Gaussian-windowed quadrature of the Wightman sum.

    X_ij = sqrt(pi) sigma lambda^2 Int dtau e^{-tau^2/4 sigma^2}
           e^{-i Omega tau} W_ij(tau), folded onto tau >= 0 (the
    integrand's negative-tau half is the conjugate), so X = 2 Re of the
    half-line integral.  Matched-truncation ground truth for the closed
    forms; n_modes should stay small (<= 500).
    """
    rho_i = _label_rho(i, cav)
    rho_j = _label_rho(j, cav)
    cut = ModeCutoffs(n_max_x=n_modes, m_max=m_max)
    s, om, lam = det.sigma, det.omega, det.lam

    def integrand(tau):
        w = wightman_cavity(tau, rho_i, rho_j, cav, cut)
        phase = complex(math.cos(om * tau), -math.sin(om * tau))
        return math.exp(-(tau * tau) / (4.0 * s * s)) * (phase * w).real

    top = window_sigmas * s
    val, err = si.quad(
        integrand, 0.0, top, limit=400,
        points=[1e-6 * top, 1e-3 * top, 0.1 * top],
        epsabs=1e-16, epsrel=1e-10,
    )
    if not math.isfinite(val):
        raise RuntimeError(f"oracle_x quadrature failed: {val!r} (err {err!r})")
    return 2.0 * math.sqrt(math.pi) * s * lam * lam * val


def oracle_m(det, cav, n_modes=200, window_sigmas=10.0):
    """Brute-force M_AB: half-line quadrature against H_0^(2) mode sum.

    M = -sqrt(pi) sigma lambda^2 e^{-Omega^2 sigma^2}
        Int_0^inf dtau e^{-tau^2/4 sigma^2} W_AB(tau).
    The Im part of H_0^(2) has an integrable log singularity at tau -> 0;
    the quadrature grades its mesh toward the origin.
    """
    cut = ModeCutoffs(n_max_x=n_modes, m_max=0)
    s, om, lam = det.sigma, det.omega, det.lam

    def integrand_re(tau):
        w = wightman_cavity(tau, 0.0, cav.rho0, cav, cut)
        return math.exp(-(tau * tau) / (4.0 * s * s)) * w.real

    def integrand_im(tau):
        w = wightman_cavity(tau, 0.0, cav.rho0, cav, cut)
        return math.exp(-(tau * tau) / (4.0 * s * s)) * w.imag

    top = window_sigmas * s
    pts = [1e-8 * top, 1e-6 * top, 1e-4 * top, 1e-2 * top, 0.1 * top]
    re, _ = si.quad(integrand_re, 0.0, top, limit=500, points=pts,
                    epsabs=1e-16, epsrel=1e-10)
    im, _ = si.quad(integrand_im, 0.0, top, limit=500, points=pts,
                    epsabs=1e-16, epsrel=1e-10)
    pref = -math.sqrt(math.pi) * s * lam * lam * math.exp(-((om * s) ** 2))
    return complex(pref * re, pref * im)
