"""Oracle-first tests for the cavity response entries.

The ground truth is the time-domain route: Gaussian-windowed quadrature
against the truncated Hankel-function Wightman sum, evaluated at the
same mode truncation as the closed forms.  The two routes share only
the Bessel zero table.
"""

import json
import math
import threading

import numpy as np
import pytest
import scipy.integrate as si
import scipy.special as ss

from udwcavity import kernels
from udwcavity.response import (
    CavityConfig,
    CorrelationSet,
    DetectorParams,
    ModeCutoffs,
    correlations,
    m_ab,
    m_ab_trace,
    m_ab_truncated,
    oracle_m,
    oracle_x,
    wightman_cavity,
    x_aa,
    x_aa_truncated,
    x_ab,
    x_ab_truncated,
    x_bb,
    x_bb_truncated,
)
from udwcavity.series import NotConverged
from udwcavity.specfun import bessel_zeros


def mk(omega_sigma, rho0_sigma, sigma_R, lam=0.1, radius=1.0):
    sigma = sigma_R * radius
    det = DetectorParams(omega=omega_sigma / sigma, sigma=sigma, lam=lam)
    cav = CavityConfig(radius=radius, rho0=rho0_sigma * sigma)
    return det, cav


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------

class TestValidation:
    def test_detector_rejects_bad_values(self):
        with pytest.raises(ValueError):
            DetectorParams(omega=-1.0, sigma=0.1)
        with pytest.raises(ValueError):
            DetectorParams(omega=1.0, sigma=0.0)
        with pytest.raises(ValueError):
            DetectorParams(omega=1.0, sigma=0.1, lam=-0.5)

    def test_zero_gap_allowed(self):
        DetectorParams(omega=0.0, sigma=0.1)

    def test_cavity_rejects_bad_values(self):
        with pytest.raises(ValueError):
            CavityConfig(radius=0.0, rho0=0.0)
        with pytest.raises(ValueError):
            CavityConfig(radius=1.0, rho0=-0.1)
        with pytest.raises(ValueError):
            CavityConfig(radius=1.0, rho0=1.5)

    def test_wall_position_allowed(self):
        assert CavityConfig(radius=2.0, rho0=2.0).eta == 1.0

    def test_cutoff_validation(self):
        with pytest.raises(ValueError):
            ModeCutoffs(n_max_x=0)
        with pytest.raises(ValueError):
            ModeCutoffs(tol=1.5)
        with pytest.raises(ValueError):
            ModeCutoffs(m_max=-1)
        assert ModeCutoffs(m_max=0).m_max == 0


# ---------------------------------------------------------------------------
# closed forms vs time-domain oracle at matched truncation
# ---------------------------------------------------------------------------

SPOTS = [(1.0, 1.0, 0.1), (0.05, 2.0, 0.025)]


class TestOracleEquivalence:
    @pytest.mark.parametrize("spot", SPOTS)
    def test_x_aa_matches_oracle(self, spot):
        det, cav = mk(*spot)
        closed = x_aa_truncated(det, cav, 150)
        brute = oracle_x("A", "A", det, cav, n_modes=150)
        assert abs(closed - brute) <= 1e-8 * abs(brute)

    @pytest.mark.parametrize("spot", SPOTS)
    def test_x_ab_matches_oracle(self, spot):
        det, cav = mk(*spot)
        closed = x_ab_truncated(det, cav, 150)
        brute = oracle_x("A", "B", det, cav, n_modes=150)
        assert abs(closed - brute) <= 1e-8 * abs(brute)

    def test_x_bb_matches_oracle(self):
        det, cav = mk(1.0, 1.0, 0.1)
        closed = x_bb_truncated(det, cav, 120, m_max=8)
        brute = oracle_x("B", "B", det, cav, n_modes=120, m_max=8)
        assert abs(closed - brute) <= 1e-8 * abs(brute)

    @pytest.mark.parametrize("spot", SPOTS)
    def test_m_ab_matches_oracle(self, spot):
        det, cav = mk(*spot)
        closed = m_ab_truncated(det, cav, 150)
        brute = oracle_m(det, cav, n_modes=150)
        assert abs(closed - brute) <= 1e-8 * abs(brute)

    def test_oracle_window_insensitive(self):
        # the Gaussian window kills the tail: 10 sigma vs 14 sigma agree
        det, cav = mk(1.0, 1.0, 0.1)
        w10 = oracle_x("A", "A", det, cav, n_modes=80, window_sigmas=10.0)
        w14 = oracle_x("A", "A", det, cav, n_modes=80, window_sigmas=14.0)
        assert abs(w10 - w14) <= 1e-9 * abs(w10)

    def test_production_near_truncated(self):
        # adaptive stopping should land within tol of the full truncation
        det, cav = mk(1.0, 1.0, 0.1)
        cut = ModeCutoffs(tol=1e-3)
        val, diag = x_aa(det, cav, cut)
        full = x_aa_truncated(det, cav, cut.n_max_x)
        assert diag.converged
        assert abs(val - full) <= cut.tol * abs(full)


# ---------------------------------------------------------------------------
# per-mode quadrature identity (the analytic step under the M series)
# ---------------------------------------------------------------------------

def int1_rhs(xi, s_over_R):
    """(s/sqrt(pi)) e^{-x} [pi I0(x) + i K0(x)], x = (xi s/R)^2/2."""
    x = 0.5 * (xi * s_over_R) ** 2
    re = math.pi * kernels.i0e(x)
    im = math.exp(-2.0 * x) * kernels.k0e(x)
    return (s_over_R / math.sqrt(math.pi)) * complex(re, im)


def int1_lhs(xi, s_over_R, window=12.0):
    s = s_over_R  # R = 1
    top = window * s
    pts = [1e-8 * top, 1e-6 * top, 1e-4 * top, 1e-2 * top, 0.1 * top]
    re, _ = si.quad(
        lambda t: math.exp(-t * t / (4 * s * s)) * ss.j0(xi * t),
        0.0, top, limit=2000, points=pts, epsabs=1e-15, epsrel=1e-11,
    )
    im, _ = si.quad(
        lambda t: -math.exp(-t * t / (4 * s * s)) * ss.y0(xi * t),
        0.0, top, limit=2000, points=pts, epsabs=1e-15, epsrel=1e-11,
    )
    return complex(re, im)


class TestPerModeIdentity:
    @pytest.mark.parametrize("n_zero", [1, 10, 100])
    @pytest.mark.parametrize("s_over_R", [0.01, 0.1])
    def test_gaussian_hankel_integral(self, n_zero, s_over_R):
        xi = bessel_zeros(0, n_zero)[-1]
        lhs = int1_lhs(xi, s_over_R)
        rhs = int1_rhs(xi, s_over_R)
        assert abs(lhs - rhs) <= 1e-8 * abs(rhs)


# ---------------------------------------------------------------------------
# degenerate geometries
# ---------------------------------------------------------------------------

class TestDegeneracies:
    def test_on_axis_collapse_is_exact(self):
        # at rho0 = 0 every azimuthal factor is exactly 1 (or 0 for m >= 1)
        det = DetectorParams(omega=10.0, sigma=0.1, lam=0.1)
        cav = CavityConfig(radius=1.0, rho0=0.0)
        vaa, _ = x_aa(det, cav)
        vbb, dbb = x_bb(det, cav)
        vab, _ = x_ab(det, cav)
        assert vbb == vaa
        assert vab == vaa
        assert dbb.converged

    def test_m_ab_rejects_coincident_detectors(self):
        det = DetectorParams(omega=10.0, sigma=0.1, lam=0.1)
        cav = CavityConfig(radius=1.0, rho0=0.0)
        with pytest.raises(ValueError, match="rho0 > 0"):
            m_ab(det, cav)

    def test_dirichlet_wall_kills_cross_terms(self):
        # at rho0 = R the J_0 factors vanish identically (that is what
        # defines the zeros), so the cross terms are exact 0.0; x_bb
        # goes through J_m residuals and only reaches rounding level
        det = DetectorParams(omega=10.0, sigma=0.1, lam=0.1)
        wall = CavityConfig(radius=1.0, rho0=1.0)
        scale_x = x_aa_truncated(det, wall, 200)
        assert x_ab_truncated(det, wall, 200) == 0.0
        assert m_ab_truncated(det, wall, 200) == 0.0
        assert abs(x_bb_truncated(det, wall, 200, m_max=10)) <= 1e-9 * scale_x


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------

class TestInvariants:
    def test_cauchy_schwarz_and_positivity(self):
        rng = np.random.default_rng(20240817)
        for _ in range(6):
            os_ = rng.uniform(0.0, 3.0)
            rs = rng.uniform(0.1, 5.0)
            sr = float(np.exp(rng.uniform(np.log(0.005), np.log(0.1))))
            det, cav = mk(os_, rs, sr)
            cs = correlations(det, cav)  # validate() runs inside
            assert cs.x_aa >= 0 and cs.x_bb >= 0
            assert cs.x_ab**2 <= cs.x_aa * cs.x_bb + 1e-12
            assert cs.converged_flags == "1111"

    def test_lambda_squared_scaling_is_exact(self):
        det1, cav = mk(1.0, 1.0, 0.1, lam=0.1)
        det2, _ = mk(1.0, 1.0, 0.1, lam=0.2)
        assert x_aa(det2, cav)[0] == 4.0 * x_aa(det1, cav)[0]
        assert x_bb(det2, cav)[0] == 4.0 * x_bb(det1, cav)[0]
        assert x_ab(det2, cav)[0] == 4.0 * x_ab(det1, cav)[0]
        assert m_ab(det2, cav)[0] == 4.0 * m_ab(det1, cav)[0]

    def test_determinism(self):
        det, cav = mk(0.5, 2.0, 0.05)
        a = correlations(det, cav)
        b = correlations(det, cav)
        assert (a.x_aa, a.x_bb, a.x_ab, a.m_ab) == (b.x_aa, b.x_bb, b.x_ab, b.m_ab)
        for key in a.diagnostics:
            assert np.array_equal(a.diagnostics[key].values,
                                  b.diagnostics[key].values)

    def test_threaded_cache_population(self):
        det = DetectorParams(omega=5.0, sigma=0.2, lam=0.1)
        cav = CavityConfig(radius=1.0, rho0=0.3)
        cut = ModeCutoffs(n_max_x=523, m_max=12)
        results = []

        def work():
            results.append(x_bb(det, cav, cut)[0])

        threads = [threading.Thread(target=work) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(set(results)) == 1

    def test_perturbativity_warning(self):
        det, cav = mk(0.0, 0.5, 0.1, lam=2.0)
        with pytest.warns(UserWarning, match="perturbative"):
            correlations(det, cav)

    def test_not_converged_carries_diagnostics(self):
        det, cav = mk(0.0, 1.0, 0.1)
        with pytest.raises(NotConverged) as exc:
            x_aa(det, cav, ModeCutoffs(n_max_x=10, tol=1e-12))
        assert exc.value.diagnostics is not None
        assert not exc.value.diagnostics.converged

    def test_x_bb_outer_sum_can_fail(self):
        det, cav = mk(1.0, 5.0, 0.1)
        with pytest.raises(NotConverged):
            x_bb(det, cav, ModeCutoffs(m_max=1))


# ---------------------------------------------------------------------------
# oscillatory estimator accuracy for the M series
# ---------------------------------------------------------------------------

class TestEstimatorAccuracy:
    @pytest.mark.parametrize("tol", [1e-3, 1e-4])
    def test_m_ab_within_tolerance_of_limit(self, tol):
        from udwcavity.response import _m_ab_terms

        det, cav = mk(1.0, 1.0, 0.1)
        # truth: partial sums averaged over one full oscillation period
        # (delta n = 2/eta = 20) deep into the tail
        terms = _m_ab_terms(det, cav, 100000)
        csum = np.cumsum(terms)
        truth = np.mean(csum[-20:])
        val, diag = m_ab(det, cav, ModeCutoffs(tol=tol))
        assert diag.converged
        assert abs(val - truth) <= tol * abs(truth)

    def test_m_ab_near_wall_aliased_series(self):
        # near the wall the J0(xi_0n eta) phase step approaches pi per
        # term and the conditionally convergent tail is carried almost
        # entirely by the algebraic pi*I0 part; frozen references are
        # 4M-term partial sums smoothed by repeated pairwise averaging
        cut = ModeCutoffs(n_max_x=2000, m_max=80, n_max_m=200000, tol=1e-3)
        refs = {
            2.0: -7.686715980e-05,
            6.367: -5.434998274e-06,
            9.5: -4.861005017e-07,
        }
        for rho0_sigma, ref_re in refs.items():
            det, cav = mk(1.0, rho0_sigma, 0.1)
            val, diag = m_ab(det, cav, cut)
            assert diag.converged
            assert val.real == pytest.approx(ref_re, rel=3e-3)

    def test_m_ab_imaginary_part_blind_to_wall(self):
        # Im M integrates the field commutator, which cannot respond to
        # the wall before the reflected characteristic returns at
        # tau = 2R - rho0; the Gaussian window kills that entirely at
        # sigma/R = 0.1, so the boundary-free closed form must hold to
        # certificate accuracy even half a sigma away from the wall
        cut = ModeCutoffs(n_max_x=2000, m_max=80, n_max_m=200000, tol=1e-3)
        for rho0_sigma in (2.0, 6.367, 9.5):
            det, cav = mk(1.0, rho0_sigma, 0.1)
            a = det.omega * det.sigma
            im_flat = (
                det.lam**2 * math.exp(-a * a) / (4.0 * math.pi * rho0_sigma)
            ) * (math.sqrt(math.pi) / 2.0) * math.exp(-rho0_sigma**2 / 4.0)
            val, _ = m_ab(det, cav, cut)
            assert abs(val.imag - im_flat) <= 3e-3 * abs(val)


# ---------------------------------------------------------------------------
# Wightman helper and oracle plumbing
# ---------------------------------------------------------------------------

class TestWightman:
    def test_rejects_lightlike_point(self):
        cav = CavityConfig(radius=1.0, rho0=0.3)
        with pytest.raises(ValueError):
            wightman_cavity(0.0, 0.0, 0.3, cav)

    def test_rejects_outside_cavity(self):
        cav = CavityConfig(radius=1.0, rho0=0.3)
        with pytest.raises(ValueError):
            wightman_cavity(0.5, 0.0, 1.5, cav)

    def test_negative_time_is_conjugate(self):
        cav = CavityConfig(radius=1.0, rho0=0.3)
        cut = ModeCutoffs(n_max_x=100, m_max=5)
        w_pos = wightman_cavity(0.37, 0.2, 0.3, cav, cut)
        w_neg = wightman_cavity(-0.37, 0.2, 0.3, cav, cut)
        assert w_neg == np.conj(w_pos)

    def test_oracle_label_validation(self):
        det, cav = mk(1.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            oracle_x("A", "C", det, cav, n_modes=10)


# ---------------------------------------------------------------------------
# provenance and traces
# ---------------------------------------------------------------------------

class TestProvenance:
    def test_json_round_trip(self):
        det, cav = mk(1.0, 1.0, 0.1)
        cs = correlations(det, cav)
        blob = json.dumps(cs.provenance(), sort_keys=True)
        back = json.loads(blob)
        assert back["values"]["x_aa"] == cs.x_aa
        assert back["parameters"]["lambda"] == 0.1
        assert back["cutoffs"]["n_max_x"] == 2000
        assert all(back["converged"].values())
        assert back["terms_used"]["m_ab"] == cs.diagnostics["m_ab"].terms_used

    def test_validate_rejects_cs_violation(self):
        cs = CorrelationSet(x_aa=1e-6, x_bb=1e-6, x_ab=5e-6, m_ab=0j)
        with pytest.raises(ValueError, match="Cauchy-Schwarz"):
            cs.validate()

    def test_validate_rejects_negative_probability(self):
        cs = CorrelationSet(x_aa=-1e-6, x_bb=1e-6, x_ab=0.0, m_ab=0j)
        with pytest.raises(ValueError):
            cs.validate()


class TestTraces:
    def test_m_ab_trace_shape(self):
        det, cav = mk(1.0, 1.0, 0.1)
        diag = m_ab_trace(det, cav, 25, spacing="log", n_max=20000)
        # log spacing deduplicates rounding collisions among checkpoints
        assert 20 <= len(diag.indices) <= 25
        assert diag.indices[-1] == 20000
        assert np.all(np.diff(diag.indices) > 0)
        mods = np.asarray([m for _, m in diag.partial_sums])
        assert np.all(np.isfinite(mods))
