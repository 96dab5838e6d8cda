"""Correlation measures of the two-detector reduced state.

The O(lambda^2) joint state in the basis (|g g>, |g e>, |e g>, |e e>)
carries populations (1 - X_AA - X_BB, X_AA, X_BB, 0), the exchange
coherence X_AB on the inner pair and the pair coherence M_AB on the
outer pair.  Everything downstream is closed-form two-by-two algebra:
partial-transpose eigenvalues and negativity, the alpha spectrum and
mutual information, and the projective-measurement conditional
entropies behind classical correlations J and quantum discord D.

Cancellation-prone eigenvalue roots are evaluated in rationalized form
throughout, so measures stay accurate down to X ~ 1e-15.

The brute-force (theta, phi)-grid measurement minimizer is retained as
the oracle for the closed-form min(S1, S2); its conditional states are
rederived from first principles (the normalization Tr p_+ + p_- = 1
pins the diagonal entries uniquely).
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .specfun import binary_entropy

__all__ = [
    "InvalidState",
    "ReducedState",
    "PTEigenvalues",
    "CorrelationMeasures",
    "build_state",
    "pt_eigenvalues",
    "negativity",
    "mutual_information",
    "discord",
    "brute_force_conditional_entropy",
    "MEASURES_CSV_COLUMNS",
    "measures_csv_header",
    "measures_csv_row",
]


class InvalidState(ValueError):
    """The correlation entries do not describe a physical O(lambda^2) state."""


@dataclass(frozen=True)
class ReducedState:
    """4x4 joint density matrix in the (|gg>, |ge>, |eg>, |ee>) basis."""

    matrix: np.ndarray


@dataclass(frozen=True)
class PTEigenvalues:
    """Eigenvalues of the partial transpose, paired by 2x2 block.

    (e_plus, e_minus) come from the block mixing the ground-ground
    population with the exchange coherence X_AB; e_minus is negative by
    an O(lambda^4) artifact of the truncated state, bounded by
    |X_AB|^2 / (1 - X_AA - X_BB).  (ep_plus, ep_minus) mix the
    single-excitation populations with M_AB; ep_minus < 0 is the
    entanglement criterion |M_AB|^2 > X_AA X_BB.
    """

    e_plus: float
    e_minus: float
    ep_plus: float
    ep_minus: float

    @property
    def entangled(self):
        return self.ep_minus < 0.0


@dataclass(frozen=True)
class CorrelationMeasures:
    negativity_exact: float
    negativity_pert: float
    mutual_info: float
    classical_j: float
    discord: float
    alpha: tuple
    s1: float
    s2: float
    entangled: bool


def _xlogx(x):
    if x < 0.0:
        raise InvalidState(f"negative eigenvalue in entropy sum: {x!r}")
    return 0.0 if x == 0.0 else x * math.log(x)


def _moduli(corrs):
    x_aa = float(corrs.x_aa)
    x_bb = float(corrs.x_bb)
    ax = abs(corrs.x_ab)
    am = abs(corrs.m_ab)
    if x_aa < 0 or x_bb < 0:
        raise InvalidState(
            f"negative excitation probability: x_aa={x_aa!r}, x_bb={x_bb!r}"
        )
    return x_aa, x_bb, ax, am


def build_state(corrs):
    """Assemble the reduced density matrix from a correlation set.

    Layout (1-based): diagonal (1 - X_AA - X_BB, X_AA, X_BB, 0);
    conj(M_AB) at (1,4) and M_AB at (4,1); X_AB at (2,3) and its
    conjugate at (3,2).  All other entries vanish identically at this
    order.
    """
    x_aa, x_bb, _, _ = _moduli(corrs)
    r11 = 1.0 - x_aa - x_bb
    if r11 < 0.0:
        raise InvalidState(
            f"ground-state population 1 - x_aa - x_bb = {r11!r} < 0"
        )
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = r11
    rho[1, 1] = x_aa
    rho[2, 2] = x_bb
    rho[0, 3] = np.conj(corrs.m_ab)
    rho[3, 0] = corrs.m_ab
    rho[1, 2] = corrs.x_ab
    rho[2, 1] = np.conj(corrs.x_ab)
    return ReducedState(matrix=rho)


def _split_pair(s, d, coh_sq):
    """Eigenvalues (s/2 ± sqrt(d^2/4 + coh_sq)) of a Hermitian 2x2 with
    diagonal (s±d)/2 and off-diagonal modulus sqrt(coh_sq), with the
    small root rationalized: lam_minus = (s*... ) avoiding s - t loss."""
    t = math.sqrt(d * d + 4.0 * coh_sq)
    lam_plus = 0.5 * (s + t)
    # s^2 - t^2 = (s-d)(s+d) - 4 coh_sq
    if s + t > 0.0:
        lam_minus = ((s - d) * (s + d) - 4.0 * coh_sq) / (2.0 * (s + t))
    else:
        lam_minus = 0.5 * (s - t)
    return lam_plus, lam_minus


def pt_eigenvalues(corrs):
    """Closed-form spectrum of the partial transpose of the state."""
    x_aa, x_bb, ax, am = _moduli(corrs)
    r11 = 1.0 - x_aa - x_bb
    # block {gg, ee} picks up X_AB under partial transposition
    e_plus, e_minus = _split_pair(r11, r11, ax * ax)
    # block {ge, eg} picks up M_AB
    ep_plus, ep_minus = _split_pair(x_aa + x_bb, x_aa - x_bb, am * am)
    return PTEigenvalues(e_plus, e_minus, ep_plus, ep_minus)


def negativity(corrs, mode="exact"):
    """Entanglement negativity max(0, -ep_minus).

    mode="exact" uses the closed eigenvalue formula in rationalized
    form, 2(|M|^2 - X_AA X_BB) / (sqrt((X_AA-X_BB)^2 + 4|M|^2) + X_AA
    + X_BB), which is cancellation-free at the sudden-death boundary.
    mode="perturbative" is the weak-coupling surrogate
    max(0, |M| - (X_AA + X_BB)/2); it never exceeds the exact value.
    """
    x_aa, x_bb, ax, am = _moduli(corrs)
    if mode == "exact":
        flag = am * am - x_aa * x_bb
        if flag <= 0.0:
            return 0.0
        dx = x_aa - x_bb
        t = math.sqrt(dx * dx + 4.0 * am * am)
        return 2.0 * flag / (t + x_aa + x_bb)
    if mode == "perturbative":
        return max(0.0, am - 0.5 * (x_aa + x_bb))
    raise ValueError(f"mode must be 'exact' or 'perturbative', got {mode!r}")


def _alphas(corrs):
    x_aa, x_bb, ax, am = _moduli(corrs)
    r11 = 1.0 - x_aa - x_bb
    if r11 <= 0.0:
        raise InvalidState(
            f"ground-state population 1 - x_aa - x_bb = {r11!r} must be > 0"
        )
    s = x_aa + x_bb
    alpha3, alpha4 = _split_pair(s, x_aa - x_bb, ax * ax)
    if alpha4 < -1e-12:
        raise InvalidState(
            f"alpha4 = {alpha4!r} < -1e-12: |x_ab|^2 exceeds x_aa*x_bb "
            f"(Cauchy-Schwarz violated upstream)"
        )
    if alpha4 < 0.0:
        alpha4 = 0.0
    return r11, alpha3, alpha4


def mutual_information(corrs):
    """Mutual information and the retained joint-state eigenvalues.

    Returns (I, (alpha1, alpha3, alpha4)) with I = H(X_AA) + H(X_BB)
    + sum alpha_i log alpha_i; the O(lambda^4) eigenvalue alpha2 is
    dropped, and alpha1 + alpha3 + alpha4 = 1 exactly.
    """
    x_aa, x_bb, _, _ = _moduli(corrs)
    alpha1, alpha3, alpha4 = _alphas(corrs)
    info = (
        binary_entropy(x_aa)
        + binary_entropy(x_bb)
        + _xlogx(alpha1)
        + _xlogx(alpha3)
        + _xlogx(alpha4)
    )
    return info, (alpha1, alpha3, alpha4)


def _branch_entropies(corrs):
    """The two closed-form conditional-entropy branches (S1, S2).

    S1 belongs to the measurement branch carrying the exchange
    coherence: H of (1 ± sqrt((1 - X_AA - X_BB)^2 + 4|X_AB|^2))/2,
    evaluated through the small root
    ((X_AA + X_BB)(2 - X_AA - X_BB) - 4|X_AB|^2) / (2(1 + t)),
    which survives the 1 - t cancellation.  S2 carries the pair
    coherence: H((1 + sqrt((X_AA - X_BB)^2 + 4|M_AB|^2))/2).
    """
    x_aa, x_bb, ax, am = _moduli(corrs)
    r11 = 1.0 - x_aa - x_bb
    s = x_aa + x_bb
    t1 = math.sqrt(r11 * r11 + 4.0 * ax * ax)
    q1 = (s * (2.0 - s) - 4.0 * ax * ax) / (2.0 * (1.0 + t1))
    s1 = binary_entropy(q1)
    dx = x_aa - x_bb
    t2 = math.sqrt(dx * dx + 4.0 * am * am)
    s2 = binary_entropy(0.5 * (1.0 + min(t2, 1.0)))
    return s1, s2


def discord(corrs):
    """All correlation measures of the state, as CorrelationMeasures.

    D(B|A) = H(X_AA) + sum_i alpha_i log alpha_i + min(S1, S2) and
    J(A:B) = H(X_BB) - min(S1, S2); the pair satisfies I = J + D
    identically, which is re-verified to 1e-12 before returning.
    """
    x_aa, x_bb, ax, am = _moduli(corrs)
    info, alphas = mutual_information(corrs)
    s1, s2 = _branch_entropies(corrs)
    smin = min(s1, s2)
    cls = binary_entropy(x_bb) - smin
    alpha_sum = sum(_xlogx(a) for a in alphas)
    disc = binary_entropy(x_aa) + alpha_sum + smin
    if abs(info - (cls + disc)) > 1e-12 * max(1.0, abs(info)):
        raise RuntimeError(
            f"I = J + D identity violated: I={info!r}, J={cls!r}, D={disc!r}"
        )
    return CorrelationMeasures(
        negativity_exact=negativity(corrs, "exact"),
        negativity_pert=negativity(corrs, "perturbative"),
        mutual_info=info,
        classical_j=cls,
        discord=disc,
        alpha=alphas,
        s1=s1,
        s2=s2,
        entangled=(am * am > x_aa * x_bb),
    )


def _entropy_grid(q):
    """Vectorized binary entropy with clamping of O(lambda^4) artifacts.

    Conditional 2x2 states inherited from the truncated joint state can
    acquire tiny negative determinants; the corresponding eigenvalue is
    clamped to the pure-state boundary (entropy 0), which only lowers
    the grid minimum and so keeps the oracle conservative.
    """
    q = np.clip(q, 0.0, 1.0)
    out = np.zeros_like(q)
    inside = (q > 0.0) & (q < 1.0)
    qi = q[inside]
    out[inside] = -qi * np.log(qi) - (1.0 - qi) * np.log1p(-qi)
    return out


def brute_force_conditional_entropy(corrs, theta_steps=181, phi_steps=61):
    """Grid minimum of the post-measurement conditional entropy.

    Projective measurements cos(theta/2)|g> ± e^{i phi} sin(theta/2)|e>
    on the first slot leave 2x2 conditional states with diagonals
    (c^2 r11 + s^2 X_BB, c^2 X_AA) and (s^2 r11 + c^2 X_BB, s^2 X_AA)
    and coherence ±cs (e^{i phi} conj(M_AB) + e^{-i phi} conj(X_AB));
    the diagonals follow from Tr[p_+ + p_-] = 1.  The returned value is
    min over theta in [0, pi/2] (endpoints included) and phi in [0, pi)
    plus both candidate stationary phases of
    sum_pm p_pm H((1 + Delta_pm)/2).
    """
    if theta_steps < 2 or phi_steps < 2:
        raise ValueError("theta_steps and phi_steps must both be >= 2")
    x_aa, x_bb, ax, am = _moduli(corrs)
    r11 = 1.0 - x_aa - x_bb
    if r11 < 0.0:
        raise InvalidState(
            f"ground-state population 1 - x_aa - x_bb = {r11!r} < 0"
        )
    theta = np.linspace(0.0, 0.5 * math.pi, theta_steps)
    phis = np.linspace(0.0, math.pi, phi_steps, endpoint=False)
    # join the stationary phases of |C|^2 so the closed-form optimum is
    # always a grid point
    psi = cmath.phase(complex(corrs.x_ab)) - cmath.phase(complex(corrs.m_ab))
    extra = np.asarray([(-0.5 * psi) % math.pi, (0.5 * psi) % math.pi])
    phis = np.concatenate([phis, extra])

    c2 = np.cos(0.5 * theta) ** 2
    s2 = 1.0 - c2
    csq = (c2 * s2)[:, None]                       # (theta, 1)
    mconj = np.conj(complex(corrs.m_ab))
    xconj = np.conj(complex(corrs.x_ab))
    phase = np.exp(1j * phis)[None, :]             # (1, phi)
    coh_sq = csq * np.abs(phase * mconj + xconj / phase) ** 2

    total = np.zeros_like(coh_sq)
    for a_diag, b_diag in (
        (c2 * r11 + s2 * x_bb, c2 * x_aa),
        (s2 * r11 + c2 * x_bb, s2 * x_aa),
    ):
        a = a_diag[:, None]
        b = b_diag[:, None]
        p = a + b
        disc = np.sqrt((a - b) ** 2 + 4.0 * coh_sq)
        safe_p = np.where(p > 0.0, p, 1.0)
        # small eigenvalue of the conditional state, rationalized
        q = 2.0 * (a * b - coh_sq) / (safe_p * (safe_p + disc))
        total += np.where(p > 0.0, p * _entropy_grid(q), 0.0)
    return float(np.min(total))


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------

MEASURES_CSV_COLUMNS = (
    "omega_sigma", "rho0_sigma", "sigma_R", "lambda",
    "x_aa", "x_bb", "x_ab", "m_ab_re", "m_ab_im",
    "neg_exact", "neg_pert", "mutual_info", "classical_j", "discord",
    "s1", "s2", "converged_flags",
)


def _fmt(v):
    return f"{float(v):.17g}"


def measures_csv_header():
    return ",".join(MEASURES_CSV_COLUMNS)


def measures_csv_row(omega_sigma, rho0_sigma, sigma_R, lam, corrs, meas):
    """One CSV row in the fixed column order, values at %.17g."""
    m = complex(corrs.m_ab)
    cells = [
        _fmt(omega_sigma), _fmt(rho0_sigma), _fmt(sigma_R), _fmt(lam),
        _fmt(corrs.x_aa), _fmt(corrs.x_bb), _fmt(np.real(corrs.x_ab)),
        _fmt(m.real), _fmt(m.imag),
        _fmt(meas.negativity_exact), _fmt(meas.negativity_pert),
        _fmt(meas.mutual_info), _fmt(meas.classical_j), _fmt(meas.discord),
        _fmt(meas.s1), _fmt(meas.s2),
        corrs.converged_flags,
    ]
    return ",".join(cells)
