"""Shared fixtures: synthetic correlation sets for the measures layer."""

import math

import numpy as np
from hypothesis import settings

from udwcavity.response import CorrelationSet

# Property tests draw fixed example sets so the full suite is
# reproducible run to run (the acceptance harness depends on that).
settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")


def make_corr(x_aa, x_bb, x_ab, m_ab):
    """Correlation set with synthetic entries (no diagnostics attached)."""
    return CorrelationSet(
        x_aa=x_aa, x_bb=x_bb, x_ab=x_ab, m_ab=m_ab,
        diagnostics={}, det=None, cav=None, cut=None,
    )


def random_corr_set(rng):
    """One Cauchy-Schwarz-consistent random correlation set.

    X_AA is log-uniform over [1e-7, 2e-4] and X_BB <= X_AA; the closed
    conditional-entropy branches are only guaranteed not to be
    undercut by finer measurements in this ordering (the swapped
    ordering admits measurement bases the two branches do not cover).
    |X_AB| stays inside the Cauchy-Schwarz ball while |M_AB| ranges up
    to twice the geometric mean, so both separable and entangled sets
    are drawn; M_AB carries a random phase.
    """
    x_aa = 10.0 ** rng.uniform(-7.0, math.log10(2e-4))
    x_bb = x_aa * rng.uniform(0.05, 1.0)
    x_ab = rng.uniform(0.0, 0.999) * math.sqrt(x_aa * x_bb)
    m_mag = rng.uniform(0.0, 2.0) * math.sqrt(x_aa * x_bb)
    m_ab = m_mag * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
    return make_corr(x_aa, x_bb, x_ab, m_ab)
