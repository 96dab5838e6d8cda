"""Detector responses and correlations in a cylindrical Dirichlet cavity.

Two Gaussian-switched detectors sit in an infinite cylindrical cavity
with Dirichlet walls, one on the axis and one at radius rho0.  The
package evaluates their second-order response entries (X_AA, X_BB,
X_AB, M_AB) as Bessel mode sums, builds the reduced two-detector state,
and computes negativity, mutual information, and quantum discord, with
a matched free-space baseline and a deterministic sweep driver behind
the ``udwcavity`` command line.
"""

# defined before the submodule imports: sweep and cli stamp it into
# their artifacts and read it back from this package namespace
__version__ = "0.1.0"

from udwcavity.freespace import (
    FreeSpaceParams,
    free_corrs,
    free_negativity_boundary,
)
from udwcavity.measures import (
    CorrelationMeasures,
    InvalidState,
    discord,
    mutual_information,
    negativity,
)
from udwcavity.response import (
    CavityConfig,
    CorrelationSet,
    DetectorParams,
    ModeCutoffs,
    correlations,
    m_ab,
    m_ab_trace,
    x_aa,
    x_ab,
    x_bb,
)
from udwcavity.series import NotConverged, SumDiagnostics
from udwcavity.sweep import (
    SweepSpec,
    density_run,
    linear_axis,
    list_axis,
    log_axis,
    run_sweep,
)

__all__ = [
    "CavityConfig",
    "CorrelationMeasures",
    "CorrelationSet",
    "DetectorParams",
    "FreeSpaceParams",
    "InvalidState",
    "ModeCutoffs",
    "NotConverged",
    "SumDiagnostics",
    "SweepSpec",
    "__version__",
    "correlations",
    "density_run",
    "discord",
    "free_corrs",
    "free_negativity_boundary",
    "linear_axis",
    "list_axis",
    "log_axis",
    "m_ab",
    "m_ab_trace",
    "mutual_information",
    "negativity",
    "run_sweep",
    "x_aa",
    "x_ab",
    "x_bb",
]
