"""Special-function layer.

Integer-order Bessel J and its positive zeros, exponentially scaled
modified Bessel I0/K0, binary entropy, and the cosh-Gaussian switching
integral shared by all X-type response series.  Scalar/vector function
evaluations delegate to the selected kernel backend (``kernels``); this
module owns domain validation, the zero table, and its disk format.
"""

import math
import threading

import numpy as np

from . import kernels

__all__ = [
    "BesselZeroTable",
    "bessel_j",
    "bessel_zeros",
    "zero_table",
    "scaled_bessel_ik0",
    "binary_entropy",
    "gauss_cosh_integral",
    "ENTROPY_BASE",
]

# All entropies in this package are natural-log (nats).  Recorded here as
# a visible constant so every consumer (and every emitted provenance
# block) states the base instead of assuming one.
ENTROPY_BASE = "e"

_ZERO_TOL = 1e-12  # |J_m(xi)| bound every stored/loaded zero must satisfy


def bessel_j(m, x):
    """Bessel function of the first kind J_m(x), integer m >= 0, x >= 0.

    Negative order/argument are rejected: the mode sums only ever need
    |m| and nonnegative radii (J_{-m} enters squared).
    """
    if m != int(m) or m < 0:
        raise ValueError(f"order must be a nonnegative integer, got {m!r}")
    if x < 0:
        raise ValueError(f"argument must be nonnegative, got {x!r}")
    return kernels.jn(int(m), float(x))


def scaled_bessel_ik0(x):
    """Exponentially scaled modified Bessel pair (e^-x I_0(x), e^-x K_0(x)).

    Safe against overflow for x up to 1e8 and beyond; K_0 diverges
    logarithmically at 0, so x must be strictly positive.
    """
    if x <= 0:
        raise ValueError(f"x must be positive (K_0 diverges at 0), got {x!r}")
    x = float(x)
    return kernels.i0e(x), kernels.k0e(x)


def binary_entropy(x):
    """Binary entropy H(x) = -x log x - (1-x) log(1-x) in nats.

    H(0) = H(1) = 0 by the 0*log 0 = 0 convention.  Inputs within 1e-12
    of [0, 1] are clamped; anything farther out is a domain error.
    """
    if x < -1e-12 or x > 1.0 + 1e-12:
        raise ValueError(f"binary_entropy needs x in [0, 1], got {x!r}")
    x = min(max(float(x), 0.0), 1.0)
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log1p(-x)


def gauss_cosh_integral(a, b):
    """Switching integral int_{-inf}^{inf} exp(-(a + b*cosh s)^2) ds.

    a = sigma*Omega and b = sigma*xi_mn/R in every use here.  b must be
    positive (the integral diverges for b <= 0).  Returns exact 0.0 once
    the peak value exp(-(a+b)^2) underflows double precision.
    """
    if b <= 0:
        raise ValueError(f"b must be positive (integral diverges), got {b!r}")
    return kernels.gauss_cosh(float(a), float(b))


# ---------------------------------------------------------------------------
# Zeros of J_m
# ---------------------------------------------------------------------------

def _mcmahon_seed(m, n):
    """McMahon asymptotic approximation to the n-th zero of J_m.

    DLMF 10.21.19 with beta = (n + m/2 - 1/4)*pi and mu = 4 m^2; already
    good to ~1e-4 at n = 1 for m <= 1, and improving like n^-1.
    """
    beta = (n + 0.5 * m - 0.25) * math.pi
    mu = 4.0 * m * m
    b8 = 8.0 * beta
    seed = (
        beta
        - (mu - 1.0) / b8
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8**3)
        - 32.0 * (mu - 1.0) * (83.0 * mu**2 - 982.0 * mu + 3779.0)
        / (15.0 * b8**5)
    )
    return seed


def _newton_refine(m, x, iters=4):
    """Vectorized Newton for J_m roots; J_m' = J_{m-1} - (m/x) J_m."""
    for _ in range(iters):
        f = kernels.jnv(m, x)
        if m == 0:
            fp = -kernels.j1v(x)
        else:
            fp = kernels.jnv(m - 1, x) - (m / x) * kernels.jnv(m, x)
        step = f / fp
        # Zeros are ~pi apart; any larger step means a bad derivative.
        np.clip(step, -1.0, 1.0, out=step)
        x = x - step
    return x


def _zeros_mcmahon(m, n_max):
    """First n_max zeros of J_m (m = 0 or 1) via McMahon seed + Newton."""
    n = np.arange(1, n_max + 1, dtype=float)
    return _newton_refine(m, _mcmahon_seed(m, n))


def _zeros_bracketed(m, prev_row):
    """Zeros of J_m from the interlacing brackets of the J_{m-1} zeros.

    DLMF 10.21(i): exactly one zero of J_m lies in each open interval
    (xi_{m-1,n}, xi_{m-1,n+1}); bisection on the sign change followed by
    a Newton polish.  Returns len(prev_row) - 1 zeros.
    """
    lo = prev_row[:-1].copy()
    hi = prev_row[1:].copy()
    flo = np.sign(kernels.jnv(m, lo))
    for _ in range(45):
        mid = 0.5 * (lo + hi)
        fmid = np.sign(kernels.jnv(m, mid))
        left = fmid == flo
        lo = np.where(left, mid, lo)
        flo = np.where(left, fmid, flo)
        hi = np.where(left, hi, mid)
    return _newton_refine(m, 0.5 * (lo + hi), iters=2)


class BesselZeroTable:
    """Grow-on-demand cache of the positive zeros xi_mn of J_m.

    Rows are immutable numpy arrays once stored, so reads are safe from
    any thread after population; population itself happens under a lock.
    Rows m = 0, 1 come from McMahon seeds + Newton; higher orders from
    bisection inside the interlacing brackets of the previous row.
    """

    def __init__(self):
        self._rows = {}
        self._lock = threading.Lock()

    def get(self, m, n_max):
        """First n_max zeros of J_m, ascending, as a read-only array."""
        if m != int(m) or m < 0:
            raise ValueError(f"order must be a nonnegative integer, got {m!r}")
        if n_max != int(n_max) or n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {n_max!r}")
        m, n_max = int(m), int(n_max)
        row = self._rows.get(m)
        if row is None or len(row) < n_max:
            with self._lock:
                row = self._rows.get(m)
                if row is None or len(row) < n_max:
                    self._populate(m, n_max)
                row = self._rows[m]
        return row[:n_max]

    def _populate(self, m, n_max):
        # Row m needs n_max + (m - depth) zeros of each ancestor row, since
        # each bracketed row is one shorter than its parent.
        need = {m: n_max}
        mm = m
        while mm >= 2 and (mm - 1 not in self._rows
                           or len(self._rows[mm - 1]) < need[mm] + 1):
            need[mm - 1] = need[mm] + 1
            mm -= 1
        for order in sorted(need):
            count = need[order]
            have = self._rows.get(order)
            if have is not None and len(have) >= count:
                continue
            if order <= 1:
                row = _zeros_mcmahon(order, count)
            else:
                row = _zeros_bracketed(order, self._rows[order - 1][: count + 1])
            self._verify(order, row)
            row.flags.writeable = False
            self._rows[order] = row

    def _verify(self, m, row):
        resid = np.abs(kernels.jnv(m, row))
        if resid.max() >= _ZERO_TOL:
            k = int(resid.argmax())
            raise RuntimeError(
                f"zero refinement failed: |J_{m}({row[k]!r})| = {resid[k]:.3e}"
            )
        if not np.all(np.diff(row) > 0):
            raise RuntimeError(f"zeros of J_{m} not strictly increasing")
        if m >= 1 and (m - 1) in self._rows:
            prev = self._rows[m - 1]
            k = min(len(prev) - 1, len(row))
            if not (np.all(prev[:k] < row[:k]) and np.all(row[:k] < prev[1:k + 1])):
                raise RuntimeError(f"interlacing violated between J_{m-1} and J_{m}")
        if m == 0 and row[0] <= 2.0:
            raise RuntimeError(f"spurious small root {row[0]!r} for J_0")

    def save_text(self, path, m_max, n_max):
        """Write rows "m n xi" (17 significant digits) for m <= m_max."""
        with open(path, "w", newline="\n") as f:
            for m in range(m_max + 1):
                row = self.get(m, n_max)
                for n, xi in enumerate(row, start=1):
                    f.write(f"{m} {n} {xi:.17g}\n")

    def load_text(self, path):
        """Load a saved table, re-verifying every row against |J_m| < 1e-12."""
        data = {}
        with open(path) as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 'm n xi' row")
                m, n, xi = int(parts[0]), int(parts[1]), float(parts[2])
                data.setdefault(m, []).append((n, xi))
        for m, entries in sorted(data.items()):
            entries.sort()
            if [n for n, _ in entries] != list(range(1, len(entries) + 1)):
                raise ValueError(f"zero table row indices for m={m} not contiguous")
            row = np.array([xi for _, xi in entries])
            try:
                self._verify(m, row)
            except RuntimeError as err:
                raise ValueError(f"{path}: {err}") from None
            with self._lock:
                have = self._rows.get(m)
                if have is None or len(have) < len(row):
                    row.flags.writeable = False
                    self._rows[m] = row


_TABLE = BesselZeroTable()


def zero_table():
    """The process-wide shared zero table."""
    return _TABLE


def bessel_zeros(m, n_max):
    """First n_max positive zeros of J_m, ascending (cached globally)."""
    return _TABLE.get(m, n_max)
