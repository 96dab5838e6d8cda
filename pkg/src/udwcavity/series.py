"""Summation engine for the cavity mode sums.

Two stopping rules: a trailing-window Cauchy criterion for absolutely
convergent series (the X-type sums), and envelope-midpoint estimation
for conditionally convergent oscillatory series (the nonlocal M-type
sum), where the estimate is the midpoint between the last two extrema
of the partial-sum trace and convergence additionally requires the
estimate to survive a doubling of the term count.

All summation is sequential in ascending index order (indices are
1-based) with compensated (Kahan) accumulation, so results are
bit-identical run to run regardless of surrounding parallelism.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SumConfig",
    "SumDiagnostics",
    "NotConverged",
    "InsufficientOscillation",
    "sum_absolute",
    "sum_oscillatory",
    "partial_sum_trace",
]

DIAG_CSV_HEADER = (
    "n,partial_sum_re,partial_sum_im,rel_change,is_extremum,"
    "midpoint_estimate_re,midpoint_estimate_im"
)


class NotConverged(RuntimeError):
    """Raised when a stopping rule is not met by n_max terms."""

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class InsufficientOscillation(NotConverged):
    """Oscillatory rule found < 2 extrema and no Cauchy-style fallback held."""


@dataclass
class SumConfig:
    """Stopping-rule parameters.

    tol: relative tolerance (default 1e-3, adequate for the mode sums).
    n_max: hard cap on terms; n_min: no convergence declared earlier.
    mode: "absolute" or "oscillatory".
    window: trailing-window length for the absolute (Cauchy) rule.
    """

    tol: float = 1e-3
    n_max: int = 200000
    n_min: int = 8
    mode: str = "absolute"
    window: int = 8

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if self.n_min >= self.n_max:
            raise ValueError(
                f"need n_min < n_max, got {self.n_min} >= {self.n_max}"
            )
        if self.n_min < 1 or self.window < 1:
            raise ValueError("n_min and window must be >= 1")
        if self.mode not in ("absolute", "oscillatory"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class SumDiagnostics:
    """Partial-sum trace and convergence record of one series evaluation.

    indices/values hold the recorded trace (every evaluated index for
    the summation ops; a subsample for partial_sum_trace).  Extrema and
    midpoint estimates are tracked separately for the real and imaginary
    components, each list holding (n, value) pairs at full resolution.
    """

    indices: np.ndarray
    values: np.ndarray
    rel_changes: np.ndarray
    extrema_re: list = field(default_factory=list)
    extrema_im: list = field(default_factory=list)
    midpoints_re: list = field(default_factory=list)
    midpoints_im: list = field(default_factory=list)
    terms_used: int = 0
    converged: bool = False
    estimate: complex = 0.0
    mode: str = "absolute"
    note: str = ""

    @property
    def partial_sums(self):
        """Trace as (n, value) pairs; modulus for complex-valued series."""
        if np.all(self.values.imag == 0.0):
            vals = self.values.real
        else:
            vals = np.abs(self.values)
        return list(zip(self.indices.tolist(), vals.tolist()))

    @property
    def extrema_indices(self):
        """Sorted union of the Re- and Im-trace extremum indices."""
        return sorted(set(self.extrema_re) | set(self.extrema_im))

    @property
    def midpoints(self):
        """Midpoint-estimate values, Re paired with the running Im value."""
        if not self.midpoints_im:
            return [v for _, v in self.midpoints_re]
        if not self.midpoints_re:
            return [v for _, v in self.midpoints_im]
        merged = []
        re_val = im_val = None
        ire = iim = 0
        events = sorted(
            [(n, "re", v) for n, v in self.midpoints_re]
            + [(n, "im", v) for n, v in self.midpoints_im]
        )
        for n, comp, v in events:
            if comp == "re":
                re_val = v
            else:
                im_val = v
            merged.append(complex(re_val or 0.0, im_val or 0.0))
        return merged

    @property
    def midpoint_mean(self):
        """Mean over all midpoint pairs (cross-check for the last-pair rule)."""
        re = np.mean([v for _, v in self.midpoints_re]) if self.midpoints_re else 0.0
        im = np.mean([v for _, v in self.midpoints_im]) if self.midpoints_im else 0.0
        return complex(re, im)

    def write_csv(self, path_or_file):
        """Write the trace: n, partial sums, rel change, extrema, midpoints."""
        close = False
        if hasattr(path_or_file, "write"):
            f = path_or_file
        else:
            f = open(path_or_file, "w", newline="\n")
            close = True
        try:
            f.write(DIAG_CSV_HEADER + "\n")
            ext = set(self.extrema_indices)
            mre = {n: v for n, v in self.midpoints_re}
            mim = {n: v for n, v in self.midpoints_im}
            run_re = run_im = math.nan
            re_keys = sorted(mre)
            im_keys = sorted(mim)
            ire = iim = 0
            for k, n in enumerate(self.indices.tolist()):
                while ire < len(re_keys) and re_keys[ire] <= n:
                    run_re = mre[re_keys[ire]]
                    ire += 1
                while iim < len(im_keys) and im_keys[iim] <= n:
                    run_im = mim[im_keys[iim]]
                    iim += 1
                v = self.values[k]
                f.write(
                    f"{n},{v.real:.17g},{v.imag:.17g},"
                    f"{self.rel_changes[k]:.17g},{1 if n in ext else 0},"
                    f"{run_re:.17g},{run_im:.17g}\n"
                )
        finally:
            if close:
                f.close()


class _Kahan:
    """Compensated accumulator (complex-safe)."""

    __slots__ = ("s", "c")

    def __init__(self):
        self.s = 0.0 + 0.0j
        self.c = 0.0 + 0.0j

    def add(self, x):
        y = x - self.c
        t = self.s + y
        self.c = (t - self.s) - y
        self.s = t
        return self.s


def _rel_change(term_abs, total_abs):
    if term_abs == 0.0:
        return 0.0
    if total_abs == 0.0:
        return math.inf
    return term_abs / total_abs


def sum_absolute(term, cfg):
    """Sum term(1), term(2), ... until the trailing-window Cauchy rule holds.

    Stops at the first n >= cfg.n_min where max_k |term_k|/|S_n| over the
    last cfg.window terms is below cfg.tol.  Raises NotConverged (with
    diagnostics attached) if cfg.n_max is reached first.
    """
    if cfg.mode != "absolute":
        raise ValueError("sum_absolute requires cfg.mode == 'absolute'")
    acc = _Kahan()
    values = []
    rels = []
    window = []   # trailing |term| values; rule: max(window)/|S_n| < tol
    for n in range(1, cfg.n_max + 1):
        t = complex(term(n))
        s = acc.add(t)
        rel = _rel_change(abs(t), abs(s))
        values.append(s)
        rels.append(rel)
        window.append(abs(t))
        if len(window) > cfg.window:
            window.pop(0)
        if (
            n >= cfg.n_min
            and len(window) == cfg.window
            and _rel_change(max(window), abs(s)) < cfg.tol
        ):
            diag = _make_diag(values, rels, n, True, s, "absolute")
            return _realify(s), diag
    diag = _make_diag(values, rels, cfg.n_max, False, acc.s, "absolute")
    raise NotConverged(
        f"absolute sum not converged after {cfg.n_max} terms "
        f"(last rel change {rels[-1]:.3e}, tol {cfg.tol:g})",
        diag,
    )


def _realify(s):
    return s.real if s.imag == 0.0 else s


def _make_diag(values, rels, terms_used, converged, estimate, mode, note=""):
    vals = np.asarray(values, dtype=complex)
    return SumDiagnostics(
        indices=np.arange(1, len(values) + 1),
        values=vals,
        rel_changes=np.asarray(rels),
        terms_used=terms_used,
        converged=converged,
        estimate=_realify(complex(estimate)),
        mode=mode,
        note=note,
    )


class _CycleAverager:
    """Adaptive cycle means over an oscillating sequence.

    One full cycle is the stretch between successive downward-to-upward
    turning points of the input; the mean over each completed cycle is
    forwarded to the next level of the cascade.  A sequence carrying an
    oscillatory residual (for envelope midpoints of aliased mode sums:
    near-alternation when the term phase step approaches pi, slow beats
    in between) has that residual averaged out at whichever level first
    resolves its period, while a one-signed drift produces no turning
    points and therefore no spurious means.
    """

    _KEEP = 8       # completed-cycle means retained per level
    _SPAN = 4096    # cap on buffered values per cycle

    def __init__(self, depth):
        self.child = _CycleAverager(depth - 1) if depth > 1 else None
        self.buf = []
        self.prev = None
        self.sign = None
        self.means = []

    def feed(self, v):
        if self.prev is not None:
            d = v - self.prev
            if d != 0.0:
                up = d > 0.0
                if self.sign is not None and up and not self.sign and self.buf:
                    mu = math.fsum(self.buf) / len(self.buf)
                    self.means.append(mu)
                    if len(self.means) > self._KEEP:
                        del self.means[0]
                    if self.child is not None:
                        self.child.feed(mu)
                    self.buf = []
                self.sign = up
        self.buf.append(v)
        if len(self.buf) > self._SPAN:
            del self.buf[0]
        self.prev = v

    def report(self):
        """(estimate, drift) from the deepest level with enough cycles.

        The estimate is that level's newest cycle mean; the drift is the
        larger of its last two steps, the scale on which the estimate is
        still moving.  None when no level has completed four cycles.
        """
        if self.child is not None:
            deeper = self.child.report()
            if deeper is not None:
                return deeper
        if len(self.means) < 4:
            return None
        m = self.means
        drift = max(abs(m[-1] - m[-2]), abs(m[-2] - m[-3]))
        return m[-1], drift


class _ExtremaTracker:
    """Running extremum/midpoint detection for one real component.

    An interior index is an extremum when it exceeds (or undershoots)
    both neighbors by an absolute margin of 1e-15*|S| (jitter guard).
    After every new extremum beyond the first, the midpoint of the last
    two extremum values becomes this component's envelope estimate.

    The midpoint sequence is refined further by adaptive cycle
    averaging (see _CycleAverager): when the term phase advances by a
    sizable fraction of pi per index, the mode comb aliases the
    oscillation and the midpoints retain a residual wobble -- pure
    alternation near a phase step of pi, slow beats in between -- that
    settles far too slowly against a relative rule.  Averaging each
    completed wobble cycle, recursively, removes it order by order
    (the adaptive cousin of Euler/van Wijngaarden repeated averaging;
    Press et al., Numerical Recipes, sec. 5.3; DLMF 3.9(i)).
    """

    def __init__(self):
        self.extrema = []      # (n, value)
        self.midpoints = []    # (n, value)
        self.cycles = _CycleAverager(depth=3)
        self.deep = None       # (estimate, drift bound) from cycle means
        self.prev2 = None
        self.prev1 = None      # (n, value) of the two trailing samples

    def push(self, n, x, modulus):
        if self.prev1 is not None and self.prev2 is not None:
            n1, x1 = self.prev1
            margin = 1e-15 * modulus
            x0 = self.prev2[1]
            if (x1 - x0 > margin and x1 - x > margin) or (
                x0 - x1 > margin and x - x1 > margin
            ):
                self.extrema.append((n1, x1))
                if len(self.extrema) >= 2:
                    mid = 0.5 * (self.extrema[-1][1] + self.extrema[-2][1])
                    self.midpoints.append((n, mid))
                    self.cycles.feed(mid)
                    self.deep = self.cycles.report()
        self.prev2 = self.prev1
        self.prev1 = (n, x)

    def midpoint_settled(self, tol):
        if len(self.midpoints) < 2:
            return False
        m1, m0 = self.midpoints[-1][1], self.midpoints[-2][1]
        scale = abs(m1)
        if scale == 0.0:
            return m0 == 0.0
        return abs(m1 - m0) / scale < tol

    def deep_settled(self, tol, scale):
        """Settling of the cycle-averaged midpoints, judged against an
        external scale (the full complex estimate modulus).  Rescues
        components whose own limit is negligible against that scale but
        whose raw midpoints still carry an aliased residual oscillation.
        """
        return self.deep is not None and self.deep[1] <= tol * max(
            scale, 1e-300
        )

    def estimate(self, current):
        if self.deep is not None:
            return self.deep[0]
        return self.midpoints[-1][1] if self.midpoints else current


def _component_flat(comp_vals, n, window, tol, modulus_scale):
    """True when a component trace has stopped moving at tolerance scale.

    Rescues components with no usable oscillation (e.g. a Re part whose
    terms die off absolutely long before the Im part converges): flat
    means the trailing-window total drift is below tol relative to the
    overall estimate modulus.
    """
    if n < window + 1:
        return False
    recent = comp_vals[-(window + 1):]
    drift = max(recent) - min(recent)
    return drift <= tol * max(modulus_scale, 1e-300)


def sum_oscillatory(term, cfg):
    """Envelope-midpoint summation of an oscillatory (complex) series.

    Re and Im traces are tracked separately; each component settles when
    successive midpoint estimates agree to cfg.tol relatively, when its
    repeatedly averaged midpoints settle at the scale of the full
    complex estimate, or when its trace is flat at tolerance scale.
    Once both settle at some n, summation continues to the doubling
    checkpoint 2n and convergence requires the two estimates to agree
    within cfg.tol.  Falls back to the plain Cauchy rule when the
    series turns out not to oscillate.
    """
    if cfg.mode != "oscillatory":
        raise ValueError("sum_oscillatory requires cfg.mode == 'oscillatory'")
    acc = _Kahan()
    values = []
    rels = []
    re_vals = []
    im_vals = []
    window = []
    tre = _ExtremaTracker()
    tim = _ExtremaTracker()
    checkpoint = None   # (target_n, estimate_at_settle)
    for n in range(1, cfg.n_max + 1):
        t = complex(term(n))
        s = acc.add(t)
        mod = abs(s)
        values.append(s)
        re_vals.append(s.real)
        im_vals.append(s.imag)
        rel = _rel_change(abs(t), mod)
        rels.append(rel)
        window.append(abs(t))
        if len(window) > cfg.window:
            window.pop(0)
        tre.push(n, s.real, mod)
        tim.push(n, s.imag, mod)

        est = complex(tre.estimate(s.real), tim.estimate(s.imag))
        est_mod = abs(est)
        if checkpoint is not None and n >= checkpoint[0]:
            target, old = checkpoint
            scale = max(abs(est), abs(old), 1e-300)
            if abs(est - old) / scale < cfg.tol:
                diag = _make_diag(values, rels, n, True, est, "oscillatory")
                _attach_osc(diag, tre, tim)
                return _realify(est), diag
            checkpoint = None    # drifted: resettle

        if checkpoint is None and n >= cfg.n_min:
            re_ok = (
                tre.midpoint_settled(cfg.tol)
                or tre.deep_settled(cfg.tol, est_mod)
                or _component_flat(re_vals, n, cfg.window, cfg.tol, est_mod)
            )
            im_ok = (
                tim.midpoint_settled(cfg.tol)
                or tim.deep_settled(cfg.tol, est_mod)
                or _component_flat(im_vals, n, cfg.window, cfg.tol, est_mod)
            )
            if re_ok and im_ok:
                checkpoint = (2 * n, est)

    # n_max exhausted
    est = complex(tre.estimate(values[-1].real), tim.estimate(values[-1].imag))
    oscillated = len(tre.extrema) >= 2 or len(tim.extrema) >= 2
    if not oscillated:
        # no usable oscillation: accept if the plain Cauchy rule held
        if (
            len(window) == cfg.window
            and _rel_change(max(window), abs(values[-1])) < cfg.tol
        ):
            diag = _make_diag(
                values, rels, cfg.n_max, True, values[-1], "oscillatory",
                note="cauchy-fallback",
            )
            _attach_osc(diag, tre, tim)
            return _realify(values[-1]), diag
        diag = _make_diag(values, rels, cfg.n_max, False, est, "oscillatory")
        _attach_osc(diag, tre, tim)
        raise InsufficientOscillation(
            f"fewer than 2 extrema in {cfg.n_max} terms and Cauchy rule not met",
            diag,
        )
    diag = _make_diag(values, rels, cfg.n_max, False, est, "oscillatory")
    _attach_osc(diag, tre, tim)
    raise NotConverged(
        f"oscillatory sum not converged after {cfg.n_max} terms", diag
    )


def _attach_osc(diag, tre, tim):
    diag.extrema_re = [n for n, _ in tre.extrema]
    diag.extrema_im = [n for n, _ in tim.extrema]
    diag.midpoints_re = list(tre.midpoints)
    diag.midpoints_im = list(tim.midpoints)


def partial_sum_trace(term, n_points, spacing="linear", n_max=None):
    """Full partial-sum trace for plotting; no convergence decision.

    Evaluates every term up to n_max (default: n_points) and records the
    trace at n_points indices, evenly spaced on a linear or log axis.
    Extrema and midpoint estimates are detected on the full-resolution
    sequence; recorded (n, S_n) samples are a subset.
    """
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points!r}")
    if spacing not in ("linear", "log"):
        raise ValueError(f"spacing must be 'linear' or 'log', got {spacing!r}")
    if n_max is None:
        n_max = n_points
    if n_max < n_points:
        raise ValueError("n_max must be >= n_points")
    if spacing == "linear":
        marks = np.unique(np.round(np.linspace(1, n_max, n_points)).astype(int))
    else:
        marks = np.unique(np.round(np.geomspace(1, n_max, n_points)).astype(int))
    mark_set = set(marks.tolist())

    acc = _Kahan()
    tre = _ExtremaTracker()
    tim = _ExtremaTracker()
    idx, vals, rels = [], [], []
    for n in range(1, n_max + 1):
        t = complex(term(n))
        s = acc.add(t)
        mod = abs(s)
        tre.push(n, s.real, mod)
        tim.push(n, s.imag, mod)
        if n in mark_set:
            idx.append(n)
            vals.append(s)
            rels.append(_rel_change(abs(t), mod))
    est = complex(tre.estimate(vals[-1].real), tim.estimate(vals[-1].imag))
    diag = SumDiagnostics(
        indices=np.asarray(idx),
        values=np.asarray(vals, dtype=complex),
        rel_changes=np.asarray(rels),
        terms_used=n_max,
        converged=False,
        estimate=_realify(est),
        mode="trace",
        note="trace",
    )
    _attach_osc(diag, tre, tim)
    return diag
