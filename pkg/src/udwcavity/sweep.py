"""Parameter-grid evaluation: deterministic, resumable sweep runs.

A sweep is defined by up to two axes over the dimensionless parameters
(omega_sigma, rho0_sigma, sigma_R) with the remainder held fixed.  Grid
points violating rho0/sigma * sigma/R < 1 (the detector would sit on or
outside the wall) are filtered out before any computation.

Points are dispatched to a thread pool, but rows are written strictly
in grid order by a single consumer, so repeated runs produce
byte-identical files for any thread count.  A sidecar manifest records
the spec hash, tool version, per-point convergence flags and a
completed-point bitmap; an interrupted run resumes from the manifest
without recomputing finished rows, and the resumed file is
byte-identical to an uninterrupted one.

Unconverged sums do not abort a run: the affected entries are emitted
as NaN with the corresponding bit cleared in the converged_flags
column, which keeps density maps honest in the slowly-converging
small-sigma/R corner.
"""

import hashlib
import itertools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from . import __version__
from .measures import discord, measures_csv_header, measures_csv_row
from .response import (
    CavityConfig,
    CorrelationSet,
    DetectorParams,
    ModeCutoffs,
    m_ab,
    m_ab_trace,
    x_aa,
    x_ab,
    x_bb,
)
from .series import NotConverged

AXIS_NAMES = ("omega_sigma", "rho0_sigma", "sigma_R")
PARAM_NAMES = AXIS_NAMES + ("lam",)

_OPS = (("x_aa", x_aa), ("x_bb", x_bb), ("x_ab", x_ab), ("m_ab", m_ab))

_NAN_MEASURES = SimpleNamespace(
    negativity_exact=math.nan,
    negativity_pert=math.nan,
    mutual_info=math.nan,
    classical_j=math.nan,
    discord=math.nan,
    s1=math.nan,
    s2=math.nan,
)


# ---------------------------------------------------------------------------
# axes and sweep specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Axis:
    """One sweep axis: a dimensionless parameter and its grid values."""

    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(
                f"axis name must be one of {AXIS_NAMES}, got {self.name!r}"
            )
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 1:
            raise ValueError(f"axis {self.name} is empty")
        if any(not math.isfinite(v) or v <= 0 for v in vals):
            raise ValueError(f"axis {self.name} values must be finite and > 0")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError(f"axis {self.name} must be strictly increasing")
        object.__setattr__(self, "values", vals)


def linear_axis(name, lo, hi, n):
    """Axis of n evenly spaced values on [lo, hi]."""
    return Axis(name, tuple(np.linspace(float(lo), float(hi), int(n)).tolist()))


def log_axis(name, lo, hi, n):
    """Axis of n logarithmically spaced values on [lo, hi]."""
    return Axis(name, tuple(np.geomspace(float(lo), float(hi), int(n)).tolist()))


def list_axis(name, values):
    """Axis from an explicit value list (the sigma_R convention)."""
    return Axis(name, tuple(float(v) for v in values))


@dataclass
class SweepSpec:
    """Grid definition: axes, fixed parameters, cutoffs and output."""

    axes: tuple
    fixed: dict
    cutoffs: ModeCutoffs
    out_path: str
    fmt: str = "csv"

    def validate(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValueError(f"need 1 or 2 axes, got {len(self.axes)}")
        names = [ax.name for ax in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis parameter in {names}")
        covered = set(names) | set(self.fixed)
        if covered != set(PARAM_NAMES) or set(names) & set(self.fixed):
            raise ValueError(
                f"axes + fixed must cover {PARAM_NAMES} exactly once each; "
                f"axes={names}, fixed={sorted(self.fixed)}"
            )
        for k, v in self.fixed.items():
            if not math.isfinite(float(v)):
                raise ValueError(f"fixed {k} must be finite, got {v!r}")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be 'csv' or 'json', got {self.fmt!r}")
        if not self.out_path:
            raise ValueError("out_path is required")
        if not grid_points(self):
            raise ValueError(
                "empty grid: every point violates rho0/sigma * sigma/R < 1"
            )
        return self


def grid_points(spec):
    """Filtered grid in row-major axis order (first axis slowest).

    Each point is a (omega_sigma, rho0_sigma, sigma_R, lam) tuple;
    combinations with rho0_sigma * sigma_R >= 1 are dropped.
    """
    pts = []
    for combo in itertools.product(*(ax.values for ax in spec.axes)):
        p = dict(spec.fixed)
        for ax, v in zip(spec.axes, combo):
            p[ax.name] = v
        if p["rho0_sigma"] * p["sigma_R"] < 1.0:
            pts.append(
                (
                    float(p["omega_sigma"]),
                    float(p["rho0_sigma"]),
                    float(p["sigma_R"]),
                    float(p["lam"]),
                )
            )
    return pts


def spec_hash(spec):
    """sha256 over a canonical text form of the physics content.

    The output path is deliberately excluded: moving a run does not
    invalidate its manifest.
    """
    parts = [f"format={spec.fmt}"]
    c = spec.cutoffs
    parts.append(
        f"cutoffs={c.n_max_x},{c.m_max},{c.n_max_m},{c.tol:.17g}"
    )
    for ax in spec.axes:
        parts.append(
            "axis:%s=%s" % (ax.name, ",".join("%.17g" % v for v in ax.values))
        )
    for k in sorted(spec.fixed):
        parts.append("fixed:%s=%.17g" % (k, float(spec.fixed[k])))
    return hashlib.sha256("\n".join(parts).encode("ascii")).hexdigest()


# ---------------------------------------------------------------------------
# run manifest
# ---------------------------------------------------------------------------

@dataclass
class RunManifest:
    """Provenance and resume state of one sweep run."""

    spec_hash: str
    version: str
    grid_size: int
    bitmap: str
    flags: list
    wall_time: float = 0.0
    notes: dict = field(default_factory=dict)

    def validate(self):
        if len(self.bitmap) != self.grid_size:
            raise ValueError(
                f"bitmap length {len(self.bitmap)} != grid size {self.grid_size}"
            )
        if set(self.bitmap) - {"0", "1"}:
            raise ValueError("bitmap must be a 0/1 string")
        if len(self.flags) != self.n_done:
            raise ValueError(
                f"{len(self.flags)} flag entries for {self.n_done} done points"
            )
        return self

    @property
    def n_done(self):
        return self.bitmap.count("1")

    def save(self, path):
        doc = {
            "spec_hash": self.spec_hash,
            "version": self.version,
            "grid_size": self.grid_size,
            "bitmap": self.bitmap,
            "flags": list(self.flags),
            "wall_time": self.wall_time,
            "notes": self.notes,
        }
        with open(path, "w", newline="\n") as f:
            json.dump(doc, f, indent=1, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as f:
            doc = json.load(f)
        return cls(
            spec_hash=doc["spec_hash"],
            version=doc["version"],
            grid_size=int(doc["grid_size"]),
            bitmap=doc["bitmap"],
            flags=list(doc["flags"]),
            wall_time=float(doc.get("wall_time", 0.0)),
            notes=dict(doc.get("notes", {})),
        ).validate()


def manifest_path(out_path):
    base, _ = os.path.splitext(out_path)
    return base + ".manifest.json"


# ---------------------------------------------------------------------------
# single-point evaluation
# ---------------------------------------------------------------------------

def eval_point(omega_sigma, rho0_sigma, sigma_R, lam, cut=None):
    """CorrelationSet and CorrelationMeasures at one dimensionless point.

    Works in the sigma = 1 embedding (omega = omega_sigma, rho0 =
    rho0_sigma, R = 1/sigma_R); every exported quantity depends on the
    parameters only through the dimensionless combinations.  Any sum
    that exhausts its cap yields NaN for that entry (flag bit 0) and
    NaN measures, rather than aborting.
    """
    cut = cut or ModeCutoffs()
    det = DetectorParams(omega=float(omega_sigma), sigma=1.0, lam=float(lam))
    cav = CavityConfig(radius=1.0 / float(sigma_R), rho0=float(rho0_sigma))
    vals = {}
    diags = {}
    for key, op in _OPS:
        try:
            v, d = op(det, cav, cut)
        except NotConverged as exc:
            v, d = math.nan, exc.diagnostics
        vals[key] = v
        diags[key] = d
    cs = CorrelationSet(
        x_aa=vals["x_aa"],
        x_bb=vals["x_bb"],
        x_ab=vals["x_ab"],
        m_ab=complex(vals["m_ab"]),
        diagnostics=diags,
        det=det,
        cav=cav,
        cut=cut,
    )
    if cs.all_converged:
        cs.validate()
        meas = discord(cs)
    else:
        meas = _NAN_MEASURES
    return cs, meas


def _format_row(point, cs, meas, fmt):
    om, r0, sr, lam = point
    row = measures_csv_row(om, r0, sr, lam, cs, meas)
    if fmt == "csv":
        return row
    keys = measures_csv_header().split(",")
    cells = row.split(",")
    doc = {k: c if k == "converged_flags" else float(c) for k, c in zip(keys, cells)}
    return json.dumps(doc, sort_keys=False)


def _row_for(point, spec):
    cs, meas = eval_point(*point, cut=spec.cutoffs)
    return _format_row(point, cs, meas, spec.fmt), cs.converged_flags


def _read_rows(path, fmt):
    """Existing data rows (no header, no trailing newline per row)."""
    if not os.path.exists(path):
        return []
    with open(path, newline="") as f:
        lines = f.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if fmt == "csv":
        if not lines or lines[0] != measures_csv_header():
            raise ValueError(f"{path} does not start with the measures header")
        return lines[1:]
    return lines


# ---------------------------------------------------------------------------
# the sweep runner
# ---------------------------------------------------------------------------

def run_sweep(spec, threads=1, resume=False, interrupt_after=None):
    """Evaluate the grid and write rows in grid order; returns the manifest.

    With resume=True an existing manifest is trusted: its prefix of
    rows is kept verbatim (the data file is rewritten to exactly that
    prefix, discarding any partial tail) and only the remaining points
    are computed.  interrupt_after stops the run cleanly after that
    many newly written rows; the manifest then allows resumption.
    """
    spec.validate()
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads!r}")
    points = grid_points(spec)
    h = spec_hash(spec)
    mpath = manifest_path(spec.out_path)

    kept = []
    flags = []
    wall_prev = 0.0
    if resume and os.path.exists(mpath):
        man = RunManifest.load(mpath)
        if man.spec_hash != h:
            raise ValueError(
                f"manifest {mpath} belongs to a different spec "
                f"({man.spec_hash[:12]} != {h[:12]})"
            )
        if man.grid_size != len(points):
            raise ValueError(
                f"manifest grid size {man.grid_size} != {len(points)}"
            )
        rows = _read_rows(spec.out_path, spec.fmt)
        if len(rows) < man.n_done:
            raise ValueError(
                f"{spec.out_path} holds {len(rows)} rows but the manifest "
                f"records {man.n_done} completed points"
            )
        kept = rows[: man.n_done]
        flags = list(man.flags)
        wall_prev = man.wall_time

    n_done = len(kept)
    man = RunManifest(
        spec_hash=h,
        version=__version__,
        grid_size=len(points),
        bitmap="1" * n_done + "0" * (len(points) - n_done),
        flags=flags,
        wall_time=wall_prev,
    )

    t0 = time.perf_counter()
    written = 0
    with open(spec.out_path, "w", newline="\n") as f:
        if spec.fmt == "csv":
            f.write(measures_csv_header() + "\n")
        for r in kept:
            f.write(r + "\n")
        f.flush()
        todo = points[n_done:]
        if todo and (interrupt_after is None or interrupt_after > 0):
            ex = ThreadPoolExecutor(max_workers=threads)
            try:
                futs = [ex.submit(_row_for, p, spec) for p in todo]
                for fut in futs:
                    row, fl = fut.result()
                    f.write(row + "\n")
                    f.flush()
                    flags.append(fl)
                    n_done += 1
                    written += 1
                    man.bitmap = "1" * n_done + "0" * (len(points) - n_done)
                    man.wall_time = wall_prev + (time.perf_counter() - t0)
                    man.save(mpath)
                    if interrupt_after is not None and written >= interrupt_after:
                        break
            finally:
                ex.shutdown(wait=True, cancel_futures=True)
    man.wall_time = wall_prev + (time.perf_counter() - t0)
    man.save(mpath)
    return man.validate()


# ---------------------------------------------------------------------------
# density grids: zero contour of the entanglement gap + free-space overlay
# ---------------------------------------------------------------------------

def marching_squares(xs, ys, z, level=0.0):
    """Level-set segments of a scalar field on a rectilinear grid.

    Standard 16-case square lookup with linear edge interpolation;
    the two ambiguous saddle configurations are disambiguated by the
    cell-center average.  Cells with a NaN corner are skipped.  Returns
    ((x0, y0), (x1, y1)) segment pairs in cell-scan order, where x runs
    over xs (first index of z) and y over ys (second index).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.shape != (len(xs), len(ys)):
        raise ValueError(f"z shape {z.shape} != ({len(xs)}, {len(ys)})")

    def cross(pa, pb, va, vb):
        t = (level - va) / (vb - va)
        return (pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]))

    segs = []
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            a = (xs[i], ys[j])
            b = (xs[i + 1], ys[j])
            c = (xs[i + 1], ys[j + 1])
            d = (xs[i], ys[j + 1])
            za, zb = z[i, j], z[i + 1, j]
            zc, zd = z[i + 1, j + 1], z[i, j + 1]
            if any(math.isnan(v) for v in (za, zb, zc, zd)):
                continue
            case = (
                (za > level)
                | (zb > level) << 1
                | (zc > level) << 2
                | (zd > level) << 3
            )
            if case in (0, 15):
                continue
            e0 = lambda: cross(a, b, za, zb)
            e1 = lambda: cross(b, c, zb, zc)
            e2 = lambda: cross(c, d, zc, zd)
            e3 = lambda: cross(d, a, zd, za)
            if case in (1, 14):
                segs.append((e0(), e3()))
            elif case in (2, 13):
                segs.append((e0(), e1()))
            elif case in (3, 12):
                segs.append((e1(), e3()))
            elif case in (4, 11):
                segs.append((e1(), e2()))
            elif case in (6, 9):
                segs.append((e0(), e2()))
            elif case in (7, 8):
                segs.append((e2(), e3()))
            elif case == 5:
                if 0.25 * (za + zb + zc + zd) > level:
                    segs.append((e0(), e1()))
                    segs.append((e2(), e3()))
                else:
                    segs.append((e0(), e3()))
                    segs.append((e1(), e2()))
            else:  # case 10, the mirrored saddle
                if 0.25 * (za + zb + zc + zd) > level:
                    segs.append((e0(), e3()))
                    segs.append((e1(), e2()))
                else:
                    segs.append((e0(), e1()))
                    segs.append((e2(), e3()))
    return segs


def _parse_numeric_rows(path, fmt):
    """Rows back as dicts keyed by the measures columns."""
    keys = measures_csv_header().split(",")
    out = []
    for line in _read_rows(path, fmt):
        if fmt == "csv":
            cells = line.split(",")
            doc = {
                k: c if k == "converged_flags" else float(c)
                for k, c in zip(keys, cells)
            }
        else:
            doc = json.loads(line)
        out.append(doc)
    return out


def entanglement_gap_grid(spec, rows):
    """|M|^2 - X_AA X_BB over the 2-axis grid (NaN where filtered/dead).

    The gap is the signed quantity whose zero set is the entanglement
    boundary: the partial-transpose eigenvalue e'_- is negative exactly
    where the gap is positive, so a sign change marks the sudden-death
    contour even though the negativity itself is clamped at 0 outside.
    """
    a0, a1 = spec.axes
    z = np.full((len(a0.values), len(a1.values)), math.nan)
    it = iter(rows)
    for i, v0 in enumerate(a0.values):
        for j, v1 in enumerate(a1.values):
            p = dict(spec.fixed)
            p[a0.name] = v0
            p[a1.name] = v1
            if p["rho0_sigma"] * p["sigma_R"] >= 1.0:
                continue
            r = next(it)
            z[i, j] = (
                r["m_ab_re"] ** 2
                + r["m_ab_im"] ** 2
                - r["x_aa"] * r["x_bb"]
            )
    return z


def contour_path(out_path):
    base, _ = os.path.splitext(out_path)
    return base + ".contour.csv"


def overlay_path(out_path):
    base, _ = os.path.splitext(out_path)
    return base + ".free.csv"


def density_run(spec, threads=1, resume=False, interrupt_after=None,
                overlay_tol=1e-6):
    """2-axis sweep plus zero-contour and free-space overlay artifacts.

    Runs the grid through run_sweep, extracts the marching-squares zero
    contour of the entanglement gap into <out>.contour.csv, and (when
    rho0_sigma is one of the axes) writes the free-space boundary at
    the same omega_sigma values to <out>.free.csv, scanning d/sigma
    over the rho0_sigma axis values.  An interrupted (partial) run
    skips the contour stage; resume and complete it first.
    """
    spec.validate()
    if len(spec.axes) != 2:
        raise ValueError(f"density needs exactly 2 axes, got {len(spec.axes)}")
    if any(len(ax.values) < 2 for ax in spec.axes):
        raise ValueError("density axes need >= 2 values each")
    man = run_sweep(
        spec, threads=threads, resume=resume, interrupt_after=interrupt_after
    )
    if man.n_done < man.grid_size:
        man.notes["contour"] = "skipped (partial run)"
        man.save(manifest_path(spec.out_path))
        return man

    rows = _parse_numeric_rows(spec.out_path, spec.fmt)
    z = entanglement_gap_grid(spec, rows)
    a0, a1 = spec.axes
    segs = marching_squares(a0.values, a1.values, z)
    cpath = contour_path(spec.out_path)
    with open(cpath, "w", newline="\n") as f:
        f.write(f"{a0.name}_a,{a1.name}_a,{a0.name}_b,{a1.name}_b\n")
        for (x0, y0), (x1, y1) in segs:
            f.write(f"{x0:.17g},{y0:.17g},{x1:.17g},{y1:.17g}\n")
    man.notes["contour_segments"] = len(segs)
    man.notes["contour_empty"] = not segs

    axis_names = {ax.name for ax in spec.axes}
    if "rho0_sigma" in axis_names:
        from .freespace import boundary_csv_lines, free_negativity_boundary

        if "omega_sigma" in axis_names:
            om = next(ax.values for ax in spec.axes if ax.name == "omega_sigma")
        else:
            om = (spec.fixed["omega_sigma"],)
        dd = next(ax.values for ax in spec.axes if ax.name == "rho0_sigma")
        pts = free_negativity_boundary(
            om, dd, lam=spec.fixed["lam"], tol=overlay_tol
        )
        opath = overlay_path(spec.out_path)
        with open(opath, "w", newline="\n") as f:
            for line in boundary_csv_lines(pts):
                f.write(line + "\n")
        man.notes["free_overlay"] = os.path.basename(opath)
    man.save(manifest_path(spec.out_path))
    return man


# ---------------------------------------------------------------------------
# convergence traces and the mode table
# ---------------------------------------------------------------------------

def _subsample_diag(diag, n_points, spacing):
    """Diagnostics restricted to ~n_points trace indices (full-res extrema)."""
    from .series import SumDiagnostics

    n = len(diag.indices)
    if spacing == "linear":
        marks = np.unique(np.round(np.linspace(1, n, n_points)).astype(int))
    else:
        marks = np.unique(np.round(np.geomspace(1, n, n_points)).astype(int))
    sel = marks - 1
    sub = SumDiagnostics(
        indices=diag.indices[sel],
        values=diag.values[sel],
        rel_changes=diag.rel_changes[sel],
        extrema_re=list(diag.extrema_re),
        extrema_im=list(diag.extrema_im),
        midpoints_re=list(diag.midpoints_re),
        midpoints_im=list(diag.midpoints_im),
        terms_used=diag.terms_used,
        converged=diag.converged,
        estimate=diag.estimate,
        mode=diag.mode,
        note=(diag.note + "+subsampled").lstrip("+"),
    )
    return sub


def summary_path(out_path):
    base, _ = os.path.splitext(out_path)
    return base + ".summary.json"


def converge_trace(omega_sigma, rho0_sigma, sigma_R, lam, cut, n_points,
                   spacing, out_path, quantity="m_ab"):
    """Partial-sum trace CSV plus a JSON summary; returns the summary dict.

    quantity "m_ab" runs the oscillatory estimator to its stopping
    point, then re-traces the identical term sequence at ~n_points
    sampled indices (clamped to the terms actually used) with extrema
    and midpoint estimates tracked at full resolution.  quantity "x_aa"
    writes the absolutely convergent series' own trace, subsampled the
    same way.  An unconverged run still writes its trace, with
    converged false in the summary.
    """
    if quantity not in ("m_ab", "x_aa"):
        raise ValueError(f"quantity must be 'm_ab' or 'x_aa', got {quantity!r}")
    if spacing not in ("linear", "log"):
        raise ValueError(f"spacing must be 'linear' or 'log', got {spacing!r}")
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points!r}")
    cut = cut or ModeCutoffs()
    det = DetectorParams(omega=float(omega_sigma), sigma=1.0, lam=float(lam))
    cav = CavityConfig(radius=1.0 / float(sigma_R), rho0=float(rho0_sigma))

    op = m_ab if quantity == "m_ab" else x_aa
    try:
        _, diag = op(det, cav, cut)
    except NotConverged as exc:
        diag = exc.diagnostics

    npts = max(2, min(n_points, diag.terms_used))
    if quantity == "m_ab":
        trace = m_ab_trace(
            det, cav, npts, spacing=spacing, n_max=diag.terms_used, cut=cut
        )
    else:
        trace = _subsample_diag(diag, npts, spacing)
    trace.write_csv(out_path)

    est = complex(diag.estimate)
    summary = {
        "version": __version__,
        "quantity": quantity,
        "omega_sigma": float(omega_sigma),
        "rho0_sigma": float(rho0_sigma),
        "sigma_R": float(sigma_R),
        "lambda": float(lam),
        "cutoffs": {
            "n_max_x": cut.n_max_x,
            "m_max": cut.m_max,
            "n_max_m": cut.n_max_m,
            "tol": cut.tol,
        },
        "n_points": int(npts),
        "spacing": spacing,
        "terms_used": int(diag.terms_used),
        "converged": bool(diag.converged),
        "estimate_re": est.real,
        "estimate_im": est.imag,
        "note": diag.note,
        "trace_rows": int(len(trace.indices)),
    }
    with open(summary_path(out_path), "w", newline="\n") as f:
        json.dump(summary, f, indent=1, sort_keys=True)
        f.write("\n")
    return summary


MODES_CSV_COLUMNS = ("m", "n", "xi_mn")


def modes_table(m_max, n_max, out_path):
    """Bessel-zero table export with an interlacing self-check.

    Writes one row per (m, n) with xi_mn at full precision, verifying
    xi_{m,n} < xi_{m+1,n} < xi_{m,n+1} (the classical interlacing of
    J_m and J_{m+1} zeros) across the table before anything is emitted.
    """
    from .specfun import bessel_zeros

    if m_max < 0 or n_max < 1:
        raise ValueError(f"need m_max >= 0 and n_max >= 1")
    tables = [bessel_zeros(m, n_max) for m in range(m_max + 2)]
    for m in range(m_max + 1):
        lo, hi = tables[m], tables[m + 1]
        if not np.all(lo < hi) or not np.all(hi[:-1] < lo[1:]):
            raise RuntimeError(f"zero interlacing violated between m={m}, {m+1}")
    with open(out_path, "w", newline="\n") as f:
        f.write(",".join(MODES_CSV_COLUMNS) + "\n")
        for m in range(m_max + 1):
            for n in range(1, n_max + 1):
                f.write(f"{m},{n},{tables[m][n - 1]:.17g}\n")
    return (m_max + 1) * n_max
