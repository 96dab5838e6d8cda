"""Command-line front end: points, sweeps, density maps, traces, modes.

Subcommands
-----------
point               one parameter point, printed as a provenance block
sweep               1D/2D grid of correlation measures (CSV/JSON rows)
density             2-axis grid plus zero-negativity contour + overlay
converge            partial-sum trace of one series (CSV + JSON summary)
modes               Bessel-zero table export
freespace-boundary  free-space entanglement boundary curve

Parameter flags accept a single value (fixed), and where a parameter
can be a sweep axis also a grid form: --omega-sigma and --rho0-sigma
take lo:hi:n[:lin|log] ranges, --sigma-r takes a comma-separated list.
A flat key=value config file (--config) supplies defaults; explicit
command-line flags win over the file.

CSV output uses '.' decimals, LF line endings and 17 significant
digits.  Exit codes: 0 success, 1 compute failure (including
non-convergence without --allow-unconverged), 2 validation error.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import __version__, kernels
from .freespace import (
    QuadratureFailure,
    boundary_csv_lines,
    free_negativity_boundary,
)
from .measures import InvalidState, measures_csv_header, measures_csv_row
from .response import ModeCutoffs
from .series import NotConverged
from .sweep import (
    Axis,
    SweepSpec,
    converge_trace,
    contour_path,
    density_run,
    eval_point,
    manifest_path,
    modes_table,
    overlay_path,
    run_sweep,
    summary_path,
)

AXIS_PARAMS = ("omega_sigma", "rho0_sigma", "sigma_R")


# ---------------------------------------------------------------------------
# scan-spec and config parsing
# ---------------------------------------------------------------------------

def parse_scan(name, text, allow_range, allow_list):
    """Value tuple from a flag string.

    'v' -> (v,); 'lo:hi:n[:lin|log]' -> range grid; 'a,b,c' -> list.
    Which grid forms are allowed depends on the parameter.
    """
    text = str(text).strip()
    if ":" in text:
        if not allow_range:
            raise ValueError(
                f"{name} takes a single value or a comma list, not a range"
            )
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ValueError(
                f"{name}: range must be lo:hi:n or lo:hi:n:lin|log, got {text!r}"
            )
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        spacing = parts[3] if len(parts) == 4 else "lin"
        if spacing not in ("lin", "log"):
            raise ValueError(f"{name}: spacing must be lin or log, got {spacing!r}")
        if n < 1:
            raise ValueError(f"{name}: need n >= 1 points, got {n}")
        if not lo < hi and n > 1:
            raise ValueError(f"{name}: need lo < hi, got {lo} >= {hi}")
        if spacing == "log":
            if lo <= 0:
                raise ValueError(f"{name}: log ranges need lo > 0")
            vals = np.geomspace(lo, hi, n)
        else:
            vals = np.linspace(lo, hi, n)
        return tuple(float(v) for v in vals)
    if "," in text:
        if not allow_list:
            raise ValueError(
                f"{name} takes a single value or lo:hi:n[:lin|log], not a list"
            )
        vals = tuple(float(p) for p in text.split(",") if p.strip())
        if not vals:
            raise ValueError(f"{name}: empty list")
        return vals
    return (float(text),)


def load_config(path):
    """Flat key=value pairs; '#' comments and blank lines ignored."""
    out = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            out[key.strip().replace("-", "_")] = val.strip()
    return out


_CONFIG_BOOL = ("resume", "allow_unconverged")


def _merge_config(args):
    """Fill unset argument fields from the config file (flags win)."""
    if not getattr(args, "config", None):
        return
    cfg = load_config(args.config)
    for key, val in cfg.items():
        if key == "lambda":
            key = "lam"
        if not hasattr(args, key):
            raise ValueError(f"unknown config key {key!r}")
        if key in _CONFIG_BOOL:
            if not getattr(args, key):
                setattr(args, key, val.lower() in ("1", "true", "yes"))
        elif getattr(args, key) is None:
            setattr(args, key, val)


def _scan_params(args):
    """The three scan-able parameters as value tuples (defaults applied)."""
    defaults = {"omega_sigma": None, "rho0_sigma": None, "sigma_R": None}
    raw = {
        "omega_sigma": args.omega_sigma,
        "rho0_sigma": args.rho0_sigma,
        "sigma_R": args.sigma_r,
    }
    out = {}
    for name, text in raw.items():
        if text is None:
            out[name] = defaults[name]
            continue
        allow_range = name in ("omega_sigma", "rho0_sigma")
        out[name] = parse_scan(name, text, allow_range, not allow_range)
    return out


def _cutoffs(args):
    return ModeCutoffs(
        n_max_x=int(args.nmax_x) if args.nmax_x is not None else 2000,
        m_max=int(args.mmax) if args.mmax is not None else 30,
        n_max_m=int(args.nmax_m) if args.nmax_m is not None else 200000,
        tol=float(args.tol) if args.tol is not None else 1e-3,
    )


def _lam(args):
    return float(args.lam) if args.lam is not None else 0.1


def _threads(args):
    n = int(args.threads) if args.threads is not None else 1
    if n < 1:
        raise ValueError(f"--threads must be >= 1, got {n}")
    return n


def _require_single(params, names):
    vals = {}
    for name in names:
        v = params.get(name)
        if v is None:
            raise ValueError(f"--{name.replace('_', '-').replace('R', 'r')} is required")
        if len(v) != 1:
            raise ValueError(f"{name} must be a single value here, got {len(v)}")
        vals[name] = v[0]
    return vals


def _build_spec(args, params, need_axes):
    """SweepSpec from the parsed scan parameters (canonical axis order)."""
    for name in AXIS_PARAMS:
        if params[name] is None:
            raise ValueError(
                f"--{name.replace('_', '-').replace('R', 'r')} is required"
            )
    axes = []
    fixed = {"lam": _lam(args)}
    for name in AXIS_PARAMS:
        vals = params[name]
        if len(vals) > 1:
            axes.append(Axis(name, vals))
        else:
            fixed[name] = vals[0]
    if len(axes) not in need_axes:
        want = " or ".join(str(n) for n in sorted(need_axes))
        raise ValueError(f"this command needs {want} swept axes, got {len(axes)}")
    if not args.out:
        raise ValueError("--out is required")
    fmt = args.format if args.format is not None else "csv"
    return SweepSpec(
        axes=tuple(axes),
        fixed=fixed,
        cutoffs=_cutoffs(args),
        out_path=args.out,
        fmt=fmt,
    ).validate()


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------

def cmd_point(args):
    params = _scan_params(args)
    vals = _require_single(params, AXIS_PARAMS)
    if vals["rho0_sigma"] * vals["sigma_R"] >= 1.0:
        raise ValueError(
            "rho0/sigma * sigma/R must be < 1 (detector on or outside the wall)"
        )
    cut = _cutoffs(args)
    lam = _lam(args)
    t0 = time.perf_counter()
    cs, meas = eval_point(
        vals["omega_sigma"], vals["rho0_sigma"], vals["sigma_R"], lam, cut
    )
    wall = time.perf_counter() - t0

    m = complex(cs.m_ab)
    block = [
        ("version", __version__),
        ("kernels", kernels.backend_name),
        ("omega_sigma", "%.17g" % vals["omega_sigma"]),
        ("rho0_sigma", "%.17g" % vals["rho0_sigma"]),
        ("sigma_R", "%.17g" % vals["sigma_R"]),
        ("lambda", "%.17g" % lam),
        ("nmax_x", cut.n_max_x),
        ("mmax", cut.m_max),
        ("nmax_m", cut.n_max_m),
        ("tol", "%.17g" % cut.tol),
        ("x_aa", "%.17g" % cs.x_aa),
        ("x_bb", "%.17g" % cs.x_bb),
        ("x_ab", "%.17g" % np.real(cs.x_ab)),
        ("m_ab_re", "%.17g" % m.real),
        ("m_ab_im", "%.17g" % m.imag),
        ("neg_exact", "%.17g" % meas.negativity_exact),
        ("neg_pert", "%.17g" % meas.negativity_pert),
        ("mutual_info", "%.17g" % meas.mutual_info),
        ("classical_j", "%.17g" % meas.classical_j),
        ("discord", "%.17g" % meas.discord),
        ("s1", "%.17g" % meas.s1),
        ("s2", "%.17g" % meas.s2),
        ("converged_flags", cs.converged_flags),
    ]
    block += [
        (f"terms_{k}", int(d.terms_used))
        for k, d in sorted(cs.diagnostics.items())
    ]
    block.append(("wall_seconds", "%.3f" % wall))
    for key, val in block:
        print(f"{key}={val}")

    if args.out:
        fmt = args.format if args.format is not None else "csv"
        with open(args.out, "w", newline="\n") as f:
            if fmt == "csv":
                f.write(measures_csv_header() + "\n")
                f.write(
                    measures_csv_row(
                        vals["omega_sigma"], vals["rho0_sigma"],
                        vals["sigma_R"], lam, cs, meas,
                    )
                    + "\n"
                )
            else:
                json.dump(dict(block), f, indent=1)
                f.write("\n")

    if not cs.all_converged and not args.allow_unconverged:
        print(
            f"error: unconverged sums (flags {cs.converged_flags}); "
            "rerun with --allow-unconverged to accept",
            file=sys.stderr,
        )
        return 1
    return 0


def _interrupt_after(args):
    return int(args.interrupt_after) if args.interrupt_after is not None else None


def _finish_grid_run(args, man, spec):
    n_filtered = 0
    full = 1
    for ax in spec.axes:
        full *= len(ax.values)
    n_filtered = full - man.grid_size
    print(f"wrote {spec.out_path} ({man.n_done}/{man.grid_size} rows"
          + (f"; {n_filtered} filtered by rho0*sigma_R constraint" if n_filtered else "")
          + f"), manifest {manifest_path(spec.out_path)}")
    if man.n_done < man.grid_size:
        print(f"interrupted after {man.n_done} rows; rerun with --resume to finish")
        return 0
    bad = sum(1 for fl in man.flags if fl != "1111")
    if bad:
        print(f"warning: {bad} unconverged grid points (NaN sentinel rows)",
              file=sys.stderr)
        if not args.allow_unconverged:
            return 1
    return 0


def cmd_sweep(args):
    params = _scan_params(args)
    spec = _build_spec(args, params, need_axes={1, 2})
    man = run_sweep(
        spec,
        threads=_threads(args),
        resume=args.resume,
        interrupt_after=_interrupt_after(args),
    )
    return _finish_grid_run(args, man, spec)


def cmd_density(args):
    params = _scan_params(args)
    if params["omega_sigma"] is None:
        params["omega_sigma"] = parse_scan("omega_sigma", "0.05:3:40:log", True, False)
    if params["rho0_sigma"] is None:
        params["rho0_sigma"] = parse_scan("rho0_sigma", "0.1:5:40:log", True, False)
    spec = _build_spec(args, params, need_axes={2})
    man = density_run(
        spec,
        threads=_threads(args),
        resume=args.resume,
        interrupt_after=_interrupt_after(args),
    )
    rc = _finish_grid_run(args, man, spec)
    if man.n_done == man.grid_size:
        if man.notes.get("contour_empty"):
            print(f"contour: empty (no zero crossing on grid) -> "
                  f"{contour_path(spec.out_path)}")
        else:
            print(f"contour: {man.notes['contour_segments']} segments -> "
                  f"{contour_path(spec.out_path)}")
        if "free_overlay" in man.notes:
            print(f"free-space overlay -> {overlay_path(spec.out_path)}")
    return rc


def cmd_converge(args):
    params = _scan_params(args)
    vals = _require_single(params, AXIS_PARAMS)
    if vals["rho0_sigma"] * vals["sigma_R"] >= 1.0:
        raise ValueError(
            "rho0/sigma * sigma/R must be < 1 (detector on or outside the wall)"
        )
    if not args.out:
        raise ValueError("--out is required")
    spacing = {"lin": "linear", "linear": "linear", "log": "log"}.get(args.spacing)
    if spacing is None:
        raise ValueError(f"--spacing must be linear or log, got {args.spacing!r}")
    summary = converge_trace(
        vals["omega_sigma"], vals["rho0_sigma"], vals["sigma_R"], _lam(args),
        _cutoffs(args), int(args.n_points), spacing, args.out,
        quantity=args.quantity,
    )
    print(f"wrote {args.out} ({summary['trace_rows']} rows), "
          f"summary {summary_path(args.out)}")
    print(f"terms_used={summary['terms_used']} converged={summary['converged']} "
          f"estimate={summary['estimate_re']:.6g}{summary['estimate_im']:+.6g}j")
    if not summary["converged"] and not args.allow_unconverged:
        print("error: series not converged within caps; "
              "rerun with --allow-unconverged to accept", file=sys.stderr)
        return 1
    return 0


def cmd_modes(args):
    if not args.out:
        raise ValueError("--out is required")
    m_max = int(args.mmax) if args.mmax is not None else 30
    n_max = int(args.nmax_x) if args.nmax_x is not None else 100
    n_rows = modes_table(m_max, n_max, args.out)
    print(f"wrote {args.out} ({n_rows} rows, m <= {m_max}, n <= {n_max}; "
          "interlacing verified)")
    return 0


def cmd_freespace_boundary(args):
    params = _scan_params(args)
    om = params["omega_sigma"] or parse_scan(
        "omega_sigma", "0.05:3:25:log", True, False
    )
    dd = params["rho0_sigma"] or parse_scan(
        "rho0_sigma", "0.1:10:60:log", True, False
    )
    if len(dd) < 2:
        raise ValueError("--rho0-sigma must be a scan grid (>= 2 points) here")
    tol = float(args.tol) if args.tol is not None else 1e-6
    pts = free_negativity_boundary(om, dd, lam=_lam(args), tol=tol)
    lines = boundary_csv_lines(pts)
    if args.out:
        with open(args.out, "w", newline="\n") as f:
            for line in lines:
                f.write(line + "\n")
        n_ok = sum(1 for p in pts if p.flag == "ok")
        print(f"wrote {args.out} ({len(pts)} rows, {n_ok} bracketed crossings)")
    else:
        for line in lines:
            print(line)
    return 0


# ---------------------------------------------------------------------------
# parser assembly and entry point
# ---------------------------------------------------------------------------

def _add_common(sp, scans=True, cutoffs=True, io=True, run=True):
    if scans:
        sp.add_argument("--omega-sigma", metavar="SPEC",
                        help="detector gap times sigma; value or lo:hi:n[:lin|log]")
        sp.add_argument("--rho0-sigma", metavar="SPEC",
                        help="detector separation over sigma; value or range")
        sp.add_argument("--sigma-r", metavar="SPEC",
                        help="sigma over cavity radius; value or comma list")
        sp.add_argument("--lambda", dest="lam", metavar="L",
                        help="coupling strength (default 0.1)")
    if cutoffs:
        sp.add_argument("--tol", metavar="T",
                        help="relative stopping tolerance (default 1e-3)")
        sp.add_argument("--nmax-x", metavar="N",
                        help="radial cap of the X series (default 2000)")
        sp.add_argument("--nmax-m", metavar="N",
                        help="radial cap of the M series (default 200000)")
        sp.add_argument("--mmax", metavar="M",
                        help="azimuthal cap of the X_BB sum (default 30)")
    if io:
        sp.add_argument("--format", choices=("csv", "json"),
                        help="row format (default csv; json = one object per line)")
        sp.add_argument("--out", metavar="PATH", help="output file")
    if run:
        sp.add_argument("--threads", metavar="N",
                        help="worker threads for grid points (default 1)")
        sp.add_argument("--resume", action="store_true",
                        help="continue an interrupted run from its manifest")
        sp.add_argument("--allow-unconverged", action="store_true",
                        help="exit 0 even when sums hit their caps")
        sp.add_argument("--interrupt-after", metavar="N", help=argparse.SUPPRESS)
    sp.add_argument("--config", metavar="PATH",
                    help="flat key=value defaults file (flags win)")


def build_parser():
    p = argparse.ArgumentParser(
        prog="udwcavity",
        description="Detector correlations in a cylindrical Dirichlet cavity.",
    )
    p.add_argument("--version", action="version",
                   version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("point", help="evaluate one parameter point")
    _add_common(sp)
    sp.set_defaults(fn=cmd_point)

    sp = sub.add_parser("sweep", help="1D/2D grid of correlation measures")
    _add_common(sp)
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser(
        "density",
        help="2-axis grid + zero-negativity contour (defaults: "
             "omega-sigma 0.05:3:40:log, rho0-sigma 0.1:5:40:log)",
    )
    _add_common(sp)
    sp.set_defaults(fn=cmd_density)

    sp = sub.add_parser("converge", help="partial-sum trace of one series")
    _add_common(sp)
    sp.add_argument("--n-points", default="2000", metavar="N",
                    help="trace rows (clamped to terms used; default 2000)")
    sp.add_argument("--spacing", default="linear",
                    help="trace index spacing: linear or log")
    sp.add_argument("--quantity", default="m_ab", choices=("m_ab", "x_aa"),
                    help="series to trace (default m_ab)")
    sp.set_defaults(fn=cmd_converge)

    sp = sub.add_parser("modes", help="Bessel-zero table export")
    _add_common(sp, scans=False, run=False)
    sp.set_defaults(fn=cmd_modes)

    sp = sub.add_parser("freespace-boundary",
                        help="free-space entanglement boundary curve")
    _add_common(sp, cutoffs=False, run=False)
    sp.add_argument("--tol", metavar="T",
                    help="bisection width on d/sigma (default 1e-6)")
    sp.set_defaults(fn=cmd_freespace_boundary)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _merge_config(args)
        return args.fn(args)
    except InvalidState as exc:
        print(f"error: invalid reduced state: {exc}", file=sys.stderr)
        return 1
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except QuadratureFailure as exc:
        print(f"error: quadrature failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
