"""Command-line interface: scan parsing, exit codes, emitted artifacts.

Exit-code contract: 0 success, 1 compute failure (non-convergence
without --allow-unconverged), 2 validation error.  All invocations go
through main(argv) so the tests exercise exactly the installed entry
point.
"""

import json

import numpy as np
import pytest

from udwcavity.cli import load_config, main, parse_scan
from udwcavity.measures import measures_csv_header
from udwcavity.series import DIAG_CSV_HEADER

# cheap cutoff flags shared by most invocations (sub-second points)
CHEAP = ["--nmax-x", "600", "--mmax", "20", "--nmax-m", "20000"]
POINT = ["--omega-sigma", "1", "--rho0-sigma", "1", "--sigma-r", "0.1"]


def kv_output(capsys):
    """Parse key=value stdout lines into a dict."""
    out = {}
    for line in capsys.readouterr().out.splitlines():
        if "=" in line:
            k, _, v = line.partition("=")
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# scan-spec parsing
# ---------------------------------------------------------------------------

class TestParseScan:
    def test_single_value(self):
        assert parse_scan("omega_sigma", "1.5", True, False) == (1.5,)

    def test_linear_range_hits_endpoints(self):
        vals = parse_scan("rho0_sigma", "0.1:9.5:40", True, False)
        assert len(vals) == 40
        assert vals[0] == 0.1 and vals[-1] == 9.5

    def test_log_range(self):
        vals = parse_scan("omega_sigma", "0.05:3:7:log", True, False)
        ratios = np.diff(np.log(vals))
        assert np.allclose(ratios, ratios[0], rtol=1e-12)

    def test_comma_list(self):
        assert parse_scan("sigma_R", "0.005,0.025,0.1", False, True) == (
            0.005, 0.025, 0.1,
        )

    def test_rejects_disallowed_forms(self):
        with pytest.raises(ValueError, match="not a range"):
            parse_scan("sigma_R", "0.01:0.1:5", False, True)
        with pytest.raises(ValueError, match="not a list"):
            parse_scan("omega_sigma", "1,2", True, False)
        with pytest.raises(ValueError, match="lo:hi:n"):
            parse_scan("omega_sigma", "0.1:5", True, False)
        with pytest.raises(ValueError, match="spacing"):
            parse_scan("omega_sigma", "0.1:5:4:cubic", True, False)
        with pytest.raises(ValueError, match="log ranges"):
            parse_scan("omega_sigma", "0:5:4:log", True, False)
        with pytest.raises(ValueError, match="lo < hi"):
            parse_scan("omega_sigma", "5:1:4", True, False)


# ---------------------------------------------------------------------------
# top-level behavior
# ---------------------------------------------------------------------------

class TestEntryPoint:
    def test_no_command_is_usage_error(self, capsys):
        assert main([]) == 2
        capsys.readouterr()

    def test_version_flag(self, capsys):
        assert main(["--version"]) == 0
        assert "udwcavity" in capsys.readouterr().out

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["point", "--frequency", "1"]) == 2
        capsys.readouterr()


# ---------------------------------------------------------------------------
# point
# ---------------------------------------------------------------------------

class TestPoint:
    def test_happy_path(self, capsys):
        assert main(["point", *POINT, *CHEAP]) == 0
        kv = kv_output(capsys)
        assert kv["converged_flags"] == "1111"
        assert float(kv["x_aa"]) > 0
        assert float(kv["mutual_info"]) >= 0
        assert kv["kernels"] in ("c", "py")

    def test_constraint_violation_exits_2(self, capsys):
        assert main(["point", "--omega-sigma", "1", "--rho0-sigma", "12",
                     "--sigma-r", "0.1"]) == 2
        assert "must be < 1" in capsys.readouterr().err

    def test_missing_parameter_exits_2(self, capsys):
        assert main(["point", "--omega-sigma", "1", "--sigma-r", "0.1"]) == 2
        capsys.readouterr()

    def test_lambda_scaling_exact(self, capsys):
        assert main(["point", *POINT, *CHEAP, "--lambda", "0.1"]) == 0
        a = kv_output(capsys)
        assert main(["point", *POINT, *CHEAP, "--lambda", "0.2"]) == 0
        b = kv_output(capsys)
        for key in ("x_aa", "x_bb", "x_ab", "m_ab_re", "m_ab_im"):
            assert float(b[key]) / float(a[key]) == 4.0

    def test_unconverged_exit_code_and_override(self, capsys):
        args = ["point", *POINT, "--nmax-x", "600", "--mmax", "20",
                "--nmax-m", "50"]
        assert main(args) == 1
        kv = kv_output(capsys)
        assert kv["converged_flags"] == "1110"
        assert kv["m_ab_re"] == "nan"
        assert main([*args, "--allow-unconverged"]) == 0
        capsys.readouterr()

    def test_out_csv(self, tmp_path, capsys):
        out = str(tmp_path / "pt.csv")
        assert main(["point", *POINT, *CHEAP, "--out", out]) == 0
        capsys.readouterr()
        lines = open(out).read().splitlines()
        assert lines[0] == measures_csv_header()
        assert len(lines) == 2

    def test_out_json(self, tmp_path, capsys):
        out = str(tmp_path / "pt.json")
        assert main(["point", *POINT, *CHEAP, "--format", "json",
                     "--out", out]) == 0
        capsys.readouterr()
        doc = json.load(open(out))
        assert doc["converged_flags"] == "1111"
        assert float(doc["x_aa"]) > 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

SWEEP_ARGS = ["--omega-sigma", "1", "--rho0-sigma", "0.5:1.5:3:lin",
              "--sigma-r", "0.1", *CHEAP]


class TestSweep:
    def test_writes_rows_and_manifest(self, tmp_path, capsys):
        out = str(tmp_path / "s.csv")
        assert main(["sweep", *SWEEP_ARGS, "--out", out]) == 0
        capsys.readouterr()
        lines = open(out).read().splitlines()
        assert lines[0] == measures_csv_header()
        assert len(lines) == 4
        man = json.load(open(str(tmp_path / "s.manifest.json")))
        assert man["bitmap"] == "111"

    def test_thread_count_does_not_change_bytes(self, tmp_path, capsys):
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        assert main(["sweep", *SWEEP_ARGS, "--out", a, "--threads", "1"]) == 0
        assert main(["sweep", *SWEEP_ARGS, "--out", b, "--threads", "4"]) == 0
        capsys.readouterr()
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_interrupt_resume_cycle(self, tmp_path, capsys):
        full, part = str(tmp_path / "f.csv"), str(tmp_path / "p.csv")
        assert main(["sweep", *SWEEP_ARGS, "--out", full]) == 0
        assert main(["sweep", *SWEEP_ARGS, "--out", part,
                     "--interrupt-after", "1"]) == 0
        man = json.load(open(str(tmp_path / "p.manifest.json")))
        assert man["bitmap"] == "100"
        assert main(["sweep", *SWEEP_ARGS, "--out", part, "--resume"]) == 0
        capsys.readouterr()
        assert open(part, "rb").read() == open(full, "rb").read()

    def test_no_axis_exits_2(self, tmp_path, capsys):
        assert main(["sweep", *POINT, *CHEAP,
                     "--out", str(tmp_path / "x.csv")]) == 2
        assert "swept axes" in capsys.readouterr().err

    def test_fully_filtered_grid_exits_2_before_compute(self, tmp_path, capsys):
        assert main(["sweep", "--omega-sigma", "1", "--rho0-sigma",
                     "12:15:2:lin", "--sigma-r", "0.1", *CHEAP,
                     "--out", str(tmp_path / "x.csv")]) == 2
        assert "empty grid" in capsys.readouterr().err

    def test_unconverged_cells_sentineled_and_flagged(self, tmp_path, capsys):
        out = str(tmp_path / "u.csv")
        args = ["sweep", "--omega-sigma", "1", "--rho0-sigma", "0.5:1.5:3:lin",
                "--sigma-r", "0.1", "--nmax-x", "600", "--mmax", "20",
                "--nmax-m", "50", "--out", out]
        assert main(args) == 1
        lines = open(out).read().splitlines()
        assert len(lines) == 4
        assert all(line.endswith(",1110") for line in lines[1:])
        assert main([*args, "--allow-unconverged"]) == 0
        capsys.readouterr()

    def test_missing_out_exits_2(self, capsys):
        assert main(["sweep", *SWEEP_ARGS]) == 2
        assert "--out" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# density
# ---------------------------------------------------------------------------

class TestDensity:
    def test_artifacts_emitted(self, tmp_path, capsys):
        out = str(tmp_path / "d.csv")
        assert main(["density", "--omega-sigma", "0.8:1.2:3:lin",
                     "--rho0-sigma", "1.5:3.5:3:lin", "--sigma-r", "0.1",
                     *CHEAP, "--out", out, "--threads", "4"]) == 0
        stdout = capsys.readouterr().out
        assert "contour:" in stdout and "overlay" in stdout
        cl = open(str(tmp_path / "d.contour.csv")).read().splitlines()
        assert cl[0] == "omega_sigma_a,rho0_sigma_a,omega_sigma_b,rho0_sigma_b"
        assert len(cl) > 1
        ol = open(str(tmp_path / "d.free.csv")).read().splitlines()
        assert ol[0] == "omega_sigma,d_over_sigma_boundary,flag"

    def test_dead_grid_flags_empty_contour(self, tmp_path, capsys):
        out = str(tmp_path / "dead.csv")
        assert main(["density", "--omega-sigma", "0.9:1.1:2:lin",
                     "--rho0-sigma", "6:9:2:lin", "--sigma-r", "0.1",
                     *CHEAP, "--out", out]) == 0
        assert "empty" in capsys.readouterr().out
        man = json.load(open(str(tmp_path / "dead.manifest.json")))
        assert man["notes"]["contour_empty"] is True

    def test_single_axis_exits_2(self, tmp_path, capsys):
        assert main(["density", "--omega-sigma", "1", "--rho0-sigma",
                     "1.5:3.5:3:lin", "--sigma-r", "0.1", *CHEAP,
                     "--out", str(tmp_path / "x.csv")]) == 2
        capsys.readouterr()


# ---------------------------------------------------------------------------
# converge
# ---------------------------------------------------------------------------

class TestConverge:
    def test_trace_and_summary(self, tmp_path, capsys):
        out = str(tmp_path / "tr.csv")
        assert main(["converge", *POINT, *CHEAP, "--n-points", "40",
                     "--out", out]) == 0
        assert "terms_used=" in capsys.readouterr().out
        lines = open(out).read().splitlines()
        assert lines[0] == DIAG_CSV_HEADER
        summary = json.load(open(str(tmp_path / "tr.summary.json")))
        assert summary["converged"] is True
        assert len(lines) == 1 + summary["trace_rows"]

    def test_x_aa_quantity(self, tmp_path, capsys):
        out = str(tmp_path / "xa.csv")
        assert main(["converge", *POINT, *CHEAP, "--quantity", "x_aa",
                     "--out", out]) == 0
        capsys.readouterr()
        summary = json.load(open(str(tmp_path / "xa.summary.json")))
        assert summary["quantity"] == "x_aa"
        assert summary["converged"] is True

    def test_unconverged_exit_and_override(self, tmp_path, capsys):
        out = str(tmp_path / "bad.csv")
        args = ["converge", *POINT, "--nmax-x", "600", "--mmax", "20",
                "--nmax-m", "50", "--out", out]
        assert main(args) == 1
        assert main([*args, "--allow-unconverged"]) == 0
        capsys.readouterr()


# ---------------------------------------------------------------------------
# modes and the free-space boundary
# ---------------------------------------------------------------------------

class TestModes:
    def test_table_round_trip(self, tmp_path, capsys):
        from udwcavity.specfun import bessel_zeros

        out = str(tmp_path / "modes.csv")
        assert main(["modes", "--mmax", "1", "--nmax-x", "3",
                     "--out", out]) == 0
        assert "interlacing verified" in capsys.readouterr().out
        lines = open(out).read().splitlines()
        assert lines[0] == "m,n,xi_mn"
        assert len(lines) == 1 + 2 * 3
        m, n, xi = lines[1].split(",")
        assert (m, n) == ("0", "1")
        assert float(xi) == bessel_zeros(0, 1)[0]


class TestFreespaceBoundary:
    def test_stdout_curve(self, capsys):
        assert main(["freespace-boundary", "--omega-sigma", "1:1:1",
                     "--rho0-sigma", "0.5:6:12:lin"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "omega_sigma,d_over_sigma_boundary,flag"
        om, d, flag = lines[1].split(",")
        assert flag == "ok"
        assert abs(float(d) - 2.327) < 2e-3

    def test_out_file(self, tmp_path, capsys):
        out = str(tmp_path / "fb.csv")
        assert main(["freespace-boundary", "--omega-sigma", "1:1:1",
                     "--rho0-sigma", "0.5:6:12:lin", "--out", out]) == 0
        capsys.readouterr()
        assert len(open(out).read().splitlines()) == 2


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

class TestConfig:
    def test_flags_win_over_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# defaults for the smoke point\n"
            "omega_sigma=1.0\n"
            "rho0_sigma=1.0\n"
            "sigma-r=0.1\n"
            "nmax_x=600\nmmax=20\nnmax_m=20000\n"
        )
        assert main(["point", "--config", str(cfg),
                     "--rho0-sigma", "2.0"]) == 0
        kv = kv_output(capsys)
        assert kv["rho0_sigma"] == "2"
        assert kv["omega_sigma"] == "1"
        assert kv["nmax_x"] == "600"

    def test_lambda_key_aliases_lam(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lambda=0.2\n")
        assert main(["point", *POINT, *CHEAP, "--config", str(cfg)]) == 0
        kv = kv_output(capsys)
        assert float(kv["lambda"]) == 0.2

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("coupling=0.2\n")
        assert main(["point", *POINT, *CHEAP, "--config", str(cfg)]) == 2
        assert "unknown config key" in capsys.readouterr().err

    def test_malformed_line_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("omega_sigma 1.0\n")
        assert main(["point", *POINT, *CHEAP, "--config", str(cfg)]) == 2
        capsys.readouterr()

    def test_load_config_parses_comments_and_blanks(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("\n# comment\nomega_sigma = 1.5\n\ntol=1e-4\n")
        assert load_config(str(cfg)) == {"omega_sigma": "1.5", "tol": "1e-4"}
