"""Command-line interface: exit codes, outputs, determinism."""

import json

import numpy as np
import pytest

from cracktip.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main


class TestParser:
    def test_requires_a_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
        assert "command" in capsys.readouterr().err

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.startswith("cracktip ")


class TestVerify:
    def test_passes_at_the_stated_tolerance(self, tmp_path, capsys):
        rc = main(["verify", "--case", "cracktip2d", "--fields", "2",
                   "--out", str(tmp_path)])
        assert rc == EXIT_OK
        out = capsys.readouterr().out
        assert "cracktip2d" in out
        lines = (tmp_path / "residuals.csv").read_text().splitlines()
        assert lines[0].startswith("case,")
        assert len(lines) >= 4          # header + unit field + 2 random + control
        doc = json.loads((tmp_path / "manifest.json").read_text())
        assert doc["tool"] == "cracktip"
        assert doc["command"] == "verify"
        assert doc["backend"] in ("compiled", "pure")

    def test_unreachable_tolerance_fails_numerically(self, tmp_path):
        rc = main(["verify", "--case", "cracktip2d", "--fields", "1",
                   "--tolerance", "1e-12", "--out", str(tmp_path)])
        assert rc == EXIT_NUMERICAL


class TestLedger:
    def test_writes_deterministic_csv(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["ledger", "--out", str(a)]) == EXIT_OK
        assert main(["ledger", "--out", str(b)]) == EXIT_OK
        assert (a / "ledger.csv").read_bytes() == (b / "ledger.csv").read_bytes()
        out = capsys.readouterr().out
        assert "threshold delta*" in out
        lines = (a / "ledger.csv").read_text().splitlines()
        assert lines[0].startswith("construction,")
        assert len(lines) == 4          # three families

    def test_invalid_parameters_exit_config(self, tmp_path):
        rc = main(["ledger", "--family", "drilled_sphere",
                   "--radius", "1.0", "--eps-hole", "0.5"])
        assert rc == EXIT_CONFIG


class TestSolve:
    def test_needs_preset_or_config(self, capsys):
        assert main(["solve"]) == EXIT_CONFIG
        assert "preset or --config" in capsys.readouterr().err

    def test_unknown_preset(self):
        # argparse rejects it at the choices gate, same exit code
        with pytest.raises(SystemExit) as exc:
            main(["solve", "--preset", "bogus"])
        assert exc.value.code == EXIT_CONFIG

    def test_bad_config_file(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("domain = cylinder\nn = 8\neps = 0.01\n")   # under-resolved
        assert main(["solve", "--config", str(p)]) == EXIT_CONFIG

    def test_small_run_produces_outputs(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("domain = cylinder\nn = 8\neps = 0.5\ndelta = 0.3\n"
                       "phi_init = profile\nmax_sweeps = 80\n")
        out = tmp_path / "out"
        rc = main(["solve", "--config", str(cfg), "--out", str(out)])
        assert rc == EXIT_OK
        assert "solved:" in capsys.readouterr().out
        for name in ("fields.vtk", "surface.vtk", "slices.csv",
                     "energy_trace.csv", "manifest.json"):
            assert (out / name).exists(), name
        doc = json.loads((out / "manifest.json").read_text())
        assert doc["parameters"]["config"]["n"] == 8
        assert doc["results"]["converged"] is True
        assert doc["results"]["surface_triangles"] > 0
        trace = (out / "energy_trace.csv").read_text().splitlines()
        assert trace[0] == "sweep,total_energy"
        energies = [float(r.split(",")[1]) for r in trace[1:]]
        assert energies == sorted(energies, reverse=True)

    def test_threshold_preset(self, tmp_path):
        out = tmp_path / "thr"
        assert main(["solve", "--preset", "threshold", "--out", str(out)]) == EXIT_OK
        rows = (out / "threshold.csv").read_text().splitlines()
        assert rows[0] == "delta,limit_margin"
        data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
        # margins decrease with delta and change sign across the threshold
        assert data[0, 1] > 0 > data[-1, 1]
        assert np.all(np.diff(data[:, 1]) < 0)
        flip = data[np.diff(np.sign(data[:, 1])).nonzero()[0][0], 0]
        assert abs(flip - 1.5373289262979535) < 0.05

    def test_sdelta_preset_with_overrides(self, tmp_path):
        out = tmp_path / "sd"
        rc = main(["solve", "--preset", "sdelta", "--n", "8", "--eps", "0.5",
                   "--max-sweeps", "40", "--deltas", "0.4,0.2",
                   "--out", str(out)])
        assert rc == EXIT_OK
        rows = (out / "sdelta.csv").read_text().splitlines()
        assert rows[0] == "delta,solved_total,inserted_total,shat,scale,ratio"
        assert len(rows) == 3
        assert [float(r.split(",")[0]) for r in rows[1:]] == [0.4, 0.2]
