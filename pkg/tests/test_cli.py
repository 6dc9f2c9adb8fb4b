"""Command-line driver: exit codes, JSON report shape, determinism, and the
eigenvalue CSV tables."""

import csv
import json

import pytest

from ddlab.cli import main


def run_cli(args, capsys):
    code = main(args)
    return code, capsys.readouterr().out


class TestRun:
    def test_default_run_passes(self, capsys):
        code, out = run_cli(["run"], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["schema"] == 1
        assert report["axioms"]["passed"]
        assert all(report["spectra"]["theorem_flags"].values())
        assert report["pcg"]["bddc_converged"] and report["pcg"]["fetidp_converged"]
        assert report["pcg"]["bddc_rel_error"] <= 1e-8
        assert report["pcg"]["fetidp_rel_error"] <= 1e-8

    def test_missing_coarse_space_with_floating_substructure(self, capsys):
        code, out = run_cli(["run", "--nx", "3", "--ny", "3", "--coarse", "none"], capsys)
        assert code == 2
        report = json.loads(out)
        assert report["error_kind"] == "NotPositiveDefinite"

    def test_unidentified_cross_point_without_floating_substructure(self, capsys):
        code, out = run_cli(["run", "--coarse", "none"], capsys)
        assert code == 2
        assert json.loads(out)["error_kind"] == "UnsupportedCoarseSpace"

    def test_degenerate_single_substructure(self, capsys):
        code, out = run_cli(["run", "--nx", "1", "--ny", "1", "--m", "3"], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["degenerate"]
        assert "note" in report

    def test_deterministic_output(self, capsys):
        args = ["run", "--nx", "3", "--ny", "2", "--m", "2", "--rho-ratio", "100.0"]
        _, out1 = run_cli(args, capsys)
        _, out2 = run_cli(args, capsys)
        assert out1 == out2

    def test_report_written_to_file(self, tmp_path, capsys):
        path = tmp_path / "report.json"
        code, out = run_cli(["run", "--out", str(path)], capsys)
        assert code == 0
        assert out == ""
        assert json.loads(path.read_text())["schema"] == 1

    def test_unwritable_output_is_io_error(self, capsys):
        code = main(["run", "--out", "/nonexistent-dir/report.json"])
        capsys.readouterr()
        assert code == 1


class TestSpectra:
    def test_report_and_csv_tables(self, tmp_path, capsys):
        prefix = str(tmp_path / "eigs")
        code, out = run_cli(["spectra", "--eigs", prefix], capsys)
        assert code == 0
        report = json.loads(out)
        assert len(report["eigs_bddc"]) == 5
        for name in ("bddc", "fetidp"):
            with open(f"{prefix}_{name}.csv", newline="") as handle:
                rows = list(csv.reader(handle))
            assert rows[0] == ["index", "eigenvalue"]
            values = [float(v) for _, v in rows[1:]]
            assert values == sorted(values)
            # repr round-trips the values bit-exactly
            key = "eigs_bddc" if name == "bddc" else "eigs_fetidp"
            assert values == report[key]

    def test_degenerate_instance(self, capsys):
        code, out = run_cli(["spectra", "--nx", "1", "--ny", "1", "--m", "2"], capsys)
        assert code == 0
        assert json.loads(out)["degenerate"]


class TestAxioms:
    def test_residuals_reported(self, capsys):
        code, out = run_cli(["axioms", "--nx", "4", "--ny", "2", "--m", "4"], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["passed"]
        assert max(report["residuals"].values()) <= 1e-12


class TestPcg:
    def test_both_routes_converge(self, capsys):
        code, out = run_cli(
            ["pcg", "--nx", "3", "--ny", "3", "--m", "2", "--scaling", "stiffness"],
            capsys,
        )
        assert code == 0
        section = json.loads(out)["pcg"]
        assert section["bddc_converged"] and section["fetidp_converged"]
        assert section["bddc_rel_error"] <= 1e-8


class TestHarness:
    def test_small_sweep_exit_zero(self, capsys):
        code, out = run_cli(
            ["harness", "--instances", "10", "--n-max", "8", "--seed", "3"], capsys
        )
        assert code == 0
        summary = json.loads(out)["summary"]
        assert summary["all_passed"]
        assert summary["lemma1_passed"] == 10

    def test_zero_instances_exit_zero(self, capsys):
        code, _ = run_cli(["harness", "--instances", "0"], capsys)
        assert code == 0

    def test_injected_fault_is_detected(self, capsys):
        code, out = run_cli(
            ["harness", "--instances", "2", "--n-max", "6", "--inject-fault"], capsys
        )
        assert code == 3
        summary = json.loads(out)["summary"]
        assert summary["fault_injection_detected"]
        assert not summary["all_passed"]


class TestParser:
    def test_unknown_command_rejected(self):
        with pytest.raises(SystemExit):
            main(["explode"])

    def test_unknown_coarse_kind_rejected(self):
        with pytest.raises(SystemExit):
            main(["run", "--coarse", "faces"])
