"""End-to-end tests of the command line: report files, manifests and exit statuses."""

import importlib
import json
import math
import pkgutil

import pandas as pd
import pytest
from click.testing import CliRunner

from src.cli.main import cli, run
from src.report import plot_generator
from src.report.writers import read_report, report_table


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args], catch_exceptions=False)


class TestReports:
    def test_enumerate_writes_csv_and_manifest(self, runner, output_dir):
        result = invoke(runner, "enumerate", "--eps", 1.0, "-o", output_dir)
        assert result.exit_code == 0

        table = read_report(output_dir / "enumerate.csv")
        assert len(table) == 64
        assert {"a", "b"} <= set(table.columns)

        manifest = read_report(output_dir / "enumerate.manifest.json")
        assert manifest["schema"] == "manifest/v1"
        assert manifest["status"] == 0
        assert manifest["counters"]["directions"] == 64
        assert manifest["config"]["params"] == {"eps": 1.0}
        assert manifest["error"] is None

    def test_obs_const_constant_mode(self, runner, output_dir):
        result = invoke(runner, "obs-const", "--eps", 0.25, "--n-max", 0, "-o", output_dir)
        assert result.exit_code == 0
        report = read_report(output_dir / "obs-const.json")
        assert report["schema"] == "obs-const/v1"
        assert report["constant"] == pytest.approx(32.0, rel=1e-12)

    def test_stem_and_format(self, runner, output_dir):
        result = invoke(
            runner, "r2", "--n", 25, "--format", "json", "--stem", "twentyfive", "-o", output_dir
        )
        assert result.exit_code == 0
        report = json.loads((output_dir / "twentyfive.json").read_text())
        assert report["count"] == 12
        assert report["divisor_formula"] == 12
        assert (output_dir / "twentyfive.manifest.json").is_file()

    def test_sections(self, runner, output_dir):
        result = invoke(runner, "sections", "--a", 2, "--b", 1, "-o", output_dir)
        assert result.exit_code == 0
        report = read_report(output_dir / "sections.json")
        assert report["max_gap"] == pytest.approx(0.5)

    def test_nazarov_single_frequency(self, runner, output_dir):
        result = invoke(runner, "nazarov", "--freqs", "3", "--measure", 0.25, "-o", output_dir)
        assert result.exit_code == 0
        report = read_report(output_dir / "nazarov.json")
        assert report["ratio"] == pytest.approx(4.0, rel=1e-12)

    def test_json_rows_match_csv(self, runner, output_dir):
        for fmt in ("json", "csv"):
            result = invoke(
                runner, "obs-const", "--eps", 0.2, "--n-max", 25, "--format", fmt,
                "--stem", f"obs-{fmt}", "-o", output_dir,
            )
            assert result.exit_code == 0
        from_json = report_table(output_dir / "obs-json.json")
        from_csv = read_report(output_dir / "obs-csv.csv")
        assert len(from_json) > 1
        pd.testing.assert_frame_equal(from_json, from_csv, check_dtype=False, rtol=0, atol=0)

        report = read_report(output_dir / "obs-json.json")
        assert report["constant"] == 2.0 * math.pi / from_json["lambda_min"].min()


class TestExitStatus:
    def test_falsified_claim_exits_two(self, runner, output_dir):
        result = invoke(runner, "windows", "--eps", 1.0, "--denominator", 0.5, "-o", output_dir)
        assert result.exit_code == 2
        manifest = read_report(output_dir / "windows.manifest.json")
        assert manifest["status"] == 2
        assert manifest["error"]["error_type"] == "FalsifiedAssertionError"
        assert manifest["error"]["evidence"]["disjoint"] is False

    def test_invalid_argument_exits_one(self, runner, output_dir):
        result = invoke(runner, "enumerate", "--eps", -1.0, "-o", output_dir)
        assert result.exit_code == 1
        manifest = read_report(output_dir / "enumerate.manifest.json")
        assert manifest["error"]["error_type"] == "ValidationError"
        assert not (output_dir / "enumerate.csv").exists()

    def test_empty_eigenspace_exits_one(self, runner, output_dir):
        result = invoke(runner, "gramian", "--n", 3, "--eps", 0.2, "-o", output_dir)
        assert result.exit_code == 1

    def test_classify_needs_a_direction(self, output_dir):
        assert run(["classify", "--eps", "0.5", "-o", str(output_dir)]) == 1

    def test_run_returns_status(self, output_dir):
        assert run(["approx", "--alpha", "0.5", "--n-max", "10", "-o", str(output_dir)]) == 0
        report = read_report(output_dir / "approx.json")
        assert (report["n"], report["m"]) == (2, 1)
        assert run(["approx", "--alpha", "1.5", "--n-max", "10", "-o", str(output_dir)]) == 1

    def test_malformed_config_file(self, tmp_path):
        broken = tmp_path / "broken.yaml"
        broken.write_text("- not\n- a mapping\n")
        assert run(["--config", str(broken), "r2", "--n", "5"]) == 1

    def test_unknown_option(self):
        assert run(["enumerate", "--epsilon", "1"]) == 1


class TestPlot:
    def test_svg_is_deterministic(self, runner, output_dir):
        invoke(runner, "obs-const", "--eps", 0.2, "--n-max", 10, "-o", output_dir)
        report = output_dir / "obs-const.json"
        first, second = output_dir / "first.svg", output_dir / "second.svg"
        for target in (first, second):
            result = invoke(
                runner, "plot", "--report", report, "--output", target, "-o", output_dir
            )
            assert result.exit_code == 0
        assert first.read_bytes() == second.read_bytes()
        assert first.read_bytes().lstrip().startswith(b"<?xml")

    def test_single_point_is_a_lone_marker(self, runner, output_dir, monkeypatch):
        single = output_dir / "single.csv"
        single.write_text("N,lambda_min\n5,0.125\n")
        figures = []
        close = plot_generator.plt.close

        def keep(fig):
            figures.append(fig)
            close(fig)

        monkeypatch.setattr(plot_generator.plt, "close", keep)
        result = invoke(runner, "plot", "--report", single, "--kind", "line", "-o", output_dir)
        assert result.exit_code == 0
        assert single.with_suffix(".svg").is_file()

        (line,) = figures[0].axes[0].lines
        assert list(line.get_xdata()) == [5]
        assert line.get_marker() == "o"
        assert line.get_linestyle() == "None"

    def test_empty_report_is_an_error(self, runner, output_dir):
        empty = output_dir / "empty.csv"
        empty.write_text("N,lambda_min\n")
        result = invoke(runner, "plot", "--report", empty, "-o", output_dir)
        assert result.exit_code == 1
        assert not empty.with_suffix(".svg").exists()

    def test_missing_column_is_an_error(self, runner, output_dir):
        invoke(runner, "enumerate", "--eps", 1.0, "-o", output_dir)
        result = invoke(
            runner, "plot", "--report", output_dir / "enumerate.csv", "--x", "a", "--y", "nope",
            "-o", output_dir,
        )
        assert result.exit_code == 1


class TestConfigShow:
    def test_lists_sections(self, runner):
        result = runner.invoke(cli, ["config-show"])
        assert result.exit_code == 0
        assert "observability:" in result.output


class TestPackage:
    def test_every_module_imports(self):
        import src

        names = [info.name for info in pkgutil.walk_packages(src.__path__, prefix="src.")]
        assert "src.core.geodesics" in names
        for name in names:
            importlib.import_module(name)

    def test_origin_is_reduced(self):
        from src.core.geodesics import ORIGIN

        assert (ORIGIN.x, ORIGIN.y) == (0.0, 0.0)
