"""
命令行界面测试
"""

import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from src.core.transform import reset_euler_sign
from src.interfaces.cli import EXIT_DOMAIN, EXIT_OK, EXIT_PARSE, EXIT_VERIFICATION, cli, parse_vector
from src.models.transform_models import BatteryReport
from src.services.verification_service import VerificationService
from src.utils import config as config_module
from src.utils.config import get_fixtures_dir
from src.utils.exceptions import InputParseError
from src.utils.logger import reset_log_manager

QUAD = ["--quad", "10,320,128", "--fiber", "12,192"]


@pytest.fixture(autouse=True)
def isolated_state():
    saved = config_module._config
    reset_euler_sign()
    yield
    config_module._config = saved
    reset_log_manager()
    reset_euler_sign()


@pytest.fixture
def runner():
    return CliRunner()


def fixture_path(name: str) -> str:
    return os.path.join(get_fixtures_dir(), name)


def records(result):
    return [json.loads(line) for line in result.output.splitlines() if line.startswith("{")]


class TestParsing:

    @pytest.mark.parametrize("text, expected", [
        ("2z0", [2.0, -2.0j, 0.0]),
        ("z0bar", [1.0, 1.0j, 0.0]),
        ("0.5*zeta0", [0.5, -0.5j, 0.0]),
        ("x0", [1.0, 0.0, 0.0]),
        ("1, -1i, 0", [1.0, -1.0j, 0.0]),
        ("2,2j,0", [2.0, 2.0j, 0.0]),
    ])
    def test_vectors(self, text, expected):
        np.testing.assert_allclose(parse_vector(text), expected)

    @pytest.mark.parametrize("text", ["1,2", "a,b,c", "2w0", "nan,0,0"])
    def test_bad_vectors(self, text):
        with pytest.raises(InputParseError):
            parse_vector(text)


class TestLattice:

    def test_enumerate_sl2(self, runner):
        result = runner.invoke(cli, ["lattice", fixture_path("sl2.rd"), "--enumerate", "5"])
        assert result.exit_code == EXIT_OK
        rows = records(result)
        assert [row["weight"] for row in rows] == [[str(k)] for k in range(-5, 6)]
        for k, row in zip(range(-5, 6), rows):
            assert row["schema"] == 1
            assert row["lambda_2"] == (k >= 1)
            assert row["lambda_c"] == (k >= 2)
        zero = rows[5]
        assert not any(zero[key] for key in ("lambda_pos", "lambda_1", "lambda_2", "lambda_c"))

    def test_rank1_m3_starts_at_two(self, runner):
        result = runner.invoke(cli, ["lattice", fixture_path("rank1_m3.rd"), "--enumerate", "3"])
        rows = records(result)
        assert [row["lambda_2"] for row in rows] == [False] * 5 + [True, True]
        assert all(row["formal_dimension"] is None and row["lambda_sd"] is None for row in rows)

    def test_single_weight_with_dimension(self, runner):
        result = runner.invoke(cli, ["lattice", fixture_path("su21.rd"), "--lambda", "1,2"])
        (row,) = records(result)
        assert row["omega"] == ["1", "2"]
        assert row["formal_dimension"] == "-30"
        assert row["lambda_c"] and not row["lambda_1"]

    def test_root_basis_and_constant(self, runner):
        result = runner.invoke(cli, ["lattice", fixture_path("su21.rd"), "--lambda", "1,1", "--basis", "root"])
        assert records(result)[0]["omega"] == ["-1/2", "1"]
        result = runner.invoke(cli, ["lattice", fixture_path("sl2.rd"), "--lambda", "2", "--c", "2/3"])
        assert records(result)[0]["formal_dimension"] == "1"

    @pytest.mark.parametrize("args", [
        [],
        ["--lambda", "1", "--enumerate", "2"],
        ["--lambda", "1,x"],
        ["--lambda", "1,2"],
    ])
    def test_bad_arguments(self, runner, args):
        result = runner.invoke(cli, ["lattice", fixture_path("sl2.rd")] + args)
        assert result.exit_code == EXIT_PARSE

    def test_missing_datum(self, runner, tmp_path):
        result = runner.invoke(cli, ["lattice", os.path.join(str(tmp_path), "absent.rd"), "--enumerate", "1"])
        assert result.exit_code == EXIT_PARSE

    def test_invalid_datum_names_line(self, runner, tmp_path):
        path = tmp_path / "bad.rd"
        path.write_text("[meta]\nname = bad\nrank = 1\n[gram]\n1\n[roots]\n1 q 1 +\n-1 n 1 -\n[simple]\n0\n",
                        encoding="utf-8")
        result = runner.invoke(cli, ["lattice", str(path), "--enumerate", "1"])
        assert result.exit_code == EXIT_PARSE
        assert f"{path}:7:" in result.output


class TestTransform:

    def test_zero_function(self, runner):
        result = runner.invoke(cli, ["transform", "--f", "zero", "--zeta", "2z0bar"] + QUAD)
        assert result.exit_code == EXIT_OK
        (row,) = records(result)
        assert row["value_re"] == 0.0 and row["value_im"] == 0.0

    def test_matrix_coefficient(self, runner):
        result = runner.invoke(cli, ["transform", "--w", "2z0", "--lambda", "2", "--zeta", "2z0bar"] + QUAD)
        assert result.exit_code == EXIT_OK
        (row,) = records(result)
        assert row["operation"] == "cauchy_transform"
        assert row["value_re"] == pytest.approx(np.pi ** 2 / 16, rel=1e-8)
        assert row["inputs"]["zeta_orientation"] == -1
        assert row["quadrature"]["n_t"] == 320

    def test_several_points(self, runner):
        result = runner.invoke(cli, ["transform", "--w", "2z0", "--lambda", "2",
                                    "--zeta", "2z0bar", "--zeta", "3*z0bar", "--zeta", "2z0"] + QUAD)
        assert result.exit_code == EXIT_OK
        rows = records(result)
        assert [row["inputs"]["zeta_orientation"] for row in rows] == [-1, -1, 1]
        assert rows[0]["value_re"] == pytest.approx(1.5 * rows[1]["value_re"], rel=1e-10)
        assert abs(complex(rows[2]["value_re"], rows[2]["value_im"])) < 1e-12
        assert all(row["inputs"]["component"] is None for row in rows)

    def test_fourier_component(self, runner):
        result = runner.invoke(cli, ["transform", "--zeta", "2z0bar", "--component", "3"] + QUAD)
        (row,) = records(result)
        assert row["operation"] == "fourier_component"
        assert abs(complex(row["value_re"], row["value_im"])) < 1e-12

    def test_boundary_zeta_is_domain_error(self, runner):
        result = runner.invoke(cli, ["transform", "--zeta", "z0"] + QUAD)
        assert result.exit_code == EXIT_DOMAIN
        assert "NOT_INTERIOR" in result.output

    @pytest.mark.parametrize("args", [
        ["--zeta", "1,2"],
        ["--zeta", "2z0bar", "--quad", "10,33,128"],
        ["--zeta", "2z0bar", "--quad", "10,320.5,128"],
        ["--zeta", "2z0bar", "--quad", "10,320"],
        ["--zeta", "2z0bar", "--unknown-flag"],
    ])
    def test_parse_errors(self, runner, args):
        assert runner.invoke(cli, ["transform"] + args).exit_code == EXIT_PARSE


class TestInvert:

    def test_lambda_one_diverges(self, runner):
        result = runner.invoke(cli, ["invert", "--w", "2z0", "--lambda", "1", "--s", "0.5"] + QUAD)
        assert result.exit_code == EXIT_DOMAIN
        assert "FIBER_DIVERGENCE" in result.output

    def test_zero_function(self, runner):
        result = runner.invoke(cli, ["invert", "--f", "zero", "--s", "0.5"] + QUAD)
        assert result.exit_code == EXIT_OK
        rows = records(result)
        assert [row["operation"] for row in rows] == ["inverse_transform", "inversion_summary"]
        assert rows[0]["value_re"] == 0.0
        assert rows[1]["value_re"] is None

    def test_summary_per_lambda(self, runner):
        result = runner.invoke(cli, ["invert", "--lambda", "2", "--lambda", "3", "--s", "0.6"] + QUAD)
        assert result.exit_code == EXIT_OK
        summaries = [row for row in records(result) if row["operation"] == "inversion_summary"]
        assert [row["inputs"]["lambda"] for row in summaries] == [2, 3]
        for row in summaries:
            assert row["value_re"] == pytest.approx(4 * np.pi ** 2, rel=1e-4)

    def test_point_outside_tube(self, runner):
        result = runner.invoke(cli, ["invert", "--z", "x0"] + QUAD)
        assert result.exit_code == EXIT_DOMAIN


class TestVerify:

    def test_kernel_series_passes(self, runner):
        result = runner.invoke(cli, ["verify", "kernel-series"])
        assert result.exit_code == EXIT_OK
        rows = records(result)
        assert rows and all(row["passed"] for row in rows)
        assert {row["battery"] for row in rows} == {"kernel-series"}

    def test_output_is_reproducible(self, runner):
        first = runner.invoke(cli, ["verify", "kernel-series", "--seed", "5"])
        second = runner.invoke(cli, ["verify", "kernel-series", "--seed", "5"])
        assert first.exit_code == second.exit_code == EXIT_OK
        assert first.stdout == second.stdout

    def test_unknown_battery(self, runner):
        assert runner.invoke(cli, ["verify", "nope"]).exit_code == EXIT_PARSE

    def test_failed_battery_exit_code(self, runner, monkeypatch):
        def failing(self, rng):
            report = BatteryReport("kernel-series")
            report.add("forced", False, 1.0, 0.0)
            return report

        monkeypatch.setattr(VerificationService, "_battery_kernel_series", failing)
        result = runner.invoke(cli, ["verify", "kernel-series"])
        assert result.exit_code == EXIT_VERIFICATION
        assert records(result)[0]["passed"] is False

    def test_csv_format(self, runner):
        result = runner.invoke(cli, ["verify", "kernel-series", "--format", "csv"])
        assert result.exit_code == EXIT_OK
        assert result.stdout.splitlines()[0].startswith("schema,operation,")

    def test_out_file(self, runner, tmp_path):
        path = tmp_path / "result.jsonl"
        result = runner.invoke(cli, ["verify", "kernel-series", "--out", str(path)])
        assert result.exit_code == EXIT_OK
        assert "{" not in result.stdout
        lines = path.read_text(encoding="utf-8").splitlines()
        assert all(json.loads(line)["battery"] == "kernel-series" for line in lines)

    def test_unwritable_out_file(self, runner, tmp_path):
        path = os.path.join(str(tmp_path), "missing", "result.jsonl")
        assert runner.invoke(cli, ["verify", "kernel-series", "--out", path]).exit_code == EXIT_PARSE


class TestGroupOptions:

    def test_config_file(self, runner, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("output:\n  format: csv\nlogging:\n  level: WARNING\n", encoding="utf-8")
        result = runner.invoke(cli, ["--config", str(path), "verify", "kernel-series"])
        assert result.exit_code == EXIT_OK
        assert result.stdout.startswith("schema,")

    def test_missing_config_file(self, runner, tmp_path):
        path = os.path.join(str(tmp_path), "absent.yaml")
        assert runner.invoke(cli, ["--config", path, "verify", "kernel-series"]).exit_code == EXIT_PARSE

    def test_invalid_config_value(self, runner, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("quadrature:\n  n_t: -4\n", encoding="utf-8")
        assert runner.invoke(cli, ["--config", str(path), "verify", "kernel-series"]).exit_code == EXIT_PARSE

    def test_debug_flag(self, runner):
        result = runner.invoke(cli, ["--debug", "--log-level", "ERROR", "invert", "--f", "zero", "--s", "0.5"] + QUAD)
        assert result.exit_code == EXIT_OK
