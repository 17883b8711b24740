"""
Tests for the command-line driver, the experiment runner and the report writers.
"""

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml

from app import main
from config_manager import ConfigManager
from experiment_runner import Check, ExperimentRunner
from utils.reporting_utils import ReportingUtils


SHIPPED_CONFIG = Path(__file__).resolve().parents[1] / "config" / "default_config.yaml"
NUMERICAL_SUITES = ["identities", "on-divisor", "waverec", "psdiff", "rsdyn", "discrete"]


def write_config(path, data):
    with open(path, "w") as f:
        yaml.dump(data, f)
    return str(path)


def body(path):
    """CSV content without the timestamp line."""
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# generated ")
    return lines[1:]


class TestReportingUtils:
    """Test cases for ReportingUtils."""

    def test_split_complex(self):
        frame = pd.DataFrame({"z": [1 + 2j, -0.5j], "n": [1, 2]})
        split = ReportingUtils.split_complex(frame)
        assert list(split.columns) == ["re_z", "im_z", "n"]
        assert split["im_z"].tolist() == [2.0, -0.5]

    def test_write_table(self, temp_dir):
        frame = pd.DataFrame({"x": [0.1, 1.0 / 3.0], "z": [1j, 2.0 + 0j]})
        path = ReportingUtils.write_table(frame, temp_dir / "t" / "table.csv", timestamp="2024-01-01T00:00:00")
        lines = path.read_text().splitlines()
        assert lines[0] == "# generated 2024-01-01T00:00:00"
        assert lines[1] == "x,re_z,im_z"
        assert float(lines[3].split(",")[0]) == 1.0 / 3.0
        back = ReportingUtils.read_table(path)
        assert back["im_z"].tolist() == [1.0, 0.0]

    def test_header_records_seed(self, temp_dir):
        frame = pd.DataFrame({"x": [1.0]})
        path = ReportingUtils.write_table(frame, temp_dir / "seeded.csv", timestamp="2024-01-01T00:00:00", seed=7)
        assert path.read_text().splitlines()[0] == "# generated 2024-01-01T00:00:00 seed=7"
        assert ReportingUtils.read_table(path)["x"].tolist() == [1.0]

    def test_to_jsonable(self):
        value = {"a": np.float64(0.5), "b": np.arange(2), "c": 1 + 2j, 3: np.bool_(True)}
        assert ReportingUtils.to_jsonable(value) == {"a": 0.5, "b": [0, 1], "c": [1.0, 2.0], "3": True}

    def test_write_summary(self, temp_dir):
        path = ReportingUtils.write_summary({"value": np.complex128(1 - 1j)}, temp_dir / "summary.json")
        assert json.loads(path.read_text()) == {"value": [1.0, -1.0]}


class TestCheck:
    """Test cases for check status."""

    def test_statuses(self):
        assert Check("r", 1e-12, 1e-10).status == "passed"
        assert Check("r", 1e-9, 1e-10).status == "failed"
        assert Check("control", 0.3, 1e-4, kind="min").status == "passed"
        assert Check("control", 1e-6, 1e-4, kind="min").status == "failed"
        assert Check("oracle", None, 1e-6, kind="skip").status == "skipped"
        assert Check("r", float("nan"), 1.0).status == "failed"
        assert Check("r", None, 1.0).status == "failed"


class TestExperimentRunner:
    """Test cases for ExperimentRunner."""

    def test_special_oracle(self, config_manager, temp_dir):
        result = ExperimentRunner(config_manager, temp_dir).run("special-oracle")
        failed = {check.name: check.value for check in result.failed}
        assert result.passed, f"failed checks: {failed}"
        assert {"theta_oracle", "monodromy"} <= set(result.tables)
        assert result.tables["theta_oracle"].read_text().splitlines()[0].endswith(" seed=7")
        table = ReportingUtils.read_table(result.tables["theta_oracle"])
        assert {"re_z0", "im_z0", "re_theta", "residual"} <= set(table.columns)
        assert len(table) == 100

    def test_summary_records_seed_and_checks(self, config_manager, temp_dir):
        result = ExperimentRunner(config_manager, temp_dir).run("special-oracle")
        summary = json.loads(result.summary_path.read_text())
        assert summary["seed"] == 7
        assert summary["suite"] == "special-oracle"
        assert summary["config"]["lattice"]["omega2"] == [0.1, 0.55]
        assert all(check["status"] == "passed" for check in summary["checks"])
        assert {"name", "value", "tolerance", "passed", "status"} <= set(summary["checks"][0])

    def test_unknown_suite(self, config_manager, temp_dir):
        with pytest.raises(ValueError):
            ExperimentRunner(config_manager, temp_dir).run("plotting")

    def test_missing_section(self, temp_dir, sample_config_data):
        del sample_config_data["rsdyn"]
        manager = ConfigManager(write_config(temp_dir / "c.yaml", sample_config_data))
        with pytest.raises(ValueError, match="rsdyn"):
            ExperimentRunner(manager, temp_dir).check_requirements("rsdyn")

    def test_trisecant_skipped_without_data(self, config_manager, temp_dir):
        result = ExperimentRunner(config_manager, temp_dir).run("trisecant-g2")
        assert result.passed
        assert {check.status for check in result.checks} == {"skipped"}


class TestCommandLine:
    """Exit codes and output files of the driver."""

    def test_success(self, sample_config, temp_dir):
        out = temp_dir / "out"
        code = main(["--config", str(sample_config), "--suite", "special-oracle", "--out", str(out)])
        assert code == 0
        assert (out / "special-oracle" / "summary.json").exists()
        assert (out / "abelian_toda.log").exists()

    def test_reruns_give_identical_bodies(self, sample_config, temp_dir):
        for name in ("a", "b"):
            main(["--config", str(sample_config), "--suite", "special-oracle", "--out", str(temp_dir / name)])
        first = sorted((temp_dir / "a" / "special-oracle").glob("*.csv"))
        assert first
        for path in first:
            assert body(path) == body(temp_dir / "b" / "special-oracle" / path.name), path.name

    def test_seed_override(self, sample_config, temp_dir):
        out = temp_dir / "out"
        main(["--config", str(sample_config), "--suite", "trisecant-g2", "--out", str(out), "--seed", "11"])
        summary = json.loads((out / "trisecant-g2" / "summary.json").read_text())
        assert summary["seed"] == 11

    def test_suite_from_config(self, temp_dir, sample_config_data):
        sample_config_data["suite"] = "trisecant-g2"
        sample_config_data["output_dir"] = str(temp_dir / "out")
        assert main(["--config", write_config(temp_dir / "c.yaml", sample_config_data)]) == 0
        assert (temp_dir / "out" / "trisecant-g2" / "summary.json").exists()

    def test_missing_field(self, temp_dir, sample_config_data, capsys):
        del sample_config_data["lattice"]
        code = main(["--config", write_config(temp_dir / "c.yaml", sample_config_data), "--suite", "special-oracle"])
        assert code == 2
        assert "lattice" in capsys.readouterr().err

    def test_invalid_tolerance(self, temp_dir, sample_config_data, capsys):
        sample_config_data["tolerances"] = {"identities": -1.0}
        code = main(["--config", write_config(temp_dir / "c.yaml", sample_config_data), "--suite", "identities"])
        assert code == 2
        assert "tolerances.identities" in capsys.readouterr().err

    def test_missing_config_file(self, temp_dir):
        assert main(["--config", str(temp_dir / "absent.yaml"), "--suite", "identities"]) == 2

    def test_no_suite(self, sample_config):
        assert main(["--config", str(sample_config)]) == 2

    def test_missing_section_for_suite(self, temp_dir, sample_config_data):
        del sample_config_data["secancy"]
        assert main(["--config", write_config(temp_dir / "c.yaml", sample_config_data), "--suite", "identities"]) == 2

    def test_unreachable_tolerance(self, temp_dir, sample_config_data, capsys):
        """A tolerance below double precision makes the suite fail with the worst row printed."""
        sample_config_data["tolerances"] = {"identities": 1e-18}
        sample_config_data["output_dir"] = str(temp_dir / "out")
        code = main(["--config", write_config(temp_dir / "c.yaml", sample_config_data), "--suite", "identities"])
        assert code == 1
        output = capsys.readouterr().out
        assert "FAILED fay1_holdout" in output
        assert "worst row" in output

    def test_suite_crash_logs_traceback(self, sample_config, temp_dir, mocker):
        """A numerical exception inside a suite exits 1 with the traceback in the log."""
        mocker.patch.object(ExperimentRunner, "run", side_effect=ZeroDivisionError("division in suite"))
        out = temp_dir / "out"
        code = main(["--config", str(sample_config), "--suite", "special-oracle", "--out", str(out)])
        assert code == 1
        log = (out / "abelian_toda.log").read_text()
        assert "Suite special-oracle failed" in log
        assert "Traceback" in log
        assert "ZeroDivisionError: division in suite" in log


@pytest.fixture
def shipped_config(temp_dir):
    """The shipped default configuration, writing into the temp dir."""
    data = yaml.safe_load(SHIPPED_CONFIG.read_text())
    data["output_dir"] = str(temp_dir / "out")
    return write_config(temp_dir / "shipped.yaml", data)


class TestSuites:
    """Every numerical suite end to end."""

    @pytest.mark.parametrize("suite", NUMERICAL_SUITES)
    def test_shipped_config_passes(self, suite, shipped_config, temp_dir, capsys):
        code = main(["--config", shipped_config, "--suite", suite])
        assert code == 0, capsys.readouterr().out
        summary = json.loads((temp_dir / "out" / suite / "summary.json").read_text())
        assert summary["passed"]
        assert summary["checks"]
        assert all(check["status"] in ("passed", "skipped") for check in summary["checks"])

    @pytest.mark.parametrize("suite", ["identities", "rsdyn", "discrete"])
    def test_fixture_config_passes(self, suite, config_manager, temp_dir):
        result = ExperimentRunner(config_manager, temp_dir).run(suite)
        failed = {check.name: check.value for check in result.failed}
        assert result.passed, f"failed checks: {failed}"
        assert result.tables

    def test_waverec_writes_series(self, shipped_config, temp_dir):
        assert main(["--config", shipped_config, "--suite", "waverec"]) == 0
        suite_dir = temp_dir / "out" / "waverec"
        saved = json.loads((suite_dir / "wave_series.json").read_text())
        assert saved["constant_rates"] is not None
        holdout = ReportingUtils.read_table(suite_dir / "recursion_holdout.csv")
        assert holdout["residual"].max() < 1e-8
