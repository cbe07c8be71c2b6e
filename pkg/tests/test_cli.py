"""
Tests for the command-line interface
"""
import json
import math

import pandas as pd
import pytest

from src.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from src.core.errors import ConvergenceError, RootBracketError, StepFailureError
from src.storage.models import CriterionResult, ReportSummary

pytestmark = pytest.mark.integration


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("REEBFLOW_SEED", "REEBFLOW_OUTPUT_DIR", "REEBFLOW_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def json_lines(text: str):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


class TestVolume:
    def test_text_output(self, capsys):
        assert main(["volume", "--reeb", "1,1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("volume at 1")

    def test_json_output(self, capsys):
        assert main(["--json", "volume", "--reeb", "0.5,1.5"]) == EXIT_OK
        [record] = json_lines(capsys.readouterr().out)
        assert record["relative_volume"] == pytest.approx(1 / 0.75, rel=1e-12)
        assert record["volume"] == pytest.approx(2 * math.pi ** 2 / 0.75, rel=1e-12)

    @pytest.mark.parametrize("value", ["0,2", "1,abc", "1"])
    def test_bad_reeb_names_flag(self, capsys, value):
        assert main(["volume", "--reeb", value]) == EXIT_USAGE
        assert "--reeb" in capsys.readouterr().err

    def test_boundary_failure_names_flag(self, capsys):
        assert main(["volume", "--reeb", "1e-9,2"]) == EXIT_FAILED
        err = capsys.readouterr().err
        assert "--reeb:" in err and "boundary" in err


class TestFutaki:
    def test_zero_at_round_point(self, capsys):
        assert main(["--json", "futaki", "--reeb", "1,1,1", "--direction", "1,0,-1"]) == EXIT_OK
        [record] = json_lines(capsys.readouterr().out)
        assert abs(record["futaki"]) < 1e-12

    def test_non_tangent_direction(self, capsys):
        assert main(["futaki", "--reeb", "1,1", "--direction", "1,1"]) == EXIT_USAGE
        assert "--direction" in capsys.readouterr().err

    def test_direction_length(self, capsys):
        assert main(["futaki", "--reeb", "1,1", "--direction", "1,0,-1"]) == EXIT_USAGE
        assert "--direction" in capsys.readouterr().err


class TestFlowCommands:
    def test_flow_writes_csv_and_svg(self, tmp_path, capsys):
        csv_path, svg_path = tmp_path / "flow.csv", tmp_path / "flow.svg"
        code = main(["--json", "flow", "--start", "0.5,1.5", "--out", str(csv_path), "--svg", str(svg_path)])
        assert code == EXIT_OK
        [record] = json_lines(capsys.readouterr().out)
        assert record["terminated_by"] == "gradient_tolerance"
        frame = pd.read_csv(csv_path)
        assert list(frame.columns[:4]) == ["t", "a0", "a1", "volume"]
        assert (frame["volume"].diff().dropna() <= 1e-12 * frame["volume"].max()).all()
        assert svg_path.read_text().startswith("<?xml")

    def test_flow_mu_needs_n_one(self, capsys):
        assert main(["flow", "--start", "0.5,1,1.5", "--mu"]) == EXIT_USAGE
        assert "--mu" in capsys.readouterr().err

    def test_minimize(self, capsys):
        assert main(["--json", "minimize", "--start", "0.3,1.2,1.5"]) == EXIT_OK
        [record] = json_lines(capsys.readouterr().out)
        assert record["reeb"] == pytest.approx([1.0, 1.0, 1.0], abs=1e-9)


class TestSolitonCommands:
    def test_profile_csv(self, tmp_path, capsys):
        path = tmp_path / "profile.csv"
        assert main(["--json", "soliton", "--weights", "1,2", "--out", str(path)]) == EXIT_OK
        [record] = json_lines(capsys.readouterr().out)
        assert record["b"] > 0 and record["residual"] < 1e-10
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["x", "phi", "K_T", "f"]
        assert frame["phi"].iloc[0] == 0.0

    def test_sweep(self, capsys):
        assert main(["--json", "soliton", "--sweep", "1:2:3"]) == EXIT_OK
        records = json_lines(capsys.readouterr().out)
        assert [r["ratio"] for r in records] == [1.0, 1.5, 2.0]
        assert all(r["sign_agrees"] for r in records)

    def test_bad_sweep(self, capsys):
        assert main(["soliton", "--sweep", "2:1:3"]) == EXIT_USAGE
        assert "--sweep" in capsys.readouterr().err

    def test_weights_need_two_entries(self, capsys):
        assert main(["soliton", "--weights", "1,2,3"]) == EXIT_USAGE
        assert "--weights" in capsys.readouterr().err

    def test_entropy(self, capsys):
        assert main(["--json", "entropy", "--weights", "1,2"]) == EXIT_OK
        [record] = json_lines(capsys.readouterr().out)
        assert record["mu"] == record["W"]
        assert record["bound_ok"] is True


class TestConfigHandling:
    def test_config_error_exits_two(self, tmp_path, capsys):
        path = tmp_path / "bad.conf"
        path.write_text("n = 1\nflow.dt0 = 0\n")
        assert main(["--config", str(path), "volume", "--reeb", "1,1"]) == EXIT_USAGE
        err = capsys.readouterr().err
        assert "flow.dt0" in err and "line 2" in err

    def test_missing_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == EXIT_USAGE

    def test_failed_report_exits_one(self, mocker, tmp_path, capsys):
        summary = ReportSummary(n=1, criteria=[CriterionResult(name="convexity", passed=False, detail="x")])
        run = mocker.patch("src.cli.report", return_value=summary)
        assert main(["report", "--out-dir", str(tmp_path)]) == EXIT_FAILED
        assert run.call_args.args[0].output.dir == str(tmp_path)
        assert "[FAIL] convexity" in capsys.readouterr().out

    def test_computation_failure_exits_one(self, mocker, capsys):
        mocker.patch("src.cli.flow.minimize_volume", side_effect=ConvergenceError("line search exhausted"))
        assert main(["minimize", "--start", "0.5,1.5"]) == EXIT_FAILED
        assert "--start: line search exhausted" in capsys.readouterr().err

    def test_flow_failure_names_config_key(self, mocker, capsys):
        mocker.patch("src.cli.flow.run_flow", side_effect=StepFailureError("volume kept rising"))
        assert main(["flow"]) == EXIT_FAILED
        assert "flow.start: volume kept rising" in capsys.readouterr().err

    def test_soliton_failure_names_flag(self, mocker, capsys):
        mocker.patch("src.cli.soliton_ode.solve_soliton", side_effect=RootBracketError("no sign change", [0.0, 1.0]))
        assert main(["soliton", "--weights", "1,2"]) == EXIT_FAILED
        assert "--weights: no sign change" in capsys.readouterr().err
