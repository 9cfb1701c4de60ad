import csv
import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from dnacap.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def channel_file(tmp_path):
    def write(rows, name="channel.json"):
        path = tmp_path / name
        path.write_text(json.dumps({"rows": rows}))
        return str(path)

    return write


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


NEAR_IDENTITY = [[1 - 2e-6, 2e-6], [2e-6, 1 - 2e-6]]


class TestBoundsCommand:
    def test_near_noiseless_bounds_coincide(self, runner, channel_file, tmp_path):
        out = tmp_path / "bounds.csv"
        result = runner.invoke(main, [
            "bounds", "--channel", channel_file(NEAR_IDENTITY), "--alpha", "5",
            "--beta", "4", "--dbar", "12", "--output", str(out)])
        assert result.exit_code == 0, result.output
        rows = read_csv(str(out))
        assert rows[0] == ["beta", "lb", "ub", "lb_px0", "lb_px1",
                           "ub_px0", "ub_px1", "trunc_err"]
        beta, lb, ub = float(rows[1][0]), float(rows[1][1]), float(rows[1][2])
        trunc = float(rows[1][7])
        assert beta == 4.0
        assert ub - trunc == pytest.approx(lb, abs=1e-9)

    def test_malformed_json_exit_2(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        result = runner.invoke(main, [
            "bounds", "--channel", str(bad), "--alpha", "5", "--beta", "4",
            "--output", str(tmp_path / "o.csv")])
        assert result.exit_code == 2

    def test_row_sum_error_exit_2(self, runner, channel_file, tmp_path):
        path = channel_file([[0.5, 0.5], [0.7, 0.2]])
        result = runner.invoke(main, [
            "bounds", "--channel", path, "--alpha", "5", "--beta", "4",
            "--output", str(tmp_path / "o.csv")])
        assert result.exit_code == 2

    def test_sweep_deterministic_bytes(self, runner, channel_file, tmp_path):
        path = channel_file([[0.9, 0.1], [0.2, 0.8]])
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            result = runner.invoke(main, [
                "bounds", "--channel", path, "--alpha", "3",
                "--beta-range", "2:3:0.5", "--dbar", "8", "--output", str(out)])
            assert result.exit_code == 0, result.output
        assert out1.read_bytes() == out2.read_bytes()
        assert len(read_csv(str(out1))) == 4  # header + 3 betas

    def test_zero_entry_channel_leaves_ub_blank(self, runner, channel_file, tmp_path):
        path = channel_file([[1.0, 0.0], [0.0, 1.0]])
        out = tmp_path / "o.csv"
        result = runner.invoke(main, [
            "bounds", "--channel", path, "--alpha", "3", "--beta", "2",
            "--dbar", "6", "--output", str(out)])
        assert result.exit_code == 0
        rows = read_csv(str(out))
        assert rows[1][2] == ""  # no upper bound without a finite max LLR
        assert float(rows[1][1]) > 0

    def test_plot_file_written(self, runner, channel_file, tmp_path):
        path = channel_file([[0.9, 0.1], [0.2, 0.8]])
        out = tmp_path / "bounds.csv"
        result = runner.invoke(main, [
            "bounds", "--channel", path, "--alpha", "3",
            "--beta-range", "2:3:0.5", "--dbar", "6", "--output", str(out), "--plot"])
        assert result.exit_code == 0
        assert (tmp_path / "bounds.png").exists()


class TestReliabilityCommand:
    def test_curve_csv(self, runner, channel_file, tmp_path):
        path = channel_file([[0.9, 0.1], [0.1, 0.9]])
        out = tmp_path / "rel.csv"
        result = runner.invoke(main, [
            "reliability", "--channel", path, "--alpha", "3", "--beta", "3",
            "--dbar", "6", "--rates", "0:0.2:0.1", "--output", str(out)])
        assert result.exit_code == 0, result.output
        rows = read_csv(str(out))
        assert rows[0][:3] == ["R", "exponent", "beta"]
        exps = [float(r[1]) for r in rows[1:]]
        assert all(np.diff(exps) <= 1e-8)


class TestCriticalBetaCommand:
    def test_bsc_json(self, runner, channel_file):
        path = channel_file([[0.95, 0.05], [0.05, 0.95]])
        result = runner.invoke(main, [
            "critical-beta", "--channel", path, "--alpha", "5", "--dbar", "10"])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["beta_cr"] == pytest.approx(5.274382191883075, abs=1e-3)
        assert payload["beta_cr_uniform"] == pytest.approx(5.274382191883075, abs=1e-9)


class TestSymmetryCommand:
    def test_report_json(self, runner, channel_file):
        path = channel_file([[0.7, 0.2, 0.1], [0.1, 0.7, 0.2], [0.2, 0.1, 0.7]])
        result = runner.invoke(main, ["symmetry", "--channel", path, "--order", "2"])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["gallager_symmetric"] is True
        assert payload["is_modulo_additive"] is False  # merged extension is 3x6
        covered = sorted(c for blk in payload["gallager_partition"] for c in blk)
        assert covered == list(range(6))


class TestSimulateCommand:
    def test_json_output_and_determinism(self, runner, channel_file):
        path = channel_file([[0.9, 0.1], [0.1, 0.9]])
        args = ["simulate", "--channel", path, "--alpha", "1", "--beta", "2.9",
                "--m", "2", "--rate", "0.17", "--trials", "400", "--seed", "5"]
        r1 = runner.invoke(main, args)
        r2 = runner.invoke(main, args)
        assert r1.exit_code == 0, r1.output
        assert r1.output == r2.output
        payload = json.loads(r1.output)
        assert set(payload) == {"error_rate", "ci_low", "ci_high", "trials", "seed"}
        assert payload["trials"] == 400
        assert 0.0 <= payload["ci_low"] <= payload["error_rate"] <= payload["ci_high"] <= 1.0


class TestReproCommand:
    def test_unknown_figure_exit_2(self, runner, tmp_path):
        result = runner.invoke(main, ["repro", "fig9", "--output", str(tmp_path / "x.csv")])
        assert result.exit_code == 2

    def test_fig2_ratio_and_plot(self, runner, tmp_path):
        out = tmp_path / "fig2.csv"
        result = runner.invoke(main, ["repro", "fig2", "--output", str(out)])
        assert result.exit_code == 0, result.output
        rows = read_csv(str(out))
        assert rows[0] == ["w", "beta_cr_unif", "beta_bar", "ratio"]
        by_w = {float(r[0]): r for r in rows[1:]}
        assert 0.05 in by_w
        assert float(by_w[0.05][3]) == pytest.approx(1.9673237092798787, abs=1e-9)
        # thresholds are computed over w in (0, 0.125)
        assert max(by_w) < 0.125
        assert (tmp_path / "fig2.png").exists()

    def test_fig2_deterministic(self, runner, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert runner.invoke(main, ["repro", "fig2", "--output", str(out),
                                        "--no-plot"]).exit_code == 0
        assert a.read_bytes() == b.read_bytes()
