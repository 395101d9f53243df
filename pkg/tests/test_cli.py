"""Command-line interface: exit codes, file formats, determinism."""

import json

import pytest

from rotamax.cli import main
from rotamax.service import NODE_LOG_HEADER


def run_cli(args):
    try:
        return main(args)
    except SystemExit as exc:
        return int(exc.code or 0)


@pytest.fixture()
def scene_files(tmp_path):
    corr = tmp_path / "corr.json"
    gt = tmp_path / "gt.json"
    code = run_cli(
        [
            "simulate",
            "--lines",
            "10",
            "--outlier-ratio",
            "0.2",
            "--seed",
            "5",
            "--out",
            str(corr),
            "--gt",
            str(gt),
        ]
    )
    assert code == 0
    return corr, gt


class TestSimulate:
    def test_writes_both_files(self, scene_files):
        corr, gt = scene_files
        doc = json.loads(corr.read_text())
        assert len(doc["records"]) == 10
        for rec in doc["records"]:
            assert set(rec) <= {"v", "n", "abc"}
            assert "v" in rec and "n" in rec
        gt_doc = json.loads(gt.read_text())
        assert set(gt_doc) == {
            "rotation",
            "translation",
            "inlier_mask",
            "line_points",
        }

    def test_byte_identical_rerun(self, tmp_path, scene_files):
        corr, gt = scene_files
        corr2 = tmp_path / "corr2.json"
        gt2 = tmp_path / "gt2.json"
        assert (
            run_cli(
                [
                    "simulate",
                    "--lines",
                    "10",
                    "--outlier-ratio",
                    "0.2",
                    "--seed",
                    "5",
                    "--out",
                    str(corr2),
                    "--gt",
                    str(gt2),
                ]
            )
            == 0
        )
        assert corr.read_bytes() == corr2.read_bytes()
        assert gt.read_bytes() == gt2.read_bytes()

    def test_zero_lines_usage_error(self, tmp_path):
        code = run_cli(
            [
                "simulate",
                "--lines",
                "0",
                "--out",
                str(tmp_path / "a.json"),
                "--gt",
                str(tmp_path / "b.json"),
            ]
        )
        assert code == 2

    def test_ratio_above_one_usage_error(self, tmp_path):
        code = run_cli(
            [
                "simulate",
                "--lines",
                "5",
                "--outlier-ratio",
                "1.5",
                "--out",
                str(tmp_path / "a.json"),
                "--gt",
                str(tmp_path / "b.json"),
            ]
        )
        assert code == 2


class TestSolve:
    def test_result_document(self, tmp_path, scene_files):
        corr, _ = scene_files
        out = tmp_path / "result.json"
        code = run_cli(
            [
                "solve",
                "--input",
                str(corr),
                "--epsilon",
                "1e-4",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert set(doc) == {
            "rotation",
            "consensus",
            "upper_bound",
            "gap",
            "inliers",
            "stats",
        }
        assert doc["consensus"] >= 8
        assert doc["gap"] == doc["upper_bound"] - doc["consensus"]

    def test_byte_identical_rerun(self, tmp_path, scene_files):
        corr, _ = scene_files
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        for out in (a, b):
            assert (
                run_cli(
                    ["solve", "--input", str(corr), "--epsilon", "1e-4", "--out", str(out)]
                )
                == 0
            )
        assert a.read_bytes() == b.read_bytes()

    def test_node_log(self, tmp_path, scene_files):
        corr, _ = scene_files
        log = tmp_path / "nodes.csv"
        code = run_cli(
            [
                "solve",
                "--input",
                str(corr),
                "--epsilon",
                "1e-3",
                "--out",
                str(tmp_path / "r.json"),
                "--node-log",
                str(log),
            ]
        )
        assert code == 0
        lines = log.read_text().strip().splitlines()
        assert lines[0] == NODE_LOG_HEADER
        assert len(lines) > 1

    def test_zero_epsilon_usage_error(self, tmp_path, scene_files):
        corr, _ = scene_files
        code = run_cli(["solve", "--input", str(corr), "--epsilon", "0"])
        assert code == 2

    def test_missing_file_data_error(self, tmp_path, capsys):
        code = run_cli(
            ["solve", "--input", str(tmp_path / "nope.json"), "--epsilon", "1e-3"]
        )
        assert code == 1

    def test_malformed_json_reports_location(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"records": [')
        code = run_cli(["solve", "--input", str(bad), "--epsilon", "1e-3"])
        assert code == 1
        err = capsys.readouterr().err
        assert "line" in err and "column" in err

    def test_bad_record_reports_index(self, tmp_path, capsys):
        bad = tmp_path / "badrec.json"
        bad.write_text(
            json.dumps(
                {
                    "records": [
                        {"v": [1.0, 0.0, 0.0], "n": [0.0, 1.0, 0.0]},
                        {"v": [0.0, 0.0, 1.0]},
                    ]
                }
            )
        )
        code = run_cli(["solve", "--input", str(bad), "--epsilon", "1e-3"])
        assert code == 1
        err = capsys.readouterr().err
        assert "records" in err and "1" in err


class TestVerifyBounds:
    def test_small_clean_run(self, tmp_path):
        out = tmp_path / "report.json"
        code = run_cli(
            ["verify-bounds", "--trials", "5", "--grid", "80", "--out", str(out)]
        )
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["ok"] is True
        assert rep["max_soundness_violation"] <= 1e-9
        assert "worst_violation" in rep

    def test_zero_trials_usage_error(self):
        assert run_cli(["verify-bounds", "--trials", "0"]) == 2


class TestBenchmark:
    def test_quick_run(self, capsys):
        code = run_cli(
            [
                "benchmark",
                "--lines",
                "8",
                "--outlier-ratio",
                "0.25",
                "--epsilon",
                "1e-3",
                "--trials",
                "2",
                "--seed",
                "1",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "median" in out

    def test_zero_trials_usage_error(self):
        assert run_cli(["benchmark", "--trials", "0"]) == 2


class TestUsage:
    def test_no_command(self):
        assert run_cli([]) == 2

    def test_unknown_command(self):
        assert run_cli(["frobnicate"]) == 2

    def test_unknown_flag(self):
        assert run_cli(["simulate", "--lines", "5", "--bogus", "1"]) == 2
