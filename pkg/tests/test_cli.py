"""CLI tests using the in-process service client."""

import json

import pytest

from ecert.cli import build_parser, main


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParser:
    def test_requires_subcommand(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_certify_defaults(self):
        args = build_parser().parse_args(["certify", "--dim", "2"])
        assert args.strategy == "unif"
        assert args.budget == 1000
        assert args.theta == 0.75
        assert args.regions == 10
        assert args.b_policy == "min"
        assert args.exit_gap == 0.1
        assert args.repeat == 1
        assert args.format == "json"
        assert args.server is None

    def test_comma_lists(self):
        args = build_parser().parse_args(
            ["bench", "--dims", "1,2,10", "--budgets", "100,1000", "--strategies", "unif,adapti"]
        )
        assert args.dims == [1, 2, 10]
        assert args.budgets == [100, 1000]
        assert args.strategies == ["unif", "adapti"]
        assert args.seeds == list(range(10))

    def test_x0_parsing(self):
        args = build_parser().parse_args(["certify", "--dim", "3", "--x0", "0.1,-0.2,0.0"])
        assert args.x0 == [0.1, -0.2, 0.0]

    def test_unknown_strategy_rejected(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["certify", "--dim", "1", "--strategy", "bogus"])


class TestCertifyCommand:
    def test_json_to_stdout(self, capsys):
        code, out, err = _run(
            capsys, "certify", "--dim", "1", "--budget", "200", "--seed", "0"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["schema_version"] == 1
        assert doc["runs"][0]["w"] == pytest.approx(1.0, abs=0.1)

    def test_out_file(self, capsys, tmp_path):
        dest = tmp_path / "run.json"
        code, out, _ = _run(
            capsys, "certify", "--dim", "1", "--budget", "100", "--out", str(dest)
        )
        assert code == 0
        assert out == ""
        doc = json.loads(dest.read_text())
        assert doc["summary"]["n_runs"] == 1

    def test_repeat_and_explanation(self, capsys):
        code, out, _ = _run(
            capsys,
            "certify",
            "--dim",
            "2",
            "--budget",
            "100",
            "--repeat",
            "2",
            "--explanation",
            "0.75,0.75",
        )
        assert code == 0
        assert json.loads(out)["summary"]["n_runs"] == 2

    def test_server_error_exits_one(self, capsys):
        # alpha length disagrees with dim: the service answers 422
        code, out, err = _run(
            capsys, "certify", "--dim", "2", "--budget", "100", "--explanation", "0.75"
        )
        assert code == 1
        assert out == ""
        assert "error 422" in err

    def test_csv_rejected(self, capsys):
        code, _, err = _run(
            capsys, "certify", "--dim", "1", "--budget", "100", "--format", "csv"
        )
        assert code == 2
        assert "csv" in err


class TestBoundsCommand:
    def test_bounds_json(self, capsys):
        code, out, _ = _run(
            capsys,
            "bounds",
            "--dim",
            "1",
            "--budget",
            "300",
            "--epsilon",
            "0.01",
            "--evt",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["runs"][0]["exp_bound"] >= 0.0
        assert doc["runs"][0]["evt_bound"] is not None

    def test_bounds_evt_staged_strategy_fails(self, capsys):
        code, _, err = _run(
            capsys, "bounds", "--dim", "1", "--budget", "100", "--strategy", "adapti", "--evt"
        )
        assert code == 1
        assert "error 422" in err


class TestBenchCommand:
    def test_csv_output(self, capsys):
        code, out, _ = _run(
            capsys,
            "bench",
            "--dims",
            "1",
            "--budgets",
            "64",
            "--strategies",
            "unif",
            "--seeds",
            "0,1",
            "--format",
            "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("d,Q,strategy,w_mean")
        assert len(lines) == 2

    def test_json_output(self, capsys):
        code, out, _ = _run(
            capsys,
            "bench",
            "--dims",
            "1",
            "--budgets",
            "64",
            "--strategies",
            "unif",
            "--seeds",
            "0",
        )
        assert code == 0
        assert len(json.loads(out)["rows"]) == 1


class TestCoverageCommand:
    def test_generated_clusters(self, capsys):
        code, out, _ = _run(
            capsys,
            "coverage",
            "--dim",
            "3",
            "--clusters",
            "2",
            "--per-cluster",
            "3",
            "--budget",
            "100",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["n_effective"] <= 6
        assert doc["picks"]

    def test_data_file(self, capsys, tmp_path):
        data = tmp_path / "xs.json"
        data.write_text(json.dumps([[0.01, 0.0], [0.0, 0.02], [-0.01, 0.01]]))
        code, out, _ = _run(
            capsys, "coverage", "--dim", "2", "--data", str(data), "--budget", "100"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["n_effective"] == 3
        assert len(doc["picks"]) == 1


class TestStabilityCommand:
    def test_pairs_file(self, capsys, tmp_path):
        pairs = tmp_path / "pairs.json"
        pairs.write_text(json.dumps([[[1, 2, 3, 4, 5], [1, 2, 3, 5, 4]]]))
        code, out, _ = _run(capsys, "stability", "--pairs", str(pairs), "--k", "2")
        assert code == 0
        doc = json.loads(out)
        assert doc["spearman_mean"] == pytest.approx(0.9)

    def test_pairs_stdin(self, capsys, monkeypatch, tmp_path):
        src = tmp_path / "stdin.json"
        src.write_text(json.dumps([[[3, 1], [3, 1]]]))
        with open(src) as fp:
            monkeypatch.setattr("sys.stdin", fp)
            code, out, _ = _run(capsys, "stability", "--pairs", "-", "--k", "1")
        assert code == 0
        assert json.loads(out)["topk_mean"] == pytest.approx(1.0)
