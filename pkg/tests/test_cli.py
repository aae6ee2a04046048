import csv
import json

import pytest

from latentcfr import cli


def run(argv):
    return cli.main(argv)


class TestSolveAndExploitability:
    def test_solve_rpssl_and_measure(self, tmp_path, capsys):
        out = tmp_path / "rpssl.json.gz"
        assert run(["solve", "--game", "rpssl", "--iterations", "200",
                    "--seed", "1", "--out", str(out)]) == 0
        assert out.exists()
        assert run(["exploitability", "--checkpoint", str(out)]) == 0
        lines = capsys.readouterr().out.splitlines()
        aggregate = float(lines[-1].rsplit(" ", 1)[1])
        assert aggregate <= 0.02

    def test_solve_werewolf4_es(self, tmp_path):
        out = tmp_path / "w4.json.gz"
        assert run(["solve", "--game", "werewolf4", "--iterations", "30",
                    "--seed", "2", "--traversal", "external_sampling",
                    "--k", "2", "--out", str(out)]) == 0
        assert out.exists()


class TestRpsslDemo:
    def test_csv_columns(self, tmp_path):
        out = tmp_path / "demo.csv"
        assert run(["rpssl-demo", "--iterations", "300", "--log-every", "100",
                    "--out", str(out)]) == 0
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["iteration", "p_rock", "p_paper", "p_scissors",
                           "p_spock", "p_lizard", "exploitability"]
        assert len(rows) == 4  # header + 3 checkpoints
        final = rows[-1]
        assert float(final[-1]) <= 0.05

    def test_restricted_demo(self, tmp_path):
        out = tmp_path / "demo.csv"
        assert run(["rpssl-demo", "--iterations", "200", "--log-every", "200",
                    "--restrict", "Rock,Paper,Scissors", "--out", str(out)]) == 0
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert float(rows[-1][4]) == 0.0  # no mass on Spock
        assert float(rows[-1][-1]) == pytest.approx(1 / 3, abs=0.02)


class TestPipelineAndEval:
    def test_end_to_end(self, tmp_path, capsys):
        out = tmp_path / "pipeline"
        assert run(["pipeline", "--game", "werewolf4", "--iterations", "2",
                    "--solver-iterations", "25", "--candidates", "2",
                    "--games", "3", "--seed", "4", "--k-initial", "2",
                    "--no-metrics", "--out", str(out)]) == 0
        ck1 = out / "iter_1" / "checkpoint.json.gz"
        ck2 = out / "iter_2" / "checkpoint.json.gz"
        assert ck1.exists() and ck2.exists()
        assert (out / "iter_1" / "dataset.jsonl").exists()

        eval_dir = tmp_path / "eval"
        assert run(["eval", "head2head", "--wolf", str(ck2), "--village",
                    str(ck1), "--games", "20", "--seed", "3",
                    "--out", str(eval_dir)]) == 0
        report = json.loads((eval_dir / "report.json").read_text())
        assert report["games"] == 20
        assert (report["wolf_wins"] + report["village_wins"] + report["draws"]) == 20

        assert run(["eval", "predict", "--replays", str(eval_dir / "replays.jsonl"),
                    "--checkpoint", str(ck2), "--max-particles", "500"]) == 0
        assert "per-prediction accuracy" in capsys.readouterr().out
