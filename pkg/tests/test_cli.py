import json

import numpy as np
import pytest

from ampkit.cli import cli_main, read_samples, write_samples
from ampkit.core import SampleSet, VecSampleSet
from ampkit.harness import exact_tv_decorrelate


@pytest.fixture
def game_config(tmp_path):
    cfg = {"family": "gaussian", "amplifier": "decorrelate",
           "verifier": "mean_distance", "prior": "gaussian",
           "n": 30, "m": 32, "d": 25, "trials": 60, "root_seed": 3}
    path = tmp_path / "game.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_game_reruns_are_byte_identical(game_config, tmp_path, capsys):
    out1 = tmp_path / "a.jsonl"
    out2 = tmp_path / "b.jsonl"
    assert cli_main(["game", "--config", game_config, "--trials", "50",
                     "--seed", "7", "--output", str(out1)]) == 0
    assert cli_main(["game", "--config", game_config, "--trials", "50",
                     "--seed", "7", "--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    row = json.loads(out1.read_text())
    assert row["trials"] == 50 and row["seed"] == 7
    assert 0.0 <= row["ci_lo"] <= row["accept_rate"] <= row["ci_hi"] <= 1.0


def test_game_csv_format(game_config, capsys):
    assert cli_main(["game", "--config", game_config, "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "config_hash,seed,trials,accept_rate,ci_lo,ci_hi"
    assert len(lines) == 2


def test_tv_gaussian_exact_matches_library(capsys):
    assert cli_main(["tv", "--mode", "gaussian-exact", "--n", "5", "--m", "6",
                     "--d", "1"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["tv"] == pytest.approx(exact_tv_decorrelate(5, 6, 1))


def test_tv_bernoulli_and_counts(capsys):
    assert cli_main(["tv", "--mode", "bernoulli-exact", "--n", "20",
                     "--extra", "2", "--p", "0.3"]) == 0
    exact = json.loads(capsys.readouterr().out)["tv"]
    assert cli_main(["tv", "--mode", "counts-mc", "--n", "20", "--c", "0.1",
                     "--p", "0.3", "--trials", "20000", "--seed", "4"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert abs(payload["tv_estimate"] - exact) < payload["bias_bound"] + 0.02


def test_verify_rejects_degenerate_file(tmp_path, capsys):
    d = 400
    sample = tmp_path / "z.txt"
    write_samples(str(sample), VecSampleSet(np.ones((100, d))), d)
    dist = tmp_path / "dist.json"
    dist.write_text(json.dumps({"family": "gaussian", "mu": [1.0] * d}))
    assert cli_main(["verify", "--input", str(sample), "--dist", str(dist),
                     "--verifier", "mean-distance"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "reject"


def test_amplify_roundtrip_discrete(tmp_path):
    src = tmp_path / "in.txt"
    write_samples(str(src), SampleSet(np.arange(64) % 4), 16)
    dst = tmp_path / "out.txt"
    assert cli_main(["amplify", "--method", "discrete", "--input", str(src),
                     "--output", str(dst), "--eps", "0.9", "--seed", "5"]) == 0
    family, out, k = read_samples(str(dst))
    assert family == "discrete" and k == 16
    assert len(out) >= 64


def test_amplify_decorrelate_vectors(tmp_path):
    src = tmp_path / "in.txt"
    write_samples(str(src), VecSampleSet(np.random.default_rng(0)
                                         .standard_normal((10, 3))), 3)
    dst = tmp_path / "out.txt"
    assert cli_main(["amplify", "--method", "decorrelate", "--input", str(src),
                     "--output", str(dst), "--m", "13", "--seed", "2"]) == 0
    _, out, d = read_samples(str(dst))
    assert d == 3 and len(out) == 13


def test_demo_regression_csv(capsys):
    assert cli_main(["demo", "regression", "--n", "25", "28", "--d", "20",
                     "--trials", "200", "--seed", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("n,d,trials")
    assert len(lines) == 3


def test_calibrate_sweep(game_config, capsys):
    assert cli_main(["calibrate", "--config", game_config, "--m-grid", "30,40",
                     "--trials", "40", "--seed", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and lines[0].endswith(",m")


def test_missing_config_is_exit_2(capsys):
    assert cli_main(["game", "--config", "/nonexistent.json"]) == 2


def test_bad_game_config_is_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"family": "gaussian", "amplifier": "nope",
                                "verifier": "mean_distance", "prior": "gaussian",
                                "n": 5, "m": 6, "trials": 5, "root_seed": 0,
                                "d": 2}))
    assert cli_main(["game", "--config", str(path)]) == 2


def test_malformed_sample_file_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("d=2\n0.5,0.5\noops\n")
    rc = cli_main(["verify", "--input", str(bad), "--dist", "x.json",
                   "--verifier", "mean-distance"])
    assert rc == 2
    assert ":3:" in capsys.readouterr().err


def test_numeric_failure_is_exit_3(tmp_path, capsys, monkeypatch):
    import ampkit.cli as cli_mod
    monkeypatch.setattr(cli_mod, "exact_tv_decorrelate",
                        lambda *a: (_ for _ in ()).throw(ArithmeticError("boom")))
    assert cli_main(["tv", "--mode", "gaussian-exact", "--n", "5", "--m", "6",
                     "--d", "1"]) == 3
