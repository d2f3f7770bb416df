"""
测试命令行入口
"""
import json
from pathlib import Path

import pandas as pd
import pytest

from main import main

ROOT = Path(__file__).parent.parent
CONFIGS = ROOT / "configs"


def test_bound_toy_spec(capsys):
    code = main(["bound", "--spec", str(CONFIGS / "toy_orthogonal_tanh.yaml"), "--theorem", "thm1",
                 "--samples", "100", "--mc-samples", "1000"])
    out = capsys.readouterr().out
    assert code == 0
    assert "seed = 0" in out
    assert "bound = 0.15431" in out


def test_bound_not_applicable_names_alternative(capsys):
    code = main(["bound", "--spec", str(CONFIGS / "singular_dense.yaml"), "--theorem", "thm2",
                 "--mc-samples", "1000"])
    assert code == 1
    assert "thm4" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["bound", "--spec", str(tmp_path / "nope.yaml")]) == 2
    assert main(["train", "--config", str(tmp_path / "nope.yaml")]) == 2
    assert "not found" in capsys.readouterr().err


def test_bad_override_exits_2(capsys):
    code = main(["bound", "--spec", str(CONFIGS / "toy_orthogonal_tanh.yaml"), "--set", "no_equals_sign"])
    assert code == 2


def test_bound_reports_are_byte_identical(tmp_path):
    args = ["bound", "--spec", str(CONFIGS / "toy_orthogonal_tanh.yaml"), "--theorem", "thm3",
            "--mc-samples", "2000", "--seed", "4"]
    assert main(args + ["--report", str(tmp_path / "a.json")]) == 0
    assert main(args + ["--report", str(tmp_path / "b.json")]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    report = json.loads((tmp_path / "a.json").read_text())
    assert report["theorem"] == "thm3"


def test_kernel_single_tuple(tmp_path, capsys):
    out_path = tmp_path / "gram.csv"
    code = main(["kernel", "--spec", str(CONFIGS / "affine_kernel.yaml"), "--tuples", "1",
                 "--samples", "2000", "--workers", "1", "--out", str(out_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "gram size = 1" in out
    assert "psd verdict: pass" in out
    assert len(pd.read_csv(out_path)) == 1


def test_kernel_default_output(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code = main(["kernel", "--spec", str(CONFIGS / "affine_kernel.yaml"), "--tuples", "2",
                 "--samples", "2000", "--workers", "1"])
    assert code == 0
    frame = pd.read_csv(tmp_path / "output" / "gram.csv")
    assert list(frame.columns) == ["i", "j", "real", "imag", "stderr"]
    assert len(frame) == 4


def test_kernel_rejects_zero_tuples():
    assert main(["kernel", "--spec", str(CONFIGS / "affine_kernel.yaml"), "--tuples", "0"]) == 2


def test_train_zero_epochs(tmp_path, capsys):
    code = main(["train", "--config", str(CONFIGS / "synthetic_train.yaml"), "--out", str(tmp_path),
                 "--set", "epochs=0", "--set", "sample_size=50", "--set", "test_size=20", "--workers", "1"])
    out = capsys.readouterr().out
    assert code == 0
    assert "run 0: epoch 0" in out
    frame = pd.read_csv(tmp_path / "synthetic_regression_0.csv")
    assert len(frame) == 1


def test_train_unknown_field_exits_2(tmp_path):
    code = main(["train", "--config", str(CONFIGS / "synthetic_train.yaml"), "--out", str(tmp_path),
                 "--set", "epochz=1"])
    assert code == 2


def test_help(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    for command in ("bound", "verify", "train", "kernel"):
        assert command in out
