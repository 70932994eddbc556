import os
import subprocess
import sys

import numpy as np
import pytest

from corrfuse.cli import main
from corrfuse.fileio import read_quat_csv


@pytest.fixture(scope="module")
def exp2(tmp_path_factory):
    d = tmp_path_factory.mktemp("exp2")
    assert main(["simulate", "--preset", "exp2", "--seed", "1", "--out-dir", str(d)]) == 0
    return d


def test_simulate_deterministic(exp2, tmp_path):
    assert main(["simulate", "--preset", "exp2", "--seed", "1", "--out-dir", str(tmp_path)]) == 0
    for name in ("imu.csv", "truth.csv"):
        assert (tmp_path / name).read_bytes() == (exp2 / name).read_bytes()


def test_simulate_row_count(exp2):
    lines = (exp2 / "imu.csv").read_text().splitlines()
    assert len(lines) - 1 == 60 * 400 + 1


def test_simulate_bad_preset(capsys):
    assert main(["simulate", "--preset", "exp9"]) == 2
    err = capsys.readouterr().err
    assert "exp1" in err and "exp5" in err


def test_simulate_io_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["simulate", "--preset", "exp1", "--out-dir", str(blocker / "sub")]) == 3


def test_missing_argument_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["estimate", "--algo", "gd"])
    assert exc.value.code == 2


def test_estimate_large_bandwidth_equivalence(exp2, tmp_path, capsys):
    cfg = tmp_path / "big.cfg"
    cfg.write_text("sigma_a = 1e6\nsigma_m = 1e6\n")
    for algo in ("gd", "cgd"):
        assert main(["estimate", "--algo", algo, "--input", str(exp2 / "imu.csv"), "--config", str(cfg),
                     "--out", str(tmp_path / f"{algo}.csv")]) == 0
    assert "steps/s" in capsys.readouterr().out
    _, a = read_quat_csv(tmp_path / "gd.csv")
    _, b = read_quat_csv(tmp_path / "cgd.csv")
    assert np.max(np.abs(a - b)) <= 1e-8


def test_estimate_replay_and_evaluate(exp2, tmp_path, capsys):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (out1, out2):
        assert main(["estimate", "--algo", "cdoe", "--input", str(exp2 / "imu.csv"), "--out", str(out)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    capsys.readouterr()
    assert main(["evaluate", "--est", f"cdoe={out1}", "--est", str(out2), "--truth", str(exp2 / "truth.csv"),
                 "--skip-initial", "5"]) == 0
    out = capsys.readouterr().out
    assert "RMSE" in out and "cdoe,yaw," in out and "b,yaw," in out


def _imu(path, rows):
    path.write_text("t,gx,gy,gz,ax,ay,az,mx,my,mz\n" + "".join(r + "\n" for r in rows))
    return path


def test_estimate_non_monotone_time(tmp_path, capsys):
    p = _imu(tmp_path / "imu.csv", ["0,0,0,0,0,0,9.8,1,0,1", "0.01,0,0,0,0,0,9.8,1,0,1", "0.005,0,0,0,0,0,9.8,1,0,1"])
    assert main(["estimate", "--algo", "gd", "--input", str(p), "--out", str(tmp_path / "o.csv")]) == 4
    assert "line 4" in capsys.readouterr().err


def test_estimate_empty_file(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    assert main(["estimate", "--algo", "doe", "--input", str(p), "--out", str(tmp_path / "o.csv")]) == 4


def test_estimate_missing_input(tmp_path):
    assert main(["estimate", "--algo", "doe", "--input", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "o.csv")]) == 3


@pytest.mark.parametrize("text", ["k_a = 2\n", "bogus = 1\n"])
def test_estimate_config_violation(tmp_path, text):
    p = _imu(tmp_path / "imu.csv", ["0,0,0,0,0,0,9.8,1,0,1", "0.01,0,0,0,0,0,9.8,1,0,1"])
    cfg = tmp_path / "c.cfg"
    cfg.write_text(text)
    assert main(["estimate", "--algo", "doe", "--input", str(p), "--config", str(cfg),
                 "--out", str(tmp_path / "o.csv")]) == 2


def test_evaluate_length_mismatch(exp2, tmp_path):
    short = tmp_path / "short.csv"
    short.write_text("\n".join((exp2 / "truth.csv").read_text().splitlines()[:100]) + "\n")
    assert main(["evaluate", "--est", str(short), "--truth", str(exp2 / "truth.csv")]) == 4


def test_evaluate_empty_file(exp2, tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("")
    assert main(["evaluate", "--est", str(empty), "--truth", str(exp2 / "truth.csv")]) == 4


def test_tune(exp2, tmp_path, capsys):
    hist = tmp_path / "h.csv"
    assert main(["tune", "--algo", "cgd", "--input", str(exp2 / "imu.csv"), "--truth", str(exp2 / "truth.csv"),
                 "--histogram", str(hist)]) == 0
    out = capsys.readouterr().out
    values = dict(line.split(" = ") for line in out.splitlines() if " = " in line)
    # 2 * (s / |field|) * sqrt(2/3) with the default simulator noise
    assert float(values["sigma_a"]) == pytest.approx(2 * 0.05 / 9.81 * (2 / 3) ** 0.5, rel=0.05)
    assert hist.read_text().startswith("center,count_acc,count_mag")
    assert main(["tune", "--algo", "doe", "--input", str(exp2 / "imu.csv"), "--robust"]) == 0


def test_analyze_likelihood(tmp_path, capsys):
    args = ["analyze-likelihood", "--p-grid", "0.1,0.3", "--sigma-grid", "1,4", "--n", "2000", "--seed", "3"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    lines = first.splitlines()
    assert lines[0] == "p,sigma,logL_CL,logL_LS" and len(lines) == 5
    assert main(args[:-2] + ["--seed", "3", "--out", str(tmp_path / "l.csv")]) == 0
    assert (tmp_path / "l.csv").read_text() == first
    assert main(["analyze-likelihood", "--p-grid", "0.7"]) == 2


def test_bench(capsys):
    assert main(["bench", "--steps", "0"]) == 2
    assert main(["bench", "--algo", "cgd", "--steps", "50", "--repeats", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("algo,steps,best_us_per_step")
    assert lines[1].startswith("cgd,50,")


def test_module_entry_point_and_logging(tmp_path):
    env = dict(os.environ, CORRFUSE_LOG="debug")
    r = subprocess.run([sys.executable, "-m", "corrfuse", "simulate", "--preset", "exp1", "--out-dir", str(tmp_path)],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0
    assert "INFO corrfuse" in r.stderr
    r = subprocess.run([sys.executable, "-m", "corrfuse", "simulate", "--preset", "exp1", "--out-dir", str(tmp_path)],
                       capture_output=True, text=True, env={k: v for k, v in env.items() if k != "CORRFUSE_LOG"})
    assert r.stderr == ""
