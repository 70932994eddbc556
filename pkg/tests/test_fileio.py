import numpy as np
import pytest

from corrfuse.errors import ConfigError, DataFormatError
from corrfuse.fileio import (FilterConfig, IMU_HEADER, load_config, parse_config, read_imu_csv, read_quat_csv,
                             write_imu_csv, write_quat_csv)
from corrfuse.sensors import ImuStream


def _stream(n=50, seed=0):
    rng = np.random.default_rng(seed)
    t = np.cumsum(rng.uniform(0.001, 0.01, n))
    return ImuStream(t, rng.normal(size=(n, 3)), rng.normal(scale=10, size=(n, 3)), rng.normal(scale=50, size=(n, 3)))


def test_imu_round_trip_is_stable(tmp_path):
    s = _stream()
    write_imu_csv(tmp_path / "a.csv", s)
    back = read_imu_csv(tmp_path / "a.csv")
    for name in ("t", "gyro", "accel", "mag"):
        np.testing.assert_allclose(getattr(back, name), getattr(s, name), rtol=1e-8)
    write_imu_csv(tmp_path / "b.csv", back)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == ",".join(IMU_HEADER)


def test_quat_round_trip_and_renormalize(tmp_path):
    t = np.arange(3) * 0.1
    q = np.array([[1.0, 0, 0, 0], [0.7071, 0.7071, 0, 0], [1.0005, 0, 0, 0]])
    write_quat_csv(tmp_path / "q.csv", t, q)
    t2, q2 = read_quat_csv(tmp_path / "q.csv")
    np.testing.assert_allclose(t2, t)
    np.testing.assert_allclose(np.linalg.norm(q2, axis=1), 1.0, atol=1e-15)


def _write(path, text):
    path.write_text(text)
    return path


@pytest.mark.parametrize("body,line", [
    ("t,gx,gy,gz,ax,ay,az,mx,my\n0,0,0,0,0,0,1,1,0\n", 1),                    # header
    ("t,gx,gy,gz,ax,ay,az,mx,my,mz\n0,0,0,0,0,0,1,1,0,0\n0.1,0,0,0\n", 3),    # column count
    ("t,gx,gy,gz,ax,ay,az,mx,my,mz\n0,0,0,0,0,0,1,1,0,x\n", 2),               # number
    ("t,gx,gy,gz,ax,ay,az,mx,my,mz\n0,0,0,0,0,0,1,1,0,0\n0,0,0,0,0,0,1,1,0,0\n", 3),  # time
    ("t,gx,gy,gz,ax,ay,az,mx,my,mz\n0,0,0,0,0,0,nan,1,0,0\n", 2),             # non-finite
    ("", 1),
    ("t,gx,gy,gz,ax,ay,az,mx,my,mz\n", 2),
])
def test_imu_format_errors_report_line(tmp_path, body, line):
    with pytest.raises(DataFormatError) as exc:
        read_imu_csv(_write(tmp_path / "x.csv", body))
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_quat_norm_out_of_tolerance(tmp_path):
    p = _write(tmp_path / "q.csv", "t,qw,qx,qy,qz\n0,1,0,0,0\n1,1.01,0,0,0\n")
    with pytest.raises(DataFormatError) as exc:
        read_quat_csv(p)
    assert exc.value.line == 3


def test_crlf_is_accepted(tmp_path):
    p = _write(tmp_path / "q.csv", "t,qw,qx,qy,qz\r\n0,1,0,0,0\r\n")
    t, q = read_quat_csv(p)
    assert q.shape == (1, 4)


def test_config_parsing():
    cfg = parse_config("""
        # gains
        lambda = 0.001
        k_a = 0.02   # trailing comment
        sigma_a = 0.01
        m_x = 3
        m_z = 4
        rate = 200
        normalize_by = weighted
    """)
    assert cfg.lam == 0.001 and cfg.k_a == 0.02 and cfg.sigma_a == 0.01
    assert (cfg.m_x, cfg.m_z) == pytest.approx((0.6, 0.8))
    assert cfg.dt_for() == pytest.approx(1 / 200)
    g = cfg.gd_config(cfg.dt_for())
    assert g.normalize_by == "weighted" and g.sigma_m == 0.02
    assert cfg.doe_config(0.005).sigma_m == 0.04


@pytest.mark.parametrize("text", [
    "alpha = 1",
    "k_a = 1.5",
    "k_bm = 0",
    "lambda = -1",
    "sigma_m = 0",
    "m_x = -1",
    "gravity = 0",
    "rate = 0",
    "normalize_by = sometimes",
    "skip_initial = -2",
    "k_a = fast",
    "k_a 0.1",
    "k_a = 0.1\nk_a = 0.2",
    "k_a = inf",
])
def test_config_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_defaults_and_file(tmp_path):
    p = _write(tmp_path / "c.cfg", "")
    cfg = load_config(p)
    assert cfg == FilterConfig()
    with pytest.raises(ConfigError):
        cfg.dt_for()
