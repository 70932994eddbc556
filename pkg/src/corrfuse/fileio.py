"""
CSV logs and the ``key = value`` filter configuration file.

IMU logs carry the header ``t,gx,gy,gz,ax,ay,az,mx,my,mz``; attitude files
``t,qw,qx,qy,qz``. Floats are written with 9 significant digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .doe import DoeConfig
from .errors import ConfigError, DataFormatError
from .gd import GdConfig
from .sensors import EarthField, ImuStream

IMU_HEADER = ("t", "gx", "gy", "gz", "ax", "ay", "az", "mx", "my", "mz")
TRUTH_HEADER = ("t", "qw", "qx", "qy", "qz")
FLOAT_FMT = "{:.9g}"
QUAT_NORM_TOL = 1e-3


def _read_table(path, header):
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DataFormatError("file is empty", line=1)
    got = tuple(c.strip() for c in lines[0].rstrip("\r").split(","))
    if got != header:
        raise DataFormatError(f"expected header {','.join(header)!r}, got {lines[0]!r}", line=1)
    rows = np.empty((len(lines) - 1, len(header)))
    for i, line in enumerate(lines[1:]):
        lineno = i + 2
        parts = line.rstrip("\r").split(",")
        if len(parts) != len(header):
            raise DataFormatError(f"expected {len(header)} columns, got {len(parts)}", line=lineno)
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise DataFormatError(f"unparseable number in {line!r}", line=lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise DataFormatError("non-finite value", line=lineno)
        if i > 0 and vals[0] <= rows[i - 1, 0]:
            raise DataFormatError(f"timestamp {parts[0]} is not after the previous one", line=lineno)
        rows[i] = vals
    if rows.shape[0] == 0:
        raise DataFormatError("no data rows", line=2)
    return rows


def _write_table(path, header, rows):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in np.asarray(rows, dtype=float).tolist():
            fh.write(",".join(FLOAT_FMT.format(v) for v in row) + "\n")


def read_imu_csv(path) -> ImuStream:
    rows = _read_table(path, IMU_HEADER)
    return ImuStream(rows[:, 0], rows[:, 1:4], rows[:, 4:7], rows[:, 7:10])


def write_imu_csv(path, stream: ImuStream):
    _write_table(path, IMU_HEADER, np.column_stack([stream.t, stream.gyro, stream.accel, stream.mag]))


def read_quat_csv(path):
    """Returns ``(t, quats)``; rows are renormalized after the norm check."""
    rows = _read_table(path, TRUTH_HEADER)
    q = rows[:, 1:5]
    norms = np.linalg.norm(q, axis=1)
    bad = np.nonzero(np.abs(norms - 1.0) > QUAT_NORM_TOL)[0]
    if bad.size:
        raise DataFormatError(f"quaternion norm {norms[bad[0]]:.6g} is not close to 1", line=int(bad[0]) + 2)
    return rows[:, 0], q / norms[:, None]


def write_quat_csv(path, t, quats):
    _write_table(path, TRUTH_HEADER, np.column_stack([t, quats]))


@dataclass
class FilterConfig:
    """Everything a config file can set; unset values keep the filter defaults."""

    lam: float = GdConfig.lam
    k_a: float = DoeConfig.k_a
    k_m: float = DoeConfig.k_m
    k_ba: float = DoeConfig.k_ba
    k_bm: float = DoeConfig.k_bm
    sigma_a: float | None = None
    sigma_m: float | None = None
    m_x: float = EarthField.m_x
    m_z: float = EarthField.m_z
    gravity: float = EarthField.gravity
    rate: float | None = None
    normalize_by: str = "unweighted"
    skip_initial: float = 0.0

    @property
    def earth(self):
        return EarthField.normalized(self.m_x, self.m_z, self.gravity)

    def dt_for(self, stream: ImuStream | None = None):
        if self.rate is not None:
            return 1.0 / self.rate
        if stream is None:
            raise ConfigError("no rate configured and no stream to infer it from")
        return 1.0 / stream.rate

    def gd_config(self, dt) -> GdConfig:
        kw = {"lam": self.lam, "earth": self.earth, "dt": dt, "normalize_by": self.normalize_by}
        if self.sigma_a is not None:
            kw["sigma_a"] = self.sigma_a
        if self.sigma_m is not None:
            kw["sigma_m"] = self.sigma_m
        try:
            return GdConfig(**kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def doe_config(self, dt) -> DoeConfig:
        kw = {"k_a": self.k_a, "k_m": self.k_m, "k_ba": self.k_ba, "k_bm": self.k_bm,
              "earth": self.earth, "dt": dt}
        if self.sigma_a is not None:
            kw["sigma_a"] = self.sigma_a
        if self.sigma_m is not None:
            kw["sigma_m"] = self.sigma_m
        try:
            return DoeConfig(**kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


# file key -> FilterConfig attribute
_KEYS = {f.name: f.name for f in fields(FilterConfig)}
_KEYS["lambda"] = "lam"
del _KEYS["lam"]


def parse_config(text) -> FilterConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    cfg = FilterConfig()
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}; allowed: {', '.join(sorted(_KEYS))}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        attr = _KEYS[key]
        if attr == "normalize_by":
            setattr(cfg, attr, value)
            continue
        try:
            num = float(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} needs a number, got {value!r}") from None
        if not math.isfinite(num):
            raise ConfigError(f"line {lineno}: {key} must be finite")
        setattr(cfg, attr, num)
    _validate(cfg)
    return cfg


def _validate(cfg: FilterConfig):
    if cfg.lam < 0:
        raise ConfigError("lambda must be nonnegative")
    for name in ("k_a", "k_m", "k_ba", "k_bm"):
        v = getattr(cfg, name)
        if not 0.0 < v < 1.0:
            raise ConfigError(f"{name} must lie in (0, 1), got {v}")
    for name in ("sigma_a", "sigma_m"):
        v = getattr(cfg, name)
        if v is not None and v <= 0:
            raise ConfigError(f"{name} must be positive, got {v}")
    if cfg.m_x <= 0 or math.hypot(cfg.m_x, cfg.m_z) == 0:
        raise ConfigError("m_x must be positive")
    # keep the magnetic reference on the unit circle
    n = math.hypot(cfg.m_x, cfg.m_z)
    cfg.m_x, cfg.m_z = cfg.m_x / n, cfg.m_z / n
    if cfg.gravity <= 0:
        raise ConfigError("gravity must be positive")
    if cfg.rate is not None and cfg.rate <= 0:
        raise ConfigError("rate must be positive")
    if cfg.normalize_by not in ("unweighted", "weighted"):
        raise ConfigError(f"normalize_by must be 'unweighted' or 'weighted', got {cfg.normalize_by!r}")
    if cfg.skip_initial < 0:
        raise ConfigError("skip_initial must be nonnegative")


def load_config(path) -> FilterConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))
