"""
Decoupled orientation estimation (DOE) and its correntropy variant (CDOE).

After gyroscope prediction the attitude is corrected twice by closed-form
angle-axis rotations: first toward the measured gravity direction, then about
the estimated vertical toward the horizontal part of the measured field. The
magnetometer therefore never touches roll or pitch. CDOE scales each
correction angle by the kernel weight ``exp(-alpha^2 / 2 sigma^2)`` so that
large (disturbed) disagreements are mostly ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .gd import _propagate, check_stream, initial_attitude
from .quaternion import IDENTITY
from .sensors import EarthField, ImuSample, ImuStream

_DEGENERATE = 1e-8


@dataclass(frozen=True)
class DoeConfig:
    k_a: float = 0.01
    k_m: float = 0.01
    k_ba: float = 0.001
    k_bm: float = 0.001
    sigma_a: float = 0.05
    sigma_m: float = 0.04
    earth: EarthField = field(default_factory=EarthField)
    dt: float = 1.0 / 400.0

    def __post_init__(self):
        for name in ("k_a", "k_m", "k_ba", "k_bm"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not (self.sigma_a > 0 and self.sigma_m > 0):
            raise ValueError("bandwidths must be positive")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")


@dataclass
class DoeState:
    q: np.ndarray = field(default_factory=lambda: IDENTITY.copy())
    bias: np.ndarray = field(default_factory=lambda: np.zeros(3))


class AngleAxisCorrection(NamedTuple):
    """Rotation that would align the reference with the measurement.

    ``axis`` is the corrective direction for right-multiplication of the
    attitude. When the two directions are (anti-)parallel the axis is
    undefined and ``valid`` is False; the correction is then skipped.
    """

    angle: float
    axis: np.ndarray
    valid: bool


class DoeUpdate(NamedTuple):
    state: DoeState
    acc: AngleAxisCorrection
    mag: AngleAxisCorrection
    gravity_axis: np.ndarray  # estimated vertical in the sensor frame used by the mag step


def _acos(c):
    return math.acos(1.0 if c > 1.0 else (-1.0 if c < -1.0 else c))


def _gravity_axis(w, x, y, z):
    # earth z expressed in the sensor frame
    return 2.0 * (x * z - w * y), 2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y)


def _north_axis(w, x, y, z):
    return 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)


def _acc_corr(w, x, y, z, ax, ay, az):
    rx, ry, rz = _gravity_axis(w, x, y, z)
    angle = _acos(rx * ax + ry * ay + rz * az)
    # a x r_a
    cx, cy, cz = ay * rz - az * ry, az * rx - ax * rz, ax * ry - ay * rx
    cn = math.sqrt(cx * cx + cy * cy + cz * cz)
    if cn < _DEGENERATE:
        return angle, (0.0, 0.0, 0.0), False
    return angle, (cx / cn, cy / cn, cz / cn), True


def _mag_corr(w, x, y, z, mx, my, mz):
    rx, ry, rz = _gravity_axis(w, x, y, z)
    d = mx * rx + my * ry + mz * rz
    hx, hy, hz = mx - d * rx, my - d * ry, mz - d * rz
    hn = math.sqrt(hx * hx + hy * hy + hz * hz)
    if hn < _DEGENERATE:
        return 0.0, (0.0, 0.0, 0.0), False, (rx, ry, rz)
    nx, ny, nz = _north_axis(w, x, y, z)
    angle = _acos((hx * nx + hy * ny + hz * nz) / hn)
    # m_bar x r_m
    cx, cy, cz = hy * nz - hz * ny, hz * nx - hx * nz, hx * ny - hy * nx
    cn = math.sqrt(cx * cx + cy * cy + cz * cz)
    if cn < _DEGENERATE * hn:
        return angle, (0.0, 0.0, 0.0), False, (rx, ry, rz)
    return angle, (cx / cn, cy / cn, cz / cn), True, (rx, ry, rz)


def _rotate(w, x, y, z, theta, ux, uy, uz):
    # q (x) [cos(theta/2), sin(theta/2) u], renormalized
    c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
    bx, by, bz = s * ux, s * uy, s * uz
    w, x, y, z = (
        w * c - x * bx - y * by - z * bz,
        w * bx + x * c + y * bz - z * by,
        w * by - x * bz + y * c + z * bx,
        w * bz + x * by - y * bx + z * c,
    )
    n = 1.0 / math.sqrt(w * w + x * x + y * y + z * z)
    return w * n, x * n, y * n, z * n


def _unit3(v):
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if n < _DEGENERATE:
        return None
    return v[0] / n, v[1] / n, v[2] / n


def _core(q, b, gyro, accel, mag, cfg: DoeConfig, weighted: bool):
    bx, by, bz = b
    w, x, y, z = _propagate(q[0], q[1], q[2], q[3], gyro[0] - bx, gyro[1] - by, gyro[2] - bz, cfg.dt)

    acc = (0.0, (0.0, 0.0, 0.0), False)
    a = _unit3(accel)
    if a is not None:
        acc = _acc_corr(w, x, y, z, *a)
        alpha, (ux, uy, uz), ok = acc
        if ok:
            eff = alpha * math.exp(-alpha * alpha / (2.0 * cfg.sigma_a * cfg.sigma_a)) if weighted else alpha
            w, x, y, z = _rotate(w, x, y, z, cfg.k_a * eff, ux, uy, uz)
            # applying +theta about u cancels a drift of -theta about u, hence the minus
            s = cfg.k_ba * eff
            bx, by, bz = bx - s * ux, by - s * uy, bz - s * uz

    mag_corr = (0.0, (0.0, 0.0, 0.0), False, _gravity_axis(w, x, y, z))
    m = _unit3(mag)
    if m is not None:
        mag_corr = _mag_corr(w, x, y, z, *m)
        alpha, (ux, uy, uz), ok, _ = mag_corr
        if ok:
            eff = alpha * math.exp(-alpha * alpha / (2.0 * cfg.sigma_m * cfg.sigma_m)) if weighted else alpha
            w, x, y, z = _rotate(w, x, y, z, cfg.k_m * eff, ux, uy, uz)
            s = cfg.k_bm * eff
            bx, by, bz = bx - s * ux, by - s * uy, bz - s * uz

    return (w, x, y, z), (bx, by, bz), acc, mag_corr


def accel_correction(q_minus, acc_unit, earth: EarthField | None = None) -> AngleAxisCorrection:
    """Angle between the predicted and measured vertical, and the axis to close it."""
    angle, axis, ok = _acc_corr(*q_minus, *acc_unit)
    return AngleAxisCorrection(angle, np.array(axis), ok)


def mag_correction(q_ga, mag_unit, earth: EarthField | None = None) -> AngleAxisCorrection:
    """Heading error between the horizontal field and the predicted north axis."""
    angle, axis, ok, _ = _mag_corr(*q_ga, *mag_unit)
    return AngleAxisCorrection(angle, np.array(axis), ok)


def doe_update(state: DoeState, sample: ImuSample, cfg: DoeConfig, weighted=False) -> DoeUpdate:
    """One step with diagnostics; :func:`doe_step` and :func:`cdoe_step` wrap this."""
    q, b, acc, mag = _core(state.q, state.bias, sample.gyro, sample.accel, sample.mag, cfg, weighted)
    new = DoeState(np.array(q), np.array(b))
    return DoeUpdate(
        new,
        AngleAxisCorrection(acc[0], np.array(acc[1]), acc[2]),
        AngleAxisCorrection(mag[0], np.array(mag[1]), mag[2]),
        np.array(mag[3]),
    )


def doe_step(state: DoeState, sample: ImuSample, cfg: DoeConfig) -> DoeState:
    return doe_update(state, sample, cfg, weighted=False).state


def cdoe_step(state: DoeState, sample: ImuSample, cfg: DoeConfig) -> DoeState:
    return doe_update(state, sample, cfg, weighted=True).state


class DoeResult(NamedTuple):
    quats: np.ndarray
    biases: np.ndarray


def _run(stream, cfg, init, weighted):
    check_stream(stream)
    n = len(stream)
    quats = np.empty((n, 4))
    biases = np.empty((n, 3))
    q = tuple(initial_attitude(stream, init))
    b = (0.0, 0.0, 0.0)
    quats[0] = q
    biases[0] = b
    gyro = stream.gyro.tolist()
    accel = stream.accel.tolist()
    mag = stream.mag.tolist()
    for k in range(1, n):
        q, b, _, _ = _core(q, b, gyro[k], accel[k], mag[k], cfg, weighted)
        quats[k] = q
        biases[k] = b
    return DoeResult(quats, biases)


def run_doe(stream: ImuStream, cfg: DoeConfig, init=None) -> DoeResult:
    """Attitude ``(N, 4)`` and gyro-bias ``(N, 3)`` trajectories; bias starts at 0."""
    return _run(stream, cfg, init, weighted=False)


def run_cdoe(stream: ImuStream, cfg: DoeConfig, init=None) -> DoeResult:
    return _run(stream, cfg, init, weighted=True)
