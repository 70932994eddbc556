"""
Gradient-descent attitude filter (GD) and its correntropy-weighted form (CGD).

Each step propagates the attitude with the gyroscope, then takes one
normalized gradient step on the stacked accelerometer/magnetometer error

    q = q_minus - lam * grad / |grad_ls|

where ``grad_ls = J^T E`` and, for CGD, ``grad = J^T W E`` with
``W = diag(exp(-E_i^2 / 2 sigma_i^2))``. For GD ``grad = grad_ls``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correntropy import KernelBandwidths
from .errors import EmptyStream, NonMonotoneTime
from .quaternion import IDENTITY
from .sensors import EarthField, ImuSample, ImuStream, NormalizedMeasurements, ecompass_init

GRADIENT_FLOOR = 1e-12
_DEGENERATE = 1e-8


@dataclass(frozen=True)
class GdConfig:
    lam: float = 2e-4
    sigma_a: float = 0.02
    sigma_m: float = 0.02
    earth: EarthField = field(default_factory=EarthField)
    dt: float = 1.0 / 400.0
    normalize_by: str = "unweighted"

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.sigma_a > 0 and self.sigma_m > 0):
            raise ValueError("bandwidths must be positive")
        if self.normalize_by not in ("unweighted", "weighted"):
            raise ValueError(f"normalize_by must be 'unweighted' or 'weighted', got {self.normalize_by!r}")

    @property
    def bandwidths(self):
        return KernelBandwidths.accel_mag(self.sigma_a, self.sigma_m)


@dataclass
class GdState:
    q: np.ndarray = field(default_factory=lambda: IDENTITY.copy())
    step_count: int = 0


def propagate_gyro(q_prev, gyro, dt):
    """First-order integration ``q + 0.5 (q (x) [0, w]) dt``, renormalized."""
    return np.array(_propagate(*q_prev, gyro[0], gyro[1], gyro[2], dt))


def _propagate(w, x, y, z, gx, gy, gz, dt):
    h = 0.5 * dt
    w, x, y, z = (
        w + h * (-x * gx - y * gy - z * gz),
        x + h * (w * gx + y * gz - z * gy),
        y + h * (w * gy - x * gz + z * gx),
        z + h * (w * gz + x * gy - y * gx),
    )
    n = 1.0 / math.sqrt(w * w + x * x + y * y + z * z)
    return w * n, x * n, y * n, z * n


def _errors(q1, q2, q3, q4, mx, mz, ax, ay, az, nx, ny, nz):
    # the six nonzero entries of E = [E_g; E_m]
    return (
        2.0 * (q2 * q4 - q1 * q3) - ax,
        2.0 * (q1 * q2 + q3 * q4) - ay,
        2.0 * (0.5 - q2 * q2 - q3 * q3) - az,
        2.0 * mx * (0.5 - q3 * q3 - q4 * q4) + 2.0 * mz * (q2 * q4 - q1 * q3) - nx,
        2.0 * mx * (q2 * q3 - q1 * q4) + 2.0 * mz * (q1 * q2 + q3 * q4) - ny,
        2.0 * mx * (q1 * q3 + q2 * q4) + 2.0 * mz * (0.5 - q2 * q2 - q3 * q3) - nz,
    )


def measurement_error(q_minus, m: NormalizedMeasurements, earth: EarthField):
    """Aggregated error quaternion ``E`` (8 entries; entries 0 and 4 are always 0).

    Invalid (degenerate) sensor readings zero their four channels.
    """
    e = _errors(*q_minus, earth.m_x, earth.m_z, *m.acc_unit, *m.mag_unit)
    out = np.zeros(8)
    if m.valid_acc:
        out[1:4] = e[0:3]
    if m.valid_mag:
        out[5:8] = e[3:6]
    return out


def attenuation_weights(e8, cfg: GdConfig):
    """Diagonal of ``W``: ``exp(-E_i^2 / 2 sigma_i^2)`` per entry of the 8-vector ``E``.

    Entries 0 and 4 are always 1 since ``E`` is zero there.
    """
    e8 = np.asarray(e8, dtype=float)
    sig = np.array([1.0, cfg.sigma_a, cfg.sigma_a, cfg.sigma_a, 1.0, cfg.sigma_m, cfg.sigma_m, cfg.sigma_m])
    return np.exp(-(e8 * e8) / (2.0 * sig * sig))


def error_jacobian(q_minus, earth: EarthField):
    """``dE/dq`` as an 8x4 matrix; the gradient of ``|E|^2 / 2`` is ``J.T @ E``."""
    q1, q2, q3, q4 = q_minus
    mx, mz = earth.m_x, earth.m_z
    return np.array([
        [0.0, 0.0, 0.0, 0.0],
        [-2 * q3, 2 * q4, -2 * q1, 2 * q2],
        [2 * q2, 2 * q1, 2 * q4, 2 * q3],
        [0.0, -4 * q2, -4 * q3, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [-2 * mz * q3, 2 * mz * q4, -4 * mx * q3 - 2 * mz * q1, -4 * mx * q4 + 2 * mz * q2],
        [-2 * mx * q4 + 2 * mz * q2, 2 * mx * q3 + 2 * mz * q1, 2 * mx * q2 + 2 * mz * q4, -2 * mx * q1 + 2 * mz * q3],
        [2 * mx * q3, 2 * mx * q4 - 4 * mz * q2, 2 * mx * q1 - 4 * mz * q3, 2 * mx * q2],
    ])


def _unit3(x, y, z):
    n = math.sqrt(x * x + y * y + z * z)
    if n < _DEGENERATE:
        return None
    return x / n, y / n, z / n


def _grad(w, x, y, z, mx, mz, f1, f2, f3, f4, f5, f6):
    # J^T E with the zero rows of J dropped
    return (
        -2 * y * f1 + 2 * x * f2 - 2 * mz * y * f4 + (-2 * mx * z + 2 * mz * x) * f5 + 2 * mx * y * f6,
        2 * z * f1 + 2 * w * f2 - 4 * x * f3 + 2 * mz * z * f4 + (2 * mx * y + 2 * mz * w) * f5
        + (2 * mx * z - 4 * mz * x) * f6,
        -2 * w * f1 + 2 * z * f2 - 4 * y * f3 + (-4 * mx * y - 2 * mz * w) * f4
        + (2 * mx * x + 2 * mz * z) * f5 + (2 * mx * w - 4 * mz * y) * f6,
        2 * x * f1 + 2 * y * f2 + (-4 * mx * z + 2 * mz * x) * f4 + (-2 * mx * w + 2 * mz * y) * f5
        + 2 * mx * x * f6,
    )


def _step(q, gyro, accel, mag, cfg: GdConfig, weighted: bool):
    w, x, y, z = _propagate(q[0], q[1], q[2], q[3], gyro[0], gyro[1], gyro[2], cfg.dt)
    if cfg.lam == 0.0:
        return w, x, y, z
    a = _unit3(accel[0], accel[1], accel[2])
    m = _unit3(mag[0], mag[1], mag[2])
    mx, mz = cfg.earth.m_x, cfg.earth.m_z
    e1, e2, e3, e4, e5, e6 = _errors(
        w, x, y, z, mx, mz, *(a or (0.0, 0.0, 0.0)), *(m or (0.0, 0.0, 0.0)))
    if a is None:
        e1 = e2 = e3 = 0.0
    if m is None:
        e4 = e5 = e6 = 0.0

    # nonzero Jacobian entries, shared by the plain and weighted gradients
    w2, x2, y2, z2 = 2 * w, 2 * x, 2 * y, 2 * z
    j51, j52, j53, j54 = mz * x2 - mx * z2, mx * y2 + mz * w2, mx * x2 + mz * z2, mz * y2 - mx * w2
    j41, j42, j43, j44 = -mz * y2, mz * z2, -2 * mx * y2 - mz * w2, mz * x2 - 2 * mx * z2
    j61, j62, j63, j64 = mx * y2, mx * z2 - 2 * mz * x2, mx * w2 - 2 * mz * y2, mx * x2
    g0 = -y2 * e1 + x2 * e2 + j41 * e4 + j51 * e5 + j61 * e6
    g1 = z2 * e1 + w2 * e2 - 2 * x2 * e3 + j42 * e4 + j52 * e5 + j62 * e6
    g2 = -w2 * e1 + z2 * e2 - 2 * y2 * e3 + j43 * e4 + j53 * e5 + j63 * e6
    g3 = x2 * e1 + y2 * e2 + j44 * e4 + j54 * e5 + j64 * e6
    gnorm = math.sqrt(g0 * g0 + g1 * g1 + g2 * g2 + g3 * g3)
    if gnorm < GRADIENT_FLOOR:
        return w, x, y, z
    if weighted:
        ia = -0.5 / (cfg.sigma_a * cfg.sigma_a)
        im = -0.5 / (cfg.sigma_m * cfg.sigma_m)
        e1 *= math.exp(ia * e1 * e1)
        e2 *= math.exp(ia * e2 * e2)
        e3 *= math.exp(ia * e3 * e3)
        e4 *= math.exp(im * e4 * e4)
        e5 *= math.exp(im * e5 * e5)
        e6 *= math.exp(im * e6 * e6)
        g0 = -y2 * e1 + x2 * e2 + j41 * e4 + j51 * e5 + j61 * e6
        g1 = z2 * e1 + w2 * e2 - 2 * x2 * e3 + j42 * e4 + j52 * e5 + j62 * e6
        g2 = -w2 * e1 + z2 * e2 - 2 * y2 * e3 + j43 * e4 + j53 * e5 + j63 * e6
        g3 = x2 * e1 + y2 * e2 + j44 * e4 + j54 * e5 + j64 * e6
        if cfg.normalize_by == "weighted":
            gnorm = math.sqrt(g0 * g0 + g1 * g1 + g2 * g2 + g3 * g3)
            if gnorm < GRADIENT_FLOOR:
                return w, x, y, z
    s = cfg.lam / gnorm
    w, x, y, z = w - s * g0, x - s * g1, y - s * g2, z - s * g3
    n = 1.0 / math.sqrt(w * w + x * x + y * y + z * z)
    return w * n, x * n, y * n, z * n


def gd_step(state: GdState, sample: ImuSample, cfg: GdConfig) -> GdState:
    q = _step(state.q, sample.gyro, sample.accel, sample.mag, cfg, weighted=False)
    return GdState(np.array(q), state.step_count + 1)


def cgd_step(state: GdState, sample: ImuSample, cfg: GdConfig) -> GdState:
    q = _step(state.q, sample.gyro, sample.accel, sample.mag, cfg, weighted=True)
    return GdState(np.array(q), state.step_count + 1)


def initial_attitude(stream: ImuStream, init=None):
    """``init`` if given, otherwise ecompass on the first sample."""
    if init is not None:
        q = np.asarray(init, dtype=float)
        return q / np.linalg.norm(q)
    a, m = stream.accel[0], stream.mag[0]
    return ecompass_init(a / np.linalg.norm(a), m / np.linalg.norm(m))


def check_stream(stream: ImuStream):
    if len(stream) == 0:
        raise EmptyStream("stream has no samples")
    bad = np.nonzero(np.diff(stream.t) <= 0)[0]
    if bad.size:
        raise NonMonotoneTime(int(bad[0]) + 1)


def _run(stream, cfg, init, weighted):
    check_stream(stream)
    out = np.empty((len(stream), 4))
    q = tuple(initial_attitude(stream, init))
    out[0] = q
    gyro = stream.gyro.tolist()
    accel = stream.accel.tolist()
    mag = stream.mag.tolist()
    for k in range(1, len(stream)):
        q = _step(q, gyro[k], accel[k], mag[k], cfg, weighted)
        out[k] = q
    return out


def run_gd(stream: ImuStream, cfg: GdConfig, init=None):
    """Attitude trajectory ``(N, 4)``; row 0 is the initial attitude."""
    return _run(stream, cfg, init, weighted=False)


def run_cgd(stream: ImuStream, cfg: GdConfig, init=None):
    return _run(stream, cfg, init, weighted=True)
