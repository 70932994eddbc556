"""
Sensor sample types, the earth-field reference and the ecompass initializer.

Frame convention: at the identity attitude a resting accelerometer reads
``+g`` along the sensor z axis, and the magnetometer reads the earth field
``[m_x, 0, m_z]`` (scaled). All estimators and the simulator share this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateField, EmptyStream, NonMonotoneTime
from .quaternion import matrix_to_quat

DEGENERATE_NORM = 1e-8


@dataclass(frozen=True)
class ImuSample:
    t: float
    gyro: np.ndarray
    accel: np.ndarray
    mag: np.ndarray


@dataclass
class ImuStream:
    """Column-oriented sample log: ``t`` is ``(N,)``, the sensors ``(N, 3)``."""

    t: np.ndarray
    gyro: np.ndarray
    accel: np.ndarray
    mag: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        n = self.t.shape[0]
        for name in ("gyro", "accel", "mag"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(n, 3)
            setattr(self, name, arr)

    def __len__(self):
        return self.t.shape[0]

    def __getitem__(self, k) -> ImuSample:
        return ImuSample(float(self.t[k]), self.gyro[k], self.accel[k], self.mag[k])

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def validate(self):
        """Raise unless the stream is nonempty, finite and strictly time-ordered."""
        if len(self) == 0:
            raise EmptyStream("stream has no samples")
        bad = np.nonzero(np.diff(self.t) <= 0)[0]
        if bad.size:
            raise NonMonotoneTime(int(bad[0]) + 1)
        for name in ("t", "gyro", "accel", "mag"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite values in {name}")
        return self

    @property
    def rate(self):
        """Sampling rate estimated from the median timestamp spacing."""
        if len(self) < 2:
            raise ValueError("need two samples to estimate the rate")
        return 1.0 / float(np.median(np.diff(self.t)))


@dataclass(frozen=True)
class EarthField:
    """Gravity magnitude and the unit magnetic reference ``[m_x, 0, m_z]``."""

    gravity: float = 9.81
    m_x: float = 0.5
    m_z: float = math.sqrt(0.75)

    def __post_init__(self):
        if not self.m_x > 0:
            raise ValueError(f"m_x must be positive, got {self.m_x}")
        if abs(math.hypot(self.m_x, self.m_z) - 1.0) > 1e-9:
            raise ValueError("magnetic reference (m_x, m_z) must have unit norm")
        if not self.gravity > 0:
            raise ValueError("gravity must be positive")

    @classmethod
    def normalized(cls, m_x, m_z, gravity=9.81):
        """Build from an unnormalized horizontal/vertical pair."""
        n = math.hypot(m_x, m_z)
        return cls(gravity, m_x / n, m_z / n)

    @classmethod
    def from_dip(cls, dip_deg, gravity=9.81):
        d = math.radians(dip_deg)
        return cls(gravity, math.cos(d), math.sin(d))

    @property
    def mag_ref(self):
        return np.array([self.m_x, 0.0, self.m_z])


@dataclass(frozen=True)
class NormalizedMeasurements:
    acc_unit: np.ndarray
    mag_unit: np.ndarray
    valid_acc: bool
    valid_mag: bool


def _unit(v):
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if n < DEGENERATE_NORM:
        return np.zeros(3), False
    return np.array([v[0] / n, v[1] / n, v[2] / n]), True


def normalize_measurements(s: ImuSample) -> NormalizedMeasurements:
    acc, va = _unit(s.accel)
    mag, vm = _unit(s.mag)
    return NormalizedMeasurements(acc, mag, va, vm)


def ecompass_init(acc_unit, mag_unit):
    """Initial attitude from one accelerometer and one magnetometer reading.

    The rows of the sensor-to-earth matrix are the earth axes seen from the
    sensor: up is ``a`` (the accelerometer reads ``+g`` at rest), west is
    ``a x m`` and north completes the right-handed triad. The west axis is
    orthogonalized against ``a`` first, so noisy readings still give a proper
    rotation.
    """
    a = np.asarray(acc_unit, dtype=float)
    m = np.asarray(mag_unit, dtype=float)
    a = a / np.linalg.norm(a)
    m = m / np.linalg.norm(m)
    if abs(float(a @ m)) >= 1.0 - 1e-6:
        raise DegenerateField("accelerometer and magnetometer directions are parallel")

    z = a
    y = np.cross(a, m)
    y -= (y @ z) * z
    y /= np.linalg.norm(y)
    x = np.cross(y, z)
    earth_to_sensor = np.column_stack([x, y, z])
    return matrix_to_quat(earth_to_sensor.T)
