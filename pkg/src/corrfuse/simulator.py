"""
Synthetic ground truth and IMU measurements with injected disturbances.

Truth attitudes come from closed-form rotations where the angular-velocity
script allows it, otherwise from exact per-step exponentials, so integration
error in the simulator never masks estimator error.

The default noise levels (gyro 0.005 rad/s, accel 0.05 m/s^2, mag 0.3 a.u.
against a 50 a.u. field) are placeholders chosen so that the estimators stay
well under 1 degree on disturbance-free data; they are not hardware values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correntropy import MixtureNoiseModel, sample_mixture
from .errors import SpecValidation
from .quaternion import euler_to_quat, hamilton, rotvec_to_quat
from .sensors import EarthField, ImuStream

KINDS = ("static", "constant_rate", "sinusoidal_rotation", "scripted")


@dataclass(frozen=True)
class TrajectorySpec:
    """Angular-velocity script (sensor frame) plus sampling parameters.

    ``rate_vector`` is used by ``constant_rate``; ``freq``/``amplitude``/``axis``
    by ``sinusoidal_rotation`` (angle ``amplitude * sin(2 pi freq t)`` about the
    fixed sensor axis); ``keyframes`` by ``scripted`` as ``(t_start, omega)``
    pairs holding omega constant until the next keyframe.
    """

    kind: str = "static"
    duration: float = 60.0
    rate: float = 400.0
    initial_ypr: tuple = (0.0, 0.0, 0.0)
    rate_vector: tuple = (0.0, 0.0, 0.0)
    freq: float = 0.1
    amplitude: float = 0.5
    axis: tuple = (0.0, 1.0, 0.0)
    keyframes: tuple = ()

    def validate(self):
        if self.kind not in KINDS:
            raise SpecValidation(f"unknown trajectory kind {self.kind!r}")
        if not (self.rate > 0 and self.duration > 0):
            raise SpecValidation("rate and duration must be positive")
        if self.kind == "sinusoidal_rotation":
            if self.freq <= 0 or np.linalg.norm(self.axis) == 0:
                raise SpecValidation("sinusoidal rotation needs freq > 0 and a nonzero axis")
        if self.kind == "scripted":
            times = [k[0] for k in self.keyframes]
            if not times or times[0] != 0.0 or any(b <= a for a, b in zip(times, times[1:])):
                raise SpecValidation("keyframes must start at t=0 and increase")

    @property
    def n_samples(self):
        return int(round(self.duration * self.rate)) + 1


@dataclass(frozen=True)
class DisturbanceSpec:
    """Disturbances and sensor noise.

    ``accel_spikes``: ``(t_start, t_end, (ax, ay, az))`` external specific
    force in m/s^2 (sensor frame). ``mag_segments``: ``(t_start, t_end,
    (dx, dy, dz))`` field offsets in magnetometer units. ``accel_mixture``
    optionally adds per-axis mixture noise scaled by ``accel_mixture_scale``.
    """

    accel_spikes: tuple = ()
    mag_segments: tuple = ()
    gyro_bias: tuple = (0.0, 0.0, 0.0)
    noise_std: tuple = (0.005, 0.05, 0.3)
    accel_mixture: MixtureNoiseModel | None = None
    accel_mixture_scale: float = 1.0

    def validate(self, duration):
        for seg in tuple(self.accel_spikes) + tuple(self.mag_segments):
            t0, t1, vec = seg
            if not (0.0 <= t0 < t1 <= duration) or len(vec) != 3:
                raise SpecValidation(f"segment {seg!r} is outside [0, {duration}] or malformed")
        if len(self.noise_std) != 3 or any(s < 0 for s in self.noise_std):
            raise SpecValidation("noise_std must be three nonnegative values")
        if len(self.gyro_bias) != 3:
            raise SpecValidation("gyro_bias must have three components")


@dataclass
class SimulationResult:
    stream: ImuStream
    truth: np.ndarray
    omega: np.ndarray = field(repr=False, default=None)


def _truth(spec: TrajectorySpec, t):
    q0 = euler_to_quat(*spec.initial_ypr)
    n = t.shape[0]
    if spec.kind == "static":
        return np.tile(q0, (n, 1)), np.zeros((n, 3))
    if spec.kind == "constant_rate":
        w = np.asarray(spec.rate_vector, dtype=float)
        return _closed_form(q0, t[:, None] * w), np.tile(w, (n, 1))
    if spec.kind == "sinusoidal_rotation":
        u = np.asarray(spec.axis, dtype=float)
        u = u / np.linalg.norm(u)
        ph = 2.0 * math.pi * spec.freq * t
        angle = spec.amplitude * np.sin(ph)
        rate = spec.amplitude * 2.0 * math.pi * spec.freq * np.cos(ph)
        return _closed_form(q0, angle[:, None] * u), rate[:, None] * u
    return _scripted(spec, q0, t)


def _closed_form(q0, rotvecs):
    # rotation about a fixed sensor axis: q(t) = q0 (x) exp(rotvec(t))
    angle = np.linalg.norm(rotvecs, axis=1)
    half = 0.5 * angle
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(angle > 1e-15, np.sin(half) / angle, 0.5)
    d = np.column_stack([np.cos(half), rotvecs * scale[:, None]])
    w0, x0, y0, z0 = q0
    w, x, y, z = d.T
    return np.column_stack([
        w0 * w - x0 * x - y0 * y - z0 * z,
        w0 * x + x0 * w + y0 * z - z0 * y,
        w0 * y - x0 * z + y0 * w + z0 * x,
        w0 * z + x0 * y - y0 * x + z0 * w,
    ])


def _scripted(spec, q0, t):
    times = np.array([k[0] for k in spec.keyframes])
    rates = np.array([k[1] for k in spec.keyframes], dtype=float)
    idx = np.searchsorted(times, t, side="right") - 1
    omega = rates[idx]
    out = np.empty((t.shape[0], 4))
    q = q0
    out[0] = q
    for k in range(1, t.shape[0]):
        # integrate piecewise-constant omega exactly across any keyframe inside the step
        t_a, t_b = t[k - 1], t[k]
        inner = times[(times > t_a) & (times < t_b)]
        edges = [t_a, *inner, t_b]
        for s0, s1 in zip(edges, edges[1:]):
            w = rates[np.searchsorted(times, s0, side="right") - 1]
            q = hamilton(q, rotvec_to_quat(w * (s1 - s0)))
        q = q / np.linalg.norm(q)
        out[k] = q
    return out, omega


def _segment_sum(t, segments):
    out = np.zeros((t.shape[0], 3))
    for t0, t1, vec in segments:
        mask = (t >= t0) & (t < t1)
        out[mask] += np.asarray(vec, dtype=float)
    return out


def _earth_to_sensor_batch(q, v):
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    vx, vy, vz = v
    return np.column_stack([
        (1 - 2 * (y * y + z * z)) * vx + 2 * (x * y + w * z) * vy + 2 * (x * z - w * y) * vz,
        2 * (x * y - w * z) * vx + (1 - 2 * (x * x + z * z)) * vy + 2 * (y * z + w * x) * vz,
        2 * (x * z + w * y) * vx + 2 * (y * z - w * x) * vy + (1 - 2 * (x * x + y * y)) * vz,
    ])


def generate(spec: TrajectorySpec, dist: DisturbanceSpec, earth: EarthField | None = None,
             seed=0, mag_scale=50.0) -> SimulationResult:
    """Sample the trajectory at ``rate`` over ``[0, duration]`` inclusive."""
    earth = earth or EarthField()
    spec.validate()
    dist.validate(spec.duration)
    rng = np.random.default_rng(seed)
    n = spec.n_samples
    t = np.arange(n) / spec.rate
    truth, omega = _truth(spec, t)
    sg, sa, sm = dist.noise_std

    gyro = omega + np.asarray(dist.gyro_bias, dtype=float) + rng.normal(0.0, sg, (n, 3))
    accel = earth.gravity * _earth_to_sensor_batch(truth, (0.0, 0.0, 1.0))
    accel += _segment_sum(t, dist.accel_spikes) + rng.normal(0.0, sa, (n, 3))
    if dist.accel_mixture is not None:
        accel += dist.accel_mixture_scale * sample_mixture(dist.accel_mixture, 3 * n, rng=rng).reshape(n, 3)
    mag = mag_scale * _earth_to_sensor_batch(truth, (earth.m_x, 0.0, earth.m_z))
    mag += _segment_sum(t, dist.mag_segments) + rng.normal(0.0, sm, (n, 3))
    return SimulationResult(ImuStream(t, gyro, accel, mag), truth, omega)


def preset_experiments():
    """Five 60 s, 400 Hz scenarios modelled on the translation / rotation trials.

    ``exp1`` translation only, with separate accelerometer and magnetometer
    disturbance episodes; ``exp2`` slow 0.1 Hz swing with no disturbance;
    ``exp3`` 0.5 Hz swing with accelerometer disturbance; ``exp4`` 0.1 Hz swing
    with magnetic disturbance; ``exp5`` 0.5 Hz swing with both.
    """
    start = (0.6, 0.05, -0.08)
    slow = TrajectorySpec("sinusoidal_rotation", 60.0, 400.0, start, freq=0.1, amplitude=0.5, axis=(0.2, 1.0, 0.1))
    fast = TrajectorySpec("sinusoidal_rotation", 60.0, 400.0, start, freq=0.5, amplitude=0.5, axis=(0.2, 1.0, 0.1))
    still = TrajectorySpec("static", 60.0, 400.0, start)

    acc_bursts = (
        (8.0, 10.0, (3.0, 0.0, 1.0)),
        (20.0, 21.5, (-2.5, 2.0, 0.0)),
        (34.0, 36.0, (0.0, -3.0, 1.5)),
        (48.0, 49.0, (4.0, 1.0, -1.0)),
    )
    mag_patches = (
        (14.0, 18.0, (25.0, 15.0, -10.0)),
        (27.0, 31.0, (-20.0, 25.0, 5.0)),
        (40.0, 45.0, (15.0, -25.0, 10.0)),
        (52.0, 56.0, (-25.0, -15.0, -5.0)),
    )
    return {
        "exp1": (still, DisturbanceSpec(accel_spikes=acc_bursts[:2], mag_segments=mag_patches[2:])),
        "exp2": (slow, DisturbanceSpec()),
        "exp3": (fast, DisturbanceSpec(accel_spikes=acc_bursts)),
        "exp4": (slow, DisturbanceSpec(mag_segments=mag_patches)),
        "exp5": (fast, DisturbanceSpec(accel_spikes=acc_bursts, mag_segments=mag_patches)),
    }
