"""Per-step timing of the four filters on a synthetic random-walk stream."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import doe, gd
from .quaternion import earth_to_sensor, hamilton, rotvec_to_quat
from .sensors import EarthField, ImuStream

ALGORITHMS = ("gd", "cgd", "doe", "cdoe")

# Hand count of scalar floating-point work per step of the code in gd.py and
# doe.py: mul_add counts each multiply, add, subtract or negation; exp_trig
# counts exp, sin, cos and acos. Comparisons and branches are not counted.
# Gyro propagation and renormalization are included.
OP_COUNTS = {
    "gd": {"mul_add": 211, "div": 9, "sqrt": 5, "exp_trig": 0},
    "cgd": {"mul_add": 275, "div": 11, "sqrt": 5, "exp_trig": 6},
    "doe": {"mul_add": 251, "div": 16, "sqrt": 8, "exp_trig": 6},
    "cdoe": {"mul_add": 261, "div": 18, "sqrt": 8, "exp_trig": 8},
}


def random_walk_stream(n, rate=400.0, seed=0, earth: EarthField | None = None,
                       gyro_std=0.5, accel_std=0.05, mag_std=0.01):
    """Attitude driven by a Gaussian random-walk angular rate, with noisy sensors.

    Returns ``(stream, truth)``.
    """
    earth = earth or EarthField()
    rng = np.random.default_rng(seed)
    dt = 1.0 / rate
    omega = np.cumsum(rng.normal(0.0, gyro_std * np.sqrt(dt), (n, 3)), axis=0)
    truth = np.empty((n, 4))
    q = np.array([1.0, 0.0, 0.0, 0.0])
    truth[0] = q
    # sample k's rate carries the attitude from k-1 to k, matching the filters
    for k in range(1, n):
        q = hamilton(q, rotvec_to_quat(omega[k] * dt))
        q /= np.linalg.norm(q)
        truth[k] = q
    accel = earth.gravity * earth_to_sensor(truth, np.array([0.0, 0.0, 1.0]))
    mag = earth_to_sensor(truth, earth.mag_ref)
    accel = accel + rng.normal(0.0, accel_std, accel.shape)
    mag = mag + rng.normal(0.0, mag_std, mag.shape)
    t = np.arange(n) * dt
    return ImuStream(t, omega, accel, mag), truth


def runner(algo, stream: ImuStream, earth: EarthField | None = None, sigma=(0.05, 0.05)):
    """Zero-argument callable running ``algo`` over ``stream``."""
    earth = earth or EarthField()
    dt = 1.0 / stream.rate
    if algo in ("gd", "cgd"):
        cfg = gd.GdConfig(sigma_a=sigma[0], sigma_m=sigma[1], earth=earth, dt=dt)
        fn = gd.run_gd if algo == "gd" else gd.run_cgd
    elif algo in ("doe", "cdoe"):
        cfg = doe.DoeConfig(sigma_a=sigma[0], sigma_m=sigma[1], earth=earth, dt=dt)
        fn = doe.run_doe if algo == "doe" else doe.run_cdoe
    else:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {', '.join(ALGORITHMS)}")
    init = np.array([1.0, 0.0, 0.0, 0.0])
    return lambda: fn(stream, cfg, init=init)


@dataclass(frozen=True)
class BenchResult:
    algo: str
    steps: int
    repeats: int
    best_per_step_s: float
    mean_per_step_s: float

    @property
    def steps_per_s(self):
        return 1.0 / self.best_per_step_s


def bench(algo, steps, repeats=5, seed=0) -> BenchResult:
    """Time ``repeats`` full runs of ``steps`` updates; the minimum is the headline figure."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    stream, _ = random_walk_stream(steps + 1, seed=seed)
    run = runner(algo, stream)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        run()
        times.append(time.perf_counter() - t0)
    return BenchResult(algo, steps, repeats, min(times) / steps, sum(times) / len(times) / steps)


def compare(algos=ALGORITHMS, steps=2000, rounds=30, seed=0):
    """Best per-step time for each algorithm, with runs interleaved round-robin.

    Interleaving spreads background load evenly across the algorithms, so
    their ratios are steadier than those of back-to-back :func:`bench` calls.
    """
    stream, _ = random_walk_stream(steps + 1, seed=seed)
    runs = {a: runner(a, stream) for a in algos}
    best = {a: float("inf") for a in algos}
    for _ in range(rounds):
        for a, run in runs.items():
            t0 = time.perf_counter()
            run()
            best[a] = min(best[a], time.perf_counter() - t0)
    return {a: v / steps for a, v in best.items()}
