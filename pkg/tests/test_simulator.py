import math

import numpy as np
import pytest
from scipy import stats

from corrfuse.correntropy import MixtureNoiseModel
from corrfuse.errors import SpecValidation
from corrfuse.gd import GdConfig, run_gd
from corrfuse.metrics import total_angle_errors
from corrfuse.quaternion import earth_to_sensor, hamilton, quat_conjugate, quat_to_euler
from corrfuse.sensors import EarthField
from corrfuse.simulator import DisturbanceSpec, TrajectorySpec, generate, preset_experiments

QUIET = DisturbanceSpec(noise_std=(0.0, 0.0, 0.0))


def test_seed_determinism():
    spec, dist = preset_experiments()["exp5"]
    a = generate(spec, dist, seed=7)
    b = generate(spec, dist, seed=7)
    c = generate(spec, dist, seed=8)
    for name in ("gyro", "accel", "mag"):
        np.testing.assert_array_equal(getattr(a.stream, name), getattr(b.stream, name))
    assert not np.array_equal(a.stream.accel, c.stream.accel)


def test_static_noise_free_accel_is_gravity():
    spec = TrajectorySpec("static", 1.0, 100.0, (0.3, -0.2, 0.5))
    sim = generate(spec, QUIET)
    unit = sim.stream.accel / np.linalg.norm(sim.stream.accel, axis=1, keepdims=True)
    np.testing.assert_allclose(unit, earth_to_sensor(sim.truth, [0, 0, 1]), atol=1e-15)
    assert len(sim.stream) == 101


def test_constant_yaw_rate_truth():
    w, T = 0.7, 10.0
    spec = TrajectorySpec("constant_rate", T, 200.0, rate_vector=(0.0, 0.0, w))
    sim = generate(spec, QUIET)
    yaw = quat_to_euler(sim.truth[-1]).yaw
    expected = math.remainder(w * T, 2 * math.pi)
    assert yaw == pytest.approx(expected, abs=1e-12)


def _recovered_rates(q, dt):
    out = []
    for a, b in zip(q[:-1], q[1:]):
        d = hamilton(quat_conjugate(a), b)
        d = d if d[0] >= 0 else -d
        out.append(2 * d[1:] / dt)  # small-angle log map
    return np.array(out)


def test_truth_consistent_with_rates():
    spec = TrajectorySpec("sinusoidal_rotation", 5.0, 400.0, (0.1, 0.2, 0.3), freq=0.5, amplitude=0.8, axis=(1, 2, 0.5))
    sim = generate(spec, QUIET)
    np.testing.assert_allclose(np.linalg.norm(sim.truth, axis=1), 1.0, atol=1e-12)
    rec = _recovered_rates(sim.truth, 1 / 400)
    mid = 0.5 * (sim.omega[:-1] + sim.omega[1:])
    assert np.max(np.abs(rec - mid)) < 1e-3


def test_scripted_keyframes_are_exact():
    kf = ((0.0, (0.0, 0.0, 0.5)), (1.0033, (0.3, 0.0, 0.0)))
    spec = TrajectorySpec("scripted", 2.0, 100.0, keyframes=kf)
    sim = generate(spec, QUIET)
    # after the first segment the yaw is 0.5 * 1.0033 and roll accumulates 0.3 * (2 - 1.0033)
    e = quat_to_euler(sim.truth[-1])
    assert e.yaw == pytest.approx(0.5 * 1.0033, abs=1e-12)
    assert e.roll == pytest.approx(0.3 * (2 - 1.0033), abs=1e-12)


def test_spikes_make_heavy_tails():
    spec, dist = preset_experiments()["exp3"]
    sim = generate(spec, dist, seed=0)
    g = EarthField().gravity * earth_to_sensor(sim.truth, [0, 0, 1])
    v_a = (sim.stream.accel - g).ravel()
    assert stats.kurtosis(v_a) > 1.0
    quiet = generate(spec, DisturbanceSpec(), seed=0)
    v_q = (quiet.stream.accel - g).ravel()
    assert abs(stats.kurtosis(v_q)) < 0.1


def test_mixture_noise_option():
    spec = TrajectorySpec("static", 5.0, 400.0)
    dist = DisturbanceSpec(noise_std=(0, 0, 0), accel_mixture=MixtureNoiseModel(0.1), accel_mixture_scale=0.1)
    sim = generate(spec, dist, seed=1)
    dev = (sim.stream.accel - sim.stream.accel.mean(axis=0)).ravel()
    assert np.max(np.abs(dev)) > 1.0 and stats.kurtosis(dev) > 3


def test_presets():
    presets = preset_experiments()
    assert sorted(presets) == ["exp1", "exp2", "exp3", "exp4", "exp5"]
    for spec, dist in presets.values():
        assert (spec.duration, spec.rate) == (60.0, 400.0)
        assert spec.n_samples == 24001
    assert presets["exp2"][1].accel_spikes == () and presets["exp2"][1].mag_segments == ()
    assert presets["exp5"][1].accel_spikes and presets["exp5"][1].mag_segments
    assert presets["exp1"][0].kind == "static"


def test_noise_free_filter_tracks_truth():
    spec, _ = preset_experiments()["exp2"]
    spec = TrajectorySpec(spec.kind, 10.0, spec.rate, spec.initial_ypr, freq=spec.freq,
                          amplitude=spec.amplitude, axis=spec.axis)
    sim = generate(spec, QUIET)
    est = run_gd(sim.stream, GdConfig(), init=sim.truth[0])
    assert np.max(total_angle_errors(est, sim.truth)) < 0.1


@pytest.mark.parametrize("spec", [
    TrajectorySpec("wobble"),
    TrajectorySpec("static", duration=0.0),
    TrajectorySpec("sinusoidal_rotation", freq=0.0),
    TrajectorySpec("scripted", keyframes=((0.5, (0, 0, 1)),)),
])
def test_spec_validation(spec):
    with pytest.raises(SpecValidation):
        generate(spec, DisturbanceSpec())


def test_disturbance_validation():
    with pytest.raises(SpecValidation):
        generate(TrajectorySpec(duration=10.0), DisturbanceSpec(accel_spikes=((5.0, 12.0, (1, 0, 0)),)))
    with pytest.raises(SpecValidation):
        generate(TrajectorySpec(duration=10.0), DisturbanceSpec(noise_std=(0.1, -1, 0)))
