import numpy as np
import pytest

from corrfuse import bench
from corrfuse.gd import GdConfig, run_gd
from corrfuse.metrics import total_angle_errors


def test_random_walk_stream_is_consistent():
    stream, truth = bench.random_walk_stream(2001, seed=4, accel_std=0.0, mag_std=0.0)
    assert len(stream) == 2001 and truth.shape == (2001, 4)
    # noise-free data and the true start: the filter must follow the truth closely
    est = run_gd(stream, GdConfig(dt=1 / stream.rate), init=truth[0])
    assert np.max(total_angle_errors(est, truth)) < 0.05


def test_bench_result_fields():
    r = bench.bench("doe", 100, repeats=2)
    assert r.steps == 100 and r.repeats == 2
    assert 0 < r.best_per_step_s <= r.mean_per_step_s
    assert r.steps_per_s == pytest.approx(1 / r.best_per_step_s)


def test_compare_covers_all():
    t = bench.compare(steps=50, rounds=2)
    assert set(t) == set(bench.ALGORITHMS)


@pytest.mark.parametrize("kw", [{"steps": 0}, {"steps": 10, "repeats": 0}])
def test_bench_rejects(kw):
    with pytest.raises(ValueError):
        bench.bench("gd", **kw)


def test_unknown_algorithm():
    stream, _ = bench.random_walk_stream(10)
    with pytest.raises(ValueError):
        bench.runner("ekf", stream)


def test_op_counts_ordering():
    c = bench.OP_COUNTS
    assert c["cgd"]["mul_add"] > c["gd"]["mul_add"]
    assert c["cdoe"]["exp_trig"] > c["doe"]["exp_trig"]
