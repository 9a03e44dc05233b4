from __future__ import annotations

import numpy as np
import pytest

from socialnce.metrics import (
    COLLISION_THRESHOLD,
    EvalReport,
    collision_rate,
    evaluate,
    fde,
    sample_collides,
)
from socialnce.scene import Sample, build_scene

from conftest import grid_records, random_scene


def parallel_walkers_sample(gap: float, n_frames: int = 10):
    """Two agents walking +x on horizontal lines ``gap`` apart."""
    records = [(t, 0, 0.5 * t, 0.0) for t in range(n_frames)]
    records += [(t, 1, 0.5 * t, gap) for t in range(n_frames)]
    scene = build_scene(records, frame_interval=0.4)
    return Sample(scene, 0, obs_len=4, pred_len=6, start_frame=0)


class TestFde:
    def test_three_four_five_fixture(self):
        # predicted endpoint off by (3, 4): error exactly 5
        actual = np.zeros((4, 2))
        predicted = np.zeros((4, 2))
        predicted[-1] = (3.0, 4.0)
        assert fde(predicted, actual) == 5.0

    def test_only_final_step_matters(self):
        actual = np.zeros((5, 2))
        predicted = np.random.default_rng(0).normal(size=(5, 2))
        predicted[-1] = 0.0
        assert fde(predicted, actual) == 0.0

    def test_batch_mean(self):
        a = np.zeros((3, 4, 2))
        p = np.zeros((3, 4, 2))
        p[0, -1] = (3.0, 4.0)   # 5
        p[1, -1] = (0.0, 1.0)   # 1
        p[2, -1] = (0.0, 0.0)   # 0
        assert fde(p, a) == pytest.approx(2.0)

    def test_rigid_motion_invariance(self):
        # translating and rotating both trajectories together keeps fde
        rng = np.random.default_rng(1)
        for _ in range(20):
            p = rng.normal(size=(6, 2))
            a = rng.normal(size=(6, 2))
            ang = rng.uniform(0, 2 * np.pi)
            rot = np.array([[np.cos(ang), -np.sin(ang)],
                            [np.sin(ang), np.cos(ang)]])
            shift = rng.normal(size=2)
            assert fde(p @ rot.T + shift, a @ rot.T + shift) == pytest.approx(
                fde(p, a), rel=1e-12)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            fde(np.zeros((3, 2)), np.zeros((4, 2)))


class TestSampleCollides:
    def test_threshold_is_strict(self):
        # prediction running exactly at threshold distance does not collide
        sample = parallel_walkers_sample(gap=5.0)
        exactly = sample.future().copy()
        exactly[:, 1] = 5.0 - COLLISION_THRESHOLD
        assert not sample_collides(exactly, sample)
        inside = exactly.copy()
        inside[0, 1] += 1e-9
        assert sample_collides(inside, sample)

    def test_true_future_far_from_neighbor_is_safe(self):
        sample = parallel_walkers_sample(gap=5.0)
        assert not sample_collides(sample.future(), sample)

    def test_collision_against_moving_neighbor_track(self):
        # neighbor crosses the predicted path midway through the horizon
        records = [(t, 0, float(t), 0.0) for t in range(10)]
        records += [(t, 1, 6.0, 6.0 - t) for t in range(10)]
        scene = build_scene(records, frame_interval=0.4)
        sample = Sample(scene, 0, obs_len=3, pred_len=6, start_frame=0)
        pred = sample.future()  # agent 0 reaches x=6 when agent 1 reaches y=0
        assert sample_collides(pred, sample)

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(2)
        thresholds = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6]
        for _ in range(10):
            scene = random_scene(rng, n_agents=4, n_frames=10, scale=2.0)
            sample = Sample(scene, 0, obs_len=3, pred_len=5, start_frame=0)
            pred = rng.uniform(-2, 2, size=(5, 2))
            flags = [sample_collides(pred, sample, th) for th in thresholds]
            assert flags == sorted(flags)  # False..False True..True

    def test_wrong_prediction_shape_rejected(self):
        sample = parallel_walkers_sample(gap=3.0)
        with pytest.raises(ValueError, match="shape"):
            sample_collides(np.zeros((2, 2)), sample)


class TestCollisionRate:
    def test_fifty_percent_fixture(self):
        # two samples, one forced collision, one safe: rate exactly 0.5
        safe = parallel_walkers_sample(gap=5.0)
        tight = parallel_walkers_sample(gap=0.1)
        preds = [safe.future(), tight.future()]
        assert collision_rate(preds, [safe, tight]) == 0.5

    def test_rate_monotone_in_threshold(self):
        rng = np.random.default_rng(3)
        samples, preds = [], []
        for _ in range(20):
            scene = random_scene(rng, n_agents=3, n_frames=10, scale=2.0)
            samples.append(Sample(scene, 0, obs_len=3, pred_len=5,
                                  start_frame=0))
            preds.append(rng.uniform(-2, 2, size=(5, 2)))
        rates = [collision_rate(preds, samples, th)
                 for th in (0.05, 0.2, 0.5, 1.0, 2.0)]
        assert rates == sorted(rates)

    def test_length_mismatch_rejected(self):
        sample = parallel_walkers_sample(gap=1.0)
        with pytest.raises(ValueError):
            collision_rate([sample.future()], [sample, sample])


class TestEvaluate:
    def test_duck_typed_predictor(self):
        scene = build_scene(grid_records(12, 3), frame_interval=0.4)
        samples = [Sample(scene, m, obs_len=4, pred_len=6, start_frame=0)
                   for m in range(3)]
        report = evaluate(lambda s: s.future(), samples)
        assert report.fde == 0.0
        assert report.n_samples == 3
        assert report.collision_threshold == COLLISION_THRESHOLD

    def test_partition_weighting(self):
        # whole-set fde/col equal the case-count weighted partition means
        rng = np.random.default_rng(4)
        samples, preds = [], {}
        for i in range(12):
            scene = random_scene(rng, n_agents=3, n_frames=10, scale=3.0)
            s = Sample(scene, 0, obs_len=3, pred_len=5, start_frame=0)
            samples.append(s)
            preds[id(s)] = rng.uniform(-3, 3, size=(5, 2))
        predict = lambda s: preds[id(s)]
        whole = evaluate(predict, samples)
        for cut in (3, 5, 7):
            left = evaluate(predict, samples[:cut])
            right = evaluate(predict, samples[cut:])
            n_l, n_r = cut, len(samples) - cut
            fde_mix = (left.fde * n_l + right.fde * n_r) / len(samples)
            col_mix = (left.col * n_l + right.col * n_r) / len(samples)
            assert abs(whole.fde - fde_mix) < 1e-12
            assert abs(whole.col - col_mix) < 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="no samples"):
            evaluate(lambda s: s.future(), [])

    def test_report_table_and_dict(self):
        r = EvalReport(fde=0.5, col=0.25, n_samples=8, collision_threshold=0.2)
        assert r.to_dict()["col"] == 0.25
        table = r.table()
        assert "0.5000" in table and "0.2500" in table and "8" in table
