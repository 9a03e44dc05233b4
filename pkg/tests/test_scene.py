from __future__ import annotations

import numpy as np
import pytest

from socialnce.scene import (
    AgentState,
    Sample,
    Scene,
    build_scene,
    neighbors_at,
    scene_to_records,
    slice_samples,
)

from conftest import grid_records, random_scene


def ragged_scene(rng, n_agents, n_frames):
    """Scene where each agent is present on its own contiguous interval."""
    while True:
        records = []
        for m in range(n_agents):
            lo = int(rng.integers(0, n_frames - 1))
            hi = int(rng.integers(lo + 1, n_frames + 1))
            for t in range(lo, hi):
                records.append((t, m, *rng.uniform(-5, 5, size=2)))
        frames = {r[0] for r in records}
        if len(frames) == max(frames) - min(frames) + 1:  # dense time grid
            return build_scene(records, frame_interval=0.4)


class TestScene:
    def test_grid_shape_and_state(self, simple_scene):
        assert simple_scene.n_frames == 12
        assert simple_scene.n_agents == 4
        s = simple_scene.state(3, 2)
        assert s.x == pytest.approx(6.3)
        assert s.y == 2.0

    def test_xy_is_read_only(self, simple_scene):
        with pytest.raises(ValueError):
            simple_scene.xy[0, 0, 0] = 99.0

    def test_absent_cells_zeroed(self):
        scene = build_scene([(0, 0, 1, 1), (1, 0, 2, 2), (1, 1, 3, 3)],
                            frame_interval=0.4)
        assert scene.state(0, 1) is None
        assert scene.xy[0, 1].tolist() == [0.0, 0.0]

    def test_rejects_non_contiguous_track(self):
        records = [(0, 0, 0, 0), (2, 0, 1, 1), (0, 1, 5, 5), (1, 1, 5, 5),
                   (2, 1, 5, 5)]
        with pytest.raises(ValueError, match="non-contiguous"):
            build_scene(records, frame_interval=0.4)

    def test_rejects_duplicate_record(self):
        records = [(0, 0, 0, 0), (0, 0, 1, 1), (0, 1, 5, 5), (1, 0, 2, 2),
                   (1, 1, 5, 5)]
        with pytest.raises(ValueError, match="duplicate"):
            build_scene(records, frame_interval=0.4)

    def test_rejects_single_agent(self):
        with pytest.raises(ValueError, match="2 agents"):
            build_scene([(0, 0, 0, 0), (1, 0, 1, 1)], frame_interval=0.4)

    def test_rejects_non_finite(self):
        records = grid_records(3, 2) + [(2, 1, float("nan"), 0.0)]
        with pytest.raises(ValueError):
            build_scene(records, frame_interval=0.4)

    def test_records_round_trip(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            scene = ragged_scene(rng, n_agents=int(rng.integers(2, 5)),
                                 n_frames=10)
            back = build_scene(scene_to_records(scene), scene.frame_interval)
            assert back.n_frames == scene.n_frames
            assert back.n_agents == scene.n_agents
            assert np.array_equal(back.present, scene.present)
            assert np.array_equal(back.xy, scene.xy)


class TestSample:
    def test_window_accessors(self, simple_sample):
        assert simple_sample.window_len == 10
        assert simple_sample.last_obs_frame == 3
        np.testing.assert_allclose(simple_sample.anchor(), [0.3, 0.0])
        obs = simple_sample.observed()
        fut = simple_sample.future()
        assert obs.shape == (4, 2)
        assert fut.shape == (6, 2)
        np.testing.assert_allclose(obs[:, 0], [0.0, 0.1, 0.2, 0.3])
        np.testing.assert_allclose(fut[:, 0], [0.4, 0.5, 0.6, 0.7, 0.8, 0.9])

    def test_rejects_window_past_scene_end(self, simple_scene):
        with pytest.raises(ValueError, match="exceeds scene"):
            Sample(simple_scene, 0, obs_len=8, pred_len=8, start_frame=0)

    def test_rejects_absent_primary(self):
        records = grid_records(10, 2)
        records = [r for r in records if not (r[1] == 1 and r[0] < 3)]
        scene = build_scene(records, frame_interval=0.4)
        with pytest.raises(ValueError, match="not present"):
            Sample(scene, 1, obs_len=4, pred_len=4, start_frame=0)

    def test_neighbors_at_skips_primary_and_absent(self):
        records = grid_records(10, 3)
        records = [r for r in records if not (r[1] == 2 and r[0] >= 5)]
        scene = build_scene(records, frame_interval=0.4)
        sample = Sample(scene, 0, obs_len=4, pred_len=4, start_frame=0)
        early = neighbors_at(sample, 2)
        late = neighbors_at(sample, 7)
        assert [m for m, _ in early] == [1, 2]
        assert [m for m, _ in late] == [1]
        with pytest.raises(ValueError, match="outside window"):
            neighbors_at(sample, 8)


class TestSliceSamples:
    def brute_force_count(self, scene, obs_len, pred_len, stride):
        window = obs_len + pred_len
        count = 0
        for start in range(0, scene.n_frames - window + 1, stride):
            for agent in range(scene.n_agents):
                if all(scene.present[start + k, agent] for k in range(window)):
                    count += 1
        return count

    def test_count_matches_brute_force(self):
        # oracle over random ragged scenes with M <= 4, T <= 12
        rng = np.random.default_rng(11)
        for _ in range(50):
            scene = ragged_scene(rng, n_agents=int(rng.integers(2, 5)),
                                 n_frames=int(rng.integers(4, 13)))
            obs_len = int(rng.integers(1, 4))
            pred_len = int(rng.integers(1, 4))
            stride = int(rng.integers(1, 4))
            got = slice_samples(scene, obs_len, pred_len, stride)
            assert len(got) == self.brute_force_count(
                scene, obs_len, pred_len, stride)

    def test_every_sample_revalidates(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            scene = ragged_scene(rng, n_agents=3, n_frames=10)
            for s in slice_samples(scene, 2, 3):
                # reconstructing must not raise: presence and bounds hold
                Sample(s.scene, s.primary_agent, s.obs_len, s.pred_len,
                       s.start_frame)

    def test_order_is_frame_major_then_agent(self):
        scene = build_scene(grid_records(6, 3), frame_interval=0.4)
        got = [(s.start_frame, s.primary_agent)
               for s in slice_samples(scene, 2, 2)]
        assert got == [(s, m) for s in range(3) for m in range(3)]

    def test_full_presence_scene_count(self, simple_scene):
        # 12 frames, window 10 -> 3 starts, 4 agents each
        assert len(slice_samples(simple_scene, 4, 6)) == 12
