from __future__ import annotations

import numpy as np
import pytest

from socialnce.dataset_io import (
    load_scene,
    parse_trajectory_file,
    save_scene,
    write_trajectory_file,
)
from socialnce.simulator import ScenarioConfig, generate_scene


class TestParse:
    def test_frame_reindexing(self):
        text = "0 1 0.0 0.0\n0 2 1.0 1.0\n10 1 0.5 0.0\n10 2 1.0 0.5\n"
        scene = parse_trajectory_file(text)
        assert scene.n_frames == 2
        assert scene.n_agents == 2
        np.testing.assert_allclose(scene.xy[1, 0], [0.5, 0.0])

    def test_comments_and_blank_lines_ignored(self):
        text = ("# header comment\n\n0 0 1.0 2.0\n  \n# another\n"
                "0 1 3.0 4.0\n1 0 1.5 2.0\n1 1 3.0 4.5\n")
        scene = parse_trajectory_file(text)
        assert scene.n_frames == 2 and scene.n_agents == 2

    def test_gap_split_at_missing_frame(self):
        # agent 7 misses frame 20 of the stride-10 grid: split into two
        lines = ["0 7 0.0 0.0", "10 7 1.0 0.0", "30 7 3.0 0.0"]
        lines += [f"{f} 8 5.0 5.0" for f in (0, 10, 20, 30)]
        scene = parse_trajectory_file("\n".join(lines))
        assert scene.n_frames == 4
        assert scene.n_agents == 3  # two pieces of agent 7 plus agent 8
        lengths = sorted(scene.present.sum(axis=0).tolist())
        assert lengths == [1, 2, 4]

    def test_no_split_when_frame_absent_globally(self):
        # nobody has frame 20, so ranks stay consecutive and no split happens
        lines = ["0 7 0.0 0.0", "10 7 1.0 0.0", "30 7 3.0 0.0"]
        lines += [f"{f} 8 5.0 5.0" for f in (0, 10, 30)]
        scene = parse_trajectory_file("\n".join(lines))
        assert scene.n_frames == 3
        assert scene.n_agents == 2

    def test_order_insensitive(self):
        rng = np.random.default_rng(0)
        scene = generate_scene(ScenarioConfig(n_agents=4, steps=8), 1)
        lines = write_trajectory_file(scene).splitlines()
        a = parse_trajectory_file("\n".join(lines))
        for _ in range(5):
            rng.shuffle(lines)
            b = parse_trajectory_file("\n".join(lines))
            assert np.array_equal(a.xy, b.xy)
            assert np.array_equal(a.present, b.present)

    def test_swap_xy(self):
        text = "0 0 1.0 2.0\n0 1 3.0 4.0\n1 0 1.0 2.0\n1 1 3.0 4.0\n"
        scene = parse_trajectory_file(text, swap_xy=True)
        np.testing.assert_allclose(scene.xy[0, 0], [2.0, 1.0])

    def test_subsample_keeps_every_kth_frame(self):
        lines = [f"{t} {m} {float(t)} {float(m)}"
                 for t in range(10) for m in range(2)]
        scene = parse_trajectory_file("\n".join(lines), subsample=3)
        assert scene.n_frames == 4  # frames 0, 3, 6, 9
        np.testing.assert_allclose(scene.xy[:, 0, 0], [0.0, 3.0, 6.0, 9.0])

    def test_accepts_line_iterables_and_float_integer_ids(self):
        lines = ["0.0 0.0 1.0 1.0", "0 1 2.0 2.0", "1 0 1.0 1.5",
                 "1 1 2.0 2.5"]
        scene = parse_trajectory_file(lines)
        assert scene.n_agents == 2


class TestParseErrors:
    def test_malformed_float_names_line(self):
        with pytest.raises(ValueError, match="line 1"):
            parse_trajectory_file("0 1 abc 0.0")

    def test_wrong_column_count_names_line(self):
        text = "0 0 1.0 1.0\n0 1 2.0\n"
        with pytest.raises(ValueError, match="line 2.*4 columns"):
            parse_trajectory_file(text)

    def test_line_numbers_count_comments(self):
        text = "# c\n0 0 1.0 1.0\nbad line here x\n"
        with pytest.raises(ValueError, match="line 3"):
            parse_trajectory_file(text)

    def test_non_integral_frame_rejected(self):
        with pytest.raises(ValueError, match="integer"):
            parse_trajectory_file("0.5 0 1.0 1.0")

    def test_duplicate_observation_rejected(self):
        text = "0 0 1.0 1.0\n0 0 2.0 2.0\n"
        with pytest.raises(ValueError, match="duplicate"):
            parse_trajectory_file(text)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            parse_trajectory_file("0 0 nan 1.0")

    def test_single_agent_rejected(self):
        with pytest.raises(ValueError, match="fewer than 2"):
            parse_trajectory_file("0 0 1.0 1.0\n1 0 2.0 2.0")

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="no trajectory data"):
            parse_trajectory_file("# only a comment\n")


class TestWrite:
    def test_minimal_scene_line_count(self):
        text = "0 0 1.0 1.0\n0 1 2.0 2.0\n1 0 1.0 1.5\n1 1 2.0 2.5\n"
        scene = parse_trajectory_file(text)
        assert len(write_trajectory_file(scene).splitlines()) == 4

    def test_round_trip_simulator_scenes(self):
        # write -> parse identity up to renumbering; full presence means the
        # canonical form is literally identical
        cfg = ScenarioConfig(n_agents=4, steps=10)
        for i in range(25):
            scene = generate_scene(cfg, i)
            back = parse_trajectory_file(write_trajectory_file(scene))
            assert back.n_frames == scene.n_frames
            assert back.n_agents == scene.n_agents
            assert np.array_equal(back.present, scene.present)
            assert np.abs(back.xy - scene.xy).max() <= 1e-9

    def test_round_trip_with_partial_presence(self):
        lines = ["0 0 0.25 -1.125", "1 0 0.5 -1.0", "2 0 0.75 -0.875",
                 "1 1 4.0 4.0", "2 1 4.5 4.5"]
        scene = parse_trajectory_file("\n".join(lines))
        back = parse_trajectory_file(write_trajectory_file(scene))
        assert np.array_equal(back.present, scene.present)
        assert np.abs(back.xy - scene.xy).max() <= 1e-9

    def test_file_helpers(self, tmp_path):
        scene = generate_scene(ScenarioConfig(n_agents=3, steps=6), 0)
        path = tmp_path / "scene.txt"
        save_scene(str(path), scene)
        back = load_scene(str(path))
        assert np.abs(back.xy - scene.xy).max() <= 1e-9
