"""Shared builders for small deterministic scenes and samples."""

from __future__ import annotations

import numpy as np
import pytest

from socialnce.nn import Mlp
from socialnce.scene import Sample, Scene, build_scene


def grid_records(n_frames: int, n_agents: int, spacing: float = 3.0):
    """Agents on a horizontal line, all walking +x at 0.1 per frame."""
    return [(t, m, m * spacing + 0.1 * t, float(m))
            for t in range(n_frames) for m in range(n_agents)]


def random_scene(rng: np.random.Generator, n_agents: int = 4,
                 n_frames: int = 12, scale: float = 4.0) -> Scene:
    records = [(t, m, *rng.uniform(-scale, scale, size=2))
               for t in range(n_frames) for m in range(n_agents)]
    return build_scene(records, frame_interval=0.4, scene_id="test")


@pytest.fixture
def simple_scene() -> Scene:
    return build_scene(grid_records(12, 4), frame_interval=0.4, scene_id="grid")


@pytest.fixture
def simple_sample(simple_scene) -> Sample:
    return Sample(scene=simple_scene, primary_agent=0, obs_len=4, pred_len=6,
                  start_frame=0)


def zero_mlp(sizes: list[int]) -> Mlp:
    """All-zero parameters: output is identically zero."""
    weights = [np.zeros((o, i)) for i, o in zip(sizes, sizes[1:])]
    biases = [np.zeros(o) for o in sizes[1:]]
    return Mlp(weights, biases)
