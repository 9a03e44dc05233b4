"""Multi-agent trajectory scenes and the windowing that turns them into samples.

A Scene is a dense time-major grid of agent positions with explicit absence
(a boolean mask, never NaN). A Sample is one forecasting instance cut out of
a Scene: an observation window, a prediction window, and a primary agent that
must be present throughout. Everything downstream (augmentation, training,
metrics) reads from these two types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AgentState",
    "Scene",
    "Sample",
    "build_scene",
    "slice_samples",
    "neighbors_at",
    "scene_to_records",
]


@dataclass(frozen=True)
class AgentState:
    """Planar position of one agent at one frame, in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite agent state ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.float64)


class Scene:
    """Time-major grid of optional agent positions at a fixed frame interval.

    ``xy`` has shape (T, M, 2) and is only meaningful where ``present`` is
    True; absent cells are zeroed. Each agent's present frames must form one
    contiguous interval (enter once, leave once). Instances are immutable
    after construction and safe to share across readers.
    """

    def __init__(self, xy: np.ndarray, present: np.ndarray,
                 frame_interval: float, scene_id: str = ""):
        xy = np.asarray(xy, dtype=np.float64)
        present = np.asarray(present, dtype=bool)
        if xy.ndim != 3 or xy.shape[2] != 2 or present.shape != xy.shape[:2]:
            raise ValueError(
                f"shape mismatch: xy {xy.shape} vs present {present.shape}")
        n_frames, n_agents = present.shape
        if n_frames < 2:
            raise ValueError(f"scene needs at least 2 frames, got {n_frames}")
        if n_agents < 2:
            raise ValueError(f"scene needs at least 2 agents, got {n_agents}")
        if not (frame_interval > 0):
            raise ValueError(f"frame_interval must be > 0, got {frame_interval}")
        if not np.all(np.isfinite(xy[present])):
            t, m = np.argwhere(present & ~np.isfinite(xy).all(axis=2))[0]
            raise ValueError(f"non-finite position for agent {m} at frame {t}")
        for m in range(n_agents):
            frames = np.flatnonzero(present[:, m])
            if frames.size == 0:
                raise ValueError(f"agent {m} is never present")
            if frames[-1] - frames[0] + 1 != frames.size:
                raise ValueError(
                    f"agent {m} has a non-contiguous track "
                    f"(present frames {frames.tolist()})")
        xy = xy.copy()
        xy[~present] = 0.0
        xy.flags.writeable = False
        present = present.copy()
        present.flags.writeable = False
        self.xy = xy
        self.present = present
        self.frame_interval = float(frame_interval)
        self.scene_id = scene_id

    @property
    def n_frames(self) -> int:
        return self.present.shape[0]

    @property
    def n_agents(self) -> int:
        return self.present.shape[1]

    def state(self, frame: int, agent: int) -> AgentState | None:
        """Position of ``agent`` at ``frame``, or None if absent."""
        if self.present[frame, agent]:
            return AgentState(self.xy[frame, agent, 0], self.xy[frame, agent, 1])
        return None

    def __repr__(self):
        return (f"Scene({self.scene_id!r}, T={self.n_frames}, "
                f"M={self.n_agents}, dt={self.frame_interval})")


@dataclass(frozen=True)
class Sample:
    """One forecasting instance: window of a scene with a designated primary.

    The primary agent must be present for the full obs_len + pred_len window;
    neighbors may come and go.
    """

    scene: Scene
    primary_agent: int
    obs_len: int
    pred_len: int
    start_frame: int

    def __post_init__(self):
        if self.obs_len < 1 or self.pred_len < 1:
            raise ValueError(
                f"obs_len and pred_len must be >= 1, got "
                f"({self.obs_len}, {self.pred_len})")
        if not 0 <= self.primary_agent < self.scene.n_agents:
            raise ValueError(f"primary agent {self.primary_agent} out of range")
        end = self.start_frame + self.obs_len + self.pred_len
        if self.start_frame < 0 or end > self.scene.n_frames:
            raise ValueError(
                f"window [{self.start_frame}, {end}) exceeds scene "
                f"of {self.scene.n_frames} frames")
        if not self.scene.present[self.start_frame:end, self.primary_agent].all():
            raise ValueError(
                f"primary agent {self.primary_agent} not present for the "
                f"full window starting at frame {self.start_frame}")

    @property
    def window_len(self) -> int:
        return self.obs_len + self.pred_len

    @property
    def last_obs_frame(self) -> int:
        """Scene frame index of the last observed step (time t)."""
        return self.start_frame + self.obs_len - 1

    def anchor(self) -> np.ndarray:
        """Primary position at the last observed frame, shape (2,)."""
        return self.scene.xy[self.last_obs_frame, self.primary_agent].copy()

    def observed(self) -> np.ndarray:
        """Primary positions over the observation window, shape (obs_len, 2)."""
        lo = self.start_frame
        return self.scene.xy[lo:lo + self.obs_len, self.primary_agent].copy()

    def future(self) -> np.ndarray:
        """Primary ground-truth positions after t, shape (pred_len, 2)."""
        lo = self.start_frame + self.obs_len
        return self.scene.xy[lo:lo + self.pred_len, self.primary_agent].copy()


def build_scene(records, frame_interval: float, scene_id: str = "") -> Scene:
    """Assemble a Scene from (frame, agent, x, y) records.

    The time grid densely spans min..max frame index; cells without a record
    are marked absent. Agent indices must be non-negative and every index up
    to the maximum must occur in at least one record.
    """
    if not records:
        raise ValueError("no records given")
    seen: dict[tuple[int, int], int] = {}
    for i, (frame, agent, x, y) in enumerate(records):
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(
                f"record {i} (frame {frame}, agent {agent}): "
                f"non-finite coordinate ({x}, {y})")
        key = (int(frame), int(agent))
        if key in seen:
            raise ValueError(
                f"duplicate record for frame {frame}, agent {agent}: "
                f"records {seen[key]} and {i}")
        seen[key] = i
        if agent < 0:
            raise ValueError(f"record {i}: negative agent index {agent}")

    frames = [int(r[0]) for r in records]
    agents = [int(r[1]) for r in records]
    frame_lo = min(frames)
    n_frames = max(frames) - frame_lo + 1
    n_agents = max(agents) + 1

    xy = np.zeros((n_frames, n_agents, 2), dtype=np.float64)
    present = np.zeros((n_frames, n_agents), dtype=bool)
    for frame, agent, x, y in records:
        t = int(frame) - frame_lo
        xy[t, int(agent)] = (x, y)
        present[t, int(agent)] = True

    missing = np.flatnonzero(~present.any(axis=0))
    if missing.size:
        raise ValueError(f"agent {missing[0]} has no records")
    return Scene(xy, present, frame_interval, scene_id)


def scene_to_records(scene: Scene) -> list[tuple[int, int, float, float]]:
    """Inverse of build_scene: one (frame, agent, x, y) tuple per present cell."""
    out = []
    for t in range(scene.n_frames):
        for m in range(scene.n_agents):
            if scene.present[t, m]:
                out.append((t, m, float(scene.xy[t, m, 0]), float(scene.xy[t, m, 1])))
    return out


def slice_samples(scene: Scene, obs_len: int, pred_len: int,
                  stride: int = 1) -> list[Sample]:
    """Cut every valid forecasting window out of a scene.

    One Sample per (window start, agent) pair where the agent is present for
    the whole window. Starts advance by ``stride``; ordering is frame-major,
    then agent index, so iteration order is reproducible.
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if obs_len < 1 or pred_len < 1:
        raise ValueError("obs_len and pred_len must be >= 1")
    window = obs_len + pred_len
    samples = []
    for start in range(0, scene.n_frames - window + 1, stride):
        full = scene.present[start:start + window].all(axis=0)
        for agent in np.flatnonzero(full):
            samples.append(Sample(scene, int(agent), obs_len, pred_len, start))
    return samples


def neighbors_at(sample: Sample, offset: int) -> list[tuple[int, AgentState]]:
    """Agents other than the primary present at window offset ``offset``.

    ``offset`` counts frames from the sample's start_frame. Returned in
    ascending agent-index order.
    """
    if not 0 <= offset < sample.window_len:
        raise ValueError(
            f"offset {offset} outside window of {sample.window_len} frames")
    frame = sample.start_frame + offset
    scene = sample.scene
    out = []
    for agent in np.flatnonzero(scene.present[frame]):
        if agent != sample.primary_agent:
            out.append((int(agent), AgentState(*scene.xy[frame, agent])))
    return out
