"""Deterministic synthetic crowd scenes with interaction-rich geometry.

Agents start on a circle at jittered angles and walk to the diametrically
opposite point, so every trajectory passes the congested center. Per step the
velocity is the preferred velocity toward the goal plus a pairwise
inverse-distance repulsion (continuous cutoff at repulsion_range), clamped to
the agent's preferred speed. A small leftward bias applied only during
mutually facing encounters breaks the exact head-on deadlock; an always-on
bias was rejected because it organizes a global rotation that resolves the
central crossing too cleanly, starving the data of near misses. With the
bias disabled the dynamics are equivariant under reflections.

This generator is a desk-scale stand-in for gym-based crowd simulation, not a
replication of it; its adequacy is judged by interaction_stats and the
acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import Scene

__all__ = [
    "ScenarioConfig",
    "SplitSpec",
    "InteractionStats",
    "generate_scene",
    "generate_dataset",
    "interaction_stats",
]

NEAR_MISS_THRESHOLD = 0.4  # meters
FACING_COS = 0.7  # two agents count as facing when each is this far ahead of the other


@dataclass(frozen=True)
class ScenarioConfig:
    """Crowd geometry, dynamics constants, and the generation seed.

    speed_jitter scales each agent's preferred speed by a uniform factor in
    [1 - speed_jitter, 1] so arrivals at the center desynchronize;
    deadlock_bias is the leftward escape speed applied during mutually
    facing encounters (0 restores exact reflection equivariance).
    """

    n_agents: int = 5
    n_scenes: int = 500
    circle_radius: float = 4.0
    preferred_speed: float = 1.0
    frame_interval: float = 0.4
    steps: int = 20
    repulsion_strength: float = 1.5
    repulsion_range: float = 1.2
    angle_jitter: float = 0.5
    speed_jitter: float = 0.05
    deadlock_bias: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.n_agents < 2:
            raise ValueError(f"n_agents must be >= 2, got {self.n_agents}")
        for name in ("n_scenes", "circle_radius", "preferred_speed",
                     "frame_interval", "steps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.steps < 2:
            raise ValueError(f"steps must be >= 2, got {self.steps}")
        for name in ("repulsion_strength", "repulsion_range", "angle_jitter",
                     "speed_jitter", "deadlock_bias"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not 0 <= self.speed_jitter < 1:
            raise ValueError(f"speed_jitter must be in [0, 1), got {self.speed_jitter}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")


@dataclass(frozen=True)
class SplitSpec:
    """Train/validation partition of generated scenes."""

    validation_fraction: float = 0.3
    split_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.validation_fraction < 1:
            raise ValueError(
                f"validation_fraction must be in [0, 1), "
                f"got {self.validation_fraction}")
        if self.split_seed < 0:
            raise ValueError(f"split_seed must be >= 0, got {self.split_seed}")


def _rollout(cfg: ScenarioConfig, pos0: np.ndarray, goals: np.ndarray,
             speeds: np.ndarray) -> np.ndarray:
    n = pos0.shape[0]
    dt = cfg.frame_interval
    frames = np.empty((cfg.steps, n, 2))
    frames[0] = pos0
    pos = pos0.copy()
    for t in range(1, cfg.steps):
        headings = np.zeros((n, 2))
        for i in range(n):
            to_goal = goals[i] - pos[i]
            dist = np.hypot(*to_goal)
            if dist > 1e-12:
                headings[i] = to_goal / dist
        vel = np.empty_like(pos)
        for i in range(n):
            dist = np.hypot(*(goals[i] - pos[i]))
            if dist > 1e-12:
                desired = headings[i] * min(speeds[i], dist / dt)
            else:
                desired = np.zeros(2)
            v = desired.copy()
            facing = False
            for j in range(n):
                if j == i:
                    continue
                away = pos[i] - pos[j]
                d = np.hypot(*away)
                if d < cfg.repulsion_range and d > 1e-12:
                    v += (cfg.repulsion_strength
                          * (1.0 / d - 1.0 / cfg.repulsion_range)
                          * away / d)
                    if (headings[i] @ -away > FACING_COS * d
                            and headings[j] @ away > FACING_COS * d):
                        facing = True
            if facing and cfg.repulsion_strength > 0:
                # leftward escape: same handedness for everyone, so an
                # exactly antipodal pair veers to opposite world sides
                v += cfg.deadlock_bias * np.array([-headings[i, 1], headings[i, 0]])
            speed = np.hypot(*v)
            if speed > speeds[i]:
                v *= speeds[i] / speed
            vel[i] = v
        pos = pos + vel * dt
        frames[t] = pos
    return frames


def generate_scene(cfg: ScenarioConfig, scene_index: int) -> Scene:
    """One deterministic scene; the rng stream derives from (seed, index)."""
    rng = np.random.default_rng([cfg.seed, scene_index])
    n = cfg.n_agents
    base = 2.0 * np.pi * np.arange(n) / n
    angles = base + rng.uniform(-cfg.angle_jitter, cfg.angle_jitter, size=n)
    pos0 = cfg.circle_radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    goals = -pos0
    speeds = cfg.preferred_speed * (1.0 - rng.uniform(0.0, cfg.speed_jitter, size=n))
    frames = _rollout(cfg, pos0, goals, speeds)
    present = np.ones(frames.shape[:2], dtype=bool)
    return Scene(frames, present, cfg.frame_interval, f"sim-{scene_index:05d}")


def generate_dataset(cfg: ScenarioConfig,
                     split: SplitSpec) -> tuple[list[Scene], list[Scene]]:
    """All n_scenes scenes, partitioned by a seeded shuffle.

    The validation side gets floor(fraction * n_scenes) scenes; together the
    two sides are disjoint and exhaustive.
    """
    scenes = [generate_scene(cfg, i) for i in range(cfg.n_scenes)]
    n_val = int(np.floor(split.validation_fraction * cfg.n_scenes))
    order = np.random.default_rng(split.split_seed).permutation(cfg.n_scenes)
    val_idx = set(order[:n_val].tolist())
    train = [s for i, s in enumerate(scenes) if i not in val_idx]
    val = [s for i, s in enumerate(scenes) if i in val_idx]
    return train, val


@dataclass
class InteractionStats:
    """Closeness structure of a scene collection.

    per_scene_min holds each scene's minimum pairwise distance over all
    frames and co-present pairs; near_miss_fraction is the share of scenes
    whose minimum dips below the near-miss threshold.
    """

    per_scene_min: np.ndarray
    near_miss_fraction: float
    near_miss_threshold: float

    def summary(self) -> dict:
        d = self.per_scene_min
        return {
            "n_scenes": int(d.size),
            "min": float(d.min()),
            "median": float(np.median(d)),
            "max": float(d.max()),
            "near_miss_fraction": self.near_miss_fraction,
            "near_miss_threshold": self.near_miss_threshold,
        }


def scene_min_distance(scene: Scene) -> float:
    """Minimum distance between any co-present pair over all frames."""
    best = np.inf
    for t in range(scene.n_frames):
        idx = np.flatnonzero(scene.present[t])
        if idx.size < 2:
            continue
        pts = scene.xy[t, idx]
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.hypot(diff[..., 0], diff[..., 1])
        d[np.diag_indices(idx.size)] = np.inf
        best = min(best, float(d.min()))
    return best


def interaction_stats(scenes: list[Scene],
                      threshold: float = NEAR_MISS_THRESHOLD) -> InteractionStats:
    """Sanity gate for generated data: is there anything worth contrasting?"""
    if not scenes:
        raise ValueError("no scenes given")
    mins = np.array([scene_min_distance(s) for s in scenes])
    frac = float(np.mean(mins < threshold))
    return InteractionStats(mins, frac, threshold)
