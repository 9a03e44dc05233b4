"""Positive and negative key synthesis for the social contrastive loss.

Negatives are placed on a ring around every neighbor that is present at the
target horizon offset: for neighbor position s_j, the points are
s_j + (rho cos(theta_p), rho sin(theta_p)) + eps with theta_p = 2 pi p / P
(0.25 p pi for the default P = 8 directions), rho drawn uniformly from
[rho_min, rho_max] per point and eps an isotropic 2D normal with per-axis
standard deviation noise_weight. The single positive key is the primary
agent's ground-truth position at the same offset plus the same noise.

Keys are bare (n, 2) coordinate arrays: a sample generates hundreds of them,
so they stay in bulk form from synthesis to embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import Sample

__all__ = [
    "AugmentConfig",
    "KeyBundle",
    "negative_keys",
    "positive_key",
    "build_key_bundles",
]


@dataclass(frozen=True)
class AugmentConfig:
    """Geometry and noise of the key synthesis.

    rho_min/rho_max bound the admissible ring radius (minimum comfortable
    separation up to the distance at which agents pass freely); noise_weight
    is the per-axis standard deviation of the additive normal noise, in
    meters.
    """

    rho_min: float = 0.2
    rho_max: float = 2.5
    noise_weight: float = 0.2
    n_directions: int = 8
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.rho_min <= self.rho_max:
            raise ValueError(
                f"need 0 < rho_min <= rho_max, got ({self.rho_min}, {self.rho_max})")
        if self.noise_weight < 0:
            raise ValueError(f"noise_weight must be >= 0, got {self.noise_weight}")
        if self.n_directions < 1:
            raise ValueError(f"n_directions must be >= 1, got {self.n_directions}")


@dataclass(frozen=True)
class KeyBundle:
    """All keys for one sample at one horizon offset.

    ``negatives`` has n_directions rows per neighbor present at the offset,
    neighbor-major; ``source_neighbor`` is parallel to its rows and names
    the neighbor each point was placed around.
    """

    horizon_offset: int
    positive: np.ndarray        # (2,)
    negatives: np.ndarray       # (n, 2)
    source_neighbor: np.ndarray  # (n,) agent indices

    def __post_init__(self):
        if self.positive.shape != (2,):
            raise ValueError(f"positive must be one point, got {self.positive.shape}")
        if self.negatives.ndim != 2 or self.negatives.shape[1] != 2:
            raise ValueError(f"negatives must be (n, 2), got {self.negatives.shape}")
        if self.source_neighbor.shape != (self.negatives.shape[0],):
            raise ValueError(
                f"negatives ({self.negatives.shape[0]}) and source_neighbor "
                f"({self.source_neighbor.shape[0]}) must be parallel")

    @property
    def n_negatives(self) -> int:
        return self.negatives.shape[0]


def _check_offset(sample: Sample, delta_t: int) -> int:
    if not 1 <= delta_t <= sample.pred_len:
        raise ValueError(
            f"delta_t {delta_t} outside prediction window "
            f"[1, {sample.pred_len}]")
    return sample.obs_len - 1 + delta_t


def _neighbor_rows(sample: Sample, offset: int) -> tuple[np.ndarray, np.ndarray]:
    frame = sample.start_frame + offset
    scene = sample.scene
    ids = np.flatnonzero(scene.present[frame])
    ids = ids[ids != sample.primary_agent]
    return ids, scene.xy[frame, ids]


def negative_keys(sample: Sample, delta_t: int, cfg: AugmentConfig,
                  rng: np.random.Generator) -> np.ndarray:
    """Ring points around every neighbor present at t + delta_t, (n, 2).

    Neighbor-major: rows [j*P, (j+1)*P) belong to the j-th present neighbor.
    Consumes the rng in a fixed layout (all radii first, then all noise), so
    output is deterministic given the generator state.
    """
    offset = _check_offset(sample, delta_t)
    centers = _neighbor_rows(sample, offset)[1]
    n, p = centers.shape[0], cfg.n_directions
    if n == 0:
        return np.empty((0, 2))
    theta = 2.0 * np.pi * np.arange(p) / p
    ring = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    rho = rng.uniform(cfg.rho_min, cfg.rho_max, size=(n, p))
    eps = rng.normal(0.0, cfg.noise_weight, size=(n, p, 2))
    points = centers[:, None, :] + rho[:, :, None] * ring[None, :, :] + eps
    return points.reshape(-1, 2)


def positive_key(sample: Sample, delta_t: int, cfg: AugmentConfig,
                 rng: np.random.Generator) -> np.ndarray:
    """Ground-truth primary position at t + delta_t with additive noise."""
    offset = _check_offset(sample, delta_t)
    frame = sample.start_frame + offset
    gt = sample.scene.xy[frame, sample.primary_agent]
    return gt + rng.normal(0.0, cfg.noise_weight, size=2)


def build_key_bundles(sample: Sample, horizon: int, cfg: AugmentConfig,
                      rng: np.random.Generator) -> list[KeyBundle]:
    """One KeyBundle per offset delta_t in {1..horizon}.

    Offsets where no neighbor is present yield a bundle with empty negatives;
    the caller decides whether to skip those. Per offset the positive is
    drawn before the negatives.
    """
    if not 1 <= horizon <= sample.pred_len:
        raise ValueError(
            f"horizon {horizon} outside prediction window [1, {sample.pred_len}]")
    bundles = []
    for delta_t in range(1, horizon + 1):
        positive = positive_key(sample, delta_t, cfg, rng)
        negatives = negative_keys(sample, delta_t, cfg, rng)
        ids = _neighbor_rows(sample, sample.obs_len - 1 + delta_t)[0]
        sources = np.repeat(ids, cfg.n_directions)
        bundles.append(KeyBundle(delta_t, positive, negatives, sources))
    return bundles
