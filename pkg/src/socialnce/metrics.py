"""Endpoint accuracy and collision frequency for trajectory forecasts.

Collision checking compares the predicted primary path against ground-truth
neighbor paths frame by frame; a sample counts as colliding when any frame
puts the primary strictly closer than the threshold to a co-present neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .scene import Sample

__all__ = [
    "COLLISION_THRESHOLD",
    "fde",
    "sample_collides",
    "collision_rate",
    "EvalReport",
    "evaluate",
]

COLLISION_THRESHOLD = 0.2  # meters


def fde(predicted: np.ndarray, actual: np.ndarray) -> float:
    """Mean Euclidean distance between predicted and true final positions.

    Accepts a single (pred_len, 2) pair or batches with any leading shape.
    """
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if predicted.shape != actual.shape:
        raise ValueError(
            f"shape mismatch: predicted {predicted.shape} vs actual {actual.shape}")
    if predicted.ndim < 2 or predicted.shape[-1] != 2:
        raise ValueError(f"expected (..., steps, 2), got {predicted.shape}")
    err = predicted[..., -1, :] - actual[..., -1, :]
    return float(np.mean(np.hypot(err[..., 0], err[..., 1])))


def sample_collides(predicted: np.ndarray, sample: Sample,
                    threshold: float = COLLISION_THRESHOLD) -> bool:
    """True when the forecast passes strictly within threshold of a neighbor.

    predicted is the primary's world-frame forecast, one row per future
    frame of the sample; neighbors move along their ground-truth tracks.
    Exactly threshold distance does not count: the check is strict, so
    grazing contact at the boundary is safe.
    """
    predicted = np.asarray(predicted, dtype=float)
    if predicted.shape != (sample.pred_len, 2):
        raise ValueError(
            f"expected predicted shape {(sample.pred_len, 2)}, got {predicted.shape}")
    scene = sample.scene
    lo = sample.start_frame + sample.obs_len
    for t in range(sample.pred_len):
        frame = lo + t
        for a in np.flatnonzero(scene.present[frame]):
            if a == sample.primary_agent:
                continue
            if np.hypot(*(predicted[t] - scene.xy[frame, a])) < threshold:
                return True
    return False


def collision_rate(predictions: Sequence[np.ndarray], samples: Sequence[Sample],
                   threshold: float = COLLISION_THRESHOLD) -> float:
    """Fraction of samples whose forecast collides with any neighbor."""
    if len(predictions) != len(samples):
        raise ValueError(
            f"{len(predictions)} predictions for {len(samples)} samples")
    if not samples:
        raise ValueError("no samples given")
    hits = sum(sample_collides(p, s, threshold)
               for p, s in zip(predictions, samples))
    return hits / len(samples)


@dataclass(frozen=True)
class EvalReport:
    """Aggregate forecast quality over a sample set."""

    fde: float
    col: float
    n_samples: int
    collision_threshold: float

    def to_dict(self) -> dict:
        return {
            "fde": self.fde,
            "col": self.col,
            "n_samples": self.n_samples,
            "collision_threshold": self.collision_threshold,
        }

    def table(self) -> str:
        rows = [
            ("samples", f"{self.n_samples}"),
            ("FDE [m]", f"{self.fde:.4f}"),
            (f"COL (<{self.collision_threshold:g} m)", f"{self.col:.4f}"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def evaluate(predict: Callable[[Sample], np.ndarray], samples: Sequence[Sample],
             threshold: float = COLLISION_THRESHOLD) -> EvalReport:
    """Score any predictor: predict(sample) -> (pred_len, 2) world coords."""
    if not samples:
        raise ValueError("no samples given")
    preds = [np.asarray(predict(s), dtype=float) for s in samples]
    truth = [s.future() for s in samples]
    fde_val = float(np.mean([fde(p, t) for p, t in zip(preds, truth)]))
    col_val = collision_rate(preds, samples, threshold)
    return EvalReport(fde_val, col_val, len(samples), threshold)
