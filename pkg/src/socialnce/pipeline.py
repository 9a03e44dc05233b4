"""From a RunConfig to ready-to-train sample lists.

Data comes either from the built-in generator (scenario + split) or from
trajectory files named in the config. A single train file without a val file
is split at the sample level using the same split spec as generated data.
"""

from __future__ import annotations

import numpy as np

from .config import RunConfig
from .dataset_io import load_scene
from .forecaster import TrainResult, train
from .scene import Sample, Scene, slice_samples
from .simulator import generate_dataset

__all__ = ["scenes_to_samples", "build_datasets", "run_training"]


def scenes_to_samples(scenes: list[Scene], run: RunConfig) -> list[Sample]:
    out: list[Sample] = []
    for scene in scenes:
        out.extend(slice_samples(scene, run.obs_len, run.pred_len))
    return out


def build_datasets(run: RunConfig) -> tuple[list[Sample], list[Sample]]:
    """Training and validation samples for a run.

    File-based runs use the scenario's frame_interval for parsing; with only
    a train file, its samples are shuffled and split by the split spec.
    """
    if run.train_path is None:
        train_scenes, val_scenes = generate_dataset(run.scenario, run.split)
        return (scenes_to_samples(train_scenes, run),
                scenes_to_samples(val_scenes, run))

    dt = run.scenario.frame_interval
    train_samples = scenes_to_samples([load_scene(run.train_path, dt)], run)
    if run.val_path is not None:
        val_samples = scenes_to_samples([load_scene(run.val_path, dt)], run)
        return train_samples, val_samples

    n = len(train_samples)
    n_val = int(np.floor(run.split.validation_fraction * n))
    order = np.random.default_rng(run.split.split_seed).permutation(n)
    val_idx = set(order[:n_val].tolist())
    return ([s for i, s in enumerate(train_samples) if i not in val_idx],
            [s for i, s in enumerate(train_samples) if i in val_idx])


def run_training(run: RunConfig, progress=None) -> TrainResult:
    """Build the data and train; the one-call version of the full pipeline."""
    train_samples, val_samples = build_datasets(run)
    if not train_samples:
        raise ValueError("no training samples: check window sizes vs scene length")
    if not val_samples:
        raise ValueError("no validation samples: check split fraction")
    return train(train_samples, val_samples, run, progress)
