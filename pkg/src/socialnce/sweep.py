"""Hyperparameter search: random draws, grid cycling, JSONL trial log.

A sweep evaluates the base config as trial 0 and sampled configs after it,
so the selected best can never be worse than the base on the same split.
Two search presets mirror the two tuning passes the defaults came from: one
over the loss hyperparameters, one over the augmentation geometry.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .config import RunConfig
from .forecaster import train
from .metrics import EvalReport
from .pipeline import build_datasets

__all__ = [
    "UniformRange",
    "GridValues",
    "SearchSpace",
    "TrialRecord",
    "SWEEP_PRESETS",
    "sample_config",
    "make_objective",
    "run_sweep",
]


@dataclass(frozen=True)
class UniformRange:
    """Continuous parameter drawn uniformly from [lo, hi)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi})")


@dataclass(frozen=True)
class GridValues:
    """Discrete parameter cycled over a fixed value list."""

    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError("grid needs at least one value")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"grid values must be distinct, got {self.values}")


ParamSpec = Union[UniformRange, GridValues]


@dataclass(frozen=True)
class SearchSpace:
    """What to vary: dotted RunConfig paths mapped to their sampling rule."""

    params: dict[str, ParamSpec]
    n_trials: int = 20
    search_seed: int = 0

    def __post_init__(self):
        if not self.params:
            raise ValueError("search space has no parameters")
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.search_seed < 0:
            raise ValueError(f"search_seed must be >= 0, got {self.search_seed}")


# The two searches are run separately: loss hyperparameters first,
# augmentation geometry second.
SWEEP_PRESETS: dict[str, SearchSpace] = {
    "loss": SearchSpace({
        "nce.temperature": UniformRange(0.1, 0.5),
        "nce.contrastive_weight": UniformRange(0.0, 50.0),
        "nce.horizon": GridValues((1, 2, 3, 4, 5)),
    }),
    "augmentation": SearchSpace({
        "augment.rho_min": UniformRange(0.1, 0.5),
        "augment.rho_max": UniformRange(2.2, 2.8),
        "augment.noise_weight": UniformRange(0.0, 0.5),
    }),
}


def _set_path(tree: dict, path: str, value):
    keys = path.split(".")
    node = tree
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            raise ValueError(f"unknown config path {path!r}")
        node = node[key]
    if keys[-1] not in node:
        raise ValueError(f"unknown config path {path!r}")
    node[keys[-1]] = value


def sample_config(space: SearchSpace, base: RunConfig,
                  trial_index: int) -> RunConfig:
    """Deterministic trial config: draws depend only on (seed, trial_index).

    Uniform parameters are drawn in sorted name order from one rng stream;
    grid parameters cycle through their values by trial index.
    """
    if trial_index < 0:
        raise ValueError(f"trial_index must be >= 0, got {trial_index}")
    rng = np.random.default_rng([space.search_seed, trial_index])
    tree = base.to_dict()
    for name in sorted(space.params):
        spec = space.params[name]
        if isinstance(spec, UniformRange):
            value = float(rng.uniform(spec.lo, spec.hi))
        else:
            value = spec.values[trial_index % len(spec.values)]
        _set_path(tree, name, value)
    return RunConfig.from_dict(tree)


def make_objective(spec: str) -> Callable[[EvalReport], object]:
    """Objective from its name: 'lexicographic' or 'weighted:<alpha>'.

    Lexicographic compares (COL, FDE) tuples: collision rate first, endpoint
    error as the tiebreak. weighted:<alpha> scores FDE + alpha * COL.
    """
    if spec == "lexicographic":
        return lambda r: (r.col, r.fde)
    if spec.startswith("weighted:"):
        alpha = float(spec.split(":", 1)[1])
        return lambda r: r.fde + alpha * r.col
    raise ValueError(
        f"unknown objective {spec!r}; use 'lexicographic' or 'weighted:<alpha>'")


@dataclass
class TrialRecord:
    """Outcome of one sweep trial; failed trials carry the error instead."""

    trial_index: int
    config: RunConfig
    report: EvalReport | None = None
    objective: object = None
    seconds: float = 0.0
    error: str | None = None

    def to_dict(self) -> dict:
        obj = self.objective
        if isinstance(obj, tuple):
            obj = list(obj)
        return {
            "trial": self.trial_index,
            "config": self.config.to_dict(),
            "fde": None if self.report is None else self.report.fde,
            "col": None if self.report is None else self.report.col,
            "objective": obj,
            "seconds": self.seconds,
            "error": self.error,
        }


def _train_and_score(cfg: RunConfig) -> EvalReport:
    train_samples, val_samples = build_datasets(cfg)
    result = train(train_samples, val_samples, cfg)
    # the snapshot's validation metrics are exactly its epoch's log row
    row = result.log.rows[result.best_epoch]
    return EvalReport(row.val_fde, row.val_col, len(val_samples),
                      cfg.collision_threshold)


def run_sweep(space: SearchSpace, base: RunConfig,
              objective: str = "lexicographic", log_path: str | None = None,
              evaluate_trial: Callable[[RunConfig], EvalReport] | None = None,
              ) -> tuple[TrialRecord, list[TrialRecord]]:
    """Evaluate base (trial 0) plus sampled configs; pick the argmin.

    Individual trial failures are recorded and the sweep continues; only a
    sweep with no successful trial raises. The JSONL log gets one line per
    trial as it finishes.
    """
    if evaluate_trial is None:
        evaluate_trial = _train_and_score
    score = make_objective(objective)

    records: list[TrialRecord] = []
    sink = open(log_path, "w", encoding="utf-8") if log_path else None
    try:
        for i in range(space.n_trials):
            cfg = base if i == 0 else sample_config(space, base, i)
            rec = TrialRecord(i, cfg)
            t0 = time.perf_counter()
            try:
                rec.report = evaluate_trial(cfg)
                rec.objective = score(rec.report)
            except Exception as exc:  # noqa: BLE001 - trial isolation
                rec.error = f"{type(exc).__name__}: {exc}"
            rec.seconds = time.perf_counter() - t0
            records.append(rec)
            if sink is not None:
                sink.write(json.dumps(rec.to_dict()) + "\n")
                sink.flush()
    finally:
        if sink is not None:
            sink.close()

    ok = [r for r in records if r.error is None]
    if not ok:
        raise RuntimeError("all sweep trials failed")
    best = min(ok, key=lambda r: r.objective)
    return best, records
