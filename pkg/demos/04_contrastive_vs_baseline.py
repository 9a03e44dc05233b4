"""
Does the social term reduce collisions? A small head-to-head
============================================================

Two identical trainings, one with the contrastive weight at 0 (pure MSE)
and one with it on. Both see the same scenes, the same shuffles, and the
same per-sample noise streams, so the only difference is the social term.
Scales are cut down to keep this script short; the full-size comparison
(500 scenes, 5 seeds) lives in the acceptance test suite.
"""

import dataclasses
import time

from socialnce.config import RunConfig
from socialnce.forecaster import train
from socialnce.pipeline import build_datasets
from socialnce.simulator import ScenarioConfig

run = RunConfig(scenario=ScenarioConfig(n_scenes=150), epochs=60, workers=4)
train_samples, val_samples = build_datasets(run)
print(f"{len(train_samples)} train / {len(val_samples)} val samples")

outcome = {}
for weight in (0.0, run.nce.contrastive_weight):
    cfg = dataclasses.replace(
        run, nce=dataclasses.replace(run.nce, contrastive_weight=weight))
    t0 = time.perf_counter()
    result = train(train_samples, val_samples, cfg)
    best = result.log.rows[result.best_epoch]
    outcome[weight] = best
    print(f"lambda={weight:>4}: best epoch {result.best_epoch:>3}  "
          f"val FDE {best.val_fde:.4f}  val COL {best.val_col:.4f}  "
          f"({time.perf_counter() - t0:.0f}s)")

base, social = outcome[0.0], outcome[run.nce.contrastive_weight]
col_change = (base.val_col - social.val_col) / base.val_col * 100
fde_change = (social.val_fde - base.val_fde) / base.val_fde * 100
print(f"\ncollision rate change: {col_change:+.1f}% "
      f"(negative means the social term hurt)")
print(f"endpoint error change: {fde_change:+.1f}% "
      f"(positive means accuracy was traded away)")
print("\nsingle-seed, small-scale numbers are noisy; the acceptance test "
      "averages five seeds at full scale.")
