"""
Random-search sweep over the contrastive hyperparameters
========================================================

The sweep always evaluates the base configuration as trial 0, then draws
candidate configs from the declared search space, so the selected best can
never be worse than the default on the same validation split. Scales here
are shrunk hard so the whole script runs in about a minute; real sweeps
use the CLI (socialnce sweep --space loss).
"""

import dataclasses

from socialnce.config import RunConfig
from socialnce.simulator import ScenarioConfig
from socialnce.sweep import SWEEP_PRESETS, SearchSpace, run_sweep

base = RunConfig(scenario=ScenarioConfig(n_scenes=30), epochs=8, workers=4)

preset = SWEEP_PRESETS["loss"]
print("search space:")
for name, spec in preset.params.items():
    print(f"  {name}: {spec}")

space = SearchSpace(preset.params, n_trials=5, search_seed=1)
best, records = run_sweep(space, base, objective="lexicographic",
                          log_path="trials.jsonl")

print(f"\n{'trial':>5} {'col':>7} {'fde':>7}  config")
for r in records:
    if r.error is not None:
        print(f"{r.trial_index:>5}  failed: {r.error}")
        continue
    nce = r.config.nce
    print(f"{r.trial_index:>5} {r.report.col:>7.4f} {r.report.fde:>7.4f}  "
          f"tau={nce.temperature:.3f} h={nce.horizon} "
          f"lambda={nce.contrastive_weight:.1f}")

print(f"\nbest: trial {best.trial_index} with objective {best.objective}")
print("trial log written to trials.jsonl")
assert best.objective <= records[0].objective
