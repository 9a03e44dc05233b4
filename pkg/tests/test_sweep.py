from __future__ import annotations

import json

import numpy as np
import pytest

from socialnce.config import RunConfig
from socialnce.metrics import EvalReport
from socialnce.sweep import (
    GridValues,
    SWEEP_PRESETS,
    SearchSpace,
    UniformRange,
    make_objective,
    run_sweep,
    sample_config,
)


SPACE = SearchSpace({
    "nce.temperature": UniformRange(0.05, 0.5),
    "nce.horizon": GridValues((1, 2, 3)),
}, n_trials=7, search_seed=11)


def scripted(cfg: RunConfig) -> EvalReport:
    # deterministic stand-in for training: score depends only on the config
    fde = abs(cfg.nce.temperature - 0.3)
    col = round(abs(cfg.nce.horizon - 2) * 0.1, 6)
    return EvalReport(fde, col, 10, cfg.collision_threshold)


class TestParamSpecs:
    def test_uniform_range_needs_order(self):
        UniformRange(0.0, 1.0)
        with pytest.raises(ValueError, match="lo < hi"):
            UniformRange(1.0, 1.0)

    def test_grid_needs_distinct_values(self):
        GridValues((1, 2))
        with pytest.raises(ValueError, match="at least one"):
            GridValues(())
        with pytest.raises(ValueError, match="distinct"):
            GridValues((1, 1))

    def test_space_validation(self):
        with pytest.raises(ValueError, match="no parameters"):
            SearchSpace({})
        with pytest.raises(ValueError, match="n_trials"):
            SearchSpace({"nce.horizon": GridValues((1,))}, n_trials=0)


class TestSampleConfig:
    def test_deterministic_per_trial(self):
        base = RunConfig()
        for i in range(4):
            a = sample_config(SPACE, base, i)
            b = sample_config(SPACE, base, i)
            assert a == b

    def test_grid_cycles_by_trial_index(self):
        base = RunConfig()
        horizons = [sample_config(SPACE, base, i).nce.horizon
                    for i in range(6)]
        assert horizons == [1, 2, 3, 1, 2, 3]

    def test_uniform_draws_stay_in_bounds(self):
        base = RunConfig()
        for i in range(50):
            t = sample_config(SPACE, base, i).nce.temperature
            assert 0.05 <= t < 0.5

    def test_untouched_fields_survive(self):
        base = RunConfig(epochs=7)
        cfg = sample_config(SPACE, base, 3)
        assert cfg.epochs == 7
        assert cfg.augment == base.augment

    def test_unknown_path_rejected(self):
        space = SearchSpace({"nce.sharpness": UniformRange(0, 1)})
        with pytest.raises(ValueError, match="unknown config path"):
            sample_config(space, RunConfig(), 1)
        space = SearchSpace({"optimizer.lr": UniformRange(0, 1)})
        with pytest.raises(ValueError, match="unknown config path"):
            sample_config(space, RunConfig(), 1)

    def test_negative_trial_rejected(self):
        with pytest.raises(ValueError, match="trial_index"):
            sample_config(SPACE, RunConfig(), -1)


class TestObjectives:
    def test_lexicographic_orders_col_first(self):
        score = make_objective("lexicographic")
        safe = EvalReport(fde=0.9, col=0.1, n_samples=5, collision_threshold=0.2)
        risky = EvalReport(fde=0.2, col=0.3, n_samples=5, collision_threshold=0.2)
        assert score(safe) < score(risky)

    def test_weighted_combines(self):
        score = make_objective("weighted:2.5")
        r = EvalReport(fde=0.4, col=0.2, n_samples=5, collision_threshold=0.2)
        assert score(r) == pytest.approx(0.4 + 2.5 * 0.2)

    def test_unknown_objective(self):
        with pytest.raises(ValueError, match="unknown objective"):
            make_objective("hopeful")


class TestRunSweep:
    def test_trial_zero_is_base_config(self):
        base = RunConfig(epochs=13)
        best, records = run_sweep(SPACE, base, evaluate_trial=scripted)
        assert records[0].config == base
        assert len(records) == SPACE.n_trials

    def test_identical_seed_identical_records(self):
        base = RunConfig()
        _, a = run_sweep(SPACE, base, evaluate_trial=scripted)
        _, b = run_sweep(SPACE, base, evaluate_trial=scripted)
        assert [r.config for r in a] == [r.config for r in b]
        assert [r.objective for r in a] == [r.objective for r in b]

    def test_best_is_argmin(self):
        best, records = run_sweep(SPACE, RunConfig(), evaluate_trial=scripted)
        objectives = [r.objective for r in records if r.error is None]
        assert best.objective == min(objectives)
        # never worse than the base config, which is always trial 0
        assert best.objective <= records[0].objective

    def test_failed_trial_recorded_and_skipped(self):
        def flaky(cfg: RunConfig) -> EvalReport:
            if cfg.nce.horizon == 2:
                raise FloatingPointError("diverged")
            return scripted(cfg)

        best, records = run_sweep(SPACE, RunConfig(), evaluate_trial=flaky)
        failed = [r for r in records if r.error is not None]
        assert failed and all("FloatingPointError: diverged" == r.error
                              for r in failed)
        assert all(r.report is None for r in failed)
        assert best.error is None and best.config.nce.horizon != 2

    def test_all_failing_raises(self):
        def broken(cfg):
            raise RuntimeError("no")
        with pytest.raises(RuntimeError, match="all sweep trials failed"):
            run_sweep(SPACE, RunConfig(), evaluate_trial=broken)

    def test_jsonl_log(self, tmp_path):
        def flaky(cfg: RunConfig) -> EvalReport:
            if cfg.nce.horizon == 3:
                raise ValueError("bad horizon")
            return scripted(cfg)

        path = tmp_path / "trials.jsonl"
        _, records = run_sweep(SPACE, RunConfig(), log_path=str(path),
                               evaluate_trial=flaky)
        lines = path.read_text().strip().split("\n")
        assert len(lines) == len(records) == SPACE.n_trials
        for line, rec in zip(lines, records):
            row = json.loads(line)
            assert row["trial"] == rec.trial_index
            if rec.error is None:
                assert row["fde"] == pytest.approx(rec.report.fde)
                assert row["error"] is None
            else:
                assert row["fde"] is None
                assert "bad horizon" in row["error"]
            # logged config reloads to the config that was run
            assert RunConfig.from_dict(row["config"]) == rec.config

    def test_objective_tuple_serializes_as_list(self):
        best, records = run_sweep(SPACE, RunConfig(), evaluate_trial=scripted)
        row = records[0].to_dict()
        assert isinstance(row["objective"], list) and len(row["objective"]) == 2


class TestPresets:
    def test_preset_spaces_cover_published_ranges(self):
        loss = SWEEP_PRESETS["loss"]
        assert set(loss.params) == {"nce.temperature", "nce.contrastive_weight",
                                    "nce.horizon"}
        aug = SWEEP_PRESETS["augmentation"]
        assert set(aug.params) == {"augment.rho_min", "augment.rho_max",
                                   "augment.noise_weight"}

    def test_preset_configs_validate(self):
        base = RunConfig()
        for space in SWEEP_PRESETS.values():
            for i in range(1, 6):
                cfg = sample_config(space, base, i)
                assert isinstance(cfg, RunConfig)
