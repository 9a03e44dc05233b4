"""Command-line entry point: simulate, train, eval, sweep, gradcheck.

Every run-shaped command starts from a preset or a JSON config file and
applies flag overrides on top; the merged config is validated as a whole, so
an invalid combination fails before any work starts. Exit code 0 on success,
nonzero with a diagnostic on standard error otherwise.
"""

from __future__ import annotations

import argparse
import os
import sys

from .checkpoint import load_checkpoint, save_checkpoint
from .config import PRESETS, RunConfig, load_config
from .dataset_io import load_scene, save_scene
from .forecaster import predict, train
from .gradcheck import format_report, run_all
from .metrics import evaluate
from .pipeline import build_datasets, scenes_to_samples
from .simulator import generate_scene, interaction_stats
from .sweep import SWEEP_PRESETS, run_sweep
from . import sweep as _sweep_mod

__all__ = ["main"]


def _base_config(args) -> RunConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    if getattr(args, "preset", None):
        return PRESETS[args.preset]
    return RunConfig()


def _apply_overrides(cfg: RunConfig, overrides: dict[str, object]) -> RunConfig:
    """Set dotted config paths, skipping None values, then re-validate."""
    tree = cfg.to_dict()
    changed = False
    for path, value in overrides.items():
        if value is None:
            continue
        node = tree
        keys = path.split(".")
        for key in keys[:-1]:
            node = node[key]
        node[keys[-1]] = value
        changed = True
    return RunConfig.from_dict(tree) if changed else cfg


def _config_flags(sub: argparse.ArgumentParser):
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--config", metavar="FILE",
                       help="JSON run config (all fields optional)")
    group.add_argument("--preset", choices=sorted(PRESETS),
                       help="named built-in config")


def _cmd_simulate(args) -> int:
    cfg = _apply_overrides(_base_config(args), {
        "scenario.n_scenes": args.n_scenes,
        "scenario.n_agents": args.n_agents,
        "scenario.seed": args.seed,
    })
    os.makedirs(args.out, exist_ok=True)
    scenes = [generate_scene(cfg.scenario, i)
              for i in range(cfg.scenario.n_scenes)]
    for i, scene in enumerate(scenes):
        save_scene(os.path.join(args.out, f"scene-{i:05d}.txt"), scene)
    stats = interaction_stats(scenes)
    print(f"wrote {len(scenes)} scenes to {args.out}")
    for key, value in stats.summary().items():
        print(f"{key} = {value}")
    return 0


def _run_overrides(args) -> dict[str, object]:
    return {
        "seed": getattr(args, "seed", None),
        "epochs": getattr(args, "epochs", None),
        "batch_size": getattr(args, "batch_size", None),
        "learning_rate": getattr(args, "learning_rate", None),
        "nce.contrastive_weight": getattr(args, "weight", None),
        "nce.temperature": getattr(args, "temperature", None),
        "nce.horizon": getattr(args, "horizon", None),
        "scenario.n_scenes": getattr(args, "n_scenes", None),
    }


def _cmd_train(args) -> int:
    cfg = _apply_overrides(_base_config(args), _run_overrides(args))
    train_samples, val_samples = build_datasets(cfg)
    print(f"{len(train_samples)} train / {len(val_samples)} val samples")

    def progress(row):
        if row.epoch % args.log_every == 0 or row.epoch == cfg.epochs - 1:
            print(f"epoch {row.epoch:4d}  task {row.task_loss:.4f}  "
                  f"nce {row.nce_loss:.4f}  val_fde {row.val_fde:.4f}  "
                  f"val_col {row.val_col:.4f}")

    result = train(train_samples, val_samples, cfg, progress)
    save_checkpoint(args.out, result.model, cfg)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write(result.log.to_jsonl())
        print(f"wrote log to {args.log}")
    best = result.log.rows[result.best_epoch]
    print(f"best epoch {result.best_epoch}: val_fde {best.val_fde:.4f}, "
          f"val_col {best.val_col:.4f}")
    print(f"wrote checkpoint to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model, run = load_checkpoint(args.checkpoint)
    obs_len = args.obs_len if args.obs_len is not None else model.obs_len
    pred_len = args.pred_len if args.pred_len is not None else model.pred_len
    if (obs_len, pred_len) != (model.obs_len, model.pred_len):
        raise ValueError(
            f"checkpoint was trained with obs_len {model.obs_len}, "
            f"pred_len {model.pred_len}; requested obs_len {obs_len}, "
            f"pred_len {pred_len}")
    threshold = (args.threshold if args.threshold is not None
                 else run.collision_threshold)
    if args.data:
        scene = load_scene(args.data, run.scenario.frame_interval,
                           swap_xy=args.swap_xy, subsample=args.subsample)
        samples = scenes_to_samples([scene], run)
        if not samples:
            raise ValueError(
                f"{args.data}: no windows of obs {obs_len} + pred {pred_len} "
                f"frames fit the parsed scene ({scene.n_frames} frames)")
    else:
        samples = build_datasets(run)[1]
    report = evaluate(lambda s: predict(model, s), samples, threshold)
    print(report.table())
    return 0


def _cmd_sweep(args) -> int:
    base = _apply_overrides(_base_config(args), _run_overrides(args))
    space = SWEEP_PRESETS[args.space]
    if args.trials is not None or args.seed is not None:
        space = _sweep_mod.SearchSpace(
            space.params,
            args.trials if args.trials is not None else space.n_trials,
            args.seed if args.seed is not None else space.search_seed)
    best, records = run_sweep(space, base, args.objective, args.log)
    failed = sum(1 for r in records if r.error is not None)
    print(f"{len(records)} trials ({failed} failed), best trial "
          f"{best.trial_index}: objective {best.objective}")
    print(f"fde {best.report.fde:.4f}  col {best.report.col:.4f}")
    if args.log:
        print(f"wrote trial log to {args.log}")
    return 0


def _cmd_gradcheck(args) -> int:
    results = run_all(args.seed)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socialnce",
        description="Train and evaluate a trajectory forecaster with a "
                    "social contrastive loss.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic scenes as text files")
    _config_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--n-scenes", type=int)
    p.add_argument("--n-agents", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="train a model, write checkpoint + log")
    _config_flags(p)
    p.add_argument("--seed", type=int, required=True,
                   help="master seed (required: runs must be reproducible)")
    p.add_argument("--out", default="model.ckpt", metavar="FILE")
    p.add_argument("--log", metavar="FILE",
                   help="write per-epoch JSONL training log")
    p.add_argument("--log-every", type=int, default=10)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--weight", type=float,
                   help="contrastive weight (0 disables the social term)")
    p.add_argument("--temperature", type=float)
    p.add_argument("--horizon", type=int)
    p.add_argument("--n-scenes", type=int)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True, metavar="FILE")
    p.add_argument("--data", metavar="FILE",
                   help="trajectory text file (default: config's val split)")
    p.add_argument("--swap-xy", action="store_true",
                   help="input columns are (frame, agent, y, x)")
    p.add_argument("--subsample", type=int, default=1, metavar="K",
                   help="keep every K-th frame of the input")
    p.add_argument("--obs-len", type=int)
    p.add_argument("--pred-len", type=int)
    p.add_argument("--threshold", type=float,
                   help="collision distance in meters")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="hyperparameter search")
    _config_flags(p)
    p.add_argument("--space", choices=sorted(SWEEP_PRESETS), default="loss")
    p.add_argument("--seed", type=int, required=True,
                   help="search seed and base run seed")
    p.add_argument("--trials", type=int)
    p.add_argument("--objective", default="lexicographic",
                   help="'lexicographic' (COL then FDE) or 'weighted:<alpha>' "
                        "(FDE + alpha*COL); default lexicographic")
    p.add_argument("--log", metavar="FILE", help="JSONL trial log")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--n-scenes", type=int)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("gradcheck", help="run all finite-difference suites")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError, FloatingPointError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
