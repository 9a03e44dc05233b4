"""Compact trajectory forecaster trained with task loss plus the contrastive term.

The encoder has a sequential sub-module (the primary agent's egocentric
observation, flattened) and an interaction sub-module (one feature row per
neighbor, mean-pooled), fused into a hidden vector h. The decoder maps h
directly to per-step offsets from the anchor; no autoregression, so the
gradient graph stays small enough for cheap finite-difference checks.

Both loss branches are always evaluated so that runs differing only in the
contrastive weight consume identical rng streams; the weight scales the
contrastive gradients, which makes them exactly zero at weight 0.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .augmentation import AugmentConfig, build_key_bundles
from .config import RunConfig
from .heads import EMBED_DIM, KEY_IN_DIM
from .loss import NceConfig, egocentric_bundles, snce_loss
from .metrics import evaluate
from .nn import AdamState, ForwardTrace, Mlp, ParamGrad, adam_step, mlp_backward, mlp_forward
from .scene import Sample

__all__ = [
    "Encoder",
    "ForecastModel",
    "ModelGrad",
    "CombinedResult",
    "EpochRow",
    "TrainLog",
    "TrainResult",
    "init_model",
    "encode",
    "decode",
    "predict",
    "task_loss",
    "combined_loss",
    "train",
]

NEIGHBOR_FEATURES = 4  # relative position (2) + relative displacement (2)


@dataclass
class Encoder:
    """Sequential + interaction sub-modules and their fusion."""

    f_s: Mlp      # flattened egocentric observation -> hidden
    f_i: Mlp      # per-neighbor features -> hidden, mean-pooled
    fusion: Mlp   # concat(f_s out, pooled f_i out) -> h

    def __post_init__(self):
        if self.fusion.in_dim != self.f_s.out_dim + self.f_i.out_dim:
            raise ValueError(
                f"fusion in_dim {self.fusion.in_dim} must equal f_s out "
                f"{self.f_s.out_dim} + f_i out {self.f_i.out_dim}")

    def copy(self) -> "Encoder":
        return Encoder(self.f_s.copy(), self.f_i.copy(), self.fusion.copy())


@dataclass
class ForecastModel:
    """Encoder, decoder, and the two contrastive heads, plus window sizes."""

    encoder: Encoder
    decoder: Mlp
    query: Mlp
    key: Mlp
    obs_len: int
    pred_len: int

    def __post_init__(self):
        if self.encoder.f_s.in_dim != 2 * self.obs_len:
            raise ValueError(
                f"f_s expects {self.encoder.f_s.in_dim} inputs, "
                f"obs_len {self.obs_len} provides {2 * self.obs_len}")
        if self.decoder.out_dim != 2 * self.pred_len:
            raise ValueError(
                f"decoder emits {self.decoder.out_dim} values, "
                f"pred_len {self.pred_len} needs {2 * self.pred_len}")
        if self.query.in_dim != self.encoder.fusion.out_dim:
            raise ValueError(
                f"query head in_dim {self.query.in_dim} must match hidden "
                f"dimension {self.encoder.fusion.out_dim}")
        if self.query.out_dim != EMBED_DIM or self.key.out_dim != EMBED_DIM:
            raise ValueError(f"heads must embed to {EMBED_DIM} dimensions")
        if self.key.in_dim != KEY_IN_DIM:
            raise ValueError(
                f"key head expects {KEY_IN_DIM} inputs, got {self.key.in_dim}")

    def nets(self) -> list[tuple[str, Mlp]]:
        """Named parameter groups in a fixed, checkpoint-stable order."""
        return [("f_s", self.encoder.f_s), ("f_i", self.encoder.f_i),
                ("fusion", self.encoder.fusion), ("decoder", self.decoder),
                ("query", self.query), ("key", self.key)]

    def copy(self) -> "ForecastModel":
        return ForecastModel(self.encoder.copy(), self.decoder.copy(),
                             self.query.copy(), self.key.copy(),
                             self.obs_len, self.pred_len)

    def assert_finite(self):
        for name, net in self.nets():
            net.assert_finite(name)


@dataclass
class ModelGrad:
    """Gradients for every parameter group of a ForecastModel."""

    f_s: ParamGrad
    f_i: ParamGrad
    fusion: ParamGrad
    decoder: ParamGrad
    query: ParamGrad
    key: ParamGrad

    @classmethod
    def zeros(cls, model: ForecastModel) -> "ModelGrad":
        return cls(**{name: ParamGrad.zeros_like(net)
                      for name, net in model.nets()})

    def by_name(self, name: str) -> ParamGrad:
        return getattr(self, name)

    def add_(self, other: "ModelGrad") -> "ModelGrad":
        for name in ("f_s", "f_i", "fusion", "decoder", "query", "key"):
            getattr(self, name).add_(getattr(other, name))
        return self

    def scale_(self, factor: float) -> "ModelGrad":
        for name in ("f_s", "f_i", "fusion", "decoder", "query", "key"):
            getattr(self, name).scale_(factor)
        return self


def init_model(run: RunConfig) -> ForecastModel:
    """Seeded parameter initialization; layout depends only on the config."""
    rng = np.random.default_rng([run.seed, 0])
    h = run.hidden
    f_s = Mlp.init([2 * run.obs_len, h, h], rng)
    f_i = Mlp.init([NEIGHBOR_FEATURES, h, h], rng)
    fusion = Mlp.init([2 * h, h, h], rng)
    decoder = Mlp.init([h, h, 2 * run.pred_len], rng)
    query = Mlp.init([h, h, EMBED_DIM], rng)
    key = Mlp.init([KEY_IN_DIM, h, EMBED_DIM], rng)
    return ForecastModel(Encoder(f_s, f_i, fusion), decoder, query, key,
                         run.obs_len, run.pred_len)


def _check_window(model: ForecastModel, sample: Sample):
    if sample.obs_len != model.obs_len or sample.pred_len != model.pred_len:
        raise ValueError(
            f"model window (obs {model.obs_len}, pred {model.pred_len}) does "
            f"not match sample window (obs {sample.obs_len}, "
            f"pred {sample.pred_len})")


def neighbor_features(sample: Sample) -> np.ndarray:
    """(n, 4) egocentric rows for neighbors present at the last observed frame.

    Columns: position relative to the anchor, then the one-frame change of
    that relative position (zero for neighbors that just appeared).
    """
    t = sample.last_obs_frame
    scene = sample.scene
    anchor = sample.anchor()
    rows = []
    for agent in np.flatnonzero(scene.present[t]):
        if agent == sample.primary_agent:
            continue
        rel = scene.xy[t, agent] - anchor
        if t > sample.start_frame and scene.present[t - 1, agent]:
            prev_rel = scene.xy[t - 1, agent] - scene.xy[t - 1, sample.primary_agent]
            disp = rel - prev_rel
        else:
            disp = np.zeros(2)
        rows.append(np.concatenate([rel, disp]))
    if not rows:
        return np.empty((0, NEIGHBOR_FEATURES))
    return np.stack(rows)


@dataclass
class EncoderTrace:
    """Forward record of encode(), consumed by _encoder_backward."""

    f_s: ForwardTrace
    f_i: ForwardTrace | None
    fusion: ForwardTrace
    n_neighbors: int


def _encode_traced(sample: Sample, encoder: Encoder) -> tuple[np.ndarray, EncoderTrace]:
    anchor = sample.anchor()
    obs = (sample.observed() - anchor).reshape(-1)
    s_out, s_trace = mlp_forward(encoder.f_s, obs)
    feats = neighbor_features(sample)
    if feats.shape[0]:
        i_rows, i_trace = mlp_forward(encoder.f_i, feats)
        pooled = i_rows.mean(axis=0)
    else:
        i_trace = None
        pooled = np.zeros(encoder.f_i.out_dim)
    h, fu_trace = mlp_forward(encoder.fusion, np.concatenate([s_out, pooled]))
    return h, EncoderTrace(s_trace, i_trace, fu_trace, feats.shape[0])


def encode(sample: Sample, encoder: Encoder) -> np.ndarray:
    """Hidden vector h for a sample; egocentric, so translation invariant."""
    return _encode_traced(sample, encoder)[0]


def _encoder_backward(encoder: Encoder, trace: EncoderTrace,
                      dh: np.ndarray) -> tuple[ParamGrad, ParamGrad, ParamGrad]:
    fu_grad, d_cat = mlp_backward(encoder.fusion, trace.fusion, dh)
    d_s = d_cat[:encoder.f_s.out_dim]
    d_pool = d_cat[encoder.f_s.out_dim:]
    s_grad, _ = mlp_backward(encoder.f_s, trace.f_s, d_s)
    if trace.n_neighbors:
        # mean-pool: each neighbor row receives 1/n of the pooled gradient
        upstream = np.tile(d_pool / trace.n_neighbors, (trace.n_neighbors, 1))
        i_grad, _ = mlp_backward(encoder.f_i, trace.f_i, upstream)
    else:
        i_grad = ParamGrad.zeros_like(encoder.f_i)
    return s_grad, i_grad, fu_grad


def decode(h: np.ndarray, decoder: Mlp, anchor: np.ndarray) -> np.ndarray:
    """World-frame forecast: anchor + direct per-step offsets, (pred_len, 2)."""
    offsets = mlp_forward(decoder, h)[0].reshape(-1, 2)
    return np.asarray(anchor, dtype=np.float64) + offsets


def predict(model: ForecastModel, sample: Sample) -> np.ndarray:
    """Forecast the primary agent's future positions in world coordinates."""
    _check_window(model, sample)
    h = encode(sample, model.encoder)
    return decode(h, model.decoder, sample.anchor())


def task_loss(predicted: np.ndarray, actual: np.ndarray) -> float:
    """Mean squared Euclidean error over the prediction steps."""
    predicted = np.asarray(predicted, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if predicted.shape != actual.shape or predicted.ndim != 2 or predicted.shape[1] != 2:
        raise ValueError(
            f"trajectory shapes disagree: {predicted.shape} vs {actual.shape}")
    return float(np.mean(np.sum((predicted - actual) ** 2, axis=1)))


@dataclass
class CombinedResult:
    """Weighted objective with gradients for every parameter group.

    ``nce`` is the unweighted contrastive term; combined equals
    task_weight * task + contrastive_weight * nce.
    """

    combined: float
    task: float
    nce: float
    grads: ModelGrad
    per_offset: dict[int, tuple[float, float]]


def combined_loss(sample: Sample, model: ForecastModel, nce_cfg: NceConfig,
                  aug_cfg: AugmentConfig, rng: np.random.Generator,
                  task_weight: float = 1.0) -> CombinedResult:
    """Task MSE plus weighted contrastive loss, with exact gradients.

    The encoder receives gradient from both branches, the decoder only from
    the task branch, the heads only from the contrastive branch. The
    contrastive branch runs even at weight 0 (its gradients are then scaled
    to exactly zero) so rng consumption does not depend on the weight.
    """
    _check_window(model, sample)
    anchor = sample.anchor()
    h, enc_trace = _encode_traced(sample, model.encoder)

    offsets_flat, dec_trace = mlp_forward(model.decoder, h)
    offsets = offsets_flat.reshape(-1, 2)
    target = sample.future() - anchor
    diff = offsets - target
    task = float(np.mean(np.sum(diff ** 2, axis=1)))
    d_offsets = (2.0 / model.pred_len) * diff
    dec_grad, dh_task = mlp_backward(model.decoder, dec_trace,
                                     d_offsets.reshape(-1))

    q, q_trace = mlp_forward(model.query, h)
    bundles = egocentric_bundles(
        build_key_bundles(sample, nce_cfg.horizon, aug_cfg, rng), anchor)
    nce = snce_loss(q, bundles, model.key, nce_cfg)
    q_grad, dh_nce = mlp_backward(model.query, q_trace, nce.d_query)

    lam = nce_cfg.contrastive_weight
    dh = task_weight * dh_task + lam * dh_nce
    s_grad, i_grad, fu_grad = _encoder_backward(model.encoder, enc_trace, dh)
    grads = ModelGrad(s_grad, i_grad, fu_grad, dec_grad.scale_(task_weight),
                      q_grad.scale_(lam), nce.key_grad.scale_(lam))
    combined = task_weight * task + lam * nce.loss
    return CombinedResult(combined, task, nce.loss, grads, nce.per_offset)


@dataclass
class EpochRow:
    """One training epoch: loss means over samples plus validation metrics."""

    epoch: int
    task_loss: float
    nce_loss: float
    combined_loss: float
    val_fde: float
    val_col: float
    seconds: float

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "task_loss": self.task_loss,
            "nce_loss": self.nce_loss,
            "combined_loss": self.combined_loss,
            "val_fde": self.val_fde,
            "val_col": self.val_col,
            "seconds": self.seconds,
        }


@dataclass
class TrainLog:
    """Per-epoch training history."""

    rows: list[EpochRow]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r.to_dict()) + "\n" for r in self.rows)

    def signature(self) -> str:
        """Reproducible content: everything except wall-clock seconds."""
        return "".join(
            json.dumps({k: v for k, v in r.to_dict().items() if k != "seconds"})
            + "\n"
            for r in self.rows)


@dataclass
class TrainResult:
    """Best-validation snapshot, final parameters, and the full log."""

    model: ForecastModel
    final: ForecastModel
    best_epoch: int
    log: TrainLog


FDE_SLACK = 1.1  # selection considers epochs whose val FDE is within 10% of the best


def _update_front(front: list, col: float, fde: float, epoch: int,
                  model: ForecastModel):
    """Keep the Pareto front of (val_col, val_fde) with model snapshots.

    The final selection needs the full run's FDE floor, which is unknown
    mid-run; every non-dominated epoch is a potential winner, and no
    dominated epoch can be (the dominator is always eligible with it).
    """
    for c, f, _, _ in front:
        if c <= col and f <= fde:
            return
    front[:] = [(c, f, e, m) for c, f, e, m in front
                if not (col <= c and fde <= f)]
    front.append((col, fde, epoch, model.copy()))


def _batch_losses(samples: list[Sample], indices, model: ForecastModel,
                  run: RunConfig, epoch: int) -> list[CombinedResult]:
    def one(idx: int) -> CombinedResult:
        rng = np.random.default_rng([run.seed, 2, epoch, int(idx)])
        return combined_loss(samples[idx], model, run.nce, run.augment, rng)

    if run.workers > 1:
        with ThreadPoolExecutor(max_workers=run.workers) as pool:
            return list(pool.map(one, indices))
    return [one(idx) for idx in indices]


def train(train_samples: list[Sample], val_samples: list[Sample],
          run: RunConfig, progress=None) -> TrainResult:
    """Adam training with per-epoch validation and best-COL selection.

    Every rng stream derives from run.seed, so identical configs give
    bit-identical parameters and logs (wall-clock seconds aside). Per-sample
    noise streams are keyed by dataset index and epoch, independent of the
    shuffle and of the contrastive weight.

    The returned snapshot has the lowest validation COL among epochs whose
    FDE is within 10% of the run's best FDE; a barely-trained model scores a
    deceptively low COL by predicting far from everyone, so COL is only
    comparable at comparable endpoint accuracy. Ties break toward lower FDE,
    then the earlier epoch.
    """
    if not train_samples or not val_samples:
        raise ValueError("train and validation sample lists must be non-empty")
    for s in train_samples + val_samples:
        _check_window_run(run, s)

    model = init_model(run)
    adam = {name: AdamState.for_net(net, run.learning_rate, run.beta1,
                                    run.beta2, run.adam_eps)
            for name, net in model.nets()}

    rows: list[EpochRow] = []
    front: list[tuple[float, float, int, ForecastModel]] = []
    n = len(train_samples)

    for epoch in range(run.epochs):
        t0 = time.perf_counter()
        order = np.random.default_rng([run.seed, 1, epoch]).permutation(n)
        task_sum = nce_sum = comb_sum = 0.0
        for lo in range(0, n, run.batch_size):
            batch = order[lo:lo + run.batch_size]
            results = _batch_losses(train_samples, batch, model, run, epoch)
            grads = ModelGrad.zeros(model)
            for idx, res in zip(batch, results):
                if not np.isfinite(res.combined):
                    raise FloatingPointError(
                        f"non-finite loss at epoch {epoch}, sample {int(idx)}")
                grads.add_(res.grads)
                task_sum += res.task
                nce_sum += res.nce
                comb_sum += res.combined
            grads.scale_(1.0 / len(batch))
            for name, net in model.nets():
                adam_step(net, grads.by_name(name), adam[name])
                net.assert_finite(name)

        report = evaluate(lambda s: predict(model, s), val_samples,
                          run.collision_threshold)
        row = EpochRow(epoch, task_sum / n, nce_sum / n, comb_sum / n,
                       report.fde, report.col, time.perf_counter() - t0)
        rows.append(row)
        if progress is not None:
            progress(row)
        _update_front(front, report.col, report.fde, epoch, model)

    floor = min(r.val_fde for r in rows)
    eligible = [entry for entry in front if entry[1] <= FDE_SLACK * floor]
    col_b, fde_b, best_epoch, best_model = min(
        eligible, key=lambda entry: (entry[0], entry[1], entry[2]))
    return TrainResult(best_model, model, best_epoch, TrainLog(rows))


def _check_window_run(run: RunConfig, sample: Sample):
    if sample.obs_len != run.obs_len or sample.pred_len != run.pred_len:
        raise ValueError(
            f"config window (obs {run.obs_len}, pred {run.pred_len}) does not "
            f"match sample window (obs {sample.obs_len}, pred {sample.pred_len})")
