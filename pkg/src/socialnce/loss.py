"""The social contrastive objective: InfoNCE over synthesized future keys.

Logits are dot(q, k) / tau over one positive and many negative keys, and the
loss is the negative log softmax probability of the positive, computed with a
max-shifted log-sum-exp. Naive exponentiation is forbidden here: at tau = 0.1
logits reach the hundreds.

Two denominator modes exist because the pooled form of the objective is
ambiguous about horizon offsets. "per_horizon" (default) averages an
independent InfoNCE term per offset; "joint" pools the negatives of every
offset into each term's denominator.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .augmentation import KeyBundle
from .heads import EMBED_DIM
from .nn import Mlp, ParamGrad, mlp_backward, mlp_forward

__all__ = [
    "NceConfig",
    "NceTerm",
    "SnceResult",
    "infonce",
    "snce_loss",
    "egocentric_bundles",
]

DENOMINATOR_MODES = ("per_horizon", "joint")


@dataclass(frozen=True)
class NceConfig:
    """Loss hyperparameters: temperature, horizon, and contrastive weight.

    ``contrastive_weight`` is not used inside the loss itself; the combined
    training objective applies it when mixing with the task loss.
    """

    temperature: float = 0.1
    horizon: int = 4
    contrastive_weight: float = 2.0
    denominator_mode: str = "per_horizon"

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.contrastive_weight < 0:
            raise ValueError(
                f"contrastive_weight must be >= 0, got {self.contrastive_weight}")
        if self.denominator_mode not in DENOMINATOR_MODES:
            raise ValueError(
                f"denominator_mode must be one of {DENOMINATOR_MODES}, "
                f"got {self.denominator_mode!r}")


@dataclass
class NceTerm:
    """One InfoNCE evaluation with exact gradients.

    loss == -log(positive_prob) by construction; d_negatives rows are
    parallel to the negatives passed in.
    """

    loss: float
    d_query: np.ndarray
    d_positive: np.ndarray
    d_negatives: np.ndarray
    positive_prob: float


def _stable_softmax(logits: np.ndarray) -> tuple[np.ndarray, float]:
    """Softmax probabilities and -log p[0] via max-shifted log-sum-exp."""
    shift = logits.max()
    z = np.exp(logits - shift)
    total = z.sum()
    probs = z / total
    loss = float(np.log(total) + shift - logits[0])
    return probs, loss


def infonce(q: np.ndarray, positive: np.ndarray, negatives,
            tau: float) -> NceTerm:
    """InfoNCE over raw embedding vectors.

    The positive key sits in the denominator too, so the loss is -log p with
    p strictly inside (0, 1] and exactly 0 only when there are no negatives.
    """
    if not tau > 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    q = np.asarray(q, dtype=np.float64)
    positive = np.asarray(positive, dtype=np.float64)
    negatives = np.asarray(negatives, dtype=np.float64).reshape(-1, q.shape[0])
    keys = np.concatenate([positive[None, :], negatives], axis=0)
    logits = keys @ q / tau
    if not np.isfinite(logits).all():
        bad = int(np.flatnonzero(~np.isfinite(logits))[0])
        name = "positive" if bad == 0 else f"negative {bad - 1}"
        raise FloatingPointError(f"non-finite logit for {name} key")

    probs, loss = _stable_softmax(logits)
    d_logits = probs.copy()
    d_logits[0] -= 1.0
    d_query = d_logits @ keys / tau
    d_keys = np.outer(d_logits, q) / tau
    return NceTerm(loss, d_query, d_keys[0], d_keys[1:], float(probs[0]))


@dataclass
class SnceResult:
    """Social contrastive loss for one sample with gradients.

    ``d_query`` feeds the chain rule back through the query head into the
    encoder; ``key_grad`` holds the key head's parameter gradients.
    per_offset maps delta_t -> (raw loss term before averaging, positive
    softmax probability) for the offsets that contributed.
    """

    loss: float
    d_query: np.ndarray
    key_grad: ParamGrad
    per_offset: dict[int, tuple[float, float]]


def egocentric_bundles(bundles: list[KeyBundle], anchor: np.ndarray) -> list[KeyBundle]:
    """Translate bundle keys into the frame with ``anchor`` at the origin."""
    anchor = np.asarray(anchor, dtype=np.float64)
    return [replace(b, positive=b.positive - anchor,
                    negatives=b.negatives - anchor) for b in bundles]


def snce_loss(query: np.ndarray, bundles: list[KeyBundle], key_head: Mlp,
              cfg: NceConfig) -> SnceResult:
    """Contrastive loss over the horizon with gradients into q and the key head.

    Bundles must cover delta_t = 1..horizon and carry egocentric locations
    (see egocentric_bundles). Bundles without negatives are skipped; if all
    are empty the loss is 0 with zero gradients.
    """
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (EMBED_DIM,):
        raise ValueError(f"query must have shape ({EMBED_DIM},), got {query.shape}")
    offsets = sorted(b.horizon_offset for b in bundles)
    if offsets != list(range(1, cfg.horizon + 1)):
        raise ValueError(
            f"bundles cover offsets {offsets}, expected 1..{cfg.horizon}")

    active = [b for b in sorted(bundles, key=lambda b: b.horizon_offset)
              if b.n_negatives]
    if not active:
        return SnceResult(0.0, np.zeros(EMBED_DIM),
                          ParamGrad.zeros_like(key_head), {})

    # One feature row per key, positives first within each bundle, so the
    # whole horizon goes through the key head in a single batched pass.
    blocks, slices = [], []
    start = 0
    for b in active:
        points = np.concatenate([b.positive[None, :], b.negatives])
        block = np.empty((points.shape[0], 3))
        block[:, :2] = points
        block[:, 2] = b.horizon_offset / cfg.horizon
        blocks.append(block)
        slices.append((start, start + block.shape[0]))
        start += block.shape[0]
    features = np.concatenate(blocks)
    keys, trace = mlp_forward(key_head, features)
    logits = keys @ query / cfg.temperature
    if not np.isfinite(logits).all():
        bad = int(np.flatnonzero(~np.isfinite(logits))[0])
        for b, (lo, hi) in zip(active, slices):
            if lo <= bad < hi:
                what = "positive" if bad == lo else f"negative {bad - lo - 1}"
                raise FloatingPointError(
                    f"non-finite logit for {what} key at offset {b.horizon_offset}")

    d_logits = np.zeros_like(logits)
    per_offset: dict[int, tuple[float, float]] = {}
    total = 0.0
    n_terms = len(active)

    if cfg.denominator_mode == "per_horizon":
        for b, (lo, hi) in zip(active, slices):
            probs, term = _stable_softmax(logits[lo:hi])
            total += term
            d_logits[lo:hi] += probs
            d_logits[lo] -= 1.0
            per_offset[b.horizon_offset] = (term, float(probs[0]))
    else:
        # Joint mode: every term keeps its own positive in the numerator but
        # pools the negatives of all offsets into the denominator.
        neg_idx = np.concatenate(
            [np.arange(lo + 1, hi) for lo, hi in slices])
        for b, (lo, hi) in zip(active, slices):
            idx = np.concatenate(([lo], neg_idx))
            probs, term = _stable_softmax(logits[idx])
            total += term
            np.add.at(d_logits, idx, probs)
            d_logits[lo] -= 1.0
            per_offset[b.horizon_offset] = (term, float(probs[0]))

    total /= n_terms
    d_logits /= n_terms
    d_query = d_logits @ keys / cfg.temperature
    d_keys = np.outer(d_logits, query) / cfg.temperature
    key_grad, _ = mlp_backward(key_head, trace, d_keys)
    return SnceResult(total, d_query, key_grad, per_offset)
