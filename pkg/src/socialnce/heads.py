"""Query and key embedding heads for the contrastive objective.

The query head projects the encoder's hidden vector to an 8-dimensional
embedding; the key head embeds a candidate future location together with its
normalized horizon offset. Similarity between the two is a plain dot product,
deliberately not cosine: magnitude carries signal.
"""

from __future__ import annotations

import numpy as np

from .nn import Mlp, mlp_forward
from .scene import AgentState

__all__ = [
    "EMBED_DIM",
    "query_head",
    "key_head",
    "embed_query",
    "embed_key",
    "key_features",
    "similarity",
]

EMBED_DIM = 8
KEY_IN_DIM = 3  # x_rel, y_rel, delta_t / horizon


def query_head(in_dim: int, hidden: int, rng: np.random.Generator) -> Mlp:
    """2-layer projection head, hidden -> ReLU -> 8."""
    return Mlp.init([in_dim, hidden, EMBED_DIM], rng)


def key_head(hidden: int, rng: np.random.Generator) -> Mlp:
    """2-layer location/offset encoder, (x, y, t) -> ReLU -> 8."""
    return Mlp.init([KEY_IN_DIM, hidden, EMBED_DIM], rng)


def _check_head(head: Mlp, in_dim: int | None = None):
    if head.out_dim != EMBED_DIM:
        raise ValueError(f"head must embed to {EMBED_DIM} dims, got {head.out_dim}")
    if in_dim is not None and head.in_dim != in_dim:
        raise ValueError(f"head expects in_dim {head.in_dim}, got input of {in_dim}")


def embed_query(head: Mlp, h: np.ndarray) -> np.ndarray:
    """q = head(h). No normalization is applied."""
    h = np.asarray(h, dtype=np.float64)
    _check_head(head, h.shape[-1])
    return mlp_forward(head, h)[0]


def key_features(location: AgentState | np.ndarray, delta_t: int,
                 horizon: int) -> np.ndarray:
    """Input row for the key head: (x_rel, y_rel, delta_t / horizon).

    Locations must already be expressed in the primary agent's egocentric
    frame (origin at its last observed position); the head never sees world
    coordinates.
    """
    if not 1 <= delta_t <= horizon:
        raise ValueError(f"delta_t {delta_t} outside [1, {horizon}]")
    xy = location.as_array() if isinstance(location, AgentState) else np.asarray(location)
    return np.array([xy[0], xy[1], delta_t / horizon], dtype=np.float64)


def embed_key(head: Mlp, location: AgentState | np.ndarray, delta_t: int,
              horizon: int) -> np.ndarray:
    """k = head(x_rel, y_rel, delta_t / horizon) for one egocentric location."""
    _check_head(head, KEY_IN_DIM)
    return mlp_forward(head, key_features(location, delta_t, horizon))[0]


def similarity(q: np.ndarray, k: np.ndarray) -> float:
    """Dot product of the embeddings. Explicitly not cosine similarity."""
    q = np.asarray(q, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    if q.shape != k.shape:
        raise ValueError(f"shape mismatch: {q.shape} vs {k.shape}")
    return float(q @ k)
