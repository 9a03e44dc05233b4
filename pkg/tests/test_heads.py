from __future__ import annotations

import numpy as np
import pytest

from socialnce.heads import (
    EMBED_DIM,
    KEY_IN_DIM,
    embed_key,
    embed_query,
    key_features,
    key_head,
    query_head,
    similarity,
)
from socialnce.nn import grad_check
from socialnce.scene import AgentState


@pytest.fixture
def heads():
    rng = np.random.default_rng(0)
    return query_head(16, 16, rng), key_head(16, rng)


class TestFactories:
    def test_shapes(self, heads):
        psi, phi = heads
        assert psi.sizes == [16, 16, EMBED_DIM]
        assert phi.sizes == [KEY_IN_DIM, 16, EMBED_DIM]

    def test_embed_query_rejects_wrong_dim(self, heads):
        psi, _ = heads
        with pytest.raises(ValueError):
            embed_query(psi, np.zeros(8))


class TestKeyFeatures:
    def test_accepts_state_and_array(self):
        a = key_features(AgentState(1.5, -2.0), delta_t=2, horizon=4)
        b = key_features(np.array([1.5, -2.0]), delta_t=2, horizon=4)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_allclose(a, [1.5, -2.0, 0.5])

    def test_normalized_time_channel(self):
        f = key_features(np.zeros(2), delta_t=3, horizon=3)
        assert f[2] == 1.0


class TestSimilarity:
    def test_is_plain_dot_product(self):
        rng = np.random.default_rng(1)
        q = rng.normal(size=EMBED_DIM)
        k = rng.normal(size=EMBED_DIM)
        assert similarity(q, k) == pytest.approx(float(q @ k), abs=1e-15)

    def test_bilinear_no_hidden_normalization(self):
        # similarity(a*q, k) == a * similarity(q, k) rules out cosine scaling
        rng = np.random.default_rng(2)
        for _ in range(20):
            q = rng.normal(size=EMBED_DIM)
            k = rng.normal(size=EMBED_DIM)
            a = float(rng.uniform(0.1, 10.0))
            assert similarity(a * q, k) == pytest.approx(
                a * similarity(q, k), rel=1e-12)


class TestEmbeddings:
    def test_key_injective_in_delta_t(self, heads):
        # same location, different horizon offsets -> distinct keys
        _, phi = heads
        loc = AgentState(0.7, -0.3)
        keys = [embed_key(phi, loc, dt, horizon=4) for dt in (1, 2, 3, 4)]
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                assert np.linalg.norm(keys[i] - keys[j]) > 1e-9

    def test_gradients_through_similarity(self, heads):
        # d/dparams of similarity(psi(h), k_fixed) via the kernel checker
        psi, phi = heads
        rng = np.random.default_rng(3)
        h = rng.normal(size=16)
        k_fixed = rng.normal(size=EMBED_DIM)

        report = grad_check(psi, h, lambda y: float(y @ k_fixed),
                            lambda y: k_fixed, tolerance=1e-5)
        assert report.passed, f"query head: {report.max_rel_error:.2e}"

        feat = key_features(AgentState(0.5, 1.0), 2, 4)
        q_fixed = rng.normal(size=EMBED_DIM)
        report = grad_check(phi, feat, lambda y: float(y @ q_fixed),
                            lambda y: q_fixed, tolerance=1e-5)
        assert report.passed, f"key head: {report.max_rel_error:.2e}"
