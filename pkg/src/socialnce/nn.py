"""Minimal dense network kernel: affine layers, ReLU, analytic gradients, Adam.

Everything is float64 and explicit. A forward pass records the activation
trace needed for exact backprop; gradients are validated against central
finite differences by grad_check. No autograd, no GPU, by design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Mlp",
    "ParamGrad",
    "AdamState",
    "ForwardTrace",
    "GradCheckReport",
    "mlp_forward",
    "mlp_backward",
    "grad_check",
    "adam_step",
    "relative_error",
]


class Mlp:
    """Fully-connected net: ReLU on hidden layers, identity on the output.

    Weight matrices are (out_dim, in_dim); consecutive layer dimensions must
    chain. Parameters are mutable (the optimizer updates them in place) but
    must stay finite at all times.
    """

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        if not weights or len(weights) != len(biases):
            raise ValueError("need equal, nonzero numbers of weights and biases")
        for k, (w, b) in enumerate(zip(weights, biases)):
            if w.ndim != 2 or b.ndim != 1 or b.shape[0] != w.shape[0]:
                raise ValueError(
                    f"layer {k}: weight {w.shape} and bias {b.shape} disagree")
            if k > 0 and w.shape[1] != weights[k - 1].shape[0]:
                raise ValueError(
                    f"layer {k}: in_dim {w.shape[1]} does not chain with "
                    f"layer {k - 1} out_dim {weights[k - 1].shape[0]}")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ValueError(f"layer {k}: non-finite parameters")
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]

    @classmethod
    def init(cls, sizes: list[int], rng: np.random.Generator) -> "Mlp":
        """He-style uniform fan-in initialization, e.g. init([4, 64, 8], rng)."""
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            limit = np.sqrt(6.0 / fan_in)
            weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def sizes(self) -> list[int]:
        return [self.in_dim] + [w.shape[0] for w in self.weights]

    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights],
                   [b.copy() for b in self.biases])

    def assert_finite(self, name: str = "mlp"):
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise FloatingPointError(f"{name} layer {k}: non-finite parameters")


@dataclass
class ForwardTrace:
    """Activation record of one forward pass, consumed by mlp_backward."""

    inputs: list[np.ndarray]     # input to each layer
    pre_acts: list[np.ndarray]   # z = W a + b per layer
    batched: bool


@dataclass
class ParamGrad:
    """Gradient of a scalar loss with the same shapes as an Mlp."""

    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]

    @classmethod
    def zeros_like(cls, net: Mlp) -> "ParamGrad":
        return cls([np.zeros_like(w) for w in net.weights],
                   [np.zeros_like(b) for b in net.biases])

    def add_(self, other: "ParamGrad") -> "ParamGrad":
        for a, b in zip(self.d_weights, other.d_weights):
            a += b
        for a, b in zip(self.d_biases, other.d_biases):
            a += b
        return self

    def scale_(self, factor: float) -> "ParamGrad":
        for a in self.d_weights:
            a *= factor
        for a in self.d_biases:
            a *= factor
        return self

    def max_abs(self) -> float:
        vals = [np.abs(a).max() for a in self.d_weights + self.d_biases if a.size]
        return float(max(vals)) if vals else 0.0

    def check_congruent(self, net: Mlp):
        if (len(self.d_weights) != net.n_layers
                or any(g.shape != w.shape for g, w in zip(self.d_weights, net.weights))
                or any(g.shape != b.shape for g, b in zip(self.d_biases, net.biases))):
            raise ValueError("gradient shapes do not match the network")


def mlp_forward(net: Mlp, x: np.ndarray) -> tuple[np.ndarray, ForwardTrace]:
    """Forward pass for a single vector (in_dim,) or a batch (n, in_dim).

    Returns the output and the trace needed for exact backprop. Pure: same
    input, bit-identical output.
    """
    x = np.asarray(x, dtype=np.float64)
    batched = x.ndim == 2
    if x.shape[-1] != net.in_dim or x.ndim not in (1, 2):
        raise ValueError(
            f"input shape {x.shape} incompatible with in_dim {net.in_dim}")
    inputs, pre_acts = [], []
    a = x
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(a)
        z = a @ w.T + b
        pre_acts.append(z)
        a = z if k == net.n_layers - 1 else np.maximum(z, 0.0)
    return a, ForwardTrace(inputs, pre_acts, batched)


def mlp_backward(net: Mlp, trace: ForwardTrace,
                 upstream: np.ndarray) -> tuple[ParamGrad, np.ndarray]:
    """Exact gradients of (upstream . output) w.r.t. parameters and input.

    ``trace`` must come from a forward call on the same network; a shape
    mismatch is rejected. Batched traces accumulate over the batch axis.
    """
    if len(trace.inputs) != net.n_layers:
        raise ValueError(
            f"trace has {len(trace.inputs)} layers, network has {net.n_layers}")
    for k, (a, w) in enumerate(zip(trace.inputs, net.weights)):
        if a.shape[-1] != w.shape[1]:
            raise ValueError(
                f"trace layer {k} input dim {a.shape[-1]} does not match "
                f"weight in_dim {w.shape[1]}")
    upstream = np.asarray(upstream, dtype=np.float64)
    expect = trace.pre_acts[-1].shape
    if upstream.shape != expect:
        raise ValueError(f"upstream shape {upstream.shape}, expected {expect}")

    d_weights = [None] * net.n_layers
    d_biases = [None] * net.n_layers
    delta = upstream
    for k in range(net.n_layers - 1, -1, -1):
        if trace.batched:
            d_weights[k] = delta.T @ trace.inputs[k]
            d_biases[k] = delta.sum(axis=0)
        else:
            d_weights[k] = np.outer(delta, trace.inputs[k])
            d_biases[k] = delta.copy()
        delta = delta @ net.weights[k]
        if k > 0:
            delta = delta * (trace.pre_acts[k - 1] > 0)
    return ParamGrad(d_weights, d_biases), delta


def relative_error(analytic: float, numeric: float) -> float:
    """Scale-aware gradient discrepancy.

    The floor in the denominator keeps finite-difference roundoff on
    near-zero gradients from registering as failures.
    """
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-4)


@dataclass
class GradCheckReport:
    """Finite-difference comparison result, per layer and overall."""

    max_rel_error: float
    per_layer: list[float]
    tolerance: float
    n_checked: int

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def grad_check(net: Mlp, x: np.ndarray, loss, loss_grad,
               tolerance: float = 1e-4, h: float = 1e-5) -> GradCheckReport:
    """Compare analytic parameter gradients against central differences.

    ``loss`` maps the network output to a scalar and ``loss_grad`` returns
    its gradient w.r.t. the output. Every parameter of the net is probed, so
    keep the net small.
    """
    y, trace = mlp_forward(net, x)
    analytic, _ = mlp_backward(net, trace, loss_grad(y))

    per_layer = []
    n_checked = 0
    for k in range(net.n_layers):
        worst = 0.0
        for arr, grad in ((net.weights[k], analytic.d_weights[k]),
                          (net.biases[k], analytic.d_biases[k])):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                up = loss(mlp_forward(net, x)[0])
                flat[i] = orig - h
                down = loss(mlp_forward(net, x)[0])
                flat[i] = orig
                numeric = (up - down) / (2 * h)
                worst = max(worst, relative_error(gflat[i], numeric))
                n_checked += 1
        per_layer.append(worst)
    return GradCheckReport(max(per_layer), per_layer, tolerance, n_checked)


@dataclass
class AdamState:
    """First/second moment accumulators and hyperparameters for one Mlp."""

    m_weights: list[np.ndarray]
    v_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_biases: list[np.ndarray]
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_net(cls, net: Mlp, lr: float = 1e-3, beta1: float = 0.9,
                beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(
            m_weights=[np.zeros_like(w) for w in net.weights],
            v_weights=[np.zeros_like(w) for w in net.weights],
            m_biases=[np.zeros_like(b) for b in net.biases],
            v_biases=[np.zeros_like(b) for b in net.biases],
            lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(net: Mlp, grads: ParamGrad, state: AdamState):
    """One bias-corrected Adam update, in place. Rejects non-finite gradients."""
    grads.check_congruent(net)
    for k, g in enumerate(grads.d_weights):
        if not np.isfinite(g).all() or not np.isfinite(grads.d_biases[k]).all():
            raise FloatingPointError(f"non-finite gradient in layer {k}")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for params, grad_list, m_list, v_list in (
            (net.weights, grads.d_weights, state.m_weights, state.v_weights),
            (net.biases, grads.d_biases, state.m_biases, state.v_biases)):
        for p, g, m, v in zip(params, grad_list, m_list, v_list):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
