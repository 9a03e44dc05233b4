"""Finite-difference validation of every analytic gradient in the package.

Three suites: the bare network kernel, the contrastive loss (query vector
and key-head parameters), and the full combined objective probing every
parameter of a tiny model. Probes use central differences with h = 1e-5;
fixtures are small enough that checking every coordinate is cheaper than
arguing about which ones to sample.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .augmentation import AugmentConfig, build_key_bundles
from .config import RunConfig
from .forecaster import combined_loss, init_model
from .heads import EMBED_DIM, key_head
from .loss import NceConfig, egocentric_bundles, snce_loss
from .nn import Mlp, grad_check, relative_error
from .scene import Sample, Scene

__all__ = ["SuiteResult", "check_kernel", "check_snce", "check_combined",
           "run_all", "format_report"]

# Central differences quantize at ulp(loss)/(2h); on near-zero gradient
# entries the floored relative error can reach a few 1e-5, so the loss-level
# suites use 1e-4. The kernel suite composes cleanly and stays at 1e-5.
FD_STEP = 1e-5


@dataclass
class SuiteResult:
    """Worst-case analytic-vs-numeric discrepancy for one suite."""

    name: str
    max_rel_error: float
    n_checked: int
    tolerance: float
    seconds: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def _fd_param_sweep(params: list[np.ndarray], grads: list[np.ndarray],
                    loss_fn) -> tuple[float, int]:
    """Central differences over every entry of every given array."""
    worst, checked = 0.0, 0
    for arr, grad in zip(params, grads):
        flat, gflat = arr.reshape(-1), grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + FD_STEP
            up = loss_fn()
            flat[i] = orig - FD_STEP
            down = loss_fn()
            flat[i] = orig
            numeric = (up - down) / (2 * FD_STEP)
            worst = max(worst, relative_error(gflat[i], numeric))
            checked += 1
    return worst, checked


def _net_params(net: Mlp) -> list[np.ndarray]:
    return list(net.weights) + list(net.biases)


def check_kernel(seed: int = 0, tolerance: float = 1e-5) -> SuiteResult:
    """Plain networks under a quadratic loss, several shapes."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 11])
    worst, checked = 0.0, 0
    for sizes in ([3, 5, 2], [4, 8, 8], [2, 6, 6, 3]):
        net = Mlp.init(sizes, rng)
        x = rng.normal(size=sizes[0])
        c = rng.normal(size=sizes[-1])
        report = grad_check(net, x,
                            loss=lambda y, c=c: 0.5 * float(np.sum((y - c) ** 2)),
                            loss_grad=lambda y, c=c: y - c,
                            tolerance=tolerance, h=FD_STEP)
        worst = max(worst, report.max_rel_error)
        checked += report.n_checked
    return SuiteResult("kernel", worst, checked, tolerance,
                       time.perf_counter() - t0)


def _tiny_sample(rng: np.random.Generator, n_agents: int = 3,
                 obs_len: int = 3, pred_len: int = 5) -> Sample:
    frames = obs_len + pred_len
    xy = rng.uniform(-3.0, 3.0, size=(frames, n_agents, 2))
    present = np.ones((frames, n_agents), dtype=bool)
    return Sample(Scene(xy, present, 0.4), 0, obs_len, pred_len, 0)


def check_snce(seed: int = 0, tolerance: float = 1e-4) -> SuiteResult:
    """Query vector and key-head parameters through the contrastive loss."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 22])
    sample = _tiny_sample(rng)
    aug = AugmentConfig(noise_weight=0.1, n_directions=4)
    head = key_head(6, rng)
    query = rng.normal(scale=0.5, size=EMBED_DIM)
    anchor = sample.anchor()

    worst, checked = 0.0, 0
    for mode in ("per_horizon", "joint"):
        cfg = NceConfig(temperature=0.2, horizon=3, denominator_mode=mode)
        bundles = egocentric_bundles(
            build_key_bundles(sample, cfg.horizon, aug,
                              np.random.default_rng([seed, 23])), anchor)
        result = snce_loss(query, bundles, head, cfg)

        def loss_fn():
            return snce_loss(query, bundles, head, cfg).loss

        for i in range(EMBED_DIM):
            orig = query[i]
            query[i] = orig + FD_STEP
            up = loss_fn()
            query[i] = orig - FD_STEP
            down = loss_fn()
            query[i] = orig
            worst = max(worst, relative_error(result.d_query[i],
                                              (up - down) / (2 * FD_STEP)))
            checked += 1

        w, c = _fd_param_sweep(
            _net_params(head),
            result.key_grad.d_weights + result.key_grad.d_biases, loss_fn)
        worst = max(worst, w)
        checked += c
    return SuiteResult("snce", worst, checked, tolerance,
                       time.perf_counter() - t0)


def check_combined(seed: int = 0, tolerance: float = 1e-4) -> SuiteResult:
    """Every parameter of a tiny model through the combined objective."""
    t0 = time.perf_counter()
    run = RunConfig(obs_len=3, pred_len=5, hidden=6,
                    nce=NceConfig(temperature=0.2, horizon=3,
                                  contrastive_weight=2.0),
                    augment=AugmentConfig(noise_weight=0.1, n_directions=4),
                    seed=seed)
    model = init_model(run)
    sample = _tiny_sample(np.random.default_rng([seed, 33]))

    def evaluate():
        rng = np.random.default_rng([seed, 34])
        return combined_loss(sample, model, run.nce, run.augment, rng)

    result = evaluate()
    worst, checked = 0.0, 0
    for name, net in model.nets():
        grad = result.grads.by_name(name)
        w, c = _fd_param_sweep(_net_params(net),
                               grad.d_weights + grad.d_biases,
                               lambda: evaluate().combined)
        worst = max(worst, w)
        checked += c
    return SuiteResult("combined", worst, checked, tolerance,
                       time.perf_counter() - t0)


def run_all(seed: int = 0) -> list[SuiteResult]:
    return [check_kernel(seed), check_snce(seed), check_combined(seed)]


def format_report(results: list[SuiteResult]) -> str:
    lines = [f"{'suite':<10} {'max rel err':>12} {'checked':>8} "
             f"{'tol':>8} {'time':>7}  status"]
    for r in results:
        lines.append(
            f"{r.name:<10} {r.max_rel_error:>12.3e} {r.n_checked:>8} "
            f"{r.tolerance:>8.0e} {r.seconds:>6.2f}s  "
            f"{'pass' if r.passed else 'FAIL'}")
    return "\n".join(lines)
