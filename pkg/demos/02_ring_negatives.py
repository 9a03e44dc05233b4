"""
Negative sampling: rings of discomfort around every neighbor
============================================================

The contrastive loss needs locations to push the forecast embedding away
from. For each neighbor present at a future offset, eight points are placed
on a ring around its ground-truth position (random radius, a little noise);
the primary agent's own future position, lightly jittered, is the positive.
"""

import numpy as np

from socialnce.augmentation import AugmentConfig, build_key_bundles
from socialnce.scene import Sample
from socialnce.simulator import ScenarioConfig, generate_scene

scene = generate_scene(ScenarioConfig(seed=3), 0)
sample = Sample(scene, primary_agent=0, obs_len=8, pred_len=12, start_frame=0)

cfg = AugmentConfig()
print(f"ring radius ~ U[{cfg.rho_min}, {cfg.rho_max}] m, "
      f"{cfg.n_directions} directions, noise sd {cfg.noise_weight}")

rng = np.random.default_rng(0)
bundles = build_key_bundles(sample, horizon=4, cfg=cfg, rng=rng)

for b in bundles:
    t = sample.last_obs_frame + b.horizon_offset
    print(f"\ndelta-t {b.horizon_offset} (frame {t}): "
          f"{len(b.negatives)} negatives from "
          f"{len(set(b.source_neighbor.tolist()))} neighbors")
    print(f"  positive (true future + noise): {np.round(b.positive, 3)}")
    # distance of each negative to its source neighbor: all within the
    # configured radius band plus the jitter
    for agent in sorted(set(b.source_neighbor.tolist()))[:2]:
        ring = b.negatives[b.source_neighbor == agent]
        center = scene.xy[t, agent]
        d = np.linalg.norm(ring - center, axis=1)
        print(f"  neighbor {agent}: ring radii "
              f"{d.min():.3f} .. {d.max():.3f} m")

# with noise off and a fixed radius the geometry is exact: a regular
# octagon is recovered around every neighbor
exact = AugmentConfig(rho_min=0.5, rho_max=0.5, noise_weight=0.0)
bundle = build_key_bundles(sample, 1, exact, np.random.default_rng(1))[0]
center = scene.xy[sample.last_obs_frame + 1, int(bundle.source_neighbor[0])]
angles = np.arctan2(*(bundle.negatives[:8] - center).T[::-1])
print("\nnoiseless octagon angles (degrees):",
      np.round(np.degrees(np.sort(angles)), 1))
