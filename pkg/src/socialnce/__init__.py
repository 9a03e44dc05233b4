"""Social contrastive learning for trajectory forecasting.

A numpy-only package: deterministic crowd simulation, ring-based negative
augmentation, an InfoNCE-style social loss with exact analytic gradients, a
compact forecaster, metrics, and a hyperparameter sweep harness.
"""

from .augmentation import AugmentConfig, KeyBundle, build_key_bundles, negative_keys, positive_key
from .checkpoint import load_checkpoint, save_checkpoint
from .config import PRESETS, RunConfig, load_config, save_config
from .dataset_io import load_scene, parse_trajectory_file, save_scene, write_trajectory_file
from .forecaster import (
    CombinedResult,
    Encoder,
    ForecastModel,
    ModelGrad,
    TrainLog,
    TrainResult,
    combined_loss,
    decode,
    encode,
    init_model,
    predict,
    task_loss,
    train,
)
from .heads import EMBED_DIM, embed_key, embed_query, key_head, query_head, similarity
from .loss import NceConfig, SnceResult, egocentric_bundles, infonce, snce_loss
from .metrics import EvalReport, collision_rate, evaluate, fde, sample_collides
from .nn import AdamState, GradCheckReport, Mlp, ParamGrad, adam_step, grad_check, mlp_backward, mlp_forward
from .pipeline import build_datasets, run_training, scenes_to_samples
from .scene import AgentState, Sample, Scene, build_scene, neighbors_at, slice_samples
from .simulator import (
    InteractionStats,
    ScenarioConfig,
    SplitSpec,
    generate_dataset,
    generate_scene,
    interaction_stats,
)
from .sweep import SWEEP_PRESETS, GridValues, SearchSpace, TrialRecord, UniformRange, run_sweep, sample_config

__version__ = "0.1.0"
