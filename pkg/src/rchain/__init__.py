"""Residual-chain targets for behaviour-cloned path planners, with baseline
coordinate conversions, trajectory losses, path metrics and a small
numpy training harness."""
from .trajectory import (
    PathPoint,
    TrainingSample,
    Trajectory,
    extract_windows,
    recover_absolute,
    residual_chain_targets,
    to_deltas,
    to_relative,
)
from .loss import SCHEMES, LossReport, delta_training_loss, evaluate_absolute, l1_loss, l2_loss
from .harness import ExperimentConfig, compare_schemes, evaluate, make_targets, train_one

__version__ = "0.1.0"
