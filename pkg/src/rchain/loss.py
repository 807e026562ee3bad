"""Trajectory losses and absolute-space evaluation of predicted deltas."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .trajectory import TrainingSample, cumulative_recovery

__all__ = [
    "SCHEMES",
    "LossReport",
    "l1_loss",
    "l2_loss",
    "delta_training_loss",
    "recover_points",
    "evaluate_absolute",
    "batch_abs_loss",
]

SCHEMES = ("relative_eq4", "delta_eq5", "residual_chain_eq7")


@dataclass(frozen=True)
class LossReport:
    epoch: int
    train_delta_loss: float
    train_abs_loss: float
    val_abs_loss: float
    scheme: str

    def as_dict(self):
        return asdict(self)


def _pair(truth, pred):
    truth = np.asarray(truth, dtype=float)
    pred = np.asarray(pred, dtype=float)
    if truth.shape != pred.shape or truth.ndim != 2 or truth.shape[1] != 2:
        raise ValueError(f"shape mismatch: truth {truth.shape} vs pred {pred.shape}")
    if len(truth) < 1:
        raise ValueError("sequences must be non-empty")
    return truth, pred


def l1_loss(truth, pred) -> float:
    """``(1/2m) * sum(|dx| + |dy|)`` over ``m`` paired points."""
    truth, pred = _pair(truth, pred)
    return float(np.abs(truth - pred).sum() / (2 * len(truth)))


def l2_loss(truth, pred) -> float:
    """``(1/2m) * sum(dx^2 + dy^2)`` over ``m`` paired points."""
    truth, pred = _pair(truth, pred)
    return float(((truth - pred) ** 2).sum() / (2 * len(truth)))


def delta_training_loss(targets, predicted):
    """Squared loss in increment space and its gradient w.r.t. ``predicted``.

    Accepts ``(m, 2)`` arrays or ``(batch, m, 2)`` stacks; for a stack the
    value and gradient are averaged over the batch. Targets are constants.
    """
    targets = np.asarray(targets, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if targets.shape != predicted.shape or targets.ndim not in (2, 3) or targets.shape[-1] != 2:
        raise ValueError(f"shape mismatch: targets {targets.shape} vs predicted {predicted.shape}")
    m = targets.shape[-2]
    batch = targets.shape[0] if targets.ndim == 3 else 1
    resid = targets - predicted
    value = float((resid**2).sum() / (2 * m * batch))
    grad = -resid / (m * batch)
    return value, grad


def recover_points(current, predicted, scheme: str):
    """Map model outputs back to absolute points under ``scheme``."""
    if scheme == "relative_eq4":
        return np.asarray(current)[..., None, :] + np.asarray(predicted)
    if scheme in ("delta_eq5", "residual_chain_eq7"):
        return cumulative_recovery(current, predicted)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def evaluate_absolute(sample: TrainingSample, predicted, scheme: str) -> float:
    points = recover_points(sample.current_xy, np.asarray(predicted, dtype=float), scheme)
    return l2_loss(sample.future_xy, points)


def batch_abs_loss(current, future, predicted, scheme: str) -> np.ndarray:
    """Per-sample absolute-space L2 losses for stacked samples."""
    points = recover_points(current, predicted, scheme)
    m = future.shape[-2]
    return ((future - points) ** 2).sum(axis=(-2, -1)) / (2 * m)
