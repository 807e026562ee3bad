"""Path points, training windows and the coordinate conversions used as
model targets.

Three target schemes are supported for a window with current point
``(x0, y0)`` and future points ``(x1, y1) ... (xm, ym)``:

* relative: ``x_t - x0`` (offset from the current point),
* delta: ``x_t - x_{t-1}`` (teacher-forced increments),
* residual chain: ``x_t - (x0 + sum_{i<t} dx_i')`` where ``dx_i'`` are the
  increments the model actually predicted.

The array-level helpers (``relative_offsets``, ``step_deltas``,
``residual_chain``, ``cumulative_recovery``) never coerce dtype, so they
also work on object arrays of symbols.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "PathPoint",
    "Trajectory",
    "TrainingSample",
    "extract_windows",
    "to_relative",
    "to_deltas",
    "residual_chain_targets",
    "recover_absolute",
    "relative_offsets",
    "step_deltas",
    "residual_chain",
    "cumulative_recovery",
]


class PathPoint(NamedTuple):
    """One pose sample taken at integer tick ``t``."""

    t: int
    x: float
    y: float
    yaw: float = 0.0


def _check_point(p: PathPoint) -> None:
    if not (math.isfinite(p.x) and math.isfinite(p.y) and math.isfinite(p.yaw)):
        raise ValueError(f"non-finite coordinate in point at t={p.t}")


def _check_consecutive(points: Sequence[PathPoint], what: str) -> None:
    for prev, cur in zip(points, points[1:]):
        if cur.t != prev.t + 1:
            raise ValueError(
                f"{what} timestamps must be consecutive, got {prev.t} then {cur.t}"
            )


@dataclass(frozen=True)
class Trajectory:
    """An ordered run of equally spaced path points."""

    points: tuple[PathPoint, ...]

    def __post_init__(self):
        pts = tuple(PathPoint(*p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("a trajectory needs at least 2 points")
        for p in pts:
            _check_point(p)
        _check_consecutive(pts, "trajectory")

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_arrays(cls, x, y, yaw=None, t0: int = 0) -> "Trajectory":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        yaw = np.zeros_like(x) if yaw is None else np.asarray(yaw, dtype=float)
        return cls(
            tuple(
                PathPoint(t0 + i, float(a), float(b), float(c))
                for i, (a, b, c) in enumerate(zip(x, y, yaw))
            )
        )

    @property
    def xy(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.points], dtype=float)


@dataclass(frozen=True)
class TrainingSample:
    """History window (``past``, current point last) and ground-truth future."""

    past: tuple[PathPoint, ...]
    future: tuple[PathPoint, ...]

    def __post_init__(self):
        past = tuple(PathPoint(*p) for p in self.past)
        future = tuple(PathPoint(*p) for p in self.future)
        object.__setattr__(self, "past", past)
        object.__setattr__(self, "future", future)
        if not past or not future:
            raise ValueError("past and future must both be non-empty")
        _check_consecutive(past + future, "sample")

    @property
    def n(self) -> int:
        return len(self.past) - 1

    @property
    def m(self) -> int:
        return len(self.future)

    @property
    def current(self) -> PathPoint:
        return self.past[-1]

    @cached_property
    def current_xy(self) -> np.ndarray:
        return np.array([self.current.x, self.current.y], dtype=float)

    @cached_property
    def past_xy(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.past], dtype=float)

    @cached_property
    def future_xy(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.future], dtype=float)

    def translated(self, dx: float, dy: float) -> "TrainingSample":
        return TrainingSample(
            tuple(p._replace(x=p.x + dx, y=p.y + dy) for p in self.past),
            tuple(p._replace(x=p.x + dx, y=p.y + dy) for p in self.future),
        )


def extract_windows(
    traj: Trajectory, n: int, m: int, stride: int = 1
) -> list[TrainingSample]:
    """Cut ``traj`` into overlapping (n past + current, m future) windows.

    Current indices run from ``n`` to ``len(traj) - m - 1`` in steps of
    ``stride``. A trajectory too short for a single window yields ``[]``;
    out-of-range window parameters raise ``ValueError``.
    """
    if n < 0 or m < 1 or stride < 1:
        raise ValueError(f"invalid window parameters n={n}, m={m}, stride={stride}")
    pts = traj.points
    return [
        TrainingSample(pts[i - n : i + 1], pts[i + 1 : i + 1 + m])
        for i in range(n, len(pts) - m, stride)
    ]


# -- array-level conversions ------------------------------------------------
# current: (..., 2); future, predicted: (..., m, 2)


def relative_offsets(current, future):
    current = np.asarray(current)
    return np.asarray(future) - current[..., None, :]


def step_deltas(current, future):
    current = np.asarray(current)
    future = np.asarray(future)
    prev = np.concatenate([current[..., None, :], future[..., :-1, :]], axis=-2)
    return future - prev


def cumulative_recovery(current, deltas):
    """Absolute points ``x0 + sum_{i<=t} d_i`` for every step ``t``."""
    current = np.asarray(current)
    return current[..., None, :] + np.cumsum(np.asarray(deltas), axis=-2)


def residual_chain(current, future, predicted):
    """Targets ``x_t - (x0 + sum_{i<t} d_i')`` over the predicted increments.

    The sum excludes step ``t`` itself; the first target is ``x1 - x0``.
    """
    current = np.asarray(current)
    future = np.asarray(future)
    predicted = np.asarray(predicted)
    if predicted.shape[-2:] != future.shape[-2:]:
        raise ValueError(
            f"predicted shape {predicted.shape} does not match future {future.shape}"
        )
    recovered = cumulative_recovery(current, predicted[..., :-1, :])
    anchors = np.concatenate([current[..., None, :], recovered], axis=-2)
    return future - anchors


# -- sample-level API -------------------------------------------------------


def to_relative(sample: TrainingSample) -> np.ndarray:
    """Future points relative to the current point, shape ``(m, 2)``."""
    return relative_offsets(sample.current_xy, sample.future_xy)


def to_deltas(sample: TrainingSample) -> np.ndarray:
    """Increment of each future point over its predecessor, shape ``(m, 2)``."""
    return step_deltas(sample.current_xy, sample.future_xy)


def residual_chain_targets(sample: TrainingSample, predicted) -> np.ndarray:
    """Increment targets re-anchored on the model's own predicted chain.

    The returned array is a plain value; callers treat it as a constant.
    """
    predicted = np.asarray(predicted, dtype=float)
    if predicted.shape != (sample.m, 2):
        raise ValueError(
            f"expected predicted deltas of shape ({sample.m}, 2), got {predicted.shape}"
        )
    return residual_chain(sample.current_xy, sample.future_xy, predicted)


def recover_absolute(current: PathPoint, deltas) -> np.ndarray:
    deltas = np.asarray(deltas, dtype=float)
    if not np.all(np.isfinite(deltas)):
        raise ValueError("deltas must be finite")
    return cumulative_recovery(np.array([current.x, current.y]), deltas)
