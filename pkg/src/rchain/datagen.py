"""Synthetic driving paths and trajectory CSV input/output.

Four kinematic families are available: straight lines, constant-curvature
arcs, sigmoid lane changes, and ``mixed`` (a lane change performed along an
arc). Gaussian position noise is added after the nominal path is built.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields
from typing import Iterable

import numpy as np

from .trajectory import PathPoint, TrainingSample, Trajectory, extract_windows

__all__ = [
    "KINDS",
    "GeneratorSpec",
    "DatasetSpec",
    "EmptyDatasetError",
    "CsvParseError",
    "CsvValidationError",
    "generate_trajectory",
    "generate_trajectories",
    "build_dataset",
    "split_windows",
    "read_trajectory_csv",
    "write_trajectory_csv",
]

KINDS = ("straight", "arc", "lane_change", "mixed")

CSV_HEADER = ["traj_id", "t", "x", "y", "yaw"]


class EmptyDatasetError(ValueError):
    """The dataset spec produced no training windows."""


class CsvParseError(ValueError):
    def __init__(self, msg, line):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class CsvValidationError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "straight"
    num_points: int = 40
    speed: float = 1.0
    curvature: float = 0.0
    lateral_amplitude: float = 0.0
    noise_std: float = 0.0
    seed: int = 0
    heading: float = 0.0
    origin: tuple[float, float] = (0.0, 0.0)
    # ticks over which the lateral sigmoid goes from ~12% to ~88%
    transition_ticks: float = 8.0

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        if self.num_points < 2:
            raise ValueError("num_points must be >= 2")
        if not self.speed > 0:
            raise ValueError("speed must be positive")
        if not self.noise_std >= 0:
            raise ValueError("noise_std must be non-negative")
        if not math.isfinite(self.curvature):
            raise ValueError("curvature must be finite")
        if not self.transition_ticks > 0:
            raise ValueError("transition_ticks must be positive")


def _arc(ticks, speed, curvature, heading):
    """Nominal positions and headings relative to the start point."""
    yaw = heading + curvature * speed * ticks
    if abs(curvature) < 1e-12:
        s = speed * ticks
        return s * math.cos(heading), s * math.sin(heading), yaw
    r = 1.0 / curvature
    x = r * (np.sin(yaw) - math.sin(heading))
    y = -r * (np.cos(yaw) - math.cos(heading))
    return x, y, yaw


def generate_trajectory(spec: GeneratorSpec) -> Trajectory:
    spec.validate()
    ticks = np.arange(spec.num_points, dtype=float)
    curvature = spec.curvature if spec.kind in ("arc", "mixed") else 0.0
    x, y, yaw = _arc(ticks, spec.speed, curvature, spec.heading)
    x = np.broadcast_to(x, ticks.shape).astype(float)
    y = np.broadcast_to(y, ticks.shape).astype(float)
    yaw = np.broadcast_to(yaw, ticks.shape).astype(float)

    if spec.kind in ("lane_change", "mixed"):
        centre = (spec.num_points - 1) / 2.0
        k = 4.0 / spec.transition_ticks
        offset = spec.lateral_amplitude / (1.0 + np.exp(-k * (ticks - centre)))
        # shift along the left normal of the nominal heading
        x = x - offset * np.sin(yaw)
        y = y + offset * np.cos(yaw)

    if spec.noise_std > 0:
        rng = np.random.default_rng(spec.seed)
        noise = rng.normal(0.0, spec.noise_std, size=(spec.num_points, 2))
        x = x + noise[:, 0]
        y = y + noise[:, 1]

    return Trajectory.from_arrays(x + spec.origin[0], y + spec.origin[1], yaw)


@dataclass(frozen=True)
class DatasetSpec:
    """Recipe for a synthetic dataset plus its windowing and split.

    Per-trajectory parameters are drawn uniformly from the ``*_range``
    fields using an RNG stream derived from ``(seed, trajectory index)``.
    """

    trajectories: int = 200
    weights: dict = field(
        default_factory=lambda: {"arc": 0.5, "lane_change": 0.25, "mixed": 0.25}
    )
    n: int = 4
    m: int = 6
    stride: int = 1
    split_fraction: float = 0.2
    seed: int = 0
    num_points: int = 40
    speed_range: tuple[float, float] = (0.5, 1.5)
    curvature_range: tuple[float, float] = (-0.08, 0.08)
    lateral_range: tuple[float, float] = (-3.5, 3.5)
    transition_range: tuple[float, float] = (4.0, 12.0)
    noise_std: float = 0.05
    random_heading: bool = True

    def validate(self):
        if self.trajectories < 1:
            raise ValueError("trajectories must be >= 1")
        if not 0 < self.split_fraction < 1:
            raise ValueError("split_fraction must lie strictly between 0 and 1")
        unknown = set(self.weights) - set(KINDS)
        if unknown:
            raise ValueError(f"unknown trajectory kinds in weights: {sorted(unknown)}")
        w = np.array(list(self.weights.values()), dtype=float)
        if w.size == 0 or np.any(w < 0) or not np.any(w > 0):
            raise ValueError("weights must be non-negative and not all zero")
        if self.n < 0 or self.m < 1 or self.stride < 1:
            raise ValueError("invalid window parameters")

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown dataset fields: {sorted(unknown)}")
        d = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**d)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


def _generator_spec(spec: DatasetSpec, index: int) -> GeneratorSpec:
    rng = np.random.default_rng([spec.seed, index])
    kinds = list(spec.weights)
    w = np.array([spec.weights[k] for k in kinds], dtype=float)
    kind = kinds[rng.choice(len(kinds), p=w / w.sum())]
    u = rng.uniform(size=5)

    def pick(lo_hi, ui):
        lo, hi = lo_hi
        return float(lo + (hi - lo) * ui)

    return GeneratorSpec(
        kind=kind,
        num_points=spec.num_points,
        speed=pick(spec.speed_range, u[0]),
        curvature=pick(spec.curvature_range, u[1]),
        lateral_amplitude=pick(spec.lateral_range, u[2]),
        transition_ticks=pick(spec.transition_range, u[3]),
        heading=float(2 * math.pi * u[4]) if spec.random_heading else 0.0,
        noise_std=spec.noise_std,
        seed=int(rng.integers(2**63)),
    )


def generate_trajectories(spec: DatasetSpec) -> list[Trajectory]:
    spec.validate()
    return [generate_trajectory(_generator_spec(spec, i)) for i in range(spec.trajectories)]


def split_windows(
    trajs: list[Trajectory], n: int, m: int, stride: int, split_fraction: float, seed: int
) -> tuple[list[TrainingSample], list[TrainingSample]]:
    """Window every trajectory and split by trajectory into (train, val)."""
    if not 0 < split_fraction < 1:
        raise ValueError("split_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(trajs))
    n_val = int(round(split_fraction * len(trajs)))
    val_ids = set(order[:n_val].tolist())
    train, val = [], []
    for i, traj in enumerate(trajs):
        (val if i in val_ids else train).extend(extract_windows(traj, n, m, stride))
    if not train and not val:
        raise EmptyDatasetError(
            f"no windows of n={n}, m={m} fit in any of {len(trajs)} trajectories"
        )
    return train, val


def build_dataset(spec: DatasetSpec) -> tuple[list[TrainingSample], list[TrainingSample]]:
    trajs = generate_trajectories(spec)
    return split_windows(trajs, spec.n, spec.m, spec.stride, spec.split_fraction, spec.seed)


def write_trajectory_csv(trajs: Iterable[Trajectory], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for tid, traj in enumerate(trajs):
            for p in traj.points:
                w.writerow([tid, p.t, f"{p.x:.9f}", f"{p.y:.9f}", f"{p.yaw:.9f}"])


def read_trajectory_csv(path) -> list[Trajectory]:
    """Read trajectories grouped by ``traj_id`` (ascending) and sorted by ``t``."""
    rows: dict[int, dict[int, PathPoint]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != CSV_HEADER:
            raise CsvParseError(f"expected header {','.join(CSV_HEADER)}", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise CsvParseError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", lineno)
            try:
                tid, t = int(row[0]), int(row[1])
                x, y, yaw = float(row[2]), float(row[3]), float(row[4])
            except ValueError as exc:
                raise CsvParseError(str(exc), lineno) from None
            if not all(map(math.isfinite, (x, y, yaw))):
                raise CsvParseError("non-finite coordinate", lineno)
            group = rows.setdefault(tid, {})
            if t in group:
                raise CsvParseError(f"duplicate (traj_id, t) = ({tid}, {t})", lineno)
            group[t] = PathPoint(t, x, y, yaw)

    out = []
    for tid in sorted(rows):
        pts = [rows[tid][t] for t in sorted(rows[tid])]
        try:
            out.append(Trajectory(tuple(pts)))
        except ValueError as exc:
            raise CsvValidationError(f"trajectory {tid}: {exc}") from None
    return out
