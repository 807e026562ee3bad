"""Training loop, scheme comparison and evaluation reports."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .datagen import DatasetSpec, EmptyDatasetError, build_dataset, read_trajectory_csv, split_windows
from .loss import SCHEMES, LossReport, batch_abs_loss, delta_training_loss, l1_loss, recover_points
from .metrics import METRICS
from .mlp import (
    DivergenceError,
    ModelParams,
    SgdConfig,
    SgdState,
    Standardizer,
    _forward_cache,
    backward,
    featurize_batch,
    forward,
    init_params,
    sgd_step,
)
from .trajectory import TrainingSample, relative_offsets, residual_chain, step_deltas

__all__ = [
    "ExperimentConfig",
    "TrainResult",
    "Comparison",
    "make_targets",
    "batch_targets",
    "train_one",
    "compare_schemes",
    "evaluate",
    "write_loss_csv",
    "write_metrics_csv",
    "config_hash",
    "load_config",
]

log = logging.getLogger(__name__)

LOSS_CSV_HEADER = ["epoch", "train_delta_loss", "train_abs_loss", "val_abs_loss"]


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    hidden: tuple[int, ...] = (64, 64)
    activation: str = "tanh"
    sgd: SgdConfig = field(default_factory=SgdConfig)
    scheme: str = "residual_chain_eq7"
    eval_metrics: tuple[str, ...] = ("ade", "fde", "dtw", "frechet", "hausdorff", "chamfer")
    output_dir: str = "runs"
    init_seed: int = 0
    # read trajectories from this CSV instead of generating them
    data_csv: str | None = None
    # "l2" (default) or "l1" for the reported absolute-space losses
    report_loss: str = "l2"

    def validate(self):
        self.dataset.validate()
        self.sgd.validate()
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        unknown = set(self.eval_metrics) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metrics {sorted(unknown)}")
        if self.report_loss not in ("l1", "l2"):
            raise ValueError("report_loss must be 'l1' or 'l2'")
        if any(h < 1 for h in self.hidden):
            raise ValueError("hidden layer sizes must be positive")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (2 * (self.dataset.n + 1), *self.hidden, 2 * self.dataset.m)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(
            self,
            dataset=replace(self.dataset, seed=seed),
            sgd=replace(self.sgd, seed=seed),
            init_seed=seed,
        )

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset.to_dict(),
            "model": {"hidden": list(self.hidden), "activation": self.activation},
            "sgd": {f.name: getattr(self.sgd, f.name) for f in fields(SgdConfig)},
            "scheme": self.scheme,
            "eval_metrics": list(self.eval_metrics),
            "output_dir": self.output_dir,
            "init_seed": self.init_seed,
            "data_csv": self.data_csv,
            "report_loss": self.report_loss,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {"dataset", "model", "sgd", "scheme", "eval_metrics", "output_dir",
                 "init_seed", "data_csv", "report_loss"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        kw = {}
        if "dataset" in d:
            kw["dataset"] = DatasetSpec.from_dict(d.pop("dataset"))
        if "sgd" in d:
            kw["sgd"] = SgdConfig(**d.pop("sgd"))
        model = d.pop("model", {})
        if "hidden" in model:
            kw["hidden"] = tuple(model["hidden"])
        if "activation" in model:
            kw["activation"] = model["activation"]
        if "eval_metrics" in d:
            kw["eval_metrics"] = tuple(d.pop("eval_metrics"))
        kw.update(d)
        return cls(**kw)


def load_config(path) -> ExperimentConfig:
    """Read a JSON experiment config; missing keys take their defaults."""
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def config_hash(config: ExperimentConfig) -> str:
    """Hash of everything except the scheme and output location."""
    d = config.to_dict()
    d.pop("scheme")
    d.pop("output_dir")
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


# -- targets ----------------------------------------------------------------


def batch_targets(current, future, scheme: str, predicted=None) -> np.ndarray:
    if scheme == "relative_eq4":
        return relative_offsets(current, future)
    if scheme == "delta_eq5":
        return step_deltas(current, future)
    if scheme == "residual_chain_eq7":
        if predicted is None:
            raise ValueError("residual_chain_eq7 targets need the model's predicted deltas")
        return residual_chain(current, future, predicted)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def make_targets(sample: TrainingSample, scheme: str, predicted=None) -> np.ndarray:
    if predicted is not None:
        predicted = np.asarray(predicted, dtype=float)
        if predicted.shape != (sample.m, 2):
            raise ValueError(f"expected predicted deltas of shape ({sample.m}, 2)")
    return batch_targets(sample.current_xy, sample.future_xy, scheme, predicted)


# -- training ---------------------------------------------------------------


@dataclass
class _Stack:
    features: np.ndarray
    current: np.ndarray
    future: np.ndarray

    @classmethod
    def of(cls, samples, standardizer):
        return cls(
            featurize_batch(samples, standardizer),
            np.stack([s.current_xy for s in samples]),
            np.stack([s.future_xy for s in samples]),
        )

    def __len__(self):
        return len(self.current)


@dataclass
class TrainResult:
    params: ModelParams
    reports: list[LossReport]
    standardizer: Standardizer


def _abs_loss(params, stack: _Stack, scheme, kind) -> float:
    if len(stack) == 0:
        return float("nan")
    pred = forward(params, stack.features)
    if kind == "l1":
        pts = recover_points(stack.current, pred, scheme)
        return float(np.mean([l1_loss(f, p) for f, p in zip(stack.future, pts)]))
    return float(batch_abs_loss(stack.current, stack.future, pred, scheme).mean())


def load_data(config: ExperimentConfig):
    ds = config.dataset
    if config.data_csv:
        trajs = read_trajectory_csv(config.data_csv)
        train, val = split_windows(trajs, ds.n, ds.m, ds.stride, ds.split_fraction, ds.seed)
    else:
        train, val = build_dataset(ds)
    if not train:
        raise EmptyDatasetError("the training split is empty")
    return train, val


def train_one(config: ExperimentConfig, data=None) -> TrainResult:
    """Train one planner under ``config.scheme``; one LossReport per epoch.

    ``data`` may supply a prebuilt ``(train, val)`` pair. Residual-chain
    targets are built from the same forward pass whose loss they feed.
    """
    config.validate()
    train, val = data if data is not None else load_data(config)
    scheme, sgd = config.scheme, config.sgd
    standardizer = Standardizer.fit(featurize_batch(train))
    tr, va = _Stack.of(train, standardizer), _Stack.of(val, standardizer) if val else None
    params = init_params(config.layer_sizes, config.init_seed, config.activation)
    state = SgdState()
    rng = np.random.default_rng(sgd.seed)
    n_pairs = config.dataset.m
    reports = []

    for epoch in range(1, sgd.epochs + 1):
        order = rng.permutation(len(tr))
        total = 0.0
        for b, start in enumerate(range(0, len(tr), sgd.batch_size)):
            idx = order[start : start + sgd.batch_size]
            x = tr.features[idx]
            with np.errstate(over="ignore", invalid="ignore"):
                cache = _forward_cache(params, x)
                pred = cache[1][-1].reshape(len(idx), n_pairs, 2)
                targets = batch_targets(tr.current[idx], tr.future[idx], scheme, pred)
                value, grad = delta_training_loss(targets, pred)
            if not np.isfinite(value):
                raise DivergenceError(f"non-finite loss at epoch {epoch}, batch {b}")
            grads = backward(params, x, grad, cache)
            params, state = sgd_step(params, grads, sgd, state, batch=f"{b} of epoch {epoch}")
            total += value * len(idx)

        with np.errstate(over="ignore", invalid="ignore"):
            report = LossReport(
                epoch=epoch,
                train_delta_loss=total / len(tr),
                train_abs_loss=_abs_loss(params, tr, scheme, config.report_loss),
                val_abs_loss=_abs_loss(params, va, scheme, config.report_loss) if va else float("nan"),
                scheme=scheme,
            )
        if not np.isfinite(report.train_abs_loss):
            raise DivergenceError(f"non-finite training loss after epoch {epoch}")
        reports.append(report)
        log.debug("%s epoch %d: %s", scheme, epoch, report)
    return TrainResult(params, reports, standardizer)


def write_loss_csv(reports, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOSS_CSV_HEADER)
        for r in reports:
            w.writerow([r.epoch, f"{r.train_delta_loss:.9f}", f"{r.train_abs_loss:.9f}",
                        f"{r.val_abs_loss:.9f}"])


# -- comparison -------------------------------------------------------------


@dataclass
class Comparison:
    baseline: str
    candidate: str
    baseline_reports: list[LossReport]
    candidate_reports: list[LossReport]
    config_hash: str

    @property
    def final_baseline(self) -> float:
        return self.baseline_reports[-1].val_abs_loss

    @property
    def final_candidate(self) -> float:
        return self.candidate_reports[-1].val_abs_loss

    @property
    def ratio(self) -> float:
        """Final validation loss of candidate over baseline."""
        return self.final_candidate / self.final_baseline

    @property
    def direction_ok(self) -> bool:
        return self.final_candidate <= self.final_baseline

    def table(self) -> list[tuple[int, float, float]]:
        return [(a.epoch, a.val_abs_loss, b.val_abs_loss)
                for a, b in zip(self.baseline_reports, self.candidate_reports)]

    def summary(self) -> dict:
        return {
            "baseline": self.baseline,
            "candidate": self.candidate,
            "final_val_abs_loss": {"baseline": self.final_baseline,
                                   "candidate": self.final_candidate},
            "ratio": self.ratio,
            "direction_ok": self.direction_ok,
            # relative_eq4 -> residual_chain_eq7 on real driving logs, for reference only
            "reference_ratio": 0.85,
            "config_hash": self.config_hash,
        }


def _strip(config: ExperimentConfig) -> dict:
    d = config.to_dict()
    d.pop("scheme")
    d.pop("output_dir")
    return d


def compare_schemes(config_a: ExperimentConfig, config_b: ExperimentConfig,
                    out_dir=None) -> Comparison:
    """Train ``config_a`` (baseline) and ``config_b`` (candidate) on the same data.

    The configs may differ only in ``scheme``. When ``out_dir`` is given, a
    loss CSV per scheme and ``summary.json`` are written there.
    """
    if _strip(config_a) != _strip(config_b):
        raise ValueError("compared configs must differ only in scheme")
    config_a.validate()
    config_b.validate()
    data = load_data(config_a)
    res_a = train_one(config_a, data)
    res_b = train_one(config_b, data)
    cmp = Comparison(config_a.scheme, config_b.scheme, res_a.reports, res_b.reports,
                     config_hash(config_a))
    if not cmp.direction_ok:
        log.warning(
            "%s did not beat %s at seed %d: final val_abs_loss %.6g vs %.6g",
            cmp.candidate, cmp.baseline, config_a.dataset.seed,
            cmp.final_candidate, cmp.final_baseline,
        )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        names = (config_a.scheme, config_b.scheme)
        if names[0] == names[1]:
            names = (names[0] + "_a", names[1] + "_b")
        write_loss_csv(res_a.reports, out / f"loss_{names[0]}.csv")
        write_loss_csv(res_b.reports, out / f"loss_{names[1]}.csv")
        with open(out / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(cmp.summary(), fh, indent=2)
            fh.write("\n")
    return cmp


# -- evaluation -------------------------------------------------------------


def evaluate(params: ModelParams, samples, metrics, scheme: str,
             standardizer: Standardizer | None = None) -> dict[str, float]:
    """Mean of each selected metric between recovered predictions and truth."""
    unknown = [name for name in metrics if name not in METRICS]
    if unknown:
        raise ValueError(f"unknown metrics {unknown}; available: {sorted(METRICS)}")
    if not samples:
        raise ValueError("no samples to evaluate")
    stack = _Stack.of(samples, standardizer)
    pts = recover_points(stack.current, forward(params, stack.features), scheme)
    return {
        name: float(np.mean([METRICS[name](p, f) for p, f in zip(pts, stack.future)]))
        for name in metrics
    }


def write_metrics_csv(report: dict[str, float], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "value"])
        for name, value in report.items():
            w.writerow([name, f"{value:.9f}"])
