"""A small fully connected planner network written directly in numpy.

Layers compute ``h = act(W @ x + b)``; the last layer is linear and its
``2m`` outputs are read as ``m`` (dx, dy) pairs. Weight matrices are stored
``(fan_out, fan_in)``. Everything runs in float64.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .trajectory import TrainingSample

__all__ = [
    "ModelParams",
    "Grads",
    "SgdConfig",
    "SgdState",
    "Standardizer",
    "DivergenceError",
    "featurize",
    "featurize_batch",
    "init_params",
    "forward",
    "backward",
    "sgd_step",
    "save_checkpoint",
    "load_checkpoint",
]

ACTIVATIONS = {
    "tanh": (np.tanh, lambda z, a: 1.0 - a * a),
    "relu": (lambda z: np.maximum(z, 0.0), lambda z, a: (z > 0).astype(z.dtype)),
    "identity": (lambda z: z, lambda z, a: np.ones_like(z)),
}


class DivergenceError(RuntimeError):
    pass


@dataclass
class ModelParams:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "tanh"

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ValueError("number of weight/bias arrays does not match layer_sizes")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            shape = (self.layer_sizes[k + 1], self.layer_sizes[k])
            if w.shape != shape or b.shape != (shape[0],):
                raise ValueError(f"layer {k}: expected W{shape}, b({shape[0]},)")

    @property
    def output_pairs(self) -> int:
        return self.layer_sizes[-1] // 2

    def arrays(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.layer_sizes,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.activation,
        )


@dataclass
class Grads:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def arrays(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]


@dataclass(frozen=True)
class SgdConfig:
    learning_rate: float = 1e-3
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 200
    seed: int = 0

    def validate(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass
class SgdState:
    velocity: list[np.ndarray] = field(default_factory=list)


@dataclass
class Standardizer:
    """Per-feature affine normalisation frozen from training data."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "Standardizer":
        mean = features.mean(axis=0)
        std = features.std(axis=0)
        # the current point is always the origin, so some columns are constant
        std = np.where(std > 1e-12, std, 1.0)
        return cls(mean, std)

    @classmethod
    def identity(cls, dim: int) -> "Standardizer":
        return cls(np.zeros(dim), np.ones(dim))

    def __call__(self, features):
        return (features - self.mean) / self.std


def featurize(sample: TrainingSample, standardizer: Standardizer | None = None) -> np.ndarray:
    """Past points relative to the current one, flattened to ``2(n+1)`` values."""
    feat = (sample.past_xy - sample.current_xy).reshape(-1)
    return feat if standardizer is None else standardizer(feat)


def featurize_batch(samples, standardizer: Standardizer | None = None) -> np.ndarray:
    feats = np.stack([featurize(s) for s in samples])
    return feats if standardizer is None else standardizer(feats)


def init_params(layer_sizes, seed: int, activation: str = "tanh") -> ModelParams:
    """Xavier-uniform weights, zero biases."""
    layer_sizes = tuple(int(s) for s in layer_sizes)
    if len(layer_sizes) < 2 or min(layer_sizes) < 1:
        raise ValueError(f"invalid layer sizes {layer_sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return ModelParams(layer_sizes, weights, biases, activation)


def _as_batch(params: ModelParams, features) -> tuple[np.ndarray, bool]:
    x = np.asarray(features, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.ndim != 2 or x.shape[1] != params.layer_sizes[0]:
        raise ValueError(
            f"expected features of length {params.layer_sizes[0]}, got shape {np.shape(features)}"
        )
    return x, single


def _forward_cache(params: ModelParams, x: np.ndarray):
    act, _ = ACTIVATIONS[params.activation]
    pre, post = [], [x]
    h = x
    last = len(params.weights) - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w.T + b
        h = z if k == last else act(z)
        pre.append(z)
        post.append(h)
    return pre, post


def forward(params: ModelParams, features) -> np.ndarray:
    """Predicted deltas, shape ``(m, 2)`` or ``(batch, m, 2)``."""
    x, single = _as_batch(params, features)
    out = _forward_cache(params, x)[1][-1].reshape(len(x), -1, 2)
    return out[0] if single else out


def backward(params: ModelParams, features, grad_output, cache=None) -> Grads:
    """Parameter gradients given dLoss/dOutput (same shape as ``forward``'s result).

    For a batch, gradients are summed over the batch rows; scale
    ``grad_output`` to get a mean. ``cache`` may carry ``_forward_cache``
    output to skip recomputing the forward pass.
    """
    x, _ = _as_batch(params, features)
    g = np.asarray(grad_output, dtype=float).reshape(len(x), -1)
    if g.shape[1] != params.layer_sizes[-1]:
        raise ValueError(
            f"output gradient has {g.shape[1]} entries per row, expected {params.layer_sizes[-1]}"
        )
    pre, post = cache if cache is not None else _forward_cache(params, x)
    _, dact = ACTIVATIONS[params.activation]
    n_layers = len(params.weights)
    gw, gb = [None] * n_layers, [None] * n_layers
    delta = g
    for k in range(n_layers - 1, -1, -1):
        gw[k] = delta.T @ post[k]
        gb[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ params.weights[k]) * dact(pre[k - 1], post[k])
    return Grads(gw, gb)


def sgd_step(
    params: ModelParams, grads: Grads, config: SgdConfig, state: SgdState | None = None, batch=None
) -> tuple[ModelParams, SgdState]:
    """Classical momentum: ``v <- mu*v - lr*g``; ``theta <- theta + v``.

    Returns new params and state; the inputs are not modified.
    """
    garrs = grads.arrays()
    for g in garrs:
        if not np.all(np.isfinite(g)):
            where = "" if batch is None else f" in batch {batch}"
            raise DivergenceError(f"non-finite gradient{where}")
    old_v = state.velocity if state is not None and state.velocity else [np.zeros_like(g) for g in garrs]
    velocity = [config.momentum * v - config.learning_rate * g for v, g in zip(old_v, garrs)]
    new = [p + v for p, v in zip(params.arrays(), velocity)]
    k = len(params.weights)
    return ModelParams(params.layer_sizes, new[:k], new[k:], params.activation), SgdState(velocity)


def save_checkpoint(path, params: ModelParams, standardizer: Standardizer, meta: dict | None = None):
    """Write params, feature statistics and string metadata to an ``.npz`` file."""
    arrays = {
        "layer_sizes": np.array(params.layer_sizes, dtype=np.int64),
        "activation": np.array(params.activation),
        "feature_mean": standardizer.mean,
        "feature_std": standardizer.std,
    }
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        arrays[f"W{k}"] = w
        arrays[f"b{k}"] = b
    for key, value in (meta or {}).items():
        arrays[f"meta_{key}"] = np.array(str(value))
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> tuple[ModelParams, Standardizer, dict]:
    with np.load(path, allow_pickle=False) as z:
        sizes = tuple(int(s) for s in z["layer_sizes"])
        k = len(sizes) - 1
        params = ModelParams(
            sizes,
            [z[f"W{i}"].copy() for i in range(k)],
            [z[f"b{i}"].copy() for i in range(k)],
            str(z["activation"]),
        )
        std = Standardizer(z["feature_mean"].copy(), z["feature_std"].copy())
        meta = {key[5:]: str(z[key]) for key in z.files if key.startswith("meta_")}
    return params, std, meta
