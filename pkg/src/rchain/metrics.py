"""Distances between predicted and reference point sequences.

All functions take ``(k, 2)`` array-likes and return a float. None of them
is differentiated or used for training.
"""
import numpy as np

__all__ = ["ade", "fde", "dtw", "frechet_discrete", "hausdorff", "chamfer", "METRICS"]


def _seq(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2 or len(a) == 0:
        raise ValueError(f"expected a non-empty (k, 2) point sequence, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("point sequence contains non-finite values")
    return a


def _cost(a, b):
    a, b = _seq(a), _seq(b)
    diff = a[:, None, :] - b[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def ade(a, b):
    """Mean Euclidean distance between index-paired points."""
    a, b = _seq(a), _seq(b)
    if a.shape != b.shape:
        raise ValueError(f"ade needs equal lengths, got {len(a)} and {len(b)}")
    return float(np.hypot(*(a - b).T).mean())


def fde(a, b):
    """Euclidean distance between the final points."""
    a, b = _seq(a), _seq(b)
    return float(np.hypot(*(a[-1] - b[-1])))


def dtw(a, b):
    """Dynamic time warping with steps (1,0), (0,1), (1,1) and Euclidean cost.

    Returns the un-normalised cumulative cost of the best alignment.

    >>> dtw([[0, 0]], [[3, 4]])
    5.0
    """
    cost = _cost(a, b)
    p, q = cost.shape
    acc = np.full((p + 1, q + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            acc[i, j] = min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1]) + cost[i - 1, j - 1]
    return float(acc[p, q])


def frechet_discrete(a, b):
    """Discrete Fréchet distance (Eiter & Mannila coupling recurrence).

    >>> frechet_discrete([[0, 0], [1, 0]], [[0, 1], [1, 1]])
    1.0
    """
    cost = _cost(a, b)
    p, q = cost.shape
    ca = np.empty_like(cost)
    ca[0, 0] = cost[0, 0]
    for i in range(1, p):
        ca[i, 0] = max(ca[i - 1, 0], cost[i, 0])
    for j in range(1, q):
        ca[0, j] = max(ca[0, j - 1], cost[0, j])
    for i in range(1, p):
        for j in range(1, q):
            ca[i, j] = max(min(ca[i - 1, j], ca[i, j - 1], ca[i - 1, j - 1]), cost[i, j])
    return float(ca[-1, -1])


def hausdorff(a, b):
    cost = _cost(a, b)
    return float(max(cost.min(axis=1).max(), cost.min(axis=0).max()))


def chamfer(a, b):
    """Mean nearest-neighbour distance a->b plus mean b->a."""
    cost = _cost(a, b)
    return float(cost.min(axis=1).mean() + cost.min(axis=0).mean())


METRICS = {
    "ade": ade,
    "fde": fde,
    "dtw": dtw,
    "frechet": frechet_discrete,
    "hausdorff": hausdorff,
    "chamfer": chamfer,
}
