"""Reductions from a grid of per-cell anomaly scores to one stream score.

Two aggregation functions are provided.  The plain mean dilutes localized
anomalies across every cell, including the zero-score ones; the non-zero
mean averages only the cells that currently report anything, so its scale
does not depend on how much of the frame is quiet.  The trade-off is noise:
with noisy input there is almost always some positive cell, which keeps the
non-zero mean elevated.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import ConfigError, ContractError

__all__ = [
    "AggregationKind",
    "aggregate",
    "aggregate_mean",
    "aggregate_nonzero_mean",
    "moving_average",
]


class AggregationKind(Enum):
    MEAN = "mean"
    NONZERO_MEAN = "nonzero_mean"


def aggregate_mean(scores) -> float:
    """Arithmetic mean over all cells, zeros included."""
    arr = np.asarray(scores, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ContractError("cannot aggregate an empty score collection")
    return float(np.mean(arr))


def aggregate_nonzero_mean(scores) -> float:
    """Mean over the strictly positive cells; 0 when no cell is positive."""
    arr = np.asarray(scores, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ContractError("cannot aggregate an empty score collection")
    positive = arr[arr > 0.0]
    if positive.size == 0:
        return 0.0
    return float(np.mean(positive))


def aggregate(kind: AggregationKind, scores) -> float:
    if kind is AggregationKind.MEAN:
        return aggregate_mean(scores)
    if kind is AggregationKind.NONZERO_MEAN:
        return aggregate_nonzero_mean(scores)
    raise ConfigError(f"unknown aggregation kind: {kind!r}")


def moving_average(series, window: int) -> np.ndarray:
    """Trailing moving average with prefix warm-up.

    ``out[i]`` is the mean of the last ``min(i + 1, window)`` values ending
    at ``i``, so the output aligns index for index with the input.
    """
    if window < 1:
        raise ConfigError(f"moving average window must be >= 1, got {window}")
    arr = np.asarray(series, dtype=np.float64).reshape(-1)
    out = np.empty_like(arr)
    for i in range(arr.size):
        lo = max(0, i - window + 1)
        out[i] = np.mean(arr[lo : i + 1])
    return out
