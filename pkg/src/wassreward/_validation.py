"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import InvalidArgumentError
from .mdp import Trajectory
from .ot.metric import GroundMetric

MASS_TOLERANCE = 1e-9


def check_rows(X, name="X"):
    """2-D finite float array with at least one row."""
    try:
        return check_array(X, dtype=float, ensure_2d=True)
    except ValueError as exc:
        raise InvalidArgumentError(f"{name}: {exc}") from None


def check_measure_rows(X, name="X"):
    """Rows that are probability vectors (nonnegative, summing to one)."""
    X = check_rows(X, name)
    if np.any(X < 0):
        raise InvalidArgumentError(f"{name}: measures must be nonnegative")
    if np.any(np.abs(X.sum(axis=1) - 1.0) > MASS_TOLERANCE):
        raise InvalidArgumentError(f"{name}: every row must sum to 1")
    return X / X.sum(axis=1, keepdims=True)


def check_metric(metric, size=None):
    """A :class:`GroundMetric` from a metric or a square cost array."""
    if not isinstance(metric, GroundMetric):
        if metric is None:
            raise InvalidArgumentError("a ground metric is required")
        metric = GroundMetric(np.asarray(metric, dtype=float))
    if size is not None and metric.size != size:
        raise InvalidArgumentError(f"metric has {metric.size} points, data has {size} columns")
    return metric


def check_sample_weight(sample_weight, n):
    if sample_weight is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(sample_weight, dtype=float)
    if w.shape != (n,) or np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
        raise InvalidArgumentError("sample_weight must be nonnegative, finite, one per row, not all zero")
    return w / w.sum()


def check_trajectories(trajectories, mdp):
    """List of :class:`Trajectory`; plain ``(state, action)`` sequences are wrapped."""
    out = []
    for t in trajectories:
        steps = t if isinstance(t, Trajectory) else Trajectory(tuple((int(s), int(a)) for s, a in t))
        for s, a in steps:
            if not (0 <= s < mdp.num_states and 0 <= a < mdp.num_actions):
                raise InvalidArgumentError(f"step {(s, a)} outside the MDP")
        out.append(steps)
    if not out:
        raise InvalidArgumentError("need at least one trajectory")
    return out
