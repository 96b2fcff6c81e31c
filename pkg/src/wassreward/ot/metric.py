"""Ground metrics over the flattened state-action support."""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from ..exceptions import InvalidArgumentError

_SYMMETRY_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class GroundMetric:
    """Symmetric, nonnegative cost matrix with a zero diagonal."""

    costs: np.ndarray

    def __post_init__(self):
        c = np.array(self.costs, dtype=float, copy=True)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] == 0:
            raise InvalidArgumentError(f"costs must be a nonempty square matrix, got {c.shape}")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise InvalidArgumentError("costs must be finite and nonnegative")
        if np.any(np.diag(c) != 0):
            raise InvalidArgumentError("costs must have a zero diagonal")
        if not np.allclose(c, c.T, rtol=0, atol=_SYMMETRY_ATOL):
            raise InvalidArgumentError("costs must be symmetric")
        c.setflags(write=False)
        object.__setattr__(self, "costs", c)

    @property
    def size(self):
        return self.costs.shape[0]

    @property
    def diameter(self):
        return float(self.costs.max())

    def powered(self, order_p):
        return self.costs ** order_p


def ground_metric_gridworld(mdp, action_penalty=1.0):
    """``cost((s,a),(s',a')) = manhattan(s, s') + action_penalty * [a != a']``."""
    if mdp.layout is None:
        raise InvalidArgumentError("ground_metric_gridworld needs an MDP with grid layout metadata")
    if action_penalty < 0:
        raise InvalidArgumentError(f"action_penalty must be nonnegative, got {action_penalty}")
    xy = mdp.layout.coordinates()
    manhattan = np.abs(xy[:, None, :] - xy[None, :, :]).sum(axis=2).astype(float)
    actions = np.arange(mdp.num_actions)
    mismatch = action_penalty * (actions[:, None] != actions[None, :])
    # flattened index s * A + a
    costs = manhattan[:, None, :, None] + mismatch[None, :, None, :]
    d = mdp.dimension()
    return GroundMetric(costs.reshape(d, d))


def triangle_violation(costs, max_exhaustive=30, samples=10_000, seed=0):
    """Largest ``c[i,k] - c[i,j] - c[j,k]`` found; positive means a violation.

    Exhaustive over all triples up to ``max_exhaustive`` points, sampled
    beyond that.
    """
    c = np.asarray(costs, dtype=float)
    n = c.shape[0]
    if n <= max_exhaustive:
        # c[i,k] <= min_j c[i,j] + c[j,k]
        via = np.min(c[:, :, None] + c[None, :, :], axis=1)
        return float(np.max(c - via))
    rng = np.random.default_rng(seed)
    i, j, k = rng.integers(0, n, size=(3, samples))
    return float(np.max(c[i, k] - c[i, j] - c[j, k]))

