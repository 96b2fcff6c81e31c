"""Wasserstein distances between reward embeddings."""

from __future__ import annotations

import numpy as np

from ..exceptions import InvalidArgumentError
from .exact import solve_transport
from .sinkhorn import OtConfig, sinkhorn_distance


def _check_pair(mu, nu, metric):
    a, b = mu.weights, nu.weights
    if a.size != b.size or metric.costs.shape != (a.size, a.size):
        raise InvalidArgumentError(
            f"dimension mismatch: measures of size {a.size} and {b.size}, metric {metric.costs.shape}")
    return a, b


def exact_transport(mu, nu, metric, order_p=2.0):
    """Full transportation-simplex solution for cost ``metric.costs ** order_p``."""
    if order_p < 1:
        raise InvalidArgumentError(f"order_p must be >= 1, got {order_p}")
    a, b = _check_pair(mu, nu, metric)
    return solve_transport(a, b, metric.powered(order_p))


def exact_wasserstein(mu, nu, metric, order_p=2.0):
    """``(W_p(mu, nu), plan)`` from the exact transportation LP."""
    solution = exact_transport(mu, nu, metric, order_p)
    return max(solution.cost, 0.0) ** (1.0 / order_p), solution.plan


def pairwise_distance_matrix(measures, metric, order_p=2.0, solver="exact", config=None):
    """Symmetric matrix of pairwise ``W_p``; each unordered pair is solved once.

    Entries are computed independently of each other, so the result does not
    depend on evaluation order. With ``solver="sinkhorn"`` a non-converged
    pair raises nothing here; use :func:`sinkhorn_distance` directly when the
    flag matters.
    """
    if len(measures) < 2:
        raise InvalidArgumentError("need at least two measures")
    if solver not in ("exact", "sinkhorn"):
        raise InvalidArgumentError(f"unknown solver {solver!r}")
    config = (config or OtConfig()).replace(order_p=order_p)
    m = len(measures)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            if solver == "exact":
                value = exact_wasserstein(measures[i], measures[j], metric, order_p)[0]
            else:
                value = sinkhorn_distance(measures[i], measures[j], metric, config).value
            out[i, j] = out[j, i] = value
    return out


def pairwise_sinkhorn(measures, metric, config):
    """Like :func:`pairwise_distance_matrix` with Sinkhorn, also returning all-converged."""
    m = len(measures)
    out = np.zeros((m, m))
    converged = True
    for i in range(m):
        for j in range(i + 1, m):
            res = sinkhorn_distance(measures[i], measures[j], metric, config)
            out[i, j] = out[j, i] = res.value
            converged &= res.converged
    return out, converged
