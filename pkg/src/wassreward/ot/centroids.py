"""Centroids of embedded reward sets: medoid, barycenter, convexity probe."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidArgumentError
from ..rewards import DiscreteMeasure, RewardTable, phi_embed
from .barycenter import barycenter_weights, random_initialization, validate_barycenter_inputs
from .distances import exact_wasserstein, pairwise_distance_matrix
from .sinkhorn import OtConfig


def medoid_centroid(measures, metric, order_p=2.0):
    """Member minimizing the sum of exact ``W_p`` to all members.

    Returns ``(index, objective)``; ties go to the lowest index.
    """
    if len(measures) == 0:
        raise InvalidArgumentError("medoid of an empty set")
    if len(measures) == 1:
        return 0, 0.0
    sums = pairwise_distance_matrix(measures, metric, order_p).sum(axis=1)
    index = int(np.argmin(sums))
    return index, float(sums[index])


@dataclass(frozen=True, eq=False)
class Barycenter:
    measure: DiscreteMeasure
    converged: bool
    iterations: int
    residual: float


def wasserstein_barycenter(measures, weights=None, metric=None, config=None, method="debiased", init=None):
    """Entropic fixed-support barycenter of ``measures``.

    All inputs must share one support and be strictly positive. A single
    input is returned unchanged (its own exact barycenter).
    """
    config = config or OtConfig()
    w = validate_barycenter_inputs(measures, weights)
    if metric is None or metric.size != measures[0].size:
        raise InvalidArgumentError("metric must match the common support of the measures")
    if any(not m.is_strictly_positive for m in measures):
        raise InvalidArgumentError("barycenter inputs must be strictly positive")
    if len(measures) == 1:
        return Barycenter(measures[0], True, 0, 0.0)
    result = barycenter_weights(
        [m.weights for m in measures], w, metric.powered(config.order_p), config.reg_epsilon,
        config.max_iterations, config.convergence_tol, method=method, init=init)
    return Barycenter(DiscreteMeasure.normalized(result.weights), result.converged,
                      result.iterations, result.residual)


def barycenter_objective(candidate, measures, weights, metric, order_p=2.0):
    """Unregularized ``sum_i weights_i * W_p(candidate, measures_i) ** p``."""
    return float(sum(w * exact_wasserstein(candidate, m, metric, order_p)[0] ** order_p
                     for w, m in zip(weights, measures)))


def multistart_spread(measures, weights, metric, config, starts=5, seed=0, method="debiased"):
    """Largest total-variation gap between barycenters from random starts.

    The first start uses the default initialization; the rest draw random
    log-scalings. Returns ``(spread, reference_barycenter, all_converged)``.
    """
    rng = np.random.default_rng(seed)
    reference = wasserstein_barycenter(measures, weights, metric, config, method)
    spread, converged = 0.0, reference.converged
    for _ in range(starts - 1):
        init = random_initialization(len(measures), measures[0].size, rng)
        other = wasserstein_barycenter(measures, weights, metric, config, method, init=init)
        spread = max(spread, reference.measure.total_variation(other.measure))
        converged &= other.converged
    return spread, reference, converged


def convexity_probe(r1, r2, reference, metric, t_grid, temperature=1.0, order_p=2.0):
    """Sample ``W_p`` along reward mixtures ``t*r1 + (1-t)*r2``.

    Returns ``(t, lhs, rhs)`` rows with ``lhs = W_p(phi(t r1 + (1-t) r2), ref)``
    and ``rhs = t W_p(phi(r1), ref) + (1-t) W_p(phi(r2), ref)``. Convexity
    through the softmax embedding is not guaranteed, so nothing is asserted.
    """
    v1 = np.asarray(getattr(r1, "values", r1), dtype=float)
    v2 = np.asarray(getattr(r2, "values", r2), dtype=float)
    if v1.shape != v2.shape:
        raise InvalidArgumentError("reward tables must have the same shape")
    d1 = exact_wasserstein(phi_embed(v1, temperature), reference, metric, order_p)[0]
    d2 = exact_wasserstein(phi_embed(v2, temperature), reference, metric, order_p)[0]
    bound = max(np.abs(v1).max(), np.abs(v2).max(), 1.0)
    rows = []
    for t in t_grid:
        if not 0.0 < t < 1.0:
            raise InvalidArgumentError(f"t values must lie in (0, 1), got {t}")
        # the mix can overshoot the bound by rounding
        mix = RewardTable.clipped(t * v1 + (1.0 - t) * v2, bound)
        lhs = exact_wasserstein(phi_embed(mix, temperature), reference, metric, order_p)[0]
        rows.append((float(t), lhs, t * d1 + (1.0 - t) * d2))
    return rows
