"""Independent references used by the tests."""

import numpy as np
from scipy.optimize import linprog

from wassreward.ot import GroundMetric
from wassreward.rewards import DiscreteMeasure


def lp_cost(a, b, cost):
    """Optimal transport cost from scipy's HiGHS LP solver."""
    n, m = cost.shape
    rows = np.kron(np.eye(n), np.ones((1, m)))
    cols = np.kron(np.ones((1, n)), np.eye(m))
    res = linprog(cost.ravel(), A_eq=np.vstack([rows, cols]), b_eq=np.concatenate([a, b]),
                  bounds=(0, None), method="highs")
    assert res.status == 0
    return float(res.fun)


def lp_wasserstein(mu, nu, metric, p):
    return max(lp_cost(mu.weights, nu.weights, metric.costs ** p), 0.0) ** (1 / p)


def random_measure(rng, size, floor=0.0, sparse=False):
    w = rng.random(size) + floor
    if sparse:
        w[rng.random(size) < 0.5] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
    return DiscreteMeasure.normalized(w)


def random_metric(rng, size, dim=2):
    """Euclidean distances between random points (a genuine metric)."""
    x = rng.random((size, dim))
    c = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(c, 0.0)
    return GroundMetric((c + c.T) / 2)
