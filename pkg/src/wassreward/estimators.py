"""scikit-learn style wrappers around the functional API.

Rows of ``X`` are flattened reward tables (for :class:`RewardEmbedding`) or
probability measures on the state-action support (for the OT estimators).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import (
    check_measure_rows,
    check_metric,
    check_rows,
    check_sample_weight,
    check_trajectories,
)
from .exceptions import InvalidArgumentError
from .irl import IrlConfig, empirical_visitation, maxent_irl, maxent_log_likelihood, soft_policies
from .ot import OtConfig, exact_wasserstein, medoid_centroid, sinkhorn_distance, wasserstein_barycenter
from .rewards import DEFAULT_BOUND, DiscreteMeasure, phi_embed


class RewardEmbedding(TransformerMixin, BaseEstimator):
    """Softmax embedding of flattened reward tables, one measure per row."""

    def __init__(self, temperature=1.0):
        self.temperature = temperature

    def fit(self, X, y=None):
        X = check_rows(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_rows(X)
        if X.shape[1] != self.n_features_in_:
            raise InvalidArgumentError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return np.vstack([phi_embed(row, self.temperature).weights for row in X])


def _distance(mu, nu, metric, order_p, solver, reg_epsilon):
    if solver == "exact":
        return exact_wasserstein(mu, nu, metric, order_p)[0]
    if solver == "sinkhorn":
        config = OtConfig(order_p=order_p, reg_epsilon=reg_epsilon)
        return sinkhorn_distance(mu, nu, metric, config).value
    raise InvalidArgumentError(f"unknown solver {solver!r}")


class PairwiseWasserstein(TransformerMixin, BaseEstimator):
    """Maps measures to their ``W_p`` distances from the fitted measures."""

    def __init__(self, metric=None, order_p=2.0, solver="exact", reg_epsilon=0.2):
        self.metric = metric
        self.order_p = order_p
        self.solver = solver
        self.reg_epsilon = reg_epsilon

    def fit(self, X, y=None):
        X = check_measure_rows(X)
        self.metric_ = check_metric(self.metric, X.shape[1])
        self.reference_ = X
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "reference_")
        X = check_measure_rows(X)
        if X.shape[1] != self.n_features_in_:
            raise InvalidArgumentError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        out = np.empty((X.shape[0], self.reference_.shape[0]))
        for i, row in enumerate(X):
            for j, ref in enumerate(self.reference_):
                out[i, j] = _distance(DiscreteMeasure(row), DiscreteMeasure(ref), self.metric_,
                                      self.order_p, self.solver, self.reg_epsilon)
        return out


class WassersteinMedoid(TransformerMixin, BaseEstimator):
    """Fitted row with the smallest total ``W_p`` to all fitted rows."""

    def __init__(self, metric=None, order_p=2.0):
        self.metric = metric
        self.order_p = order_p

    def fit(self, X, y=None):
        X = check_measure_rows(X)
        self.metric_ = check_metric(self.metric, X.shape[1])
        self.medoid_index_, self.objective_ = medoid_centroid(
            [DiscreteMeasure(row) for row in X], self.metric_, self.order_p)
        self.medoid_ = X[self.medoid_index_]
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """``W_p`` from each row to the medoid, shape ``(n, 1)``."""
        check_is_fitted(self, "medoid_")
        X = check_measure_rows(X)
        center = DiscreteMeasure(self.medoid_)
        return np.array([[exact_wasserstein(DiscreteMeasure(row), center, self.metric_, self.order_p)[0]]
                         for row in X])


class WassersteinBarycenter(TransformerMixin, BaseEstimator):
    """Entropic fixed-support barycenter of strictly positive measures."""

    def __init__(self, metric=None, order_p=2.0, reg_epsilon=0.2, max_iterations=20_000, tol=1e-10,
                 method="debiased"):
        self.metric = metric
        self.order_p = order_p
        self.reg_epsilon = reg_epsilon
        self.max_iterations = max_iterations
        self.tol = tol
        self.method = method

    def fit(self, X, y=None, sample_weight=None):
        X = check_measure_rows(X)
        self.metric_ = check_metric(self.metric, X.shape[1])
        weights = check_sample_weight(sample_weight, X.shape[0])
        config = OtConfig(order_p=self.order_p, reg_epsilon=self.reg_epsilon,
                          max_iterations=self.max_iterations, convergence_tol=self.tol)
        result = wasserstein_barycenter([DiscreteMeasure(row) for row in X], weights, self.metric_,
                                        config, self.method)
        self.barycenter_ = result.measure.weights
        self.converged_ = result.converged
        self.n_iter_ = result.iterations
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """``W_p`` from each row to the barycenter, shape ``(n, 1)``."""
        check_is_fitted(self, "barycenter_")
        X = check_measure_rows(X)
        center = DiscreteMeasure(self.barycenter_)
        return np.array([[exact_wasserstein(DiscreteMeasure(row), center, self.metric_, self.order_p)[0]]
                         for row in X])


class MaxEntIRL(BaseEstimator):
    """Maximum-entropy IRL on a fixed MDP.

    ``fit`` takes a list of trajectories (each a sequence of ``(state,
    action)`` pairs). ``predict`` returns the most likely first action of the
    learned soft-optimal policy in each given state.
    """

    def __init__(self, mdp=None, learning_rate=0.05, iterations=500, l2_penalty=0.01, horizon=50,
                 bound=DEFAULT_BOUND):
        self.mdp = mdp
        self.learning_rate = learning_rate
        self.iterations = iterations
        self.l2_penalty = l2_penalty
        self.horizon = horizon
        self.bound = bound

    def _config(self):
        return IrlConfig(learning_rate=self.learning_rate, iterations=self.iterations,
                         l2_penalty=self.l2_penalty, horizon=self.horizon, bound=self.bound)

    def fit(self, X, y=None):
        if self.mdp is None:
            raise InvalidArgumentError("MaxEntIRL needs an mdp")
        trajectories = check_trajectories(X, self.mdp)
        table = maxent_irl(self.mdp, trajectories, self._config())
        self.reward_ = table.values
        self.policies_, _ = soft_policies(self.mdp, self.reward_, self.horizon)
        return self

    def predict(self, X):
        check_is_fitted(self, "reward_")
        states = np.asarray(X, dtype=int).ravel()
        if np.any((states < 0) | (states >= self.mdp.num_states)):
            raise InvalidArgumentError("state index outside the MDP")
        return np.argmax(self.policies_[0][states], axis=1)

    def score(self, X, y=None):
        """Regularized MaxEnt log-likelihood of ``X`` under the fitted reward."""
        check_is_fitted(self, "reward_")
        empirical = empirical_visitation(check_trajectories(X, self.mdp), self.mdp)
        return maxent_log_likelihood(self.mdp, self.reward_, empirical, self._config())
