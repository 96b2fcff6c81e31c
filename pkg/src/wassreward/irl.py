"""Maximum-entropy IRL with one-hot state-action features.

The soft-optimal policy is the time-varying softmax of a finite-horizon,
undiscounted soft backward pass whose episode structure matches
:func:`wassreward.mdp.sample_trajectories`: at most ``horizon`` steps, ending
right after the step taken in an absorbing state. Under that model

    loglik(r) = <r, f_emp> - sum_s p0(s) V_0(s) - l2/2 * |r|^2

has gradient ``f_emp - f_expected(r) - l2 * r`` exactly, where ``f_emp`` is
the mean per-trajectory visit count and ``f_expected`` the model's expected
count. For deterministic dynamics the first two terms are the mean
trajectory log-likelihood.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numeric import logsumexp
from .exceptions import InvalidArgumentError, NumericFailureError
from .mdp import finite_horizon_soft_q, reward_matrix
from .rewards import DEFAULT_BOUND, RewardTable

_DIVERGENCE_NORM = 1e6


@dataclass(frozen=True)
class IrlConfig:
    learning_rate: float = 0.05
    iterations: int = 500
    l2_penalty: float = 0.01
    soft_vi_tolerance: float = 1e-10
    horizon: int = 50
    bound: float = DEFAULT_BOUND

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidArgumentError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.iterations < 0:
            raise InvalidArgumentError(f"iterations must be nonnegative, got {self.iterations}")
        if self.l2_penalty < 0:
            raise InvalidArgumentError(f"l2_penalty must be nonnegative, got {self.l2_penalty}")
        if not self.soft_vi_tolerance > 0:
            raise InvalidArgumentError("soft_vi_tolerance must be positive")
        if self.horizon < 1:
            raise InvalidArgumentError(f"horizon must be positive, got {self.horizon}")
        if not self.bound > 0:
            raise InvalidArgumentError(f"bound must be positive, got {self.bound}")


def empirical_visitation(trajectories, mdp):
    """Mean per-trajectory visit count of each state-action pair (flat, length d)."""
    if len(trajectories) == 0:
        raise InvalidArgumentError("need at least one trajectory")
    counts = np.zeros(mdp.dimension())
    A = mdp.num_actions
    for traj in trajectories:
        for s, a in traj:
            if not (0 <= s < mdp.num_states and 0 <= a < A):
                raise InvalidArgumentError(f"step {(s, a)} outside the MDP")
            counts[s * A + a] += 1.0
    return counts / len(trajectories)


def occupancy(mdp, policies, start=None):
    """Expected visit counts of a (possibly time-varying) policy.

    ``policies`` is ``(S, A)`` for a stationary policy or ``(H, S, A)``; a
    stationary policy needs ``start`` and a horizon via :func:`policy_occupancy`.
    """
    pis = np.asarray(policies, dtype=float)
    p = mdp.start_distribution.copy() if start is None else np.asarray(start, dtype=float)
    live = (~mdp.absorbing).astype(float)
    P = mdp.transitions.reshape(mdp.dimension(), mdp.num_states)
    total = np.zeros(mdp.shape)
    for pi in pis:
        visits = p[:, None] * pi
        total += visits
        p = (visits * live[:, None]).ravel() @ P
    return total.ravel()


def policy_occupancy(mdp, policy, horizon):
    pi = getattr(policy, "action_probabilities", policy)
    return occupancy(mdp, np.broadcast_to(pi, (horizon,) + mdp.shape))


def soft_policies(mdp, reward, horizon):
    """``(H, S, A)`` softmax policies of the finite-horizon soft backward pass."""
    Q = finite_horizon_soft_q(mdp, reward, horizon)
    if not np.all(np.isfinite(Q)):
        raise NumericFailureError("soft backward pass produced non-finite values")
    return np.exp(Q - logsumexp(Q, axis=2, keepdims=True)), Q


def expected_visitation(mdp, reward, config=None):
    """Expected visit counts under the soft-optimal policy (flat, length d)."""
    config = config or IrlConfig()
    pis, _ = soft_policies(mdp, reward, config.horizon)
    return occupancy(mdp, pis)


def maxent_log_likelihood(mdp, reward, empirical, config=None):
    """Regularized MaxEnt log-likelihood of the data summarized by ``empirical``."""
    config = config or IrlConfig()
    R = reward_matrix(reward, mdp)
    Q = finite_horizon_soft_q(mdp, R, config.horizon)
    v0 = logsumexp(Q[0], axis=1)
    r = R.ravel()
    return float(r @ empirical - mdp.start_distribution @ v0 - 0.5 * config.l2_penalty * r @ r)


def maxent_gradient(mdp, reward, empirical, config=None):
    config = config or IrlConfig()
    r = reward_matrix(reward, mdp).ravel()
    return empirical - expected_visitation(mdp, reward, config) - config.l2_penalty * r


def maxent_irl(mdp, trajectories, config=None, seed=0, return_history=False):
    """Infer a reward table from demonstrations by projected gradient ascent.

    Starts from zeros, takes ``config.iterations`` fixed-size steps and
    clips to ``[-bound, bound]`` after each one. The procedure has no random
    component; ``seed`` is accepted for interface symmetry with the other
    pipeline stages and does not affect the result.
    """
    config = config or IrlConfig()
    empirical = empirical_visitation(trajectories, mdp)
    r = np.zeros(mdp.dimension())
    history = []
    for _ in range(config.iterations):
        grad = maxent_gradient(mdp, r.reshape(mdp.shape), empirical, config)
        norm = float(np.linalg.norm(grad))
        if not np.isfinite(norm) or norm > _DIVERGENCE_NORM:
            raise NumericFailureError(f"MaxEnt IRL diverged (gradient norm {norm:.3g})")
        if return_history:
            history.append(maxent_log_likelihood(mdp, r.reshape(mdp.shape), empirical, config))
        r = np.clip(r + config.learning_rate * grad, -config.bound, config.bound)
    table = RewardTable(r.reshape(mdp.shape), config.bound)
    if return_history:
        history.append(maxent_log_likelihood(mdp, table, empirical, config))
        return table, history
    return table
