"""Reward tables, the softmax embedding into measures, and reward-set generation."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from .exceptions import GenerationFailureError, InvalidArgumentError
from .mdp import RIGHT, reward_matrix, value_iteration

DEFAULT_BOUND = 10.0
POLICY_MARGIN = 1e-8
MAX_REJECTIONS = 10_000
_EQUIVALENCE_TOLERANCE = 1e-10
_SUM_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class RewardTable:
    """Bounded reward function on ``(state, action)`` pairs."""

    values: np.ndarray
    bound: float = DEFAULT_BOUND

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise InvalidArgumentError("reward values must be a (num_states, num_actions) matrix")
        if self.bound <= 0:
            raise InvalidArgumentError(f"bound must be positive, got {self.bound}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("reward values must be finite")
        if np.max(np.abs(values)) > self.bound:
            raise InvalidArgumentError(
                f"reward magnitude {np.max(np.abs(values)):.6g} exceeds bound {self.bound}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bound", float(self.bound))

    @classmethod
    def clipped(cls, values, bound=DEFAULT_BOUND):
        return cls(np.clip(values, -bound, bound), bound)

    @property
    def shape(self):
        return self.values.shape

    def flat(self):
        return self.values.ravel()


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability vector over the flattened state-action index set.

    Index ``s * num_actions + a`` holds the mass of pair ``(s, a)``. Zero
    entries are allowed here (Dirac test measures); embeddings produced by
    ``phi_embed`` are strictly positive.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True).ravel()
        if w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidArgumentError("measure weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > _SUM_ATOL:
            raise InvalidArgumentError(f"measure weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def normalized(cls, weights):
        w = np.asarray(weights, dtype=float).ravel()
        return cls(w / w.sum())

    @property
    def size(self):
        return self.weights.size

    @property
    def is_strictly_positive(self):
        return bool(np.all(self.weights > 0))

    def total_variation(self, other):
        return 0.5 * float(np.abs(self.weights - other.weights).sum())


def phi_embed(reward, temperature=1.0):
    """Map a reward table to ``softmax(values / temperature)`` over all pairs.

    The max-subtraction inside softmax guards against overflow. Weights are
    strictly positive as long as the reward range over ``temperature`` stays
    below roughly 700 (double-precision underflow).
    """
    if temperature <= 0:
        raise InvalidArgumentError(f"temperature must be positive, got {temperature}")
    values = reward_matrix(reward).ravel()
    w = softmax(values / temperature)
    return DiscreteMeasure(w / w.sum())


def potential_shaping(mdp, reward, potential, discount=None):
    """Potential-based shaping of ``reward`` on ``mdp``.

    Greedy policies are preserved because every q-value of state ``s`` shifts
    by the same ``-potential(s)``. The returned table keeps the input bound,
    widened if shaping pushed any entry past it.
    """
    R = reward_matrix(reward, mdp)
    phi = np.asarray(potential, dtype=float)
    if phi.shape != (mdp.num_states,) or not np.all(np.isfinite(phi)):
        raise InvalidArgumentError("potential must be a finite vector with one entry per state")
    gamma = mdp.discount if discount is None else float(discount)
    shaped = R + gamma * (mdp.transitions @ phi) - phi[:, None]
    bound = getattr(reward, "bound", DEFAULT_BOUND)
    return RewardTable(shaped, max(bound, float(np.max(np.abs(shaped)))))


class PolicyMatch(enum.Enum):
    """Outcome of a greedy-policy comparison.

    ``INDETERMINATE`` refuses truth-testing so it can never be read as a
    silent yes or no.
    """

    EQUIVALENT = "equivalent"
    DISTINCT = "distinct"
    INDETERMINATE = "indeterminate"

    def __bool__(self):
        if self is PolicyMatch.INDETERMINATE:
            raise ValueError("policy comparison is indeterminate (q-gap below margin)")
        return self is PolicyMatch.EQUIVALENT


def _solve_greedy(mdp, reward):
    _, q = value_iteration(mdp, reward, tolerance=_EQUIVALENCE_TOLERANCE)
    actions = np.argmax(q, axis=1)
    ordered = np.sort(q, axis=1)
    gaps = ordered[:, -1] - ordered[:, -2] if q.shape[1] > 1 else np.full(q.shape[0], np.inf)
    return actions, gaps


def _compare(first, second, margin=POLICY_MARGIN):
    (a1, g1), (a2, g2) = first, second
    confident = (g1 > margin) & (g2 > margin)
    if np.any(confident & (a1 != a2)):
        return PolicyMatch.DISTINCT
    if not np.all(confident):
        return PolicyMatch.INDETERMINATE
    return PolicyMatch.EQUIVALENT


def verify_policy_equivalence(mdp, r1, r2):
    """Compare the greedy policies of two rewards on ``mdp``.

    Both rewards are solved by value iteration at tolerance 1e-10. A state
    counts only if the gap between its best and second-best q-value exceeds
    1e-8 under both rewards. Any confident disagreement gives ``DISTINCT``;
    otherwise any unconfident state gives ``INDETERMINATE``.
    """
    return _compare(_solve_greedy(mdp, r1), _solve_greedy(mdp, r2))


def goal_reward(mdp, goal_value=1.0, action_bonus=0.01, bonus_action=RIGHT, bound=DEFAULT_BOUND):
    """Reward paying ``goal_value`` in absorbing states.

    A small bonus on one action removes the argmax ties that a pure goal
    reward leaves between equally short paths (and inside the goal itself).
    """
    R = np.zeros(mdp.shape)
    R[mdp.absorbing] = goal_value
    if action_bonus:
        R[:, bonus_action] += action_bonus
    return RewardTable(R, bound)


def generate_equivalent_rewards(mdp, base_reward, count, method="shaping", noise_scale=0.1, seed=0,
                                bound=DEFAULT_BOUND, max_rejections=MAX_REJECTIONS):
    """Draw ``count`` rewards whose greedy policy matches that of ``base_reward``.

    ``shaping`` adds potential-based shaping with potentials drawn from
    ``U(-noise_scale, noise_scale)``; ``perturb_accept`` adds i.i.d. uniform
    noise per entry and keeps only draws with an equivalent policy. Outputs
    are clipped to ``bound`` before verification. Sample ``i`` uses the
    generator seeded with ``[seed, i]``.
    """
    if count < 1:
        raise InvalidArgumentError(f"count must be positive, got {count}")
    if noise_scale <= 0:
        raise InvalidArgumentError(f"noise_scale must be positive, got {noise_scale}")
    if method not in ("shaping", "perturb_accept"):
        raise InvalidArgumentError(f"unknown generation method {method!r}")
    base = reward_matrix(base_reward, mdp)
    base_solution = _solve_greedy(mdp, base)
    if np.any(base_solution[1] <= POLICY_MARGIN):
        raise InvalidArgumentError("base reward has argmax ties; its greedy policy is not unique")

    out, attempts = [], 0
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        for _ in range(max_rejections + 1):
            attempts += 1
            if method == "shaping":
                phi = rng.uniform(-noise_scale, noise_scale, size=mdp.num_states)
                candidate = base + mdp.discount * (mdp.transitions @ phi) - phi[:, None]
            else:
                candidate = base + rng.uniform(-noise_scale, noise_scale, size=base.shape)
            candidate = np.clip(candidate, -bound, bound)
            if _compare(base_solution, _solve_greedy(mdp, candidate)) is PolicyMatch.EQUIVALENT:
                out.append(RewardTable(candidate, bound))
                break
        else:
            rate = len(out) / attempts
            raise GenerationFailureError(
                f"sample {i}: no equivalent reward after {max_rejections} rejections", rate)
    return out


def compute_reward_variance(rewards):
    """Mean over state-action pairs of the population variance across ``rewards``."""
    if len(rewards) < 2:
        raise InvalidArgumentError("need at least two rewards to compute a variance")
    stack = np.stack([reward_matrix(r) for r in rewards])
    return float(np.mean(np.var(stack, axis=0)))
