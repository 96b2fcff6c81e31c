"""Experiments on reward ambiguity: convergence, noise, dimension, centroids.

Every experiment is a pure function of its :class:`ExperimentConfig`. Random
streams are derived from ``(master_seed, replicate_seed, stream)`` through
:func:`derive_seed`, with fixed stream numbers:

    0  expert trajectories (shared by every n, and by every noise level)
    1  policy-equivalent reward sets
    2  barycenter multi-start offsets

Records come back sorted by ``(kind, variable, seed, metric)``.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.isotonic import IsotonicRegression

from .exceptions import GenerationFailureError, InvalidArgumentError, NumericFailureError
from .irl import IrlConfig, maxent_irl, occupancy, soft_policies
from .mdp import Policy, build_gridworld, greedy_policy, sample_trajectories, value_iteration
from .ot import (
    OtConfig,
    barycenter_objective,
    ground_metric_gridworld,
    medoid_centroid,
    multistart_spread,
    pairwise_distance_matrix,
    pairwise_sinkhorn,
    sinkhorn_distance,
)
from .ot.distances import exact_wasserstein
from .rewards import compute_reward_variance, generate_equivalent_rewards, goal_reward, phi_embed

KINDS = ("converge", "noise", "dim_sweep", "centroid")
TRAJECTORY_STREAM = 0
REWARD_SET_STREAM = 1
MULTISTART_STREAM = 2
ENVELOPE_SEED = -1


def derive_seed(master_seed, replicate_seed, stream):
    """32-bit seed for one random stream of one replicate."""
    return int(np.random.SeedSequence([master_seed, replicate_seed, stream]).generate_state(1)[0])


def _strictly_increasing(values):
    return all(a < b for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything an experiment run depends on.

    Gridworlds have one absorbing goal in the bottom-right cell and start
    uniformly over the other cells. ``expert`` selects the demonstrator on
    the goal reward: ``"soft"`` is its soft-optimal policy under the same
    finite-horizon model that MaxEnt IRL fits, ``"greedy"`` the
    deterministic optimal policy.
    """

    kind: str = "converge"
    grid_sizes: tuple = ((4, 4),)
    slip_probability: float = 0.1
    discount: float = 0.9
    trajectory_counts: tuple = (8, 64, 512)
    noise_levels: tuple = (0.0, 0.05, 0.1, 0.2)
    noise_trajectory_count: int = 64
    set_size: int = 15
    seeds: tuple = tuple(range(10))
    master_seed: int = 0
    temperature: float = 1.0
    action_penalty: float = 1.0
    expert: str = "soft"
    generation_method: str = "shaping"
    noise_scale: float = 0.1
    solver: str = "exact"
    multistart_starts: int = 5
    barycenter_method: str = "debiased"
    ot: OtConfig = field(default_factory=OtConfig)
    irl: IrlConfig = field(default_factory=IrlConfig)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "grid_sizes", tuple((int(w), int(h)) for w, h in self.grid_sizes))
        set_(self, "trajectory_counts", tuple(int(n) for n in self.trajectory_counts))
        set_(self, "noise_levels", tuple(float(e) for e in self.noise_levels))
        set_(self, "seeds", tuple(int(s) for s in self.seeds))
        checks = [
            ("kind", self.kind in KINDS, f"must be one of {KINDS}"),
            ("grid_sizes", len(self.grid_sizes) > 0
             and all(w >= 1 and h >= 1 and w * h >= 2 for w, h in self.grid_sizes)
             and _strictly_increasing([w * h for w, h in self.grid_sizes]),
             "must be a nonempty list of [width, height] with at least two cells, strictly increasing in area"),
            ("slip_probability", 0.0 <= self.slip_probability <= 1.0, "must lie in [0, 1]"),
            ("discount", 0.0 < self.discount < 1.0, "must lie in (0, 1)"),
            ("trajectory_counts", len(self.trajectory_counts) > 0 and min(self.trajectory_counts) >= 1
             and _strictly_increasing(self.trajectory_counts),
             "must be a nonempty, strictly increasing list of positive integers"),
            ("noise_levels", len(self.noise_levels) > 0
             and all(0.0 <= e < 1.0 for e in self.noise_levels)
             and _strictly_increasing(self.noise_levels),
             "must be a nonempty, strictly increasing list in [0, 1)"),
            ("noise_trajectory_count", self.noise_trajectory_count >= 1, "must be positive"),
            ("set_size", self.set_size >= 2, "must be at least 2"),
            ("seeds", len(self.seeds) > 0 and len(set(self.seeds)) == len(self.seeds)
             and min(self.seeds) >= 0, "must be a nonempty list of distinct nonnegative integers"),
            ("master_seed", self.master_seed >= 0, "must be a nonnegative integer"),
            ("temperature", self.temperature > 0, "must be positive"),
            ("action_penalty", self.action_penalty > 0, "must be positive"),
            ("expert", self.expert in ("soft", "greedy"), "must be 'soft' or 'greedy'"),
            ("generation_method", self.generation_method in ("shaping", "perturb_accept"),
             "must be 'shaping' or 'perturb_accept'"),
            ("noise_scale", self.noise_scale > 0, "must be positive"),
            ("solver", self.solver in ("exact", "sinkhorn"), "must be 'exact' or 'sinkhorn'"),
            ("multistart_starts", self.multistart_starts >= 1, "must be positive"),
            ("barycenter_method", self.barycenter_method in ("debiased", "bregman"),
             "must be 'debiased' or 'bregman'"),
        ]
        for key, ok, message in checks:
            if not ok:
                raise InvalidArgumentError(f"config key {key!r} {message}")
        if self.kind == "noise" and 0.0 not in self.noise_levels:
            raise InvalidArgumentError("config key 'noise_levels' must include 0 for a noise experiment")
        if self.kind in ("converge", "noise") and len(self.grid_sizes) != 1:
            raise InvalidArgumentError(f"config key 'grid_sizes' must hold one size for kind {self.kind!r}")

    @classmethod
    def preset(cls, kind):
        """Default configuration of each experiment kind."""
        if kind == "dim_sweep":
            return cls(kind=kind, grid_sizes=((2, 2), (3, 3), (4, 4)))
        if kind == "centroid":
            return cls(kind=kind, grid_sizes=((3, 3),))
        return cls(kind=kind)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, (OtConfig, IrlConfig)):
                value = dataclasses.asdict(value)
            elif f.name == "grid_sizes":
                value = [list(size) for size in value]
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data):
        """Build a config from JSON-like data; errors name the offending key."""
        if not isinstance(data, dict):
            raise InvalidArgumentError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in names:
                raise InvalidArgumentError(f"unknown config key {key!r}")
        kwargs = {}
        for key, value in data.items():
            if key in ("ot", "irl"):
                kwargs[key] = _nested(OtConfig if key == "ot" else IrlConfig, key, value)
            else:
                kwargs[key] = _convert(key, value)
        return cls(**kwargs)


_SCALARS = {
    "kind": str, "expert": str, "generation_method": str, "solver": str, "barycenter_method": str,
    "slip_probability": float, "discount": float, "temperature": float, "action_penalty": float,
    "noise_scale": float, "noise_trajectory_count": int, "set_size": int, "master_seed": int,
    "multistart_starts": int,
}


def _convert(key, value):
    try:
        if key in _SCALARS:
            kind = _SCALARS[key]
            if kind is str:
                if not isinstance(value, str):
                    raise TypeError("expected a string")
                return value
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError("expected a number")
            if kind is int and float(value) != int(value):
                raise TypeError("expected an integer")
            return kind(value)
        if key == "grid_sizes":
            sizes = [tuple(size) for size in value]
            if any(len(size) != 2 for size in sizes):
                raise TypeError("expected [width, height] pairs")
            return tuple((_integer(w), _integer(h)) for w, h in sizes)
        if key in ("trajectory_counts", "seeds"):
            return tuple(_integer(v) for v in value)
        if key == "noise_levels":
            return tuple(float(_number(v)) for v in value)
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"config key {key!r}: {exc}") from None
    raise InvalidArgumentError(f"unknown config key {key!r}")


def _number(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"expected a number, got {value!r}")
    return value


def _integer(value):
    value = _number(value)
    if float(value) != int(value):
        raise TypeError(f"expected an integer, got {value!r}")
    return int(value)


def _nested(cls, prefix, data):
    if not isinstance(data, dict):
        raise InvalidArgumentError(f"config key {prefix!r} must be an object")
    names = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in names:
            raise InvalidArgumentError(f"unknown config key '{prefix}.{key}'")
        try:
            value = _number(value)
            kwargs[key] = int(value) if names[key].type in ("int", int) and float(value) == int(value) \
                else value
        except TypeError as exc:
            raise InvalidArgumentError(f"config key '{prefix}.{key}': {exc}") from None
    try:
        return cls(**kwargs)
    except InvalidArgumentError as exc:
        raise InvalidArgumentError(f"config key {prefix!r}: {exc}") from None


@dataclass(frozen=True)
class ResultRecord:
    kind: str
    variable: float
    seed: int
    metric: str
    value: float
    converged: bool
    wall_ms: float

    def sort_key(self):
        return (self.kind, self.variable, self.seed, self.metric)


def sort_records(records):
    return sorted(records, key=ResultRecord.sort_key)


@dataclass(frozen=True)
class NoiseModel:
    """Expert noise ``pi' = (1 - epsilon) pi + epsilon * uniform``."""

    epsilon: float
    kind: str = "uniform_mix"

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise InvalidArgumentError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.kind != "uniform_mix":
            raise InvalidArgumentError(f"unknown noise kind {self.kind!r}")


def perturb_policy(policy, noise, seed=0):
    """Mix ``policy`` with the uniform policy at rate ``noise.epsilon``.

    Accepts a :class:`Policy` or an array of action probabilities (last axis
    over actions, e.g. a time-varying ``(H, S, A)`` policy) and returns the
    same kind. The mixing is deterministic; ``seed`` is accepted for noise
    kinds that need randomness. At ``epsilon = 0`` the input is returned.
    """
    if noise.epsilon == 0.0:
        return policy
    probs = policy.action_probabilities if isinstance(policy, Policy) else np.asarray(policy, dtype=float)
    mixed = (1.0 - noise.epsilon) * probs + noise.epsilon / probs.shape[-1]
    mixed = mixed / mixed.sum(axis=-1, keepdims=True)
    return Policy(mixed) if isinstance(policy, Policy) else mixed


def average_pairwise_distance(measures, metric, order_p=2.0, solver="exact", config=None):
    """Mean ``W_p`` over all unordered pairs, ``2 / (m (m - 1)) * sum_{i<j} W_p``."""
    if len(measures) < 2:
        raise InvalidArgumentError("average pairwise distance needs at least two measures")
    matrix = pairwise_distance_matrix(measures, metric, order_p, solver, config)
    return float(matrix[np.triu_indices(len(measures), 1)].mean())


def _gridworld(config, size):
    width, height = size
    return build_gridworld(width, height, config.slip_probability, config.discount,
                           goal_cells=[(width - 1, height - 1)])


def expert_policies(config, mdp, reward):
    """``(H, S, A)`` action probabilities of the configured expert."""
    horizon = config.irl.horizon
    if config.expert == "soft":
        return soft_policies(mdp, reward, horizon)[0]
    _, q = value_iteration(mdp, reward)
    return np.broadcast_to(greedy_policy(q).action_probabilities, (horizon,) + mdp.shape)


def infer_reward(config, mdp, policies, count, seed):
    """Sample ``count`` trajectories from ``policies`` and run MaxEnt IRL.

    The trajectory stream depends on ``seed`` only, so every schedule point
    and noise level of a replicate reuses the same random numbers.
    """
    trajectories = sample_trajectories(
        mdp, policies, count, config.irl.horizon,
        seed=derive_seed(config.master_seed, seed, TRAJECTORY_STREAM))
    return maxent_irl(mdp, trajectories, config.irl)


def _distance(config, metric, mu, nu):
    if config.solver == "exact":
        return exact_wasserstein(mu, nu, metric, config.ot.order_p)[0], True
    result = sinkhorn_distance(mu, nu, metric, config.ot)
    return result.value, result.converged


def expected_reward(mdp, policies, reward):
    """Visit-weighted mean of ``reward`` under a ``(H, S, A)`` policy."""
    visits = occupancy(mdp, policies)
    return float(visits @ np.asarray(getattr(reward, "values", reward)).ravel() / visits.sum())


def _failed(kind, variable, seed, metrics, start):
    ms = (time.perf_counter() - start) * 1e3
    return [ResultRecord(kind, variable, seed, m, float("nan"), False, ms) for m in metrics]


def _require(config, kind):
    if config.kind != kind:
        raise InvalidArgumentError(f"expected a {kind!r} config, got kind {config.kind!r}")


def run_convergence_experiment(config):
    """``W_p(phi(R_n), phi(R_true))`` and the expected-reward gap for each n."""
    _require(config, "converge")
    mdp = _gridworld(config, config.grid_sizes[0])
    metric = ground_metric_gridworld(mdp, config.action_penalty)
    true_reward = goal_reward(mdp)
    true_measure = phi_embed(true_reward, config.temperature)
    expert = expert_policies(config, mdp, true_reward)
    expert_value = expected_reward(mdp, expert, true_reward)
    records = []
    for n in config.trajectory_counts:
        for seed in config.seeds:
            start = time.perf_counter()
            try:
                inferred = infer_reward(config, mdp, expert, n, seed)
                wp, converged = _distance(config, metric, phi_embed(inferred, config.temperature),
                                          true_measure)
                learner, _ = soft_policies(mdp, inferred, config.irl.horizon)
                gap = abs(expected_reward(mdp, learner, inferred) - expert_value)
            except NumericFailureError:
                records += _failed("converge", float(n), seed, ("wp_to_true", "expected_reward_gap"), start)
                continue
            ms = (time.perf_counter() - start) * 1e3
            records.append(ResultRecord("converge", float(n), seed, "wp_to_true", wp, converged, ms))
            records.append(ResultRecord("converge", float(n), seed, "expected_reward_gap", gap, True, ms))
    return sort_records(records)


def noise_envelope(epsilons, maxima):
    """Nondecreasing isotonic fit of the per-epsilon maxima."""
    fit = IsotonicRegression(increasing=True)
    return fit.fit_transform(np.asarray(epsilons, dtype=float), np.asarray(maxima, dtype=float))


def run_noise_experiment(config):
    """``W_p(phi(R*(pi)), phi(R*(pi')))`` per noise level, plus its envelope.

    Each replicate uses one trajectory stream for the noise-free reference
    and every noisy expert, so epsilon = 0 reproduces the reference exactly.
    Envelope records use seed -1: ``wp_noise_max`` is the max over seeds and
    ``c_hat`` its isotonic fit.
    """
    _require(config, "noise")
    mdp = _gridworld(config, config.grid_sizes[0])
    metric = ground_metric_gridworld(mdp, config.action_penalty)
    expert = expert_policies(config, mdp, goal_reward(mdp))
    n = config.noise_trajectory_count
    records = []
    for seed in config.seeds:
        try:
            reference = phi_embed(infer_reward(config, mdp, expert, n, seed), config.temperature)
        except NumericFailureError:
            reference = None
        for eps in config.noise_levels:
            start = time.perf_counter()
            if reference is None:
                records += _failed("noise", eps, seed, ("wp_noise",), start)
                continue
            try:
                noisy = perturb_policy(expert, NoiseModel(eps), seed)
                inferred = infer_reward(config, mdp, noisy, n, seed)
                wp, converged = _distance(config, metric, reference,
                                          phi_embed(inferred, config.temperature))
            except NumericFailureError:
                records += _failed("noise", eps, seed, ("wp_noise",), start)
                continue
            records.append(ResultRecord("noise", eps, seed, "wp_noise", wp, converged,
                                        (time.perf_counter() - start) * 1e3))
    records += _envelope_records(config.noise_levels, records)
    return sort_records(records)


def _envelope_records(epsilons, records):
    maxima, flags = [], []
    for eps in epsilons:
        rows = [r for r in records if r.variable == eps and np.isfinite(r.value)]
        maxima.append(max((r.value for r in rows), default=float("nan")))
        flags.append(bool(rows) and all(r.converged for r in records if r.variable == eps))
    finite = [i for i, m in enumerate(maxima) if np.isfinite(m)]
    fitted = np.full(len(epsilons), np.nan)
    if finite:
        fitted[finite] = noise_envelope([epsilons[i] for i in finite], [maxima[i] for i in finite])
    out = []
    for eps, peak, c_hat, ok in zip(epsilons, maxima, fitted, flags):
        out.append(ResultRecord("noise", eps, ENVELOPE_SEED, "wp_noise_max", peak, ok, 0.0))
        out.append(ResultRecord("noise", eps, ENVELOPE_SEED, "c_hat", float(c_hat), ok, 0.0))
    return out


def equivalent_measures(config, mdp, seed):
    """Policy-equivalent rewards for one replicate and their embeddings."""
    rewards = generate_equivalent_rewards(
        mdp, goal_reward(mdp), config.set_size, method=config.generation_method,
        noise_scale=config.noise_scale, seed=derive_seed(config.master_seed, seed, REWARD_SET_STREAM),
        bound=config.irl.bound)
    return rewards, [phi_embed(r, config.temperature) for r in rewards]


def run_dimensionality_experiment(config):
    """Average pairwise distance and reward variance of equivalent sets per size.

    Set size, noise scale, temperature and solver settings are the same at
    every size, so differences come from the dimension alone.
    """
    _require(config, "dim_sweep")
    records = []
    for size in config.grid_sizes:
        mdp = _gridworld(config, size)
        metric = ground_metric_gridworld(mdp, config.action_penalty)
        d = float(mdp.dimension())
        for seed in config.seeds:
            start = time.perf_counter()
            try:
                rewards, measures = equivalent_measures(config, mdp, seed)
                if config.solver == "exact":
                    matrix = pairwise_distance_matrix(measures, metric, config.ot.order_p)
                    converged = True
                else:
                    matrix, converged = pairwise_sinkhorn(measures, metric, config.ot)
                delta = float(matrix[np.triu_indices(len(measures), 1)].mean())
                variance = compute_reward_variance(rewards)
            except (GenerationFailureError, NumericFailureError):
                records += _failed("dim_sweep", d, seed, ("delta_d", "variance_d"), start)
                continue
            ms = (time.perf_counter() - start) * 1e3
            records.append(ResultRecord("dim_sweep", d, seed, "delta_d", delta, converged, ms))
            records.append(ResultRecord("dim_sweep", d, seed, "variance_d", variance, True, ms))
    return sort_records(records)


CENTROID_METRICS = ("medoid_index", "medoid_sum_wp", "medoid_objective",
                    "barycenter_objective", "multistart_spread")


def run_centroid_analysis(config):
    """Medoid and barycenter of each replicate's embedded equivalence set.

    ``medoid_sum_wp`` is the medoid's own criterion, the sum of ``W_p`` to
    all members. ``medoid_objective`` and ``barycenter_objective`` are both
    ``(1/m) sum_i W_p(candidate, mu_i) ** p`` from the exact solver, so they
    can be compared directly.
    """
    _require(config, "centroid")
    p = config.ot.order_p
    records = []
    for size in config.grid_sizes:
        mdp = _gridworld(config, size)
        metric = ground_metric_gridworld(mdp, config.action_penalty)
        d = float(mdp.dimension())
        for seed in config.seeds:
            start = time.perf_counter()
            try:
                _, measures = equivalent_measures(config, mdp, seed)
                weights = np.full(len(measures), 1.0 / len(measures))
                index, sum_wp = medoid_centroid(measures, metric, p)
                medoid_obj = barycenter_objective(measures[index], measures, weights, metric, p)
                spread, bary, converged = multistart_spread(
                    measures, weights, metric, config.ot, config.multistart_starts,
                    derive_seed(config.master_seed, seed, MULTISTART_STREAM), config.barycenter_method)
                bary_obj = barycenter_objective(bary.measure, measures, weights, metric, p)
            except (GenerationFailureError, NumericFailureError):
                records += _failed("centroid", d, seed, CENTROID_METRICS, start)
                continue
            ms = (time.perf_counter() - start) * 1e3
            values = (float(index), sum_wp, medoid_obj, bary_obj, spread)
            flags = (True, True, True, converged, converged)
            records += [ResultRecord("centroid", d, seed, m, v, f, ms)
                        for m, v, f in zip(CENTROID_METRICS, values, flags)]
    return sort_records(records)


RUNNERS = {
    "converge": run_convergence_experiment,
    "noise": run_noise_experiment,
    "dim_sweep": run_dimensionality_experiment,
    "centroid": run_centroid_analysis,
}


def run_experiment(config):
    return RUNNERS[config.kind](config)


def median_by_variable(records, metric):
    """``{variable: median value}`` over finite records of ``metric``."""
    groups = {}
    for r in records:
        if r.metric == metric and r.seed != ENVELOPE_SEED and np.isfinite(r.value):
            groups.setdefault(r.variable, []).append(r.value)
    return {v: float(np.median(vals)) for v, vals in sorted(groups.items())}
