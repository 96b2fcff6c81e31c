"""Quick oracle checks of every solver against an independent reference."""

from __future__ import annotations

import itertools
import time

import numpy as np
from scipy.optimize import linprog

from .irl import (
    IrlConfig,
    empirical_visitation,
    expected_visitation,
    maxent_gradient,
    maxent_log_likelihood,
    soft_policies,
)
from .lab import NoiseModel, average_pairwise_distance, perturb_policy
from .mdp import build_gridworld, greedy_policy, sample_trajectories, value_iteration
from .ot import (
    GroundMetric,
    OtConfig,
    barycenter_objective,
    exact_wasserstein,
    ground_metric_gridworld,
    medoid_centroid,
    sinkhorn_distance,
    triangle_violation,
    wasserstein_barycenter,
)
from .rewards import DiscreteMeasure, potential_shaping, verify_policy_equivalence


def lp_transport_cost(a, b, cost):
    """Optimal transport cost from a generic LP solver."""
    n, m = cost.shape
    rows = np.kron(np.eye(n), np.ones((1, m)))
    cols = np.kron(np.ones((1, n)), np.eye(m))
    res = linprog(cost.ravel(), A_eq=np.vstack([rows, cols]), b_eq=np.concatenate([a, b]),
                  bounds=(0, None), method="highs")
    return float(res.fun)


def random_measure(rng, size, floor=0.0):
    w = rng.random(size) + floor
    return DiscreteMeasure.normalized(w)


def random_metric(rng, size):
    points = rng.random((size, 2))
    return GroundMetric(np.abs(points[:, None, :] - points[None, :, :]).sum(axis=2))


def check_exact_against_lp(rng):
    worst = 0.0
    for _ in range(20):
        size = int(rng.integers(2, 15))
        mu, nu, metric = random_measure(rng, size), random_measure(rng, size), random_metric(rng, size)
        value = exact_wasserstein(mu, nu, metric, 2.0)[0] ** 2
        worst = max(worst, abs(value - lp_transport_cost(mu.weights, nu.weights, metric.powered(2))))
    return worst < 1e-9, f"max |exact - LP| = {worst:.2e}"


def check_sinkhorn_against_exact(rng):
    worst = 0.0
    for _ in range(10):
        size = int(rng.integers(3, 12))
        mu, nu = random_measure(rng, size, 0.1), random_measure(rng, size, 0.1)
        metric = random_metric(rng, size)
        exact = exact_wasserstein(mu, nu, metric, 1.0)[0]
        approx = sinkhorn_distance(mu, nu, metric, OtConfig(order_p=1.0, reg_epsilon=1e-3 * metric.diameter))
        worst = max(worst, abs(approx.value - exact) / max(exact, 1e-12))
    return worst < 1e-2, f"max relative gap = {worst:.2e}"


def check_metric_triangle(rng):
    mdp = build_gridworld(2, 2, goal_cells=[(1, 1)])
    violation = triangle_violation(ground_metric_gridworld(mdp).costs)
    return violation <= 1e-12, f"largest triangle violation = {violation:.2e}"


def check_medoid_enumeration(rng):
    ok = True
    for _ in range(5):
        size, count = 6, int(rng.integers(2, 6))
        metric = random_metric(rng, size)
        measures = [random_measure(rng, size) for _ in range(count)]
        index, _ = medoid_centroid(measures, metric, 2.0)
        sums = [sum(exact_wasserstein(m, other, metric, 2.0)[0] for other in measures) for m in measures]
        ok &= abs(sums[index] - min(sums)) < 1e-12
    return bool(ok), "medoid equals the enumerated minimizer"


def check_barycenter_slack(rng):
    size, config = 8, OtConfig(reg_epsilon=0.05)
    metric = random_metric(rng, size)
    measures = [random_measure(rng, size, 0.2) for _ in range(4)]
    weights = np.full(4, 0.25)
    bary = wasserstein_barycenter(measures, weights, metric, config)
    objective = barycenter_objective(bary.measure, measures, weights, metric, 2.0)
    medoid = min(barycenter_objective(m, measures, weights, metric, 2.0) for m in measures)
    slack = config.reg_epsilon * np.log(size)
    return bary.converged and objective <= medoid + slack, \
        f"barycenter {objective:.4g} vs best member {medoid:.4g} + {slack:.3g}"


def _policy_value(mdp, actions, reward):
    S = mdp.num_states
    P = mdp.transitions[np.arange(S), actions]
    r = reward[np.arange(S), actions]
    return np.linalg.solve(np.eye(S) - mdp.discount * P, r)


def check_value_iteration_enumeration(rng):
    mdp = build_gridworld(2, 2, slip_probability=0.2, goal_cells=[(1, 1)])
    reward = rng.normal(size=mdp.shape)
    values, q = value_iteration(mdp, reward)
    best = np.max([_policy_value(mdp, np.array(acts), reward)
                   for acts in itertools.product(range(mdp.num_actions), repeat=mdp.num_states)], axis=0)
    err = float(np.max(np.abs(values - best)))
    greedy_value = _policy_value(mdp, greedy_policy(q).actions(), reward)
    return err < 1e-8 and np.allclose(greedy_value, best, atol=1e-8), \
        f"max |V - best enumerated policy value| = {err:.2e}"


def check_gradient_finite_difference(rng):
    mdp = build_gridworld(3, 3, slip_probability=0.1, goal_cells=[(2, 2)])
    config = IrlConfig(horizon=20)
    empirical = DiscreteMeasure.normalized(rng.random(mdp.dimension())).weights * 5
    reward = rng.normal(scale=0.5, size=mdp.shape)
    grad = maxent_gradient(mdp, reward, empirical, config).reshape(mdp.shape)
    worst, h = 0.0, 1e-5
    for flat in rng.choice(mdp.dimension(), 10, replace=False):
        s, a = divmod(int(flat), mdp.num_actions)
        up, down = reward.copy(), reward.copy()
        up[s, a] += h
        down[s, a] -= h
        fd = (maxent_log_likelihood(mdp, up, empirical, config)
              - maxent_log_likelihood(mdp, down, empirical, config)) / (2 * h)
        worst = max(worst, abs(fd - grad[s, a]) / max(abs(fd), abs(grad[s, a]), 1e-8))
    return worst < 1e-4, f"max relative gradient error = {worst:.2e}"


def check_visitation_monte_carlo(rng):
    mdp = build_gridworld(3, 3, slip_probability=0.2, goal_cells=[(2, 2)])
    config = IrlConfig(horizon=15)
    reward = rng.normal(scale=0.5, size=mdp.shape)
    expected = expected_visitation(mdp, reward, config)
    pis, _ = soft_policies(mdp, reward, config.horizon)
    count = 20_000
    per_episode = np.array([empirical_visitation([t], mdp)
                            for t in sample_trajectories(mdp, pis, count, config.horizon, seed=1)])
    stderr = per_episode.std(axis=0) / np.sqrt(count)
    z = np.abs(per_episode.mean(axis=0) - expected) / np.maximum(stderr, 1e-12)
    # 45 coordinates: 4.5 standard errors keeps the family-wise false alarm rate tiny
    return float(z.max()) < 4.5, f"max deviation = {z.max():.2f} standard errors"


def check_shaping_invariance(rng):
    ok = True
    for _ in range(10):
        mdp = build_gridworld(3, 3, slip_probability=0.1, goal_cells=[(2, 2)])
        reward = rng.normal(size=mdp.shape)
        shaped = potential_shaping(mdp, reward, rng.uniform(-1, 1, mdp.num_states))
        ok &= verify_policy_equivalence(mdp, reward, shaped).name != "DISTINCT"
    return bool(ok), "greedy policies agree after shaping"


def check_average_pairwise(rng):
    metric = random_metric(rng, 5)
    measures = [random_measure(rng, 5) for _ in range(4)]
    pairs = list(itertools.combinations(measures, 2))
    brute = sum(exact_wasserstein(a, b, metric, 1.0)[0] for a, b in pairs) / len(pairs)
    value = average_pairwise_distance(measures, metric, 1.0)
    return abs(value - brute) < 1e-12, f"|average - enumeration| = {abs(value - brute):.1e}"


def check_uniform_mixing(rng):
    pi = np.zeros((1, 5))
    pi[0, 2] = 1.0
    mixed = perturb_policy(pi, NoiseModel(0.2))
    expect = np.full(5, 0.04)
    expect[2] = 0.84
    return bool(np.allclose(mixed[0], expect, atol=1e-15)), "epsilon 0.2 gives 0.84 / 0.04"


CHECKS = (
    ("exact transport vs LP", check_exact_against_lp),
    ("sinkhorn vs exact transport", check_sinkhorn_against_exact),
    ("ground metric triangle inequality", check_metric_triangle),
    ("medoid vs enumeration", check_medoid_enumeration),
    ("barycenter objective slack", check_barycenter_slack),
    ("value iteration vs policy enumeration", check_value_iteration_enumeration),
    ("MaxEnt gradient vs finite differences", check_gradient_finite_difference),
    ("expected visitation vs Monte Carlo", check_visitation_monte_carlo),
    ("potential shaping keeps the greedy policy", check_shaping_invariance),
    ("average pairwise distance vs enumeration", check_average_pairwise),
    ("uniform mixing noise", check_uniform_mixing),
)


def run_selftest(seed=0, out=print):
    """Run every check; returns True when all pass."""
    rng = np.random.default_rng(seed)
    all_ok = True
    for name, check in CHECKS:
        start = time.perf_counter()
        ok, detail = check(rng)
        all_ok &= bool(ok)
        out(f"{'PASS' if ok else 'FAIL'}  {name}: {detail} ({time.perf_counter() - start:.1f}s)")
    return all_ok
