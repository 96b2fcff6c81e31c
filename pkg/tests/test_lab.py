import itertools
import math

import numpy as np
import pytest

from oracles import random_measure
from wassreward import lab
from wassreward.exceptions import InvalidArgumentError, NumericFailureError
from wassreward.irl import IrlConfig
from wassreward.lab import (
    ENVELOPE_SEED,
    ExperimentConfig,
    NoiseModel,
    ResultRecord,
    average_pairwise_distance,
    derive_seed,
    median_by_variable,
    perturb_policy,
    run_experiment,
    sort_records,
)
from wassreward.mdp import Policy, build_gridworld
from wassreward.ot import exact_wasserstein, ground_metric_gridworld

FAST_IRL = IrlConfig(iterations=25, horizon=10)


def small(kind, **changes):
    base = dict(kind=kind, grid_sizes=((2, 2),), seeds=(0, 1), irl=FAST_IRL,
                trajectory_counts=(4, 16), noise_trajectory_count=8, set_size=4,
                multistart_starts=2)
    base.update(changes)
    return ExperimentConfig(**base)


def test_derive_seed_is_stable_and_separates_streams():
    assert derive_seed(0, 1, 0) == derive_seed(0, 1, 0)
    assert len({derive_seed(0, r, s) for r in range(5) for s in range(3)}) == 15


@pytest.mark.parametrize("key, value", [
    ("kind", "bogus"), ("grid_sizes", ((1, 1),)), ("slip_probability", 1.5), ("discount", 1.0),
    ("trajectory_counts", (64, 8)), ("noise_levels", (0.0, 1.0)), ("set_size", 1),
    ("seeds", (1, 1)), ("temperature", 0.0), ("expert", "random"), ("solver", "lp"),
])
def test_config_errors_name_the_key(key, value):
    with pytest.raises(InvalidArgumentError, match=repr(key)):
        ExperimentConfig(**{key: value})


def test_config_kind_specific_rules():
    with pytest.raises(InvalidArgumentError, match="noise_levels"):
        ExperimentConfig(kind="noise", noise_levels=(0.1, 0.2))
    with pytest.raises(InvalidArgumentError, match="grid_sizes"):
        ExperimentConfig(kind="converge", grid_sizes=((2, 2), (3, 3)))


def test_config_round_trip_and_presets():
    config = ExperimentConfig.preset("dim_sweep")
    assert config.grid_sizes == ((2, 2), (3, 3), (4, 4))
    assert ExperimentConfig.from_dict(config.to_dict()) == config
    partial = ExperimentConfig.from_dict({"kind": "noise", "seeds": [3, 4], "ot": {"order_p": 1}})
    assert partial.seeds == (3, 4) and partial.ot.order_p == 1.0


@pytest.mark.parametrize("data, key", [
    ({"colour": 1}, "colour"), ({"set_size": "big"}, "set_size"), ({"set_size": 2.5}, "set_size"),
    ({"ot": {"reg": 1}}, "ot.reg"), ({"irl": {"horizon": 0}}, "irl"), ({"seeds": ["a"]}, "seeds"),
    ({"grid_sizes": [[2]]}, "grid_sizes"),
])
def test_from_dict_errors_name_the_key(data, key):
    with pytest.raises(InvalidArgumentError, match=key):
        ExperimentConfig.from_dict(data)


def test_perturb_policy_mixes_with_uniform():
    pi = Policy(np.eye(5)[[0, 3]])
    mixed = perturb_policy(pi, NoiseModel(0.2)).action_probabilities
    assert mixed[0].tolist() == pytest.approx([0.84, 0.04, 0.04, 0.04, 0.04], abs=1e-15)
    assert perturb_policy(pi, NoiseModel(0.0)) is pi
    array = np.full((3, 2, 5), 0.2)
    assert np.allclose(perturb_policy(array, NoiseModel(0.5)), 0.2)
    with pytest.raises(InvalidArgumentError):
        NoiseModel(1.0)
    with pytest.raises(InvalidArgumentError):
        NoiseModel(0.1, kind="gaussian")


def test_average_pairwise_distance_cases():
    metric = ground_metric_gridworld(build_gridworld(2, 2))
    rng = np.random.default_rng(0)
    mu, nu = random_measure(rng, 20), random_measure(rng, 20)
    assert average_pairwise_distance([mu, nu], metric) == pytest.approx(
        exact_wasserstein(mu, nu, metric)[0], abs=1e-12)
    assert average_pairwise_distance([mu, mu, mu], metric) <= 1e-12
    four = [random_measure(rng, 20) for _ in range(4)]
    brute = np.mean([exact_wasserstein(a, b, metric)[0] for a, b in itertools.combinations(four, 2)])
    assert average_pairwise_distance(four, metric) == pytest.approx(brute, abs=1e-12)
    with pytest.raises(InvalidArgumentError):
        average_pairwise_distance([mu], metric)


def test_convergence_run_shape_and_determinism():
    config = small("converge")
    records = run_experiment(config)
    assert len(records) == 2 * 2 * 2
    assert records == sort_records(records)
    again = run_experiment(config)
    assert [(r.variable, r.seed, r.metric, r.value) for r in records] == \
           [(r.variable, r.seed, r.metric, r.value) for r in again]
    assert all(r.value >= 0 and r.converged for r in records)


def test_noise_zero_reproduces_the_reference():
    records = run_experiment(small("noise", noise_levels=(0.0, 0.3)))
    zero = [r for r in records if r.variable == 0.0 and r.metric == "wp_noise"]
    assert [r.value for r in zero] == [0.0, 0.0]
    envelope = {(r.variable, r.metric): r.value for r in records if r.seed == ENVELOPE_SEED}
    assert envelope[(0.0, "c_hat")] <= envelope[(0.3, "c_hat")]
    peak = max(r.value for r in records if r.variable == 0.3 and r.metric == "wp_noise")
    assert envelope[(0.3, "wp_noise_max")] == peak


def test_dimensionality_and_centroid_runs():
    sweep = run_experiment(small("dim_sweep", grid_sizes=((1, 2), (2, 2))))
    assert sorted(median_by_variable(sweep, "delta_d")) == [10.0, 20.0]
    cent = run_experiment(small("centroid", seeds=(0,)))
    values = {r.metric: r.value for r in cent}
    assert set(values) == set(lab.CENTROID_METRICS)
    assert 0 <= values["medoid_index"] < 4
    assert values["barycenter_objective"] <= values["medoid_objective"] + 0.2 * math.log(20)


def test_numeric_failure_becomes_nan_record(monkeypatch):
    def explode(*args, **kwargs):
        raise NumericFailureError("diverged")
    monkeypatch.setattr(lab, "maxent_irl", explode)
    records = run_experiment(small("converge", seeds=(0,), trajectory_counts=(4,)))
    assert len(records) == 2
    assert all(math.isnan(r.value) and not r.converged for r in records)


def test_wrong_runner_for_kind():
    with pytest.raises(InvalidArgumentError):
        lab.run_convergence_experiment(small("noise"))


def test_records_sort_canonically():
    rows = [ResultRecord("noise", 0.1, 2, "wp_noise", 1.0, True, 3.0),
            ResultRecord("noise", 0.0, 5, "wp_noise", 0.0, True, 1.0),
            ResultRecord("noise", 0.1, -1, "c_hat", 1.0, True, 0.0)]
    assert [(r.variable, r.seed) for r in sort_records(rows)] == [(0.0, 5), (0.1, -1), (0.1, 2)]
    assert median_by_variable(rows, "wp_noise") == {0.0: 0.0, 0.1: 1.0}


def test_noise_at_zero_reuses_the_convergence_pipeline():
    converge = small("converge", trajectory_counts=(8,))
    noise = small("noise", noise_trajectory_count=8)
    mdp = lab._gridworld(converge, (2, 2))
    expert = lab.expert_policies(converge, mdp, lab.goal_reward(mdp))
    unperturbed = perturb_policy(expert, NoiseModel(0.0))
    for seed in (0, 1):
        a = lab.infer_reward(converge, mdp, expert, 8, seed)
        b = lab.infer_reward(noise, mdp, unperturbed, 8, seed)
        assert np.array_equal(a.values, b.values)


def test_large_sample_proxy_halves_the_small_sample_distance():
    base = ExperimentConfig.preset("converge")
    small_n = median_by_variable(run_experiment(base.replace(trajectory_counts=(8,))), "wp_to_true")[8.0]
    proxy = run_experiment(base.replace(trajectory_counts=(4096,), seeds=(0, 1, 2)))
    values = [r.value for r in proxy if r.metric == "wp_to_true"]
    assert len(values) == 3
    assert max(values) * 2 <= small_n
