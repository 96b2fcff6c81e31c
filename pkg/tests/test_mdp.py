import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wassreward.exceptions import InvalidArgumentError
from wassreward.mdp import (
    DOWN,
    RIGHT,
    STAY,
    UP,
    Policy,
    TabularMdp,
    build_gridworld,
    finite_horizon_soft_q,
    greedy_policy,
    sample_trajectories,
    soft_value_iteration,
    softmax_policy,
    value_iteration,
)


def single_state(num_actions=1, discount=0.9):
    return TabularMdp(np.ones((1, num_actions, 1)), np.ones(1), discount)


def test_gridworld_dimensions():
    mdp = build_gridworld(1, 2, 0.0, 0.9, [(0, 1)])
    assert (mdp.num_states, mdp.num_actions, mdp.dimension()) == (2, 5, 10)


def test_gridworld_deterministic_and_stay_self_loop():
    mdp = build_gridworld(3, 3, 0.0, 0.9, [(2, 2)])
    assert set(np.unique(mdp.transitions)) == {0.0, 1.0}
    for s in range(9):
        assert mdp.transitions[s, STAY, s] == 1.0


def test_gridworld_rows_are_distributions():
    mdp = build_gridworld(3, 3, 0.2, 0.9, [(2, 2)])
    sums = mdp.transitions.reshape(45, 9).sum(axis=1)
    assert np.max(np.abs(sums - 1.0)) <= 1e-12


def test_gridworld_move_semantics():
    mdp = build_gridworld(3, 2, 0.0, 0.9)
    # (1, 1) is state 4; UP goes to (1, 0) = 1, RIGHT to (2, 1) = 5, DOWN off-grid stays
    assert mdp.transitions[4, UP, 1] == 1.0
    assert mdp.transitions[4, RIGHT, 5] == 1.0
    assert mdp.transitions[4, DOWN, 4] == 1.0


def test_gridworld_slip_distribution():
    mdp = build_gridworld(3, 3, 0.2, 0.9)
    # from the center every executed move lands on a distinct cell
    row = mdp.transitions[4, RIGHT]
    assert row[5] == pytest.approx(0.8)
    for other in (1, 7, 3, 4):
        assert row[other] == pytest.approx(0.05)


def test_gridworld_goal_absorbing_and_start():
    mdp = build_gridworld(2, 2, 0.3, 0.9, [(1, 1)])
    assert np.all(mdp.transitions[3, :, 3] == 1.0)
    assert mdp.absorbing.tolist() == [False, False, False, True]
    assert np.allclose(mdp.start_distribution, [1 / 3, 1 / 3, 1 / 3, 0])
    fixed = build_gridworld(2, 2, goal_cells=[(1, 1)], start_cell=(0, 1))
    assert fixed.start_distribution.tolist() == [0, 0, 1, 0]


@pytest.mark.parametrize("args", [(0, 3), (1, 1), (2, 2, 0.0, 0.9, [(2, 0)])])
def test_gridworld_rejects_bad_input(args):
    with pytest.raises(InvalidArgumentError):
        build_gridworld(*args)


def test_value_iteration_zero_reward():
    mdp = build_gridworld(3, 3, 0.1)
    values, q = value_iteration(mdp, np.zeros(mdp.shape))
    assert np.all(np.abs(values) < 1e-10) and np.all(np.abs(q) < 1e-10)


def test_value_iteration_single_state_geometric_series():
    values, _ = value_iteration(single_state(3, 0.9), np.full((1, 3), 2.0))
    assert values[0] == pytest.approx(2.0 / 0.1, abs=1e-8)


def test_value_iteration_goal_adjacent_unrolled():
    mdp = build_gridworld(3, 3, 0.0, 0.9, [(2, 2)])
    reward = np.zeros(mdp.shape)
    reward[8] = 1.0
    values, _ = value_iteration(mdp, reward)
    # V(goal) = 1 / (1 - 0.9); one step away the first reward comes after one transition
    assert values[8] == pytest.approx(10.0, abs=1e-8)
    assert values[5] == pytest.approx(0.9 * values[8], abs=1e-8)
    assert values[7] == pytest.approx(0.9 * values[8], abs=1e-8)
    assert values[4] == pytest.approx(0.81 * values[8], abs=1e-8)
    assert values[0] == pytest.approx(0.9 ** 4 * values[8], abs=1e-8)


def test_value_iteration_rejects_bad_tolerance():
    with pytest.raises(InvalidArgumentError):
        value_iteration(single_state(), np.zeros((1, 1)), tolerance=0.0)


def _values_of_all_policies(mdp, reward, chunk=200_000):
    """Discounted values of every deterministic policy, by pointer doubling."""
    S, A = mdp.shape
    dest = np.argmax(mdp.transitions, axis=2)  # deterministic dynamics
    best = np.full(S, -np.inf)
    all_policies = np.array(list(itertools.product(range(A), repeat=S)), dtype=np.int8)
    for start in range(0, len(all_policies), chunk):
        acts = all_policies[start:start + chunk].astype(int)
        nxt = dest[np.arange(S), acts]
        total = reward[np.arange(S), acts]
        scale = mdp.discount
        # after k doublings total covers 2**k steps; 0.9**256 < 1e-11
        for _ in range(8):
            total = total + scale * np.take_along_axis(total, nxt, axis=1)
            nxt = np.take_along_axis(nxt, nxt, axis=1)
            scale = scale * scale
        best = np.maximum(best, total.max(axis=0))
    return best


def test_greedy_policy_optimal_against_all_policies():
    mdp = build_gridworld(3, 3, 0.0, 0.9, [(2, 2)])
    reward = np.zeros(mdp.shape)
    reward[8] = 1.0
    values, q = value_iteration(mdp, reward)
    best = _values_of_all_policies(mdp, reward)
    assert np.max(np.abs(best - values)) < 1e-8
    # the greedy policy attains the optimum and moves toward the goal
    policy = greedy_policy(q).actions()
    assert policy[0] == DOWN and policy[2] == DOWN and policy[6] == RIGHT


def test_greedy_policy_ties_and_rows():
    pi = greedy_policy(np.array([[0, 1, 0, 0, 0], [0, 0, 0, 0, 0]], dtype=float))
    assert pi.actions().tolist() == [1, 0]
    assert pi.is_deterministic


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=5, max_size=5), st.floats(-100, 100))
def test_greedy_policy_shift_invariant(row, shift):
    q = np.array([row])
    assert greedy_policy(q).actions()[0] == greedy_policy(q + shift).actions()[0]


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3), st.integers(2, 3), st.floats(0.0, 0.5), st.floats(0.1, 0.95),
       st.integers(0, 2**31 - 1))
def test_value_iteration_bellman_residual(width, height, slip, discount, seed):
    mdp = build_gridworld(width, height, slip, discount, [(0, 0)])
    reward = np.random.default_rng(seed).normal(size=mdp.shape)
    values, q = value_iteration(mdp, reward, tolerance=1e-10)
    backup = (reward + discount * mdp.transitions @ values).max(axis=1)
    assert np.max(np.abs(backup - values)) < 1e-10
    assert np.allclose(q.max(axis=1), backup, atol=1e-10)


def test_soft_value_iteration_trivial_cases():
    q = soft_value_iteration(single_state(1), np.zeros((1, 1)))
    assert abs(q[0, 0]) < 1e-9
    q = soft_value_iteration(single_state(2), np.zeros((1, 2)))
    assert np.allclose(softmax_policy(q).action_probabilities, [[0.5, 0.5]], atol=1e-12)


def test_soft_value_iteration_two_state_chain():
    P = np.zeros((2, 2, 2))
    P[0, 0, 0] = P[0, 1, 1] = P[1, 0, 1] = P[1, 1, 0] = 1.0
    mdp = TabularMdp(P, np.array([1.0, 0.0]), 0.8)
    reward = np.array([[0.3, -0.2], [1.0, 0.1]])
    q = soft_value_iteration(mdp, reward)
    # independent reference: plain fixed-point iteration of V = log sum exp(R + gamma P V)
    v = np.zeros(2)
    for _ in range(200):
        v = np.log(np.exp(reward + 0.8 * P @ v).sum(axis=1))
    assert np.allclose(q, reward + 0.8 * P @ v, atol=1e-12)
    rows = softmax_policy(q).action_probabilities.sum(axis=1)
    assert np.max(np.abs(rows - 1)) <= 1e-12


def test_finite_horizon_soft_q_single_state():
    q = finite_horizon_soft_q(single_state(2), np.zeros((1, 2)), 3)
    # V_t = log 2 * (number of remaining steps)
    assert np.allclose(q[:, 0, 0], [2 * np.log(2), np.log(2), 0.0])


def test_sample_trajectories_deterministic_world():
    mdp = build_gridworld(3, 3, 0.0, 0.9, [(2, 2)], start_cell=(0, 0))
    pi = np.zeros(mdp.shape)
    pi[:, RIGHT] = 1.0
    pi[[2, 5], DOWN], pi[[2, 5], RIGHT] = 1.0, 0.0
    trajectories = sample_trajectories(mdp, Policy(pi), 5, horizon=10, seed=3)
    assert len({t.steps for t in trajectories}) == 1
    assert trajectories[0].steps == ((0, RIGHT), (1, RIGHT), (2, DOWN), (5, DOWN), (8, RIGHT))


def test_sample_trajectories_pure_and_bounded():
    mdp = build_gridworld(3, 3, 0.2, 0.9, [(2, 2)])
    pi = Policy(np.full(mdp.shape, 0.2))
    first = sample_trajectories(mdp, pi, 50, horizon=7, seed=11)
    second = sample_trajectories(mdp, pi, 50, horizon=7, seed=11)
    assert [t.steps for t in first] == [t.steps for t in second]
    assert len(first) == 50
    for t in first:
        assert len(t) == 7 or mdp.absorbing[t.steps[-1][0]]


def test_sample_trajectories_time_varying_policy():
    mdp = build_gridworld(2, 1, 0.0, 0.9, start_cell=(0, 0))
    pis = np.zeros((2,) + mdp.shape)
    pis[0, :, RIGHT] = 1.0
    pis[1, :, STAY] = 1.0
    traj = sample_trajectories(mdp, pis, 1, horizon=2)[0]
    assert traj.steps == ((0, RIGHT), (1, STAY))


def test_sample_trajectories_rejects_zero_count():
    mdp = build_gridworld(2, 2)
    with pytest.raises(InvalidArgumentError):
        sample_trajectories(mdp, Policy(np.full(mdp.shape, 0.2)), 0)


def test_sample_trajectories_slip_frequencies():
    mdp = build_gridworld(3, 3, 0.2, 0.9, start_cell=(1, 1))
    pi = np.zeros(mdp.shape)
    pi[:, RIGHT] = 1.0
    n = 10_000
    steps = sample_trajectories(mdp, Policy(pi), n, horizon=2, seed=5)
    counts = np.bincount([t.steps[1][0] for t in steps], minlength=9)
    p = mdp.transitions[4, RIGHT]
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) <= 3 * sigma + 1e-9)
