"""Tabular MDPs, gridworld construction, planning and trajectory sampling.

Gridworld conventions
---------------------
Cells are addressed as ``(x, y)`` with ``0 <= x < width`` and
``0 <= y < height``; the state index of a cell is ``y * width + x``.
Actions are ``UP, DOWN, LEFT, RIGHT, STAY`` = ``0, 1, 2, 3, 4`` where ``UP``
decreases ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ._numeric import logsumexp
from .exceptions import InvalidArgumentError, NumericFailureError

UP, DOWN, LEFT, RIGHT, STAY = range(5)
ACTION_NAMES = ("up", "down", "left", "right", "stay")
_MOVES = ((0, -1), (0, 1), (-1, 0), (1, 0), (0, 0))

_STOCHASTIC_ATOL = 1e-12


def _frozen(array, dtype=float):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GridLayout:
    width: int
    height: int
    goal_cells: Tuple[Tuple[int, int], ...] = ()

    def state_index(self, cell):
        x, y = cell
        return y * self.width + x

    def cell(self, state):
        return state % self.width, state // self.width

    def coordinates(self):
        """(num_states, 2) integer array of ``(x, y)`` per state."""
        idx = np.arange(self.width * self.height)
        return np.stack([idx % self.width, idx // self.width], axis=1)


@dataclass(frozen=True, eq=False)
class TabularMdp:
    """Finite MDP with an explicit ``(S, A, S)`` transition tensor.

    ``absorbing`` marks terminal states: they self-loop under every action and
    episodes stop right after the step taken in them.
    """

    transitions: np.ndarray
    start_distribution: np.ndarray
    discount: float
    absorbing: Optional[np.ndarray] = None
    layout: Optional[GridLayout] = None
    num_states: int = field(init=False)
    num_actions: int = field(init=False)

    def __post_init__(self):
        P = np.asarray(self.transitions, dtype=float)
        if P.ndim != 3 or P.shape[0] != P.shape[2] or P.shape[0] < 1 or P.shape[1] < 1:
            raise InvalidArgumentError(f"transitions must have shape (S, A, S), got {P.shape}")
        if np.any(P < 0) or not np.allclose(P.sum(axis=2), 1.0, rtol=0, atol=_STOCHASTIC_ATOL):
            raise InvalidArgumentError("every transition row must be a probability vector")
        p0 = np.asarray(self.start_distribution, dtype=float)
        if p0.shape != (P.shape[0],) or np.any(p0 < 0) or abs(p0.sum() - 1.0) > _STOCHASTIC_ATOL:
            raise InvalidArgumentError("start_distribution must be a probability vector over states")
        if not 0.0 <= self.discount < 1.0:
            raise InvalidArgumentError(f"discount must lie in [0, 1), got {self.discount}")
        absorbing = np.zeros(P.shape[0], dtype=bool) if self.absorbing is None else self.absorbing
        absorbing = np.asarray(absorbing, dtype=bool)
        if absorbing.shape != (P.shape[0],):
            raise InvalidArgumentError("absorbing mask must have one entry per state")
        if self.layout is not None and self.layout.width * self.layout.height != P.shape[0]:
            raise InvalidArgumentError("layout does not match the number of states")
        object.__setattr__(self, "transitions", _frozen(P))
        object.__setattr__(self, "start_distribution", _frozen(p0))
        object.__setattr__(self, "absorbing", _frozen(absorbing, dtype=bool))
        object.__setattr__(self, "discount", float(self.discount))
        object.__setattr__(self, "num_states", P.shape[0])
        object.__setattr__(self, "num_actions", P.shape[1])

    def dimension(self):
        """Number of state-action pairs, ``|S| * |A|``."""
        return self.num_states * self.num_actions

    @property
    def shape(self):
        return self.num_states, self.num_actions


@dataclass(frozen=True, eq=False)
class Policy:
    action_probabilities: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.action_probabilities, dtype=float)
        if pi.ndim != 2:
            raise InvalidArgumentError("policy must be a (num_states, num_actions) matrix")
        if np.any(pi < 0) or not np.allclose(pi.sum(axis=1), 1.0, rtol=0, atol=_STOCHASTIC_ATOL):
            raise InvalidArgumentError("policy rows must be probability vectors")
        object.__setattr__(self, "action_probabilities", _frozen(pi))

    @property
    def is_deterministic(self):
        return bool(np.all(self.action_probabilities.max(axis=1) == 1.0))

    def actions(self):
        """Most probable action per state."""
        return np.argmax(self.action_probabilities, axis=1)


@dataclass(frozen=True)
class Trajectory:
    steps: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if len(self.steps) == 0:
            raise InvalidArgumentError("a trajectory needs at least one step")
        object.__setattr__(self, "steps", tuple((int(s), int(a)) for s, a in self.steps))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def reward_matrix(reward, mdp=None):
    """Return the ``(S, A)`` float array behind a reward table or array."""
    values = np.asarray(getattr(reward, "values", reward), dtype=float)
    if mdp is not None and values.shape != mdp.shape:
        raise InvalidArgumentError(f"reward shape {values.shape} does not match MDP shape {mdp.shape}")
    return values


def build_gridworld(width, height, slip_probability=0.0, discount=0.9, goal_cells=(), start_cell=None):
    """Five-action gridworld with slippery moves and absorbing goals.

    The intended move succeeds with probability ``1 - slip_probability``;
    otherwise one of the other four actions is executed uniformly at random.
    Moves that would leave the grid keep the agent in place. Episodes start
    uniformly over non-goal cells unless ``start_cell`` is given.
    """
    if width < 1 or height < 1 or width * height < 2:
        raise InvalidArgumentError(f"grid {width}x{height} needs at least two cells")
    if not 0.0 <= slip_probability < 1.0:
        raise InvalidArgumentError(f"slip_probability must lie in [0, 1), got {slip_probability}")
    goals = tuple((int(x), int(y)) for x, y in goal_cells)
    for x, y in goals:
        if not (0 <= x < width and 0 <= y < height):
            raise InvalidArgumentError(f"goal cell {(x, y)} outside a {width}x{height} grid")
    layout = GridLayout(int(width), int(height), goals)
    n_states = width * height
    n_actions = len(_MOVES)

    # dest[s, m]: cell reached from s when move m is executed
    dest = np.empty((n_states, n_actions), dtype=int)
    for s in range(n_states):
        x, y = layout.cell(s)
        for m, (dx, dy) in enumerate(_MOVES):
            nx, ny = x + dx, y + dy
            if not (0 <= nx < width and 0 <= ny < height):
                nx, ny = x, y
            dest[s, m] = layout.state_index((nx, ny))

    # executed-move distribution for each intended action
    execute = np.full((n_actions, n_actions), slip_probability / (n_actions - 1))
    np.fill_diagonal(execute, 1.0 - slip_probability)

    P = np.zeros((n_states, n_actions, n_states))
    for s in range(n_states):
        for a in range(n_actions):
            np.add.at(P[s, a], dest[s], execute[a])

    absorbing = np.zeros(n_states, dtype=bool)
    for cell in goals:
        g = layout.state_index(cell)
        absorbing[g] = True
        P[g] = 0.0
        P[g, :, g] = 1.0

    if start_cell is not None:
        start = np.zeros(n_states)
        start[layout.state_index(start_cell)] = 1.0
    else:
        start = (~absorbing).astype(float)
        if start.sum() == 0:
            start[:] = 1.0
        start /= start.sum()
    return TabularMdp(P, start, discount, absorbing=absorbing, layout=layout)


def value_iteration(mdp, reward, tolerance=1e-10, max_iterations=100_000):
    """Discounted value iteration.

    Returns ``(state_values, q_values)`` with ``q = R + discount * P V``.
    Stops once successive iterates differ by less than ``tolerance`` in sup
    norm, which bounds the Bellman residual of the returned values by
    ``discount * tolerance``.
    """
    if tolerance <= 0:
        raise InvalidArgumentError(f"tolerance must be positive, got {tolerance}")
    R = reward_matrix(reward, mdp)
    P, gamma = mdp.transitions, mdp.discount
    V = np.zeros(mdp.num_states)
    for _ in range(max_iterations):
        V_new = (R + gamma * P @ V).max(axis=1)
        delta = np.max(np.abs(V_new - V))
        V = V_new
        if delta < tolerance:
            break
    else:
        raise NumericFailureError(f"value iteration did not converge in {max_iterations} sweeps")
    return V, R + gamma * P @ V


def greedy_policy(q_values):
    """Deterministic argmax policy; ties go to the lowest action index."""
    q = np.asarray(q_values, dtype=float)
    if not np.all(np.isfinite(q)):
        raise InvalidArgumentError("q_values must be finite")
    pi = np.zeros_like(q)
    pi[np.arange(q.shape[0]), np.argmax(q, axis=1)] = 1.0
    return Policy(pi)


def softmax_policy(soft_q):
    """Stochastic policy with rows ``softmax(soft_q[s])``."""
    q = np.asarray(soft_q, dtype=float)
    return Policy(np.exp(q - logsumexp(q, axis=-1, keepdims=True)))


def soft_value_iteration(mdp, reward, tolerance=1e-10, max_iterations=100_000):
    """Discounted soft (log-sum-exp) Bellman fixed point; returns soft Q.

    Raises NumericFailureError if the sweep residual grows for 10 consecutive
    sweeps or the sweep budget runs out.
    """
    if tolerance <= 0:
        raise InvalidArgumentError(f"tolerance must be positive, got {tolerance}")
    R = reward_matrix(reward, mdp)
    P, gamma = mdp.transitions, mdp.discount
    V = np.zeros(mdp.num_states)
    previous, growth = np.inf, 0
    for _ in range(max_iterations):
        V_new = logsumexp(R + gamma * P @ V, axis=1)
        delta = np.max(np.abs(V_new - V))
        V = V_new
        if not np.isfinite(delta):
            raise NumericFailureError("soft value iteration produced non-finite values")
        if delta < tolerance:
            return R + gamma * P @ V
        growth = growth + 1 if delta > previous else 0
        if growth >= 10:
            raise NumericFailureError("soft value iteration residual grew for 10 consecutive sweeps")
        previous = delta
    raise NumericFailureError(f"soft value iteration did not converge in {max_iterations} sweeps")


def finite_horizon_soft_q(mdp, reward, horizon):
    """Undiscounted soft backward pass over ``horizon`` steps.

    Returns an ``(horizon, S, A)`` array. Absorbing states end the episode
    after the step taken in them, so their soft Q carries no continuation.
    """
    if horizon < 1:
        raise InvalidArgumentError(f"horizon must be positive, got {horizon}")
    R = reward_matrix(reward, mdp)
    P = mdp.transitions
    live = (~mdp.absorbing).astype(float)[:, None]
    Q = np.empty((horizon,) + R.shape)
    V = np.zeros(mdp.num_states)
    for t in range(horizon - 1, -1, -1):
        Q[t] = R + live * (P @ V)
        V = logsumexp(Q[t], axis=1)
    return Q


def sample_trajectories(mdp, policy, count, horizon=50, seed=0):
    """Sample ``count`` episodes of at most ``horizon`` steps.

    ``policy`` is a stationary :class:`Policy` or ``(S, A)`` array, or a
    time-varying ``(T, S, A)`` array with ``T >= horizon`` (row ``t`` is used
    at step ``t``). An episode ends early right after the step taken in an
    absorbing state. All trajectories advance in lockstep and every step consumes the same
    number of uniforms, so the output depends only on the arguments.
    """
    if count < 1:
        raise InvalidArgumentError(f"count must be positive, got {count}")
    if horizon < 1:
        raise InvalidArgumentError(f"horizon must be positive, got {horizon}")
    pi = policy.action_probabilities if isinstance(policy, Policy) else np.asarray(policy, dtype=float)
    if pi.shape == mdp.shape:
        pi = pi[None]
    elif pi.ndim != 3 or pi.shape[1:] != mdp.shape or pi.shape[0] < horizon:
        raise InvalidArgumentError(f"policy shape {pi.shape} does not match MDP shape {mdp.shape}")
    rng = np.random.default_rng(seed)
    start_cdf = np.cumsum(mdp.start_distribution)
    action_cdf = np.cumsum(pi, axis=2)
    next_cdf = np.cumsum(mdp.transitions, axis=2)
    n_s, n_a = mdp.shape

    def draw(cdf_rows, u):
        return np.minimum((cdf_rows <= u[:, None]).sum(axis=1), cdf_rows.shape[1] - 1)

    states = draw(np.broadcast_to(start_cdf, (count, n_s)), rng.random(count))
    alive = np.ones(count, dtype=bool)
    steps = [[] for _ in range(count)]
    for t in range(horizon):
        actions = draw(action_cdf[min(t, len(action_cdf) - 1)][states], rng.random(count))
        nxt = draw(next_cdf[states, actions], rng.random(count))
        for i in np.flatnonzero(alive):
            steps[i].append((int(states[i]), int(actions[i])))
        alive &= ~mdp.absorbing[states]
        states = nxt
        if not alive.any():
            break
    return [Trajectory(tuple(s)) for s in steps]
