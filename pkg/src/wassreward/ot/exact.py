"""Exact discrete optimal transport via the transportation simplex.

The basis is kept as a spanning tree over row and column nodes. Entering
cells follow Dantzig's most-negative reduced cost; after a run of degenerate
pivots the solver switches to Bland's lowest-index rule until the objective
moves again, which rules out cycling.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidArgumentError, NumericFailureError

_DEGENERATE_RUN = 25


@dataclass(frozen=True, eq=False)
class TransportPlan:
    coupling: np.ndarray
    source_marginal: np.ndarray
    target_marginal: np.ndarray

    def marginal_error(self):
        rows = np.abs(self.coupling.sum(axis=1) - self.source_marginal).max()
        cols = np.abs(self.coupling.sum(axis=0) - self.target_marginal).max()
        return float(max(rows, cols))

    def cost(self, cost_matrix):
        return float(np.sum(self.coupling * cost_matrix))


@dataclass(frozen=True, eq=False)
class TransportSolution:
    """Optimal plan plus the dual potentials certifying it.

    ``row_potential[i] + col_potential[j] <= cost[i, j]`` holds everywhere
    (up to the pivot tolerance) with equality on the plan's support.
    """

    cost: float
    plan: TransportPlan
    row_potential: np.ndarray
    col_potential: np.ndarray
    pivots: int


def _initial_basis(a, b, C):
    """Least-cost-first allocation yielding exactly ``n + m - 1`` tree cells.

    Every allocation retires exactly one line (row or column); the last
    active row or column is never retired early, so the cells form a
    spanning tree even when allocations are degenerate.
    """
    n, m = C.shape
    ra, rb = a.copy(), b.copy()
    row_on = np.ones(n, dtype=bool)
    col_on = np.ones(m, dtype=bool)
    rows_left, cols_left = n, m
    basis = {}
    for flat in np.argsort(C, axis=None, kind="stable"):
        i, j = divmod(int(flat), m)
        if not (row_on[i] and col_on[j]):
            continue
        if rows_left == 1 and cols_left == 1:
            basis[(i, j)] = max(ra[i], rb[j], 0.0)
            break
        if cols_left == 1:
            retire_row = True
        elif rows_left == 1:
            retire_row = False
        else:
            retire_row = ra[i] <= rb[j]
        if retire_row:
            x = max(ra[i], 0.0)
            rb[j] -= x
            ra[i] = 0.0
            row_on[i] = False
            rows_left -= 1
        else:
            x = max(rb[j], 0.0)
            ra[i] -= x
            rb[j] = 0.0
            col_on[j] = False
            cols_left -= 1
        basis[(i, j)] = x
    return basis


def _potentials(basis_adj, cost_rows, n, m):
    # cost_rows is C as nested lists; python floats avoid numpy scalar overhead
    u = [None] * n
    v = [None] * m
    u[0] = 0.0
    stack = [0]
    while stack:
        node = stack.pop()
        if node < n:
            ui, row = u[node], cost_rows[node]
            for col in basis_adj[node]:
                j = col - n
                if v[j] is None:
                    v[j] = row[j] - ui
                    stack.append(col)
        else:
            j = node - n
            vj = v[j]
            for i in basis_adj[node]:
                if u[i] is None:
                    u[i] = cost_rows[i][j] - vj
                    stack.append(i)
    return np.array(u), np.array(v)


def _tree_path(basis_adj, start, goal):
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt in basis_adj[node]:
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path  # goal ... start


def solve_transport(a, b, C, max_pivots=None):
    """Minimize ``<P, C>`` over couplings of ``a`` and ``b``.

    Zero-mass rows and columns are dropped before pivoting and receive dual
    potentials afterwards that keep the certificate feasible.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    C = np.asarray(C, dtype=float)
    if C.shape != (a.size, b.size):
        raise InvalidArgumentError(f"cost shape {C.shape} does not match marginals ({a.size}, {b.size})")
    rows = np.flatnonzero(a > 0)
    cols = np.flatnonzero(b > 0)
    sub = C[np.ix_(rows, cols)]
    coupling_sub, u_sub, v_sub, pivots = _simplex(a[rows], b[cols], sub, max_pivots)

    coupling = np.zeros(C.shape)
    coupling[np.ix_(rows, cols)] = coupling_sub
    u = np.empty(a.size)
    v = np.empty(b.size)
    u[rows] = u_sub
    v[cols] = v_sub
    empty_cols = np.setdiff1d(np.arange(b.size), cols)
    empty_rows = np.setdiff1d(np.arange(a.size), rows)
    if empty_cols.size:
        v[empty_cols] = np.min(C[np.ix_(rows, empty_cols)] - u_sub[:, None], axis=0)
    if empty_rows.size:
        u[empty_rows] = np.min(C[empty_rows] - v[None, :], axis=1)
    plan = TransportPlan(coupling, a.copy(), b.copy())
    return TransportSolution(plan.cost(C), plan, u, v, pivots)


def _simplex(a, b, C, max_pivots):
    n, m = C.shape
    if m == 1:
        return a[:, None].copy(), C[:, 0].copy(), np.zeros(1), 0
    if n == 1:
        return b[None, :].copy(), np.zeros(1), C[0, :].copy(), 0

    basis = _initial_basis(a, b, C)
    adj = [set() for _ in range(n + m)]
    for i, j in basis:
        adj[i].add(n + j)
        adj[n + j].add(i)

    scale = max(1.0, float(np.abs(C).max()))
    tol = 1e-12 * scale
    budget = max_pivots if max_pivots is not None else 50 * n * m + 1000
    cost_rows = C.tolist()
    degenerate_run = 0
    pivots = 0
    while True:
        u, v = _potentials(adj, cost_rows, n, m)
        reduced = C - u[:, None] - v[None, :]
        if degenerate_run >= _DEGENERATE_RUN:
            candidates = np.flatnonzero(reduced.ravel() < -tol)
            if candidates.size == 0:
                break
            flat = int(candidates[0])
        else:
            flat = int(np.argmin(reduced))
            if reduced.flat[flat] >= -tol:
                break
        if pivots >= budget:
            raise NumericFailureError(f"transportation simplex exceeded {budget} pivots")
        pivots += 1
        ei, ej = divmod(flat, m)

        path = _tree_path(adj, ei, n + ej)  # column node first, row node last
        minus, plus = [], []
        for k in range(len(path) - 1):
            x, y = path[k], path[k + 1]
            cell = (y, x - n) if x >= n else (x, y - n)
            (minus if k % 2 == 0 else plus).append(cell)

        theta = min(basis[c] for c in minus)
        leaving = min((c for c in minus if basis[c] == theta), key=lambda c: c[0] * m + c[1])
        for c in plus:
            basis[c] += theta
        for c in minus:
            basis[c] = max(basis[c] - theta, 0.0)
        li, lj = leaving
        del basis[leaving]
        adj[li].discard(n + lj)
        adj[n + lj].discard(li)
        basis[(ei, ej)] = theta
        adj[ei].add(n + ej)
        adj[n + ej].add(ei)
        degenerate_run = degenerate_run + 1 if theta <= 0.0 else 0

    coupling = np.zeros((n, m))
    for (i, j), x in basis.items():
        coupling[i, j] = x
    return coupling, u, v, pivots
