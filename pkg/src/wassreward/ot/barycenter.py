"""Fixed-support Wasserstein barycenters by iterative Bregman projections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidArgumentError
from .._numeric import logsumexp as _lse
from .sinkhorn import OtConfig


@dataclass(frozen=True, eq=False)
class BarycenterResult:
    weights: np.ndarray
    converged: bool
    iterations: int
    residual: float


def barycenter_weights(measures, weights, cost, reg, max_iterations=20_000, tol=1e-10,
                       method="debiased", init=None, scaling=0.5):
    """Entropic barycenter on the common support of ``measures``.

    Each input ``k`` is coupled to the barycenter through
    ``diag(u_k) K diag(v_k)`` with ``K = exp(-cost / reg)``. A sweep projects
    onto the input marginals, sets the barycenter to the weighted geometric
    mean of the free marginals and projects back. ``method="debiased"`` adds
    the self-transport correction that removes the entropic blur, so a set
    of identical inputs has that input as its barycenter.

    Small ``reg`` converges slowly from a cold start, so the solve is warm
    started along ``reg_k = max(reg, cost.max() * scaling**k)``; intermediate
    stages stop at ``max(tol, 1e-3)``. ``init`` optionally gives log-scaling
    offsets ``(log_v, log_d)`` with shapes ``(K, n)`` and ``(n,)``, added to
    the warm start of the final stage. The final stage stops when the
    barycenter weights change by less than ``tol`` (max norm) between sweeps
    and every coupling matches its input marginal within ``tol`` (L1).
    ``iterations`` counts sweeps over all stages.
    """
    A = np.asarray(measures, dtype=float)
    w = np.asarray(weights, dtype=float)
    cost = np.asarray(cost, dtype=float)
    if method not in ("debiased", "bregman"):
        raise InvalidArgumentError(f"unknown barycenter method {method!r}")
    if not 0 < scaling < 1:
        raise InvalidArgumentError(f"scaling must lie in (0, 1), got {scaling}")
    log_mu = np.log(A)
    schedule = []
    level = float(cost.max())
    while level > reg:
        schedule.append(level)
        level *= scaling
    schedule.append(float(reg))

    log_v = np.zeros_like(A)
    log_d = np.zeros(A.shape[1])
    budget = int(max_iterations)
    used = 0
    previous = schedule[0]
    for stage, level in enumerate(schedule):
        final = stage == len(schedule) - 1
        log_v *= previous / level
        log_d *= previous / level
        previous = level
        if final and init is not None:
            log_v = log_v + np.asarray(init[0], dtype=float)
            log_d = log_d + np.asarray(init[1], dtype=float)
        limit = budget - used if final else min(1000, budget - used)
        out = _ibp(log_mu, w, -cost / level, method, log_v, log_d,
                   limit, tol if final else max(tol, 1e-3))
        bary, log_v, log_d, converged, its, residual = out
        used += its
        if final:
            return BarycenterResult(bary, converged, used, residual)


def _ibp(log_mu, w, log_k, method, log_v, log_d, max_iterations, tol):
    bary = np.full(log_mu.shape[1], 1.0 / log_mu.shape[1])
    residual = np.inf
    for it in range(1, max_iterations + 1):
        # rows of coupling k index the input's support, columns the barycenter's
        log_u = log_mu - _lse(log_k[None, :, :] + log_v[:, None, :], axis=2)
        log_ktu = _lse(log_k[None, :, :] + log_u[:, :, None], axis=1)
        log_bary = w @ log_ktu
        if method == "debiased":
            log_bary = log_bary + log_d
        log_bary -= _lse(log_bary, axis=0)
        log_v = log_bary[None, :] - log_ktu
        if method == "debiased":
            log_d = 0.5 * (log_d + log_bary - _lse(log_k + log_d[None, :], axis=1))
        new = np.exp(log_bary)
        residual = float(np.max(np.abs(new - bary)))
        bary = new
        if residual < tol and _input_marginal_error(log_mu, log_u, log_k, log_v) < tol:
            return bary, log_v, log_d, True, it, residual
    return bary, log_v, log_d, False, max_iterations, residual


def _input_marginal_error(log_mu, log_u, log_k, log_v):
    rows = np.exp(log_u + _lse(log_k[None, :, :] + log_v[:, None, :], axis=2))
    return float(np.max(np.abs(rows - np.exp(log_mu)).sum(axis=1)))


def random_initialization(num_measures, size, rng, scale=1.0):
    """Random starting log-scalings for multi-start uniqueness probes."""
    return rng.normal(scale=scale, size=(num_measures, size)), rng.normal(scale=scale, size=size)


def validate_barycenter_inputs(measures, weights):
    if len(measures) == 0:
        raise InvalidArgumentError("barycenter needs at least one measure")
    sizes = {m.size for m in measures}
    if len(sizes) != 1:
        raise InvalidArgumentError(f"measures live on different supports: sizes {sorted(sizes)}")
    if weights is None:
        return np.full(len(measures), 1.0 / len(measures))
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(measures),) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise InvalidArgumentError("barycenter weights must be a probability vector, one per measure")
    return w


__all__ = ["BarycenterResult", "OtConfig", "barycenter_weights", "random_initialization"]
