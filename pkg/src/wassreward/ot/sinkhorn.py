"""Entropic optimal transport, always in the log domain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._numeric import logsumexp as _lse
from ..exceptions import InvalidArgumentError
from .exact import TransportPlan


@dataclass(frozen=True)
class OtConfig:
    """Solver settings shared by the OT routines.

    ``reg_epsilon`` is the entropic regularization strength, in the units of
    the powered cost matrix ``costs ** order_p``. The default keeps
    fixed-support barycenters on small gridworlds within a few thousand
    sweeps; much smaller values make them converge very slowly.
    """

    order_p: float = 2.0
    reg_epsilon: float = 0.2
    max_iterations: int = 20_000
    convergence_tol: float = 1e-10

    def __post_init__(self):
        if not self.order_p >= 1:
            raise InvalidArgumentError(f"order_p must be >= 1, got {self.order_p}")
        if not self.reg_epsilon > 0:
            raise InvalidArgumentError(f"reg_epsilon must be positive, got {self.reg_epsilon}")
        if int(self.max_iterations) < 1:
            raise InvalidArgumentError(f"max_iterations must be positive, got {self.max_iterations}")
        if not self.convergence_tol > 0:
            raise InvalidArgumentError(f"convergence_tol must be positive, got {self.convergence_tol}")

    def replace(self, **changes):
        fields = dict(order_p=self.order_p, reg_epsilon=self.reg_epsilon,
                      max_iterations=self.max_iterations, convergence_tol=self.convergence_tol)
        fields.update(changes)
        return OtConfig(**fields)


@dataclass(frozen=True, eq=False)
class SinkhornResult:
    """Entropic transport estimate.

    ``value`` is ``<plan, cost**p> ** (1/p)``; the entropy term is left out.
    Check ``converged`` before trusting it.
    """

    value: float
    plan: TransportPlan
    converged: bool
    iterations: int
    marginal_error: float

    def __float__(self):
        return self.value


def sinkhorn_plan(a, b, cost, reg, max_iterations, tol, scaling=0.5):
    """Log-domain Sinkhorn on an explicit cost matrix.

    Potentials live in cost units and are warm-started along a geometric
    schedule of regularization strengths ending at ``reg`` (factor
    ``scaling`` per stage); intermediate stages stop at a looser tolerance.
    ``max_iterations`` bounds the iterations of the final stage. Returns
    ``(coupling, converged, iterations, marginal_error)`` where the error is
    the L1 violation of the column marginal after a row update.
    """
    log_a, log_b = np.log(a), np.log(b)
    schedule = [reg]
    while scaling and schedule[-1] < float(cost.max()):
        schedule.append(schedule[-1] / scaling)
    f = np.zeros(a.size)
    g = np.zeros(b.size)
    for stage, eps in enumerate(reversed(schedule)):
        final = stage == len(schedule) - 1
        stage_tol = tol if final else max(tol, 1e-3)
        budget = int(max_iterations) if final else 1000
        f, g, converged, it, err = _sinkhorn_stage(log_a, log_b, b, cost, eps, f, g, budget, stage_tol)
    plan = np.exp((f[:, None] + g[None, :] - cost) / reg)
    return plan, converged, it, err


def _sinkhorn_stage(log_a, log_b, b, cost, eps, f, g, max_iterations, tol):
    neg = -cost / eps
    err = np.inf
    for it in range(1, max_iterations + 1):
        g = eps * (log_b - _lse(neg + f[:, None] / eps, axis=0))
        f = eps * (log_a - _lse(neg + g[None, :] / eps, axis=1))
        if it % 10 == 0 or it == max_iterations:
            plan = np.exp(neg + (f[:, None] + g[None, :]) / eps)
            err = float(np.abs(plan.sum(axis=0) - b).sum())
            if err < tol:
                return f, g, True, it, err
    return f, g, False, max_iterations, err


def sinkhorn_distance(mu, nu, metric, config=None):
    """Entropic estimate of ``W_p(mu, nu)`` with converged flag."""
    config = config or OtConfig()
    a, b = _weights(mu), _weights(nu)
    costs = getattr(metric, "costs", metric)
    if a.size != b.size or costs.shape != (a.size, b.size):
        raise InvalidArgumentError("measure sizes and metric shape disagree")
    if np.any(a <= 0) or np.any(b <= 0):
        raise InvalidArgumentError("sinkhorn needs strictly positive measures")
    C = np.asarray(costs, dtype=float) ** config.order_p
    coupling, converged, iterations, err = sinkhorn_plan(
        a, b, C, config.reg_epsilon, config.max_iterations, config.convergence_tol)
    value = max(float(np.sum(coupling * C)), 0.0) ** (1.0 / config.order_p)
    return SinkhornResult(value, TransportPlan(coupling, a, b), converged, iterations, err)


def _weights(measure):
    return np.asarray(getattr(measure, "weights", measure), dtype=float)
