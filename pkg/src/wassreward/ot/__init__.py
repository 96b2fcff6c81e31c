"""Discrete optimal transport on the state-action support."""

from .barycenter import BarycenterResult, barycenter_weights
from .centroids import (
    Barycenter,
    barycenter_objective,
    convexity_probe,
    medoid_centroid,
    multistart_spread,
    wasserstein_barycenter,
)
from .distances import exact_transport, exact_wasserstein, pairwise_distance_matrix, pairwise_sinkhorn
from .exact import TransportPlan, TransportSolution, solve_transport
from .metric import GroundMetric, ground_metric_gridworld, triangle_violation
from .sinkhorn import OtConfig, SinkhornResult, sinkhorn_distance

__all__ = [
    "Barycenter",
    "BarycenterResult",
    "GroundMetric",
    "OtConfig",
    "SinkhornResult",
    "TransportPlan",
    "TransportSolution",
    "barycenter_objective",
    "barycenter_weights",
    "convexity_probe",
    "exact_transport",
    "exact_wasserstein",
    "ground_metric_gridworld",
    "medoid_centroid",
    "multistart_spread",
    "pairwise_distance_matrix",
    "pairwise_sinkhorn",
    "sinkhorn_distance",
    "solve_transport",
    "triangle_violation",
    "wasserstein_barycenter",
]
