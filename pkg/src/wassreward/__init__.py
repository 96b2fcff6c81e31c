"""Reward ambiguity in inverse reinforcement learning, measured with optimal transport.

Reward tables are embedded as probability measures over state-action pairs
(a softmax of the table), compared with Wasserstein distances under a
gridworld ground metric, and summarized by medoids and barycenters.
"""

__version__ = "0.1.0"

from .exceptions import GenerationFailureError, InvalidArgumentError, NumericFailureError
from .irl import IrlConfig, maxent_irl
from .lab import (
    ExperimentConfig,
    NoiseModel,
    ResultRecord,
    average_pairwise_distance,
    perturb_policy,
    run_centroid_analysis,
    run_convergence_experiment,
    run_dimensionality_experiment,
    run_experiment,
    run_noise_experiment,
)
from .mdp import (
    GridLayout,
    Policy,
    TabularMdp,
    Trajectory,
    build_gridworld,
    greedy_policy,
    sample_trajectories,
    soft_value_iteration,
    value_iteration,
)
from .ot import (
    GroundMetric,
    OtConfig,
    exact_wasserstein,
    ground_metric_gridworld,
    medoid_centroid,
    pairwise_distance_matrix,
    sinkhorn_distance,
    wasserstein_barycenter,
)
from .rewards import (
    DiscreteMeasure,
    PolicyMatch,
    RewardTable,
    compute_reward_variance,
    generate_equivalent_rewards,
    goal_reward,
    phi_embed,
    potential_shaping,
    verify_policy_equivalence,
)

__all__ = [
    "DiscreteMeasure", "ExperimentConfig", "GenerationFailureError", "GridLayout", "GroundMetric",
    "InvalidArgumentError", "IrlConfig", "NoiseModel", "NumericFailureError", "OtConfig", "Policy",
    "PolicyMatch", "ResultRecord", "RewardTable", "TabularMdp", "Trajectory",
    "average_pairwise_distance", "build_gridworld", "compute_reward_variance", "exact_wasserstein",
    "generate_equivalent_rewards", "goal_reward", "greedy_policy", "ground_metric_gridworld",
    "maxent_irl", "medoid_centroid", "pairwise_distance_matrix", "perturb_policy", "phi_embed",
    "potential_shaping", "run_centroid_analysis", "run_convergence_experiment",
    "run_dimensionality_experiment", "run_experiment", "run_noise_experiment", "sample_trajectories",
    "sinkhorn_distance", "soft_value_iteration", "value_iteration", "verify_policy_equivalence",
    "wasserstein_barycenter",
]
