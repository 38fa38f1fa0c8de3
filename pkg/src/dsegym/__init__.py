"""Design-space-exploration gymnasium.

Environments wrap architecture cost models behind a gym-style
reset/step interface; agents (random walker, genetic algorithm, ant
colony, Bayesian optimization, policy gradient) search their parameter
spaces through one shared contract; every exchange is logged to
trajectory datasets that feed random-forest proxy cost models.
"""

from .core import (
    Environment,
    Observation,
    RewardMode,
    RewardSpec,
    StepResult,
    compute_budget_distance,
    compute_joint_reward,
    compute_reciprocal_reward,
    compute_target_reward,
    score,
)
from .spaces import (
    Categorical,
    DesignPoint,
    Numeric,
    ParameterSpace,
    ParameterSpec,
    cardinality,
    encode,
    enumerate_points,
    neighbor,
    sample_uniform,
)

__version__ = "0.1.0"

__all__ = [
    "Categorical",
    "DesignPoint",
    "Environment",
    "Numeric",
    "Observation",
    "ParameterSpace",
    "ParameterSpec",
    "RewardMode",
    "RewardSpec",
    "StepResult",
    "cardinality",
    "compute_budget_distance",
    "compute_joint_reward",
    "compute_reciprocal_reward",
    "compute_target_reward",
    "encode",
    "enumerate_points",
    "neighbor",
    "sample_uniform",
    "score",
]
