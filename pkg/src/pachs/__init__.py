"""Parallel actor-critic heuristic search (PACHS) with analog environments,
baseline planners, and a benchmark harness.
"""

from .baselines import (
    BeamConfig,
    EpaseStylePlanner,
    RolloutConfig,
    beam_search,
    compass_actions,
    parallel_rollout,
    single_rollout,
)
from .graph import Edge, OpenList, Path, SearchNode, StateRegistry, backtrack
from .metrics import PlanStatus, RunMetrics
from .models import (
    MlpWeights,
    ModelPair,
    actor_sample,
    critic_cost_to_go,
    load_weights,
    mlp_forward,
    mlp_model_pair,
    save_weights,
    surrogate_nav,
    surrogate_pusht,
)
from .search import (
    PachsPlanner,
    PlannerConfig,
    PlanResult,
    edge_priority,
    successor_priority,
)

__version__ = "0.1.0"

__all__ = [
    "BeamConfig",
    "Edge",
    "EpaseStylePlanner",
    "MlpWeights",
    "ModelPair",
    "OpenList",
    "PachsPlanner",
    "Path",
    "PlanResult",
    "PlanStatus",
    "PlannerConfig",
    "RolloutConfig",
    "RunMetrics",
    "SearchNode",
    "StateRegistry",
    "actor_sample",
    "backtrack",
    "beam_search",
    "compass_actions",
    "critic_cost_to_go",
    "edge_priority",
    "load_weights",
    "mlp_forward",
    "mlp_model_pair",
    "parallel_rollout",
    "save_weights",
    "single_rollout",
    "successor_priority",
    "surrogate_nav",
    "surrogate_pusht",
]
