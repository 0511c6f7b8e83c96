from .base import ContractViolationError, Environment, Problem
from .heuristic import GridDistanceField
from .instances import (
    GenerationError,
    Instance,
    TASKS,
    build_problem,
    generate_instance,
    lattice_resolution,
    load_instance,
    save_instance,
)
from .nav2d import Nav2DWorld
from .pusht import PushT2DWorld, TShape, coverage

__all__ = [
    "ContractViolationError",
    "Environment",
    "GenerationError",
    "GridDistanceField",
    "Instance",
    "Nav2DWorld",
    "Problem",
    "PushT2DWorld",
    "TASKS",
    "TShape",
    "build_problem",
    "coverage",
    "generate_instance",
    "lattice_resolution",
    "load_instance",
    "save_instance",
]
