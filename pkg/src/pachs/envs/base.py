"""Shared environment contract.

An environment exposes a pure, deterministic, reentrant transition function

    evaluate(s, a) -> (s_next, cost, valid)

plus goal and state-validity predicates and its dimensional metadata.
Worlds are immutable after construction so evaluate may be called from many
worker threads at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ContractViolationError(ValueError):
    """Caller broke an environment precondition (action norm, dims)."""


class Environment:
    state_dim: int = 0
    action_dim: int = 0
    max_action_norm: float = 0.0
    angular_dims: tuple[int, ...] = ()

    def default_resolution(self) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, s: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, float, bool]:
        raise NotImplementedError

    def goal_satisfied(self, s: np.ndarray) -> bool:
        raise NotImplementedError

    def valid_state(self, s: np.ndarray) -> bool:
        raise NotImplementedError

    def _check_action(self, a: np.ndarray) -> None:
        if len(a) != self.action_dim:
            raise ContractViolationError(
                f"action dim {len(a)} != {self.action_dim}"
            )
        n = float(np.linalg.norm(a))
        # Tiny slack absorbs float rounding from norm-clipped samplers.
        if n > self.max_action_norm * (1.0 + 1e-9) + 1e-12:
            raise ContractViolationError(
                f"action norm {n} exceeds max {self.max_action_norm}"
            )


@dataclass
class Problem:
    """A planning query: an environment plus the start state."""

    env: Environment
    start: np.ndarray
