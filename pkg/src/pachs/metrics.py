"""Run records and JSON-lines persistence."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from enum import Enum


class PlanStatus(str, Enum):
    GOAL_REACHED = "goal_reached"
    BUDGET_EXHAUSTED_PARTIAL = "budget_exhausted_partial"
    OPEN_EXHAUSTED_NO_SOLUTION = "open_exhausted_no_solution"


@dataclass
class RunMetrics:
    """One planner run: counters plus harness identifiers.

    expansions and evaluations are independent counters (state expansions
    vs environment transition evaluations); every planner counts one
    evaluation per environment evaluate call so budgets are comparable.
    """

    success: bool = False
    status: str = ""
    wall_time: float = 0.0
    solution_cost: float | None = None
    expansions: int = 0
    evaluations: int = 0
    planner: str = ""
    instance: str = ""
    seed: int = 0
    replans: int | None = None
    executed_cost: float | None = None
    error: str | None = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RunMetrics":
        data = json.loads(line)
        fields = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in fields})

    def key_fields(self) -> tuple:
        """Determinism comparison key: everything except wall time."""
        return (
            self.success,
            self.status,
            self.solution_cost,
            self.expansions,
            self.evaluations,
            self.replans,
            self.executed_cost,
        )


def append_jsonl(path, record: RunMetrics) -> None:
    with open(path, "a") as fh:
        fh.write(record.to_json() + "\n")
        fh.flush()


def read_jsonl(path) -> list[RunMetrics]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(RunMetrics.from_json(line))
            except (json.JSONDecodeError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed metrics line: {exc}") from exc
    return out
