"""OpenTelemetry metrics for solver observability."""

from common.metrics.instruments import (
    experiment_points,
    picard_iterations,
    solver_blowups,
    solver_duration,
    solver_steps,
)

__all__ = [
    "experiment_points",
    "picard_iterations",
    "solver_blowups",
    "solver_duration",
    "solver_steps",
]
