"""Seeded, parallel experiment harness and CLI."""

from rmtq.harness.config import ExperimentConfig, load_config, make_config
from rmtq.harness.runner import RunResult, execute, write_outputs

__all__ = [
    "ExperimentConfig",
    "load_config",
    "make_config",
    "RunResult",
    "execute",
    "write_outputs",
]
