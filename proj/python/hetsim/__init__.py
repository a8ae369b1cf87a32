"""Heterogeneous multi-agent coverage simulator."""

from ._core import (
    API_VERSION,
    ConfigError,
    Env,
    Preset,
    StepError,
    close,
    make_env,
    native_rollout,
    preset,
    reset,
    run_batch,
    step,
)

__all__ = [
    "API_VERSION",
    "ConfigError",
    "Env",
    "Preset",
    "StepError",
    "close",
    "make_env",
    "native_rollout",
    "preset",
    "reset",
    "run_batch",
    "step",
]
