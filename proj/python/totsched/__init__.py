"""Python bindings for the totsched thought scheduler."""

from ._totsched import (
    EnvConfig,
    Environment,
    TrainConfig,
    beta_schedule,
    evaluate,
    fit_delay,
    fit_quality,
    gen_delay,
    gen_quality,
    lg_reference,
    link_rate,
    path_loss_db,
    trace,
    train,
)

__all__ = [
    "EnvConfig",
    "Environment",
    "TrainConfig",
    "beta_schedule",
    "evaluate",
    "fit_delay",
    "fit_quality",
    "gen_delay",
    "gen_quality",
    "lg_reference",
    "link_rate",
    "path_loss_db",
    "trace",
    "train",
]
