"""Bicycle balancer simulation, linearization, synthesis and tuning."""

from ._core import (
    ConfigError,
    NumericError,
    c2d_zoh,
    clqr,
    compare,
    dlqr,
    expm,
    ga_minimize,
    linearize,
    normalize_config,
    optimize,
    place_poles,
    preset_text,
    presets,
    simulate,
    synthesize,
)

__all__ = [
    "ConfigError",
    "NumericError",
    "c2d_zoh",
    "clqr",
    "compare",
    "dlqr",
    "expm",
    "ga_minimize",
    "linearize",
    "normalize_config",
    "optimize",
    "place_poles",
    "preset_text",
    "presets",
    "simulate",
    "synthesize",
]
