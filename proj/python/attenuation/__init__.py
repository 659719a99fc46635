"""Conservative p-values, confidence sets and confidence curves for
correlations corrected for attenuation."""

from ._core import (
    ConfigError,
    ConvergenceError,
    cc,
    ci,
    hs_interval,
    point_estimate,
    pvalue,
    simulate,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "cc",
    "ci",
    "hs_interval",
    "point_estimate",
    "pvalue",
    "simulate",
]
