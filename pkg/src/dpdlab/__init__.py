"""Simulation lab for linearizing a subarray of nonlinear power amplifiers.

Builds complex baseband excitations, runs them through banks of Saleh-model
amplifiers, trains per-amplifier or shared-coefficient predistorters with a
recursive prediction-error estimator in an indirect learning loop, and scores
the result by EVM, PSD and ACPR.
"""

from dpdlab.errors import (
    DegenerateSignalError,
    DivergenceError,
    InvalidConfigError,
    InvalidSchemeError,
)

__all__ = [
    "DegenerateSignalError",
    "DivergenceError",
    "InvalidConfigError",
    "InvalidSchemeError",
]

__version__ = "0.1.0"
