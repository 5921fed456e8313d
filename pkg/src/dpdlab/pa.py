"""Saleh-model power amplifier bank with beamforming weights.

Each amplifier is memoryless: AM/AM a(r) = alpha_a * r / (1 + beta_a * r^2),
AM/PM p(r) = alpha_phi * r^2 / (1 + beta_phi * r^2). The small-signal gain
equals alpha_a, which is also the gain used to scale the feedback path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dpdlab.errors import InvalidConfigError

# Nominal parameter bases; per-amplifier values add uniform draws on [0, 1]
# scaled as below.
ALPHA_A_BASE = 0.9445
BETA_A_BASE = 0.5138
ALPHA_PHI_BASE = 4.0033
BETA_PHI_BASE = 9.1040


@dataclass(frozen=True)
class SalehParams:
    """Parameters of one Saleh amplifier."""

    alpha_a: float
    beta_a: float
    alpha_phi: float
    beta_phi: float

    def __post_init__(self):
        if self.alpha_a <= 0 or self.beta_a <= 0 or self.beta_phi <= 0:
            raise InvalidConfigError("alpha_a, beta_a and beta_phi must be positive")

    @property
    def linear_gain(self) -> float:
        """Small-signal gain of the AM/AM curve."""
        return self.alpha_a

    @property
    def input_saturation(self) -> float:
        """Input amplitude at which the AM/AM curve peaks."""
        return 1.0 / math.sqrt(self.beta_a)


def saleh_amam(r, params: SalehParams):
    """AM/AM curve. Accepts scalars or arrays of nonnegative amplitudes."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("amplitude must be nonnegative")
    return params.alpha_a * r / (1.0 + params.beta_a * r * r)


def saleh_ampm(r, params: SalehParams):
    """AM/PM curve in radians. Accepts scalars or arrays."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("amplitude must be nonnegative")
    return params.alpha_phi * r * r / (1.0 + params.beta_phi * r * r)


def saleh_transfer(x, params: SalehParams):
    """Complex memoryless transfer: distort magnitude, rotate phase."""
    x = np.asarray(x, dtype=complex)
    r = np.abs(x)
    mag = saleh_amam(r, params)
    phase = np.angle(x) + saleh_ampm(r, params)
    return mag * np.exp(1j * phase)


@dataclass(frozen=True)
class PaBank:
    """A subarray of amplifiers plus their unit-modulus beam weights."""

    pas: tuple
    weights: np.ndarray

    def __post_init__(self):
        if len(self.pas) < 1:
            raise InvalidConfigError("need at least one amplifier")
        w = np.asarray(self.weights, dtype=complex)
        if w.shape != (len(self.pas),):
            raise InvalidConfigError("one weight per amplifier required")
        if not np.allclose(np.abs(w), 1.0, atol=1e-12):
            raise InvalidConfigError("beam weights must be unit modulus")
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return len(self.pas)

    @property
    def gains(self) -> np.ndarray:
        return np.array([p.linear_gain for p in self.pas])


def make_bank(params_list, weights=None) -> PaBank:
    if weights is None:
        weights = np.ones(len(params_list), dtype=complex)
    return PaBank(pas=tuple(params_list), weights=weights)


def sample_pa_params(count: int, seed: int) -> list:
    """Draw per-amplifier Saleh parameters around the nominal base values.

    Each amplifier gets independent uniform perturbations: 0.1-wide for the
    AM/AM pair, 1.0-wide for the AM/PM pair.
    """
    if count < 1:
        raise InvalidConfigError("count must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        u_a, v_a, u_p, v_p = rng.uniform(0.0, 1.0, size=4)
        out.append(
            SalehParams(
                alpha_a=ALPHA_A_BASE + 0.1 * u_a,
                beta_a=BETA_A_BASE + 0.1 * v_a,
                alpha_phi=ALPHA_PHI_BASE + u_p,
                beta_phi=BETA_PHI_BASE + v_p,
            )
        )
    return out


def apply_pa(x, index: int, bank: PaBank):
    """Output of amplifier `index` (0-based) for predistorted input x."""
    u = bank.weights[index] * np.asarray(x, dtype=complex)
    return saleh_transfer(u, bank.pas[index])


def apply_bank(X: np.ndarray, bank: PaBank) -> np.ndarray:
    """Apply every amplifier to its own column of X (samples x amplifiers)."""
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[1] != bank.size:
        raise ValueError("X must be (num_samples, num_amplifiers)")
    Y = np.empty_like(X)
    for l in range(bank.size):
        Y[:, l] = saleh_transfer(bank.weights[l] * X[:, l], bank.pas[l])
    return Y


def feedback_scale(y, params: SalehParams):
    """Scale an amplifier output by its inverse small-signal gain."""
    return np.asarray(y, dtype=complex) / params.linear_gain


def bank_feedback(Y: np.ndarray, bank: PaBank) -> np.ndarray:
    """Per-column inverse-gain scaling of a bank output block."""
    return np.asarray(Y, dtype=complex) / bank.gains[None, :]


def dump_params(params_list, path):
    """Write amplifier parameters as JSON; repr round-trips floats exactly."""
    payload = [
        {
            "alpha_a": p.alpha_a,
            "beta_a": p.beta_a,
            "alpha_phi": p.alpha_phi,
            "beta_phi": p.beta_phi,
        }
        for p in params_list
    ]
    Path(path).write_text(json.dumps(payload, indent=2))


def load_params(path) -> list:
    payload = json.loads(Path(path).read_text())
    return [SalehParams(**entry) for entry in payload]
