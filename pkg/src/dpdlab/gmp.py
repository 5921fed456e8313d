"""Memory-polynomial basis functions.

A basis term is s(n-m) * |s(n-m)|^p for polynomial order p in [0, P-1] and
delay m in [0, M-1]. A configuration activates Q of the P*M terms (the ones
whose coefficients are nonzero for the amplifier family at hand) and fixes
the order in which they appear in the evaluated basis vector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from dpdlab.errors import InvalidConfigError

# How a (p, m) cell maps to a 1-based flat index.
ORDER_MAJOR = "order-major"  # index = p * M + m + 1
DELAY_MAJOR = "delay-major"  # index = m * P + p + 1


@dataclass(frozen=True)
class GmpConfig:
    """Active basis terms and their evaluation order.

    `dominance` lists the same indices as `active_indices` but sorted with
    the structurally most important terms first; the evaluated basis vector
    follows this order. By default it equals `active_indices`.
    """

    order: int
    memory: int
    active_indices: tuple
    dominance: tuple = None
    index_layout: str = ORDER_MAJOR

    def __post_init__(self):
        if self.order < 1 or self.memory < 1:
            raise InvalidConfigError("order and memory must be positive")
        if self.index_layout not in (ORDER_MAJOR, DELAY_MAJOR):
            raise InvalidConfigError(f"unknown index layout {self.index_layout!r}")
        active = tuple(int(i) for i in self.active_indices)
        if len(active) == 0:
            raise InvalidConfigError("need at least one active basis term")
        if len(set(active)) != len(active):
            raise InvalidConfigError("active indices must be unique")
        limit = self.order * self.memory
        if any(i < 1 or i > limit for i in active):
            raise InvalidConfigError(f"active indices must lie in [1, {limit}]")
        dom = self.dominance
        dom = active if dom is None else tuple(int(i) for i in dom)
        if sorted(dom) != sorted(active):
            raise InvalidConfigError("dominance must permute the active indices")
        object.__setattr__(self, "active_indices", active)
        object.__setattr__(self, "dominance", dom)

    @property
    def num_terms(self) -> int:
        """Q, the number of active basis terms."""
        return len(self.active_indices)

    def with_dominance(self, order) -> "GmpConfig":
        return replace(self, dominance=tuple(int(i) for i in order))

    def index_to_pm(self, index: int) -> tuple:
        if not 1 <= index <= self.order * self.memory:
            raise InvalidConfigError(f"index {index} out of range")
        if self.index_layout == ORDER_MAJOR:
            return divmod(index - 1, self.memory)
        m, p = divmod(index - 1, self.order)
        return p, m


def flat_index(p: int, m: int, config: GmpConfig) -> int:
    """1-based flat index of the (p, m) cell under the configured layout."""
    if not (0 <= p < config.order and 0 <= m < config.memory):
        raise InvalidConfigError("p or m out of range")
    if config.index_layout == ORDER_MAJOR:
        return p * config.memory + m + 1
    return m * config.order + p + 1


def eval_basis_term(window, p: int, m: int) -> complex:
    """One term s(n-m) * |s(n-m)|^p from a window ending at sample n."""
    window = np.asarray(window, dtype=complex)
    x = window[-1 - m]
    return complex(x * abs(x) ** p)


def build_basis_vector(samples, n: int, config: GmpConfig) -> np.ndarray:
    """Length-Q basis vector at sample n, entries in dominance order.

    History before sample 0 is taken as zero, so early samples are
    well defined.
    """
    samples = np.asarray(samples, dtype=complex)
    if not 0 <= n < samples.size:
        raise InvalidConfigError("sample index out of range")
    out = np.empty(config.num_terms, dtype=complex)
    for i, idx in enumerate(config.dominance):
        p, m = config.index_to_pm(idx)
        if m > n:
            out[i] = 0.0
        else:
            x = samples[n - m]
            out[i] = x * abs(x) ** p
    return out


def basis_matrix(samples, config: GmpConfig, history=None) -> np.ndarray:
    """Basis vectors for every sample of a block, shape (len(samples), Q).

    `history` supplies the memory - 1 samples preceding the block (zeros when
    omitted), so a long record can be processed block by block with results
    identical to one shot.
    """
    samples = np.asarray(samples, dtype=complex)
    n = samples.size
    depth = config.memory - 1
    if history is None:
        history = np.zeros(depth, dtype=complex)
    else:
        history = np.asarray(history, dtype=complex)
        if history.size != depth:
            raise InvalidConfigError(f"history must hold {depth} samples")
    padded = np.concatenate([history, samples])
    out = np.empty((n, config.num_terms), dtype=complex)
    for i, idx in enumerate(config.dominance):
        p, m = config.index_to_pm(idx)
        seg = padded[depth - m : depth - m + n]
        out[:, i] = seg * np.abs(seg) ** p
    return out


def estimate_dominance(coeffs, config: GmpConfig) -> tuple:
    """Rank active indices by mean coefficient magnitude across amplifiers.

    `coeffs` holds one trained length-Q coefficient vector per amplifier
    (shape (S, Q) or (Q,)), ordered like the config's current dominance list.
    Ties break toward the lower index.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    if coeffs.shape[1] != config.num_terms:
        raise InvalidConfigError("coefficient count does not match the config")
    strength = np.mean(np.abs(coeffs), axis=0)
    if np.all(strength == 0.0):
        raise InvalidConfigError("coefficients look untrained (all zero)")
    ranked = sorted(zip(config.dominance, strength), key=lambda t: (-t[1], t[0]))
    return tuple(idx for idx, _ in ranked)
