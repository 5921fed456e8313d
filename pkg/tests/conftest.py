"""Shared test helpers."""

from fractions import Fraction

import numpy as np

from dpdlab.structures import build_scheme

RATIOS = (Fraction(1, 2), Fraction(1, 4))


def feasible_cases(S, nu, r, max_g=5):
    """Every (g, case) this (S, nu, r) supports."""
    out = []
    for g in range(1, max_g + 1):
        per_term = [S * r ** (nu + j) for j in range(g)]
        if per_term[-1] >= 1 and all(c.denominator == 1 for c in per_term):
            out.append((g, "I"))
        elif (
            g >= 2
            and per_term[-2] >= 1
            and per_term[-1] < 1
            and all(c.denominator == 1 for c in per_term[:-1])
        ):
            out.append((g, "II"))
    return out


def random_schemes(count, seed, S_range=(2, 16), nus=(0, 1, 2), ratios=RATIOS):
    """Generate `count` valid schemes spanning both cases."""
    rng = np.random.default_rng(seed)
    schemes = []
    while len(schemes) < count:
        S = int(rng.integers(S_range[0], S_range[1] + 1))
        nu = int(rng.choice(nus))
        r = ratios[rng.integers(0, len(ratios))]
        options = feasible_cases(S, nu, r)
        if not options:
            continue
        g, _ = options[rng.integers(0, len(options))]
        n = tuple(int(v) for v in rng.integers(1, 5, size=g))
        schemes.append(build_scheme(S, nu, r, n))
    return schemes
