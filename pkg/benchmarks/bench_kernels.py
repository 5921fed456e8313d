#!/usr/bin/env python3
"""Benchmark the compiled recursion kernels against the NumPy fallback.

Run: python benchmarks/bench_kernels.py [--block 4096] [--repeats 5]
"""

import argparse
import time
from fractions import Fraction

import numpy as np

from dpdlab.kernels import _rpem_py
from dpdlab.structures import build_scheme
from dpdlab.training import RpemHyper

try:
    from dpdlab.kernels import _rpem as _compiled
except ImportError:
    _compiled = None

HYPER = RpemHyper()


def _timeit(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_branches(impl, B, S, Q, repeats):
    rng = np.random.default_rng(0)
    x = rng.standard_normal((B, S)) + 1j * rng.standard_normal((B, S))
    basis = rng.standard_normal((S, B, Q)) + 1j * rng.standard_normal((S, B, Q))

    def run():
        coeffs = np.zeros((S, Q), dtype=complex)
        P = np.tile(HYPER.mu * np.eye(Q, dtype=complex), (S, 1, 1))
        xi = np.full(S, HYPER.lambda0)
        impl.rpem_branches(x, basis, coeffs, P, xi, HYPER.rho, np.zeros(S))

    return _timeit(run, repeats)


def bench_sweep(impl, B, repeats):
    scheme = build_scheme(S=8, nu=1, r=Fraction(1, 2), n_list=(4, 6))
    Q = scheme.num_terms
    rng = np.random.default_rng(1)
    x = rng.standard_normal((B, 8)) + 1j * rng.standard_normal((B, 8))
    basis = rng.standard_normal((8, B, Q)) + 1j * rng.standard_normal((8, B, Q))
    term, l0, cnt = scheme.shared_slots()
    gather = scheme.sweep_gather()
    ff_col = scheme.expand_map()
    n_ops, T1 = gather.shape[0], gather.shape[1]

    def run():
        cbar = np.zeros(scheme.num_shared, dtype=complex)
        P4 = np.tile(HYPER.mu * np.eye(Q, dtype=complex), (n_ops, T1, 1, 1))
        xi4 = np.full((n_ops, T1), HYPER.lambda0)
        impl.rpem_sweep(x, basis, cbar, P4, xi4, HYPER.rho, term, l0, cnt,
                        gather, ff_col, 0, 1, np.zeros(8))

    return _timeit(run, repeats)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--block", type=int, default=4096)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    B, S, Q = args.block, 8, 10
    rows = [("per-branch recursion", bench_branches), ("sweep recursion", bench_sweep)]
    print(f"block = {B} samples, {S} branches, {Q} terms, best of {args.repeats}")
    print(f"{'kernel':24s}{'numpy':>12s}{'compiled':>12s}{'speedup':>10s}")
    for name, fn in rows:
        if fn is bench_branches:
            t_py = fn(_rpem_py, B, S, Q, args.repeats)
            t_c = fn(_compiled, B, S, Q, args.repeats) if _compiled else None
        else:
            t_py = fn(_rpem_py, B, args.repeats)
            t_c = fn(_compiled, B, args.repeats) if _compiled else None
        if t_c is None:
            print(f"{name:24s}{t_py * 1e3:>10.1f}ms{'n/a':>12s}{'n/a':>10s}")
        else:
            print(f"{name:24s}{t_py * 1e3:>10.1f}ms{t_c * 1e3:>10.1f}ms{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
