from fractions import Fraction

import numpy as np
import pytest

from conftest import random_schemes
from dpdlab.reshape import (
    apply,
    apply_transpose,
    build_expand,
    build_reduce,
    build_regroup,
    build_sweep_sequence,
    dump_op,
    merge,
    trunc,
)
from dpdlab.structures import build_scheme

HALF = Fraction(1, 2)


def ref_scheme():
    return build_scheme(S=4, nu=1, r=HALF, n_list=(2, 2))


# Dense matrices of the reference instance (4 amplifiers, 4 terms, groups of
# two with one shared tail group): the expansion, the averaging reduction,
# the subgroup regrouping, and the two sweep permutations.

EXPAND_REF = np.array(
    [
        [1, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 1],
        [1, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 1],
        [0, 1, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 1],
        [0, 1, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 1],
    ],
    dtype=float,
)

REDUCE_REF = np.zeros((6, 16))
REDUCE_REF[0, [0, 4]] = 0.5
REDUCE_REF[1, [8, 12]] = 0.5
REDUCE_REF[2, [1, 5]] = 0.5
REDUCE_REF[3, [9, 13]] = 0.5
REDUCE_REF[4, [2, 6, 10, 14]] = 0.25
REDUCE_REF[5, [3, 7, 11, 15]] = 0.25

REGROUP_REF = np.zeros((6, 6))
for row, col in enumerate([0, 2, 4, 5, 1, 3]):
    REGROUP_REF[row, col] = 1.0

SWEEP_REF = [REGROUP_REF.copy(), np.zeros((6, 6))]
for row, col in enumerate([1, 3, 4, 5, 0, 2]):
    SWEEP_REF[1][row, col] = 1.0


def test_expand_fixture():
    op = build_expand(ref_scheme())
    assert np.array_equal(op.dense(), EXPAND_REF)
    assert op.dense()[:, 4].sum() == 4  # fifth column: shared tail coefficient


def test_expand_replication_semantics():
    s = ref_scheme()
    bar = np.arange(1, 7, dtype=complex)  # distinct markers
    full = apply(build_expand(s), bar).reshape(4, 4)
    # third amplifier: its own leading pair, then the shared tail pair
    assert np.array_equal(full[2], [2, 4, 5, 6])
    assert np.array_equal(full[0], full[1])
    assert np.array_equal(full[2], full[3])


def test_reduce_fixture():
    op = build_reduce(ref_scheme())
    assert np.array_equal(op.dense(), REDUCE_REF)
    assert np.allclose(op.dense().sum(axis=1), 1.0, atol=1e-15)


def test_reduce_averages_shared_cells():
    s = ref_scheme()
    rng = np.random.default_rng(0)
    full = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    bar = apply(build_reduce(s), full)
    grid = full.reshape(4, 4)
    assert bar[4] == pytest.approx(grid[:, 2].mean(), abs=1e-15)
    assert bar[0] == pytest.approx(grid[:2, 0].mean(), abs=1e-15)


def test_reduce_expand_is_identity():
    for s in random_schemes(30, seed=1):
        m1 = build_expand(s).dense()
        m2 = build_reduce(s).dense()
        assert np.allclose(m2 @ m1, np.eye(s.num_shared), atol=1e-15)


def test_regroup_fixture():
    op = build_regroup(ref_scheme())
    assert np.array_equal(op.dense(), REGROUP_REF)
    d = op.dense()
    assert np.array_equal(d.T @ d, np.eye(6))


def test_regroup_round_trip():
    rng = np.random.default_rng(2)
    for s in random_schemes(20, seed=3):
        op = build_regroup(s)
        v = rng.standard_normal(s.num_shared) + 1j * rng.standard_normal(s.num_shared)
        assert np.array_equal(apply_transpose(op, apply(op, v)), v)


def test_sweep_fixture():
    ops = build_sweep_sequence(ref_scheme())
    assert len(ops) == 2
    assert np.array_equal(ops[0].dense(), SWEEP_REF[0])
    assert np.array_equal(ops[1].dense(), SWEEP_REF[1])


def test_sweep_gathered_vectors():
    s = ref_scheme()
    bar = np.arange(1, 7, dtype=complex)
    ops = build_sweep_sequence(s)
    assert np.array_equal(trunc(apply(ops[0], bar), 4), [1, 3, 5, 6])
    assert np.array_equal(trunc(apply(ops[1], bar), 4), [2, 4, 5, 6])


def test_sweep_length_for_evaluation_scheme():
    s = build_scheme(S=8, nu=1, r=HALF, n_list=(4, 6))
    assert len(build_sweep_sequence(s)) == 2


def test_sweep_orthogonality_and_coverage():
    for s in random_schemes(25, seed=4):
        ops = build_sweep_sequence(s)
        gathered = set()
        for op in ops:
            d = op.dense()
            assert np.array_equal(d.T @ d, np.eye(s.num_shared))
            gathered.update(op.col_idx[: s.sweep_branches * s.num_terms].tolist())
        assert gathered == set(range(s.num_shared))


def test_trunc_and_merge():
    assert np.array_equal(trunc(np.array([1, 2, 3]), 2), [1, 2])
    assert np.array_equal(trunc(np.array([5]), 1), [5])
    with pytest.raises(ValueError):
        trunc(np.array([1.0]), 2)
    assert np.array_equal(merge(np.array([9]), np.array([1, 2]), 1), [9, 2])
    b = np.array([4, 5, 6])
    assert np.array_equal(merge(trunc(b, 2), b, 2), b)
    with pytest.raises(ValueError):
        merge(np.array([1, 2]), np.array([3]), 2)


def test_sweep_merge_round_trip():
    rng = np.random.default_rng(5)
    for s in random_schemes(10, seed=6):
        lead = s.sweep_branches * s.num_terms
        bar = rng.standard_normal(s.num_shared) + 1j * rng.standard_normal(s.num_shared)
        for op in build_sweep_sequence(s):
            moved = apply(op, bar)
            back = apply_transpose(op, merge(trunc(moved, lead), moved, lead))
            assert np.array_equal(back, bar)


def test_apply_matches_dense_product():
    rng = np.random.default_rng(7)
    for s in random_schemes(10, seed=8):
        v_bar = rng.standard_normal(s.num_shared) + 1j * rng.standard_normal(s.num_shared)
        v_full = rng.standard_normal(s.num_terms * s.S) + 1j * rng.standard_normal(s.num_terms * s.S)
        for op, v in [
            (build_expand(s), v_bar),
            (build_reduce(s), v_full),
            (build_regroup(s), v_bar),
        ]:
            assert np.allclose(apply(op, v), op.dense() @ v, atol=1e-15)
        with pytest.raises(ValueError):
            apply(build_expand(s), np.zeros(s.num_shared + 1, dtype=complex))


def test_apply_linearity():
    s = ref_scheme()
    rng = np.random.default_rng(9)
    u = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    op = build_regroup(s)
    assert np.array_equal(apply(op, 2 * u + 3j * v), 2 * apply(op, u) + 3j * apply(op, v))


def test_no_sharing_scheme_is_pure_permutation():
    s = build_scheme(S=4, nu=0, r=HALF, n_list=(3,))
    m1 = build_expand(s).dense()
    m2 = build_reduce(s).dense()
    assert np.array_equal(m1.sum(axis=0), np.ones(s.num_shared))
    assert np.array_equal(m2, m1.T)
    assert np.array_equal(m2 @ m1, np.eye(s.num_shared))


def test_dump_op(tmp_path):
    import json

    op = build_regroup(ref_scheme())
    path = tmp_path / "op.json"
    dump_op(op, path)
    payload = json.loads(path.read_text())
    assert payload["rows"] == payload["cols"] == 6
    assert len(payload["entries"]) == 6
