"""Linear reshape operators between coefficient layouts.

Four kinds exist, all stored as sparse triplets and applied as gathers:

- expand: shared -> full, replicating every shared coefficient into each
  full-structure cell it serves (rows are one-hot).
- reduce: full -> shared, averaging the cells that share a coefficient
  (rows sum to one; the single nonzero per column is 1/average-count).
- regroup: a permutation reordering the shared vector subgroup-by-subgroup.
- sweep: a sequence of permutations; operator t moves, for every top-level
  cluster, the coefficient set used by the cluster's t-th subgroup into the
  leading block.

Dense renderings exist only for inspection and fixtures; hot paths use the
index arrays directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dpdlab.errors import InvalidSchemeError
from dpdlab.structures import GroupingScheme

EXPAND = "expand"
REDUCE = "reduce"
REGROUP = "regroup"
SWEEP = "sweep"


@dataclass(frozen=True)
class ReshapeOp:
    """Sparse linear operator in coordinate form."""

    kind: str
    rows: int
    cols: int
    row_idx: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray
    scheme: GroupingScheme

    @property
    def pure_gather(self) -> bool:
        """True when every row selects exactly one source entry with weight 1."""
        return (
            self.row_idx.size == self.rows
            and np.array_equal(self.row_idx, np.arange(self.rows))
            and np.all(self.values == 1.0)
        )

    def dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols))
        np.add.at(out, (self.row_idx, self.col_idx), self.values)
        return out


def apply(op: ReshapeOp, v) -> np.ndarray:
    """Sparse matrix-vector product; a plain gather for 0/1 operators."""
    v = np.asarray(v)
    if v.shape != (op.cols,):
        raise ValueError(f"operator expects length {op.cols}, got {v.shape}")
    if op.pure_gather:
        return v[op.col_idx].copy()
    out = np.zeros(op.rows, dtype=np.result_type(v.dtype, op.values.dtype))
    np.add.at(out, op.row_idx, op.values * v[op.col_idx])
    return out


def apply_transpose(op: ReshapeOp, v) -> np.ndarray:
    """Product with the transposed operator (scatter for permutations)."""
    v = np.asarray(v)
    if v.shape != (op.rows,):
        raise ValueError(f"transposed operator expects length {op.rows}, got {v.shape}")
    out = np.zeros(op.cols, dtype=np.result_type(v.dtype, op.values.dtype))
    np.add.at(out, op.col_idx, op.values * v[op.row_idx])
    return out


def build_expand(scheme: GroupingScheme) -> ReshapeOp:
    """Shared -> full replication (one-hot rows, column sums = share counts)."""
    Q, S = scheme.num_terms, scheme.S
    cols = scheme.expand_map().ravel()
    return ReshapeOp(
        kind=EXPAND,
        rows=Q * S,
        cols=scheme.num_shared,
        row_idx=np.arange(Q * S, dtype=np.intp),
        col_idx=cols.astype(np.intp),
        values=np.ones(Q * S),
        scheme=scheme,
    )


def build_reduce(scheme: GroupingScheme) -> ReshapeOp:
    """Full -> shared averaging; left inverse of the expansion."""
    Q = scheme.num_terms
    rows, cols, vals = [], [], []
    term, l0, cnt = scheme.shared_slots()
    for z in range(scheme.num_shared):
        for l in range(l0[z], l0[z] + cnt[z]):
            rows.append(z)
            cols.append(l * Q + term[z])
            vals.append(1.0 / cnt[z])
    return ReshapeOp(
        kind=REDUCE,
        rows=scheme.num_shared,
        cols=Q * scheme.S,
        row_idx=np.asarray(rows, dtype=np.intp),
        col_idx=np.asarray(cols, dtype=np.intp),
        values=np.asarray(vals),
        scheme=scheme,
    )


def _permutation(kind, sources, scheme) -> ReshapeOp:
    nm = scheme.num_shared
    sources = np.asarray(sources, dtype=np.intp)
    if sorted(sources.tolist()) != list(range(nm)):
        raise InvalidSchemeError("permutation sources must cover every slot once")
    return ReshapeOp(
        kind=kind,
        rows=nm,
        cols=nm,
        row_idx=np.arange(nm, dtype=np.intp),
        col_idx=sources,
        values=np.ones(nm),
        scheme=scheme,
    )


def build_regroup(scheme: GroupingScheme) -> ReshapeOp:
    """Permutation from the term-major shared layout to subgroup-major."""
    return _permutation(REGROUP, scheme.regroup_order(), scheme)


def build_sweep_sequence(scheme: GroupingScheme) -> list:
    """One permutation per sweep step; gathered slots lead, rest follow."""
    gather = scheme.sweep_gather()
    nm = scheme.num_shared
    ops = []
    for t in range(scheme.num_ops):
        head = gather[t].ravel()
        taken = np.zeros(nm, dtype=bool)
        taken[head] = True
        sources = np.concatenate([head, np.flatnonzero(~taken)])
        ops.append(_permutation(SWEEP, sources, scheme))
    return ops


def trunc(v, Q: int) -> np.ndarray:
    """First Q entries of a vector."""
    v = np.asarray(v)
    if v.size < Q:
        raise ValueError(f"need at least {Q} entries, got {v.size}")
    return v[:Q].copy()


def merge(a, b, Q: int) -> np.ndarray:
    """Copy of b with its first Q entries replaced by a."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != (Q,) or b.size < Q:
        raise ValueError("merge expects len(a) == Q <= len(b)")
    out = b.copy()
    out[:Q] = a
    return out


def dump_op(op: ReshapeOp, path):
    """Sparse triplet dump for debugging."""
    payload = {
        "kind": op.kind,
        "rows": op.rows,
        "cols": op.cols,
        "entries": [
            [int(r), int(c), float(v)]
            for r, c, v in zip(op.row_idx, op.col_idx, op.values)
        ],
    }
    Path(path).write_text(json.dumps(payload))
