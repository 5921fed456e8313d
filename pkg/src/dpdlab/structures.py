"""Coefficient structures for the predistorter bank.

Two layouts exist. The full structure assigns every amplifier its own Q
coefficients (a length Q*S block vector). The grouped structure cuts the
count geometrically: the Q basis terms, in dominance order, are split into g
groups of sizes n_1..n_g, and terms in group i get S * r^(nu+i-1)
coefficients, each shared by a contiguous run of amplifiers. The shared
vector is laid out term-major inside each group: for every term, its
coefficients in order of the amplifier run they serve.

Amplifiers split into S * r^nu subgroups of r^(-nu); each subgroup is fed one
distinct predistorted signal (one RF chain each). Sharing is hierarchical:
one group-i coefficient covers r^(i-1) consecutive subgroups (case II: the
last group covers all of them). A subgroup "owns" the coefficients it is the
first to use; regrouping the shared vector subgroup-by-subgroup (owners
first, longest vectors first) gives the permuted layout used by the
subgroup-wise trainer.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from pathlib import Path

import numpy as np

from dpdlab.errors import InvalidSchemeError

FULL = "full"
GROUPED = "grouped"
REGROUPED = "regrouped"


@dataclass(frozen=True)
class ComplexityReport:
    """Hardware cost of a structure: multipliers, adders, RF chains."""

    multipliers: int
    adders: int
    rf_chains: int


@dataclass(frozen=True, eq=False)
class GroupingScheme:
    """Validated grouping parameters plus every derived index map.

    Built through `build_scheme`; fields other than (S, nu, r, n) are
    derived. All internal indices are 0-based.
    """

    S: int
    nu: int
    r: Fraction
    n: tuple
    case: str
    counts: tuple            # coefficients per group
    coeffs_per_term: tuple   # coefficients multiplying each term of a group
    span: tuple              # amplifiers served by one coefficient, per group
    sigma: tuple             # term-index offset of each group (len g+1)
    offsets: tuple           # shared-vector offset of each group (len g+1)
    subgroups: int           # distinct predistorted signals
    pas_per_subgroup: int
    T: tuple                 # regrouped layout: vectors per length class
    J: tuple                 # regrouped layout: vector length per class
    num_ops: int             # alternating-sweep operator count

    # ----- basic quantities -----

    @property
    def g(self) -> int:
        return len(self.n)

    @property
    def num_terms(self) -> int:
        return int(sum(self.n))

    @property
    def num_shared(self) -> int:
        """Length of the shared coefficient vector."""
        return int(sum(self.counts))

    @property
    def sweep_branches(self) -> int:
        """Full-length vectors in the regrouped layout (T_1)."""
        return self.subgroups // self.num_ops

    def hash(self) -> str:
        key = f"S={self.S};nu={self.nu};r={self.r};n={self.n};case={self.case}"
        return hashlib.sha1(key.encode()).hexdigest()[:12]

    def __eq__(self, other):
        if not isinstance(other, GroupingScheme):
            return NotImplemented
        return (self.S, self.nu, self.r, self.n) == (other.S, other.nu, other.r, other.n)

    def __hash__(self):
        return hash((self.S, self.nu, self.r, self.n))

    # ----- index maps -----

    def group_of_term(self, q: int) -> int:
        for j in range(self.g):
            if q < self.sigma[j + 1]:
                return j
        raise InvalidSchemeError(f"term index {q} out of range")

    def shared_index(self, l: int, q: int) -> int:
        """Shared-vector index of the coefficient serving amplifier l, term q."""
        j = self.group_of_term(q)
        rep = l // self.span[j]
        return self.offsets[j] + (q - self.sigma[j]) * self.coeffs_per_term[j] + rep

    def shared_slot(self, z: int) -> tuple:
        """Inverse of shared_index: (term q, first amplifier, amplifier count)."""
        for j in range(self.g):
            if z < self.offsets[j + 1]:
                rel = z - self.offsets[j]
                q_rel, rep = divmod(rel, self.coeffs_per_term[j])
                return self.sigma[j] + q_rel, rep * self.span[j], self.span[j]
        raise InvalidSchemeError(f"shared index {z} out of range")

    def cluster(self, j: int) -> int:
        """Subgroups sharing one group-j coefficient."""
        return self.span[j] // self.pas_per_subgroup

    def subgroup_shared_index(self, k: int, q: int) -> int:
        """Shared-vector index serving subgroup k for term q."""
        return self.shared_index(k * self.pas_per_subgroup, q)

    def owned_groups(self, k: int) -> int:
        """1 + the largest group whose coefficient subgroup k introduces."""
        top = 0
        for j in range(self.g):
            if k % self.cluster(j) == 0:
                top = j
        return top + 1

    def expand_map(self) -> np.ndarray:
        """(S, Q) shared-vector index for every full-structure cell."""
        out = np.empty((self.S, self.num_terms), dtype=np.intp)
        for l in range(self.S):
            for q in range(self.num_terms):
                out[l, q] = self.shared_index(l, q)
        return out

    def shared_slots(self) -> tuple:
        """Arrays (term, first amplifier, count) for every shared slot."""
        nm = self.num_shared
        q = np.empty(nm, dtype=np.intp)
        l0 = np.empty(nm, dtype=np.intp)
        cnt = np.empty(nm, dtype=np.intp)
        for z in range(nm):
            q[z], l0[z], cnt[z] = self.shared_slot(z)
        return q, l0, cnt

    def regroup_order(self) -> np.ndarray:
        """Shared-vector index for each slot of the regrouped layout.

        Subgroups appear owners-first (full vectors, ascending subgroup),
        then progressively shorter ownership classes; within a subgroup its
        owned coefficients appear in term order.
        """
        order = []
        for length_class in range(self.g):
            top = self.g - length_class
            for k in range(self.subgroups):
                if self.owned_groups(k) != top:
                    continue
                for q in range(self.sigma[top]):
                    order.append(self.subgroup_shared_index(k, q))
        return np.asarray(order, dtype=np.intp)

    def regroup_offsets(self) -> np.ndarray:
        """Branch boundaries of the regrouped layout (len subgroups + 1)."""
        lengths = []
        for length_class in range(self.g):
            lengths.extend([self.J[length_class]] * self.T[length_class])
        return np.concatenate([[0], np.cumsum(lengths)]).astype(np.intp)

    def sweep_gather(self) -> np.ndarray:
        """(num_ops, T_1, Q) shared-vector indices gathered by each operator.

        Operator t pairs, within every top-level cluster, the t-th subgroup's
        used coefficient set (one slot per term, term order).
        """
        t1 = self.sweep_branches
        out = np.empty((self.num_ops, t1, self.num_terms), dtype=np.intp)
        for t in range(self.num_ops):
            for c in range(t1):
                k = c * self.num_ops + t
                for q in range(self.num_terms):
                    out[t, c, q] = self.subgroup_shared_index(k, q)
        return out


def build_scheme(S: int, nu: int, r, n_list) -> GroupingScheme:
    """Validate grouping parameters and derive every structural quantity.

    Raises InvalidSchemeError when a per-group coefficient count is
    fractional or neither geometric-sequence case applies.
    """
    r = Fraction(r)
    if not 0 < r < 1 or r.numerator != 1:
        raise InvalidSchemeError("ratio must be the reciprocal of an integer >= 2")
    if S < 1 or nu < 0:
        raise InvalidSchemeError("need S >= 1 and nu >= 0")
    n = tuple(int(v) for v in n_list)
    if len(n) == 0 or any(v < 1 for v in n):
        raise InvalidSchemeError("group sizes must be positive")
    g = len(n)

    per_term = [S * r ** (nu + j) for j in range(g)]
    if per_term[-1] >= 1:
        case = "I"
    elif g >= 2 and per_term[-2] >= 1:
        case = "II"
    else:
        raise InvalidSchemeError(
            "last group would get under one coefficient per term with no "
            "preceding full group"
        )
    required_integer = per_term[:-1] + ([per_term[-1]] if case == "I" else [])
    for j, c in enumerate(required_integer):
        if c.denominator != 1:
            raise InvalidSchemeError(
                f"group {j + 1} coefficient count {c} is not an integer"
            )

    inv_r = int(1 / r)
    coeffs_per_term = [int(c) for c in per_term[:-1]]
    span = [inv_r ** (nu + j) for j in range(g - 1)]
    if case == "I":
        coeffs_per_term.append(int(per_term[-1]))
        span.append(inv_r ** (nu + g - 1))
    else:
        coeffs_per_term.append(1)
        span.append(S)
    counts = tuple(n[j] * coeffs_per_term[j] for j in range(g))

    sigma = (0,) + tuple(np.cumsum(n).tolist())
    offsets = (0,) + tuple(np.cumsum(counts).tolist())
    subgroups = int(S * r**nu)
    pas_per_subgroup = inv_r**nu

    # Regrouped layout classes, counted from subgroup ownership.
    clusters = [span[j] // pas_per_subgroup for j in range(g)]
    T = [0] * g
    J = tuple(sigma[g - tau] for tau in range(g))
    for k in range(subgroups):
        owned = max(j for j in range(g) if k % clusters[j] == 0) + 1
        T[g - owned] += 1

    return GroupingScheme(
        S=S,
        nu=nu,
        r=r,
        n=n,
        case=case,
        counts=counts,
        coeffs_per_term=tuple(coeffs_per_term),
        span=tuple(span),
        sigma=sigma,
        offsets=offsets,
        subgroups=subgroups,
        pas_per_subgroup=pas_per_subgroup,
        T=tuple(T),
        J=J,
        num_ops=clusters[-1],
    )


def complexity(scheme: GroupingScheme) -> ComplexityReport:
    """Multiplier/adder/RF-chain counts of the grouped structure."""
    n_m = scheme.num_shared
    n_a = n_m - ceil(scheme.S * scheme.r ** (scheme.nu + scheme.g - 1))
    if len(set(scheme.n)) == 1:
        # equal group sizes admit a closed geometric-series form; keep the
        # general count honest against it
        n0, r, g = scheme.n[0], scheme.r, scheme.g
        if scheme.case == "I":
            closed = n0 * scheme.S * r**scheme.nu * (1 - r**g) / (1 - r)
        else:
            closed = n0 * scheme.S * r**scheme.nu * (1 - r ** (g - 1)) / (1 - r) + n0
        if closed != n_m:
            raise InvalidSchemeError("inconsistent multiplier count")
    return ComplexityReport(multipliers=n_m, adders=n_a, rf_chains=scheme.subgroups)


def ff_complexity(S: int, Q: int) -> ComplexityReport:
    """Counts for the full structure: one coefficient set per amplifier."""
    return ComplexityReport(multipliers=Q * S, adders=(Q - 1) * S, rf_chains=S)


@dataclass(frozen=True)
class CoeffVec:
    """A coefficient vector tagged with its layout."""

    shape: str
    data: np.ndarray
    S: int
    Q: int
    scheme: GroupingScheme = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if self.shape == FULL:
            expected = self.Q * self.S
        elif self.shape in (GROUPED, REGROUPED):
            if self.scheme is None:
                raise InvalidSchemeError("grouped vectors need their scheme")
            expected = self.scheme.num_shared
        else:
            raise InvalidSchemeError(f"unknown shape tag {self.shape!r}")
        if data.shape != (expected,):
            raise InvalidSchemeError(
                f"{self.shape} vector must have length {expected}, got {data.shape}"
            )
        if not np.all(np.isfinite(data.real)) or not np.all(np.isfinite(data.imag)):
            raise InvalidSchemeError("coefficients must be finite")
        object.__setattr__(self, "data", data)

    def matrix(self) -> np.ndarray:
        """Full layout as an (S, Q) matrix."""
        if self.shape != FULL:
            raise InvalidSchemeError("matrix() applies to the full layout")
        return self.data.reshape(self.S, self.Q)


def ff_predistort(phi, psi, S: int) -> np.ndarray:
    """Per-amplifier outputs x_l = Phi_l^T Psi for the full structure."""
    phi = phi.data if isinstance(phi, CoeffVec) else np.asarray(phi, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if phi.size % S != 0 or phi.size // S != psi.size:
        raise ValueError("coefficient block size does not match the basis length")
    return phi.reshape(S, psi.size) @ psi


def lc_predistort(phi_bar, psi, scheme: GroupingScheme) -> np.ndarray:
    """Distinct per-subgroup outputs of the grouped structure.

    Evaluates by expanding the shared vector to the full layout and keeping
    one row per subgroup, which is exactly the shared-coefficient semantics.
    """
    data = phi_bar.data if isinstance(phi_bar, CoeffVec) else np.asarray(phi_bar, dtype=complex)
    if data.shape != (scheme.num_shared,):
        raise ValueError("shared vector length does not match the scheme")
    expanded = data[scheme.expand_map()]
    X = ff_predistort(expanded.ravel(), psi, scheme.S)
    return X[:: scheme.pas_per_subgroup].copy()


def fan_out(x_bar, scheme: GroupingScheme) -> np.ndarray:
    """Distribute subgroup signals to their amplifiers."""
    x_bar = np.asarray(x_bar, dtype=complex)
    if x_bar.shape != (scheme.subgroups,):
        raise ValueError("expected one signal per subgroup")
    return np.repeat(x_bar, scheme.pas_per_subgroup)


def dump_coeffs(vec: CoeffVec, path):
    """JSON dump as [re, im] pairs plus a layout header."""
    payload = {
        "shape": vec.shape,
        "S": vec.S,
        "Q": vec.Q,
        "scheme_hash": vec.scheme.hash() if vec.scheme is not None else None,
        "data": [[z.real, z.imag] for z in vec.data],
    }
    Path(path).write_text(json.dumps(payload, indent=2))


def load_coeffs(path, scheme: GroupingScheme = None) -> CoeffVec:
    payload = json.loads(Path(path).read_text())
    if payload["scheme_hash"] is not None:
        if scheme is None or scheme.hash() != payload["scheme_hash"]:
            raise InvalidSchemeError("coefficient file belongs to a different scheme")
    data = np.array([complex(re, im) for re, im in payload["data"]])
    return CoeffVec(
        shape=payload["shape"], data=data, S=payload["S"], Q=payload["Q"], scheme=scheme
    )
