"""Recursion kernels: compiled extension when available, NumPy otherwise.

Shared conventions
------------------
All kernels process one block of samples and mutate their state arrays in
place: coefficient vectors, covariance blocks P (Hermitian, re-symmetrized
every step), and forgetting factors xi (grown as rho * xi + 1 - rho each
sample). `err_out` accumulates the per-branch sum of |prediction error| over
the block. Index arrays use np.intp. Every division inside a kernel is by a
real scalar; a nonpositive innovation power raises FloatingPointError.
"""

from dpdlab.kernels import _rpem_py

try:  # pragma: no cover - exercised only when the extension is built
    from dpdlab.kernels import _rpem as _impl
except ImportError:  # pragma: no cover
    _impl = _rpem_py

BACKEND = _impl.BACKEND

rpem_branches = _impl.rpem_branches
rpem_branches_projected = _impl.rpem_branches_projected
rpem_subgroups = _impl.rpem_subgroups
rpem_sweep = _impl.rpem_sweep

__all__ = [
    "BACKEND",
    "rpem_branches",
    "rpem_branches_projected",
    "rpem_subgroups",
    "rpem_sweep",
]
