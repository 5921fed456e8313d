"""NumPy fallback for the recursion kernels.

Mirrors the compiled extension exactly; every routine advances branch states
sample by sample through one block. Arrays are updated in place. See the
package docstring of `dpdlab.kernels` for the shared conventions.
"""

import numpy as np

BACKEND = "python"


def _step(coeffs, P, xi_arr, b, psi, e, rho):
    """One covariance + coefficient update for branch b. Returns |e|."""
    xi_arr[b] = rho * xi_arr[b] + 1.0 - rho
    xi = xi_arr[b]
    k = P[b] @ np.conj(psi)
    Z = float(np.real(psi @ k)) + xi
    if Z <= 0.0:
        raise FloatingPointError("nonpositive innovation power; recursion broke down")
    P[b] -= np.outer(k, np.conj(k)) / Z
    P[b] /= xi
    P[b] += P[b].conj().T
    P[b] *= 0.5
    coeffs_delta = (e / Z) * k
    return k, Z, coeffs_delta


def rpem_branches(x, basis, coeffs, P, xi, rho, err_out):
    """Independent per-branch recursion (one target column per branch).

    x: (B, nb) targets; basis: (nb, B, Q); coeffs: (nb, Q); P: (nb, Q, Q);
    xi: (nb,); err_out: (nb,) accumulates sum |e| over the block.
    """
    B, nb = x.shape
    for i in range(B):
        for b in range(nb):
            psi = basis[b, i]
            e = x[i, b] - coeffs[b] @ psi
            err_out[b] += abs(e)
            _, _, delta = _step(coeffs, P, xi, b, psi, e, rho)
            coeffs[b] += delta


def rpem_branches_projected(
    x, basis, coeffs, P, xi, rho, bar_q, bar_l0, bar_cnt, ff_col, err_out
):
    """Per-branch recursion with a shared-coefficient projection every sample.

    After all branches update, coefficients feeding the same shared slot are
    replaced by their average: slot z averages coeffs[bar_l0[z]:bar_l0[z] +
    bar_cnt[z], bar_q[z]], and ff_col maps every (branch, term) cell back to
    its slot.
    """
    B, nb = x.shape
    n_slots = bar_q.shape[0]
    bar = np.empty(n_slots, dtype=complex)
    for i in range(B):
        for b in range(nb):
            psi = basis[b, i]
            e = x[i, b] - coeffs[b] @ psi
            err_out[b] += abs(e)
            _, _, delta = _step(coeffs, P, xi, b, psi, e, rho)
            coeffs[b] += delta
        for z in range(n_slots):
            lo = bar_l0[z]
            bar[z] = coeffs[lo : lo + bar_cnt[z], bar_q[z]].mean()
        for b in range(nb):
            coeffs[b] = bar[ff_col[b]]


def rpem_subgroups(
    x,
    basis,
    coeffs_prime,
    P_flat,
    p_off,
    br_off,
    xi,
    rho,
    prime_q,
    prime_l0,
    prime_cnt,
    ff_prime,
    err_out,
):
    """Recursion over subgroup branches of varying size.

    coeffs_prime holds the shared coefficients in subgroup order; branch b
    owns the slice br_off[b]:br_off[b+1] and its covariance lives in
    P_flat[p_off[b]:p_off[b+1]] (row-major square block). Per sample the
    error is computed per amplifier with the expanded coefficients (via
    ff_prime), then basis values and errors are averaged onto each shared
    slot (prime_q / prime_l0 / prime_cnt give the term and amplifier range),
    and each branch does one update with a per-slot error.
    """
    B, S = x.shape
    nb = xi.shape[0]
    n_slots = coeffs_prime.shape[0]
    e = np.empty(S, dtype=complex)
    psi_bar = np.empty(n_slots, dtype=complex)
    err_bar = np.empty(n_slots, dtype=complex)
    for i in range(B):
        for l in range(S):
            e[l] = x[i, l] - basis[l, i] @ coeffs_prime[ff_prime[l]]
            err_out[l] += abs(e[l])
        for z in range(n_slots):
            lo = prime_l0[z]
            hi = lo + prime_cnt[z]
            psi_bar[z] = basis[lo:hi, i, prime_q[z]].mean()
            err_bar[z] = e[lo:hi].mean()
        for b in range(nb):
            xi[b] = rho * xi[b] + 1.0 - rho
            lo, hi = br_off[b], br_off[b + 1]
            J = hi - lo
            Pb = P_flat[p_off[b] : p_off[b + 1]].reshape(J, J)
            psi = psi_bar[lo:hi]
            k = Pb @ np.conj(psi)
            Z = float(np.real(psi @ k)) + xi[b]
            if Z <= 0.0:
                raise FloatingPointError(
                    "nonpositive innovation power; recursion broke down"
                )
            Pb -= np.outer(k, np.conj(k)) / Z
            Pb /= xi[b]
            sym = (Pb + Pb.conj().T) * 0.5
            Pb[:] = sym
            coeffs_prime[lo:hi] += (k / Z) * err_bar[lo:hi]


def rpem_sweep(
    x,
    basis,
    coeffs_bar,
    P4,
    xi4,
    rho,
    bar_q,
    bar_l0,
    bar_cnt,
    gather,
    ff_col,
    n0,
    period,
    err_out,
):
    """Alternating-sweep recursion over gathered coefficient sets.

    Operator t (cycling every `period` samples, n0 = global index of the
    block's first sample) gathers, for each of the T1 branch clusters, Q
    shared-coefficient slots listed in gather[t, c]. Each branch updates its
    gathered slots in place with per-slot averaged errors; ungathered slots
    are untouched.
    """
    B, S = x.shape
    n_ops, T1, Q = gather.shape
    e = np.empty(S, dtype=complex)
    psi = np.empty(Q, dtype=complex)
    eb = np.empty(Q, dtype=complex)
    for i in range(B):
        t = ((n0 + i) // period) % n_ops
        for l in range(S):
            e[l] = x[i, l] - basis[l, i] @ coeffs_bar[ff_col[l]]
            err_out[l] += abs(e[l])
        for c in range(T1):
            xi4[t, c] = rho * xi4[t, c] + 1.0 - rho
            idx = gather[t, c]
            for q in range(Q):
                z = idx[q]
                lo = bar_l0[z]
                hi = lo + bar_cnt[z]
                psi[q] = basis[lo:hi, i, bar_q[z]].mean()
                eb[q] = e[lo:hi].mean()
            Pb = P4[t, c]
            k = Pb @ np.conj(psi)
            Z = float(np.real(psi @ k)) + xi4[t, c]
            if Z <= 0.0:
                raise FloatingPointError(
                    "nonpositive innovation power; recursion broke down"
                )
            Pb -= np.outer(k, np.conj(k)) / Z
            Pb /= xi4[t, c]
            sym = (Pb + Pb.conj().T) * 0.5
            Pb[:] = sym
            coeffs_bar[idx] += (k / Z) * eb
