# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled recursion kernels; same contracts as `_rpem_py`."""

import numpy as np

cimport cython

cdef extern from "complex.h" nogil:
    double complex conj(double complex)
    double creal(double complex)
    double cabs(double complex)

BACKEND = "compiled"


cdef inline int _branch_step(double complex[:, :] P,
                             double complex[:] psi,
                             double complex[:] k,
                             double xi) nogil:
    """Covariance update; k receives P @ conj(psi) scaled into the gain k/Z.

    Returns -1 on numerical breakdown (nonpositive innovation power).
    """
    cdef Py_ssize_t Q = psi.shape[0]
    cdef Py_ssize_t a, b
    cdef double complex acc, v
    cdef double Z, invZ, invxi

    for a in range(Q):
        acc = 0
        for b in range(Q):
            acc = acc + P[a, b] * conj(psi[b])
        k[a] = acc
    acc = 0
    for a in range(Q):
        acc = acc + psi[a] * k[a]
    Z = creal(acc) + xi
    if Z <= 0.0:
        return -1
    invZ = 1.0 / Z
    invxi = 1.0 / xi
    for a in range(Q):
        for b in range(Q):
            P[a, b] = (P[a, b] - k[a] * conj(k[b]) * invZ) * invxi
    # re-hermitize to stop floating-point drift
    for a in range(Q):
        for b in range(a, Q):
            v = 0.5 * (P[a, b] + conj(P[b, a]))
            P[a, b] = v
            P[b, a] = conj(v)
    for a in range(Q):
        k[a] = k[a] * invZ
    return 0


def rpem_branches(double complex[:, ::1] x,
                  double complex[:, :, ::1] basis,
                  double complex[:, ::1] coeffs,
                  double complex[:, :, ::1] P,
                  double[::1] xi,
                  double rho,
                  double[::1] err_out):
    cdef Py_ssize_t B = x.shape[0]
    cdef Py_ssize_t nb = x.shape[1]
    cdef Py_ssize_t Q = basis.shape[2]
    cdef Py_ssize_t i, b, q
    cdef double complex e, acc
    cdef double complex[::1] k = np.empty(Q, dtype=complex)

    for i in range(B):
        for b in range(nb):
            acc = 0
            for q in range(Q):
                acc = acc + coeffs[b, q] * basis[b, i, q]
            e = x[i, b] - acc
            err_out[b] += cabs(e)
            xi[b] = rho * xi[b] + 1.0 - rho
            if _branch_step(P[b], basis[b, i], k, xi[b]) < 0:
                raise FloatingPointError(
                    "nonpositive innovation power; recursion broke down")
            for q in range(Q):
                coeffs[b, q] = coeffs[b, q] + e * k[q]


def rpem_branches_projected(double complex[:, ::1] x,
                            double complex[:, :, ::1] basis,
                            double complex[:, ::1] coeffs,
                            double complex[:, :, ::1] P,
                            double[::1] xi,
                            double rho,
                            Py_ssize_t[::1] bar_q,
                            Py_ssize_t[::1] bar_l0,
                            Py_ssize_t[::1] bar_cnt,
                            Py_ssize_t[:, ::1] ff_col,
                            double[::1] err_out):
    cdef Py_ssize_t B = x.shape[0]
    cdef Py_ssize_t nb = x.shape[1]
    cdef Py_ssize_t Q = basis.shape[2]
    cdef Py_ssize_t n_slots = bar_q.shape[0]
    cdef Py_ssize_t i, b, q, z, l
    cdef double complex e, acc
    cdef double complex[::1] k = np.empty(Q, dtype=complex)
    cdef double complex[::1] bar = np.empty(n_slots, dtype=complex)

    for i in range(B):
        for b in range(nb):
            acc = 0
            for q in range(Q):
                acc = acc + coeffs[b, q] * basis[b, i, q]
            e = x[i, b] - acc
            err_out[b] += cabs(e)
            xi[b] = rho * xi[b] + 1.0 - rho
            if _branch_step(P[b], basis[b, i], k, xi[b]) < 0:
                raise FloatingPointError(
                    "nonpositive innovation power; recursion broke down")
            for q in range(Q):
                coeffs[b, q] = coeffs[b, q] + e * k[q]
        for z in range(n_slots):
            acc = 0
            for l in range(bar_l0[z], bar_l0[z] + bar_cnt[z]):
                acc = acc + coeffs[l, bar_q[z]]
            bar[z] = acc / <double>bar_cnt[z]
        for b in range(nb):
            for q in range(Q):
                coeffs[b, q] = bar[ff_col[b, q]]


def rpem_subgroups(double complex[:, ::1] x,
                   double complex[:, :, ::1] basis,
                   double complex[::1] coeffs_prime,
                   double complex[::1] P_flat,
                   Py_ssize_t[::1] p_off,
                   Py_ssize_t[::1] br_off,
                   double[::1] xi,
                   double rho,
                   Py_ssize_t[::1] prime_q,
                   Py_ssize_t[::1] prime_l0,
                   Py_ssize_t[::1] prime_cnt,
                   Py_ssize_t[:, ::1] ff_prime,
                   double[::1] err_out):
    cdef Py_ssize_t B = x.shape[0]
    cdef Py_ssize_t S = x.shape[1]
    cdef Py_ssize_t Q = basis.shape[2]
    cdef Py_ssize_t nb = xi.shape[0]
    cdef Py_ssize_t n_slots = coeffs_prime.shape[0]
    cdef Py_ssize_t i, b, q, z, l, lo, hi, J, a, c, base
    cdef double complex ev, acc, v
    cdef double Z, invZ, invxi
    cdef double complex[::1] e = np.empty(S, dtype=complex)
    cdef double complex[::1] psi_bar = np.empty(n_slots, dtype=complex)
    cdef double complex[::1] err_bar = np.empty(n_slots, dtype=complex)
    cdef double complex[::1] k = np.empty(n_slots, dtype=complex)

    for i in range(B):
        for l in range(S):
            acc = 0
            for q in range(Q):
                acc = acc + basis[l, i, q] * coeffs_prime[ff_prime[l, q]]
            ev = x[i, l] - acc
            e[l] = ev
            err_out[l] += cabs(ev)
        for z in range(n_slots):
            acc = 0
            v = 0
            for l in range(prime_l0[z], prime_l0[z] + prime_cnt[z]):
                acc = acc + basis[l, i, prime_q[z]]
                v = v + e[l]
            psi_bar[z] = acc / <double>prime_cnt[z]
            err_bar[z] = v / <double>prime_cnt[z]
        for b in range(nb):
            xi[b] = rho * xi[b] + 1.0 - rho
            invxi = 1.0 / xi[b]
            lo = br_off[b]
            hi = br_off[b + 1]
            J = hi - lo
            base = p_off[b]
            for a in range(J):
                acc = 0
                for c in range(J):
                    acc = acc + P_flat[base + a * J + c] * conj(psi_bar[lo + c])
                k[a] = acc
            acc = 0
            for a in range(J):
                acc = acc + psi_bar[lo + a] * k[a]
            Z = creal(acc) + xi[b]
            if Z <= 0.0:
                raise FloatingPointError(
                    "nonpositive innovation power; recursion broke down")
            invZ = 1.0 / Z
            for a in range(J):
                for c in range(J):
                    P_flat[base + a * J + c] = (
                        P_flat[base + a * J + c] - k[a] * conj(k[c]) * invZ
                    ) * invxi
            for a in range(J):
                for c in range(a, J):
                    v = 0.5 * (P_flat[base + a * J + c] + conj(P_flat[base + c * J + a]))
                    P_flat[base + a * J + c] = v
                    P_flat[base + c * J + a] = conj(v)
            for a in range(J):
                coeffs_prime[lo + a] = coeffs_prime[lo + a] + k[a] * invZ * err_bar[lo + a]


def rpem_sweep(double complex[:, ::1] x,
               double complex[:, :, ::1] basis,
               double complex[::1] coeffs_bar,
               double complex[:, :, :, ::1] P4,
               double[:, ::1] xi4,
               double rho,
               Py_ssize_t[::1] bar_q,
               Py_ssize_t[::1] bar_l0,
               Py_ssize_t[::1] bar_cnt,
               Py_ssize_t[:, :, ::1] gather,
               Py_ssize_t[:, ::1] ff_col,
               Py_ssize_t n0,
               Py_ssize_t period,
               double[::1] err_out):
    cdef Py_ssize_t B = x.shape[0]
    cdef Py_ssize_t S = x.shape[1]
    cdef Py_ssize_t n_ops = gather.shape[0]
    cdef Py_ssize_t T1 = gather.shape[1]
    cdef Py_ssize_t Q = gather.shape[2]
    cdef Py_ssize_t i, t, c, l, q, z
    cdef double complex ev, acc, v
    cdef double complex[::1] e = np.empty(S, dtype=complex)
    cdef double complex[::1] psi = np.empty(Q, dtype=complex)
    cdef double complex[::1] eb = np.empty(Q, dtype=complex)
    cdef double complex[::1] k = np.empty(Q, dtype=complex)

    for i in range(B):
        t = ((n0 + i) // period) % n_ops
        for l in range(S):
            acc = 0
            for q in range(Q):
                acc = acc + basis[l, i, q] * coeffs_bar[ff_col[l, q]]
            ev = x[i, l] - acc
            e[l] = ev
            err_out[l] += cabs(ev)
        for c in range(T1):
            xi4[t, c] = rho * xi4[t, c] + 1.0 - rho
            for q in range(Q):
                z = gather[t, c, q]
                acc = 0
                v = 0
                for l in range(bar_l0[z], bar_l0[z] + bar_cnt[z]):
                    acc = acc + basis[l, i, bar_q[z]]
                    v = v + e[l]
                psi[q] = acc / <double>bar_cnt[z]
                eb[q] = v / <double>bar_cnt[z]
            if _branch_step(P4[t, c], psi, k, xi4[t, c]) < 0:
                raise FloatingPointError(
                    "nonpositive innovation power; recursion broke down")
            for q in range(Q):
                z = gather[t, c, q]
                coeffs_bar[z] = coeffs_bar[z] + k[q] * eb[q]
