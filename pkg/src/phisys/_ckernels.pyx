# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled element flux and Jacobian for sums of power kernels."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow

cnp.import_array()


def element_flux(const double[:, ::1] grads, const double[:, :, ::1] B,
                 const double[::1] meas, const double[::1] exps, double eta):
    """Local residuals ``(E, k)`` and Jacobians ``(E, k, k)``.

    ``phi(s) = sum_j s**(p_j - 2)`` evaluated at ``rho = sqrt(|g|^2 + eta^2)``.
    """
    cdef Py_ssize_t E = grads.shape[0], dim = grads.shape[1], k = B.shape[1]
    cdef Py_ssize_t nexp = exps.shape[0]
    cdef Py_ssize_t e, a, b, d, j
    cdef double rho2, rho, phi, dphi, c, p, t, bab
    cdef double ga[4]
    res_np = np.zeros((E, k))
    jac_np = np.zeros((E, k, k))
    cdef double[:, ::1] res = res_np
    cdef double[:, :, ::1] jac = jac_np
    with nogil:
        for e in range(E):
            rho2 = eta * eta
            for d in range(dim):
                rho2 = rho2 + grads[e, d] * grads[e, d]
            rho = sqrt(rho2)
            phi = 0.0
            dphi = 0.0
            if rho == 0.0:
                # finite limit of phi at 0: only p == 2 terms survive
                for j in range(nexp):
                    if exps[j] == 2.0:
                        phi = phi + 1.0
                c = 0.0
            else:
                for j in range(nexp):
                    p = exps[j]
                    t = pow(rho, p - 2.0)
                    phi = phi + t
                    dphi = dphi + (p - 2.0) * t / rho
                c = dphi / rho
            for a in range(k):
                ga[a] = 0.0
                for d in range(dim):
                    ga[a] = ga[a] + grads[e, d] * B[e, a, d]
                res[e, a] = meas[e] * phi * ga[a]
            for a in range(k):
                for b in range(k):
                    bab = 0.0
                    for d in range(dim):
                        bab = bab + B[e, a, d] * B[e, b, d]
                    jac[e, a, b] = meas[e] * (phi * bab + c * ga[a] * ga[b])
    return res_np, jac_np
