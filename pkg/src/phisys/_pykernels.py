"""Numpy implementation of the element flux kernels."""

import numpy as np


def _local(grads, B, meas, phi, c):
    ga = np.einsum("ed,ead->ea", grads, B)
    res = (meas * phi)[:, None] * ga
    bab = np.einsum("ead,ebd->eab", B, B)
    jac = meas[:, None, None] * (phi[:, None, None] * bab + c[:, None, None] * ga[:, :, None] * ga[:, None, :])
    return res, jac


def element_flux(grads, B, meas, exps, eta):
    """Same contract as the compiled kernel: sums of power kernels."""
    rho = np.sqrt(np.einsum("ed,ed->e", grads, grads) + eta * eta)
    safe = np.where(rho > 0, rho, 1.0)
    phi = np.zeros_like(rho)
    dphi = np.zeros_like(rho)
    for p in exps:
        t = safe ** (p - 2.0)
        phi += t
        dphi += (p - 2.0) * t / safe
    c = dphi / safe
    zero = rho == 0
    # finite limit of phi at 0: only p == 2 terms survive
    phi[zero] = float(sum(1.0 for p in exps if p == 2.0))
    c[zero] = 0.0
    return _local(grads, B, meas, phi, c)


def element_flux_generic(grads, B, meas, kernel, eta):
    """Flux for an arbitrary kernel exposing ``phi`` and ``dsphi``."""
    rho = np.sqrt(np.einsum("ed,ed->e", grads, grads) + eta * eta)
    safe = np.where(rho > 0, rho, 1.0)
    phi = np.asarray(kernel.phi(safe), dtype=float)
    # d/drho of phi(rho) = ((s phi)' - phi) / rho
    c = (np.asarray(kernel.dsphi(safe), dtype=float) - phi) / safe**2
    zero = rho == 0
    if zero.any():
        with np.errstate(all="ignore"):
            p0 = float(np.asarray(kernel.phi(np.zeros(1)), dtype=float)[0])
        phi = np.where(zero, p0 if np.isfinite(p0) else 0.0, phi)
        c = np.where(zero, 0.0, c)
    return _local(grads, B, meas, phi, c)
