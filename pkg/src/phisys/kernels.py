"""Element flux backend selection and global assembly.

The compiled extension is used when it imports; set ``PHISYS_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

import numpy as np
import scipy.sparse as sp

from . import _pykernels

BACKEND = "python"
_compiled = None
if os.environ.get("PHISYS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _compiled

        BACKEND = "cython"
    except ImportError:
        _compiled = None


def element_flux(grads, B, meas, kernel, eta, backend=None):
    """Local flux residuals and Jacobians for ``-div(phi(|grad u|) grad u)``."""
    backend = backend or BACKEND
    if kernel.builtin:
        exps = np.ascontiguousarray(kernel.exponents, dtype=float)
        if backend == "cython" and _compiled is not None:
            return _compiled.element_flux(
                np.ascontiguousarray(grads, dtype=float),
                np.ascontiguousarray(B, dtype=float),
                np.ascontiguousarray(meas, dtype=float),
                exps,
                float(eta),
            )
        return _pykernels.element_flux(grads, B, meas, exps, eta)
    return _pykernels.element_flux_generic(grads, B, meas, kernel, eta)


def scatter_vector(mesh, local):
    return np.bincount(mesh.elements.ravel(), weights=np.asarray(local).ravel(), minlength=mesh.n_nodes)


def scatter_matrix(mesh, local):
    el = mesh.elements
    k = el.shape[1]
    rows = np.repeat(el, k, axis=1).ravel()
    cols = np.tile(el, (1, k)).ravel()
    return sp.csr_matrix((np.asarray(local).ravel(), (rows, cols)), shape=(mesh.n_nodes,) * 2)


def flux_operator(mesh, values, kernel, eta, jacobian=True, backend=None):
    """Global flux vector and (optionally) its sparse Jacobian."""
    grads = np.einsum("ea,ead->ed", values[mesh.elements], mesh.grad_basis)
    res, jac = element_flux(grads, mesh.grad_basis, mesh.measures, kernel, eta, backend)
    F = scatter_vector(mesh, res)
    return (F, scatter_matrix(mesh, jac)) if jacobian else (F, None)
