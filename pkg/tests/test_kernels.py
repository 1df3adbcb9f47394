import numpy as np
import pytest

from phisys import kernels
from phisys._pykernels import element_flux_generic
from phisys.grid import Mesh
from phisys.nfunction import PhiKernel

KERNELS = [PhiKernel.power(1.5), PhiKernel.power(2.0), PhiKernel.power(3.0), PhiKernel.sum_powers(1.5, 2.5)]
needs_ext = pytest.mark.skipif(kernels._compiled is None, reason="compiled extension not built")


def _random_state(mesh, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=mesh.n_nodes)


@needs_ext
@pytest.mark.parametrize("kernel", KERNELS, ids=str)
@pytest.mark.parametrize("mesh", [Mesh.interval(n=40), Mesh.rectangle(nx=7, ny=5)], ids=["1d", "2d"])
def test_backends_agree(kernel, mesh):
    u = _random_state(mesh)
    Fc, Jc = kernels.flux_operator(mesh, u, kernel, 1e-8, backend="cython")
    Fp, Jp = kernels.flux_operator(mesh, u, kernel, 1e-8, backend="python")
    np.testing.assert_allclose(Fc, Fp, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(Jc.toarray(), Jp.toarray(), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("kernel", KERNELS, ids=str)
def test_generic_path_matches_power_path(kernel):
    # the callable path must agree with the closed-form exponent path
    mesh = Mesh.rectangle(nx=4, ny=4)
    g = np.random.default_rng(1).normal(size=(mesh.n_elements, 2))
    B, meas = mesh.grad_basis, mesh.measures
    r1, j1 = kernels.element_flux(g, B, meas, kernel, 1e-6, backend="python")
    r2, j2 = element_flux_generic(g, B, meas, kernel, 1e-6)
    np.testing.assert_allclose(r1, r2, rtol=1e-12)
    np.testing.assert_allclose(j1, j2, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("backend", ["python", pytest.param("cython", marks=needs_ext)])
@pytest.mark.parametrize("kernel", KERNELS, ids=str)
def test_jacobian_matches_finite_differences(kernel, backend):
    mesh = Mesh.rectangle(nx=5, ny=5)
    u = _random_state(mesh, 2)
    F, J = kernels.flux_operator(mesh, u, kernel, 1e-8, backend=backend)
    rng = np.random.default_rng(5)
    for _ in range(5):
        d = rng.normal(size=u.size)
        h = 1e-6
        Fp, _ = kernels.flux_operator(mesh, u + h * d, kernel, 1e-8, jacobian=False, backend=backend)
        Fm, _ = kernels.flux_operator(mesh, u - h * d, kernel, 1e-8, jacobian=False, backend=backend)
        fd = (Fp - Fm) / (2 * h)
        assert np.linalg.norm(J @ d - fd) <= 1e-6 * np.linalg.norm(fd)


def test_zero_gradient_keeps_p2_stiffness():
    mesh = Mesh.interval(n=4)
    _, J = kernels.flux_operator(mesh, np.zeros(mesh.n_nodes), PhiKernel.power(2.0), 0.0)
    # the p = 2 flux is linear, so its Jacobian is the stiffness matrix even at u = 0
    assert J.toarray()[2, 2] == pytest.approx(2.0 / 0.25)


def test_flux_is_homogeneous():
    # phi(s) s is homogeneous of degree p - 1 for a power kernel
    mesh = Mesh.interval(n=20)
    u = np.sin(np.pi * mesh.nodes[:, 0])
    k = PhiKernel.power(3.0)
    F1, _ = kernels.flux_operator(mesh, u, k, 0.0, jacobian=False)
    F2, _ = kernels.flux_operator(mesh, 2.0 * u, k, 0.0, jacobian=False)
    np.testing.assert_allclose(F2, 4.0 * F1, rtol=1e-12, atol=1e-14)


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_python_fallback_selected_by_env():
    import os
    import subprocess
    import sys

    env = dict(os.environ, PHISYS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from phisys import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
