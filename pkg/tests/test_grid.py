import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phisys.errors import BoundViolation, DegenerateElement
from phisys.grid import (
    DiscreteField,
    Mesh,
    check_poincare,
    distance_function,
    gradient,
    integrate,
    luxemburg_norm,
    modular,
    read_nodal_csv,
    write_fields_csv,
)
from phisys.nfunction import PhiKernel, build_nfunction

P2 = build_nfunction(PhiKernel.power(2.0))
MESHES = [Mesh.interval(0.0, 1.0, 64), Mesh.rectangle(0.0, 1.0, 0.0, 2.0, 8, 12)]


def test_interval_layout():
    m = Mesh.interval(0.0, 2.0, 10)
    assert m.n_nodes == 11 and m.n_elements == 10
    assert m.boundary_mask.sum() == 2
    assert m.measures.sum() == pytest.approx(2.0)
    assert m.diameter == pytest.approx(2.0)


def test_rectangle_layout():
    m = Mesh.rectangle(0.0, 1.0, 0.0, 1.0, 4, 3)
    assert m.n_nodes == 20 and m.n_elements == 24
    assert m.boundary_mask.sum() == 2 * (5 + 4) - 4
    assert np.all(m.measures > 0)
    assert m.measures.sum() == pytest.approx(1.0)


def test_degenerate_element():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(DegenerateElement):
        Mesh(nodes, [[0, 1, 2]], [True, True, True], [(0, 2), (0, 1)])


@pytest.mark.parametrize("mesh", MESHES, ids=["1d", "2d"])
def test_gradient_of_linear_field_is_exact(mesh):
    coef = np.array([2.0, -3.0])[: mesh.dim]
    f = DiscreteField(mesh, mesh.nodes @ coef)
    np.testing.assert_allclose(gradient(f), np.broadcast_to(coef, (mesh.n_elements, mesh.dim)), atol=1e-12)


@pytest.mark.parametrize("mesh", MESHES, ids=["1d", "2d"])
def test_quadrature_integrates_quadratics(mesh):
    # the P1 interpolant of a linear function is exact, and its square has degree 2
    f = DiscreteField(mesh, 1.0 + mesh.nodes.sum(axis=1))
    q = f.at_quad() ** 2
    val = integrate(q, mesh)
    if mesh.dim == 1:
        assert val == pytest.approx(7.0 / 3.0, rel=1e-12)
    else:
        # int over [0,1]x[0,2] of (1+x+y)^2
        assert val == pytest.approx(40.0 / 3.0, rel=1e-12)


def test_distance_function():
    m = Mesh.rectangle(0.0, 1.0, 0.0, 1.0, 4, 4)
    d = distance_function(m)
    assert d.values.max() == pytest.approx(0.5)
    assert np.all(d.values[m.boundary_mask] == 0.0)


def test_zero_trace_enforced():
    m = Mesh.interval(n=4)
    with pytest.raises(ValueError):
        DiscreteField(m, np.ones(5), zero_trace=True)


def test_modular_p2_closed_form():
    m = Mesh.interval(n=400)
    u = m.interpolate(lambda x: x * (1 - x), zero_trace=True)
    # int (x(1-x))^2 / 2 = 1/60
    assert modular(P2, u) == pytest.approx(1.0 / 60.0, rel=1e-3)
    # for p = 2 the Luxemburg norm is ||u||_2 / sqrt(2)
    l2 = np.sqrt(integrate(u.at_quad() ** 2, m))
    assert luxemburg_norm(P2, u) == pytest.approx(l2 / np.sqrt(2.0), rel=1e-10)


@pytest.mark.parametrize("kernel", [PhiKernel.power(1.5), PhiKernel.power(3.0), PhiKernel.sum_powers(2.0, 3.0)])
def test_unit_ball_and_homogeneity(kernel):
    nf = build_nfunction(kernel)
    m = Mesh.interval(n=50)
    rng = np.random.default_rng(3)
    u = m.interpolate(lambda x: rng.random(x.shape), zero_trace=True)
    lam = luxemburg_norm(nf, u)
    assert modular(nf, u * (1.0 / lam)) == pytest.approx(1.0, abs=1e-8)
    assert luxemburg_norm(nf, u * 3.5) == pytest.approx(3.5 * lam, rel=1e-12)
    assert luxemburg_norm(nf, -u) == pytest.approx(lam, rel=1e-12)


def test_poincare_and_violation():
    m = Mesh.interval(n=40)
    u = m.interpolate(lambda x: np.sin(np.pi * x), zero_trace=True)
    rep = check_poincare(P2, u)
    assert rep.passed and rep.lhs < rep.rhs
    # a Phi that is not an N-function can break the inequality
    fake = lambda t: np.where(np.asarray(t) < 0.5, 1.0, 0.0)
    with pytest.raises(BoundViolation):
        check_poincare(fake, u)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1.5, 2.0, 3.0]))
def test_poincare_random_fields(seed, p):
    nf = build_nfunction(PhiKernel.power(p))
    rng = np.random.default_rng(seed)
    m = Mesh.rectangle(nx=6, ny=6) if seed % 2 else Mesh.interval(n=30)
    vals = rng.normal(size=m.n_nodes) * 10 ** rng.uniform(-2, 2)
    vals[m.boundary_mask] = 0.0
    assert check_poincare(nf, DiscreteField(m, vals, zero_trace=True)).passed


def test_csv_round_trip(tmp_path):
    m = Mesh.interval(n=5)
    u = m.interpolate(lambda x: x**2)
    path = tmp_path / "u.csv"
    write_fields_csv(path, m, u=u)
    np.testing.assert_array_equal(read_nodal_csv(path, "u", m), u.values)
