import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phisys.comparison import (
    ComparisonInstance,
    check_phi_power_convexity,
    comparison_test,
    j_functional,
    scaled_instance,
    verdicts_csv,
    weak_residual,
)
from phisys.errors import ConvexityViolation, HypothesisFailure, OrderingViolation
from phisys.grid import DiscreteField, Mesh
from phisys.nfunction import PhiKernel, build_nfunction

P2 = build_nfunction(PhiKernel.power(2.0))
MESH = Mesh.interval(n=100)


def _field(fn, mesh=MESH):
    return mesh.interpolate(fn, zero_trace=True)


def test_j_functional_examples():
    # sqrt of x^2 on [0, 1] is x, and Phi(1) = 1/2 for p = 2
    m = Mesh.interval(n=50)
    w = DiscreteField(m, m.nodes[:, 0] ** 2)
    assert j_functional(P2, w) == pytest.approx(0.5, rel=1e-12)
    assert j_functional(P2, DiscreteField(m, np.zeros(m.n_nodes))) == 0.0
    # (2x)^2 has root 2x, Phi(2) = 2, but only on [0, 1/2] of slope 2 and zero beyond
    w = DiscreteField(m, np.minimum(2 * m.nodes[:, 0], 1.0) ** 2)
    assert j_functional(P2, w) == pytest.approx(0.5 * 4 * 0.5, rel=1e-12)
    with pytest.raises(ValueError):
        j_functional(P2, DiscreteField(m, -np.ones(m.n_nodes)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.95))
def test_j_convex_along_power_segments(seed, s):
    # convexity of t -> Phi(t^(1/ell)) makes J convex along w_s = (1-s) w0 + s w1
    rng = np.random.default_rng(seed)
    m = Mesh.interval(n=30)
    w0 = DiscreteField(m, rng.random(m.n_nodes) + 0.1)
    w1 = DiscreteField(m, rng.random(m.n_nodes) + 0.1)
    ws = DiscreteField(m, (1 - s) * w0.values + s * w1.values)
    # exact convexity holds in the continuum; the nodal root adds a small interpolation error
    lhs, rhs = j_functional(P2, ws), (1 - s) * j_functional(P2, w0) + s * j_functional(P2, w1)
    assert lhs <= rhs * (1 + 0.05) + 1e-12


@pytest.mark.parametrize(
    "kernel", [PhiKernel.power(1.5), PhiKernel.power(2.0), PhiKernel.power(4.0), PhiKernel.sum_powers(2.0, 3.0)], ids=str
)
def test_builtin_convexity(kernel):
    rep = check_phi_power_convexity(build_nfunction(kernel))
    assert rep.passed and rep.n_violations == 0


def test_adversarial_convexity_is_flagged():
    k = PhiKernel.custom(lambda s: s + s**-0.5, lambda s: 2 * s + 0.5 * s**-0.5)
    nf = build_nfunction(k, exponents=(3.5, 3.5))
    with pytest.raises(ConvexityViolation) as info:
        check_phi_power_convexity(nf)
    assert info.value.witness is not None
    rep = check_phi_power_convexity(nf, strict=False)
    assert not rep.passed and rep.worst < 0


def test_weak_residual_of_exact_solution():
    inst = scaled_instance(P2, MESH, "1", 1.0)
    assert np.abs(weak_residual(P2, "1", inst.u1, inst.eta)).max() <= 1e-9


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("f", ["1", "1/(t+1)**0.5", "2+x"])
def test_scaled_instances_pass(p, f):
    nf = build_nfunction(PhiKernel.power(p))
    inst = scaled_instance(nf, MESH, f, 1.5, name=f)
    v = comparison_test(inst)
    assert v.passed and v.margin >= 0
    assert v.ratio_bound == pytest.approx(1 / 1.5)
    assert v.pairing >= -1e-8


def test_linear_growth_is_not_monotone():
    inst = ComparisonInstance(P2, "t", _field(lambda x: x * (1 - x)), _field(lambda x: x * (1 - x)))
    with pytest.raises(HypothesisFailure) as info:
        comparison_test(inst)
    assert info.value.hypothesis == "monotone"
    v = comparison_test(inst, strict=False)
    assert v.status == "hypothesis-failure" and v.failure == "monotone"


def test_subsolution_failure_located():
    # u1 = x(1-x) has -u1'' = 2 > 1, so it is not a subsolution for f = 1
    u = _field(lambda x: x * (1 - x))
    inst = ComparisonInstance(P2, "1", u, DiscreteField(MESH, 2 * u.values, True))
    v = comparison_test(inst, strict=False)
    assert v.failure == "subsolution" and v.where in set(MESH.interior.tolist())


def test_ordering_violation_with_hypotheses_waived():
    # tolerances wide enough to accept wrong claims isolate the ordering check
    big = _field(lambda x: x * (1 - x))
    small = DiscreteField(MESH, 0.5 * big.values, True)
    inst = ComparisonInstance(P2, "1", big, small, name="swapped")
    with pytest.raises(OrderingViolation) as info:
        comparison_test(inst, tol=10.0)
    assert info.value.margin < 0 and info.value.node in set(MESH.interior.tolist())
    v = comparison_test(inst, tol=10.0, strict=False)
    assert v.status == "ordering-violation"


def test_unbounded_ratio_fails():
    u1 = _field(lambda x: x * (1 - x) / 4)
    vals = u1.values * 2
    vals[50] = 0.0
    inst = ComparisonInstance(P2, "1", u1, DiscreteField(MESH, vals, True))
    # the dip makes u2 a poor supersolution, so waive the residual checks
    v = comparison_test(inst, tol=1e6, strict=False)
    assert v.failure == "ratio" and math.isinf(v.ratio_bound)


def test_verdicts_csv_layout():
    inst = scaled_instance(P2, Mesh.interval(n=20), "1", 1.0, name="flat")
    text = verdicts_csv([comparison_test(inst)])
    head, row = text.splitlines()
    assert head.split(",")[:3] == ["instance", "status", "subsolution"]
    assert row.startswith("flat,pass,ok,ok,ok,ok,ok")


def test_two_dimensional_instance():
    m = Mesh.rectangle(nx=12, ny=12)
    inst = scaled_instance(P2, m, "1/(t+1)", 1.25)
    assert comparison_test(inst).passed
