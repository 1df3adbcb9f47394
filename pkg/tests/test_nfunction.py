import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phisys.errors import BoundViolation, DivergentIntegral, ExponentOutOfRange, NonMonotoneKernel
from phisys.nfunction import (
    PhiKernel,
    audit_nfunction,
    biconjugate_eval,
    build_nfunction,
    check_kernel,
    check_zeta_bounds,
    conjugate_eval,
    estimate_exponents,
    grows_essentially_slower,
    sobolev_conjugate_eval,
)

BUILTINS = [
    (PhiKernel.power(1.5), 1.5, 1.5),
    (PhiKernel.power(2.0), 2.0, 2.0),
    (PhiKernel.power(3.0), 3.0, 3.0),
    (PhiKernel.power(4.0), 4.0, 4.0),
    (PhiKernel.sum_powers(2.0, 3.0), 2.0, 3.0),
    (PhiKernel.sum_powers(1.5, 2.5), 1.5, 2.5),
]


@pytest.mark.parametrize("kernel,ell,m", BUILTINS)
def test_exponents_of_builtin_kernels(kernel, ell, m):
    e, M = estimate_exponents(kernel)
    assert e == pytest.approx(ell, abs=1e-6)
    assert M == pytest.approx(m, abs=1e-6)


def test_custom_kernel_exponents_from_grid():
    # s*phi(s) = s + s^2 has (s phi)'/phi between 1 and 2
    k = PhiKernel.custom(lambda s: 1.0 + s, lambda s: 1.0 + 2.0 * s)
    ell, m = estimate_exponents(k)
    assert ell == pytest.approx(2.0, abs=1e-5)
    assert m == pytest.approx(3.0, abs=1e-5)


def test_custom_phi_closed_form():
    nf = build_nfunction(PhiKernel.custom(lambda s: 1.0 + s))
    # int_0^2 s(1+s) ds = 2 + 8/3
    assert float(nf.Phi(2.0)) == pytest.approx(2.0 + 8.0 / 3.0, rel=1e-10)


@pytest.mark.parametrize("p,t,expected", [(2.0, 3.0, 4.5), (4.0, 1.0, 0.75), (3.0, 2.0, 2.0 ** 1.5 / 1.5)])
def test_conjugate_of_power(p, t, expected):
    # conjugate of t^p/p is t^q/q with 1/p + 1/q = 1
    nf = build_nfunction(PhiKernel.power(p))
    assert float(conjugate_eval(nf, t)) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("kernel", [k for k, _, _ in BUILTINS])
def test_biconjugation(kernel):
    nf = build_nfunction(kernel)
    s = np.logspace(-2, 2, 50)
    err = np.abs(biconjugate_eval(nf, s) - nf.Phi(s)) / nf.Phi(s)
    assert err.max() <= 1e-8


def test_sobolev_conjugate_power_scaling():
    nf = build_nfunction(PhiKernel.power(2.0))
    # p* = Np/(N-p) = 4 for p = 2, N = 4
    a, b = sobolev_conjugate_eval(nf, np.array([10.0, 20.0]), 4)
    assert b / a == pytest.approx(16.0, rel=1e-6)


def test_sobolev_conjugate_slope():
    nf = build_nfunction(PhiKernel.power(1.5))
    t = np.array([1e2, 1e3])
    v = sobolev_conjugate_eval(nf, t, 3)
    assert np.log(v[1] / v[0]) / np.log(10.0) == pytest.approx(3.0, rel=1e-6)


def test_sobolev_conjugate_divergent():
    with pytest.raises(DivergentIntegral):
        sobolev_conjugate_eval(build_nfunction(PhiKernel.power(3.0)), 1.0, 3)


def test_essentially_slower_growth():
    nf = build_nfunction(PhiKernel.power(1.5))
    ok, _ = grows_essentially_slower(build_nfunction(PhiKernel.power(2.0)), nf, 3)
    assert ok
    bad, _ = grows_essentially_slower(build_nfunction(PhiKernel.power(4.0)), nf, 3)
    assert not bad


def test_non_monotone_kernel_rejected():
    k = PhiKernel.custom(lambda s: np.exp(-s) / s)
    with pytest.raises(NonMonotoneKernel):
        check_kernel(k)


def test_exponent_bounds():
    with pytest.raises(ExponentOutOfRange):
        PhiKernel.power(1.0)
    with pytest.raises(ExponentOutOfRange):
        estimate_exponents(PhiKernel.power(3.0), N_dim=2)


@pytest.mark.parametrize("kernel", [k for k, _, _ in BUILTINS])
def test_audit_passes(kernel):
    checks = audit_nfunction(build_nfunction(kernel))
    failed = [c.name for c in checks if not c.passed]
    assert not failed


def test_zeta_violation_has_witness():
    nf = build_nfunction(PhiKernel.power(3.0), exponents=(2.5, 2.9))
    with pytest.raises(BoundViolation) as info:
        check_zeta_bounds(nf, np.array([1.0, 2.0]), np.array([10.0, 10.0]))
    assert info.value.witness is not None


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from([k for k, _, _ in BUILTINS]),
    st.floats(1e-3, 1e3),
    st.floats(1e-3, 1e3),
)
def test_young_inequality(kernel, t, s):
    nf = build_nfunction(kernel)
    lhs = t * s
    rhs = float(nf.Phi(t) + nf.Phi_tilde(s))
    assert lhs <= rhs * (1 + 1e-10)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([k for k, _, _ in BUILTINS]), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_zeta_bounds_property(kernel, rho, t):
    nf = build_nfunction(kernel)
    rep = check_zeta_bounds(nf, np.array([rho]), np.array([t]), strict=False)
    assert rep.passed


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([k for k, _, _ in BUILTINS]), st.floats(1e-4, 1e4))
def test_inverse_round_trip(kernel, t):
    nf = build_nfunction(kernel)
    assert float(nf.Phi_inverse(nf.Phi(t))) == pytest.approx(t, rel=1e-10)
