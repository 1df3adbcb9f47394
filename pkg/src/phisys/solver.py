"""Galerkin solver for the regularized system, a-priori radius and continuation."""

import csv
import enum
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import optimize

from . import kernels
from .errors import (
    ExponentViolation,
    LineSearchStall,
    NegativeSolution,
    NoConvergence,
    NonFiniteResidual,
    ZeroBarrier,
)
from .grid import DiscreteField, distance_function, integrate, luxemburg_norm
from .system import Structure, rhs_terms

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-9
STEP_TOL = 1e-10
MAX_ITERS = 200
MAX_HALVINGS = 40
NEG_TOL = -1e-12
CONTINUATION_TOL = 1e-7
PICARD_ITERS = 500


@dataclass(frozen=True)
class RegularizationParams:
    eps: float
    delta: float = 0.0
    n: int = None
    eta: float = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.n is None:
            object.__setattr__(self, "n", max(1, round(1.0 / self.eps)))
        if self.n < 1:
            raise ValueError("truncation level must be a positive integer")

    def eta_for(self, mesh):
        """Gradient smoothing, ``1e-8 / diam`` unless set explicitly."""
        return 1e-8 / mesh.diameter if self.eta is None else float(self.eta)


@dataclass
class RegularizedSolution:
    u: DiscreteField
    v: DiscreteField
    residual_norm: float
    newton_iters: int
    params: RegularizationParams
    norm_pair: tuple
    method: str = "newton"


@dataclass
class AprioriBound:
    r0: float
    constants: dict
    eps_independent: bool

    def polynomial(self, r):
        c = self.constants
        return (
            c["lead"] * r ** c["ell"]
            - c["C1"] * r
            - c["C2"] * r ** c["k1"]
            - c["C3"] * r ** c["k2"]
            - c["C4"]
        )


# -- discrete operator ---------------------------------------------------------

class _Operator:
    """``-div(phi(|grad w_i|) grad w_i) - f_i(w)`` on interior nodes, for 1 or 2 fields.

    ``source(wq)`` receives the list of component values at quadrature points
    and returns, per component, ``(f, [df/dw_0, df/dw_1, ...])`` on ``(E, Q)``.
    """

    def __init__(self, mesh, kernel, eta, ncomp, source):
        self.mesh = mesh
        self.kernel = kernel
        self.eta = eta
        self.ncomp = ncomp
        self.source = source
        self.interior = mesh.interior
        self.ni = self.interior.size
        self.bary, _ = mesh.quad_rule

    def split(self, x):
        out = []
        for c in range(self.ncomp):
            w = np.zeros(self.mesh.n_nodes)
            w[self.interior] = x[c * self.ni:(c + 1) * self.ni]
            out.append(w)
        return out

    def join(self, fields):
        return np.concatenate([np.asarray(f)[self.interior] for f in fields])

    def _load(self, f):
        return kernels.scatter_vector(self.mesh, np.einsum("eq,qa->ea", self.mesh.quad_weights * f, self.bary))

    def _mass(self, c):
        local = np.einsum("eq,qa,qb->eab", self.mesh.quad_weights * c, self.bary, self.bary)
        return kernels.scatter_matrix(self.mesh, local)

    def _restrict(self, A):
        return A[self.interior][:, self.interior]

    def evaluate(self, x, jacobian=True):
        ws = self.split(x)
        wq = [self.mesh.at_quad(w) for w in ws]
        src = self.source(wq)
        res, blocks = [], [[None] * self.ncomp for _ in range(self.ncomp)]
        for i, w in enumerate(ws):
            F, K = kernels.flux_operator(self.mesh, w, self.kernel, self.eta, jacobian)
            f, dfs = src[i]
            res.append((F - self._load(f))[self.interior])
            if jacobian:
                for j in range(self.ncomp):
                    M = self._restrict(self._mass(dfs[j]))
                    blocks[i][j] = (self._restrict(K) - M) if i == j else -M
        r = np.concatenate(res)
        if not np.all(np.isfinite(r)):
            raise NonFiniteResidual("residual has non-finite entries")
        J = sp.bmat(blocks, format="csc") if jacobian else None
        return r, J

    def residual(self, x):
        return self.evaluate(x, jacobian=False)[0]

    def picard_step(self, x):
        """Solve the frozen-coefficient linear problem once."""
        ws = self.split(x)
        wq = [self.mesh.at_quad(w) for w in ws]
        src = self.source(wq)
        B = self.mesh.grad_basis
        out = []
        for i, w in enumerate(ws):
            g = np.einsum("ea,ead->ed", w[self.mesh.elements], B)
            rho = np.sqrt(np.einsum("ed,ed->e", g, g) + self.eta**2)
            phi = np.asarray(self.kernel.phi(rho), dtype=float)
            local = np.einsum("e,ead,ebd->eab", self.mesh.measures * phi, B, B)
            K = self._restrict(kernels.scatter_matrix(self.mesh, local))
            out.append(spla.spsolve(K.tocsc(), self._load(src[i][0])[self.interior]))
        return np.concatenate(out)


def _damped_newton(op, x0, tol=NEWTON_TOL, step_tol=STEP_TOL, max_iter=MAX_ITERS, stage=None):
    """Damped Newton on ``op`` with a Picard fallback; returns ``(x, res_norm, iters, method)``."""
    x = np.array(x0, dtype=float)
    r, J = op.evaluate(x)
    rn = float(np.linalg.norm(r))
    prev_step = np.inf
    for it in range(1, max_iter + 1):
        try:
            dx = spla.spsolve(J, -r)
        except RuntimeError:
            dx = np.full_like(x, np.nan)
        if not np.all(np.isfinite(dx)):
            break
        step = float(np.max(np.abs(dx))) if dx.size else 0.0
        if rn <= tol and (step <= step_tol or step > 0.5 * prev_step):
            # converged, or stagnating at round-off inside the tolerance band
            if step <= step_tol:
                x = x + dx
                rn = float(np.linalg.norm(op.residual(x)))
            return x, rn, it, "newton"
        prev_step = step
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            xt = x + t * dx
            try:
                rt = op.residual(xt)
                rtn = float(np.linalg.norm(rt))
            except NonFiniteResidual:
                rtn = np.inf
            if rtn < rn or (rtn <= tol and rn <= tol):
                break
            t *= 0.5
        else:
            if rn <= tol:
                return x, rn, it, "newton"
            log.debug("line search stalled at residual %.3e, trying Picard", rn)
            return _picard(op, x, tol, it, stage, stalled=True)
        x = xt
        r, J = op.evaluate(x)
        rn = float(np.linalg.norm(r))
    if rn <= tol:
        return x, rn, max_iter, "newton"
    log.debug("Newton did not converge (residual %.3e), trying Picard", rn)
    return _picard(op, x0, tol, max_iter, stage, stalled=False)


def _picard(op, x0, tol, newton_iters, stage, stalled):
    x = np.array(x0, dtype=float)
    rn = np.inf
    for it in range(1, PICARD_ITERS + 1):
        try:
            x = op.picard_step(x)
            rn = float(np.linalg.norm(op.residual(x)))
        except (NonFiniteResidual, RuntimeError):
            break
        if not np.isfinite(rn):
            break
        if rn <= tol:
            return x, rn, newton_iters + it, "picard"
    exc = LineSearchStall if stalled else NoConvergence
    raise exc(
        f"no convergence after {newton_iters} Newton and {PICARD_ITERS} Picard iterations "
        f"(residual {rn:.3e})",
        iterations=newton_iters,
        residual=rn,
        stage=stage,
    )


def _check_nonneg(fields, stage=None):
    for k, w in enumerate(fields):
        if w.size and w.min() < NEG_TOL:
            raise NegativeSolution(
                f"component {k + 1} has nodal value {w.min():.3e} at node {int(np.argmin(w))}"
                + (f" (stage {stage})" if stage is not None else "")
            )


# -- system assembly -----------------------------------------------------------

def _coefficients_q(spec, params):
    """Truncated coefficients ``min(a, n)``, ``min(b, n)`` at quadrature points."""
    mesh = spec.mesh
    a = [mesh.at_quad(np.minimum(f.values, params.n)) for f in spec.a]
    b = [mesh.at_quad(np.minimum(f.values, params.n)) for f in spec.b]
    return a, b


def _system_operator(spec, params):
    aq, bq = _coefficients_q(spec, params)

    def source(wq):
        uq, vq = wq
        out = []
        for i in range(2):
            f, du, dv = rhs_terms(spec, i + 1, uq, vq, aq[i], bq[i], params.eps, params.delta, True)
            out.append((f, [du, dv]))
        return out

    return _Operator(spec.mesh, spec.nf.kernel, params.eta_for(spec.mesh), 2, source)


def _as_values(w, mesh):
    if w is None:
        return np.zeros(mesh.n_nodes)
    return np.asarray(w.values if isinstance(w, DiscreteField) else w, dtype=float)


def assemble_residual(spec, params, u, v):
    """Residual pair ``(R1, R2)`` over interior nodes."""
    op = _system_operator(spec, params)
    r = op.residual(op.join([_as_values(u, spec.mesh), _as_values(v, spec.mesh)]))
    return r[: op.ni], r[op.ni:]


def assemble_jacobian(spec, params, u, v):
    """Sparse Jacobian of the stacked residual ``(R1, R2)`` over interior nodes."""
    op = _system_operator(spec, params)
    return op.evaluate(op.join([_as_values(u, spec.mesh), _as_values(v, spec.mesh)]))[1]


def _linear_guess(spec, params):
    """p = 2 solve with the right-hand side frozen at ``u = v = 0``."""
    mesh = spec.mesh
    aq, bq = _coefficients_q(spec, params)
    zero = np.zeros_like(aq[0])
    from .nfunction import PhiKernel

    fields = []
    for i in range(2):
        f = rhs_terms(spec, i + 1, zero, zero, aq[i], bq[i], params.eps, params.delta)
        op = _Operator(mesh, PhiKernel.power(2.0), 0.0, 1, lambda wq, f=f: [(f, [np.zeros_like(f)])])
        x, *_ = _damped_newton(op, np.zeros(op.ni))
        fields.append(op.split(x)[0])
    return fields


def gradient_norms(nf, u, v):
    return (luxemburg_norm(nf, u, on_gradient=True), luxemburg_norm(nf, v, on_gradient=True))


def newton_solve(spec, params, initial=None, *, tol=NEWTON_TOL, stage=None):
    """Solve the regularized system; ``initial`` is a pair of fields or arrays."""
    mesh = spec.mesh
    op = _system_operator(spec, params)
    if initial is None:
        initial = _linear_guess(spec, params)
    x0 = op.join([_as_values(w, mesh) for w in initial])
    x, rn, iters, method = _damped_newton(op, x0, tol=tol, stage=stage)
    u, v = op.split(x)
    _check_nonneg([u, v], stage)
    # clip round-off negatives so the fields stay admissible
    u, v = np.maximum(u, 0.0), np.maximum(v, 0.0)
    uf = DiscreteField(mesh, u, zero_trace=True)
    vf = DiscreteField(mesh, v, zero_trace=True)
    return RegularizedSolution(uf, vf, rn, iters, params, gradient_norms(spec.nf, uf, vf), method)


def solve_scalar(nf, mesh, source, initial=None, eta=None, tol=NEWTON_TOL):
    """Solve ``-div(phi(|grad w|) grad w) = f(x, w)`` with zero trace.

    ``source(wq)`` maps values at quadrature points ``(E, Q)`` to ``(f, df/dw)``.
    """
    eta = 1e-8 / mesh.diameter if eta is None else eta

    def src(wq):
        f, df = source(wq[0])
        return [(np.broadcast_to(f, wq[0].shape), [np.broadcast_to(df, wq[0].shape)])]

    op = _Operator(mesh, nf.kernel, eta, 1, src)
    if initial is None:
        from .nfunction import PhiKernel

        f0, _ = source(np.zeros_like(mesh.quad_weights))
        lin = _Operator(mesh, PhiKernel.power(2.0), 0.0, 1,
                        lambda wq: [(np.broadcast_to(f0, wq[0].shape), [np.zeros_like(wq[0])])])
        x0, *_ = _damped_newton(lin, np.zeros(lin.ni))
    else:
        x0 = _as_values(initial, mesh)[mesh.interior]
    x, rn, iters, _ = _damped_newton(op, x0, tol=tol)
    w = op.split(x)[0]
    _check_nonneg([w])
    return DiscreteField(mesh, np.maximum(w, 0.0), zero_trace=True), rn, iters


# -- a-priori radius -----------------------------------------------------------

def compute_r0(spec, params):
    """Radius ``r0 >= 2`` beyond which the coercivity polynomial is positive."""
    nf, mesh = spec.nf, spec.mesh
    ell = nf.ell
    for i in range(2):
        if spec.gamma[i] + spec.sigma[i] >= ell - 1:
            raise ExponentViolation(
                f"gamma_{i + 1}+sigma_{i + 1}={spec.gamma[i] + spec.sigma[i]:.6g} >= ell-1={ell - 1:.6g}"
            )
    vol, diam = mesh.volume, mesh.diameter
    one_conj = 1.0 / float(nf.Phi_tilde_inverse(1.0 / vol))
    H1 = 4.0 * diam * one_conj  # int |w| <= H1 * ||grad w||_Phi
    P = (vol + 1.0 / float(nf.Phi(1.0))) ** (1.0 / ell) * 2.0 * diam  # ||w||_ell <= P ||grad w||_Phi
    eps, delta = params.eps, params.delta
    C1, C4 = 0.0, 0.0
    Cb, ks = [0.0, 0.0], [1.0, 1.0]
    eps_independent = True
    for i in range(2):
        a_n = np.minimum(spec.a[i].values, params.n)
        b_n = np.minimum(spec.b[i].values, params.n)
        A, B = float(a_n.max()), float(b_n.max())
        sing_own, sing_other = (spec.alpha[i], spec.beta[i])
        if A > 0:
            if sing_other == 0 and sing_own <= 1:
                # a/(w+eps)^alpha * w <= a (1 + w) when alpha <= 1
                C1 = max(C1, A * H1)
                C4 += integrate(DiscreteField(mesh, a_n))
            else:
                C1 = max(C1, A * eps ** (-(sing_own + sing_other)) * H1)
                eps_independent = False
        k = spec.gamma[i] + spec.sigma[i] + 1.0
        ks[i] = k
        if B > 0:
            fac = 2.0 ** (k - 1.0) if delta > 0 else 1.0
            Cb[i] = B * vol ** (1.0 - k / ell) * fac * P**k
            if delta > 0:
                C4 += B * fac * vol * delta**k
    lead = ell / 2.0**ell
    consts = dict(lead=lead, ell=ell, C1=C1, C2=Cb[0], C3=Cb[1], C4=C4, k1=ks[0], k2=ks[1],
                  H1=H1, P=P)
    return AprioriBound(radius_from_constants(consts), consts, eps_independent)


def radius_from_constants(c, rtol=1e-10):
    """Smallest ``r >= 2`` (up to ``rtol``) where the coercivity polynomial is positive.

    ``c`` holds ``lead, ell, C1, C2, C3, C4, k1, k2`` with ``k1, k2 < ell``.
    """
    if c["C1"] == 0 and c["C2"] == 0 and c["C3"] == 0 and c["C4"] == 0:
        return 2.0
    ell = c["ell"]
    poly = AprioriBound(0.0, c, False).polynomial
    # p(r)/r^ell is strictly increasing, so there is a unique positive root
    g = lambda s: poly(math.exp(s)) / math.exp(ell * s)
    lo, hi = -50.0, 1.0
    while g(hi) <= 0:
        hi += 5.0
    root = math.exp(optimize.brentq(g, lo, hi, xtol=1e-14, rtol=1e-15))
    return max(2.0, root * (1.0 + rtol))


# -- barriers ------------------------------------------------------------------

class BarrierCase(enum.Enum):
    SINGULAR_SCALAR = "singular"
    POWER_SCALAR = "power"
    MIXED_SCALAR = "mixed"


BARRIER_FOR = {
    Structure.COOPERATIVE: BarrierCase.SINGULAR_SCALAR,
    Structure.NONCOOPERATIVE: BarrierCase.POWER_SCALAR,
    Structure.MIXED: BarrierCase.MIXED_SCALAR,
}


def minimize_g(beta, sigma, t_max=1e6):
    """``min_{0 <= t <= t_max} 1/(t^beta + 1) + t^sigma``.

    The objective need not be unimodal, so a log-spaced scan locates the basin
    before a bounded scalar search and a quadratic refinement.
    """

    def g(t):
        t = np.asarray(t, dtype=float)
        return 1.0 / (t**beta + 1.0) + t**sigma

    ts = np.concatenate([[0.0], np.logspace(-12, math.log10(t_max), 4001)])
    vals = g(ts)
    k = int(np.argmin(vals))
    best_t, best = ts[k], float(vals[k])
    if 0 < k < ts.size - 1:
        res = optimize.minimize_scalar(lambda t: float(g(t)), bounds=(ts[k - 1], ts[k + 1]),
                                       method="bounded", options={"xatol": 1e-14 + 1e-12 * ts[k]})
        if res.success and res.fun < best:
            best_t, best = float(res.x), float(res.fun)
        # quadratic fit through three nearby points
        h = max(1e-6 * best_t, 1e-12)
        x3 = np.array([best_t - h, best_t, best_t + h])
        if x3[0] >= 0:
            c = np.polyfit(x3 - best_t, g(x3), 2)
            if c[0] > 0:
                t_q = best_t - c[1] / (2 * c[0])
                if 0 <= t_q <= t_max and g(t_q) < best:
                    best_t, best = float(t_q), float(g(t_q))
    return min(best, float(g(0.0)))


def solve_barrier(spec, case=None, which=1, initial=None):
    """Positive zero-trace subsolution bounding component ``which`` from below."""
    case = BARRIER_FOR.get(spec.structure) if case is None else BarrierCase(case)
    if case is None:
        raise ValueError("general structure has no barrier problem")
    mesh, i = spec.mesh, which - 1
    a1 = mesh.at_quad(np.minimum(spec.a[i].values, 1.0))
    b1 = mesh.at_quad(np.minimum(spec.b[i].values, 1.0))
    if case is BarrierCase.SINGULAR_SCALAR:
        alpha = spec.alpha[i]
        coef = a1

        def source(w):
            base = np.abs(w) + 1.0
            f = coef * base ** (-alpha)
            return f, -alpha * f / base * np.sign(w)

    elif case is BarrierCase.POWER_SCALAR:
        gam = spec.gamma[i]
        coef = b1

        def source(w):
            wp = np.maximum(w, 0.0)
            if gam == 0:
                return coef, np.zeros_like(w)
            safe = np.where(wp > 0, wp, 1.0)
            return coef * wp**gam, np.where(wp > 0, coef * gam * safe ** (gam - 1.0), 0.0)

    else:
        g = minimize_g(spec.beta[i], spec.sigma[i])
        coef = np.minimum(a1, b1) * g

        def source(w):
            return coef, np.zeros_like(w)

    if not np.any(coef > 0):
        raise ZeroBarrier(f"barrier coefficient vanishes for equation {which}")
    if case is BarrierCase.POWER_SCALAR and initial is None and spec.gamma[i] > 0:
        # w = 0 solves the power problem too, so start from the positive p = 2 profile
        from .nfunction import PhiKernel

        lin = _Operator(mesh, PhiKernel.power(2.0), 0.0, 1, lambda wq: [(coef, [np.zeros_like(coef)])])
        x0, *_ = _damped_newton(lin, np.zeros(lin.ni))
        initial = lin.split(x0)[0]
    w, _, _ = solve_scalar(spec.nf, mesh, source, initial=initial, eta=None)
    if w.values.max() <= 0:
        raise ZeroBarrier(f"barrier solution vanishes for equation {which}")
    return w


def fit_lower_bound(u, d):
    """``min u/d`` over interior nodes; a positive value certifies ``u >= C d``."""
    idx = u.mesh.interior
    dv = np.asarray(d.values if isinstance(d, DiscreteField) else d, dtype=float)[idx]
    if np.any(dv <= 0):
        raise ValueError("distance must be positive at interior nodes")
    return float(np.min(np.asarray(u.values)[idx] / dv))


# -- continuation --------------------------------------------------------------

@dataclass
class StageRecord:
    stage: int
    eps: float
    delta: float
    norm_u: float
    norm_v: float
    residual: float
    increment: float
    C_lower: float
    r0: float
    newton_iters: int
    barrier_margin: float
    spairing: float


CSV_COLUMNS = ["stage", "eps", "delta", "norm_u", "norm_v", "residual", "increment", "C_lower", "r0",
               "newton_iters", "barrier_margin", "spairing"]


@dataclass
class ContinuationReport:
    stages: list = field(default_factory=list)
    solutions: list = field(default_factory=list)
    barriers: tuple = None
    stopped_early: bool = False

    @property
    def final(self):
        return self.solutions[-1]

    def column(self, name):
        return np.array([getattr(s, name) for s in self.stages], dtype=float)

    def csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for s in self.stages:
            w.writerow([_fmt(getattr(s, c)) for c in CSV_COLUMNS])
        return buf.getvalue()


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def delta_policy(structure, eps):
    return 0.0 if Structure.parse(structure) is Structure.COOPERATIVE else eps


def continuation_solve(spec, schedule, delta=None, *, tol=CONTINUATION_TOL, eta=None, barriers=True):
    """Solve along a decreasing ``eps`` schedule with warm starts.

    ``delta`` is ``None`` for the structure-dependent default, a number, or a
    callable of ``eps``.
    """
    schedule = [float(e) for e in schedule]
    if not schedule or any(e <= 0 for e in schedule) or any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly decreasing and positive")
    if spec.structure is Structure.GENERAL:
        raise ValueError("continuation needs a cooperative, noncooperative or mixed structure")
    mesh = spec.mesh
    dist = distance_function(mesh)
    report = ContinuationReport()
    w = None
    if barriers:
        w = (solve_barrier(spec, which=1), solve_barrier(spec, which=2))
        report.barriers = w
    case = BARRIER_FOR[spec.structure]
    prev = None
    for k, eps in enumerate(schedule):
        if delta is None:
            dl = delta_policy(spec.structure, eps)
        elif callable(delta):
            dl = float(delta(eps))
        else:
            dl = float(delta)
        params = RegularizationParams(eps, dl, eta=eta)
        if prev is not None:
            init = (prev.u, prev.v)
        elif w is not None:
            init = w
        else:
            init = None
        try:
            sol = newton_solve(spec, params, init, stage=k)
        except NoConvergence as exc:
            exc.stage = k
            raise
        bound = compute_r0(spec, params)
        if prev is None:
            inc, pairing = math.nan, math.nan
        else:
            du, dv = sol.u - prev.u, sol.v - prev.v
            inc = luxemburg_norm(spec.nf, du) + luxemburg_norm(spec.nf, dv)
            pairing = _flux_pairing(spec, prev.u, du) + _flux_pairing(spec, prev.v, dv)
        C = min(fit_lower_bound(sol.u, dist), fit_lower_bound(sol.v, dist))
        margin = math.nan
        if w is not None:
            shift = eps if case is BarrierCase.POWER_SCALAR else 0.0
            idx = mesh.interior
            margin = float(min((sol.u.values + shift - w[0].values)[idx].min(),
                               (sol.v.values + shift - w[1].values)[idx].min()))
        report.stages.append(StageRecord(k, eps, dl, sol.norm_pair[0], sol.norm_pair[1], sol.residual_norm,
                                         inc, C, bound.r0, sol.newton_iters, margin, pairing))
        report.solutions.append(sol)
        log.info("stage %d eps=%.4g residual=%.2e increment=%.3e C=%.4g", k, eps, sol.residual_norm, inc, C)
        prev = sol
        if inc < tol:
            report.stopped_early = k < len(schedule) - 1
            break
    return report


def _flux_pairing(spec, w, dw):
    """``<-div(phi(|grad w|) grad w), -dw>`` for the (S+) diagnostic."""
    F, _ = kernels.flux_operator(spec.mesh, w.values, spec.nf.kernel, 0.0, jacobian=False)
    return float(-np.dot(F, dw.values))


def halving_schedule(first=0.5, last=1.0 / 256):
    out, e = [], first
    while e >= last * (1 - 1e-12):
        out.append(e)
        e /= 2
    return out

