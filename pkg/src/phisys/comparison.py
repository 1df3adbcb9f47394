"""Diaz-Saa functional, convexity diagnostics and the weak comparison test."""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConvexityViolation, HypothesisFailure, OrderingViolation
from .expr import Expression
from .grid import DiscreteField, gradient

RESIDUAL_TOL = 1e-8
ORDER_TOL = 1e-10
POSITIVITY_FLOOR = 1e-13
CONVEXITY_TOL = 1e-9
MONO_POINTS = 200
MONO_RTOL = 1e-12


def j_functional(nf, w):
    """``int Phi(|grad w^(1/ell)|)`` with the root taken at the nodes."""
    vals = np.asarray(w.values, dtype=float)
    if vals.min() < 0:
        raise ValueError("j_functional needs a nonnegative field")
    root = DiscreteField(w.mesh, vals ** (1.0 / nf.ell))
    g = gradient(root)
    mag = np.sqrt(np.einsum("ed,ed->e", g, g))
    if not np.all(np.isfinite(mag)):
        return math.inf
    val = float(np.dot(w.mesh.measures, nf.Phi(mag)))
    return val if math.isfinite(val) else math.inf


@dataclass
class ConvexityReport:
    n_checked: int
    n_violations: int
    worst: float
    witness: tuple = None

    @property
    def passed(self):
        return self.n_violations == 0


def check_phi_power_convexity(nf, grid=None, n_pairs=1000, seed=0, strict=True):
    """Check that ``t -> Phi(t^(1/ell))`` is convex on ``grid``.

    Secant slopes must be nondecreasing up to a relative ``1e-9`` and random
    midpoint pairs must satisfy the midpoint inequality.
    """
    t = np.sort(np.asarray(np.logspace(-6, 6, 10_000) if grid is None else grid, dtype=float))
    if t.size < 3 or t[0] <= 0:
        raise ValueError("grid must hold at least three positive samples")
    F = lambda s: np.asarray(nf.Phi(np.asarray(s) ** (1.0 / nf.ell)), dtype=float)
    Ft = F(t)
    slopes = np.diff(Ft) / np.diff(t)
    scale = np.maximum(np.abs(slopes[1:]), np.abs(slopes[:-1]))
    gap = (slopes[1:] - slopes[:-1]) / np.where(scale > 0, scale, 1.0)
    bad = np.flatnonzero(gap < -CONVEXITY_TOL)
    worst = float(gap.min()) if gap.size else 0.0
    witness = (float(t[bad[0] + 1]), float(gap[bad[0]])) if bad.size else None
    rng = np.random.default_rng(seed)
    a = rng.choice(t, n_pairs)
    b = rng.choice(t, n_pairs)
    lhs = F(0.5 * (a + b))
    rhs = 0.5 * (F(a) + F(b))
    rel = (rhs - lhs) / np.maximum(np.abs(rhs), 1e-300)
    mbad = np.flatnonzero(rel < -CONVEXITY_TOL)
    if mbad.size and witness is None:
        witness = (float(a[mbad[0]]), float(b[mbad[0]]))
    worst = min(worst, float(rel.min()))
    rep = ConvexityReport(gap.size + n_pairs, int(bad.size + mbad.size), worst, witness)
    if strict and not rep.passed:
        raise ConvexityViolation(
            f"t -> Phi(t^(1/ell)) fails convexity at {rep.n_violations} samples (worst {worst:.3g})",
            witness=witness,
        )
    return rep


def reaction(f):
    """Normalize a reaction term to ``g(t, pts)`` with ``pts`` of shape ``(P, 1, dim)``.

    Strings and :class:`~phisys.expr.Expression` objects may use ``x, y, t``;
    plain callables receive ``(t, pts)``.
    """
    if isinstance(f, (str, Expression)):
        ex = f if isinstance(f, Expression) else Expression(f)

        def g(t, pts):
            env = {"t": t, "x": pts[..., 0]}
            if pts.shape[-1] > 1:
                env["y"] = pts[..., 1]
            return np.broadcast_to(ex(**env), np.broadcast_shapes(np.shape(t), pts.shape[:-1]))

        g.source = ex.source
        return g
    if callable(f):
        return f
    raise TypeError("reaction must be an expression or a callable")


@dataclass(eq=False)
class ComparisonInstance:
    """``u1`` claimed subsolution and ``u2`` claimed supersolution of ``-Delta_Phi u = f(x, u)``."""

    nf: object
    f: object
    u1: DiscreteField
    u2: DiscreteField
    name: str = ""
    eta: float = 0.0

    def __post_init__(self):
        if self.u1.mesh is not self.u2.mesh:
            raise ValueError("u1 and u2 must share a mesh")
        self.f = reaction(self.f)

    @property
    def mesh(self):
        return self.u1.mesh

    @property
    def ratio_bound(self):
        idx = self.mesh.interior
        u1, u2 = self.u1.values[idx], self.u2.values[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(u2 > 0, u1 / u2, np.where(u1 > 0, np.inf, 0.0))
        return float(r.max()) if r.size else 0.0


@dataclass
class ComparisonVerdict:
    name: str
    status: str
    hypotheses: dict = field(default_factory=dict)
    failure: str = ""
    where: object = None
    margin: float = math.nan
    worst_node: int = -1
    ratio_bound: float = math.nan
    pairing: float = math.nan
    pairing_full: float = math.nan
    excluded_nodes: int = 0

    @property
    def passed(self):
        return self.status == "pass"

    COLUMNS = ("instance", "status", "subsolution", "supersolution", "monotone", "boundary", "ratio",
               "margin", "worst_node", "ratio_bound", "pairing", "pairing_full", "excluded_nodes")

    def row(self):
        h = self.hypotheses
        flag = lambda k: "" if k not in h else ("ok" if h[k] else "fail")
        return [self.name, self.status, flag("subsolution"), flag("supersolution"), flag("monotone"),
                flag("boundary"), flag("ratio"), repr(float(self.margin)), str(self.worst_node),
                repr(float(self.ratio_bound)), repr(float(self.pairing)), repr(float(self.pairing_full)),
                str(self.excluded_nodes)]


def verdicts_csv(verdicts):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ComparisonVerdict.COLUMNS)
    for v in verdicts:
        w.writerow(v.row())
    return buf.getvalue()


def _load(mesh, fq):
    bary, _ = mesh.quad_rule
    return kernels.scatter_vector(mesh, np.einsum("eq,qa->ea", mesh.quad_weights * fq, bary))


def weak_residual(nf, f, w, eta=0.0):
    """``int phi(|grad w|) grad w . grad phi_j - int f(x, w) phi_j`` at interior nodes."""
    mesh = w.mesh
    g = reaction(f)
    pts = mesh.quad_points
    fq = np.asarray(g(w.at_quad(), pts), dtype=float)
    F, _ = kernels.flux_operator(mesh, w.values, nf.kernel, eta, jacobian=False)
    return (F - _load(mesh, fq))[mesh.interior]


def _monotone(inst):
    """Strict decrease of ``t -> f(x, t)/t^(ell-1)`` at every quadrature point."""
    mesh = inst.mesh
    top = max(float(inst.u2.values.max()) * 10.0, 1e-5)
    t = np.logspace(-6, math.log10(top), MONO_POINTS)
    pts = mesh.quad_points.reshape(-1, 1, mesh.dim)
    with np.errstate(all="ignore"):
        vals = np.asarray(inst.f(t[None, :], pts), dtype=float)
        r = vals / t[None, :] ** (inst.nf.ell - 1.0)
    step_ok = r[:, 1:] < r[:, :-1] * (1.0 - MONO_RTOL)
    ok = np.isfinite(r).all(axis=1) & step_ok.all(axis=1)
    if ok.all():
        return True, None
    k = int(np.flatnonzero(~ok)[0])
    j = np.flatnonzero(~step_ok[k])
    tk = float(t[j[0] + 1]) if j.size else math.nan
    return False, (tuple(float(c) for c in pts[k, 0]), tk)


def _pairing(inst, F1, F2):
    ell = inst.nf.ell
    u1, u2 = inst.u1.values, inst.u2.values
    keep = (u1 >= POSITIVITY_FLOOR) & (u2 >= POSITIVITY_FLOOR)
    excluded = int(np.count_nonzero(~keep[inst.mesh.interior]))
    diff = np.where(keep, u1**ell - u2**ell, 0.0)
    s1 = np.where(keep, u1, 1.0) ** (ell - 1.0)
    s2 = np.where(keep, u2, 1.0) ** (ell - 1.0)
    pos = np.maximum(diff, 0.0)
    pairing = float(np.dot(F1, pos / s1) - np.dot(F2, pos / s2))
    full = float(np.dot(F1, diff / s1) - np.dot(F2, diff / s2))
    return pairing, full, excluded


def comparison_test(inst, strict=True, tol=RESIDUAL_TOL, eta=None):
    """Check the comparison hypotheses on ``inst`` and then the ordering ``u1 <= u2``.

    ``eta`` smooths ``|grad w|`` in the flux and defaults to ``inst.eta``, the
    value the instance was computed with.

    With ``strict`` a failed hypothesis raises :class:`HypothesisFailure` and a
    failed ordering raises :class:`OrderingViolation`; otherwise the verdict
    carries the failure.
    """
    mesh = inst.mesh
    eta = inst.eta if eta is None else eta
    v = ComparisonVerdict(inst.name, "pass", ratio_bound=inst.ratio_bound)

    def fail(hyp, where, msg):
        v.hypotheses[hyp] = False
        v.status, v.failure, v.where = "hypothesis-failure", hyp, where
        if strict:
            raise HypothesisFailure(msg, hypothesis=hyp, where=where)
        return v

    ok, where = _monotone(inst)
    v.hypotheses["monotone"] = ok
    if not ok:
        return fail("monotone", where, f"f(x,t)/t^(ell-1) is not strictly decreasing near x={where[0]}, t={where[1]:.3g}")
    r1 = weak_residual(inst.nf, inst.f, inst.u1, eta)
    r2 = weak_residual(inst.nf, inst.f, inst.u2, eta)
    v.hypotheses["subsolution"] = bool(r1.max(initial=-np.inf) <= tol)
    if not v.hypotheses["subsolution"]:
        j = int(mesh.interior[np.argmax(r1)])
        return fail("subsolution", j, f"u1 weak residual {r1.max():.3g} > {tol:g} at node {j}")
    v.hypotheses["supersolution"] = bool(r2.min(initial=np.inf) >= -tol)
    if not v.hypotheses["supersolution"]:
        j = int(mesh.interior[np.argmin(r2)])
        return fail("supersolution", j, f"u2 weak residual {r2.min():.3g} < {-tol:g} at node {j}")
    bnd = np.flatnonzero(mesh.boundary_mask)
    gap = inst.u2.values[bnd] - inst.u1.values[bnd]
    v.hypotheses["boundary"] = bool(gap.size == 0 or gap.min() >= -ORDER_TOL)
    if not v.hypotheses["boundary"]:
        j = int(bnd[np.argmin(gap)])
        return fail("boundary", j, f"u1 > u2 at boundary node {j}")
    v.hypotheses["ratio"] = bool(math.isfinite(v.ratio_bound))
    if not v.hypotheses["ratio"]:
        return fail("ratio", None, "u1/u2 is unbounded at interior nodes")
    F1, _ = kernels.flux_operator(mesh, inst.u1.values, inst.nf.kernel, eta, jacobian=False)
    F2, _ = kernels.flux_operator(mesh, inst.u2.values, inst.nf.kernel, eta, jacobian=False)
    v.pairing, v.pairing_full, v.excluded_nodes = _pairing(inst, F1, F2)
    d = inst.u2.values - inst.u1.values
    v.worst_node = int(np.argmin(d))
    v.margin = float(d[v.worst_node])
    if v.margin < -ORDER_TOL:
        v.status = "ordering-violation"
        if strict:
            raise OrderingViolation(
                f"u1 exceeds u2 by {-v.margin:.3g} at node {v.worst_node}", node=v.worst_node, margin=v.margin
            )
    return v


def fd_derivative(g):
    """Central-difference ``d/dt`` of a reaction ``g(t, pts)``."""

    def dg(t, pts):
        h = 1e-7 * np.maximum(1.0, np.abs(t))
        return (np.asarray(g(t + h, pts)) - np.asarray(g(t - h, pts))) / (2 * h)

    return dg


def scaled_instance(nf, mesh, f, scale, name="", solver_tol=1e-10):
    """Discrete solution ``u1`` of ``-Delta_Phi u = f(x, u)`` paired with ``u2 = scale * u1``.

    For a pure power kernel and ``f/t^(p-1)`` decreasing, ``u2`` is a
    supersolution whenever ``scale >= 1``.
    """
    from .solver import solve_scalar

    g = reaction(f)
    dg = fd_derivative(g)
    pts = mesh.quad_points

    def source(wq):
        w = np.maximum(wq, 0.0)
        return np.asarray(g(w, pts), dtype=float), np.asarray(dg(w, pts), dtype=float)

    eta = 1e-8 / mesh.diameter
    u1, _, _ = solve_scalar(nf, mesh, source, eta=eta, tol=solver_tol)
    u2 = DiscreteField(mesh, scale * u1.values, zero_trace=True)
    return ComparisonInstance(nf, g, u1, u2, name=name, eta=eta)
