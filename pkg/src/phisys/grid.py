"""P1 meshes on intervals and rectangles, nodal fields and Orlicz norms."""

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import BoundViolation, DegenerateElement

_G = math.sqrt(0.15)
# 3-point Gauss rule on the reference segment [0, 1]
SEGMENT_RULE = (np.array([0.5 - _G, 0.5, 0.5 + _G]), np.array([5.0, 8.0, 5.0]) / 18.0)
# 3-point interior rule on the reference triangle, barycentric coordinates
TRIANGLE_RULE = (
    np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]]),
    np.full(3, 1.0 / 3.0),
)


class Mesh:
    """Simplicial mesh of an interval or an axis-aligned rectangle.

    Build with :meth:`interval` or :meth:`rectangle`. ``bounds`` holds one
    ``(lo, hi)`` pair per axis and defines the exact boundary distance.
    """

    def __init__(self, nodes, elements, boundary_mask, bounds):
        self.nodes = np.ascontiguousarray(nodes, dtype=float)
        if self.nodes.ndim == 1:
            self.nodes = self.nodes[:, None]
        self.elements = np.ascontiguousarray(elements, dtype=np.intp)
        self.boundary_mask = np.asarray(boundary_mask, dtype=bool)
        self.bounds = tuple((float(a), float(b)) for a, b in bounds)
        if self.elements.shape[1] != self.dim + 1:
            raise ValueError("elements must be simplices matching the dimension")
        if np.any(self.measures <= 0):
            raise DegenerateElement(
                f"element {int(np.argmin(self.measures))} has non-positive measure"
            )

    @classmethod
    def interval(cls, x0=0.0, x1=1.0, n=100):
        """Uniform mesh of ``[x0, x1]`` with ``n`` cells (``n + 1`` nodes)."""
        if n < 2:
            raise ValueError("need at least two cells")
        x = np.linspace(x0, x1, n + 1)
        el = np.column_stack([np.arange(n), np.arange(1, n + 1)])
        bmask = np.zeros(n + 1, dtype=bool)
        bmask[[0, -1]] = True
        return cls(x, el, bmask, [(x0, x1)])

    @classmethod
    def rectangle(cls, x0=0.0, x1=1.0, y0=0.0, y1=1.0, nx=16, ny=16):
        """Tensor grid of ``nx * ny`` cells, each cut along its rising diagonal."""
        xs = np.linspace(x0, x1, nx + 1)
        ys = np.linspace(y0, y1, ny + 1)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        nodes = np.column_stack([X.ravel(), Y.ravel()])
        idx = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
        n00 = idx[:-1, :-1].ravel()
        n10 = idx[1:, :-1].ravel()
        n01 = idx[:-1, 1:].ravel()
        n11 = idx[1:, 1:].ravel()
        el = np.vstack(
            [np.column_stack([n00, n10, n11]), np.column_stack([n00, n11, n01])]
        )
        on = np.zeros_like(X, dtype=bool)
        on[[0, -1], :] = True
        on[:, [0, -1]] = True
        return cls(nodes, el, on.ravel(), [(x0, x1), (y0, y1)])

    # -- geometry
    @property
    def dim(self):
        return self.nodes.shape[1]

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    @cached_property
    def interior(self):
        return np.flatnonzero(~self.boundary_mask)

    @property
    def diameter(self):
        return math.sqrt(sum((b - a) ** 2 for a, b in self.bounds))

    @property
    def volume(self):
        return math.prod(b - a for a, b in self.bounds)

    def distance(self, points):
        """Exact distance to the boundary of the box for points inside it."""
        pts = np.asarray(points, dtype=float)
        d = np.full(pts.shape[:-1], np.inf)
        for k, (a, b) in enumerate(self.bounds):
            d = np.minimum(d, np.minimum(pts[..., k] - a, b - pts[..., k]))
        return np.maximum(d, 0.0)

    @cached_property
    def _jacobians(self):
        v = self.nodes[self.elements]  # (E, k, dim)
        return v[:, 1:, :] - v[:, :1, :]  # (E, dim, dim), rows are edge vectors

    @cached_property
    def measures(self):
        T = self._jacobians
        if self.dim == 1:
            return T[:, 0, 0].copy()
        return 0.5 * np.linalg.det(T)

    @cached_property
    def element_diameters(self):
        v = self.nodes[self.elements]
        k = v.shape[1]
        d = np.zeros(self.n_elements)
        for a in range(k):
            for b in range(a + 1, k):
                d = np.maximum(d, np.linalg.norm(v[:, a] - v[:, b], axis=1))
        return d

    @cached_property
    def grad_basis(self):
        """Gradients of the barycentric basis, shape ``(E, dim + 1, dim)``."""
        T = self._jacobians
        if np.any(self.measures <= 0):
            raise DegenerateElement("zero-measure element")
        Tinv = np.linalg.inv(T)  # columns give grad of lambda_1..lambda_dim
        g = np.transpose(Tinv, (0, 2, 1))  # (E, dim, dim): row a = grad lambda_{a+1}
        g0 = -g.sum(axis=1, keepdims=True)
        return np.ascontiguousarray(np.concatenate([g0, g], axis=1))

    @property
    def quad_rule(self):
        if self.dim == 1:
            xi, w = SEGMENT_RULE
            return np.column_stack([1 - xi, xi]), w
        return TRIANGLE_RULE

    @cached_property
    def quad_weights(self):
        """Absolute quadrature weights, shape ``(E, Q)``."""
        _, w = self.quad_rule
        return self.measures[:, None] * w[None, :]

    @cached_property
    def quad_points(self):
        bary, _ = self.quad_rule
        return np.einsum("qa,ead->eqd", bary, self.nodes[self.elements])

    def at_quad(self, values):
        bary, _ = self.quad_rule
        return np.asarray(values, dtype=float)[self.elements] @ bary.T

    def interpolate(self, fn, zero_trace=False):
        vals = np.asarray(fn(*self.nodes.T), dtype=float)
        vals = np.broadcast_to(vals, (self.n_nodes,)).copy()
        if zero_trace:
            vals[self.boundary_mask] = 0.0
        return DiscreteField(self, vals, zero_trace=zero_trace)

    def zeros(self):
        return DiscreteField(self, np.zeros(self.n_nodes), zero_trace=True)

    def __repr__(self):
        return f"Mesh(dim={self.dim}, nodes={self.n_nodes}, elements={self.n_elements})"


@dataclass(frozen=True, eq=False)
class DiscreteField:
    """Nodal values of a P1 function on ``mesh``."""

    mesh: Mesh
    values: np.ndarray
    zero_trace: bool = False
    kind: str = "P1"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.mesh.n_nodes,):
            raise ValueError(f"expected {self.mesh.n_nodes} nodal values, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        if self.zero_trace and np.any(vals[self.mesh.boundary_mask] != 0.0):
            raise ValueError("zero-trace field has nonzero boundary values")
        object.__setattr__(self, "values", vals)

    def _combine(self, other, op):
        if isinstance(other, DiscreteField):
            if other.mesh is not self.mesh:
                raise ValueError("fields live on different meshes")
            return DiscreteField(self.mesh, op(self.values, other.values), self.zero_trace and other.zero_trace)
        return DiscreteField(self.mesh, op(self.values, other), self.zero_trace and other == 0)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, c):
        return DiscreteField(self.mesh, self.values * float(c), self.zero_trace)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def at_quad(self):
        return self.mesh.at_quad(self.values)


def distance_function(mesh):
    return DiscreteField(mesh, mesh.distance(mesh.nodes), zero_trace=True)


def gradient(field):
    """Constant gradient of a P1 field on each element, shape ``(E, dim)``."""
    mesh = field.mesh
    if np.any(mesh.measures <= 0):
        raise DegenerateElement("zero-measure element")
    return np.einsum("ea,ead->ed", field.values[mesh.elements], mesh.grad_basis)


def _phi_fn(nf):
    return nf.Phi if hasattr(nf, "Phi") else nf


def _samples(field, on_gradient):
    """Absolute values to integrate and their weights."""
    if on_gradient:
        g = gradient(field)
        return np.sqrt(np.einsum("ed,ed->e", g, g)), field.mesh.measures
    return np.abs(field.at_quad()).ravel(), field.mesh.quad_weights.ravel()


def modular(nf, field, on_gradient=False):
    """``int Phi(|u|)`` (or ``int Phi(|grad u|)``) by per-element quadrature.

    ``nf`` is an :class:`~phisys.nfunction.NFunction` or any vectorized
    callable playing the role of ``Phi``.
    """
    vals, w = _samples(field, on_gradient)
    return float(np.dot(w, _phi_fn(nf)(vals)))


def luxemburg_norm(nf, field, on_gradient=False, rtol=1e-10):
    """``inf{lam > 0 : int Phi(|u|/lam) <= 1}`` by bisection on ``log lam``.

    Returns the upper end of the final bracket, so the modular at the returned
    value never exceeds one.
    """
    vals, w = _samples(field, on_gradient)
    top = float(vals.max()) if vals.size else 0.0
    if top == 0.0:
        return 0.0
    Phi = _phi_fn(nf)
    mod = lambda lam: float(np.dot(w, Phi(vals / lam)))
    lo, hi = math.log(1e-12 * top), math.log(1e12 * top)
    while mod(math.exp(lo)) <= 1.0:
        lo -= 10.0
    while mod(math.exp(hi)) > 1.0:
        hi += 10.0
    tol = min(rtol, 1e-13)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mod(math.exp(mid)) > 1.0:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)


@dataclass
class PoincareReport:
    lhs: float
    rhs: float
    slack: float
    passed: bool


def check_poincare(nf, field, rtol=1e-9, strict=True):
    """Check ``int Phi(u) <= int Phi(2 diam |grad u|)`` for a zero-trace field."""
    if not field.zero_trace:
        raise ValueError("Poincare check needs a zero-trace field")
    lhs = modular(nf, field)
    g = gradient(field)
    mag = np.sqrt(np.einsum("ed,ed->e", g, g))
    rhs = float(np.dot(field.mesh.measures, _phi_fn(nf)(2.0 * field.mesh.diameter * mag)))
    slack = rhs - lhs
    ok = lhs <= rhs * (1 + rtol) or lhs == 0.0
    if strict and not ok:
        raise BoundViolation(f"Poincare inequality fails: {lhs:.6g} > {rhs:.6g}", witness=field)
    return PoincareReport(lhs, rhs, slack, ok)


def integrate(field_or_values, mesh=None):
    """Integral of a field, or of values given at the quadrature points."""
    if isinstance(field_or_values, DiscreteField):
        mesh = field_or_values.mesh
        q = field_or_values.at_quad()
    else:
        q = np.asarray(field_or_values, dtype=float)
    return float(np.sum(mesh.quad_weights * q))


def write_fields_csv(path, mesh, **fields):
    """Write node coordinates followed by one column per named field."""
    coords = ["x", "y"][: mesh.dim]
    names = list(fields)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(coords + names)
        cols = [np.asarray(f.values if isinstance(f, DiscreteField) else f) for f in fields.values()]
        for i in range(mesh.n_nodes):
            w.writerow([repr(float(c)) for c in mesh.nodes[i]] + [repr(float(c[i])) for c in cols])


def read_nodal_csv(path, column, mesh):
    """Read one nodal column written by :func:`write_fields_csv`."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    vals = np.array([float(r[column]) for r in rows])
    if vals.size != mesh.n_nodes:
        raise ValueError(f"{path}: expected {mesh.n_nodes} rows, got {vals.size}")
    return vals
