"""Singular elliptic system instances: declaration, validation, right-hand sides."""

import csv
import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .expr import sample_field
from .grid import DiscreteField

POS_TOL = 1e-14
PSI_FLAG_LEVEL = 1e12


class Structure(enum.Enum):
    COOPERATIVE = "cooperative"
    NONCOOPERATIVE = "noncooperative"
    MIXED = "mixed"
    GENERAL = "general"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        for s in cls:
            if s.value == key:
                return s
        raise ValueError(f"unknown structure {value!r}")


def _pair(x, name):
    t = tuple(float(v) for v in np.broadcast_to(np.asarray(x, dtype=float), (2,)))
    if len(t) != 2:
        raise ValueError(f"{name} needs two entries")
    return t


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Coefficients and exponents of the two-equation singular system.

    Equation 1 has right-hand side
    ``a1 / (u^alpha1 v^beta1) + b1 u^gamma1 v^sigma1`` and equation 2 has
    ``a2 / (u^beta2 v^alpha2) + b2 u^sigma2 v^gamma2``.
    """

    nf: object
    mesh: object
    alpha: tuple
    beta: tuple
    gamma: tuple
    sigma: tuple
    a: tuple
    b: tuple
    q: tuple = None
    psi: object = None
    structure: Structure = Structure.GENERAL

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "sigma"):
            object.__setattr__(self, name, _pair(getattr(self, name), name))
        if self.q is not None:
            object.__setattr__(self, "q", _pair(self.q, "q"))
        object.__setattr__(self, "structure", Structure.parse(self.structure))
        for name in ("a", "b"):
            fields = tuple(getattr(self, name))
            if len(fields) != 2 or not all(isinstance(f, DiscreteField) for f in fields):
                raise TypeError(f"{name} must be a pair of DiscreteFields")
            if any(f.mesh is not self.mesh for f in fields):
                raise ValueError(f"{name} fields must live on the spec mesh")
            object.__setattr__(self, name, fields)

    @property
    def ell(self):
        return self.nf.ell

    def exponents(self, which):
        """``(sing_u, sing_v, pow_u, pow_v)`` for equation ``which``."""
        if which == 1:
            return self.alpha[0], self.beta[0], self.gamma[0], self.sigma[0]
        if which == 2:
            return self.beta[1], self.alpha[1], self.sigma[1], self.gamma[1]
        raise ValueError("which must be 1 or 2")


def make_spec(nf, mesh, *, alpha, beta=(0, 0), gamma=(0, 0), sigma=(0, 0), a=(1, 1),
              b=(0, 0), q=None, psi=None, structure="general"):
    """Build a :class:`SystemSpec`, sampling expressions or constants for ``a`` and ``b``."""
    af = tuple(f if isinstance(f, DiscreteField) else sample_field(f, mesh) for f in _two(a))
    bf = tuple(f if isinstance(f, DiscreteField) else sample_field(f, mesh) for f in _two(b))
    return SystemSpec(nf, mesh, alpha, beta, gamma, sigma, af, bf, q, psi, structure)


def _two(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError("coefficient pairs need two entries")
        return tuple(x)
    return (x, x)


# -- right-hand side -----------------------------------------------------------

def _pow(base, e):
    with np.errstate(divide="ignore"):
        return np.power(base, e)


def _dpow(base, e):
    """Derivative of ``base**e``; zero where ``base == 0`` to keep Newton finite."""
    if e == 0:
        return np.zeros_like(base)
    pos = base > 0
    safe = np.where(pos, base, 1.0)
    return np.where(pos, e * safe ** (e - 1.0), 0.0)


def rhs_terms(spec, which, u, v, a, b, eps, delta, derivatives=False):
    """Regularized right-hand side for arrays ``u, v, a, b`` (same shape).

    With ``derivatives`` the partials with respect to ``u`` and ``v`` are
    returned too.
    """
    su, sv, pu, pv = spec.exponents(which)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ue, ve = np.abs(u) + eps, np.abs(v) + eps
    up, vp = np.maximum(u, 0.0) + delta, np.maximum(v, 0.0) + delta
    S = a * ue ** (-su) * ve ** (-sv)
    P = b * _pow(up, pu) * _pow(vp, pv)
    f = S + P
    if not derivatives:
        return f
    sgn_u, sgn_v = np.sign(u), np.sign(v)
    dSu = -su * S / ue * sgn_u
    dSv = -sv * S / ve * sgn_v
    hu, hv = (u > 0).astype(float), (v > 0).astype(float)
    dPu = b * _dpow(up, pu) * _pow(vp, pv) * hu
    dPv = b * _pow(up, pu) * _dpow(vp, pv) * hv
    return f, dSu + dPu, dSv + dPv


def rhs_eval(spec, u, v, eps, delta, node, which):
    """Regularized right-hand side of equation ``which`` at one node."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    i = which - 1
    a = spec.a[i].values[node]
    b = spec.b[i].values[node]
    return float(rhs_terms(spec, which, u, v, a, b, eps, delta))


# -- validation ----------------------------------------------------------------

@dataclass
class Issue:
    name: str
    level: str  # "regularized" issues also block the theorem level
    kind: str  # "violation", "flag" or "unverified"
    message: str


@dataclass
class ValidationReport:
    issues: list = field(default_factory=list)

    def add(self, name, level, kind, message):
        self.issues.append(Issue(name, level, kind, message))

    def violations(self, level="theorem"):
        levels = {"regularized"} if level == "regularized" else {"regularized", "theorem"}
        return [i for i in self.issues if i.kind == "violation" and i.level in levels]

    def ok(self, level="theorem"):
        return not self.violations(level)

    @property
    def flags(self):
        return [i for i in self.issues if i.kind == "flag"]

    @property
    def unverified(self):
        return [i for i in self.issues if i.kind == "unverified"]

    def names(self, kind="violation"):
        return [i.name for i in self.issues if i.kind == kind]

    def text(self):
        lines = [
            f"theorem-level: {'ok' if self.ok('theorem') else 'FAIL'}",
            f"regularized-level: {'ok' if self.ok('regularized') else 'FAIL'}",
        ]
        lines += [f"  [{i.kind}/{i.level}] {i.name}: {i.message}" for i in self.issues]
        return "\n".join(lines)

    def csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "level", "kind", "message"])
        for i in self.issues:
            w.writerow([i.name, i.level, i.kind, i.message])
        return buf.getvalue()


def validate(spec):
    """Check every hypothesis on ``spec`` and return a :class:`ValidationReport`."""
    rep = ValidationReport()
    ell = spec.ell
    interior = spec.mesh.interior
    for i in range(2):
        tag = f"eq{i + 1}"
        a, b = spec.a[i].values, spec.b[i].values
        if a.min() < 0 or b.min() < 0:
            rep.add(f"{tag}: a_i,b_i >= 0 fails", "regularized", "violation",
                    f"min a={a.min():.3g}, min b={b.min():.3g}")
        s = (a + b)[interior]
        if s.size and s.min() <= POS_TOL:
            k = int(interior[np.argmin(s)])
            rep.add(f"{tag}: a_i+b_i>0 fails", "theorem", "violation", f"at node {k}")
        exps = dict(alpha=spec.alpha[i], beta=spec.beta[i], gamma=spec.gamma[i], sigma=spec.sigma[i])
        neg = [k for k, v in exps.items() if v < 0]
        if neg:
            rep.add(f"{tag}: exponents >= 0 fails", "regularized", "violation", ", ".join(neg))
        gs = spec.gamma[i] + spec.sigma[i]
        if gs <= POS_TOL:
            rep.add(f"{tag}: sigma_i+gamma_i>0 fails", "theorem", "violation", f"sigma+gamma={gs:.6g}")
        if gs >= ell - 1:
            rep.add(f"{tag}: sigma_i+gamma_i<ell-1 fails", "regularized", "violation",
                    f"sigma+gamma={gs:.6g}, ell-1={ell - 1:.6g}")
        _check_structure(spec, i, rep, tag)
        if np.any(b > POS_TOL):
            if spec.q is None:
                rep.add(f"{tag}: q_i", "theorem", "unverified", "q not supplied")
            elif gs < ell - 1:
                need = ell / (ell - gs - 1)
                if spec.q[i] < need - POS_TOL:
                    rep.add(f"{tag}: q_i>=ell/(ell-sigma_i-gamma_i-1) fails", "theorem", "violation",
                            f"q={spec.q[i]:.6g} < {need:.6g}")
        _check_psi(spec, i, rep, tag)
    return rep


def _check_structure(spec, i, rep, tag):
    st = spec.structure
    if st is Structure.COOPERATIVE and spec.beta[i] != 0:
        rep.add(f"{tag}: cooperative needs beta_i=0", "regularized", "violation", f"beta={spec.beta[i]}")
    elif st is Structure.NONCOOPERATIVE and spec.sigma[i] != 0:
        rep.add(f"{tag}: noncooperative needs sigma_i=0", "regularized", "violation", f"sigma={spec.sigma[i]}")
    elif st is Structure.MIXED:
        if spec.alpha[i] != 0 or spec.gamma[i] != 0:
            rep.add(f"{tag}: mixed needs alpha_i=gamma_i=0", "regularized", "violation",
                    f"alpha={spec.alpha[i]}, gamma={spec.gamma[i]}")
        h = np.minimum(spec.a[i].values, spec.b[i].values)[spec.mesh.interior]
        if h.size and h.min() <= POS_TOL:
            rep.add(f"{tag}: min{{a_i,b_i}}>0 fails", "regularized", "violation",
                    f"min over interior nodes = {h.min():.3g}")


def _check_psi(spec, i, rep, tag):
    if spec.psi is None:
        rep.add(f"{tag}: a_i d^(-alpha_i-beta_i) in L_Psi~", "theorem", "unverified", "psi not supplied")
        rep.add(f"{tag}: 0 != a_i in L_Psi~", "theorem", "unverified", "psi not supplied")
        return
    mesh = spec.mesh
    aq = mesh.at_quad(spec.a[i].values)
    if not np.any(aq > POS_TOL):
        rep.add(f"{tag}: 0 != a_i fails", "theorem", "violation", "a_i vanishes identically")
        return
    d = mesh.distance(mesh.quad_points)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        g = aq * d ** (-(spec.alpha[i] + spec.beta[i]))
        mod = float(np.sum(mesh.quad_weights * spec.psi.Phi_tilde(np.abs(g))))
    if not np.isfinite(mod) or mod > PSI_FLAG_LEVEL:
        rep.add(f"{tag}: a_i d^(-alpha_i-beta_i) in L_Psi~", "theorem", "flag",
                f"Psi~ modular {mod:.3g} exceeds {PSI_FLAG_LEVEL:.0e}")
