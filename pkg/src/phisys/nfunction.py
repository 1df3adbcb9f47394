"""N-functions generated by a kernel ``phi``.

An N-function is ``Phi(t) = int_0^t s phi(s) ds``. The kernel families
``power`` (``phi(s) = s**(p-2)``) and ``sum_powers`` (a sum of such terms) have
closed forms; ``custom`` kernels are integrated numerically.

Conjugates are computed from the first-order condition ``s phi(s) = t``, which
has a unique root because ``s -> s phi(s)`` is strictly increasing.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.special import logsumexp

from .errors import (
    BoundViolation,
    BracketFailure,
    DivergentIntegral,
    ExponentOutOfRange,
    NonMonotoneKernel,
)

#: default sample grid for exponent estimation and kernel checks
EXPONENT_GRID = np.logspace(-6, 6, 400)

CONJ_BRACKET = (1e-30, 1e30)
FD_REL_STEP = 1e-6


def _as_array(x):
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class PhiKernel:
    """The kernel ``phi`` of an N-function.

    Use the constructors :meth:`power`, :meth:`sum_powers` and :meth:`custom`.
    ``dsphi`` for a custom kernel is the derivative of ``s -> s phi(s)``; when
    omitted it is approximated by central differences.
    """

    family: str
    exponents: tuple = ()
    func: Optional[Callable] = None
    dsphi_func: Optional[Callable] = None

    @classmethod
    def power(cls, p):
        if not p > 1:
            raise ExponentOutOfRange(f"power exponent must exceed 1, got {p}")
        return cls("power", (float(p),))

    @classmethod
    def sum_powers(cls, *ps):
        if len(ps) == 1 and isinstance(ps[0], (list, tuple)):
            ps = tuple(ps[0])
        if not ps:
            raise ValueError("sum_powers needs at least one exponent")
        if min(ps) <= 1:
            raise ExponentOutOfRange(f"all exponents must exceed 1, got {ps}")
        return cls("sum_powers", tuple(float(p) for p in ps))

    @classmethod
    def custom(cls, phi, dsphi=None):
        return cls("custom", (), phi, dsphi)

    @property
    def builtin(self):
        return self.family in ("power", "sum_powers")

    def phi(self, s):
        s = _as_array(s)
        if self.builtin:
            return sum(s ** (p - 2.0) for p in self.exponents)
        return _as_array(self.func(s))

    def sphi(self, s):
        """``s * phi(s)``."""
        s = _as_array(s)
        if self.builtin:
            return sum(s ** (p - 1.0) for p in self.exponents)
        return s * self.phi(s)

    def dsphi(self, s):
        """Derivative of ``s -> s phi(s)``."""
        s = _as_array(s)
        if self.builtin:
            return sum((p - 1.0) * s ** (p - 2.0) for p in self.exponents)
        if self.dsphi_func is not None:
            return _as_array(self.dsphi_func(s))
        h = FD_REL_STEP * s
        return (self.sphi(s + h) - self.sphi(s - h)) / (2.0 * h)

    def ratio(self, s):
        """``(s phi(s))' / phi(s)``, bounded by ``[ell - 1, m - 1]``."""
        return self.dsphi(s) / self.phi(s)


def _invert_increasing(fn, target, lo, hi, max_iter=200):
    """Solve ``fn(s) = target`` for an increasing ``fn`` by log-space bisection.

    Vectorized over ``target``; zero targets map to zero.
    """
    target = _as_array(target)
    out = np.zeros(target.shape)
    pos = target > 0
    if not np.any(pos):
        return out
    y = target[pos]
    a = np.full(y.shape, math.log(lo))
    b = np.full(y.shape, math.log(hi))
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        fa = fn(np.exp(a))
        fb = fn(np.exp(b))
    bad = (fa > y) | (fb < y) | np.isnan(fa) | np.isnan(fb)
    if np.any(bad):
        raise BracketFailure(
            f"no bracket within [{lo:g}, {hi:g}] for target {y[bad][0]:g}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        with np.errstate(over="ignore", under="ignore"):
            fm = fn(np.exp(mid))
        up = fm < y
        a = np.where(up, mid, a)
        b = np.where(up, b, mid)
        if np.all(b - a <= 4e-16 * (1.0 + np.abs(a))):
            break
    out[pos] = np.exp(0.5 * (a + b))
    return out


_GAUSS_NODES = np.polynomial.legendre.leggauss(20)


@dataclass(frozen=True, eq=False)
class NFunction:
    """An N-function together with its growth exponents ``ell <= m``."""

    kernel: PhiKernel
    ell: float
    m: float
    quad_points: int = 200

    # -- kernel passthroughs
    def phi(self, s):
        return self.kernel.phi(s)

    def sphi(self, s):
        return self.kernel.sphi(s)

    def dsphi(self, s):
        return self.kernel.dsphi(s)

    @property
    def ell_tilde(self):
        """Lower growth exponent of the complementary function."""
        return self.m / (self.m - 1.0)

    @property
    def m_tilde(self):
        """Upper growth exponent of the complementary function."""
        return self.ell / (self.ell - 1.0)

    def Phi(self, t):
        t = np.abs(_as_array(t))
        if self.kernel.builtin:
            return sum(t**p / p for p in self.kernel.exponents)
        if t.size < 64:
            return np.vectorize(self._Phi_quad, otypes=[float])(t)
        return self._Phi_cumulative(t)

    def _Phi_cumulative(self, t):
        # integrate s*phi(s) between consecutive sorted samples and accumulate;
        # narrow gaps use Gauss-Legendre, wide ones adaptive quadrature
        knots, inv = np.unique(t.ravel(), return_inverse=True)
        pos = knots > 0
        lo = np.concatenate([[0.0], knots[pos][:-1]])
        hi = knots[pos]
        pieces = np.empty(hi.size)
        narrow = (lo > 0) & (hi <= 2.0 * lo)
        if narrow.any():
            x, w = _GAUSS_NODES
            a, b = lo[narrow], hi[narrow]
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            vals = self.kernel.sphi(mid[:, None] + half[:, None] * x[None, :])
            pieces[narrow] = half * (vals @ w)
        for k in np.flatnonzero(~narrow):
            pieces[k] = self._Phi_quad(hi[k]) if lo[k] == 0 else self._sphi_quad(lo[k], hi[k])
        out = np.zeros(knots.size)
        out[pos] = np.cumsum(pieces)
        return out[inv].reshape(t.shape)

    def _sphi_quad(self, a, b):
        val, _ = integrate.quad(lambda s: float(self.kernel.sphi(s)), a, b, limit=self.quad_points,
                                epsabs=0.0, epsrel=1e-13)
        return val

    def _Phi_quad(self, t):
        if t == 0.0:
            return 0.0
        # substitute s = t*u so the integration range is fixed
        val, _ = integrate.quad(
            lambda u: float(self.kernel.sphi(t * u)),
            0.0,
            1.0,
            limit=self.quad_points,
            epsabs=0.0,
            epsrel=1e-13,
        )
        return t * val

    def log_Phi_exp(self, z):
        """``log(Phi(exp(z)))``, computed without underflow for builtins."""
        z = _as_array(z)
        if self.kernel.builtin:
            ps = np.array(self.kernel.exponents)
            terms = ps[:, None] * z.reshape(1, -1) - np.log(ps)[:, None]
            return logsumexp(terms, axis=0).reshape(z.shape)
        with np.errstate(divide="ignore"):
            return np.log(self.Phi(np.exp(z)))

    def Phi_inverse(self, s):
        s = _as_array(s)
        return _invert_increasing(self.Phi, s, 1e-300, 1e300)

    def conjugate_argmax(self, t):
        """Maximizer ``s*`` of ``t s - Phi(s)``, i.e. the root of ``s phi(s) = t``."""
        return _invert_increasing(self.sphi, _as_array(t), *CONJ_BRACKET)

    def Phi_tilde(self, t):
        t = np.abs(_as_array(t))
        s = self.conjugate_argmax(t)
        return np.where(t > 0, t * s - self.Phi(s), 0.0)

    def Phi_star(self, t, N_dim):
        return sobolev_conjugate_eval(self, t, N_dim)

    def Phi_tilde_inverse(self, s):
        return _invert_increasing(self.Phi_tilde, _as_array(s), 1e-20, 1e20)


def check_kernel(kernel, grid=None):
    """Sampled checks of positivity and strict monotonicity of ``s phi(s)``.

    Raises :class:`NonMonotoneKernel` when ``s phi(s)`` is not strictly
    increasing on the grid. Returns a dict of the sampled quantities.
    """
    grid = EXPONENT_GRID if grid is None else _as_array(grid)
    phi = kernel.phi(grid)
    if not np.all(np.isfinite(phi)) or np.any(phi <= 0):
        raise NonMonotoneKernel("phi must be positive and finite on the grid")
    sphi = kernel.sphi(grid)
    steps = np.diff(sphi)
    if np.any(steps <= 0):
        k = int(np.argmin(steps))
        raise NonMonotoneKernel(
            f"s*phi(s) is not strictly increasing near s={grid[k]:.6g}"
        )
    return {"phi": phi, "sphi": sphi}


def estimate_exponents(kernel, grid=None, N_dim=None):
    """Growth exponents ``(ell, m)`` with ``ell - 1 <= (s phi)'/phi <= m - 1``.

    For the builtin families the infimum and supremum over ``(0, inf)`` are
    known exactly (``min`` and ``max`` of the exponents) and are returned; the
    grid then only serves as a consistency check. Custom kernels use the grid
    extremes of the sampled ratio.
    """
    grid = EXPONENT_GRID if grid is None else np.sort(_as_array(grid))
    if grid[0] > 1e-6 * (1 + 1e-9) or grid[-1] < 1e6 * (1 - 1e-9):
        raise ValueError("exponent grid must span at least [1e-6, 1e6]")
    ratio = kernel.ratio(grid)
    if kernel.builtin:
        ell = min(kernel.exponents)
        m = max(kernel.exponents)
        tol = 1e-9 * max(1.0, m)
        if ratio.min() < ell - 1 - tol or ratio.max() > m - 1 + tol:
            raise ExponentOutOfRange("sampled ratio leaves the exact exponent band")
    else:
        ell = 1.0 + float(ratio.min())
        m = 1.0 + float(ratio.max())
    if ell <= 1.0:
        raise ExponentOutOfRange(f"estimated ell = {ell:.6g} is not above 1")
    if N_dim is not None and m >= N_dim:
        raise ExponentOutOfRange(f"estimated m = {m:.6g} is not below N = {N_dim}")
    return float(ell), float(m)


def build_nfunction(kernel, quad_points=200, *, exponents=None, N_dim=None, grid=None):
    """Build the N-function of ``kernel``.

    ``exponents`` overrides the estimated ``(ell, m)`` without verifying them;
    it exists for constructing deliberately inconsistent test cases.
    """
    check_kernel(kernel, grid)
    if exponents is None:
        ell, m = estimate_exponents(kernel, grid, N_dim)
    else:
        ell, m = (float(e) for e in exponents)
    return NFunction(kernel, ell, m, quad_points)


def conjugate_eval(nf, t):
    """``max_{s>=0} (t s - Phi(s))``; accepts scalars or arrays."""
    val = nf.Phi_tilde(t)
    return float(val) if np.ndim(val) == 0 else val


def biconjugate_eval(nf, s):
    """Numerical conjugate of the complementary function.

    The maximizer of ``s t - Phi_tilde(t)`` solves ``argmax_tilde(t) = s``
    where ``argmax_tilde`` is itself the root of ``r phi(r) = t``; both roots
    are found by bisection, independently of the closed form ``t = s phi(s)``.
    """
    s = _as_array(s)
    lo = float(nf.sphi(1e-25))
    hi = float(nf.sphi(1e25))
    t_star = _invert_increasing(nf.conjugate_argmax, s, lo, hi)
    return np.where(s > 0, s * t_star - nf.Phi_tilde(t_star), 0.0)


def _log_Phi_exp_scalar(nf, z):
    """Scalar ``log Phi(e^z)`` and its derivative (the local growth exponent)."""
    if nf.kernel.builtin:
        terms = [p * z - math.log(p) for p in nf.kernel.exponents]
        top = max(terms)
        w = [math.exp(v - top) for v in terms]
        sw = sum(w)
        slope = sum(p * wk for p, wk in zip(nf.kernel.exponents, w)) / sw
        return top + math.log(sw), slope
    x = math.exp(z)
    P = float(nf.Phi(x))
    if P <= 0.0:
        return -math.inf, nf.ell
    return math.log(P), float(nf.phi(x)) * x * x / P


def _log_phi_inverse_exp(nf, y):
    """``z`` with ``log Phi(exp z) = y`` by safeguarded Newton."""
    lphi1 = _log_Phi_exp_scalar(nf, 0.0)[0]
    # zeta bounds: Phi(1) min(x^ell, x^m) <= Phi(x) <= Phi(1) max(x^ell, x^m)
    c1 = (y - lphi1) / nf.ell
    c2 = (y - lphi1) / nf.m
    lo, hi = min(c1, c2) - 1.0, max(c1, c2) + 1.0
    while _log_Phi_exp_scalar(nf, lo)[0] > y:
        lo -= 10.0
    while _log_Phi_exp_scalar(nf, hi)[0] < y:
        hi += 10.0
    z = 0.5 * (c1 + c2)
    for _ in range(200):
        f, slope = _log_Phi_exp_scalar(nf, z)
        f -= y
        if f > 0:
            hi = z
        else:
            lo = z
        step = f / slope if slope > 0 and math.isfinite(f) else math.inf
        z_new = z - step
        if not lo < z_new < hi:
            z_new = 0.5 * (lo + hi)
        if abs(z_new - z) <= 1e-15 * (1.0 + abs(z)):
            return z_new
        z = z_new
    return z


def _sobolev_inner(nf, tau, N_dim):
    """``int_0^tau Phi^{-1}(s) s^{-(N+1)/N} ds`` in the variable ``y = log s``."""
    g = lambda y: math.exp(_log_phi_inverse_exp(nf, y) - y / N_dim)
    # local decay rate of the integrand as y -> -inf
    y1, y2 = -40.0, -80.0
    rate = (math.log(g(y1)) - math.log(g(y2))) / (y1 - y2)
    if rate <= 1e-8:
        raise DivergentIntegral(
            f"integrand does not decay at 0 (rate {rate:.3g}); m >= N likely"
        )
    val, err = integrate.quad(
        g, -np.inf, math.log(tau), epsabs=0.0, epsrel=1e-12, limit=nf.quad_points
    )
    if not np.isfinite(val):
        raise DivergentIntegral("inner integral is not finite")
    return val


def sobolev_conjugate_eval(nf, t, N_dim):
    """Sobolev conjugate ``Phi_*``: the inverse of ``t -> int_0^t Phi^{-1}(s)/s^{(N+1)/N} ds``."""
    scalar = np.ndim(t) == 0
    ts = np.abs(np.atleast_1d(_as_array(t)))
    out = np.zeros(ts.shape)
    for i, ti in enumerate(ts):
        if ti == 0:
            continue
        f = lambda x: _sobolev_inner(nf, math.exp(x), N_dim) - ti
        lo, hi = -5.0, 5.0
        while f(lo) > 0:
            lo -= 10.0
        while f(hi) < 0:
            hi += 10.0
        x = optimize.brentq(f, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
        out[i] = math.exp(x)
    return float(out[0]) if scalar else out


def grows_essentially_slower(psi, nf, N_dim, lambdas=(0.5, 1.0, 2.0), t_grid=None):
    """Sampled check that ``Psi(lambda t) / Phi_*(t)`` decays as ``t`` grows.

    This is evidence, not proof: it reports the ratio sequences and passes when
    every sequence is decreasing over the second half of the grid and ends
    below one percent of its maximum.
    """
    t_grid = np.logspace(1, 8, 12) if t_grid is None else _as_array(t_grid)
    star = sobolev_conjugate_eval(nf, t_grid, N_dim)
    ratios = {}
    ok = True
    for lam in lambdas:
        r = psi.Phi(lam * t_grid) / star
        tail = r[len(r) // 2 :]
        ok &= bool(np.all(np.diff(tail) < 0) and r[-1] < 1e-2 * r.max())
        ratios[lam] = r
    return ok, ratios


# -- checks and reports -------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    value: float
    worst_margin: float
    passed: bool

    def row(self):
        return [self.name, f"{self.value:.12g}", f"{self.worst_margin:.6e}", "pass" if self.passed else "fail"]


def _rel_margin(lhs, rhs):
    """Relative slack of ``lhs <= rhs``; negative means violated."""
    lhs = _as_array(lhs)
    rhs = _as_array(rhs)
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
    return (rhs - lhs) / scale


@dataclass
class ZetaReport:
    n_samples: int
    n_violations: int
    worst: dict
    worst_sample: tuple

    @property
    def passed(self):
        return self.n_violations == 0


def check_zeta_bounds(nf, rho, t, slack=1e-9, strict=True):
    """Check the two-sided power bounds of ``Phi`` and its conjugate.

    ``min(t^ell, t^m) Phi(rho) <= Phi(rho t) <= max(t^ell, t^m) Phi(rho)`` and
    the same for the conjugate with exponents ``m/(m-1)`` and ``ell/(ell-1)``.
    """
    rho = _as_array(rho).ravel()
    t = _as_array(t).ravel()
    if np.any(rho <= 0) or np.any(t <= 0):
        raise ValueError("samples must be positive")

    def zetas(e1, e2):
        a, b = t**e1, t**e2
        return np.minimum(a, b), np.maximum(a, b)

    z0, z1 = zetas(nf.ell, nf.m)
    z2, z3 = zetas(nf.ell_tilde, nf.m_tilde)
    P_rho, P_rt = nf.Phi(rho), nf.Phi(rho * t)
    C_rho, C_rt = nf.Phi_tilde(rho), nf.Phi_tilde(rho * t)
    margins = {
        "phi_lower": _rel_margin(z0 * P_rho, P_rt),
        "phi_upper": _rel_margin(P_rt, z1 * P_rho),
        "conj_lower": _rel_margin(z2 * C_rho, C_rt),
        "conj_upper": _rel_margin(C_rt, z3 * C_rho),
    }
    stacked = np.vstack(list(margins.values()))
    per_sample = stacked.min(axis=0)
    bad = per_sample < -slack
    k = int(np.argmin(per_sample))
    report = ZetaReport(
        n_samples=rho.size,
        n_violations=int(bad.sum()),
        worst={name: float(v.min()) for name, v in margins.items()},
        worst_sample=(float(rho[k]), float(t[k])),
    )
    if strict and bad.any():
        raise BoundViolation(
            f"{report.n_violations} zeta-bound violations, worst at rho={rho[k]:.6g}, t={t[k]:.6g}",
            witness=report.worst_sample,
        )
    return report


def audit_nfunction(nf, grid=None, n_pairs=10_000, seed=0, zeta_range=(1e-3, 1e3)):
    """Run every sampled N-function check and return a list of :class:`CheckResult`."""
    grid = EXPONENT_GRID if grid is None else _as_array(grid)
    rng = np.random.default_rng(seed)
    k = nf.kernel
    out = [
        CheckResult("ell", nf.ell, 0.0, nf.ell > 1),
        CheckResult("m", nf.m, 0.0, nf.m >= nf.ell),
    ]

    phi = k.phi(grid)
    out.append(CheckResult("phi_positive", float(phi.min()), float(phi.min()), bool(np.all(phi > 0))))
    sphi = k.sphi(grid)
    inc = np.diff(sphi) / sphi[1:]
    out.append(CheckResult("sphi_increasing", float(inc.min()), float(inc.min()), bool(np.all(inc > 0))))
    # (phi1): positive log-slope of s*phi(s) at both ends forces the limits 0 and inf
    r = k.ratio(grid)
    end_slope = float(min(r[0], r[-1]))
    out.append(CheckResult("sphi_limits", end_slope, end_slope, end_slope > 0 and sphi[0] < sphi[-1]))

    # custom exponents come from a finite grid, so allow for sampling error
    tol = 1e-9 if k.builtin else 1e-6
    m3 = np.minimum(r - (nf.ell - 1), (nf.m - 1) - r) / max(nf.m - 1, 1.0)
    out.append(CheckResult("phi3", float(r.min()) + 1, float(m3.min()), bool(m3.min() >= -tol)))
    q = phi * grid**2 / nf.Phi(grid)
    m3p = np.minimum(q - nf.ell, nf.m - q) / nf.m
    out.append(CheckResult("phi3_prime", float(q.min()), float(m3p.min()), bool(m3p.min() >= -tol)))

    ts = rng.uniform(np.log(1e-3), np.log(1e3), size=(2, 2000))
    tt, ss = np.exp(ts)
    young = _rel_margin(tt * ss, nf.Phi(tt) + nf.Phi_tilde(ss))
    out.append(CheckResult("young", float(young.min()), float(young.min()), bool(young.min() >= -tol)))
    sstar = nf.conjugate_argmax(tt)
    eq = np.abs(tt * sstar - nf.Phi(sstar) - nf.Phi_tilde(tt)) / np.maximum(tt * sstar, 1e-300)
    out.append(CheckResult("young_equality", float(eq.max()), float(-eq.max()), bool(eq.max() <= 1e-10)))

    sub = grid[(grid >= 1e-4) & (grid <= 1e4)]
    cg = _rel_margin(nf.Phi_tilde(sub * k.phi(sub)), nf.Phi(2 * sub))
    out.append(CheckResult("conj_growth", float(cg.min()), float(cg.min()), bool(cg.min() >= -tol)))
    d2 = _rel_margin(nf.Phi(2 * grid), 2**nf.m * nf.Phi(grid))
    out.append(CheckResult("delta2", float(d2.min()), float(d2.min()), bool(d2.min() >= -tol)))

    pts = np.logspace(-2, 2, 50)
    bic = np.abs(biconjugate_eval(nf, pts) - nf.Phi(pts)) / nf.Phi(pts)
    out.append(CheckResult("biconjugation", float(bic.max()), float(-bic.max()), bool(bic.max() <= 1e-8)))

    lo, hi = np.log(zeta_range[0]), np.log(zeta_range[1])
    rho, t = np.exp(rng.uniform(lo, hi, size=(2, n_pairs)))
    z = check_zeta_bounds(nf, rho, t, strict=False)
    worst = min(z.worst.values())
    out.append(CheckResult("zeta_bounds", float(z.n_violations), worst, z.passed))
    return out
