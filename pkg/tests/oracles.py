"""Independent reference solutions used by the tests.

Nothing here imports the package under test.
"""

import numpy as np


def _shoot(eps, s, h):
    """RK4 trajectory of ``u'' = -1/(u + eps)`` from ``u(0) = 0, u'(0) = s``.

    Returns the sampled ``u`` and ``u(1)``; a trajectory that reaches the pole
    ``u = -eps`` is reported as ending far below zero.
    """
    n = int(round(1.0 / h))
    us = [0.0]
    u, v = 0.0, s
    f = lambda y: -1.0 / (y + eps)
    for _ in range(n):
        k1u, k1v = v, f(u)
        y2 = u + h / 2 * k1u
        if y2 <= -eps / 2:
            return None, -1e6
        k2u, k2v = v + h / 2 * k1v, f(y2)
        y3 = u + h / 2 * k2u
        if y3 <= -eps / 2:
            return None, -1e6
        k3u, k3v = v + h / 2 * k2v, f(y3)
        y4 = u + h * k3u
        if y4 <= -eps / 2:
            return None, -1e6
        k4u, k4v = v + h * k3v, f(y4)
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        us.append(u)
    return np.array(us), u


def shoot_singular(eps, h=1e-4, tol=1e-13, max_iter=200):
    """Solve ``-u'' = 1/(u + eps)``, ``u(0) = u(1) = 0`` by RK4 shooting on ``u'(0)``.

    The slope is bracketed first and then refined by the Illinois variant of the
    secant method. Returns ``(xs, u)`` on the RK4 grid.
    """
    lo, hi = 0.0, 1.0
    _, f_lo = _shoot(eps, lo, h)
    us, f_hi = _shoot(eps, hi, h)
    while f_hi < 0:
        lo, f_lo = hi, f_hi
        hi *= 2.0
        us, f_hi = _shoot(eps, hi, h)
    side = 0
    for _ in range(max_iter):
        s = hi - f_hi * (hi - lo) / (f_hi - f_lo)
        if not lo < s < hi:
            s = 0.5 * (lo + hi)
        us_s, f_s = _shoot(eps, s, h)
        if us_s is not None and abs(f_s) < tol:
            return np.linspace(0.0, 1.0, us_s.size), us_s
        if f_s < 0:
            lo, f_lo = s, f_s
            if side == -1:
                f_hi /= 2
            side = -1
        else:
            hi, f_hi, us = s, f_s, us_s
            if side == 1:
                f_lo /= 2
            side = 1
        if hi - lo < 1e-15 * hi:
            break
    return np.linspace(0.0, 1.0, us.size), us


def plaplace_constant(p, x, c=1.0):
    """Exact solution of ``-(|w'|^(p-2) w')' = c`` on (0, 1) with zero ends."""
    q = 1.0 / (p - 1.0)
    x = np.asarray(x, dtype=float)
    return c**q * (0.5 ** (q + 1) - np.abs(0.5 - x) ** (q + 1)) / (q + 1)


def brute_min_g(beta, sigma, n=1_000_000, t_max=1e6):
    """Brute-force ``min 1/(t^beta+1) + t^sigma`` over a dense mixed grid."""
    t = np.concatenate([[0.0], np.linspace(0.0, 10.0, n // 2)[1:], np.logspace(-12, np.log10(t_max), n // 2)])
    g = 1.0 / (t**beta + 1.0) + t**sigma
    k = int(np.argmin(g))
    # polish with a fine local scan around the best sample
    lo, hi = max(t[k] * (1 - 1e-3), 0.0), t[k] * (1 + 1e-3) + 1e-12
    tt = np.linspace(lo, hi, n)
    return min(float(g[k]), float((1.0 / (tt**beta + 1.0) + tt**sigma).min()))


def p1_linear_1d(n, load):
    """P1 solve of ``-u'' = load(x)`` on (0, 1) by a dense tridiagonal system.

    The load vector uses 5-point Gauss quadrature per element.
    """
    h = 1.0 / n
    x = np.linspace(0.0, 1.0, n + 1)
    K = (np.diag(np.full(n - 1, 2.0)) - np.diag(np.ones(n - 2), 1) - np.diag(np.ones(n - 2), -1)) / h
    gp, gw = np.polynomial.legendre.leggauss(5)
    b = np.zeros(n + 1)
    for e in range(n):
        xq = x[e] + (gp + 1) / 2 * h
        wq = gw * h / 2
        fq = load(xq)
        lam = (xq - x[e]) / h
        b[e] += np.sum(wq * fq * (1 - lam))
        b[e + 1] += np.sum(wq * fq * lam)
    u = np.zeros(n + 1)
    u[1:-1] = np.linalg.solve(K, b[1:-1])
    return x, u
