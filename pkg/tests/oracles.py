"""Independent reference implementations used by the tests.

These deliberately avoid the package: Airy values come from mpmath or
scipy.special, quadratures are plain composite Gauss-Legendre rules and the
determinants are formed without any scaling tricks.
"""

import itertools
import math

import mpmath
import numpy as np
from scipy.special import airy as sp_airy

mpmath.mp.dps = 30


def mp_ai(x):
    return float(mpmath.airyai(x)), float(mpmath.airyai(x, derivative=1))


def mp_kernel(x, y, scaled=False):
    """Airy kernel at 60 digits with the exact diagonal formula.

    ``scaled=True`` multiplies by exp(zeta(x) + zeta(y)), zeta = (2/3) x^{3/2} for x > 0.
    """
    with mpmath.workdps(60):
        x, y = mpmath.mpf(x), mpmath.mpf(y)
        ax, dx = mpmath.airyai(x), mpmath.airyai(x, derivative=1)
        if abs(x - y) < mpmath.mpf(10) ** -40:
            val = dx**2 - x * ax**2
        else:
            ay, dy = mpmath.airyai(y), mpmath.airyai(y, derivative=1)
            val = (ax * dy - dx * ay) / (x - y)
        if scaled:
            zeta = lambda t: 2 * t**1.5 / 3 if t > 0 else 0
            val *= mpmath.exp(zeta(x) + zeta(y))
        return float(val)


def sp_kernel(x, y):
    """Airy kernel matrices from scipy.special.airy over the last axis (batched)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ax, dx, _, _ = sp_airy(x)
    ay, dy, _, _ = sp_airy(y)
    X, Y = x[..., :, None], y[..., None, :]
    num = ax[..., :, None] * dy[..., None, :] - dx[..., :, None] * ay[..., None, :]
    diff = X - Y
    diag = dx[..., :, None] ** 2 - X * ax[..., :, None] ** 2
    small = np.abs(diff) < 1e-13
    return np.where(small, diag, num / np.where(small, 1.0, diff))


def gl_rule(a, b, panels, per_panel):
    """Composite Gauss-Legendre rule on [a, b] with equal panels."""
    t, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * t + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def fermi(x, center=0.0, theta=1.0, amplitude=1.0):
    return amplitude / (1.0 + np.exp(-(np.asarray(x) - center) / theta))


def gap_oracle(s, sigma, a, b, panels=16, per_panel=20):
    """det(I - sqrt(w sigma) K_s sqrt(w sigma)) on [a, b]."""
    x, w = gl_rule(a, b, panels, per_panel)
    d = np.sqrt(w * sigma(x))
    k = sp_kernel(x + s, x + s)
    return float(np.linalg.det(np.eye(len(x)) - d[:, None] * k * d[None, :]))


def series_janossy(s, sigma, nu, nmax, rules):
    """Truncated series sum_{n<=nmax} (-1)^n/n! int det K_s(lam, nu) prod sigma(lam_i) d lam_i.

    ``rules[n]`` is the (nodes, weights) pair used for the n-fold integral.
    """
    nu = np.asarray(nu, dtype=float)
    m = len(nu)
    total = float(np.linalg.det(sp_kernel(nu + s, nu + s))) if m else 1.0
    for n in range(1, nmax + 1):
        x, w = rules[n]
        sw = w * sigma(x)
        pts = np.array(list(itertools.product(range(len(x)), repeat=n)))
        term = 0.0
        for chunk in np.array_split(pts, max(1, len(pts) // 20000)):
            lam = x[chunk]
            allpts = np.concatenate([lam, np.broadcast_to(nu, (len(lam), m))], axis=1) + s
            mats = sp_kernel(allpts, allpts)
            term += float(np.sum(np.linalg.det(mats) * np.prod(sw[chunk], axis=1)))
        total += (-1) ** n / math.factorial(n) * term
    return total
