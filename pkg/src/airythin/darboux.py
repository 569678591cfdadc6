"""Janossy densities, Darboux-transformed wavefunctions and potentials.

With L the resolvent kernel and nu = (nu_1, ..., nu_m):

* j(s | nu) = det L(nu, nu) * j(s), and equivalently
  j(s | nu) = det K_s(nu, nu) * det(1 - M_sqrt(sigma) H M_sqrt(sigma)) with the
  Palm kernel H;
* phi(lam | nu) = phi(lam) - L(lam, nu) L(nu, nu)^{-1} phi(nu), which vanishes
  at every nu_i;
* v(s | nu) = d_s^2 log j(s | nu).  Using d_s L = -phi phi^T,
  v(s | nu) = v(s) - (phi^T L^{-1} phi)^2 - 2 (d_s phi)^T L^{-1} phi  (phi at nu),
  which is the default.  The alternative ``method="trace"`` evaluates the
  modified trace formula
  v(s | nu) = int phi(lam | nu)^2 (-sigma_0'(lam) + sum_i 2 (1 - sigma(lam))/(lam - nu_i)) dlam
              - sum_j Delta_j phi(xi_j | nu)^2
  by quadrature to lam = -U and an asymptotic expansion of the integrand
  beyond.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg as sla

from . import _fd
from .errors import IllConditioned, NonPositiveDeterminant
from .fredholm import QuadratureScheme, ResolventState, build_scheme
from .kernels import MAX_COND, KernelSurface, PointConfig, as_points, kernel_matrix_scaled, log_det_kernel
from .specfun import airy_arrays
from .stark import STENCIL_H2, potential, wavefunction_values
from .thinning import SigmaModel

__all__ = [
    "JanossyResult",
    "janossy",
    "janossy_via_palm",
    "modified_wavefunction",
    "modified_potential",
    "modified_stark_residual",
    "TRACE_CUTOFF",
]

TRACE_CUTOFF = 500.0


class JanossyResult(NamedTuple):
    s: float
    nu: PointConfig
    value: float
    log_value: float
    corr_det: float
    log_corr_det: float
    gap: float
    log_gap: float


def _factor_small(Lt: np.ndarray):
    """Cholesky of the scaled m x m matrix L(nu, nu), with a conditioning check."""
    cond = np.linalg.cond(Lt)
    if not np.isfinite(cond) or cond > MAX_COND:
        raise IllConditioned(f"L(nu, nu) has condition number {cond:.3g} > {MAX_COND:g}")
    try:
        return sla.cho_factor(Lt, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NonPositiveDeterminant("L(nu, nu) is not positive definite") from exc


def janossy(state: ResolventState, nu) -> JanossyResult:
    """j(s | nu) = det L(nu, nu) * j(s), carried in log form."""
    nu = as_points(nu)
    log_gap = state.log_det
    if nu.m == 0:
        g = math.exp(log_gap)
        return JanossyResult(state.s, nu, g, log_gap, 1.0, 0.0, g, log_gap)
    Lt, e, _ = state.kernel_scaled(nu.array)
    sign, logdet = np.linalg.slogdet(Lt)
    if sign <= 0:
        raise NonPositiveDeterminant(f"det L(nu, nu) has sign {sign:+.0f}")
    log_corr = float(logdet - 2.0 * e.sum())
    log_value = log_corr + log_gap
    return JanossyResult(
        state.s, nu, math.exp(log_value), log_value, math.exp(log_corr), log_corr, math.exp(log_gap), log_gap
    )


def janossy_via_palm(s: float, sigma: SigmaModel, scheme: Optional[QuadratureScheme], nu, n: int = 200) -> JanossyResult:
    """j(s | nu) = det K_s(nu, nu) * det(1 - M_sqrt(sigma) H M_sqrt(sigma)).

    The second determinant is discretized on the same scheme with the Palm
    kernel H in place of K_s (double precision).
    """
    nu = as_points(nu)
    s = float(s)
    if scheme is None:
        scheme = build_scheme(s, sigma, n)
    ksurf = KernelSurface.shifted(s)
    sign, log_kdet = log_det_kernel(ksurf, nu)
    if sign <= 0:
        raise NonPositiveDeterminant("det K_s(nu, nu) is not positive")
    x, w = scheme.nodes, scheme.weights
    if x.size == 0:
        log_h = 0.0
    else:
        d = np.sqrt(sigma(x) * w)
        kt, ex, _ = kernel_matrix_scaled(ksurf, x, x)
        if nu.m:
            kxn, _, _ = kernel_matrix_scaled(ksurf, x, nu.array)
            knn, _, _ = kernel_matrix_scaled(ksurf, nu.array, nu.array)
            c = sla.cho_factor(knn, lower=True)
            kt = kt - kxn @ sla.cho_solve(c, kxn.T)
        de = d * np.exp(-ex)
        S = de[:, None] * kt * de[None, :]
        S = 0.5 * (S + S.T)
        try:
            c, _ = sla.cho_factor(np.eye(x.size) - S, lower=True)
        except np.linalg.LinAlgError as exc:
            raise NonPositiveDeterminant("Palm operator determinant is not positive") from exc
        log_h = float(2.0 * np.log(np.diag(c)).sum())
    log_value = log_kdet + log_h
    return JanossyResult(s, nu, math.exp(log_value), log_value, math.exp(log_kdet), log_kdet, math.exp(log_h), log_h)


class _Darboux:
    """Scaled data of the Darboux transformation at nu for one state."""

    def __init__(self, state: ResolventState, nu: PointConfig):
        self.state = state
        self.nu = nu
        data = state.point_data(nu.array)
        self.zeta = data["zeta"]
        self.phi = data["phi"]
        self.dphi = data["psi"] - state.dlog_gap * data["phi"]
        self.Lt, _, _ = state.kernel_scaled(nu.array)
        self.chol = _factor_small(self.Lt)
        self.gamma = sla.cho_solve(self.chol, self.phi)

    def wave(self, lam: np.ndarray, chunk: int = 4000) -> np.ndarray:
        out = np.empty(lam.size)
        for start in range(0, lam.size, chunk):
            part = lam[start : start + chunk]
            d = self.state.point_data(part)
            Lln, _, _ = self.state.kernel_scaled(part, self.nu.array)
            out[start : start + chunk] = np.exp(-d["zeta"]) * (d["phi"] - Lln @ self.gamma)
        return out


def modified_wavefunction(state: ResolventState, nu, lam):
    """phi(lam; s | nu); vanishes at each nu_i."""
    nu = as_points(nu)
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if nu.m == 0:
        out = wavefunction_values(state, arr)[0]
    else:
        out = _Darboux(state, nu).wave(arr)
    return float(out[0]) if np.ndim(lam) == 0 else out


def _trace_rule(s: float, breaks, nodes_per_panel: int = 24, max_phase: float = 6.0, max_len: float = 1.0):
    """Gauss-Legendre rule resolving the oscillation of phi^2 between breakpoints."""
    t, wt = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        x = a
        while x < b:
            omega = 2.0 * math.sqrt(max(0.0, -(x + s)))
            step = max_len if omega == 0.0 else min(max_len, max_phase / omega)
            y = min(b, x + step)
            if b - y < 1e-9 * max(1.0, abs(b)):
                y = b
            edges.append((x, y))
            x = y
    e = np.array(edges)
    half = 0.5 * (e[:, 1] - e[:, 0])
    mid = 0.5 * (e[:, 1] + e[:, 0])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * wt[None, :]).ravel()
    return nodes, weights


def _far_moments(state: ResolventState, dbx: Optional[_Darboux]) -> tuple[float, float]:
    """First 1/lam moments (alpha, beta) of phi(lam|nu) = A Ai(lam+s) + B Ai'(lam+s)."""
    nd = state.node_data()
    c = nd["d"] * nd["fa"]
    alpha = float(np.dot(c, nd["b"]))
    beta = -float(np.dot(c, nd["a"]))
    if dbx is not None and dbx.nu.m:
        nu = dbx.nu.array
        at, bt = airy_arrays(nu + state.s, scaled=True)
        if nd["x"].size:
            Yt = state.solve(state.cross_scaled(nu))
            ea = (nd["d"] * nd["a"]) @ Yt
            eb = (nd["d"] * nd["b"]) @ Yt
        else:
            ea = eb = np.zeros(nu.size)
        g = dbx.gamma
        alpha -= float(np.dot(g, bt + eb))
        beta += float(np.dot(g, at + ea))
    return alpha, beta


def _trace_potential(state: ResolventState, nu: PointConfig, cutoff: float) -> float:
    sigma = state.sigma
    s = state.s
    dbx = _Darboux(state, nu) if nu.m else None
    lo_s, hi_s = state.scheme.truncation
    right = max(hi_s, 16.0 - s, (nu.array.max() + 2.0) if nu.m else -np.inf)
    left = -float(cutoff)
    breaks = {left, right}
    breaks.update(v for v in (lo_s, hi_s) if left < v < right)
    for a, b in state.scheme.panels:
        breaks.update(v for v in (a, b) if left < v < right)
    breaks.update(xi for xi, _ in sigma.jumps if left < xi < right)
    breaks.update(v for v in nu.nu if left < v < right)
    breaks = sorted(breaks)
    lam, w = _trace_rule(s, breaks)

    if dbx is None:
        phi = wavefunction_values(state, lam)[0]
    else:
        phi = dbx.wave(lam)
    weight = -sigma.smooth_prime(lam)
    if nu.m:
        om = sigma.one_minus(lam)
        weight = weight + 2.0 * om * np.sum(1.0 / (lam[:, None] - nu.array[None, :]), axis=1)
    total = float(np.sum(w * phi * phi * weight))

    if sigma.jumps:
        xi = np.array([j[0] for j in sigma.jumps])
        delta = np.array([j[1] for j in sigma.jumps])
        pj = dbx.wave(xi) if dbx is not None else wavefunction_values(state, xi)[0]
        total -= float(np.sum(delta * pj * pj))

    if nu.m:
        # integral over (-inf, -U] of the mean of the oscillating integrand
        alpha, beta = _far_moments(state, dbx)
        m = nu.m
        c = 0.5 * s - 2.0 * alpha + beta * beta
        U = float(cutoff)
        mean = 2.0 * m / math.sqrt(U) + (2.0 / 3.0) * (m * c - nu.array.sum()) / U**1.5
        # boundary term of the oscillating part sin(2 zeta) / (2 pi sqrt(x)) of Ai(-x)^2
        zeta = (2.0 / 3.0) * (U - s) ** 1.5
        osc = 0.5 * m * math.cos(2.0 * zeta) / U**2
        total -= (mean + osc) / math.pi
    return float(total)


def modified_potential(state: ResolventState, nu, method: str = "darboux", cutoff: float = TRACE_CUTOFF) -> float:
    """v(s | nu) = d_s^2 log j(s | nu).

    ``method="darboux"`` uses v(s) - (phi^T L^{-1} phi)^2 - 2 (d_s phi)^T L^{-1} phi;
    ``method="trace"`` evaluates the modified trace formula with far-left
    cutoff ``cutoff`` (double-precision states only).
    """
    nu = as_points(nu)
    if method == "trace":
        return _trace_potential(state, nu, cutoff)
    if method != "darboux":
        raise ValueError(f"unknown method {method!r}")
    v = potential(state).v
    if nu.m == 0:
        return v
    dbx = _Darboux(state, nu)
    p = float(np.dot(dbx.phi, dbx.gamma))
    return float(v - p * p - 2.0 * np.dot(dbx.dphi, dbx.gamma))


def modified_stark_residual(state: ResolventState, nu, lam: float, h: float = STENCIL_H2) -> float:
    """|d_s^2 phi(lam | nu) - (lam + s - 2 v(s | nu)) phi(lam | nu)| by Richardson stencils."""
    nu = as_points(nu)
    cache = {}

    def at(k):
        if k not in cache:
            st = state if k == 0 else state.rebuild(state.s + k * h / 2)
            cache[k] = modified_wavefunction(st, nu, float(lam))
        return cache[k]

    coarse = np.array([at(2 * k) for k in (-2, -1, 0, 1, 2)])
    fine = np.array([at(k) for k in (-2, -1, 0, 1, 2)])
    d2 = _fd.richardson(_fd.derivative(coarse, h, 2), _fd.derivative(fine, h / 2, 2))
    v = modified_potential(state, nu)
    return float(abs(d2 - (lam + state.s - 2.0 * v) * at(0)))
