"""The (X, T) picture: Janossy tau functions and cylindrical KdV solutions.

With sigma_T(x) = sigma(T^{1/3} x), s = X T^{-1/3} and nu_T = T^{-1/3} nu,

    J(X, T | nu) = T^{-m/3} j_{sigma_T}(s | nu_T),
    V(X, T | nu) = T^{-2/3} v_{sigma_T}(s | nu_T),

and V solves dV/dT + V_XXX/12 + V V_X + V/(2T) = 0.  This module also holds
the closed-form tail comparators used to check the numerics.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from . import _fd
from .darboux import janossy, modified_potential
from .errors import ConfigurationError, RegimeViolation
from .fredholm import DEFAULT_NODES, DEFAULT_PREC, build_resolvent, build_scheme
from .kernels import KernelSurface, PointConfig, as_points, log_det_kernel
from .specfun import airy
from .stark import potential
from .thinning import SigmaKind, SigmaModel, indicator, rescale

__all__ = [
    "CkdvPoint",
    "AsymptoteParams",
    "Regime",
    "evaluate",
    "soliton_tau",
    "log_soliton_tau",
    "ckdv_residual",
    "bilinear_residual",
    "asymptote",
    "tracy_widom",
    "default_asymptotes",
]


class CkdvPoint(NamedTuple):
    X: float
    T: float
    nu: PointConfig
    J: float
    log_J: float
    V: float
    gap: float
    corr_det: float


class AsymptoteParams(NamedTuple):
    rho: float
    xi: float

    @classmethod
    def from_sigma(cls, sigma: SigmaModel, X: float, T: float) -> "AsymptoteParams":
        if sigma is None or sigma.strong_params is None:
            raise RegimeViolation("left-tail comparators need a sigma with strong tail parameters")
        rho = sigma.strong_params.c_plus ** 2 / math.pi**2
        return cls(rho, X / (rho * T))


class Regime(str, Enum):
    RIGHT_TAIL_LOG_J = "right_tail_log_j"
    RIGHT_TAIL_V = "right_tail_v"
    LEFT_TAIL_SOLITON_V = "left_tail_soliton_v"
    LEFT_TAIL_LOG_J = "left_tail_log_j"
    LEFT_TAIL_V = "left_tail_v"
    INTERMEDIATE_TW_LOG_J = "intermediate_tw_log_j"
    INTERMEDIATE_TW_V = "intermediate_tw_v"
    TW_LEFT_V = "tw_left_v"
    TW_RIGHT_V = "tw_right_v"


def evaluate(
    sigma: SigmaModel,
    X: float,
    T: float,
    nu=(),
    n: int = DEFAULT_NODES,
    precision: str = "double",
    prec: int = DEFAULT_PREC,
    method: str = "darboux",
) -> CkdvPoint:
    """J(X, T | nu) and V(X, T | nu) through the reduction to T = 1."""
    X, T = float(X), float(T)
    if not (math.isfinite(X) and math.isfinite(T)):
        raise ConfigurationError("X and T must be finite")
    if T <= 0:
        raise ConfigurationError(f"T must be positive, got {T!r}")
    nu = as_points(nu)
    c = T ** (-1.0 / 3.0) if T != 1.0 else 1.0
    sig_t = rescale(sigma, T)
    s = X * c
    nu_t = nu.scaled(c) if c != 1.0 else nu
    state = build_resolvent(s, sig_t, build_scheme(s, sig_t, n), precision=precision, prec=prec)
    jr = janossy(state, nu_t)
    log_J = jr.log_value - (nu.m / 3.0) * math.log(T)
    V = c * c * modified_potential(state, nu_t, method=method)
    return CkdvPoint(X, T, nu, math.exp(log_J), log_J, V, jr.gap, jr.corr_det * T ** (-nu.m / 3.0))


def log_soliton_tau(X: float, T: float, nu) -> float:
    """log det K_{X,T}(nu_i, nu_j)."""
    nu = as_points(nu)
    if nu.m == 0:
        raise ConfigurationError("soliton tau function needs at least one point")
    sign, logdet = log_det_kernel(KernelSurface.shifted_dilated(X, T), nu)
    if sign <= 0:
        raise ConfigurationError("kernel determinant is not positive")
    return logdet


def soliton_tau(X: float, T: float, nu, log: bool = False) -> float:
    """J_0(X, T | nu) = det K_{X,T}(nu, nu) (or its logarithm)."""
    value = log_soliton_tau(X, T, nu)
    return value if log else math.exp(value)


def _grid_values(fn, X0, T0, hX, hT, offsets):
    return {(k, l): fn(X0 + k * hX, T0 + l * hT) for k, l in offsets}


def ckdv_residual(
    sigma: SigmaModel,
    nu,
    X0: float,
    T0: float,
    hX: float = 0.05,
    hT: Optional[float] = None,
    n: int = DEFAULT_NODES,
    precision: str = "double",
) -> float:
    """|V_T + V_XXX/12 + V V_X + V/(2T)| at (X0, T0) from stencils of V.

    V is sampled on the 7 x 5 stencil of spacing (hX, hT) (only the centre
    row and column are needed); all differences are fourth order.
    """
    hT = hX * T0 / 5.0 if hT is None else hT
    if T0 - 2 * hT <= 0:
        raise ConfigurationError("stencil leaves the half-plane T > 0")
    if sigma.is_zero and not as_points(nu).m:
        return 0.0
    offsets = [(k, 0) for k in range(-3, 4)] + [(0, l) for l in (-2, -1, 1, 2)]
    vals = _grid_values(lambda x, t: evaluate(sigma, x, t, nu, n, precision).V, X0, T0, hX, hT, offsets)
    row = np.array([vals[(k, 0)] for k in range(-3, 4)])
    col = np.array([vals[(0, l)] for l in range(-2, 3)])
    v = row[3]
    vx = _fd.derivative(row[1:-1], hX, 1)
    vxxx = _fd.derivative(row, hX, 3)
    vt = _fd.derivative(col, hT, 1)
    return float(abs(vt + vxxx / 12.0 + v * vx + v / (2.0 * T0)))


def bilinear_residual(
    sigma: SigmaModel,
    nu,
    X0: float,
    T0: float,
    hX: float = 0.05,
    hT: Optional[float] = None,
    n: int = DEFAULT_NODES,
    precision: str = "double",
) -> float:
    """Normalized residual of the bilinear equation for J at (X0, T0).

    J is divided by its value at the stencil centre first; the expression is
    homogeneous of degree two, so this only rescales the residual by J_c^2.
    """
    hT = hX * T0 / 5.0 if hT is None else hT
    if T0 - 2 * hT <= 0:
        raise ConfigurationError("stencil leaves the half-plane T > 0")
    if sigma.is_zero and not as_points(nu).m:
        return 0.0
    offsets = set((k, 0) for k in range(-3, 4)) | set((k, l) for k in range(-2, 3) for l in range(-2, 3))
    logs = _grid_values(lambda x, t: evaluate(sigma, x, t, nu, n, precision).log_J, X0, T0, hX, hT, sorted(offsets))
    ref = logs[(0, 0)]
    J = {key: math.exp(val - ref) for key, val in logs.items()}
    row = np.array([J[(k, 0)] for k in range(-3, 4)])
    grid = np.array([[J[(k, l)] for l in range(-2, 3)] for k in range(-2, 3)])
    j = row[3]
    jx = _fd.derivative(row[1:-1], hX, 1)
    jxx = _fd.derivative(row[1:-1], hX, 2)
    jxxx = _fd.derivative(row, hX, 3)
    jxxxx = _fd.derivative(row, hX, 4)
    jt = _fd.derivative(grid[2, :], hT, 1)
    jxt = _fd.derivative(_fd.derivative(grid, hX, 1, axis=0), hT, 1)
    expr = jx * jt - j * jxt - 0.25 * jxx**2 + jx * jxxx / 3.0 - j * jxxxx / 12.0 - j * jx / (2.0 * T0)
    return float(abs(expr))


# ----------------------------------------------------------------------
# asymptotic comparators


def tracy_widom(s: float, n: int = DEFAULT_NODES) -> tuple[float, float]:
    """(log F_TW(s), y_HM(s)^2) from the half-line indicator at T = 1."""
    st = build_resolvent(s, indicator(0.0), n=n)
    return st.log_det, -potential(st).v


def asymptote(regime, sigma: Optional[SigmaModel], m: int, X: float, T: float, nu=()) -> float:
    """Closed-form comparator for the requested regime.

    ``*_LOG_J`` regimes return the comparator of log J; the others return a
    comparator of V.  The Tracy-Widom regimes evaluate F_TW and y_HM with the
    indicator Fredholm determinant of this package.
    """
    regime = Regime(regime)
    X, T = float(X), float(T)
    if T <= 0:
        raise RegimeViolation("T must be positive")
    nu = as_points(nu)
    if nu.m and nu.m != m:
        raise RegimeViolation(f"m={m} but {nu.m} points were given")
    if regime in (Regime.RIGHT_TAIL_LOG_J, Regime.RIGHT_TAIL_V):
        if X <= 0:
            raise RegimeViolation("right-tail comparators need X > 0")
        if regime is Regime.RIGHT_TAIL_V:
            return -m / math.sqrt(X * T)
        return -m * math.log(8.0 * math.pi * X) - (4.0 * m / 3.0) * X**1.5 / math.sqrt(T)
    if regime is Regime.LEFT_TAIL_SOLITON_V:
        if X >= 0 or nu.m == 0:
            raise RegimeViolation("soliton left tail needs X < 0 and at least one point")
        a = abs(X)
        if any(a - v <= 0 for v in nu):
            raise RegimeViolation("soliton left tail needs |X| > nu")
        return sum(math.cos(4.0 / (3.0 * math.sqrt(T)) * (a - v) ** 1.5) for v in nu) / math.sqrt(T * a)
    if regime in (Regime.LEFT_TAIL_LOG_J, Regime.LEFT_TAIL_V):
        if X >= 0:
            raise RegimeViolation("left-tail comparators need X < 0")
        rho, xi = AsymptoteParams.from_sigma(sigma, X, T)
        if xi >= 1:
            raise RegimeViolation("left-tail comparators need xi < 1")
        r = math.sqrt(1.0 - xi)
        a = abs(X)
        if regime is Regime.LEFT_TAIL_V:
            base = rho * (1.0 - r)
            osc = sum(math.cos(4.0 * a**1.5 / (3.0 * math.sqrt(T)) - 2.0 * math.sqrt(a) * v / math.sqrt(T)) for v in nu)
            return base + osc / math.sqrt(a * T)
        bulk = rho**3 * T**2 * (-(4.0 / 15.0) * r**5 + 4.0 / 15.0 - (2.0 / 3.0) * xi + 0.5 * xi * xi)
        if nu.m:
            om = sigma.one_minus(nu.array)
            bulk += 0.5 * m * math.log(a) - m * math.log(math.pi) - 0.5 * m * math.log(T) - float(np.log(om).sum())
        return bulk
    s = X * T ** (-1.0 / 3.0)
    if regime is Regime.TW_LEFT_V:
        if X >= 0:
            raise RegimeViolation("left ramp needs X < 0")
        return 0.5 * X / T
    if regime is Regime.TW_RIGHT_V:
        if X <= 0:
            raise RegimeViolation("right decay needs X > 0")
        return -(T ** (-2.0 / 3.0)) * airy(s).ai ** 2
    log_f, y2 = tracy_widom(s)
    if regime is Regime.INTERMEDIATE_TW_LOG_J:
        return log_f
    return -(T ** (-2.0 / 3.0)) * y2


def default_asymptotes(sigma: SigmaModel, X: float, T: float, nu=()) -> tuple[Optional[float], Optional[float]]:
    """(right, left) V comparators appropriate for the model, or None when not applicable."""
    nu = as_points(nu)
    m = nu.m
    right = left = None
    if sigma.kind is SigmaKind.INDICATOR and m == 0:
        shift = sigma.threshold
        Xe = X + shift
        if Xe > 0:
            right = asymptote(Regime.TW_RIGHT_V, sigma, 0, Xe, T)
        elif Xe < 0:
            left = asymptote(Regime.TW_LEFT_V, sigma, 0, Xe, T)
        return right, left
    if X > 0:
        right = asymptote(Regime.RIGHT_TAIL_V, sigma, m, X, T, nu)
    elif X < 0:
        if sigma.is_zero:
            if m and all(abs(X) > v for v in nu):
                left = asymptote(Regime.LEFT_TAIL_SOLITON_V, sigma, m, X, T, nu)
            elif m == 0:
                left = 0.0
        elif sigma.strong_params is not None:
            left = asymptote(Regime.LEFT_TAIL_V, sigma, m, X, T, nu)
    return right, left
