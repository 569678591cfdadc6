"""The Airy kernel family, kernel matrices and the Palm kernel.

    K(x, y) = (Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y),
    K(x, x) = Ai'(x)^2 - x Ai(x)^2.

A :class:`KernelSurface` applies the affine change of variables
``x = c (lam + X)`` with ``c = T^{-1/3}`` and multiplies by ``c``; ``X = s,
T = 1`` is the shifted kernel and ``X = 0, T = 1`` the plain one.

Everything is computed from exponentially scaled Airy values, returning a
mantissa ``Kt`` and exponents so that ``K(x, y) = exp(-z(x) - z(y)) Kt``.  This
keeps products at large positive arguments representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
import scipy.linalg as sla

from .errors import ConfigurationError, IllConditioned
from .specfun import airy_arrays, airy_zeta

__all__ = [
    "DELTA_DIAG",
    "MAX_COND",
    "KernelSurface",
    "PointConfig",
    "as_points",
    "airy_kernel",
    "airy_kernel_scaled",
    "kernel_eval",
    "kernel_matrix",
    "kernel_matrix_scaled",
    "palm_kernel",
    "palm_kernel_matrix",
    "log_det_kernel",
    "spd_solve",
]

DELTA_DIAG = 1e-4
MAX_COND = 1e12
MIN_GAP = 1e-9


@dataclass(frozen=True)
class KernelSurface:
    """K_{X,T}(lam, mu) = T^{-1/3} K(T^{-1/3}(lam + X), T^{-1/3}(mu + X))."""

    X: float = 0.0
    T: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.X) and math.isfinite(self.T) and self.T > 0):
            raise ConfigurationError("kernel surface needs finite X and T > 0")

    @classmethod
    def plain(cls) -> "KernelSurface":
        return cls(0.0, 1.0)

    @classmethod
    def shifted(cls, s: float) -> "KernelSurface":
        return cls(float(s), 1.0)

    @classmethod
    def shifted_dilated(cls, X: float, T: float) -> "KernelSurface":
        return cls(float(X), float(T))

    @property
    def variant(self) -> str:
        if self.T != 1.0:
            return "shifted_dilated"
        return "plain" if self.X == 0.0 else "shifted"

    @property
    def scale(self) -> float:
        return 1.0 if self.T == 1.0 else self.T ** (-1.0 / 3.0)

    def argument(self, lam) -> np.ndarray:
        """Airy argument c (lam + X) for the points lam."""
        lam = np.asarray(lam, dtype=float)
        c = self.scale
        return lam + self.X if c == 1.0 else c * (lam + self.X)


@dataclass(frozen=True)
class PointConfig:
    """Distinct conditioning points nu_1 < ... < nu_m (stored sorted)."""

    nu: tuple = ()

    def __post_init__(self):
        vals = tuple(sorted(float(v) for v in self.nu))
        if not all(math.isfinite(v) for v in vals):
            raise ConfigurationError("conditioning points must be finite")
        if any(b - a <= MIN_GAP for a, b in zip(vals, vals[1:])):
            raise ConfigurationError(f"conditioning points must be distinct (min gap > {MIN_GAP:g})")
        object.__setattr__(self, "nu", vals)

    @property
    def m(self) -> int:
        return len(self.nu)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.nu, dtype=float)

    def scaled(self, factor: float) -> "PointConfig":
        return PointConfig(tuple(factor * v for v in self.nu))

    def __len__(self):
        return len(self.nu)

    def __iter__(self):
        return iter(self.nu)


def as_points(nu: Union[PointConfig, Iterable[float], None]) -> PointConfig:
    if nu is None:
        return PointConfig(())
    if isinstance(nu, PointConfig):
        return nu
    if np.ndim(nu) == 0:
        return PointConfig((float(nu),))
    return PointConfig(tuple(nu))


def _coords(u) -> np.ndarray:
    if isinstance(u, PointConfig):
        return u.array
    return np.atleast_1d(np.asarray(u, dtype=float))


def airy_kernel_scaled(x, y, airy_x=None, airy_y=None) -> tuple[np.ndarray, np.ndarray]:
    """Mantissa and exponent of K(x, y) on Airy arguments (broadcasting).

    Returns ``(Kt, e)`` with ``K = exp(-e) * Kt``.  ``airy_x``/``airy_y`` may
    pass precomputed scaled ``(Ai, Ai')`` pairs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ax, bx = airy_x if airy_x is not None else airy_arrays(x, scaled=True)
    ay, by = airy_y if airy_y is not None else airy_arrays(y, scaled=True)
    x, y, ax, bx, ay, by = np.broadcast_arrays(x, y, ax, bx, ay, by)
    d = x - y
    e = airy_zeta(x) + airy_zeta(y)
    near = np.abs(d) < DELTA_DIAG
    with np.errstate(divide="ignore", invalid="ignore"):
        kt = (ax * by - bx * ay) / d
    if near.any():
        xm = 0.5 * (x[near] + y[near])
        h = 0.5 * d[near]
        am, bm = airy_arrays(xm, scaled=True)
        # K(m+h, m-h) = K(m,m) + h^2 (Ai Ai' + 2m Ai'^2 - 2m^2 Ai^2)/3 + O(h^4)
        diag = bm * bm - xm * am * am
        corr = (am * bm + 2.0 * xm * bm * bm - 2.0 * xm * xm * am * am) / 3.0
        shift = np.exp(2.0 * airy_zeta(xm) - e[near])
        kt = np.array(kt, copy=True)
        kt[near] = (diag + h * h * corr) / shift
    return kt, e


def airy_kernel(x, y) -> np.ndarray:
    """Unscaled Airy kernel on Airy arguments (underflows to 0 far right)."""
    kt, e = airy_kernel_scaled(x, y)
    return kt * np.exp(-e)


def kernel_matrix_scaled(k: KernelSurface, u, w) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scaled matrix: K_k(u_i, w_j) = exp(-eu_i - ew_j) * Kt_ij.

    The surface prefactor T^{-1/3} is folded into ``Kt``.
    """
    u, w = _coords(u), _coords(w)
    xu, xw = k.argument(u), k.argument(w)
    kt, _ = airy_kernel_scaled(xu[:, None], xw[None, :])
    return k.scale * kt, airy_zeta(xu), airy_zeta(xw)


def kernel_eval(k: KernelSurface, lam: float, mu: float) -> float:
    """K_k(lam, mu) for scalar arguments."""
    kt, e = airy_kernel_scaled(k.argument(lam), k.argument(mu))
    return float(k.scale * kt * np.exp(-e))


def kernel_matrix(k: KernelSurface, u, w) -> np.ndarray:
    """Matrix (K_k(u_i, w_j)) for two point configurations."""
    kt, eu, ew = kernel_matrix_scaled(k, u, w)
    return kt * np.exp(-eu[:, None] - ew[None, :])


def spd_solve(a: np.ndarray, b: np.ndarray, check_cond: bool = True) -> np.ndarray:
    """Solve a x = b for symmetric positive-definite a.

    Cholesky first; an LU factorization with partial pivoting is the fallback.
    """
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros_like(np.asarray(b, dtype=float))
    if check_cond:
        cond = np.linalg.cond(a)
        if not np.isfinite(cond) or cond > MAX_COND:
            raise IllConditioned(f"matrix condition number {cond:.3g} exceeds {MAX_COND:g}")
    try:
        return sla.cho_solve(sla.cho_factor(a, lower=True), b)
    except np.linalg.LinAlgError:
        return sla.lu_solve(sla.lu_factor(a), b)


def palm_kernel_matrix(k: KernelSurface, lam, mu, cond) -> np.ndarray:
    """Matrix of the Palm kernel H(lam_i, mu_j) = K - K(., nu) K(nu, nu)^{-1} K(nu, .)."""
    cond = as_points(cond)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    kt, el, em = kernel_matrix_scaled(k, lam, mu)
    if cond.m:
        nu = cond.array
        knn, _, _ = kernel_matrix_scaled(k, nu, nu)
        kln, _, _ = kernel_matrix_scaled(k, lam, nu)
        knm, _, _ = kernel_matrix_scaled(k, nu, mu)
        # the exponents of nu cancel between K(., nu), K(nu, nu)^{-1} and K(nu, .)
        kt = kt - kln @ spd_solve(knn, knm)
    return kt * np.exp(-el[:, None] - em[None, :])


def palm_kernel(k: KernelSurface, lam: float, mu: float, cond) -> float:
    """Reduced Palm kernel at a single pair of points."""
    return float(palm_kernel_matrix(k, [lam], [mu], cond)[0, 0])


def log_det_kernel(k: KernelSurface, nu) -> tuple[float, float]:
    """(sign, log|det K_k(nu, nu)|) computed from the scaled matrix."""
    nu = as_points(nu)
    if nu.m == 0:
        return 1.0, 0.0
    kt, e, _ = kernel_matrix_scaled(k, nu.array, nu.array)
    sign, logdet = np.linalg.slogdet(kt)
    return float(sign), float(logdet - 2.0 * e.sum())
