"""Real-argument Airy function Ai and its derivative in double precision.

Three evaluation regions are used:

* ``x >= 9``: the large-argument asymptotic series in zeta = (2/3) x^{3/2}.
* ``x <= -10``: the oscillatory asymptotic form with sine/cosine phases.
* in between: local Taylor expansions of the Airy ODE ``y'' = x y`` about
  checkpoints spaced 0.5 apart.  Checkpoint values are produced once at import
  by stepping the ODE, backward from the positive asymptotic region (the
  stable direction for the recessive solution) and forward from the exact
  values at the origin towards the negative region.

The scaled variant returns ``exp(zeta) * Ai(x)`` for ``x > 0`` so that products
of kernels at large positive arguments can be recombined in log space.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DomainError

__all__ = [
    "AiryValue",
    "AI0",
    "AIP0",
    "airy",
    "airy_arrays",
    "airy_zeta",
    "first_zero",
]

# Ai(0) = 3^{-2/3}/Gamma(2/3), Ai'(0) = -3^{-1/3}/Gamma(1/3)
AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)

_X_POS = 9.0
_X_NEG = -10.0
_STEP = 0.5
_N_ASYM = 20
_N_TAYLOR = 32
_N_STEP_TERMS = 48


class AiryValue(NamedTuple):
    """Ai(x) and Ai'(x); when ``scaled`` both carry exp(+(2/3)x^{3/2}) for x > 0."""

    ai: float
    ai_prime: float
    scaled: bool


def _asym_coefficients(n: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.empty(n)
    v = np.empty(n)
    u[0] = v[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v[k] = -u[k] * (6 * k + 1) / (6 * k - 1)
    return u, v


_U, _V = _asym_coefficients(2 * _N_ASYM)


def _series(coef: np.ndarray, t: np.ndarray, alternate: bool) -> np.ndarray:
    """Sum coef[k] (+-t)^k, stopping per element once terms stop decreasing."""
    total = np.full_like(t, coef[0])
    prev = np.full_like(t, np.inf)
    active = np.ones(t.shape, dtype=bool)
    power = np.ones_like(t)
    sign = -1.0 if alternate else 1.0
    for k in range(1, len(coef)):
        power = power * (sign * t)
        term = coef[k] * power
        mag = np.abs(term)
        active &= mag < prev
        total = np.where(active, total + term, total)
        prev = mag
        if not active.any():
            break
    return total


def _asym_positive(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """exp(zeta)*Ai and exp(zeta)*Ai' for large positive x."""
    zeta = (2.0 / 3.0) * x * np.sqrt(x)
    t = 1.0 / zeta
    su = _series(_U[:_N_ASYM], t, alternate=True)
    sv = _series(_V[:_N_ASYM], t, alternate=True)
    x4 = x**0.25
    pref = 0.5 / math.sqrt(math.pi)
    return pref * su / x4, -pref * x4 * sv


def _asym_negative(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = -x
    zeta = (2.0 / 3.0) * y * np.sqrt(y)
    t2 = 1.0 / (zeta * zeta)
    ue = _series(_U[0 : 2 * _N_ASYM : 2], t2, alternate=True)
    uo = _series(_U[1 : 2 * _N_ASYM : 2], t2, alternate=True) / zeta
    ve = _series(_V[0 : 2 * _N_ASYM : 2], t2, alternate=True)
    vo = _series(_V[1 : 2 * _N_ASYM : 2], t2, alternate=True) / zeta
    phase = zeta - 0.25 * math.pi
    c, s = np.cos(phase), np.sin(phase)
    y4 = y**0.25
    rpi = 1.0 / math.sqrt(math.pi)
    ai = rpi / y4 * (c * ue + s * uo)
    aip = rpi * y4 * (s * ve - c * vo)
    return ai, aip


def _taylor(x0, y0, d0, h, nterms):
    """Taylor expansion of y'' = x y about x0, returning y(x0+h), y'(x0+h)."""
    a_km1 = np.zeros_like(h)  # a_{k-1}
    a_k = d0 * np.ones_like(h)  # a_1
    a_km2 = y0 * np.ones_like(h)  # a_0
    val = a_km2 + a_k * h
    der = a_k.copy()
    hp = h.copy()  # h^{k-1} for the derivative, k = 2
    hk = h * h  # h^k
    # a_{k} = (x0 a_{k-2} + a_{k-3}) / (k (k-1))
    prev3 = a_km1
    prev2 = a_km2
    prev1 = a_k
    for k in range(2, nterms):
        ak = (x0 * prev2 + prev3) / (k * (k - 1))
        val = val + ak * hk
        der = der + k * ak * hp
        hp = hp * h
        hk = hk * h
        prev3, prev2, prev1 = prev2, prev1, ak
    return val, der


def _build_checkpoints() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n_pos = int(round(_X_POS / _STEP))
    n_neg = int(round(-_X_NEG / _STEP))
    grid = _STEP * np.arange(-n_neg, n_pos + 1)
    ai = np.empty(grid.size)
    aip = np.empty(grid.size)
    zero = n_neg
    # backward from the positive asymptotic region
    sa, sd = _asym_positive(np.array([_X_POS]))
    e = math.exp(-(2.0 / 3.0) * _X_POS**1.5)
    y, d = sa[0] * e, sd[0] * e
    ai[-1], aip[-1] = y, d
    for i in range(grid.size - 1, zero + 1, -1):
        yn, dn = _taylor(grid[i], y, d, np.array([-_STEP]), _N_STEP_TERMS)
        y, d = float(yn[0]), float(dn[0])
        ai[i - 1], aip[i - 1] = y, d
    ai[zero], aip[zero] = AI0, AIP0
    y, d = AI0, AIP0
    for i in range(zero, 0, -1):
        yn, dn = _taylor(grid[i], y, d, np.array([-_STEP]), _N_STEP_TERMS)
        y, d = float(yn[0]), float(dn[0])
        ai[i - 1], aip[i - 1] = y, d
    return grid, ai, aip


_GRID, _GRID_AI, _GRID_AIP = _build_checkpoints()
for _arr in (_GRID, _GRID_AI, _GRID_AIP):
    _arr.setflags(write=False)


def airy_zeta(x) -> np.ndarray:
    """Scaling exponent (2/3) x^{3/2} for x > 0 and 0 otherwise."""
    x = np.asarray(x, dtype=float)
    xp = np.maximum(x, 0.0)
    return (2.0 / 3.0) * xp * np.sqrt(xp)


def airy_arrays(x, scaled: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``(Ai(x), Ai'(x))``.

    Parameters
    ----------
    x : array_like
        Finite real arguments.
    scaled : bool
        If true, values for x > 0 are multiplied by exp((2/3) x^{3/2}).
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("Airy function requires finite arguments")
    shape = x.shape
    x = x.ravel()
    ai = np.empty_like(x)
    aip = np.empty_like(x)

    pos = x >= _X_POS
    if pos.any():
        sa, sd = _asym_positive(x[pos])
        if not scaled:
            e = np.exp(-airy_zeta(x[pos]))
            sa, sd = sa * e, sd * e
        ai[pos], aip[pos] = sa, sd

    neg = x <= _X_NEG
    if neg.any():
        ai[neg], aip[neg] = _asym_negative(x[neg])

    mid = ~(pos | neg)
    if mid.any():
        xm = x[mid]
        idx = np.clip(np.rint((xm - _GRID[0]) / _STEP).astype(int), 0, _GRID.size - 1)
        x0 = _GRID[idx]
        va, vd = _taylor(x0, _GRID_AI[idx], _GRID_AIP[idx], xm - x0, _N_TAYLOR)
        if scaled:
            e = np.exp(airy_zeta(xm))
            va, vd = va * e, vd * e
        ai[mid], aip[mid] = va, vd

    return ai.reshape(shape), aip.reshape(shape)


def airy(x: float, scaled: bool = False) -> AiryValue:
    """Evaluate Ai and Ai' at a single real point.

    >>> round(airy(0.0).ai, 10)
    0.3550280539
    """
    if not math.isfinite(x):
        raise DomainError(f"Airy function requires a finite argument, got {x!r}")
    a, b = airy_arrays(np.array([x]), scaled=scaled)
    return AiryValue(float(a[0]), float(b[0]), bool(scaled))


def first_zero() -> float:
    """Largest zero of Ai, located by bisection on this module's evaluator."""
    lo, hi = -2.5, -2.2
    flo = airy(lo).ai
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = airy(mid).ai
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
