"""Stark wavefunction, potential and the integro-differential Painleve II.

The wavefunction is the resolvent applied to the shifted Airy function,
phi(lam; s) = ((1 - K_s M_sigma)^{-1} Ai(. + s))(lam).  Writing
psi = (1 - K_s M_sigma)^{-1} Ai'(. + s) and q = <Ai_s, sigma phi>, its shift
derivative is d_s phi = psi - q phi, which follows from
d_s K_s(lam, mu) = -Ai(lam + s) Ai(mu + s).  The same q is d_s log det.

The potential is v(s) = -int phi^2 d(sigma), i.e. the smooth part plus
-sum_j Delta_j phi(xi_j; s)^2 over jumps.  For the half-line indicator this
gives v = -phi(0; s)^2 = -y_HM(s)^2.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import _fd
from .fredholm import ResolventState

__all__ = [
    "WaveSample",
    "PotentialSample",
    "wavefunction",
    "wavefunction_values",
    "potential",
    "dlog_gap",
    "idpii_residual",
    "STENCIL_H1",
    "STENCIL_H2",
]

STENCIL_H1 = 1e-3
STENCIL_H2 = 1e-2


class WaveSample(NamedTuple):
    lam: float
    s: float
    phi: float
    phi_ds: float


class PotentialSample(NamedTuple):
    s: float
    v: float


def wavefunction_values(state: ResolventState, lam, method: str = "analytic", h: float = STENCIL_H1):
    """Arrays ``(phi, d_s phi)`` at the points ``lam``.

    ``method="analytic"`` uses d_s phi = psi - q phi from the stored solves;
    ``method="stencil"`` rebuilds the state at s +- h, s +- 2h.
    """
    data = state.point_data(lam)
    scale = np.exp(-data["zeta"])
    phi = scale * data["phi"]
    if method == "analytic":
        return phi, scale * (data["psi"] - state.dlog_gap * data["phi"])
    if method == "stencil":
        vals = []
        for k in (-2, -1, 1, 2):
            other = state.rebuild(state.s + k * h)
            d = other.point_data(lam)
            vals.append(np.exp(-d["zeta"]) * d["phi"])
        samples = np.stack([vals[0], vals[1], phi, vals[2], vals[3]])
        return phi, _fd.derivative(samples, h, 1)
    raise ValueError(f"unknown method {method!r}")


def wavefunction(state: ResolventState, lam: float, method: str = "analytic", h: float = STENCIL_H1) -> WaveSample:
    """phi(lam; s) and its shift derivative at a single point."""
    phi, dphi = wavefunction_values(state, [lam], method=method, h=h)
    return WaveSample(float(lam), state.s, float(phi[0]), float(dphi[0]))


def potential(state: ResolventState) -> PotentialSample:
    """v(s) = -int phi^2 sigma_0' dx - sum_j Delta_j phi(xi_j; s)^2."""
    v = -state.smooth_trace
    jumps = state.sigma.jumps
    if jumps:
        xi = np.array([j[0] for j in jumps])
        delta = np.array([j[1] for j in jumps])
        phi, _ = wavefunction_values(state, xi)
        v -= float(np.sum(delta * phi * phi))
    return PotentialSample(state.s, float(v))


def dlog_gap(state: ResolventState) -> float:
    """d/ds log det(1 - K_s^sigma) = <Ai_s, (1 - M_sigma K_s)^{-1} M_sigma Ai_s>."""
    return state.dlog_gap


def _second_shift_derivative(state: ResolventState, fn, h: float):
    """Richardson-extrapolated 5-point second derivative in s of fn(state)."""
    cache = {0: fn(state)}

    def at(k):
        if k not in cache:
            cache[k] = fn(state.rebuild(state.s + k * h / 2))
        return cache[k]

    coarse = np.stack([at(2 * k) for k in (-2, -1, 0, 1, 2)])
    fine = np.stack([at(k) for k in (-2, -1, 0, 1, 2)])
    return _fd.richardson(_fd.derivative(coarse, h, 2), _fd.derivative(fine, h / 2, 2)), cache[0]


def idpii_residual(state: ResolventState, lam: float, h: float = STENCIL_H2) -> float:
    """|d_s^2 phi - (lam + s - 2 v) phi| at (lam, s)."""

    def phi_of(st):
        return wavefunction_values(st, [lam])[0][0]

    d2, phi = _second_shift_derivative(state, phi_of, h)
    v = potential(state).v
    return float(abs(d2 - (lam + state.s - 2.0 * v) * phi))
