"""Invariant suites driven by ``airythin verify``.

Each suite returns a list of :class:`Check` records comparing a measured
residual against its tolerance.  Randomized checks draw from a seeded
generator so repeated runs are identical.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import _fd
from .ckdv import Regime, asymptote, bilinear_residual, ckdv_residual, evaluate
from .darboux import janossy, janossy_via_palm, modified_potential, modified_stark_residual, modified_wavefunction
from .fredholm import build_resolvent, build_scheme
from .kernels import PointConfig, as_points
from .stark import idpii_residual, potential, wavefunction_values
from .thinning import SigmaModel, fermi

__all__ = ["Suite", "Check", "run_suite", "SUITES"]


class Suite(str, Enum):
    FACTORIZATIONS = "factorizations"
    STARK = "stark"
    DARBOUX = "darboux"
    PDE = "pde"
    ASYMPTOTICS = "asymptotics"
    ALL = "all"


class Check(NamedTuple):
    name: str
    value: float
    tol: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} (tol {self.tol:.1e})"


def _check(name: str, value: float, tol: float) -> Check:
    value = float(value)
    return Check(name, value, tol, bool(np.isfinite(value) and value < tol))


def _random_points(rng, m: int, lo: float = -3.0, hi: float = 3.0, sep: float = 0.3) -> PointConfig:
    while True:
        pts = np.sort(rng.uniform(lo, hi, m))
        if m < 2 or np.min(np.diff(pts)) > sep:
            return PointConfig(tuple(pts))


def _suite_factorizations(sigma: SigmaModel, nu: PointConfig, rng, n: int) -> list[Check]:
    worst = 0.0
    for _ in range(10):
        s = rng.uniform(-3.0, 3.0)
        pts = nu if nu.m else _random_points(rng, int(rng.integers(1, 4)))
        scheme = build_scheme(s, sigma, n)
        a = janossy(build_resolvent(s, sigma, scheme), pts)
        b = janossy_via_palm(s, sigma, scheme, pts)
        worst = max(worst, abs(a.log_value - b.log_value))
    gaps = [build_resolvent(s, sigma, n=n).gap for s in (-2.0, 0.0, 2.0)]
    bound = 0.0 if all(0.0 < g <= 1.0 for g in gaps) else 1.0
    return [
        _check("janossy vs palm factorization (rel)", worst, 1e-7),
        _check("gap probability in (0, 1]", bound, 0.5),
    ]


def _suite_stark(sigma: SigmaModel, nu: PointConfig, rng, n: int) -> list[Check]:
    s, h = 0.3, 1e-2
    st = build_resolvent(s, sigma, n=n)
    logs = np.array([st.rebuild(s + k * h).log_det for k in (-2, -1, 0, 1, 2)])
    fd_v = -_fd.derivative(logs, h, 2)
    fd_q = -_fd.derivative(logs, h, 1)
    lam = np.array([-1.0, 0.5, 2.0])
    _, d_an = wavefunction_values(st, lam)
    _, d_st = wavefunction_values(st, lam, method="stencil")
    idpii = max(idpii_residual(build_resolvent(rng.uniform(-2, 2), sigma, n=n), rng.uniform(-2, 2)) for _ in range(5))
    return [
        _check("potential vs d^2/ds^2 log gap", abs(potential(st).v + fd_v), 1e-5),
        _check("dlog_gap vs d/ds log gap", abs(-st.dlog_gap - fd_q), 1e-6),
        _check("analytic vs stencil d_s phi", np.max(np.abs(d_an - d_st)), 1e-6),
        _check("integro-differential Painleve II", idpii, 1e-4),
    ]


def _suite_darboux(sigma: SigmaModel, nu: PointConfig, rng, n: int) -> list[Check]:
    pts = nu if nu.m else PointConfig((-0.5, 0.8))
    s, h = 0.2, 1e-2
    st = build_resolvent(s, sigma, n=n)
    phi = modified_wavefunction(st, pts, pts.array)
    free = np.abs(wavefunction_values(st, pts.array)[0]).max()
    logs = np.array([janossy(st.rebuild(s + k * h), pts).log_value for k in (-2, -1, 0, 1, 2)])
    v = modified_potential(st, pts)
    res = max(modified_stark_residual(st, pts, lam) for lam in (-1.3, 0.4, 1.7))
    return [
        _check("modified wavefunction vanishes at nu (rel)", np.max(np.abs(phi)) / max(free, 1e-300), 1e-9),
        _check("modified potential vs d^2/ds^2 log janossy", abs(v - _fd.derivative(logs, h, 2)), 1e-4),
        _check("modified Stark residual", res, 1e-3),
    ]


def _suite_pde(sigma: SigmaModel, nu: PointConfig, rng, n: int) -> list[Check]:
    out = []
    for X0, T0 in ((1.0, 1.0), (0.0, 2.0)):
        out.append(_check(f"cKdV residual at ({X0:g}, {T0:g})", ckdv_residual(sigma, nu, X0, T0, n=n), 1e-3))
        out.append(_check(f"bilinear residual at ({X0:g}, {T0:g})", bilinear_residual(sigma, nu, X0, T0, n=n), 1e-3))
    return out


def _zero_spacing(x, y) -> float:
    idx = np.where(np.sign(y[:-1]) != np.sign(y[1:]))[0]
    z = x[idx] - y[idx] * (x[idx + 1] - x[idx]) / (y[idx + 1] - y[idx])
    return float(np.mean(np.diff(z))) if len(z) > 1 else math.nan


def _suite_asymptotics(sigma: SigmaModel, nu: PointConfig, rng, n: int) -> list[Check]:
    out = []
    if sigma.is_zero:
        pts = nu if nu.m == 1 else PointConfig((0.0,))
        xs = np.linspace(-80.0, -40.0, 801)
        v = np.array([evaluate(sigma, x, 1.0, pts, n).V for x in xs])
        c = np.array([asymptote(Regime.LEFT_TAIL_SOLITON_V, sigma, 1, x, 1.0, pts) for x in xs])
        sp, sc = _zero_spacing(xs, v), _zero_spacing(xs, c)
        out.append(_check("soliton zero spacing (rel)", abs(sp - sc) / sc, 0.1))
        X = 60.0
        p = evaluate(sigma, X, 1.0, pts, n)
        ref = asymptote(Regime.RIGHT_TAIL_LOG_J, sigma, 1, X, 1.0, pts)
        out.append(_check("soliton right tail log J (rel)", abs(p.log_J / ref - 1.0), 0.03))
        return out
    one = PointConfig((0.0,))
    X = 64.0
    p = evaluate(sigma, X, 1.0, one, n)
    vr = asymptote(Regime.RIGHT_TAIL_V, sigma, 1, X, 1.0, one)
    lr = asymptote(Regime.RIGHT_TAIL_LOG_J, sigma, 1, X, 1.0, one)
    out.append(_check("right tail V ratio", abs(p.V / vr - 1.0), 0.1))
    out.append(_check("right tail log J (rel)", abs(p.log_J / lr - 1.0), 0.05))
    if sigma.strong_params is not None:
        X, T = -60.0, 3.0
        empty = evaluate(sigma, X, T, (), 600, precision="high")
        out.append(_check("left tail V (rel)", abs(empty.V / asymptote(Regime.LEFT_TAIL_V, sigma, 0, X, T) - 1.0), 0.05))
        out.append(_check("left tail log J (rel)", abs(empty.log_J / asymptote(Regime.LEFT_TAIL_LOG_J, sigma, 0, X, T) - 1.0), 0.05))
    return out


SUITES: dict[Suite, Callable] = {
    Suite.FACTORIZATIONS: _suite_factorizations,
    Suite.STARK: _suite_stark,
    Suite.DARBOUX: _suite_darboux,
    Suite.PDE: _suite_pde,
    Suite.ASYMPTOTICS: _suite_asymptotics,
}


def run_suite(suite, sigma: Optional[SigmaModel] = None, nu=(), seed: int = 0, n: int = 200) -> list[Check]:
    """Run one suite (or all of them) and return the checks in a fixed order."""
    suite = Suite(suite)
    sigma = fermi() if sigma is None else sigma
    nu = as_points(nu)
    names = [s for s in SUITES] if suite is Suite.ALL else [suite]
    out = []
    for name in names:
        rng = np.random.default_rng(seed)
        out.extend(SUITES[name](sigma, nu, rng, n))
    return out
