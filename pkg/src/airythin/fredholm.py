"""Nystrom discretization of the thinned Airy operator.

On Gauss-Legendre nodes x_i with weights w_i put d_i = sqrt(sigma(x_i) w_i)
and S = D K_s D.  Then

* det(1 - K_s^sigma) is det(I - S), taken from a Cholesky factorization;
* the resolvent kernel is
  L(lam, mu) = K_s(lam, mu) + k_lam^T D (I - S)^{-1} D k_mu,
  with k_lam = (K_s(lam, x_j))_j;
* the resolvent applied to a function is
  ((1 - K_s M_sigma)^{-1} f)(lam) = f(lam) + k_lam^T D (I - S)^{-1} D f(x).

Two backends are available.  ``precision="double"`` uses LAPACK and carries
large-argument Airy values in exponentially scaled form.
``precision="high"`` uses python-flint ball arithmetic at ``prec`` bits; it is
needed deep in the left tail, where 1 - S has eigenvalues far below the
double-precision resolution.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import ConfigurationError, NonPositiveDeterminant, NumericalWarning, SingularOperator
from .kernels import airy_kernel_scaled
from .specfun import airy_arrays, airy_zeta
from .thinning import SigmaModel, lower_cutoff

__all__ = [
    "QuadratureScheme",
    "ResolventState",
    "build_scheme",
    "build_resolvent",
    "gap_probability",
    "log_gap_probability",
    "resolvent_kernel",
    "resolvent_kernel_matrix",
    "resolvent_apply",
    "DEFAULT_NODES",
    "DEFAULT_PREC",
]

DEFAULT_NODES = 200
DEFAULT_PREC = 160
MIN_PANEL_NODES = 8
RCOND_WARN = 1e-11
_BOUNDARY_FUZZ = 1e-12


# ----------------------------------------------------------------------
# quadrature


@dataclass(frozen=True, eq=False)
class QuadratureScheme:
    """Composite Gauss-Legendre rule on the truncated domain (lo, hi)."""

    nodes: np.ndarray
    weights: np.ndarray
    panels: tuple
    counts: tuple
    truncation: tuple
    s: float
    sigma: SigmaModel
    requested: int = DEFAULT_NODES
    extra_splits: tuple = ()
    right: Optional[float] = None

    def rebuild(self, s: float) -> "QuadratureScheme":
        """The same construction at another shift."""
        return build_scheme(s, self.sigma, self.requested, self.extra_splits, self.right)

    @property
    def n(self) -> int:
        return int(self.nodes.size)

    @property
    def is_trivial(self) -> bool:
        return self.nodes.size == 0

    def arb_rule(self, prec: int):
        """Nodes and weights as arb balls, ascending."""
        from flint import arb, ctx

        old = ctx.prec
        ctx.prec = prec
        try:
            xs, ws = [], []
            for (a, b), k in zip(self.panels, self.counts):
                half = (arb(b) - arb(a)) / 2
                mid = (arb(a) + arb(b)) / 2
                pan = []
                for i in range(k):
                    r, wt = arb.legendre_p_root(k, i, weight=True)
                    pan.append((mid + half * r, half * wt))
                pan.sort(key=lambda t: float(t[0].mid()))
                xs.extend(p[0] for p in pan)
                ws.extend(p[1] for p in pan)
        finally:
            ctx.prec = old
        return xs, ws


def _allocate(panels, n: int, s: float) -> list[int]:
    """Split n nodes over panels proportionally to length times local frequency."""
    if len(panels) == 1:
        return [n]
    if n < MIN_PANEL_NODES * len(panels):
        raise ConfigurationError(f"{n} nodes cannot cover {len(panels)} panels")
    weight = np.array([(b - a) * (1.0 + math.sqrt(max(0.0, -(a + s)))) for a, b in panels])
    spare = n - MIN_PANEL_NODES * len(panels)
    raw = spare * weight / weight.sum()
    counts = np.floor(raw).astype(int)
    rest = spare - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:rest]] += 1
    return [int(c) + MIN_PANEL_NODES for c in counts]


def build_scheme(
    s: float,
    sigma: SigmaModel,
    n: int = DEFAULT_NODES,
    extra_splits: Sequence[float] = (),
    right: Optional[float] = None,
) -> QuadratureScheme:
    """Gauss-Legendre scheme on (lo, hi) for the operator at shift s.

    hi = max(12, 16 - s) so that Ai(x + s)^2 is below 1e-30 beyond it; lo is
    the left cutoff of the model.  Panels are split at jumps of sigma and at
    ``extra_splits`` lying inside the domain.
    """
    s = float(s)
    if not math.isfinite(s):
        raise ConfigurationError("shift s must be finite")
    if int(n) != n or n < 16:
        raise ConfigurationError(f"node count must be an integer >= 16, got {n!r}")
    n = int(n)
    hi = max(12.0, 16.0 - s) if right is None else float(right)
    lo = lower_cutoff(sigma)
    empty = np.zeros(0)
    if lo is None or lo >= hi:
        t = (hi, hi) if lo is None else (lo, hi)
        return QuadratureScheme(empty, empty, (), (), t, s, sigma, n, tuple(extra_splits), right)
    cuts = [lo, hi]
    for xi, _ in sigma.jumps:
        cuts.append(xi)
    cuts.extend(float(c) for c in extra_splits)
    cuts = sorted(c for c in set(cuts) if lo <= c <= hi)
    merged = [cuts[0]]
    for c in cuts[1:]:
        if c - merged[-1] > 1e-9:
            merged.append(c)
    merged[-1] = hi
    panels = tuple((a, b) for a, b in zip(merged, merged[1:]))
    counts = _allocate(panels, n, s)
    xs, ws = [], []
    for (a, b), k in zip(panels, counts):
        t, wt = np.polynomial.legendre.leggauss(k)
        half = 0.5 * (b - a)
        xs.append(0.5 * (a + b) + half * t)
        ws.append(half * wt)
    nodes = np.concatenate(xs)
    weights = np.concatenate(ws)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureScheme(
        nodes, weights, panels, tuple(counts), (lo, hi), s, sigma, n, tuple(extra_splits), right
    )


# ----------------------------------------------------------------------
# backends


class _DoubleBackend:
    """Dense double-precision algebra; node quantities are unscaled floats."""

    high = False

    def __init__(self, scheme: QuadratureScheme, s: float, sigma: SigmaModel):
        x = scheme.nodes
        z = x + s
        at, bt = airy_arrays(z, scaled=True)
        ez = airy_zeta(z)
        e = np.exp(-ez)
        self.x, self.z = x, z
        self.at, self.bt, self.ez, self.e = at, bt, ez, e
        self.a, self.b = at * e, bt * e
        self.sig = sigma(x)
        self.dsig = sigma.smooth_prime(x)
        self.w = scheme.weights
        self.d = np.sqrt(self.sig * self.w)
        kt, _ = airy_kernel_scaled(z[:, None], z[None, :], (at[:, None], bt[:, None]), (at[None, :], bt[None, :]))
        kmat = kt * (e[:, None] * e[None, :])
        self.K = 0.5 * (kmat + kmat.T)
        S = self.d[:, None] * self.K * self.d[None, :]
        M = np.eye(x.size) - S
        try:
            c, low = sla.cho_factor(M, lower=True, check_finite=True)
        except np.linalg.LinAlgError as exc:
            raise NonPositiveDeterminant(
                "I - S is not positive definite in double precision; "
                "increase the node count or use precision='high'"
            ) from exc
        piv = np.diag(c)
        if piv.min() < 1e-150:
            raise SingularOperator(f"Cholesky pivot {piv.min():.3g} is numerically zero")
        self.chol = (c, low)
        self.log_det = float(2.0 * np.log(piv).sum())
        anorm = np.abs(M).sum(axis=0).max()
        rcond, info = lapack.dpocon(c, anorm, uplo="L")
        self.rcond = float(rcond)
        if info == 0 and rcond < RCOND_WARN:
            warnings.warn(
                f"I - S has reciprocal condition {rcond:.2e}; double-precision results "
                "may be inaccurate (consider precision='high')",
                NumericalWarning,
                stacklevel=4,
            )

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return sla.cho_solve(self.chol, rhs)

    def to_float(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float)

    def cross(self, lam: np.ndarray, s: float):
        """G_jp = d_j K~(x_j, lam_p) exp(-zeta_j) and the exponents zeta(lam_p + s)."""
        zl = lam + s
        al, bl = airy_arrays(zl, scaled=True)
        kt, _ = airy_kernel_scaled(
            self.z[:, None], zl[None, :], (self.at[:, None], self.bt[:, None]), (al[None, :], bl[None, :])
        )
        G = (self.d * self.e)[:, None] * kt
        return G, al, bl, airy_zeta(zl)


class _ArbBackend:
    """Ball-arithmetic algebra with python-flint; results are rounded to float."""

    high = True

    def __init__(self, scheme: QuadratureScheme, s: float, sigma: SigmaModel, prec: int):
        from flint import arb, arb_mat, ctx

        self.prec = int(prec)
        self._arb, self._arb_mat, self._ctx = arb, arb_mat, ctx
        old = ctx.prec
        ctx.prec = self.prec
        try:
            xs, ws = scheme.arb_rule(self.prec)
            sa = arb(s)
            z = [xi + sa for xi in xs]
            self.xs, self.ws, self.z = xs, ws, z
            self.a = [zi.airy_ai() for zi in z]
            self.b = [zi.airy_ai(derivative=1) for zi in z]
            self.sig = [sigma.eval_arb(xi) for xi in xs]
            self.dsig = [sigma.smooth_prime_arb(xi) for xi in xs]
            self.d = [(si * wi).sqrt() for si, wi in zip(self.sig, ws)]
            n = len(xs)
            Z = np.array(z, dtype=object)
            A = np.array(self.a, dtype=object)
            B = np.array(self.b, dtype=object)
            D = np.array(self.d, dtype=object)
            num = np.outer(A, B) - np.outer(B, A)
            den = Z[:, None] - Z[None, :]
            for i in range(n):
                den[i, i] = arb(1)
            K = num / den
            for i in range(n):
                K[i, i] = B[i] * B[i] - Z[i] * A[i] * A[i]
            self.K = K
            self.A, self.B, self.D, self.Z = A, B, D, Z
            S = D[:, None] * K * D[None, :]
            M = -S
            for i in range(n):
                M[i, i] = M[i, i] + 1
            self.M = arb_mat(M.tolist())
            det = self.M.det().mid()
            if not det > 0:
                raise NonPositiveDeterminant(
                    f"discretized determinant is not positive ({float(det):.3g}); increase the node count"
                )
            self.log_det = float(det.log())
            self.rcond = float("nan")
        finally:
            ctx.prec = old

    def _with_prec(self, fn, *args):
        old = self._ctx.prec
        self._ctx.prec = self.prec
        try:
            return fn(*args)
        finally:
            self._ctx.prec = old

    def solve(self, rhs):
        def run(rhs):
            rhs = np.asarray(rhs, dtype=object)
            vec = rhs.ndim == 1
            R = rhs.reshape(rhs.shape[0], -1)
            out = self.M.solve(self._arb_mat(R.tolist()), algorithm="approx")
            arr = np.array(out.tolist(), dtype=object)
            return arr[:, 0] if vec else arr

        return self._with_prec(run, rhs)

    def to_float(self, v):
        v = np.asarray(v, dtype=object)
        return np.vectorize(lambda t: float(t.mid()), otypes=[float])(v) if v.size else np.zeros(v.shape)

    def cross(self, lam: np.ndarray, s: float):
        def run(lam):
            arb = self._arb
            zl = [arb(float(v)) + arb(s) for v in lam]
            al = np.array([t.airy_ai() for t in zl], dtype=object)
            bl = np.array([t.airy_ai(derivative=1) for t in zl], dtype=object)
            ZL = np.array(zl, dtype=object)
            num = np.outer(self.A, bl) - np.outer(self.B, al)
            den = self.Z[:, None] - ZL[None, :]
            G = np.empty(num.shape, dtype=object)
            for i in range(num.shape[0]):
                for p in range(num.shape[1]):
                    if abs(float(den[i, p].mid())) < 1e-20:
                        G[i, p] = self.B[i] * bl[p] - self.Z[i] * self.A[i] * al[p]
                    else:
                        G[i, p] = num[i, p] / den[i, p]
            G = self.D[:, None] * G
            return G, al, bl, zl

        return self._with_prec(run, np.asarray(lam, dtype=float))


# ----------------------------------------------------------------------
# resolvent state


class ResolventState:
    """Factorized discretization of 1 - M_sigma K_s at one (s, sigma).

    Do not instantiate directly; use :func:`build_resolvent`.
    """

    def __init__(self, scheme: QuadratureScheme, s: float, sigma: SigmaModel, precision: str, prec: int):
        self.scheme = scheme
        self.s = float(s)
        self.sigma = sigma
        self.precision = precision
        self.prec = prec
        self.trivial = scheme.is_trivial
        if self.trivial:
            self._be = None
            self.log_det = 0.0
            self.rcond = 1.0
            self._fa = self._fb = None
            return
        if precision == "high":
            self._be = _ArbBackend(scheme, self.s, sigma, prec)
        else:
            self._be = _DoubleBackend(scheme, self.s, sigma)
        be = self._be
        self.log_det = be.log_det
        self.rcond = be.rcond
        if be.high:
            D = be.D
            rhs = np.stack([D * be.A, D * be.B], axis=1)
            f = be.solve(rhs)
            self._fa, self._fb = f[:, 0], f[:, 1]
        else:
            f = be.solve(np.stack([be.d * be.a, be.d * be.b], axis=1))
            self._fa, self._fb = f[:, 0], f[:, 1]

    def rebuild(self, s: float) -> "ResolventState":
        """A state at another shift with the same scheme construction and backend."""
        return build_resolvent(s, self.sigma, self.scheme.rebuild(s), precision=self.precision, prec=self.prec)

    # basic quantities --------------------------------------------------
    @property
    def sign(self) -> int:
        return 1

    @property
    def n(self) -> int:
        return self.scheme.n

    @property
    def gap(self) -> float:
        return math.exp(self.log_det)

    @cached_property
    def dlog_gap(self) -> float:
        """d/ds log det(1 - K_s^sigma) = <D a, (I - S)^{-1} D a>."""
        if self.trivial:
            return 0.0
        be = self._be
        if be.high:
            return float(be._with_prec(lambda: sum(di * ai * fi for di, ai, fi in zip(be.D, be.A, self._fa))).mid())
        return float(np.dot(be.d * be.a, self._fa))

    @cached_property
    def phi_nodes(self) -> np.ndarray:
        """phi(x_i; s) at the quadrature nodes."""
        if self.trivial:
            return np.zeros(0)
        be = self._be
        if be.high:
            vals = be._with_prec(lambda: be.A + be.K.dot(be.D * self._fa))
            return be.to_float(vals)
        return be.a + be.K @ (be.d * self._fa)

    @cached_property
    def smooth_trace(self) -> float:
        """Integral of phi^2 against the smooth part sigma_0' dx."""
        if self.trivial:
            return 0.0
        be = self._be
        if be.high:

            def run():
                phi = be.A + be.K.dot(be.D * self._fa)
                return sum(w * ds * p * p for w, ds, p in zip(be.ws, be.dsig, phi))

            return float(be._with_prec(run).mid())
        phi = self.phi_nodes
        return float(np.sum(be.w * be.dsig * phi * phi))

    # point queries -----------------------------------------------------
    def point_data(self, lam) -> dict:
        """Scaled wavefunction data at points lam.

        Returns a dict with ``phi``, ``psi`` (the resolvent applied to
        Ai'(. + s)), and ``zeta`` such that phi(lam) = exp(-zeta) * phi_t.
        """
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        zl = lam + self.s
        zeta = airy_zeta(zl)
        if self.trivial:
            at, bt = airy_arrays(zl, scaled=True)
            return {"phi": at, "psi": bt, "zeta": zeta, "lam": lam}
        be = self._be
        G, al, bl, _ = be.cross(lam, self.s)
        if be.high:

            def run():
                phi = al + G.T.dot(self._fa)
                psi = bl + G.T.dot(self._fb)
                scale = np.array([be._arb(float(zz)).exp() for zz in zeta], dtype=object)
                return phi * scale, psi * scale

            phi, psi = be._with_prec(run)
            return {"phi": be.to_float(phi), "psi": be.to_float(psi), "zeta": zeta, "lam": lam}
        return {"phi": al + G.T @ self._fa, "psi": bl + G.T @ self._fb, "zeta": zeta, "lam": lam}

    def kernel_scaled(self, lam, mu=None):
        """Scaled resolvent kernel: L(lam_i, mu_j) = exp(-zl_i - zm_j) Lt_ij."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        same = mu is None
        mu = lam if same else np.atleast_1d(np.asarray(mu, dtype=float))
        zl, zm = lam + self.s, mu + self.s
        kt, _ = airy_kernel_scaled(zl[:, None], zm[None, :])
        el, em = airy_zeta(zl), airy_zeta(zm)
        if self.trivial:
            return kt, el, em
        be = self._be
        Gl = be.cross(lam, self.s)[0]
        Gm = Gl if same else be.cross(mu, self.s)[0]
        if be.high:

            def run():
                Y = be.solve(Gm)
                corr = Gl.T.dot(Y)
                sl = np.array([be._arb(float(v)).exp() for v in el], dtype=object)
                sm = np.array([be._arb(float(v)).exp() for v in em], dtype=object)
                return corr * sl[:, None] * sm[None, :]

            corr = be.to_float(be._with_prec(run))
        else:
            corr = Gl.T @ be.solve(Gm)
        L = kt + corr
        if same:
            L = 0.5 * (L + L.T)
        return L, el, em

    def node_data(self) -> dict:
        """Node quantities as floats: x, w, d, Ai and Ai' at x + s, and the solves."""
        if self.trivial:
            z = np.zeros(0)
            return dict(x=z, w=z, d=z, a=z, b=z, fa=z, fb=z)
        be = self._be
        if be.high:
            f = be.to_float
            return dict(
                x=f(np.array(be.xs, dtype=object)),
                w=f(np.array(be.ws, dtype=object)),
                d=f(be.D),
                a=f(be.A),
                b=f(be.B),
                fa=f(self._fa),
                fb=f(self._fb),
            )
        return dict(x=be.x, w=be.w, d=be.d, a=be.a, b=be.b, fa=self._fa, fb=self._fb)

    def cross_scaled(self, lam) -> np.ndarray:
        """Matrix d_j exp(-zeta_j) K~(x_j, lam_p) used in all point queries (double backend)."""
        return self._be.cross(np.atleast_1d(np.asarray(lam, dtype=float)), self.s)[0]

    def solve(self, rhs):
        """(I - S)^{-1} rhs for float right-hand sides."""
        be = self._be
        if be.high:
            from flint import arb

            obj = np.vectorize(lambda v: arb(float(v)), otypes=[object])(np.asarray(rhs, dtype=float))
            return be.to_float(be.solve(obj))
        return be.solve(rhs)

    def apply(self, rhs: Callable, lam_out) -> np.ndarray:
        """((1 - K_s M_sigma)^{-1} rhs)(lam_out) for a vectorized callable rhs."""
        lam_out = np.atleast_1d(np.asarray(lam_out, dtype=float))
        base = np.asarray(rhs(lam_out), dtype=float)
        if self.trivial:
            return base
        be = self._be
        if be.high:
            G, _, _, _ = be.cross(lam_out, self.s)
            vals = np.asarray(rhs(be.to_float(be.xs)), dtype=float)

            def run():
                f = be.solve(be.D * np.array([be._arb(float(v)) for v in vals], dtype=object))
                return G.T.dot(f)

            return base + be.to_float(be._with_prec(run))
        G, _, _, zeta = be.cross(lam_out, self.s)
        f = be.solve(be.d * np.asarray(rhs(be.x), dtype=float))
        return base + np.exp(-zeta) * (G.T @ f)


def build_resolvent(
    s: float,
    sigma: SigmaModel,
    scheme: Optional[QuadratureScheme] = None,
    *,
    n: int = DEFAULT_NODES,
    precision: str = "double",
    prec: int = DEFAULT_PREC,
) -> ResolventState:
    """Factorize I - S for the operator at shift s.

    Parameters
    ----------
    s : float
        Shift of the Airy kernel.
    sigma : SigmaModel
        Thinning function.
    scheme : QuadratureScheme, optional
        Built by :func:`build_scheme` for the same (s, sigma); built with ``n``
        nodes when omitted.
    precision : {"double", "high"}
        Arithmetic backend; "high" uses ``prec``-bit ball arithmetic.
    """
    if precision not in ("double", "high"):
        raise ConfigurationError(f"precision must be 'double' or 'high', got {precision!r}")
    s = float(s)
    if scheme is None:
        scheme = build_scheme(s, sigma, n)
    elif scheme.s != s or scheme.sigma != sigma:
        raise ConfigurationError("quadrature scheme was built for a different (s, sigma)")
    return ResolventState(scheme, s, sigma, precision, int(prec))


def gap_probability(state: ResolventState) -> float:
    """det(1 - K_s^sigma), the probability that the thinned process has no point."""
    return state.gap


def log_gap_probability(state: ResolventState) -> float:
    return state.log_det


def resolvent_kernel_matrix(state: ResolventState, lam, mu=None) -> np.ndarray:
    """Matrix L(lam_i, mu_j) (underflows to 0 at large positive arguments)."""
    L, el, em = state.kernel_scaled(lam, mu)
    return L * np.exp(-el[:, None] - em[None, :])


def resolvent_kernel(state: ResolventState, lam: float, mu: float) -> float:
    """L(lam, mu) of the operator K_s (1 - M_sigma K_s)^{-1}."""
    return float(resolvent_kernel_matrix(state, [lam], [mu])[0, 0])


def resolvent_apply(state: ResolventState, rhs: Callable, lam_out):
    """((1 - K_s M_sigma)^{-1} rhs)(lam_out); scalar in, scalar out."""
    out = state.apply(rhs, lam_out)
    return float(out[0]) if np.ndim(lam_out) == 0 else out
