"""Thinning functions sigma and the measure d(sigma) used by trace formulas.

A model is a smooth part sigma_0 plus finitely many upward jumps,

    sigma(x) = sigma_0(x) + sum_j Delta_j 1[x >= xi_j],

so that d(sigma) = sigma_0'(x) dx + sum_j Delta_j delta_{xi_j}.  Models are
immutable and evaluate on numpy arrays.  A few kinds also evaluate on
python-flint ``arb`` balls for the extended-precision Fredholm backend.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.special import expit

from .errors import ConfigurationError, DecayTooSlow, DomainError

__all__ = [
    "SigmaKind",
    "StrongParams",
    "SigmaMeasure",
    "SigmaModel",
    "zero",
    "fermi",
    "indicator",
    "custom",
    "tabulated",
    "sigma_eval",
    "sigma_prime_measure",
    "rescale",
    "lower_cutoff",
    "check_decay",
    "from_dict",
    "to_dict",
    "parse_sigma",
]

# sigma(L) * |L|^{1/2} must fall below this at the left truncation point
LEFT_TOL = 1e-14
MAX_CUTOFF = 1e4


class SigmaKind(str, Enum):
    ZERO = "zero"
    FERMI = "fermi"
    INDICATOR = "indicator"
    CUSTOM = "custom"


class StrongParams(NamedTuple):
    """Constants c_+, c_-, c'_+, c'_- of the strong tail assumption."""

    c_plus: float
    c_minus: float
    cp_plus: float
    cp_minus: float


class SigmaMeasure(NamedTuple):
    """Decomposition d(sigma) = density(x) dx + sum of atoms (xi, Delta)."""

    density: Callable[[np.ndarray], np.ndarray]
    atoms: tuple[tuple[float, float], ...]


@dataclass(frozen=True, eq=False)
class SigmaModel:
    """Immutable thinning function.

    Use the constructors :func:`zero`, :func:`fermi`, :func:`indicator`,
    :func:`custom` and :func:`tabulated` rather than instantiating directly.
    """

    kind: SigmaKind
    center: float = 0.0
    theta: float = 1.0
    amplitude: float = 1.0
    jumps: tuple[tuple[float, float], ...] = ()
    kappa: float = math.inf
    # custom smooth part: sigma_0(x) = func(scale * x), sigma_0' = scale * dfunc(scale * x)
    func: Optional[Callable] = field(default=None, repr=False)
    dfunc: Optional[Callable] = field(default=None, repr=False)
    scale: float = 1.0
    cutoff: Optional[float] = None
    strong_params: Optional[StrongParams] = None
    label: str = ""

    # ------------------------------------------------------------------
    def _key(self):
        return (
            self.kind,
            self.center,
            self.theta,
            self.amplitude,
            self.jumps,
            self.kappa,
            id(self.func),
            id(self.dfunc),
            self.scale,
            self.cutoff,
            self.strong_params,
        )

    def __eq__(self, other):
        if not isinstance(other, SigmaModel):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    # ------------------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.kind is SigmaKind.ZERO

    @property
    def has_smooth_part(self) -> bool:
        return self.kind in (SigmaKind.FERMI, SigmaKind.CUSTOM)

    @property
    def threshold(self) -> float:
        """Location of the first jump (the indicator threshold)."""
        if not self.jumps:
            raise AttributeError("model has no jumps")
        return self.jumps[0][0]

    @property
    def inverse_slope(self) -> float:
        return self.theta

    def smooth(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind is SigmaKind.FERMI:
            return self.amplitude * expit((x - self.center) / self.theta)
        if self.kind is SigmaKind.CUSTOM:
            return np.asarray(self.func(self.scale * x), dtype=float)
        return np.zeros_like(x)

    def smooth_prime(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind is SigmaKind.FERMI:
            z = (x - self.center) / self.theta
            p = expit(z)
            return self.amplitude * p * expit(-z) / self.theta
        if self.kind is SigmaKind.CUSTOM:
            if self.dfunc is None:
                raise ConfigurationError("custom sigma requires a derivative")
            return self.scale * np.asarray(self.dfunc(self.scale * x), dtype=float)
        return np.zeros_like(x)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self.smooth(x)
        for xi, delta in self.jumps:
            out = out + delta * (x >= xi)
        return out

    def one_minus(self, x) -> np.ndarray:
        """1 - sigma(x), evaluated without cancellation for the Fermi kind."""
        x = np.asarray(x, dtype=float)
        if self.kind is SigmaKind.FERMI and self.amplitude == 1.0 and not self.jumps:
            return expit(-(x - self.center) / self.theta)
        return 1.0 - self(x)

    # arb evaluation for the extended-precision backend ------------------
    def smooth_arb(self, x):
        from flint import arb

        if self.kind is SigmaKind.FERMI:
            z = (x - arb(self.center)) / arb(self.theta)
            return arb(self.amplitude) / (1 + (-z).exp())
        if self.kind is SigmaKind.CUSTOM:
            return arb(float(self.func(self.scale * float(x.mid()))))
        return arb(0)

    def smooth_prime_arb(self, x):
        from flint import arb

        if self.kind is SigmaKind.FERMI:
            z = (x - arb(self.center)) / arb(self.theta)
            p = 1 / (1 + (-z).exp())
            return arb(self.amplitude) * p * (1 - p) / arb(self.theta)
        if self.kind is SigmaKind.CUSTOM:
            return arb(float(self.scale * self.dfunc(self.scale * float(x.mid()))))
        return arb(0)

    def eval_arb(self, x):
        """sigma at an arb point lying strictly inside a jump-free panel."""
        from flint import arb

        out = self.smooth_arb(x)
        xf = float(x.mid())
        for xi, delta in self.jumps:
            if xf >= xi:
                out = out + arb(delta)
        return out


# ----------------------------------------------------------------------
# constructors


def _check_jumps(jumps) -> tuple[tuple[float, float], ...]:
    out = []
    for item in jumps:
        try:
            xi, delta = (float(v) for v in item)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"jump must be a pair (xi, Delta), got {item!r}") from exc
        if not (math.isfinite(xi) and 0.0 < delta <= 1.0):
            raise ConfigurationError(f"jump size must lie in (0, 1], got {delta!r}")
        out.append((xi, delta))
    xs = [j[0] for j in out]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ConfigurationError("jump locations must be strictly increasing")
    return tuple(out)


def _finalize(model: SigmaModel) -> SigmaModel:
    total = sum(d for _, d in model.jumps)
    if model.kind is SigmaKind.FERMI:
        total += model.amplitude
    if total > 1.0 + 1e-12:
        raise ConfigurationError(f"cumulative sigma exceeds 1 (sup = {total:.6g})")
    if model.kind is SigmaKind.CUSTOM:
        grid = np.linspace(-200.0, 200.0, 2001)
        vals = model(grid)
        if not np.all(np.isfinite(vals)) or vals.min() < -1e-12 or vals.max() > 1.0 + 1e-12:
            raise ConfigurationError("custom sigma must take values in [0, 1]")
        if not check_decay(model):
            raise ConfigurationError(
                f"custom sigma does not decay like |x|^(-3/2-kappa) with kappa={model.kappa}"
            )
    return model


def zero() -> SigmaModel:
    """The trivial model sigma = 0 (no thinning survives)."""
    return SigmaModel(kind=SigmaKind.ZERO, label="zero")


def fermi(center: float = 0.0, theta: float = 1.0, amplitude: float = 1.0, jumps=()) -> SigmaModel:
    """Logistic sigma(x) = amplitude / (1 + exp(-(x - center)/theta))."""
    center, theta, amplitude = float(center), float(theta), float(amplitude)
    if not (math.isfinite(center) and math.isfinite(theta) and theta > 0):
        raise ConfigurationError("Fermi model needs a finite center and theta > 0")
    if not (0.0 < amplitude <= 1.0):
        raise ConfigurationError("Fermi amplitude must lie in (0, 1]")
    strong = None
    if amplitude == 1.0 and not jumps:
        # F = 1/(1 - sigma) = 1 + exp((x - center)/theta)
        strong = StrongParams(1.0 / theta, 1.0 / theta, math.exp(-center / theta), math.exp(-center / theta))
    return _finalize(
        SigmaModel(
            kind=SigmaKind.FERMI,
            center=center,
            theta=theta,
            amplitude=amplitude,
            jumps=_check_jumps(jumps),
            strong_params=strong,
            label=f"fermi:{center:g},{theta:g}" if amplitude == 1.0 else "",
        )
    )


def indicator(xi: float = 0.0) -> SigmaModel:
    """Half-line indicator 1[x >= xi]."""
    xi = float(xi)
    if not math.isfinite(xi):
        raise ConfigurationError("indicator threshold must be finite")
    return SigmaModel(kind=SigmaKind.INDICATOR, jumps=((xi, 1.0),), label=f"indicator:{xi:g}")


def custom(
    func: Callable,
    dfunc: Callable,
    kappa: float,
    jumps=(),
    cutoff: Optional[float] = None,
    strong_params=None,
) -> SigmaModel:
    """User-supplied smooth part with its derivative and decay exponent kappa.

    The derivative is mandatory: trace formulas integrate against sigma',
    and numerical differentiation of user data is not attempted.
    """
    if func is None or dfunc is None:
        raise ConfigurationError("custom sigma requires both sigma and its derivative")
    kappa = float(kappa)
    if not kappa > 0:
        raise ConfigurationError("decay exponent kappa must be positive")
    if strong_params is not None:
        strong_params = StrongParams(*map(float, strong_params))
    return _finalize(
        SigmaModel(
            kind=SigmaKind.CUSTOM,
            func=func,
            dfunc=dfunc,
            kappa=kappa,
            jumps=_check_jumps(jumps),
            cutoff=None if cutoff is None else float(cutoff),
            strong_params=strong_params,
            label="custom",
        )
    )


def tabulated(x, values, derivatives, kappa: float, jumps=(), cutoff=None) -> SigmaModel:
    """Custom model from a table of sigma and sigma' values.

    A cubic Hermite interpolant is used between samples, so the derivative
    used by trace formulas is exactly the derivative of the interpolant.
    Outside the table sigma_0 is held at 0 on the left and at the last
    value on the right.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(values, dtype=float)
    dy = np.asarray(derivatives, dtype=float)
    if x.ndim != 1 or x.size < 2 or y.shape != x.shape or dy.shape != x.shape:
        raise ConfigurationError("tabulated sigma needs equal-length 1-D arrays (at least 2 samples)")
    if np.any(np.diff(x) <= 0):
        raise ConfigurationError("tabulated abscissae must be strictly increasing")
    spline = CubicHermiteSpline(x, y, dy, extrapolate=False)
    deriv = spline.derivative()
    lo, hi, last = x[0], x[-1], y[-1]

    def f(t):
        t = np.asarray(t, dtype=float)
        out = np.nan_to_num(spline(t))
        return np.where(t < lo, 0.0, np.where(t > hi, last, out))

    def df(t):
        t = np.asarray(t, dtype=float)
        out = np.nan_to_num(deriv(t))
        return np.where((t < lo) | (t > hi), 0.0, out)

    if cutoff is None:
        cutoff = float(lo)
    return custom(f, df, kappa, jumps=jumps, cutoff=cutoff)


# ----------------------------------------------------------------------
# operations


def sigma_eval(model: SigmaModel, lam):
    """sigma(lam); at a jump point the right limit is returned."""
    out = model(lam)
    return float(out) if np.ndim(out) == 0 else out


def sigma_prime_measure(model: SigmaModel) -> SigmaMeasure:
    """Smooth density sigma_0' and the atoms (xi_j, Delta_j) of d(sigma)."""
    if model.kind is SigmaKind.CUSTOM and model.dfunc is None:
        raise ConfigurationError("custom sigma requires a derivative")
    return SigmaMeasure(model.smooth_prime, tuple(model.jumps))


def rescale(model: SigmaModel, T: float) -> SigmaModel:
    """Return the model x -> sigma(T^{1/3} x)."""
    T = float(T)
    if not (math.isfinite(T) and T > 0):
        raise DomainError(f"rescale needs T > 0, got {T!r}")
    if T == 1.0:
        return model
    c = T ** (1.0 / 3.0)
    jumps = tuple((xi / c, d) for xi, d in model.jumps)
    strong = None
    if model.strong_params is not None:
        sp = model.strong_params
        strong = StrongParams(sp.c_plus * c, sp.c_minus * c, sp.cp_plus, sp.cp_minus)
    kw = dict(jumps=jumps, strong_params=strong, label="")
    if model.kind is SigmaKind.FERMI:
        kw.update(center=model.center / c, theta=model.theta / c)
    elif model.kind is SigmaKind.CUSTOM:
        kw.update(scale=model.scale * c, cutoff=None if model.cutoff is None else model.cutoff / c)
    return replace(model, **kw)


def check_decay(model: SigmaModel) -> bool:
    """Check sigma_0(x) = O(|x|^{-3/2-kappa}) on samples x = -50, -100, -200."""
    if not model.has_smooth_part or math.isinf(model.kappa):
        return True
    pts = np.array([-50.0, -100.0, -200.0]) / model.scale
    vals = np.abs(model.smooth(pts))
    weighted = vals * np.abs(pts * model.scale) ** (1.5 + model.kappa)
    ref = max(weighted[0], 1e-300)
    return bool(np.all(weighted <= 10.0 * ref + 1e-12))


def lower_cutoff(model: SigmaModel) -> Optional[float]:
    """Left truncation point of the operator domain, or None for sigma = 0.

    For the Fermi kind the closed rule center - theta*ln(1e14) - 5 is used.
    For custom models without an explicit cutoff the decay constant C in
    sigma_0 ~ C |x|^{-3/2-kappa} is estimated at x = -50 and the bound
    C |L|^{-1-kappa} < 1e-14 is solved for L.
    """
    if model.is_zero:
        return None
    cands = []
    if model.jumps:
        cands.append(model.jumps[0][0])
    if model.kind is SigmaKind.FERMI:
        cands.append(model.center - model.theta * math.log(1.0 / LEFT_TOL) - 5.0)
    elif model.kind is SigmaKind.CUSTOM:
        if model.cutoff is not None:
            cands.append(model.cutoff)
        else:
            x0 = 50.0 / model.scale
            c = float(abs(model.smooth(np.array([-x0]))[0])) * x0 ** (1.5 + model.kappa)
            if c == 0.0:
                cands.append(-x0)
            else:
                cands.append(-((c / LEFT_TOL) ** (1.0 / (1.0 + model.kappa))))
    cut = min(cands)
    if abs(cut) > MAX_CUTOFF:
        raise DecayTooSlow(f"left truncation point {cut:.4g} exceeds {MAX_CUTOFF:g} in magnitude")
    return cut


# ----------------------------------------------------------------------
# serialization


def from_dict(spec: dict, base_dir: Optional[Path] = None) -> SigmaModel:
    """Build a model from its JSON form, e.g. {"kind": "fermi", "center": 0, "theta": 1}."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigurationError("sigma specification must be an object with a 'kind' field")
    kind = str(spec["kind"]).lower()
    jumps = spec.get("jumps", ())
    try:
        if kind == "zero":
            return zero()
        if kind == "fermi":
            return fermi(spec.get("center", 0.0), spec.get("theta", 1.0), spec.get("amplitude", 1.0), jumps)
        if kind in ("indicator", "halflineindicator"):
            return indicator(spec.get("threshold", spec.get("xi", 0.0)))
        if kind == "custom":
            table = spec
            if "table" in spec:
                path = Path(spec["table"])
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                table = json.loads(path.read_text())
            return tabulated(
                table["x"],
                table["sigma"],
                table["sigma_prime"],
                kappa=spec.get("kappa", table.get("kappa", 1.0)),
                jumps=jumps,
                cutoff=spec.get("cutoff", table.get("cutoff")),
            )
    except KeyError as exc:
        raise ConfigurationError(f"sigma specification is missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid sigma specification: {exc}") from exc
    raise ConfigurationError(f"unknown sigma kind {spec['kind']!r}")


def to_dict(model: SigmaModel) -> dict:
    """JSON form of a built-in model (custom models are not serializable)."""
    if model.kind is SigmaKind.ZERO:
        return {"kind": "zero"}
    if model.kind is SigmaKind.FERMI:
        out = {"kind": "fermi", "center": model.center, "theta": model.theta}
        if model.amplitude != 1.0:
            out["amplitude"] = model.amplitude
        if model.jumps:
            out["jumps"] = [list(j) for j in model.jumps]
        return out
    if model.kind is SigmaKind.INDICATOR:
        return {"kind": "indicator", "threshold": model.threshold}
    raise ConfigurationError("custom sigma models have no JSON form")


def parse_sigma(text: str) -> SigmaModel:
    """Parse the mini-language ``zero | fermi[:center,theta] | indicator:xi | custom:path.json``."""
    if isinstance(text, SigmaModel):
        return text
    if isinstance(text, dict):
        return from_dict(text)
    text = str(text).strip()
    name, _, arg = text.partition(":")
    name = name.lower()
    try:
        if name == "zero" and not arg:
            return zero()
        if name == "fermi":
            if not arg:
                return fermi()
            parts = [float(p) for p in arg.split(",")]
            if len(parts) != 2:
                raise ConfigurationError("fermi spec is fermi:center,theta")
            return fermi(*parts)
        if name == "indicator":
            return indicator(float(arg) if arg else 0.0)
        if name == "custom" and arg:
            path = Path(arg)
            try:
                data = json.loads(path.read_text())
            except OSError as exc:
                raise ConfigurationError(f"cannot read sigma file {arg!r}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"sigma file {arg!r} is not valid JSON: {exc}") from exc
            data.setdefault("kind", "custom")
            return from_dict(data, base_dir=path.parent)
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"cannot parse sigma spec {text!r}: {exc}") from exc
    raise ConfigurationError(f"unknown sigma spec {text!r}")
