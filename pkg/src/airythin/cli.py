"""Command-line front end: ``airythin eval | scan | verify``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .ckdv import default_asymptotes, evaluate
from .darboux import modified_wavefunction
from .errors import AiryThinError, ConfigurationError, NumericalError
from .fredholm import build_resolvent, build_scheme
from .kernels import PointConfig
from .stark import wavefunction_values
from .thinning import SigmaModel, parse_sigma, rescale, to_dict
from .verify import Suite, run_suite

__all__ = ["RunConfig", "cmd_eval", "cmd_scan", "cmd_verify", "main", "SCHEMA_VERSION", "CSV_HEADER"]

SCHEMA_VERSION = 1
CSV_HEADER = ("X", "T", "J", "log_J", "V", "asymptote_right", "asymptote_left")
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
MIN_NODES = 16


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs; built from flags or a JSON file."""

    sigma: Union[str, dict] = "fermi"
    nu: tuple = ()
    X: Optional[float] = None
    T: Optional[float] = None
    s: Optional[float] = None
    grid: dict = field(default_factory=dict)
    nodes: int = 200
    format: str = "json"
    out: Optional[str] = None
    jobs: Optional[int] = None
    seed: int = 0
    precision: str = "double"

    def __post_init__(self):
        if int(self.nodes) < MIN_NODES:
            raise ConfigurationError(f"nodes must be at least {MIN_NODES}")
        if self.format not in ("csv", "json"):
            raise ConfigurationError(f"unknown output format {self.format!r}")
        if self.precision not in ("double", "high"):
            raise ConfigurationError(f"unknown precision {self.precision!r}")
        nu = tuple(float(v) for v in self.nu)
        PointConfig(nu)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "nodes", int(self.nodes))
        if self.T is not None and not float(self.T) > 0:
            raise ConfigurationError("T must be positive")
        self.sigma_model

    @property
    def sigma_model(self) -> SigmaModel:
        return parse_sigma(self.sigma)

    def point(self) -> tuple[float, float]:
        """The single (X, T) of an eval run; --s is the reduced variable X T^{-1/3}."""
        T = 1.0 if self.T is None else float(self.T)
        if self.X is not None:
            return float(self.X), T
        if self.s is not None:
            return float(self.s) * T ** (1.0 / 3.0), T
        raise ConfigurationError("eval needs --X or --s")

    def grid_points(self) -> list[tuple[float, float]]:
        """Grid in T-major, X-minor order."""
        g = self.grid
        if not g:
            raise ConfigurationError("scan needs a grid (--grid-X / --grid-T or a config grid)")
        if "s" in g:
            xs, ts = _linspace(g["s"]), [1.0]
        else:
            if "X" not in g:
                raise ConfigurationError("grid needs an X range")
            xs = _linspace(g["X"])
            ts = [float(t) for t in g.get("T", [1.0])]
        if not xs or not ts:
            raise ConfigurationError("grid is empty")
        if any(not t > 0 for t in ts):
            raise ConfigurationError("grid T values must be positive")
        return [(x, t) for t in ts for x in xs]

    @classmethod
    def from_json(cls, path: Union[str, Path], **overrides) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        if "outputs" in data and "format" not in data:
            data["format"] = data.pop("outputs")
        sigma = data.get("sigma", "fermi")
        if isinstance(sigma, str) and sigma.startswith("custom:"):
            ref = Path(sigma[len("custom:"):])
            if not ref.is_absolute():
                data["sigma"] = "custom:" + str(path.parent / ref)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


def _linspace(spec) -> list[float]:
    if isinstance(spec, str):
        spec = spec.split(":")
    try:
        lo, hi, count = float(spec[0]), float(spec[1]), int(spec[2])
    except (IndexError, ValueError, TypeError) as exc:
        raise ConfigurationError(f"range must be min:max:count, got {spec!r}") from exc
    if count < 1:
        raise ConfigurationError("range count must be positive")
    return [float(x) for x in np.linspace(lo, hi, count)]


def _num(x: Optional[float]) -> Optional[float]:
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def _write_atomic(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# ----------------------------------------------------------------------
# subcommands


def cmd_eval(config: RunConfig) -> dict:
    """Evaluate one point and return the JSON report."""
    sigma = config.sigma_model
    X, T = config.point()
    p = evaluate(sigma, X, T, config.nu, config.nodes, config.precision)
    report = {
        "schema": SCHEMA_VERSION,
        "sigma": _sigma_json(config),
        "nu": list(config.nu),
        "X": X,
        "T": T,
        "s": X * T ** (-1.0 / 3.0),
        "J": p.J,
        "log_J": p.log_J,
        "V": p.V,
        "gap": p.gap,
        "corr_det": p.corr_det,
    }
    if config.nu:
        c = T ** (-1.0 / 3.0)
        sig_t = rescale(sigma, T)
        s = X * c
        state = build_resolvent(s, sig_t, build_scheme(s, sig_t, config.nodes), precision=config.precision)
        pts = PointConfig(tuple(c * v for v in config.nu))
        phi = np.abs(modified_wavefunction(state, pts, pts.array))
        free = np.abs(wavefunction_values(state, pts.array)[0])
        rel = phi / np.maximum(free, 1e-300)
        report["wavefunction_zeros"] = {
            "abs": [float(v) for v in phi],
            "rel": [float(v) for v in rel],
            "ok": bool(np.all(rel < 1e-9)),
        }
    return report


def _sigma_json(config: RunConfig):
    try:
        return to_dict(config.sigma_model)
    except ConfigurationError:
        return config.sigma


def _scan_point(args):
    sigma_spec, X, T, nu, nodes, precision = args
    sigma = parse_sigma(sigma_spec)
    p = evaluate(sigma, X, T, nu, nodes, precision)
    right, left = default_asymptotes(sigma, X, T, nu)
    return (X, T, p.J, p.log_J, p.V, _num(right), _num(left))


def _scan_rows(config: RunConfig) -> list[tuple]:
    tasks = [(config.sigma, X, T, config.nu, config.nodes, config.precision) for X, T in config.grid_points()]
    jobs = config.jobs if config.jobs is not None else (os.cpu_count() or 1)
    jobs = max(1, min(int(jobs), len(tasks)))
    if jobs == 1:
        return [_scan_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_scan_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def cmd_scan(config: RunConfig) -> str:
    """Evaluate the grid and write it; returns the rendered text."""
    rows = _scan_rows(config)
    if config.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    else:
        payload = {
            "schema": SCHEMA_VERSION,
            "sigma": _sigma_json(config),
            "nu": list(config.nu),
            "columns": list(CSV_HEADER),
            "rows": [[_num(v) if v is not None else None for v in row] for row in rows],
        }
        text = json.dumps(payload, indent=1) + "\n"
    _write_atomic(config.out, text)
    return text


def cmd_verify(suite, config: RunConfig, stream=None) -> int:
    """Run a suite, print one line per check, return the exit status."""
    stream = sys.stdout if stream is None else stream
    checks = run_suite(suite, config.sigma_model, config.nu, seed=config.seed, n=config.nodes)
    for c in checks:
        print(c.line(), file=stream)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed", file=stream)
    return EXIT_OK if failed == 0 else EXIT_VERIFY


# ----------------------------------------------------------------------
# argument parsing


def _csv_floats(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sigma", help="zero | fermi[:center,theta] | indicator:xi | custom:path.json")
    common.add_argument("--nu", type=_csv_floats, help="comma-separated conditioning points")
    common.add_argument("--nodes", type=int, help="quadrature node count (default 200)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--seed", type=int)
    common.add_argument("--precision", choices=("double", "high"))
    common.add_argument("--config", help="JSON file with RunConfig fields")

    p = argparse.ArgumentParser(prog="airythin", description="Thinned Airy process tau functions and cKdV solutions.")
    sub = p.add_subparsers(dest="command", required=True)
    ev = sub.add_parser("eval", parents=[common], help="evaluate one point")
    ev.add_argument("--X", type=float)
    ev.add_argument("--T", type=float)
    ev.add_argument("--s", type=float, help="reduced variable X T^{-1/3}")
    sc = sub.add_parser("scan", parents=[common], help="evaluate an (X, T) grid")
    sc.add_argument("--grid-X", dest="grid_X", help="min:max:count")
    sc.add_argument("--grid-T", dest="grid_T", type=_csv_floats, help="comma-separated T values")
    sc.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    ve = sub.add_parser("verify", parents=[common], help="run an invariant suite")
    ve.add_argument("suite", choices=[s.value for s in Suite])
    return p


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = {
        "sigma": ns.sigma,
        "nu": ns.nu,
        "nodes": ns.nodes,
        "format": ns.format,
        "out": ns.out,
        "seed": ns.seed,
        "precision": ns.precision,
        "X": getattr(ns, "X", None),
        "T": getattr(ns, "T", None),
        "s": getattr(ns, "s", None),
        "jobs": getattr(ns, "jobs", None),
    }
    grid_X, grid_T = getattr(ns, "grid_X", None), getattr(ns, "grid_T", None)
    if grid_X is not None or grid_T is not None:
        grid = {}
        if grid_X is not None:
            grid["X"] = grid_X
        if grid_T is not None:
            grid["T"] = list(grid_T)
        fields["grid"] = grid
    if ns.command == "scan" and ns.format is None and ns.config is None:
        fields["format"] = "csv"
    if ns.config:
        return RunConfig.from_json(ns.config, **fields)
    return RunConfig(**{k: v for k, v in fields.items() if v is not None})


_VALUE_FLAGS = {"--nu", "--X", "--T", "--s", "--grid-X", "--grid-T"}


def _join_values(argv: Sequence[str]) -> list[str]:
    # let values such as "-4:4:5" or "-1,2" follow their flag without "="
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    ns = _parser().parse_args(_join_values(argv))
    try:
        config = _config_from_args(ns)
        if ns.command == "eval":
            report = cmd_eval(config)
            _write_atomic(config.out, json.dumps(report, indent=1) + "\n")
            return EXIT_OK
        if ns.command == "scan":
            text = cmd_scan(config)
            if config.out is not None:
                print(f"wrote {text.count(chr(10)) - 1 if config.format == 'csv' else len(config.grid_points())} rows to {config.out}", file=sys.stderr)
            return EXIT_OK
        return cmd_verify(ns.suite, config)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (AiryThinError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
