"""Batch driver: configure a model structure, run verification suites, emit reports.

Commands:
    verify     pointwise identity suite on one configured structure
    integrate  integral-identity suite on a compact (sphere) model
    scan       pointwise suite over an (n, m, tau) parameter grid, CSV output
    catalog    machine-readable listing of every identity verifier

Configs are flat key-value files (``key = value``, ``#`` comments). Unknown
keys are hard errors. Exit codes: 0 all checks passed, 1 a tolerance failed,
2 configuration or usage error (no partial reports are written on exit 2).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

from . import __version__
from .identities import CATALOG, run_pointwise_suite
from .models import (
    CHART_KINDS,
    ModelSpec,
    example_structure,
    sample_points,
)
from .quadrature import make_sphere_grid, run_integral_suite

CONFIG_KEYS = {
    "family": "model family: euclidean | sphere | hyperbolic",
    "n": "dimension (>= 2); comma list allowed for scan",
    "r": "sphere radius (default 1)",
    "chart": "chart kind (default: cartesian / stereographic / poincare_ball)",
    "tau": "potential parameter; comma list allowed for scan",
    "m": "weight, positive real or 'inf'; comma list allowed for scan",
    "v_axis": "ambient axis of the height function (default 0)",
    "suite": "comma list of identity ids or 'all' (default all)",
    "points": "random sample size (default 100)",
    "seed": "sampling seed (default 0)",
    "grid": "quadrature resolution per angle, e.g. 64,128",
    "tol.order2": "tolerance for second-order identities (default 1e-8)",
    "tol.order3": "tolerance for third-order identities (default 1e-7)",
    "tol.order4": "tolerance for fourth-order identities (default 1e-6)",
    "tol.integral": "tolerance for integral identities (default 1e-6)",
}

HYPERBOLIC_NOTE = (
    "hyperbolic convention: the height function is cosh of the geodesic distance "
    "(h >= 1), so u = tau + h stays positive; lambda = -(n-1) - m(u-tau)/u, the "
    "sign consistent with hess f - (1/m)df(x)df = -m(u-tau)/u g"
)


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    family: str
    n_list: list[int]
    tau_list: list[float]
    m_list: list[float]
    r: float = 1.0
    chart: str = ""
    v_axis: int = 0
    suite: Optional[list[str]] = None  # None = all
    points: int = 100
    seed: int = 0
    grid: list[int] = field(default_factory=lambda: [64, 128])
    tolerances: dict = field(
        default_factory=lambda: {2: 1e-8, 3: 1e-7, 4: 1e-6, "integral": 1e-6}
    )
    raw: dict = field(default_factory=dict)

    def single(self, key: str):
        values = {"n": self.n_list, "tau": self.tau_list, "m": self.m_list}[key]
        if len(values) != 1:
            raise ConfigError(
                f"key '{key}' must be a single value for this command, got {values}"
            )
        return values[0]


def parse_config_text(text: str) -> RunConfig:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key '{key}'")
        if key in raw:
            raise ConfigError(f"duplicate config key '{key}'")
        raw[key] = value
    if "family" not in raw:
        raise ConfigError("missing required key 'family'")

    def parse_float(token: str) -> float:
        token = token.strip()
        if token.lower() in ("inf", "infinity"):
            return math.inf
        try:
            return float(token)
        except ValueError as exc:
            raise ConfigError(f"cannot parse number {token!r}") from exc

    def parse_list(key: str, cast) -> list:
        if key not in raw:
            raise ConfigError(f"missing required key '{key}'")
        items = [t for t in raw[key].split(",") if t.strip()]
        if not items:
            raise ConfigError(f"key '{key}' has an empty value list")
        return [cast(t) for t in items]

    def parse_int(token: str) -> int:
        try:
            return int(token)
        except ValueError as exc:
            raise ConfigError(f"cannot parse integer {token!r}") from exc

    cfg = RunConfig(
        family=raw["family"],
        n_list=parse_list("n", parse_int),
        tau_list=parse_list("tau", parse_float),
        m_list=parse_list("m", parse_float),
        raw=dict(raw),
    )
    if cfg.family not in CHART_KINDS:
        raise ConfigError(
            f"unknown family {cfg.family!r}; choose from {sorted(CHART_KINDS)}"
        )
    if "r" in raw:
        cfg.r = parse_float(raw["r"])
    if "chart" in raw:
        cfg.chart = raw["chart"]
    if "v_axis" in raw:
        cfg.v_axis = parse_int(raw["v_axis"])
    if "points" in raw:
        cfg.points = parse_int(raw["points"])
        if cfg.points < 1:
            raise ConfigError("'points' must be >= 1")
    if "seed" in raw:
        cfg.seed = parse_int(raw["seed"])
    if "grid" in raw:
        cfg.grid = [parse_int(t) for t in raw["grid"].split(",") if t.strip()]
    if "suite" in raw and raw["suite"].strip() != "all":
        ids = [t.strip() for t in raw["suite"].split(",") if t.strip()]
        known = {info.identity_id for info in CATALOG}
        for ident in ids:
            if ident not in known:
                raise ConfigError(f"unknown identity id {ident!r} in 'suite'")
        cfg.suite = ids
    for key, slot in (
        ("tol.order2", 2),
        ("tol.order3", 3),
        ("tol.order4", 4),
        ("tol.integral", "integral"),
    ):
        if key in raw:
            cfg.tolerances[slot] = parse_float(raw[key])
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc


def _build_structure(cfg: RunConfig, n: int, tau: float, m: float):
    spec = ModelSpec(
        cfg.family,
        n,
        tau=tau,
        m=m,
        radius=cfg.r,
        chart_kind=cfg.chart,
        v_axis=cfg.v_axis,
    )
    return spec, example_structure(spec)


def _scaled(tolerances: dict, scale: float) -> dict:
    return {k: v * scale for k, v in tolerances.items()}


def _report_skeleton(cfg: RunConfig, seed: int) -> dict:
    report = {
        "tool": {"name": "gqem", "version": __version__},
        "config": dict(sorted(cfg.raw.items())),
        "seed": seed,
        "notes": [HYPERBOLIC_NOTE] if cfg.family == "hyperbolic" else [],
    }
    return report


def _emit_json(report: dict, path: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_verify(cfg: RunConfig, json_path: Optional[str], seed: int, tol_scale: float) -> int:
    n = cfg.single("n")
    tau = cfg.single("tau")
    m = cfg.single("m")
    spec, s = _build_structure(cfg, n, tau, m)
    points = sample_points(s.chart, cfg.points, seed)
    tols = _scaled(cfg.tolerances, tol_scale)
    start = time.perf_counter()
    entries = run_pointwise_suite(s, points, tols, ids=cfg.suite)
    report = _report_skeleton(cfg, seed)
    report["pointwise"] = [
        {
            "id": e.identity_id,
            "formula": e.formula,
            "n_points": e.n_points,
            "max_residual": e.max_residual,
            "mean_residual": e.mean_residual,
            "tolerance": e.tolerance,
            "pass": e.passed,
        }
        for e in sorted(entries, key=lambda e: e.identity_id)
    ]
    report["integrals"] = []
    report["overall_pass"] = all(e.passed for e in entries)
    report["wall_time_s"] = time.perf_counter() - start
    _emit_json(report, json_path)
    return 0 if report["overall_pass"] else 1


def cmd_integrate(cfg: RunConfig, json_path: Optional[str], seed: int, tol_scale: float) -> int:
    n = cfg.single("n")
    tau = cfg.single("tau")
    m = cfg.single("m")
    if cfg.family != "sphere":
        raise ConfigError(
            f"the integral suite needs a compact model (sphere); family is {cfg.family!r}"
        )
    if len(cfg.grid) != n:
        raise ConfigError(
            f"'grid' needs {n} entries for a {n}-sphere, got {cfg.grid}"
        )
    spec = ModelSpec(
        cfg.family, n, tau=tau, m=m, radius=cfg.r, chart_kind="polar", v_axis=cfg.v_axis
    )
    s = example_structure(spec)
    tols = _scaled(cfg.tolerances, tol_scale)
    start = time.perf_counter()
    grid = make_sphere_grid(s.chart, cfg.grid)
    rows = run_integral_suite(grid, s, tols["integral"])
    report = _report_skeleton(cfg, seed)
    report["pointwise"] = []
    report["integrals"] = sorted(rows, key=lambda r: r["id"])
    report["overall_pass"] = all(r["pass"] for r in rows)
    report["wall_time_s"] = time.perf_counter() - start
    _emit_json(report, json_path)
    return 0 if report["overall_pass"] else 1


def cmd_scan(cfg: RunConfig, csv_path: Optional[str], seed: int, tol_scale: float) -> int:
    combos = [
        (n, m, tau) for n in cfg.n_list for m in cfg.m_list for tau in cfg.tau_list
    ]
    if not combos:
        raise ConfigError("empty parameter sweep")
    tols = _scaled(cfg.tolerances, tol_scale)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "m", "tau", "identity", "max_residual", "pass"])
    all_pass = True
    for n, m, tau in combos:
        spec, s = _build_structure(cfg, n, tau, m)
        points = sample_points(s.chart, cfg.points, seed)
        for e in run_pointwise_suite(s, points, tols, ids=cfg.suite):
            writer.writerow(
                [n, f"{m:g}", f"{tau:g}", e.identity_id,
                 f"{e.max_residual:.6e}", str(e.passed).lower()]
            )
            all_pass = all_pass and e.passed
    text = buf.getvalue()
    if csv_path:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all_pass else 1


def cmd_catalog() -> int:
    entries = [
        {
            "id": info.identity_id,
            "formula": info.formula,
            "orders": {"g": info.orders["g"], "f": info.orders["f"],
                       "lambda": info.orders["lambda"]},
            "order_class": info.order_class,
            "kind": info.kind,
            "needs_finite_m": info.needs_finite_m,
            "needs_einstein_base": info.needs_einstein_base,
            "min_dim": info.min_dim,
        }
        for info in CATALOG
    ]
    sys.stdout.write(json.dumps(entries, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gqem",
        description="Verification suites for generalized quasi-Einstein model structures",
    )
    parser.add_argument("command", choices=["verify", "integrate", "scan", "catalog"])
    parser.add_argument("--config", help="path to a flat key=value config file")
    parser.add_argument("--json", help="write the JSON report here (default: stdout)")
    parser.add_argument("--csv", help="write the scan CSV here (default: stdout)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument(
        "--tol-scale", type=float, default=1.0, help="multiply every tolerance"
    )
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "catalog":
        return cmd_catalog()
    if not args.config:
        print(f"error: command '{args.command}' needs --config", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        seed = cfg.seed if args.seed is None else args.seed
        if args.command == "verify":
            return cmd_verify(cfg, args.json, seed, args.tol_scale)
        if args.command == "integrate":
            return cmd_integrate(cfg, args.json, seed, args.tol_scale)
        return cmd_scan(cfg, args.csv, seed, args.tol_scale)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
