"""Command-line interface: ``hypma {solve,convergence,residual,trace}``.

Every option can also come from a ``--config`` file of ``key = value`` lines
(keys as the long flag names, dashes or underscores); flags given on the
command line win. Exit status is 0 on success, 1 when the computation fails
and 2 for invalid usage or configuration.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .boundary import classification_table
from .metrics import VARIABLES, convergence_study, global_error
from .problem import BUILTINS, builtin
from .residual import residual_map
from .solver import DEFAULT_GAMMA, SolutionField, solve, trace_characteristic, uniform_y, western_starts
from .stepper import METHODS

DEFAULTS = {
    "case": "default",
    "method": "rk4",
    "spline_order": 5,
    "n_y": 201,
    "gamma": DEFAULT_GAMMA,
    "output_dir": ".",
    "n_ys": "51,101,201,401",
    "jobs": 1,
    "family": "both",
    "west_starts": 7,
}


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value file; command-line flags override it")
    p.add_argument("--case", choices=sorted(BUILTINS), default=None)
    p.add_argument("--method", choices=METHODS, default=None)
    p.add_argument("--spline-order", type=int, default=None, help="B-spline order (degree + 1), default 5")
    p.add_argument("--n-y", type=int, default=None, help="grid points in y, default 201")
    p.add_argument("--gamma", type=float, default=None, help="step safety factor in (0, 1], default 0.95")
    p.add_argument("-o", "--output-dir", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypma", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="march one case and write field.csv and meta.json")
    _common(p)

    p = sub.add_parser("convergence", help="refinement study: convergence.csv and orders.json")
    _common(p)
    p.add_argument("--n-ys", default=None, help="ascending comma-separated N_y list, default 51,101,201,401")
    p.add_argument("--jobs", type=int, default=None, help="parallel solves")

    p = sub.add_parser("residual", help="per-cell residual map: residual.csv")
    _common(p)
    p.add_argument("--from-exact", action="store_true", default=None, help="evaluate on the exact solution")

    p = sub.add_parser("trace", help="characteristic polylines: one CSV per start and family")
    _common(p)
    p.add_argument("--start", action="append", default=None, metavar="X,Y", help="start point (repeatable)")
    p.add_argument("--west-starts", type=int, default=None, help="equidistant starts on the initial strip, default 7")
    p.add_argument("--family", choices=("alpha", "beta", "both"), default=None)

    p = sub.add_parser("classify", help="boundary classification at edge midpoints")
    p.add_argument("--config", help="key = value file")
    p.add_argument("--case", choices=sorted(BUILTINS), default=None)
    return parser


def read_config(path) -> dict:
    text = Path(path).read_text()
    cp = configparser.ConfigParser()
    cp.read_string("[run]\n" + text)
    return {k.replace("-", "_"): v for k, v in cp["run"].items()}


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags, then validate."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            cfg.update(read_config(args.config))
        except (OSError, configparser.Error) as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "command"):
            cfg[k] = v
    cfg["command"] = args.command
    return validate(cfg)


def _as_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


def validate(cfg: dict) -> dict:
    try:
        cfg["n_y"] = int(cfg["n_y"])
        cfg["spline_order"] = int(cfg["spline_order"])
        cfg["gamma"] = float(cfg["gamma"])
        cfg["jobs"] = int(cfg["jobs"])
        cfg["west_starts"] = int(cfg["west_starts"])
        ns = cfg["n_ys"]
        cfg["n_ys"] = [int(v) for v in (ns.split(",") if isinstance(ns, str) else ns)]
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration value: {exc}") from exc
    cfg["from_exact"] = _as_bool(cfg.get("from_exact", False))
    if cfg["case"] not in BUILTINS:
        raise UsageError(f"unknown case {cfg['case']!r}; choose from {sorted(BUILTINS)}")
    if cfg["method"] not in METHODS:
        raise UsageError(f"unknown method {cfg['method']!r}; choose from {list(METHODS)}")
    if cfg["spline_order"] < 2:
        raise UsageError("spline-order must be at least 2")
    if not 0 < cfg["gamma"] <= 1:
        raise UsageError("gamma must lie in (0, 1]")
    least = 2 * cfg["spline_order"] + 3
    for n in [cfg["n_y"]] + (cfg["n_ys"] if cfg["command"] == "convergence" else []):
        if n < least:
            raise UsageError(f"n-y={n} too small for spline order {cfg['spline_order']} (need >= {least})")
    if any(b <= a for a, b in zip(cfg["n_ys"], cfg["n_ys"][1:])):
        raise UsageError("n-ys must be strictly ascending")
    if cfg["family"] not in ("alpha", "beta", "both"):
        raise UsageError("family must be alpha, beta or both")
    if cfg["jobs"] < 1:
        raise UsageError("jobs must be positive")
    starts = cfg.get("start")
    if isinstance(starts, str):
        starts = [s for s in starts.split(";") if s.strip()]
    if starts:
        try:
            cfg["start"] = [tuple(float(c) for c in s.split(",")) for s in starts]
        except ValueError as exc:
            raise UsageError(f"start points must look like X,Y: {exc}") from exc
        if any(len(s) != 2 for s in cfg["start"]):
            raise UsageError("start points must look like X,Y")
    else:
        cfg["start"] = None
    return cfg


def _echo(cfg: dict) -> dict:
    keys = ("case", "method", "spline_order", "n_y", "gamma")
    return {k: cfg[k] for k in keys}


def _g(v: float) -> str:
    return f"{v + 0.0:.17g}"


def _out(cfg) -> Path:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_field_csv(field: SolutionField, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "x", "y", "u", "p", "q", "a", "b"])
        for i in range(field.n_x):
            xs = _g(field.x[i])
            for j in range(field.n_y):
                w.writerow(
                    [i + 1, j + 1, xs, _g(field.y[j])]
                    + [_g(getattr(field, k)[i, j]) for k in VARIABLES]
                )


def _solve(cfg):
    problem = builtin(cfg["case"])
    start = time.perf_counter()
    field = solve(problem, cfg["n_y"], cfg["method"], cfg["spline_order"], cfg["gamma"])
    return problem, field, time.perf_counter() - start


def cmd_solve(cfg) -> int:
    out = _out(cfg)
    problem, field, wall = _solve(cfg)
    write_field_csv(field, out / "field.csv")
    meta = {
        "config": _echo(cfg),
        "n_x": field.n_x,
        "wall_time": wall,
        "created": datetime.now(timezone.utc).isoformat(),
        "front_crossings": field.crossings,
    }
    if problem.exact is None:
        meta["note"] = "no exact solution"
    else:
        meta["errors"] = {}
        for v in VARIABLES:
            g = global_error(field, problem.exact, v)
            meta["errors"][f"E_{v}"] = g.unscaled
            meta["errors"][f"E_{v}_scaled"] = g.scaled
    _write_json(out / "meta.json", meta)
    print(f"wrote {out / 'field.csv'} ({field.n_x} x {field.n_y})")
    return 0


def cmd_convergence(cfg) -> int:
    out = _out(cfg)
    problem = builtin(cfg["case"])
    record = convergence_study(problem, cfg["n_ys"], cfg["method"], cfg["spline_order"], cfg["gamma"], cfg["jobs"])
    record.to_csv(out / "convergence.csv")
    _write_json(out / "orders.json", {"config": {**_echo(cfg), "n_ys": cfg["n_ys"]}, "orders": record.orders()})
    for name, slope in record.orders().items():
        if slope is not None and not name.endswith("_scaled"):
            print(f"{name:6s} order {slope:.3f}")
    return 0


def cmd_residual(cfg) -> int:
    out = _out(cfg)
    problem = builtin(cfg["case"])
    if cfg["from_exact"]:
        problem.require_exact()
        y = uniform_y(problem, cfg["n_y"])
        h_y = y[1] - y[0]
        d = problem.domain
        n_x = max(3, int(round((d.x_max - d.x_min) / h_y)) + 1)
        field = SolutionField.from_exact(problem, np.linspace(d.x_min, d.x_max, n_x), y)
    else:
        problem, field, _ = _solve(cfg)
    res = residual_map(field, problem.f)
    res.to_csv(out / "residual.csv")
    i, j = res.argmax(1)
    meta = {
        "config": {**_echo(cfg), "from_exact": cfg["from_exact"]},
        "n_x": field.n_x,
        "max_eps1": res.max_eps1,
        "max_eps2": res.max_eps2,
        "argmax_eps1": [i, j],
        "created": datetime.now(timezone.utc).isoformat(),
    }
    _write_json(out / "residual_meta.json", meta)
    print(f"max eps1 {res.max_eps1:.3e} at cell ({i}, {j}); max eps2 {res.max_eps2:.3e}")
    return 0


def cmd_trace(cfg) -> int:
    problem = builtin(cfg["case"])
    d = problem.domain
    starts = cfg["start"]
    if starts:
        for s in starts:
            if not d.contains(*s):
                raise UsageError(f"trace start outside domain: {s}")
    out = _out(cfg)
    _, field, _ = _solve(cfg)
    if not starts:
        starts = western_starts(field, cfg["west_starts"])
    families = ("alpha", "beta") if cfg["family"] == "both" else (cfg["family"],)
    for k, s in enumerate(starts, start=1):
        for fam in families:
            poly = trace_characteristic(field, s, fam)
            path = out / f"trace_{k:02d}_{fam}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["x", "y"])
                for x, y in poly:
                    w.writerow([_g(x), _g(y)])
    print(f"wrote {len(starts) * len(families)} polylines to {out}")
    return 0


def cmd_classify(cfg) -> int:
    for label, x, y, c in classification_table(builtin(cfg["case"])):
        needs = " and ".join(c.prescribe) or "none"
        print(f"{label:8s} ({x:.4g}, {y:.4g})  alpha {c.alpha.value:9s} beta {c.beta.value:9s} prescribe {needs}")
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "convergence": cmd_convergence,
    "residual": cmd_residual,
    "trace": cmd_trace,
    "classify": cmd_classify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hypma: error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"hypma: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"hypma: {exc}", file=sys.stderr)
        return 1
