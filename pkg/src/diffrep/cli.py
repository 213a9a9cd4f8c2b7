"""Command-line front end.

::

    python -m diffrep eval --alpha 0.5 --f const --n 4096 --m 40
    python -m diffrep convergence --alpha 0.5 --f poly:1 --n 64,128,256,512 --stepper be
    python -m diffrep kernel --alpha 0.5 --t 1 --omega-min -12 --omega-max 12
    python -m diffrep nodes --alpha 0.5 --m 2

Every subcommand writes CSV with a header row. Settings may also come from a
JSON file given by ``--config``; flags given on the command line win.

Exit codes: 0 on success, 1 on a numerical failure, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from typing import Any, Sequence

import numpy as np

from diffrep.engine import Stepper, TimeGrid, evaluate_on_grid
from diffrep.errors import DiffrepError
from diffrep.fractional import make_order, rl_power_closed_form
from diffrep.oracle import builtin_source, phi_direct, rl_direct
from diffrep.quadrature import build_diffusive_rule
from diffrep import transforms

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2

DEFAULTS: dict[str, Any] = {
    "transform": "exp",
    "sigma": 1.0,
    "rho": 1.0,
    "f": "const",
    "a": 0.0,
    "b": 1.0,
    "n": [1024],
    "m": [40],
    "stepper": "trap",
    "tol": 1.0e-12,
    "out": None,
    "error_norm": "final",
    "timing": True,
    "t": None,
    "omega_min": -12.0,
    "omega_max": 12.0,
    "omega_count": 49,
}

# config-file spellings accepted besides the flag names
_CONFIG_ALIASES = {
    "f_tag": "f",
    "N_list": "n",
    "M_list": "m",
    "N": "n",
    "M": "m",
    "M_half": "m",
    "output_path": "out",
}


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults stay None so that a config file can fill the gaps
    common.add_argument("--config", help="JSON file with settings")
    common.add_argument("--alpha", type=float)
    common.add_argument("--transform", choices=["exp", "square", "power", "tan", "rational"])
    common.add_argument("--sigma", type=float, help="rational transform exponent")
    common.add_argument("--rho", type=float, help="rational transform exponent")
    common.add_argument("--f", help="const, poly:<beta>, sin, cos, exp or zero")
    common.add_argument("--a", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--n", type=_int_list, help="grid intervals, comma-separated")
    common.add_argument("--m", type=_int_list, help="M_half, comma-separated")
    common.add_argument("--stepper", choices=["be", "trap"])
    common.add_argument("--tol", type=float, help="oracle tolerance")
    common.add_argument("--out", help="output file (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="diffrep",
        description="Riemann-Liouville integrals via diffusive representations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="evaluate on a uniform grid")

    conv = sub.add_parser("convergence", parents=[common], help="error and EOC table")
    conv.add_argument(
        "--error-norm",
        dest="error_norm",
        choices=["final", "max"],
        help="relative error at t=b (default) or maximum over the grid",
    )
    conv.add_argument(
        "--no-timing", dest="timing", action="store_false", default=None,
        help="leave runtime_ns empty so output is byte-reproducible",
    )

    kern = sub.add_parser("kernel", parents=[common], help="dump |phi(t, omega)|")
    kern.add_argument("--t", type=float, help="time (default: b)")
    kern.add_argument("--omega-min", dest="omega_min", type=float)
    kern.add_argument("--omega-max", dest="omega_max", type=float)
    kern.add_argument("--omega-count", dest="omega_count", type=int)

    sub.add_parser("nodes", parents=[common], help="dump the quadrature rule")
    return parser


def load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError("config file must hold a JSON object")

    cfg: dict[str, Any] = {}
    for key, value in raw.items():
        key = _CONFIG_ALIASES.get(key, key).replace("-", "_")
        if key not in DEFAULTS and key != "alpha":
            raise UsageError(f"unknown config key {key!r}")
        if key in ("n", "m"):
            value = [value] if isinstance(value, int) else value
            if not (isinstance(value, list) and all(isinstance(v, int) for v in value)):
                raise UsageError(f"config key {key!r} must be an integer or a list of them")
        cfg[key] = value
    return cfg


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    cfg.update(load_config(args.config))
    for key, value in vars(args).items():
        if key not in ("config", "command") and value is not None:
            cfg[key] = value
    if cfg.get("alpha") is None:
        raise UsageError("--alpha is required")
    return cfg


def _setup(cfg: dict[str, Any]):
    order = make_order(float(cfg["alpha"]))
    spec = transforms.from_name(
        cfg["transform"], sigma=float(cfg["sigma"]), rho=float(cfg["rho"]), alpha=order.alpha
    )
    f = builtin_source(cfg["f"], float(cfg["a"]))
    if not float(cfg["b"]) > float(cfg["a"]):
        raise UsageError(f"need b > a, got a={cfg['a']!r}, b={cfg['b']!r}")
    return order, spec, f


def _single(cfg: dict[str, Any], key: str) -> int:
    values = cfg[key]
    if len(values) != 1:
        raise UsageError(f"--{key} takes a single value for this command")
    if values[0] < 1:
        raise UsageError(f"--{key} must be positive: {values[0]}")
    return values[0]


def _fmt(x: float) -> str:
    return repr(float(x))


# {{{ commands


def cmd_eval(cfg: dict[str, Any]) -> list[list[str]]:
    order, spec, f = _setup(cfg)
    n, m = _single(cfg, "n"), _single(cfg, "m")
    grid = TimeGrid.uniform_grid(float(cfg["a"]), float(cfg["b"]), n)
    values = evaluate_on_grid(order, spec, f, grid, m, Stepper.parse(cfg["stepper"]))
    rows = [["t", "value"]]
    rows.extend([_fmt(t), _fmt(v)] for t, v in zip(grid.points, values))
    return rows


def _oracle(order, f, a: float, tol: float):
    if f.is_zero:
        return lambda t: 0.0
    if f.power is not None:
        return lambda t: rl_power_closed_form(order, f.power, a, t)
    return lambda t: rl_direct(order, f, a, t, tol)


def grid_error(values, exact, norm: str) -> float:
    """Relative error, absolute where the exact value is below 1e-14."""
    values = np.asarray(values, dtype=float)
    exact = np.asarray(exact, dtype=float)
    diff = np.abs(values - exact)
    small = np.abs(exact) < 1.0e-14
    err = np.where(small, diff, diff / np.where(small, 1.0, np.abs(exact)))
    return float(err[-1] if norm == "final" else err.max())


def cmd_convergence(cfg: dict[str, Any]) -> list[list[str]]:
    order, spec, f = _setup(cfg)
    n_list, m_list = list(cfg["n"]), list(cfg["m"])
    if len(n_list) < 3:
        raise UsageError("convergence needs at least three grid sizes in --n")
    for name, lst in (("n", n_list), ("m", m_list)):
        if any(v < 1 for v in lst) or any(y <= x for x, y in zip(lst, lst[1:])):
            raise UsageError(f"--{name} must be positive and strictly increasing")
    a, b, tol = float(cfg["a"]), float(cfg["b"]), float(cfg["tol"])
    norm = cfg["error_norm"]
    if norm not in ("final", "max"):
        raise UsageError(f"unknown error norm {norm!r}")
    stepper = Stepper.parse(cfg["stepper"])
    exact_at = _oracle(order, f, a, tol)
    cache: dict[float, float] = {}

    def exact(t: float) -> float:
        if t not in cache:
            cache[t] = exact_at(t)
        return cache[t]

    rows = [["N", "M", "stepper", "max_rel_error", "eoc", "runtime_ns"]]
    for m in m_list:
        prev = None
        for n in n_list:
            grid = TimeGrid.uniform_grid(a, b, n)
            start = time.perf_counter_ns()
            values = evaluate_on_grid(order, spec, f, grid, m, stepper)
            elapsed = time.perf_counter_ns() - start

            pts = grid.points if norm == "max" else grid.points[-1:]
            err = grid_error(values[-pts.size:], [exact(float(t)) for t in pts], norm)
            eoc = math.nan
            if prev is not None and prev[1] > 0 and err > 0:
                eoc = math.log(prev[1] / err) / math.log(n / prev[0])
            prev = (n, err)
            rows.append([
                str(n), str(m), stepper.value, _fmt(err), _fmt(eoc),
                str(elapsed) if cfg["timing"] else "",
            ])
    return rows


def cmd_kernel(cfg: dict[str, Any]) -> list[list[str]]:
    order, spec, f = _setup(cfg)
    a = float(cfg["a"])
    t = float(cfg["b"] if cfg["t"] is None else cfg["t"])
    if t < a:
        raise UsageError(f"t={t!r} lies before a={a!r}")
    count = int(cfg["omega_count"])
    if count < 1:
        raise UsageError("--omega-count must be positive")
    lo, hi = float(cfg["omega_min"]), float(cfg["omega_max"])
    if count > 1 and not hi > lo:
        raise UsageError("need omega-max > omega-min")
    omegas = np.linspace(lo, hi, count)
    lam = transforms.psi(spec, omegas)  # validates the domain first

    tol = float(cfg["tol"])
    rows = [["omega", "psi", "phi_abs"]]
    for w, p in zip(omegas, np.atleast_1d(lam)):
        phi = phi_direct(order, spec, f, a, t, float(w), tol)
        rows.append([_fmt(w), _fmt(p), _fmt(abs(phi))])
    return rows


def cmd_nodes(cfg: dict[str, Any]) -> list[list[str]]:
    order, spec, _ = _setup(cfg)
    m = _single(cfg, "m")
    rule = build_diffusive_rule(order, spec, m, float(cfg["b"]) - float(cfg["a"]))
    lam = np.atleast_1d(transforms.psi(spec, rule.nodes))
    rows = [["m", "omega", "weight", "psi", "lambda_stiffness"]]
    for i, (w, wt, p) in enumerate(zip(rule.nodes, rule.weights, lam), start=1):
        rows.append([str(i), _fmt(w), _fmt(wt), _fmt(p), _fmt(p)])
    return rows


COMMANDS = {
    "eval": cmd_eval,
    "convergence": cmd_convergence,
    "kernel": cmd_kernel,
    "nodes": cmd_nodes,
}


# }}}


def write_csv(rows: list[list[str]], path: str | None, stream=None) -> None:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    if path is None:
        (stream or sys.stdout).write(buf.getvalue())
    else:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    try:
        cfg = resolve(args)
        rows = COMMANDS[args.command](cfg)
        write_csv(rows, cfg["out"])
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DiffrepError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
