"""Command-line front end: echo traces, single yields, sweeps, presets, checks.

Configuration is a flat key=value text file plus --set overrides; axes
for the sweep subcommand are comma-separated value lists on any of the
sweepable parameters (axis order is the canonical B, theta, T, k_S, N,
g0).  Thread count comes from --threads, the COMPASS_THREADS
environment variable, or the core count, in that order; results never
depend on it.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .fermion_echo import echo_series
from .model import EnvironmentParams, FieldConfig, derive_couplings
from .sweep import (
    AXIS_NAMES,
    SweepConfigError,
    SweepSpec,
    preset_fig2,
    preset_fig3,
    render_csv,
    run_sweep,
    write_csv,
)
from .validation import run_check
from .yield_engine import QuadratureConfig

_DEFAULTS = {
    "B": "0.9",
    "theta": "0.0",
    "T": "0.0",
    "k_S": "0.1",
    "N": "1000",
    "g0": "1.0",
    "J": "1.0",
    "K_c": "3",
    "engine": "auto",
    "outputs": "phi_s",
    "rel_tol": "1e-6",
    "fd_step": "1e-3",
    "t_max": "20.0",
    "points": "401",
    "n_B": "61",
    "n_theta": "",
}


def _parse_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SweepConfigError(f"{path}:{lineno}", f"expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def _resolve_settings(args) -> dict[str, str]:
    settings = dict(_DEFAULTS)
    if args.config:
        settings.update(_parse_config_file(args.config))
    for item in args.set or []:
        if "=" not in item:
            raise SweepConfigError("--set", f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        settings[key.strip()] = value.strip()
    return settings


def _scalar(settings: dict[str, str], key: str, kind=float):
    raw = settings[key]
    if "," in raw:
        raise SweepConfigError(key, "a single value is required here, got a list")
    try:
        return kind(raw)
    except ValueError as exc:
        raise SweepConfigError(key, f"cannot parse {raw!r}") from exc


def _values(settings: dict[str, str], key: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in settings[key].split(",") if part.strip())
    except ValueError as exc:
        raise SweepConfigError(key, f"cannot parse {settings[key]!r}") from exc


def _point_params(settings) -> dict:
    return {
        "B": _scalar(settings, "B"),
        "theta": _scalar(settings, "theta"),
        "T": _scalar(settings, "T"),
        "k_S": _scalar(settings, "k_S"),
        "N": int(_scalar(settings, "N", float)),
        "g0": _scalar(settings, "g0"),
        "J": _scalar(settings, "J"),
    }


def _quadrature(settings) -> QuadratureConfig:
    return QuadratureConfig(rel_tol=_scalar(settings, "rel_tol"))


def _spec_from_settings(settings, outputs=None) -> SweepSpec:
    axes = []
    fixed = {}
    for name in AXIS_NAMES:
        vals = _values(settings, name)
        if len(vals) > 1:
            axes.append((name, vals if name != "N" else tuple(int(v) for v in vals)))
        else:
            fixed[name] = int(vals[0]) if name == "N" else vals[0]
    fixed["J"] = _scalar(settings, "J")
    outputs = outputs or tuple(
        part.strip() for part in settings["outputs"].split(",") if part.strip()
    )
    return SweepSpec(
        axes=tuple(axes),
        fixed=fixed,
        outputs=outputs,
        quadrature=_quadrature(settings),
        engine=settings["engine"],
        fd_step=_scalar(settings, "fd_step"),
    )


def _cmd_echo(args) -> int:
    settings = _resolve_settings(args)
    p = _point_params(settings)
    couplings = derive_couplings(
        FieldConfig(B=p["B"], theta=p["theta"]),
        EnvironmentParams(N=p["N"], J=p["J"], g0=p["g0"]),
    )
    t_max = _scalar(settings, "t_max")
    points = int(_scalar(settings, "points", float))
    series = echo_series(p["N"], p["J"], couplings, p["T"], np.linspace(0.0, t_max, points))
    lines = ["t,L"] + [f"{repr(float(t))},{repr(float(v))}"
                       for t, v in zip(series.times, series.values)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_bytes(text.encode("utf-8"))
        print(f"wrote {args.out} ({points} samples)")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_yield(args) -> int:
    settings = _resolve_settings(args)
    spec = _spec_from_settings(settings)
    if spec.axes:
        raise SweepConfigError("axes", "yield takes single values; use `compass sweep` for lists")
    table = run_sweep(spec, threads=args.threads)
    row = table.rows[0]
    print(
        f"phi_s = {row['phi_s']!r} +/- {row['phi_s_err']!r} "
        f"(lambda = {row['lambda']!r}, engine = {row['engine']}, status = {row['status']})"
    )
    if args.out:
        write_csv(table, args.out)
        print(f"wrote {args.out}")
    return 0 if row["status"] == "ok" else 1


def _cmd_sweep(args) -> int:
    settings = _resolve_settings(args)
    spec = _spec_from_settings(settings)
    table = run_sweep(spec, threads=args.threads)
    if args.out:
        write_csv(table, args.out)
        print(f"wrote {args.out} ({len(table.rows)} rows)")
    else:
        sys.stdout.write(render_csv(table).decode("utf-8"))
    failed = sum(1 for r in table.rows if r["status"] != "ok")
    if failed:
        print(f"{failed} of {len(table.rows)} rows failed", file=sys.stderr)
    return 0


def _cmd_fig2(args) -> int:
    settings = _resolve_settings(args)
    n_theta = int(_scalar(settings, "n_theta", float)) if settings["n_theta"] else 61
    spec = preset_fig2(n_B=int(_scalar(settings, "n_B", float)), n_theta=n_theta)
    table = run_sweep(spec, threads=args.threads)
    out = args.out or "fig2.csv"
    write_csv(table, out)
    print(f"wrote {out} ({len(table.rows)} rows)")
    return 0


def _cmd_fig3(args) -> int:
    settings = _resolve_settings(args)
    n_theta = int(_scalar(settings, "n_theta", float)) if settings["n_theta"] else 121
    specs = preset_fig3(n_theta=n_theta)
    base = Path(args.out or "fig3.csv")
    suffixes = ("temperature", "rate")
    for spec, suffix in zip(specs, suffixes):
        table = run_sweep(spec, threads=args.threads)
        path = base.with_name(f"{base.stem}_{suffix}{base.suffix or '.csv'}")
        write_csv(table, path)
        print(f"wrote {path} ({len(table.rows)} rows)")
    return 0


def _cmd_check(args) -> int:
    results, code = run_check(quick=args.quick)
    for r in results:
        status = "ok " if r.passed else "FAIL"
        print(f"[{status}] {r.name}: max_dev={r.max_deviation:.3e}  {r.detail}")
    print("check passed" if code == 0 else "check FAILED")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compass",
        description="Radical-pair chemical compass simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "echo": (_cmd_echo, "echo trace L(t) at one parameter point"),
        "yield": (_cmd_yield, "product yield at one parameter point"),
        "sweep": (_cmd_sweep, "parameter-grid sweep from config axes"),
        "fig2": (_cmd_fig2, "yield over the (B, theta) plane preset"),
        "fig3": (_cmd_fig3, "direction sweeps preset (temperature and rate panels)"),
        "check": (_cmd_check, "oracle and closed-form validation suites"),
    }
    for name, (func, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a configuration key (repeatable)")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: COMPASS_THREADS or all cores)")
        if name == "check":
            p.add_argument("--quick", action="store_true",
                           help="smaller suites for a fast smoke check")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SweepConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
