"""Parameter-grid sweep engine with deterministic CSV output.

A sweep is an ordered list of axes over the physical parameters
(B, theta, T, k_S, N, g0) plus fixed values for the rest; every grid
point is evaluated independently (product yield, optionally the
directional sensitivity), so failures poison single rows rather than
the sweep, and the worker count never changes the numbers: rows are
assembled in lexicographic axis order by a single writer.

CSV files are UTF-8 with LF line endings, full-precision repr floats
(round-trip exact), a fixed column set, and '#' metadata lines carrying
the engine, code version, and a hash of the resolved configuration; no
timestamps, so identical configurations give byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .ed_oracle import MAX_DENSE_N, EDEchoContext
from .fermion_echo import FermionEchoContext
from .model import EnvironmentParams, FieldConfig, derive_couplings
from .yield_engine import QuadratureConfig, product_yield, sensitivity

AXIS_NAMES = ("B", "theta", "T", "k_S", "N", "g0")
PARAM_NAMES = AXIS_NAMES + ("J",)
OUTPUT_NAMES = ("phi_s", "lambda_theta")
ENGINES = ("auto", "fermion", "ed")

CSV_COLUMNS = (
    "B", "theta", "T", "k_S", "N", "g0", "J",
    "lambda", "phi_s", "phi_s_err", "lambda_theta", "lambda_theta_err",
    "engine", "status",
)


class SweepConfigError(ValueError):
    """Invalid sweep configuration; `key` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition: ordered axes, fixed parameters, requested outputs."""

    axes: tuple[tuple[str, tuple[float, ...]], ...]
    fixed: dict
    outputs: tuple[str, ...] = ("phi_s",)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    engine: str = "auto"
    fd_step: float = 1e-3

    def __post_init__(self):
        names = [name for name, _ in self.axes]
        if len(set(names)) != len(names):
            raise SweepConfigError("axes", f"duplicate axis names in {names}")
        for name, values in self.axes:
            if name not in AXIS_NAMES:
                raise SweepConfigError(name, f"not a sweepable parameter {AXIS_NAMES}")
            if len(values) == 0:
                raise SweepConfigError(name, "empty axis")
        for key in self.fixed:
            if key not in PARAM_NAMES:
                raise SweepConfigError(key, f"unknown parameter (expected {PARAM_NAMES})")
        for name in PARAM_NAMES:
            if name not in names and name not in self.fixed:
                raise SweepConfigError(name, "parameter has neither an axis nor a fixed value")
            if name in names and name in self.fixed:
                raise SweepConfigError(name, "parameter is both an axis and fixed")
        for out in self.outputs:
            if out not in OUTPUT_NAMES:
                raise SweepConfigError(out, f"unknown output (expected {OUTPUT_NAMES})")
        if self.engine not in ENGINES:
            raise SweepConfigError("engine", f"must be one of {ENGINES}")
        # Domain checks over every value each parameter can take.
        for name in PARAM_NAMES:
            values = dict(self.axes).get(name, (self.fixed.get(name),))
            for v in values:
                self._check_domain(name, v)
        if self.engine == "fermion":
            for v in dict(self.axes).get("N", (self.fixed.get("N"),)):
                if int(v) % 2 != 0:
                    raise SweepConfigError("N", f"fermion engine needs even N, got {v}")

    @staticmethod
    def _check_domain(name: str, v) -> None:
        ok = {
            "B": lambda x: x >= 0,
            "theta": lambda x: 0 <= x <= math.pi / 2,
            "T": lambda x: x >= 0,
            "k_S": lambda x: x > 0,
            "N": lambda x: float(x).is_integer() and x >= 2,
            "g0": lambda x: x >= 0,
            "J": lambda x: x > 0,
        }[name](v)
        if not ok:
            raise SweepConfigError(name, f"value {v} outside the parameter domain")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(values) for _, values in self.axes)

    def grid_points(self) -> list[dict]:
        """All parameter dicts in lexicographic axis order."""
        points = []
        for combo in itertools.product(*(values for _, values in self.axes)):
            params = dict(self.fixed)
            params.update({name: v for (name, _), v in zip(self.axes, combo)})
            params["N"] = int(params["N"])
            points.append(params)
        return points

    def config_hash(self) -> str:
        parts = [f"axis:{name}=" + ",".join(repr(float(v)) for v in values)
                 for name, values in self.axes]
        parts += [f"fixed:{k}={self.fixed[k]!r}" for k in sorted(self.fixed)]
        parts.append("outputs=" + ",".join(self.outputs))
        parts.append(f"engine={self.engine}")
        parts.append(f"fd_step={self.fd_step!r}")
        q = self.quadrature
        parts.append(
            f"quadrature={q.rel_tol!r},{q.t_max_factor!r},"
            f"{q.min_points_per_period!r},{q.max_refinements!r}"
        )
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class SweepTable:
    """Flat result records (one per grid point) plus run metadata."""

    spec: SweepSpec
    rows: tuple[dict, ...]
    metadata: dict

    def __post_init__(self):
        expected = 1
        for n in self.spec.shape:
            expected *= n
        if len(self.rows) != expected:
            raise ValueError(f"row count {len(self.rows)} != grid size {expected}")


def _resolve_engine(engine: str, N: int) -> str:
    if engine == "fermion":
        return "fermion"
    if engine == "ed":
        if N > MAX_DENSE_N:
            raise ValueError(f"ed engine capped at N = {MAX_DENSE_N}, got {N}")
        return "ed"
    # auto: free fermions whenever the chain is even, dense oracle otherwise.
    if N % 2 == 0:
        return "fermion"
    if N <= MAX_DENSE_N:
        return "ed"
    raise ValueError(f"no engine for odd N = {N} > {MAX_DENSE_N}")


def _make_context(params: dict, engine: str):
    env = EnvironmentParams(N=params["N"], J=params["J"], g0=params["g0"])
    fieldcfg = FieldConfig(B=params["B"], theta=params["theta"])
    couplings = derive_couplings(fieldcfg, env)
    if engine == "fermion":
        return couplings, FermionEchoContext(params["N"], params["J"], couplings, T=params["T"])
    return couplings, EDEchoContext(params["N"], params["J"], couplings, T=params["T"])


def _point_yield(params: dict, engine: str, quadrature: QuadratureConfig):
    _, ctx = _make_context(params, engine)
    return product_yield(ctx.echo, params["k_S"], quadrature, max_frequency=ctx.max_frequency)


def evaluate_point(params: dict, spec: SweepSpec) -> dict:
    """One grid point -> one flat record; failures land in `status`."""
    row = {name: params[name] for name in PARAM_NAMES}
    row.update(
        {"lambda": math.nan, "phi_s": math.nan, "phi_s_err": math.nan,
         "lambda_theta": math.nan, "lambda_theta_err": math.nan,
         "engine": "", "status": "ok"}
    )
    try:
        engine = _resolve_engine(spec.engine, params["N"])
        row["engine"] = engine
        couplings, ctx = _make_context(params, engine)
        row["lambda"] = couplings.lam
        res = product_yield(ctx.echo, params["k_S"], spec.quadrature,
                            max_frequency=ctx.max_frequency)
        row["phi_s"] = float(res.phi_s)
        row["phi_s_err"] = float(res.estimated_error)
        if "lambda_theta" in spec.outputs:
            def phi_of_theta(theta: float):
                p = dict(params)
                p["theta"] = theta
                return _point_yield(p, engine, spec.quadrature)

            sens = sensitivity(phi_of_theta, params["theta"],
                               fd_step=spec.fd_step, richardson=False)
            row["lambda_theta"] = sens.lambda_theta
            row["lambda_theta_err"] = sens.estimated_error
    except Exception as exc:  # noqa: BLE001 - per-row isolation is the contract
        row["status"] = f"error: {exc}"
    return row


def _worker(args) -> dict:
    params, spec = args
    return evaluate_point(params, spec)


def resolve_threads(threads: int | None = None) -> int:
    """--threads argument, else COMPASS_THREADS, else all cores."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("COMPASS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, threads: int | None = None) -> SweepTable:
    """Evaluate every grid point; output is independent of the worker count."""
    points = spec.grid_points()
    n_workers = min(resolve_threads(threads), len(points))
    if n_workers <= 1:
        rows = [evaluate_point(p, spec) for p in points]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            chunk = max(1, len(points) // (8 * n_workers))
            rows = list(pool.map(_worker, ((p, spec) for p in points), chunksize=chunk))
    metadata = {
        "engine": spec.engine,
        "version": __version__,
        "config": spec.config_hash(),
    }
    return SweepTable(spec=spec, rows=tuple(rows), metadata=metadata)


def preset_fig2(n_B: int = 61, n_theta: int = 61, B_max: float = 2.0) -> SweepSpec:
    """Yield over the field magnitude/direction plane at T = 0.2.

    Fixed parameters: N = 1000, g0 = 1, k_S = 0.1, J = 1, T = 0.2.  The
    axis limits are defaults, not reference values: B up to 2 so the
    critical locus B cos(theta) = 1 crosses the plot.
    """
    return SweepSpec(
        axes=(
            ("B", tuple(np.linspace(0.0, B_max, n_B))),
            ("theta", tuple(np.linspace(0.0, math.pi / 2, n_theta))),
        ),
        fixed={"T": 0.2, "k_S": 0.1, "N": 1000, "g0": 1.0, "J": 1.0},
        outputs=("phi_s",),
        engine="fermion",
    )


def preset_fig3(
    n_theta: int = 121,
    temperatures: tuple[float, ...] = (0.01, 0.1, 0.2, 0.5),
    rates: tuple[float, ...] = (0.05, 0.1, 0.5),
) -> list[SweepSpec]:
    """Direction sweeps at B = 0.9: yield and sensitivity vs theta.

    Two specs: one varying temperature at k_S = 0.1, one varying the
    recombination rate at T = 0.01; both with N = 1000, g0 = 1, J = 1.
    The temperature and rate lists are implementation defaults (the
    reference plots do not print their legends' values).
    """
    theta_axis = tuple(np.linspace(0.0, math.pi / 2, n_theta))
    by_temperature = SweepSpec(
        axes=(("T", tuple(temperatures)), ("theta", theta_axis)),
        fixed={"B": 0.9, "k_S": 0.1, "N": 1000, "g0": 1.0, "J": 1.0},
        outputs=("phi_s", "lambda_theta"),
        engine="fermion",
    )
    by_rate = SweepSpec(
        axes=(("k_S", tuple(rates)), ("theta", theta_axis)),
        fixed={"B": 0.9, "T": 0.01, "N": 1000, "g0": 1.0, "J": 1.0},
        outputs=("phi_s", "lambda_theta"),
        engine="fermion",
    )
    return [by_temperature, by_rate]


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def render_csv(table: SweepTable) -> bytes:
    """Render a table to CSV bytes (UTF-8, LF, repr floats)."""
    buf = io.StringIO()
    for key in ("engine", "version", "config"):
        buf.write(f"# {key}={table.metadata[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in table.rows:
        writer.writerow([_format_cell(row[col]) for col in CSV_COLUMNS])
    return buf.getvalue().encode("utf-8")


def write_csv(table: SweepTable, path) -> None:
    """Write the table; identical tables produce byte-identical files."""
    try:
        with open(path, "wb") as fh:
            fh.write(render_csv(table))
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {path}: {exc}") from exc
