"""Benchmark runs, RMSE / convergence-rate sweeps and CSV reporting.

A sweep refines a base (dx, dt) by factors r: dx / r and dt / r^2, so that
eta = dt / dx^2 is fixed. Variables reported are theta and u_1..u_d.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import analytic
from .errors import ConfigError
from .lattice import LatticeSpec
from .params import SchemeParams, solve_fourth_order
from .solver import GridSpec, MacroFields, MRTSolver, initialize, write_snapshot_csv

REPORT_COLUMNS = ("case", "epsilon", "dx", "dt", "variable", "rmse", "cr_pairwise", "cr_mean")
RATE_OVERRIDES = ("s0", "s1", "s21", "s22")
INTEGRALITY_TOL = 1e-9


def _fmt(v) -> str:
    return "" if v is None else format(float(v), ".10e")


# -- metrics -------------------------------------------------------------------

def rmse(numeric, exact) -> float:
    """sqrt(sum (psi - psi*)^2 / number of nodes)."""
    a = np.asarray(numeric, dtype=float)
    b = np.asarray(exact, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty field")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def convergence_rate(rmse_coarse: float, rmse_fine: float, ratio: float = 2.0) -> float:
    """log(rmse_coarse / rmse_fine) / log(ratio), ratio = dx_coarse / dx_fine."""
    if not (rmse_coarse > 0 and rmse_fine > 0):
        raise ValueError(f"RMSE values must be positive, got {rmse_coarse!r}, {rmse_fine!r}")
    if not ratio > 1:
        raise ValueError(f"refinement ratio must exceed 1, got {ratio!r}")
    return math.log(rmse_coarse / rmse_fine) / math.log(ratio)


# -- configuration -------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """One case at one epsilon, refined by ``levels`` relative to (dx, dt).

    Unset numeric fields are filled from the case defaults by ``resolved``.
    ``overrides`` replaces relaxation rates after the fourth-order solve,
    e.g. (("s22", 0.9),) for a detuned run.
    """

    case: str
    epsilon: float | None = None
    dx: float | None = None
    dt: float | None = None
    t_end: float | None = None
    levels: tuple[float, ...] | None = None
    out: str | None = None
    snapshot_times: tuple[float, ...] = ()
    threads: int = 1
    backend: str | None = None
    boundary_nodes: str = "interior"
    check_every: int = 64
    overrides: tuple[tuple[str, float], ...] = ()

    def resolved(self) -> "ExperimentConfig":
        if self.case not in analytic.case_names():
            raise ConfigError(f"unknown case {self.case!r}; known: {analytic.case_names()}")
        base = analytic.DEFAULTS.get(self.case)
        filled = {}
        for name in ("epsilon", "dx", "dt", "t_end", "levels"):
            value = getattr(self, name)
            if value is None:
                if base is None:
                    raise ConfigError(f"case {self.case!r} has no default for {name}")
                value = getattr(base, name)
            filled[name] = value
        filled["levels"] = tuple(float(r) for r in filled["levels"])
        if self.boundary_nodes not in ("interior", "closed"):
            raise ConfigError(f"boundary_nodes must be 'interior' or 'closed', got {self.boundary_nodes!r}")
        for key, _ in self.overrides:
            if key not in RATE_OVERRIDES:
                raise ConfigError(f"cannot override {key!r}; allowed: {RATE_OVERRIDES}")
        cfg = replace(self, **filled)
        cfg.resolutions()
        return cfg

    def resolutions(self) -> list[tuple[float, float, int]]:
        """(dx, dt, steps) for every level, validated for diffusive scaling."""
        if self.dx is None or self.dt is None or self.t_end is None or self.levels is None:
            raise ConfigError("resolve the config before asking for resolutions")
        if not self.levels or any(r <= 0 for r in self.levels):
            raise ConfigError(f"refinement levels must be positive, got {self.levels}")
        if list(self.levels) != sorted(set(self.levels)):
            raise ConfigError(f"refinement levels must be strictly increasing, got {self.levels}")
        pairs = [(self.dx / r, self.dt / r ** 2) for r in self.levels]
        return validate_resolutions(pairs, self.t_end)


def validate_resolutions(pairs, t_end: float) -> list[tuple[float, float, int]]:
    """Check fixed eta = dt/dx^2 and that t_end is a whole number of steps."""
    if not pairs:
        raise ConfigError("no resolutions given")
    eta0 = pairs[0][1] / pairs[0][0] ** 2
    out = []
    for dx, dt in pairs:
        if not (dx > 0 and dt > 0):
            raise ConfigError(f"dx and dt must be positive, got ({dx}, {dt})")
        eta = dt / dx ** 2
        if abs(eta - eta0) > 1e-9 * eta0:
            raise ConfigError(f"resolution (dx={dx}, dt={dt}) breaks diffusive scaling: "
                              f"dt/dx^2 = {eta} != {eta0}")
        steps = t_end / dt
        n = round(steps)
        if abs(n - steps) > INTEGRALITY_TOL * max(1.0, steps):
            raise ConfigError(f"t_end = {t_end} is not a whole number of steps of dt = {dt}")
        out.append((float(dx), float(dt), int(n)))
    return out


def levels_from_count(case: str, count: int) -> tuple[float, ...]:
    """First ``count`` refinement factors for a case (halving beyond the table)."""
    base = analytic.DEFAULTS[case].full_levels if case in analytic.DEFAULTS else (1.0,)
    if count < 1:
        raise ConfigError(f"level count must be positive, got {count}")
    if count <= len(base):
        return tuple(base[:count])
    if all(b == 2 ** k for k, b in enumerate(base)):
        return tuple(float(2 ** k) for k in range(count))
    raise ConfigError(f"case {case!r} defines only {len(base)} refinement levels")


CONFIG_KEYS = {
    "case": str, "epsilon": float, "dx": float, "dt": float, "t_end": float,
    "levels": str, "out": str, "snapshot_times": str, "threads": int, "backend": str,
    "boundary_nodes": str, "check_every": int,
}


def _parse_fraction(text: str) -> float:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def parse_levels(text, case: str) -> tuple[float, ...]:
    """'3' means three levels of the case; '1,1.5,2' lists factors."""
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    text = str(text).strip()
    if "," not in text and text.isdigit():
        return levels_from_count(case, int(text))
    return tuple(_parse_fraction(v) for v in text.split(",") if v.strip())


def parse_float_list(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    return tuple(_parse_fraction(v) for v in str(text).split(",") if v.strip())


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; '#' starts a comment. Keys use '_' or '-'."""
    values: dict[str, str] = {}
    lines = Path(path).read_text().splitlines()
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS and not key.startswith("override."):
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_config(file_values: dict[str, str] | None = None, **flags) -> ExperimentConfig:
    """Merge config-file values with flags (flags that are not None win)."""
    merged: dict[str, object] = dict(file_values or {})
    overrides = {k.split(".", 1)[1]: v for k, v in merged.items() if k.startswith("override.")}
    merged = {k: v for k, v in merged.items() if not k.startswith("override.")}
    for key, value in (flags.pop("overrides", None) or {}).items():
        overrides[key] = value
    for key, value in flags.items():
        if value is not None:
            merged[key] = value
    if "case" not in merged:
        raise ConfigError("no case given")
    case = str(merged["case"])
    kwargs: dict[str, object] = {"case": case}
    try:
        for key, value in merged.items():
            if key == "case":
                continue
            if key not in CONFIG_KEYS:
                raise ConfigError(f"unknown setting {key!r}")
            if key == "levels":
                kwargs[key] = parse_levels(value, case)
            elif key == "snapshot_times":
                kwargs[key] = parse_float_list(value)
            elif CONFIG_KEYS[key] is float:
                kwargs[key] = value if isinstance(value, float) else _parse_fraction(str(value))
            else:
                kwargs[key] = CONFIG_KEYS[key](value)
        kwargs["overrides"] = tuple(sorted((k, _parse_fraction(str(v))) for k, v in overrides.items()))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(**kwargs)


# -- running -------------------------------------------------------------------

@dataclass
class RunResult:
    dx: float
    dt: float
    steps: int
    params: SchemeParams
    macro: MacroFields = field(repr=False)
    rmse: dict[str, float]
    rmse_grad: dict[str, float]
    rmse_alternate: dict[str, float] = field(default_factory=dict)


def scheme_params(config: ExperimentConfig, dx: float, dt: float, d: int) -> SchemeParams:
    params = solve_fourth_order(config.epsilon, d, dx, dt)
    if config.overrides:
        params = params.with_rates(**dict(config.overrides))
    return params


def _physical_mask(case: analytic.AnalyticCase, grid: GridSpec, nodes: str):
    """Node selection where the RMSE is evaluated (all nodes unless even-extended)."""
    if not case.even_extension:
        return None
    masks = []
    for (lo, hi), x in zip(case.domain, grid.axes()):
        tol = 1e-9 * grid.dx
        if nodes == "interior":
            masks.append((x > lo + tol) & (x < hi - tol))
        else:
            masks.append((x > lo - tol) & (x < hi + tol))
    return np.ix_(*masks)


def _errors(macro: MacroFields, exact, sel) -> tuple[dict, dict]:
    theta, grad, u = exact
    pick = (lambda a: a) if sel is None else (lambda a: a[sel])
    d = macro.theta.ndim
    err = {"theta": rmse(pick(macro.theta), pick(theta))}
    for k in range(d):
        err[f"u{k + 1}"] = rmse(pick(macro.velocity[k]), pick(u[k]))
    gerr = {f"grad{k + 1}": rmse(pick(macro.grad_theta[k]), pick(grad[k])) for k in range(d)}
    return err, gerr


def _snapshot_path(out, t: float, kind: str) -> Path:
    out = Path(out)
    return out.with_name(f"{out.stem}_t{t:.6g}_{kind}.csv")


def write_profile_csv(path, case, grid: GridSpec, macro: MacroFields, t: float, axis: int = 0,
                      at: float = 0.25):
    """Line profile along ``axis`` through the node nearest ``at`` on the other axes.

    Columns: x, theta, theta_exact, theta_abs_err, then u_k, u_k_exact, u_k_abs_err.
    """
    d = grid.d
    axes = grid.axes()
    index = []
    for k in range(d):
        if k == axis:
            index.append(slice(None))
        else:
            index.append(int(np.argmin(np.abs(axes[k] - at))))
    index = tuple(index)
    coords = tuple(np.asarray(axes[k]) if k == axis else np.array([axes[k][index[k]]]) for k in range(d))
    coords = np.meshgrid(*coords, indexing="ij")
    th_ex, _, u_ex = case.fields(tuple(coords), t)
    line = tuple(0 if k != axis else slice(None) for k in range(d))
    th_ex, u_ex = th_ex[line], u_ex[(slice(None),) + line]
    x = axes[axis]
    keep = np.ones(x.shape, bool)
    if case.even_extension:
        lo, hi = case.domain[axis]
        keep = (x >= lo - 1e-9 * grid.dx) & (x <= hi + 1e-9 * grid.dx)
    th = macro.theta[index]
    u = [macro.velocity[k][index] for k in range(d)]
    header = ["x", "theta", "theta_exact", "theta_abs_err"]
    for k in range(d):
        header += [f"u{k + 1}", f"u{k + 1}_exact", f"u{k + 1}_abs_err"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for j in np.nonzero(keep)[0]:
            row = [x[j], th[j], th_ex[j], abs(th[j] - th_ex[j])]
            for k in range(d):
                row += [u[k][j], u_ex[k][j], abs(u[k][j] - u_ex[k][j])]
            w.writerow([format(float(v), ".16e") for v in row])


def run_case(config: ExperimentConfig, level: int = 0, snapshots: bool = False) -> RunResult:
    """Run one resolution of a resolved config to t_end and score it."""
    config = config.resolved()
    dx, dt, steps = config.resolutions()[level]
    spec = analytic.make_case(config.case, 1.0)
    params = scheme_params(config, dx, dt, spec.d)
    case = analytic.make_case(config.case, params.nu)
    grid = GridSpec.from_domain(case.periodic_domain, dx)
    lattice = LatticeSpec.build(case.d)
    coords = grid.coordinates()
    theta0, grad0, _ = case.fields(coords, 0.0)
    solver = MRTSolver(lattice, params, grid.shape, backend=config.backend,
                       nthreads=config.threads, check_every=config.check_every)
    solver.load(initialize(theta0, grad0, params, lattice))

    marks = []
    if snapshots and config.snapshot_times and config.out:
        for t in config.snapshot_times:
            n = t / dt
            if abs(n - round(n)) > INTEGRALITY_TOL * max(1.0, n) or round(n) > steps or t < 0:
                raise ConfigError(f"snapshot time {t} is not a step of dt = {dt} within [0, t_end]")
            marks.append((int(round(n)), t))
        marks.sort()
    done = 0
    for n, t in marks:
        solver.advance(n - done)
        done = n
        macro = solver.macro()
        write_profile_csv(_snapshot_path(config.out, t, "profile"), case, grid, macro, t)
        write_snapshot_csv(_snapshot_path(config.out, t, "field"), macro)
    solver.advance(steps - done)

    macro = solver.macro()
    exact = case.fields(coords, steps * dt)
    err, gerr = _errors(macro, exact, _physical_mask(case, grid, config.boundary_nodes))
    alt = {}
    if case.even_extension:
        other = "closed" if config.boundary_nodes == "interior" else "interior"
        alt, _ = _errors(macro, exact, _physical_mask(case, grid, other))
    return RunResult(dx, dt, steps, params, macro, err, gerr, alt)


@dataclass
class ConvergenceReport:
    case: str
    epsilon: float
    variables: tuple[str, ...]
    resolutions: list[tuple[float, float]]
    rmse: dict[str, list[float]]
    cr_pairwise: dict[str, list[float]]
    cr_mean: dict[str, float | None]
    rmse_grad: dict[str, list[float]] = field(default_factory=dict)
    rmse_alternate: dict[str, list[float]] = field(default_factory=dict)

    def rows(self):
        for i, (dx, dt) in enumerate(self.resolutions):
            for var in self.variables:
                cr = self.cr_pairwise[var][i - 1] if i > 0 else None
                yield (self.case, _fmt(self.epsilon), _fmt(dx), _fmt(dt), var,
                       _fmt(self.rmse[var][i]), _fmt(cr), _fmt(self.cr_mean[var]))


def _rates(values, dxs):
    out = []
    for i in range(1, len(values)):
        ratio = dxs[i - 1] / dxs[i]
        try:
            out.append(convergence_rate(values[i - 1], values[i], ratio))
        except ValueError:
            out.append(float("nan"))
    return out


def sweep_convergence(config: ExperimentConfig, progress=None) -> ConvergenceReport:
    """Run every resolution and collect RMSEs, pairwise CRs and mean CR."""
    config = config.resolved()
    res = config.resolutions()
    if len(res) < 2:
        raise ConfigError("a convergence sweep needs at least two resolutions")
    runs = []
    for level in range(len(res)):
        run = run_case(config, level, snapshots=level == len(res) - 1)
        runs.append(run)
        if progress is not None:
            progress(run)
    variables = tuple(runs[0].rmse)
    dxs = [r.dx for r in runs]
    table = {v: [r.rmse[v] for r in runs] for v in variables}
    pair = {v: _rates(table[v], dxs) for v in variables}
    mean = {v: float(np.mean(pair[v])) for v in variables}
    gvars = tuple(runs[0].rmse_grad)
    return ConvergenceReport(
        case=config.case, epsilon=float(config.epsilon), variables=variables,
        resolutions=[(r.dx, r.dt) for r in runs], rmse=table, cr_pairwise=pair, cr_mean=mean,
        rmse_grad={v: [r.rmse_grad[v] for r in runs] for v in gvars},
        rmse_alternate={v: [r.rmse_alternate[v] for r in runs] for v in runs[0].rmse_alternate},
    )


def single_report(config: ExperimentConfig, run: RunResult) -> ConvergenceReport:
    variables = tuple(run.rmse)
    return ConvergenceReport(
        case=config.case, epsilon=float(config.epsilon), variables=variables,
        resolutions=[(run.dx, run.dt)], rmse={v: [run.rmse[v]] for v in variables},
        cr_pairwise={v: [] for v in variables}, cr_mean={v: None for v in variables},
        rmse_grad={v: [x] for v, x in run.rmse_grad.items()},
        rmse_alternate={v: [x] for v, x in run.rmse_alternate.items()},
    )


def emit_report(reports, path) -> Path:
    """Write one or more reports as CSV, resolution-major and variable-minor."""
    if isinstance(reports, ConvergenceReport):
        reports = [reports]
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for report in reports:
            for row in report.rows():
                w.writerow(row)
    return path


def read_report(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def memory_estimate(config: ExperimentConfig) -> list[tuple[float, int, int]]:
    """(dx, cells, bytes) per level: two population buffers plus macro and exact fields."""
    config = config.resolved()
    spec = analytic.make_case(config.case, 1.0)
    q = 1 + 2 * spec.d ** 2
    out = []
    for dx, _, _ in config.resolutions():
        grid = GridSpec.from_domain(spec.periodic_domain, dx)
        cells = grid.ncells
        out.append((dx, cells, 8 * cells * (2 * q + 6 * spec.d + 6)))
    return out


def config_fields() -> tuple[str, ...]:
    return tuple(f.name for f in fields(ExperimentConfig))
