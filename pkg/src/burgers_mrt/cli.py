"""Command-line entry point: ``burgers-mrt <run|converge|lattice|params|analytic>``.

Exit codes: 0 success, 2 infeasible parameters, 3 divergence, 4 I/O error,
1 for bad configuration.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analytic, harness, kernels
from .errors import ConfigError, DivergenceError, InfeasibleParameterError, SingularDenominatorError
from .lattice import LatticeSpec, relaxation_classes, velocity_classes
from .params import residuals, solve_fourth_order
from .solver import GridSpec

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3, 4


def _override(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def _add_case_flags(p, with_levels):
    p.add_argument("--config", help="key = value file; explicit flags win")
    p.add_argument("--case", choices=analytic.case_names())
    p.add_argument("--epsilon", type=harness._parse_fraction)
    p.add_argument("--dx", type=harness._parse_fraction)
    p.add_argument("--dt", type=harness._parse_fraction)
    p.add_argument("--t-end", dest="t_end", type=harness._parse_fraction)
    if with_levels:
        p.add_argument("--levels", help="level count, or comma-separated refinement factors")
        p.add_argument("--full-table", action="store_true",
                       help="use every refinement level of the case (prints a memory estimate)")
    p.add_argument("--out", help="CSV report path (snapshots are written beside it)")
    p.add_argument("--threads", type=int)
    p.add_argument("--snapshot-times", dest="snapshot_times", help="comma-separated times")
    p.add_argument("--backend", choices=kernels.available())
    p.add_argument("--boundary-nodes", dest="boundary_nodes", choices=("interior", "closed"))
    p.add_argument("--check-every", dest="check_every", type=int)
    p.add_argument("--override", action="append", type=_override, default=[],
                   metavar="KEY=VALUE", help="replace a relaxation rate (s0, s1, s21, s22)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="burgers-mrt",
                                     description="Fourth-order MRT lattice Boltzmann solver for coupled Burgers' equations")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_case_flags(sub.add_parser("run", help="run one resolution of a case"), with_levels=False)
    _add_case_flags(sub.add_parser("converge", help="convergence sweep"), with_levels=True)

    p = sub.add_parser("lattice", help="dump velocities, moment matrix and weight classes")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--format", choices=("csv", "pretty"), default="pretty")
    p.add_argument("--out")

    p = sub.add_parser("params", help="print the fourth-order parameter set and its residuals")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--epsilon", type=harness._parse_fraction, required=True)
    p.add_argument("--dx", type=harness._parse_fraction, default=1.0)
    p.add_argument("--dt", type=harness._parse_fraction, default=1.0)

    p = sub.add_parser("analytic", help="sample a case's analytic fields to CSV")
    p.add_argument("--case", choices=analytic.case_names(), required=True)
    p.add_argument("--t", type=harness._parse_fraction, default=0.0)
    p.add_argument("--grid", type=int, default=64, help="nodes per axis")
    p.add_argument("--nu", type=harness._parse_fraction)
    p.add_argument("--epsilon", type=harness._parse_fraction,
                   help="derive nu from epsilon and the case's default dx, dt")
    p.add_argument("--out")
    return parser


def _config_from_args(args) -> harness.ExperimentConfig:
    file_values = harness.read_config_file(args.config) if args.config else None
    flags = {k: getattr(args, k, None) for k in ("case", "epsilon", "dx", "dt", "t_end", "out",
                                                   "threads", "snapshot_times", "backend",
                                                   "boundary_nodes", "check_every", "levels")}
    flags["overrides"] = dict(args.override)
    case = flags["case"] or (file_values or {}).get("case")
    if getattr(args, "full_table", False):
        if case not in analytic.DEFAULTS:
            raise ConfigError(f"no full table defined for case {case!r}")
        flags["levels"] = analytic.DEFAULTS[case].full_levels
    return harness.build_config(file_values, **flags)


def _check_out(path):
    # fail before a long run rather than after it
    if path:
        parent = Path(path).parent
        if not parent.is_dir():
            raise FileNotFoundError(f"output directory does not exist: {parent}")
        if not os.access(parent, os.W_OK):
            raise PermissionError(f"output directory is not writable: {parent}")


def _open_out(path):
    return open(path, "w", newline="") if path else contextlib.nullcontext(sys.stdout)


def _print_summary(report: harness.ConvergenceReport, out=sys.stdout):
    for i, (dx, dt) in enumerate(report.resolutions):
        cells = "  ".join(f"{v}={report.rmse[v][i]:.4e}" for v in report.variables)
        print(f"dx={dx:.6g} dt={dt:.6g}  {cells}", file=out)
    if len(report.resolutions) > 1:
        print("mean CR  " + "  ".join(f"{v}={report.cr_mean[v]:.4f}" for v in report.variables), file=out)


def cmd_run(args):
    cfg = _config_from_args(args).resolved()
    if len(cfg.levels) != 1:
        cfg = replace(cfg, levels=(cfg.levels[0],)).resolved()
    _check_out(cfg.out)
    run = harness.run_case(cfg, 0, snapshots=True)
    report = harness.single_report(cfg, run)
    _print_summary(report, sys.stderr if not cfg.out else sys.stdout)
    if cfg.out:
        harness.emit_report(report, cfg.out)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(harness.REPORT_COLUMNS)
        w.writerows(report.rows())
    return EXIT_OK


def cmd_converge(args):
    cfg = _config_from_args(args).resolved()
    _check_out(cfg.out)
    if args.full_table:
        for dx, cells, nbytes in harness.memory_estimate(cfg):
            print(f"memory estimate: dx={dx:.6g} cells={cells} ~{nbytes / 2 ** 20:.1f} MiB", flush=True)
    report = harness.sweep_convergence(cfg)
    _print_summary(report, sys.stderr if not cfg.out else sys.stdout)
    if cfg.out:
        harness.emit_report(report, cfg.out)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(harness.REPORT_COLUMNS)
        w.writerows(report.rows())
    return EXIT_OK


def cmd_lattice(args):
    lat = LatticeSpec.build(args.dim)
    _check_out(args.out)
    classes = velocity_classes(lat.velocities)
    rclass = relaxation_classes(lat.d)
    with _open_out(args.out) as fh:
        if args.format == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["section", "row"] + [f"c{j}" for j in range(lat.q)])
            for i, e in enumerate(lat.velocities):
                w.writerow(["velocity", i] + list(map(int, e)))
            for i, row in enumerate(lat.moment_matrix):
                w.writerow(["moment", i] + [int(v) for v in row])
            w.writerow(["weight_class", ""] + list(classes))
            w.writerow(["relaxation_class", ""] + list(map(int, rclass)))
        else:
            print(f"D{lat.d}Q{lat.q} lattice", file=fh)
            print("velocities (index: e, weight class):", file=fh)
            for i, e in enumerate(lat.velocities):
                print(f"  {i:3d}: {tuple(int(v) for v in e)}  {classes[i]}", file=fh)
            print("moment matrix rows (exponents, relaxation class):", file=fh)
            for i, row in enumerate(lat.moment_matrix):
                print(f"  {i:3d}: {tuple(lat.exponents[i])} s-class {int(rclass[i])}  "
                      + " ".join(f"{int(v):2d}" for v in row), file=fh)
            det = np.linalg.det(lat.moment_matrix.astype(float))
            print(f"det M = {det:.6g}", file=fh)
    return EXIT_OK


def cmd_params(args):
    p = solve_fourth_order(args.epsilon, args.dim, args.dx, args.dt)
    for name in ("d", "epsilon", "nu", "dx", "dt", "c", "eta", "cs_sq", "s0", "s1", "s21", "s22",
                 "w0", "w1", "w_diag", "xi"):
        value = getattr(p, name)
        print(f"{name} = {value!r}" if not isinstance(value, float) else f"{name} = {value:.17g}")
    if p.w0 < 0:
        print("note: rest weight w0 is negative for these parameters")
    for name, value in residuals(p).items():
        print(f"residual {name} = {value:.3e}")
    return EXIT_OK


def cmd_analytic(args):
    base = analytic.DEFAULTS.get(args.case)
    if args.nu is not None:
        nu = args.nu
    elif args.epsilon is not None and base is not None:
        nu = args.epsilon * base.dx ** 2 / base.dt
    elif base is not None:
        nu = base.epsilon * base.dx ** 2 / base.dt
    else:
        raise ConfigError("give --nu or --epsilon")
    _check_out(args.out)
    case = analytic.make_case(args.case, nu)
    dx = min(hi - lo for lo, hi in case.domain) / args.grid
    grid = GridSpec.from_domain(case.domain, dx)
    axes = grid.axes()
    if case.even_extension:
        # bounded domain: include the closing node
        axes = [np.append(a, hi) for a, (_, hi) in zip(axes, case.domain)]
    coords = tuple(np.meshgrid(*axes, indexing="ij"))
    theta, grad, u = case.fields(coords, args.t)
    d = case.d
    with _open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{k + 1}" for k in range(d)] + ["theta"] + [f"dtheta{k + 1}" for k in range(d)]
                   + [f"u{k + 1}" for k in range(d)])
        flat = [c.ravel() for c in coords]
        th = theta.ravel()
        g = grad.reshape(d, -1)
        uu = u.reshape(d, -1)
        for j in range(th.size):
            row = [flat[k][j] for k in range(d)] + [th[j]] + list(g[:, j]) + list(uu[:, j])
            w.writerow([format(float(v), ".16e") for v in row])
    return EXIT_OK


COMMANDS = {"run": cmd_run, "converge": cmd_converge, "lattice": cmd_lattice,
            "params": cmd_params, "analytic": cmd_analytic}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InfeasibleParameterError as exc:
        print(f"error: infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DivergenceError, SingularDenominatorError) as exc:
        print(f"error: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
