"""Command-line interface.

Subcommands: simulate, converge, compare-fd, compare-alg, stepping-study,
plot.  Exit codes: 0 success, 1 validation/configuration error, 2
numerical failure (instability or singular solve).  Tables printed to
stdout are also written as CSV files into the configured out_dir.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    compare_algorithms,
    compare_records,
    make_reference,
    stepping_study,
    convergence_study,
)
from .config import RunConfig, dump_config, parse_config
from .errors import ConfigError, NumericsError, ValidationError
from .fdcheck import run_fd
from .fem import build_operators
from .output import PlotStyle, emit_svg_plot, write_record_csv, write_table_csv
from .stepping import run_simulation, stable_step_count


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); bad args are not numerics
        raise ConfigError(message)


def _report_rows(report):
    return [(f, n, a, "" if r is None else r) for f, n, a, r in report.rows()]


def _print_report(name, report):
    print(f"{name}:")
    print(f"  {'field':5s} {'norm':8s} {'absolute':>13s} {'relative':>13s}")
    for fld, norm, absval, rel in report.rows():
        rel_s = f"{rel:13.6e}" if rel is not None else f"{'n/a':>13s}"
        print(f"  {fld:5s} {norm:8s} {absval:13.6e} {rel_s}")


def _aligned_snapshot_times(t_end: float, dt: float, n_steps: int, count: int = 10):
    stride = max(1, n_steps // count)
    times = [k * stride * dt for k in range(0, n_steps // stride + 1)]
    if abs(times[-1] - t_end) > 1e-12 * max(1.0, t_end):
        times.append(t_end)
    return times


def _reference_plan(cfg: RunConfig, scale: int = 4):
    """Aligned fine reference: spatial refinement by ``scale``, step count
    a multiple of the test run's so snapshots land on both grids."""
    p = cfg.params
    n_steps = max(1, int(round(cfg.t_end / cfg.dt_m)))
    n_s_ref, n_m_ref = scale * cfg.n_s, scale * cfg.n_m
    need = stable_step_count(p, p.l / n_s_ref, 1.0 / n_m_ref, cfg.t_end)
    mult = max(1, -(-need // n_steps))
    return n_s_ref, n_m_ref, n_steps * mult, n_steps


def cmd_simulate(args) -> int:
    cfg = parse_config(args.config)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ops = build_operators(cfg.params, cfg.n_s, cfg.n_m)
    rec = run_simulation(
        cfg.params, ops, cfg.scheme_config(), list(cfg.snapshot_times),
        record_every=cfg.record_every,
    )
    paths = write_record_csv(rec, out)
    dump_config(cfg, out / "config_echo.yaml")
    mon = rec.monitors
    print(f"simulated t in [0, {cfg.t_end}] with {cfg.variant}, "
          f"dt_m={cfg.dt_m:.6g}, {len(rec.snapshots)} snapshots")
    print(f"final mass {mon.mass[-1]:.9g} (initial {mon.mass[0]:.9g}), "
          f"final energy {mon.energy[-1]:.9g}")
    print(f"max |mass balance residual| = "
          f"{float(np.max(np.abs(mon.balance_residual))):.3e}")
    for pth in paths:
        print(f"wrote {pth}")
    return 0


def cmd_converge(args) -> int:
    cfg = parse_config(args.config)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stent_ratio = max(1, round(cfg.n_s / cfg.n_m))
    table = convergence_study(
        cfg.params, n_m0=cfg.n_m, levels=args.levels,
        stent_ratio=stent_ratio, t_end=cfg.t_end, variant=cfg.variant,
    )
    print(f"{'level':>5s} {'h_m':>10s} {'field':>5s} {'norm':>8s} "
          f"{'error':>13s} {'rate':>7s}")
    rows = []
    for level, h, fld, norm, err, rel, rate in table.rows():
        rate_s = f"{rate:7.3f}" if rate != "" else f"{'':7s}"
        print(f"{level:5d} {h:10.5f} {fld:>5s} {norm:>8s} {err:13.6e} {rate_s}")
        rows.append((level, h, fld, norm, err, rate))
    path = write_table_csv(out / "convergence.csv",
                           ["level", "h_m", "field", "norm", "error",
                            "rate_to_next"], rows)
    print(f"wrote {path}")
    return 0


def cmd_compare_fd(args) -> int:
    cfg = parse_config(args.config)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ops = build_operators(cfg.params, cfg.n_s, cfg.n_m)
    snaps = list(cfg.snapshot_times)
    fem = run_simulation(cfg.params, ops, cfg.scheme_config(), snaps,
                         record_every=cfg.record_every)
    fd = run_fd(cfg.params, cfg.n_s, cfg.n_m, cfg.dt_m, cfg.t_end, snaps,
                record_every=cfg.record_every)
    report = compare_records(fd, fem)
    _print_report("finite-difference vs finite-element", report)
    path = write_table_csv(out / "fd_comparison.csv",
                           ["field", "norm", "absolute", "relative"],
                           _report_rows(report))
    print(f"wrote {path}")
    return 0


def cmd_compare_alg(args) -> int:
    cfg = parse_config(args.config)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_s_ref, n_m_ref, n_ref, n_steps = _reference_plan(cfg, args.ref_scale)
    snaps = _aligned_snapshot_times(cfg.t_end, cfg.dt_m, n_steps)
    print(f"reference: {n_s_ref}/{n_m_ref} elements, {n_ref} steps")
    ref = make_reference(cfg.params, n_s_ref, n_m_ref, n_ref, cfg.t_end, snaps)
    comp = compare_algorithms(cfg.params, ref, cfg.n_s, cfg.n_m,
                              n_steps, cfg.t_end, snaps)
    rows = []
    for name, rep in (("alg1", comp.alg1), ("alg2", comp.alg2),
                      ("monolithic", comp.monolithic)):
        _print_report(name, rep)
        rows.extend((name, f, n, a, "" if r is None else r)
                    for f, n, a, r in rep.rows())
    path = write_table_csv(out / "algorithm_comparison.csv",
                           ["variant", "field", "norm", "absolute",
                            "relative"], rows)
    print(f"wrote {path}")
    return 0


def cmd_stepping_study(args) -> int:
    cfg = parse_config(args.config)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        ratios = [int(v) for v in args.ratios.split(",") if v]
    except ValueError:
        raise ConfigError(f"--ratios expects integers, got {args.ratios!r}")
    n_s_ref, n_m_ref, n_ref, n_steps = _reference_plan(cfg, args.ref_scale)
    snaps = _aligned_snapshot_times(cfg.t_end, cfg.dt_m, n_steps)
    print(f"reference: {n_s_ref}/{n_m_ref} elements, {n_ref} steps")
    ref = make_reference(cfg.params, n_s_ref, n_m_ref, n_ref, cfg.t_end, snaps)
    reports = stepping_study(cfg.params, ref, cfg.n_m, ratios, n_steps,
                             cfg.t_end, snaps, variant=cfg.variant)
    rows = []
    for q in ratios:
        _print_report(f"stent/media element ratio {q} (n_s={q * cfg.n_m})",
                      reports[q])
        rows.extend((q, f, n, a, "" if r is None else r)
                    for f, n, a, r in reports[q].rows())
    path = write_table_csv(out / "stepping_study.csv",
                           ["ratio", "field", "norm", "absolute",
                            "relative"], rows)
    print(f"wrote {path}")
    return 0


def cmd_plot(args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise ConfigError(f"input file not found: {path}")
    with path.open() as fh:
        rd = csv.DictReader(fh)
        header = rd.fieldnames or []
        rows = list(rd)
    if not rows:
        raise ConfigError(f"no data rows in {path}")
    if header[:5] == ["t", "domain", "x", "field", "value"]:
        # long-format snapshots: one profile per snapshot time
        want = args.field
        series = {}
        for row in rows:
            if row["field"] != want:
                continue
            series.setdefault(float(row["t"]), []).append(
                (float(row["x"]), float(row["value"]))
            )
        if not series:
            raise ConfigError(f"field {want!r} not present in {path}")
        plot_series = []
        for t in sorted(series):
            pairs = sorted(series[t])
            plot_series.append((f"t={t:.6g}",
                                np.array([a for a, _ in pairs]),
                                np.array([b for _, b in pairs])))
        style = PlotStyle(title=f"{want} profiles", x_label="x", y_label=want)
    else:
        if args.field not in header:
            raise ConfigError(
                f"column {args.field!r} not in {path} (has {header})"
            )
        if "t" not in header:
            raise ConfigError(f"{path} has no t column to plot against")
        t = np.array([float(r["t"]) for r in rows])
        y = np.array([float(r[args.field]) for r in rows])
        plot_series = [(args.field, t, y)]
        style = PlotStyle(title=args.field, x_label="t", y_label=args.field)
    out = emit_svg_plot(plot_series, style, args.out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stentsim",
                     description="1D stent drug-release simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        sp = sub.add_parser(name, **kwargs)
        sp.set_defaults(func=func)
        return sp

    sp = add("simulate", cmd_simulate, help="run one simulation to CSV")
    sp.add_argument("--config", required=True)

    sp = add("converge", cmd_converge, help="mesh refinement rate study")
    sp.add_argument("--config", required=True)
    sp.add_argument("--levels", type=int, default=3)

    sp = add("compare-fd", cmd_compare_fd,
             help="cross-check against the finite-difference solver")
    sp.add_argument("--config", required=True)

    sp = add("compare-alg", cmd_compare_alg,
             help="accuracy of the two decoupling strategies")
    sp.add_argument("--config", required=True)
    sp.add_argument("--ref-scale", type=int, default=4)

    sp = add("stepping-study", cmd_stepping_study,
             help="stent/media mesh ratio study")
    sp.add_argument("--config", required=True)
    sp.add_argument("--ratios", default="1,2")
    sp.add_argument("--ref-scale", type=int, default=4)

    sp = add("plot", cmd_plot, help="render a CSV column or profile to SVG")
    sp.add_argument("--input", required=True)
    sp.add_argument("--field", required=True)
    sp.add_argument("--out", required=True)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
