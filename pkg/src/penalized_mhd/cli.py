"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure
(a violated invariant or a run that could not finish).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, config_from_echo, load_config
from .io import FormatError, list_snapshots, load_state, read_snapshot, snapshot_name, write_csv, \
    write_json, write_report, write_snapshot

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2

DIV_TOL = 1e-12
MASS_TOL = 1e-12
ENERGY_TOL = 1e-3
ORDER_MIN = 1.8


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pmhd", description="Penalized compressible MHD solver and diagnostics.")
    sub = p.add_subparsers(dest="verb", parser_class=_Parser, metavar="VERB")
    sub.required = True

    def common(sp, config_required):
        sp.add_argument("--config", required=config_required, help="configuration file")
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        sp.add_argument("overrides", nargs="*", metavar="KEY=VALUE", help="configuration overrides")

    common(sub.add_parser("run", help="single simulation, writes diagnostics.csv and snapshots"), True)
    common(sub.add_parser("sweep", help="epsilon sweep, writes sweep.csv and sweep.json"), True)
    sp = sub.add_parser("verify-operators", help="discrete operator identities and Gaffney survey")
    common(sp, False)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--cells", type=int, default=32)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--gaffney-samples", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp = sub.add_parser("verify-convergence", help="manufactured-solution convergence order")
    common(sp, False)
    sp.add_argument("--grids", type=int, nargs="+", default=[64, 128])
    sp.add_argument("--final-time", type=float, default=0.25)
    sp = sub.add_parser("certify", help="weak-form residuals of a stored trajectory")
    common(sp, False)
    sp.add_argument("--input", help="directory with snapshot_*.bin files (default: --out)")
    return p


def _config(args, required: bool):
    if args.config is None and not required:
        return None
    try:
        return load_config(args.config, args.overrides)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    except ConfigError as exc:
        raise UsageError(f"configuration error: {exc}") from None


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> list[str]:
    from .diagnostics import energy_budget
    from .solver import integrate, make_initial_state

    cfg = _config(args, True)
    out = _out_dir(args)
    echo = cfg.echo()
    model = cfg.build_model()
    state = make_initial_state(model, cfg.initial_data())
    rc = cfg.run_config() if cfg.write_snapshots else cfg.run_config(snapshot_every=0, snapshot_times=())
    traj = integrate(state, rc, margin=cfg.margin_factor * model.coeffs.width)
    write_csv(out / "diagnostics.csv", [r.row() for r in traj.records], echo)
    if cfg.write_snapshots:
        snaps = traj.snapshots or [traj.initial, traj.final]
        for s in snaps:
            write_snapshot(out / snapshot_name(s.t), s, echo)
    budget = energy_budget(traj)
    lines = [
        f"run: scenario={cfg.scenario} eps={cfg.epsilon:g} d={cfg.d} n={cfg.cells} T={cfg.T:g}",
        f"steps {traj.steps}, wall time {traj.wall_time:.2f} s",
        f"energy budget residual {budget:.3e} (tol {ENERGY_TOL:g})",
        f"max relative div(mu H) {traj.max_div_muH:.3e} (tol {DIV_TOL:g})",
        f"relative mass drift {traj.mass_drift:.3e} (tol {MASS_TOL:g})",
        f"CG iterations {traj.cg_iterations}",
    ]
    failures = []
    if not budget <= ENERGY_TOL:
        failures.append(f"energy inequality violated: residual {budget:.3e}")
    if not traj.max_div_muH <= DIV_TOL:
        failures.append(f"div(mu H) constraint violated: {traj.max_div_muH:.3e}")
    if not traj.mass_drift <= MASS_TOL:
        failures.append(f"mass conservation violated: drift {traj.mass_drift:.3e}")
    write_report(out / "report.txt", lines + failures, echo)
    if failures:
        raise NumericalFailure("; ".join(failures))
    return lines


def cmd_sweep(args) -> list[str]:
    from .diagnostics.sweep import COLUMNS, sweep_checks, sweep_table

    cfg = _config(args, True)
    out = _out_dir(args)
    echo = cfg.echo()
    table = sweep_table(cfg)
    checks = sweep_checks(table)
    slopes = table.slopes()
    write_csv(out / "sweep.csv", table.rows, echo, columns=list(COLUMNS))
    write_json(out / "sweep.json", {
        "scenario": table.scenario, "columns": list(COLUMNS), "rows": table.rows, "slopes": slopes,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail, "primary": c.primary}
                   for c in checks],
    }, echo)
    lines = [f"sweep: scenario={table.scenario} eps={' '.join(f'{e:g}' for e in table.eps)}"]
    for r in table.rows:
        lines.append(f"  eps={r['eps']:<8g} {r['status']}")
    lines.append("slopes (log value vs log eps):")
    lines += [f"  {k:<18s} {v:8.3f}" for k, v in slopes.items() if v == v]
    for c in checks:
        tag = "PASS" if c.passed else "FAIL"
        lines.append(f"{tag} {c.name}: {c.detail}{'' if c.primary else ' (informational)'}")
    failed = [c for c in checks if c.primary and not c.passed]
    write_report(out / "report.txt", lines, echo)
    if failed:
        raise NumericalFailure("; ".join(f"{c.name} ({c.detail})" for c in failed))
    return lines


def cmd_verify_operators(args) -> list[str]:
    from .diagnostics.verify import operator_suite

    cfg = _config(args, False)
    if args.dim not in (2, 3) or args.cells < 8 or args.samples < 1 or args.gaffney_samples < 1:
        raise UsageError("need --dim in {2,3}, --cells >= 8 and positive sample counts")
    out = _out_dir(args)
    rep = operator_suite(args.dim, args.cells, args.samples, args.gaffney_samples, args.seed)
    lines = rep.lines()
    write_report(out / "report.txt", lines, cfg.echo() if cfg else {})
    if not rep.ok:
        bad = [k for k, v in rep.defects.items() if v > 1e-13]
        raise NumericalFailure(f"operator identities failed: {bad or 'truncation/Gaffney'}")
    return lines


def cmd_verify_convergence(args) -> list[str]:
    from .mms import convergence_study

    cfg = _config(args, False)
    grids = sorted(set(args.grids))
    if len(grids) < 2 or any(g < 8 or g % 2 for g in grids):
        raise UsageError("--grids needs at least two distinct even sizes >= 8")
    out = _out_dir(args)
    res = convergence_study(tuple(grids), T=args.final_time)
    lines = ["manufactured solution, L2 errors at the final time:"]
    for n, err in zip(res["n"], res["errors"]):
        lines.append(f"  n={n:<5d} " + "  ".join(f"{k}={v:.3e}" for k, v in err.items()))
    lines.append("observed orders:")
    failed = []
    for (a, b), orders in zip(zip(grids, grids[1:]), res["orders"]):
        lines.append(f"  {a}->{b}: " + "  ".join(f"{k}={v:.3f}" for k, v in orders.items()))
        failed += [f"{k} order {v:.3f} < {ORDER_MIN} ({a}->{b})" for k, v in orders.items() if v < ORDER_MIN]
    write_report(out / "report.txt", lines + failed, cfg.echo() if cfg else {})
    if failed:
        raise NumericalFailure("; ".join(failed))
    return lines


def cmd_certify(args) -> list[str]:
    from .diagnostics.weak import certify_all

    src = Path(args.input or args.out)
    paths = list_snapshots(src) if src.is_dir() else []
    if len(paths) < 2:
        raise UsageError(f"need at least two snapshot_*.bin files in {src}")
    try:
        echo = read_snapshot(paths[0])["config"]
        cfg = config_from_echo(echo)
    except (FormatError, ConfigError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot rebuild the run configuration from {paths[0]}: {exc}") from None
    model = cfg.build_model()
    states = [load_state(p, model) for p in paths]
    results = certify_all(states)
    lines = [f"weak-form residuals over {len(states)} snapshots, t in [{states[0].t:g}, {states[-1].t:g}]",
             f"scenario={cfg.scenario} eps={cfg.epsilon:g} n={cfg.cells}"]
    for r in results:
        lines.append(f"  {r.which:<20s} {r.family:<14s} {r.residual:.4e}")
    out = _out_dir(args)
    write_report(out / "report.txt", lines, echo)
    return lines


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "verify-operators": cmd_verify_operators,
    "verify-convergence": cmd_verify_convergence,
    "certify": cmd_certify,
}


def main(argv=None) -> int:
    from .linalg import SolverNonConvergence
    from .solver import NegativeDensityError

    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        lines = COMMANDS[args.verb](args)
    except UsageError as exc:
        msg = str(exc).rstrip()
        if "usage:" not in msg:
            msg += "\n" + parser.format_usage().rstrip()
        print(msg, file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (NegativeDensityError, SolverNonConvergence, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for line in lines:
        print(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
