"""Command-line entry point: ``dbec {groundstate,evolve,functionals,experiment}``.

Every configuration key is also a flag (``max_iters`` <-> ``--max-iters``).
Values are resolved as defaults < ``--config`` file < flags, validated before
any compute, and echoed next to each written output.

Exit codes: 0 success, 2 a check failed (experiment assertion or solver
stopping rule not met), 1 error.
"""

import argparse
import json
import logging
import os
import shlex
import sys
from dataclasses import fields

from .config import EXPERIMENTS, RunConfig, parse_config
from .errors import BasinEscape, DBECError, MaxIterations
from .functionals import breakdown
from .grid import set_threads
from .io import ensure_dir, read_snapshot, to_jsonable, write_report, write_snapshot, \
    write_trajectory

log = logging.getLogger("dbec")

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2

_HELP = {
    "grid": "points per axis, one value or three (powers of two)",
    "box": "half-box length per axis, one value or three",
    "trap": "harmonic trap frequency a (0 = free)",
    "mass": "mass constraint c",
    "tol": "solver tolerance (default: 1e-8 free, 1e-7 trapped)",
    "k": "trapped basin parameter (default: 4 x A of the trap-matched Gaussian, i.e. 6ac)",
    "init": "initial field: snapshot file or preset (gaussian, trap)",
    "tmax": "final time",
    "out_dir": "directory for outputs and config echoes",
    "threads": "FFT worker threads",
    "seed": "RNG seed for randomised experiments",
}


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors: exit code 1, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _config_flags(parser):
    g = parser.add_argument_group("configuration (each flag mirrors a config key)")
    g.add_argument("--config", metavar="FILE", help="key = value configuration file")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        g.add_argument(flag, dest="cfg_" + f.name, metavar=f.name.upper(), default=None,
                       help=_HELP.get(f.name))
    parser.add_argument("-v", "--verbose", action="count", default=0)


def build_parser():
    common = _Parser(add_help=False)
    _config_flags(common)
    ap = _Parser(prog="dbec", description="Numerical lab for the dimensionless dipolar GP equation.",
                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gs = sub.add_parser("groundstate", parents=[common], help="solve for a ground state")
    gs.add_argument("--out", metavar="SNAPSHOT", help="field output (default OUT_DIR/groundstate.bin)")
    gs.add_argument("--report", metavar="JSON", help="report output (default OUT_DIR/groundstate.json)")

    ev = sub.add_parser("evolve", parents=[common], help="integrate the time-dependent equation")
    ev.add_argument("--in", dest="inp", metavar="SNAPSHOT", required=True)
    ev.add_argument("--out", metavar="CSV", help="trajectory table (default OUT_DIR/trajectory.csv)")

    fn = sub.add_parser("functionals", parents=[common], help="print energy functionals of a field")
    fn.add_argument("--in", dest="inp", metavar="SNAPSHOT", required=True)

    ex = sub.add_parser("experiment", parents=[common], help="run a named scenario")
    ex.add_argument("name", nargs="?", choices=EXPERIMENTS)
    return ap


def resolve_config(args):
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None}
    return parse_config(args.config, overrides)


def _echo(cfg, output_path, argv):
    """Write the resolved config next to ``output_path`` as ``<stem>.config``."""
    path = os.path.splitext(output_path)[0] + ".config"
    cfg.echo(path)
    with open(path, "a") as fh:
        fh.write(f"# command: dbec {' '.join(shlex.quote(a) for a in argv)}\n")
    return path


def _output(path, cfg, default):
    if path is None:
        path = os.path.join(cfg.out_dir, default)
    ensure_dir(os.path.dirname(path))
    return path


def _load_init(cfg):
    if cfg.init and os.path.isfile(cfg.init):
        return read_snapshot(cfg.init)
    return cfg.init


def cmd_groundstate(args, cfg, argv):
    from .ground_state import SolverOptions, solve_free_ground_state, solve_trapped_minimizer

    out = _output(args.out, cfg, "groundstate.bin")
    rep_path = _output(args.report, cfg, "groundstate.json")
    _echo(cfg, rep_path, argv)
    grid, p = cfg.make_grid(), cfg.physical()
    opts = SolverOptions(tol=cfg.tol, max_iters=cfg.max_iters, k=cfg.k,
                         complex_field=cfg.complex_field, log_every=500 if args.verbose else 0)
    solve = solve_trapped_minimizer if p.trap > 0 else solve_free_ground_state
    code = EXIT_OK
    try:
        u, report = solve(grid, p, init=_load_init(cfg), opts=opts)
    except (MaxIterations, BasinEscape) as e:
        log.error("%s", e)
        if e.field is None or e.report is None:
            raise
        u, report = e.field, e.report
        code = EXIT_FAILED
    if not report.converged:
        code = EXIT_FAILED
    write_snapshot(out, u)
    write_report(rep_path, report.to_dict())
    print(json.dumps(to_jsonable({k: getattr(report, k) for k in report.KEYS})))
    return code


def cmd_evolve(args, cfg, argv):
    from .dynamics import evolve

    out = _output(args.out, cfg, "trajectory.csv")
    _echo(cfg, out, argv)
    u0 = read_snapshot(args.inp)
    traj = evolve(u0, cfg.physical(), cfg.dt, cfg.tmax, sample_every=cfg.sample_every,
                  snapshot_every=cfg.snapshot_every or None, snapshots_dir=cfg.snapshots_dir)
    write_trajectory(out, traj)
    summary = {"verdict": traj.verdict, "steps": traj.steps, "halted_at": traj.halted_at,
               "resolution_lost_at": traj.resolution_lost_at, "trajectory": out}
    print(json.dumps(to_jsonable(summary), sort_keys=True))
    return EXIT_OK


def cmd_functionals(args, cfg, argv):
    u = read_snapshot(args.inp)
    b = breakdown(u, cfg.physical())
    print(json.dumps(to_jsonable(b.to_dict())))
    return EXIT_OK


def cmd_experiment(args, cfg, argv):
    from .experiments import run_experiment

    name = args.name or cfg.experiment
    if name is None:
        raise DBECError("experiment: no scenario name given (positional or --experiment)")
    ensure_dir(cfg.out_dir)
    _echo(cfg, os.path.join(cfg.out_dir, name), argv)
    rep = run_experiment(name, cfg, cfg.out_dir)
    for a in rep.assertions:
        print(f"{'PASS' if a.passed else 'FAIL'}  {a.name}  {a.detail}".rstrip())
    print(f"{name}: {'passed' if rep.passed else 'FAILED'} ({rep.elapsed:.1f} s) -> "
          f"{rep.artifacts.get('report')}")
    return EXIT_OK if rep.passed else EXIT_FAILED


COMMANDS = {
    "groundstate": cmd_groundstate,
    "evolve": cmd_evolve,
    "functionals": cmd_functionals,
    "experiment": cmd_experiment,
}


def _hoist(argv):
    """Allow global flags before the subcommand by moving them after it."""
    for i, a in enumerate(argv):
        if a in COMMANDS:
            return [a] + argv[:i] + argv[i + 1:] if i else argv
    return argv


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_hoist(argv))
    except SystemExit as e:  # usage errors and --help
        return e.code
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        set_threads(cfg.threads)
        return COMMANDS[args.command](args, cfg, argv)
    except (DBECError, OSError, ValueError) as e:
        print(f"dbec: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
