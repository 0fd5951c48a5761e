"""Command-line entry points.

Every command reads an optional scenario file (INI; see config.py),
applies flag overrides, runs, and writes its artifacts into one output
directory.  Exit codes: 0 success, 1 bad configuration (the message names
the offending key path), 2 simulation failure (the message names the
failing step).
"""

import argparse
import os
import sys

from aquactl import __version__, config, traj_io
from aquactl.errors import ConfigError, SimulationError
from aquactl.harness import (
    CONTROLLER_TYPES,
    build_sim,
    compare,
    run_scenario,
    text_report,
    train_q,
    write_metrics_csv,
)
from aquactl.engine import reference_trajectory


def _add_common(p):
    p.add_argument("--config", metavar="PATH",
                   help="scenario file (defaults used when omitted)")
    p.add_argument("--seed", type=int, metavar="N",
                   help="override the scenario seed")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--quiet", action="store_true",
                   help="suppress the summary line")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aquactl",
        description="bioenergetic fish-growth simulation and control")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the configured controller")
    _add_common(p)
    p.add_argument("--controller", choices=CONTROLLER_TYPES,
                   help="override the controller type")

    p = sub.add_parser("reference",
                       help="write the nominal growth reference")
    _add_common(p)

    p = sub.add_parser("train-q", help="train the tabular policy")
    _add_common(p)

    p = sub.add_parser("run-mpc", help="simulate with the predictive "
                       "controller")
    _add_common(p)

    p = sub.add_parser("run-rlmpc", help="simulate with the hybrid "
                       "controller")
    _add_common(p)

    p = sub.add_parser("compare",
                       help="run several controllers on one scenario")
    _add_common(p)
    p.add_argument("--controllers", default="constant,mpc",
                   metavar="A,B,...",
                   help="comma-separated controller types "
                        "(default: constant,mpc)")

    p = sub.add_parser("export-defaults",
                       help="print the canonical default scenario")
    return parser


def _load(args):
    cfg = config.load_config(args.config) if args.config \
        else config.default_config()
    if args.seed is not None:
        cfg["run"]["seed"] = args.seed
    return cfg


def _out_dir(args, cfg):
    # precedence: --out flag, then [run] out, then $AQUACTL_OUT, then cwd
    if args.out:
        return args.out
    if cfg["run"]["out"]:
        return cfg["run"]["out"]
    return os.environ.get("AQUACTL_OUT") or os.getcwd()


def _run_and_write(cfg, kind, out_dir, quiet):
    results = compare(cfg, [kind], out_dir)
    res = results[0]
    if not quiet:
        wt = res.metrics["terminal_weight"]
        print(f"{res.kind}: terminal weight {wt:.6g} kcal over "
              f"{cfg['run']['tf'] - cfg['run']['t0']:g} days "
              f"-> {out_dir}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export-defaults":
            sys.stdout.write(config.dump_config(config.default_config()))
            return 0

        cfg = _load(args)
        out_dir = _out_dir(args, cfg)

        if args.command == "simulate":
            kind = args.controller or cfg["controller"]["type"]
            return _run_and_write(cfg, kind, out_dir, args.quiet)

        if args.command in ("run-mpc", "run-rlmpc"):
            kind = "mpc" if args.command == "run-mpc" else "rlmpc"
            return _run_and_write(cfg, kind, out_dir, args.quiet)

        if args.command == "reference":
            sim_cfg = build_sim(cfg)
            ref = reference_trajectory(sim_cfg, cfg["run"]["f_ref"])
            os.makedirs(out_dir, exist_ok=True)
            path = os.path.join(out_dir, "ref.csv")
            traj_io.write_trajectory(path, ref)
            if not args.quiet:
                print(f"reference: terminal weight "
                      f"{ref.weights()[-1]:.6g} kcal -> {path}")
            return 0

        if args.command == "train-q":
            result, _spec = train_q(cfg)
            os.makedirs(out_dir, exist_ok=True)
            path = os.path.join(out_dir, "qtable.csv")
            result.table.save(path)
            traj_io.write_returns(os.path.join(out_dir, "returns.csv"),
                                  result.episode_returns)
            if not args.quiet:
                print(f"trained {result.episodes_run} episodes, "
                      f"converged={result.converged} -> {path}")
            return 0

        if args.command == "compare":
            kinds = [k.strip() for k in args.controllers.split(",")
                     if k.strip()]
            if not kinds:
                raise ConfigError("controllers", "no controller types given")
            results = compare(cfg, kinds, out_dir)
            if not args.quiet:
                sys.stdout.write(text_report(results))
                print(f"artifacts -> {out_dir}")
            return 0

        raise ConfigError("command", f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error at {exc.path}: "
              f"{str(exc).split(': ', 1)[-1]}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"simulation failed at step {exc.step_index}: "
              f"{str(exc).split(': ', 1)[-1]}", file=sys.stderr)
        return 2
