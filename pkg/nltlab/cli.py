"""
Command-line front end.

    nltlab simulate --config run.yml [--out DIR] [--resume CHECKPOINT]
    nltlab sweep --config sweep.yml [--out DIR] [--workers N]
    nltlab vanishing-viscosity --config run.yml [--eps 1e-2 5e-3 ...]
    nltlab blowup-study --config run.yml [--n 4096]
    nltlab verify-ops [--level quick|full] [--out report.json]
    nltlab checkpoint inspect PATH

Exit codes are the values of `nltlab.experiment.ExitCode`: 0 finished or all
checks passed, 2 usage or configuration error, 3 blow-up detected,
4 resolution lost, 5 verification failed, 6 corrupt checkpoint, 7 a member
run of a vanishing-viscosity study did not finish.
"""

from __future__ import annotations
import argparse
import json
import logging
import sys
from typing import List, Optional

from . import VERSION
from .checkpoint import inspect_checkpoint
from .errors import NltCheckpointError, NltConfigError, NltError
from .experiment import Experiment, ExitCode, RunResult, write_json
from .spectral import Grid
from .verify import LEVELS, OperatorTable, run_suite


def _print(obj):
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def _run_summary(result: RunResult) -> dict:
    return {
        "name": result.name,
        "status": result.status.value,
        "exit_code": int(result.exit_code),
        "t": result.t,
        "steps": result.steps,
        "output_dir": result.output_dir,
        "checks": result.summary.get("checks", {}),
    }


def cmd_simulate(args) -> int:
    experiment = Experiment.from_file(args.config, args.out)
    result = experiment.simulate(resume=args.resume, keep_trajectory=False)
    logging.info(f"\n{experiment.log()}")
    _print(_run_summary(result))
    return int(result.exit_code)


def cmd_sweep(args) -> int:
    experiment = Experiment.from_file(args.config, args.out)
    result = experiment.sweep(workers=args.workers)
    logging.info(f"\n{experiment.log()}")
    _print({"path": result.path, "points": len(result.rows)})
    return int(ExitCode.OK)


def cmd_vanishing_viscosity(args) -> int:
    experiment = Experiment.from_file(args.config, args.out)
    study = experiment.vanishing_viscosity(epsilons=args.eps)
    logging.info(f"\n{experiment.log()}")
    _print(study.as_dict())
    if study.failed:
        return int(ExitCode.MEMBER_FAILED)
    if not study.monotone:
        logging.warning("Successive differences do not decrease monotonically")
        return int(ExitCode.VERIFICATION_FAILED)
    return int(ExitCode.OK)


def cmd_blowup_study(args) -> int:
    experiment = Experiment.from_file(args.config, args.out)
    result = experiment.blowup_study(n=args.n, horizon_factor=args.horizon_factor)
    summary = _run_summary(result)
    summary["growth"] = result.summary.get("blowup", {}).get("growth")
    _print(summary)
    return int(result.exit_code)


def cmd_verify_ops(args) -> int:
    table = None
    if args.corrupt:
        table = OperatorTable(Grid(LEVELS[args.level]["n"])).corrupt(args.corrupt)
    report = run_suite(level=args.level, table=table, seed=args.seed)
    if args.out:
        write_json(args.out, report.as_dict())
        logging.info(f"Verification report written to '{args.out}'")
    else:
        _print(report.as_dict())
    if not report.passed:
        logging.error(f"Failed checks: {', '.join(report.failed)}")
        return int(ExitCode.VERIFICATION_FAILED)
    return int(ExitCode.OK)


def cmd_checkpoint_inspect(args) -> int:
    _print(inspect_checkpoint(args.path))
    return int(ExitCode.OK)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nltlab",
        description="Pseudo-spectral experiments for 1D nonlocal transport equations",
    )
    parser.add_argument("--version", action="version", version=VERSION)
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: INFO)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def _experiment_command(name: str, summary: str):
        sub = commands.add_parser(name, help=summary)
        sub.add_argument("--config", required=True, help="Path to the YAML configuration")
        sub.add_argument(
            "--out",
            default=None,
            help="Output directory (default: outputs.directory, then $NLTLAB_OUTPUT_DIR/<name>)",
        )
        return sub

    sub = _experiment_command("simulate", "Run a single experiment")
    sub.add_argument("--resume", default=None, help="Checkpoint to continue from")
    sub.set_defaults(func=cmd_simulate)

    sub = _experiment_command("sweep", "Run every point of the sweep section")
    sub.add_argument("--workers", type=int, default=None, help="Number of processes")
    sub.set_defaults(func=cmd_sweep)

    sub = _experiment_command("vanishing-viscosity", "Run a descending list of eps")
    sub.add_argument("--eps", type=float, nargs="+", default=None, help="Descending eps values")
    sub.set_defaults(func=cmd_vanishing_viscosity)

    sub = _experiment_command("blowup-study", "Inviscid model1 run on the configured data")
    sub.add_argument("--n", type=int, default=None, help="Grid size override")
    sub.add_argument(
        "--horizon-factor",
        type=float,
        default=50.0,
        help="Multiple of the local horizon estimate used when the horizon is 'auto'",
    )
    sub.set_defaults(func=cmd_blowup_study)

    sub = commands.add_parser("verify-ops", help="Run the operator property suites")
    sub.add_argument("--level", default="quick", choices=sorted(LEVELS))
    sub.add_argument("--out", default=None, help="Write the JSON report here instead of stdout")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument(
        "--corrupt",
        default=None,
        choices=["hilbert", "lambda"],
        help="Corrupt one symbol table entry before verifying",
    )
    sub.set_defaults(func=cmd_verify_ops)

    sub = commands.add_parser("checkpoint", help="Checkpoint utilities")
    actions = sub.add_subparsers(dest="action", required=True)
    inspect = actions.add_parser("inspect", help="Print the header and validate the checksum")
    inspect.add_argument("path")
    inspect.set_defaults(func=cmd_checkpoint_inspect)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(ExitCode.OK) if err.code == 0 else int(ExitCode.USAGE)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except NltCheckpointError as err:
        logging.error(str(err))
        return int(ExitCode.CORRUPT_CHECKPOINT)
    except NltConfigError as err:
        logging.error(str(err))
        return int(ExitCode.USAGE)
    except NltError as err:
        logging.error(f"{type(err).__name__}: {err}")
        return int(ExitCode.USAGE)


if __name__ == "__main__":
    sys.exit(main())
