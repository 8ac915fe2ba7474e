"""
This module contains the `Experiment` class which runs the configured
simulations and writes their artifacts:

* `records.ndjson`: a header line followed by one run record per line.
* `final.chk`: checkpoint of the last accepted state.
* `summary.json`: regime, terminal status, worst residuals and the
  trajectory-level checks.

Sweeps fan out over a process pool and collect one row per parameter point
in `sweep.csv`. Vanishing-viscosity studies write `viscosity.csv` and
`viscosity.json`.
"""

from __future__ import annotations
import copy
import csv
import datetime
from dataclasses import dataclass, field, fields
from enum import IntEnum
import itertools
import json
import logging
from multiprocessing import Pool
import os
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, interpolate

from . import VERSION
from .checkpoint import read_checkpoint, write_checkpoint
from .config import SCHEMA_VERSION, ExperimentConfig, VanishingViscositySection
from .diagnostics import (
    DiagnosticsEngine,
    SpaceTimeBump,
    Trajectory,
    model2_weak_form_residual,
    summarize,
    weak_form_residual,
)
from .errors import NltConfigError, NltDegenerateError, NltError, NltGridError
from .integrator import RunStatus, Stepper, StepperState, blowup_indicator
from .models import ModelFamily, ModelSpec, classify_regime, local_horizon_estimate
from .paley import dyadic_partition
from .spectral import SpectralField

RECORDS_FILE = "records.ndjson"
SUMMARY_FILE = "summary.json"
FINAL_CHECKPOINT = "final.chk"
RUNNING_CHECKPOINT = "checkpoint.chk"


class ExitCode(IntEnum):
    OK = 0
    USAGE = 2
    BLOWUP = 3
    RESOLUTION_LOST = 4
    VERIFICATION_FAILED = 5
    CORRUPT_CHECKPOINT = 6
    MEMBER_FAILED = 7


_EXIT_FOR_STATUS = {
    RunStatus.FINISHED: ExitCode.OK,
    RunStatus.RUNNING: ExitCode.OK,
    RunStatus.BLOWUP_DETECTED: ExitCode.BLOWUP,
    RunStatus.RESOLUTION_LOST: ExitCode.RESOLUTION_LOST,
}


def exit_code_for(status: RunStatus) -> ExitCode:
    return _EXIT_FOR_STATUS[RunStatus(status)]


def _default_skipfun(point: Dict[str, float]) -> bool:
    """
    point holds the parameter values of one sweep member
    """
    return False


def _cartesian_product_method(values: Sequence[Sequence]) -> List[Tuple]:
    return list(itertools.product(*values))


def _zip_method(values: Sequence[Sequence]) -> List[Tuple]:
    return list(zip(*values))


def sweep_points(
    parameters: Dict[str, Sequence[float]], method: str = "product"
) -> List[Dict[str, float]]:
    """
    Parameter assignments of a sweep, ordered by their sorted value tuples.

    Raises:
        NltConfigError: If the method is unknown.
    """
    fun_for_method = {"product": _cartesian_product_method, "zip": _zip_method}
    if not parameters:
        return []
    names = sorted(parameters)
    try:
        combos = fun_for_method[method]([parameters[name] for name in names])
    except KeyError:
        raise NltConfigError(
            f"Unknown method '{method}'. Known methods are: {', '.join(fun_for_method.keys())}"
        )
    points = [dict(zip(names, combo)) for combo in combos]
    return sorted(points, key=lambda p: tuple(p[name] for name in names))


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False, default=_json_default)


def _json_default(obj: Any):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"Cannot serialize {type(obj).__name__}")


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not np.isfinite(value):
        return None
    return float(value)


def _clean(obj: Any) -> Any:
    """Replace NaN and Inf by None so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {key: _clean(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(value) for value in obj]
    if isinstance(obj, (float, np.floating)):
        return _finite_or_none(float(obj))
    return obj


def write_json(path: str, obj: Any):
    with open(path, "w") as handle:
        json.dump(_clean(obj), handle, sort_keys=True, indent=2, default=_json_default)
        handle.write("\n")


class RecordSink:
    """Append-only NDJSON writer. The first line holds the header."""

    def __init__(self, path: str, header: Dict[str, Any]):
        self.path = path
        self._handle = open(path, "w")
        self._handle.write(_dumps(_clean({"header": header})) + "\n")

    def write(self, record: Dict[str, Any]):
        self._handle.write(_dumps(_clean(record)) + "\n")

    def close(self):
        self._handle.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_records(path: str) -> Tuple[Dict[str, Any], List[Dict[str, Any]]]:
    """Header and records of an NDJSON record stream."""
    with open(path, "r") as handle:
        lines = [json.loads(line) for line in handle if line.strip()]
    if not lines or "header" not in lines[0]:
        raise NltError(f"'{path}' does not start with a header line")
    return lines[0]["header"], lines[1:]


def now():
    return datetime.datetime.now().strftime("%d-%b-%Y %H:%M:%S")


@dataclass
class LogItem:
    """
    Log item for one command invocation.

    Args:
        command: Command name, e.g. `simulate` or `sweep`.
        elapsed_time: Wall time of the command in seconds.
        status_counts: For each terminal status the number of runs ending in it.
        step_counts: For each run name the number of accepted steps.
    """

    command: str
    elapsed_time: float
    status_counts: Dict[str, int]
    step_counts: Dict[str, int]
    created_time: str = field(default_factory=now)

    _order = ["created_time", "command", "elapsed_time", "status_counts", "step_counts"]
    _headers = {
        "created_time": "Finish time",
        "command": "Command",
        "elapsed_time": "Took (s)",
        "status_counts": "Statuses",
        "step_counts": "Steps",
    }

    def rows(self) -> List[List[str]]:
        statuses = [f"{k}: {v}" for k, v in sorted(self.status_counts.items())]
        steps = [f"{k}: {v}" for k, v in sorted(self.step_counts.items())]
        nrows = max(len(statuses), len(steps), 1)
        rows = []
        for idx in range(nrows):
            first = idx == 0
            rows.append(
                [
                    self.created_time if first else "",
                    self.command if first else "",
                    f"{self.elapsed_time:.2f}" if first else "",
                    statuses[idx] if idx < len(statuses) else "",
                    steps[idx] if idx < len(steps) else "",
                ]
            )
        return rows


@dataclass
class RunLog:
    """
    Experiment log. Each command adds a [LogItem][nltlab.experiment.LogItem]
    as the first element. Print it with `print(experiment.log())`.
    """

    log_items: List[LogItem] = field(default_factory=list)

    def _clean(self):
        self.log_items = []

    def _add_item(self, command, elapsed_time, status_counts, step_counts):
        self.log_items.insert(
            0,
            LogItem(
                command=command,
                elapsed_time=elapsed_time,
                status_counts=status_counts,
                step_counts=step_counts,
            ),
        )

    def get_all(self, attr: str) -> List:
        """Values of `attr` for all log items, newest first.

        Raises:
            AttributeError: If `attr` is not a `LogItem` field.
        """
        try:
            return [getattr(item, attr) for item in self.log_items]
        except AttributeError:
            raise AttributeError(
                f"Available attributes are: {', '.join([f.name for f in fields(LogItem)])}"
            )

    def __str__(self):
        header = [LogItem._headers[name] for name in LogItem._order]
        rows = [row for item in self.log_items for row in item.rows()]
        widths = [
            max([len(header[i])] + [len(row[i]) for row in rows]) for i in range(len(header))
        ]
        fstr = " ".join(f"{{:<{w}}}" for w in widths)
        sep = "-" * len(fstr.format(*header))
        lines = [sep, fstr.format(*header), sep]
        lines.extend(fstr.format(*row) for row in rows)
        lines.append(sep)
        return "\n".join(lines)


@dataclass
class RunResult:
    name: str
    status: RunStatus
    t: float
    steps: int
    summary: Dict[str, Any]
    output_dir: Optional[str] = None
    trajectory: Optional[Trajectory] = None

    @property
    def exit_code(self) -> ExitCode:
        return exit_code_for(self.status)


@dataclass
class SweepResult:
    rows: List[Dict[str, Any]]
    path: Optional[str] = None


@dataclass
class ViscosityStudy:
    epsilons: List[float]
    differences: List[float]
    statuses: List[str]
    path: Optional[str] = None

    @property
    def failed(self) -> List[float]:
        return [
            eps
            for eps, status in zip(self.epsilons, self.statuses)
            if status != RunStatus.FINISHED.value
        ]

    @property
    def monotone(self) -> bool:
        d = self.differences
        return all(b < a for a, b in zip(d, d[1:]))

    def as_dict(self) -> Dict[str, Any]:
        return {
            "epsilons": self.epsilons,
            "differences": self.differences,
            "statuses": self.statuses,
            "monotone": self.monotone,
            "failed": self.failed,
        }


def l2_time_difference(
    times_a: np.ndarray,
    snaps_a: np.ndarray,
    times_b: np.ndarray,
    snaps_b: np.ndarray,
    dx: float,
) -> float:
    """||a - b|| in L2(0, T; L2) with Simpson in time. `b` is interpolated
    linearly onto the times of `a` when the time grids differ."""
    if times_a.shape != times_b.shape or not np.allclose(times_a, times_b, rtol=0.0, atol=1e-12):
        snaps_b = interpolate.interp1d(times_b, snaps_b, axis=0, bounds_error=False,
                                       fill_value=(snaps_b[0], snaps_b[-1]))(times_a)
    squared = dx * np.sum((snaps_a - snaps_b) ** 2, axis=1)
    if times_a.size < 2:
        return 0.0
    if times_a.size < 3:
        return float(np.sqrt(integrate.trapezoid(squared, x=times_a)))
    return float(np.sqrt(max(integrate.simpson(squared, x=times_a), 0.0)))


def _member_row(
    point: Dict[str, float], cfg: Dict, name: str, output_dir: str
) -> Dict[str, Any]:
    """Run one sweep member from the base configuration `cfg`. Member errors,
    including out-of-range parameter values, are recorded, not raised."""
    row: Dict[str, Any] = dict(point)
    try:
        config = ExperimentConfig.from_cfg(cfg).with_parameters(**point)
        config.name = name
        config.outputs.directory = output_dir
        result = Experiment(config, output_dir).simulate()
    except NltError as err:
        logging.warning(f"Sweep member {point} failed: {err}")
        row.update({"status": "error", "exit_code": int(ExitCode.USAGE), "error": str(err)})
        return row
    summary = result.summary
    row.update(
        {
            "status": result.status.value,
            "exit_code": int(result.exit_code),
            "regime": summary["regime"]["label"],
            "expected": summary["regime"]["expected"],
            "t": result.t,
            "steps": result.steps,
            "error": "",
        }
    )
    for name, value in sorted(summary["worst_residuals"].items()):
        row[f"worst_{name}"] = value
    return row


class Experiment:
    """
    Runs the experiments described by an `ExperimentConfig`.

    Args:
        config: Validated configuration.
        output_dir: Output directory. Defaults to the directory resolved by
            `ExperimentConfig.output_directory`.
    """

    def __init__(self, config: ExperimentConfig, output_dir: Optional[str] = None):
        self.config = config
        self.output_dir = config.output_directory(output_dir)
        self._log = RunLog()

    @classmethod
    def from_file(cls, path: str, output_dir: Optional[str] = None) -> Experiment:
        return cls(ExperimentConfig.from_file(path), output_dir)

    @classmethod
    def from_cfg(cls, cfg: Dict, output_dir: Optional[str] = None) -> Experiment:
        return cls(ExperimentConfig.from_cfg(cfg), output_dir)

    def log(self) -> RunLog:
        """
        Get the experiment log

        Returns:
            [RunLog][nltlab.experiment.RunLog] object
        """
        return self._log

    def resolve_horizon(self, theta0: SpectralField, spec: ModelSpec) -> float:
        """
        Raises:
            NltConfigError: If the horizon is "auto" and the initial data
                has vanishing norm.
        """
        stepping = self.config.stepping
        if stepping.horizon != "auto":
            return float(stepping.horizon)
        try:
            return local_horizon_estimate(theta0, spec, stepping.horizon_constant)
        except NltDegenerateError as err:
            raise NltConfigError(f"stepping.horizon 'auto' is undefined: {err}")

    def header(self, spec: ModelSpec, horizon: float, t0: float, resumed_from: Optional[str]):
        partition = dyadic_partition(spec.grid)
        thresholds = self.config.thresholds
        return {
            "version": VERSION,
            "schema_version": SCHEMA_VERSION,
            "name": self.config.name,
            "run_id": self.config.run_id(),
            "regime": classify_regime(spec).as_dict(),
            "thresholds": {
                "blowup_threshold": thresholds.blowup_threshold,
                "blowup_growth": thresholds.blowup_growth,
                "tail_threshold": thresholds.tail_threshold,
            },
            "besov": {
                "j_min": partition.j_min,
                "j_max": partition.j_max,
                "j_resolved": partition.j_resolved,
            },
            "horizon": horizon,
            "t0": t0,
            "resumed_from": resumed_from,
            "snapshot_stride": self.config.outputs.snapshot_stride,
            "quadrature": {
                "records": "local-quadratic",
                "records_order": 3,
                "summary": "simpson",
            },
            "config": self.config.as_dict(),
        }

    def _run(
        self,
        config: ExperimentConfig,
        output_dir: Optional[str],
        resume: Optional[str] = None,
        horizon: Optional[float] = None,
    ) -> Tuple[StepperState, DiagnosticsEngine, float]:
        spec = config.to_spec()
        theta0 = spec.initial_field(config.seed)
        if horizon is None:
            horizon = self.resolve_horizon(theta0, spec)

        start, t0 = theta0, 0.0
        if resume is not None:
            chk = read_checkpoint(resume)
            if chk.n != spec.grid.n or chk.period != spec.grid.period:
                raise NltGridError(
                    f"Checkpoint grid (n={chk.n}, L={chk.period}) does not match the configuration"
                )
            start, t0 = chk.to_field(), chk.t
            logging.info(f"Resuming from {resume} at t={t0:.6g}")
        reference = blowup_indicator(theta0, spec).total

        outputs = config.outputs
        engine = DiagnosticsEngine(spec, outputs.snapshot_stride, outputs.record_stride)
        stepper = Stepper(spec, config.stepper_config(), horizon=horizon)

        sink = None
        if output_dir is not None:
            os.makedirs(output_dir, exist_ok=True)
            header = self.header(spec, horizon, t0, resume)
            sink = RecordSink(os.path.join(output_dir, RECORDS_FILE), header)

        def on_step(state: StepperState):
            record = engine.observe(state)
            if sink is not None and record is not None:
                sink.write(record.to_dict())
            every = outputs.checkpoint_every
            if output_dir is not None and every and state.step_count and state.step_count % every == 0:
                write_checkpoint(os.path.join(output_dir, RUNNING_CHECKPOINT), state.theta, state.t)

        logging.info(
            f"Run '{config.name}' ({spec.family.value}, n={spec.grid.n}) from t={t0:.6g} to {horizon:.6g}"
        )
        try:
            state = stepper.run(
                start,
                t0,
                on_step=on_step,
                max_steps=config.stepping.max_steps,
                blowup_reference=reference if config.thresholds.blowup_threshold is None else None,
            )
            closing = engine.finalize(state)
            if sink is not None and closing is not None:
                sink.write(closing.to_dict())
        finally:
            if sink is not None:
                sink.close()
        if state.status == RunStatus.RUNNING:
            logging.warning(f"Step limit reached at t={state.t:.6g} before the horizon")
        logging.info(
            f"Run '{config.name}' ended with status {state.status.value} at t={state.t:.6g} after {state.step_count} steps"
        )
        return state, engine, horizon

    def _weak_form(self, engine: DiagnosticsEngine, horizon: float) -> Optional[Dict]:
        section = self.config.weak_form
        spec = engine.spec
        if section is None or ModelFamily(spec.family) == ModelFamily.MODEL3:
            return None
        period = spec.grid.period
        psi = SpaceTimeBump(
            center=0.5 * period if section.center is None else section.center,
            width=section.width,
            duration=horizon if section.duration is None else section.duration,
            amplitude=section.amplitude,
        )
        try:
            if ModelFamily(spec.family) == ModelFamily.MODEL1:
                report = weak_form_residual(engine.trajectory, psi, spec)
            else:
                report = model2_weak_form_residual(engine.trajectory, psi, spec)
        except NltError as err:
            logging.warning(f"Weak form check skipped: {err}")
            return None
        return report.as_dict()

    def _checks(self, summary: Dict[str, Any]) -> Dict[str, bool]:
        th = self.config.thresholds
        worst = summary["worst_residuals"]
        checks = {}
        if "l1_identity" in worst:
            checks["l1_identity"] = worst["l1_identity"] <= th.l1_identity
        checks["energy_identity"] = worst.get("energy_identity", 0.0) <= th.energy_identity
        checks["max_increment"] = worst.get("max_increment", 0.0) <= th.max_increment
        checks["positivity"] = worst.get("positivity", 0.0) >= -th.positivity
        return checks

    def simulate(self, resume: Optional[str] = None, keep_trajectory: bool = True) -> RunResult:
        """
        Run to the horizon or a terminal status and write the records stream,
        the final checkpoint and the summary.

        Args:
            resume: Checkpoint to continue from.
            keep_trajectory: Attach the trajectory to the result.

        Raises:
            NltConfigError: If the horizon cannot be resolved.
            NltCheckpointError: If the resume checkpoint is corrupt.
        """
        tstart = time.time()
        state, engine, horizon = self._run(self.config, self.output_dir, resume)
        spec = engine.spec

        summary = summarize(engine, self.config.stepping.horizon_constant)
        summary.update(
            {
                "name": self.config.name,
                "run_id": self.config.run_id(),
                "version": VERSION,
                "regime": classify_regime(spec).as_dict(),
                "status": state.status.value,
                "exit_code": int(exit_code_for(state.status)),
                "t": state.t,
                "horizon": horizon,
                "steps": state.step_count,
                "rejections": state.rejections,
                "step_limit_reached": state.status == RunStatus.RUNNING,
                "blowup": state.indicator.as_dict() if state.indicator else {},
            }
        )
        reference = blowup_indicator(spec.initial_field(self.config.seed), spec).total
        summary["blowup"]["growth"] = (
            state.indicator.total / reference if state.indicator and reference > 0.0 else None
        )
        weak = self._weak_form(engine, horizon)
        if weak is not None:
            summary["weak_form"] = weak
        summary["checks"] = self._checks(summary)

        os.makedirs(self.output_dir, exist_ok=True)
        write_checkpoint(os.path.join(self.output_dir, FINAL_CHECKPOINT), state.theta, state.t)
        write_json(os.path.join(self.output_dir, SUMMARY_FILE), summary)

        self._log._add_item(
            "simulate",
            time.time() - tstart,
            {state.status.value: 1},
            {self.config.name: state.step_count},
        )
        return RunResult(
            name=self.config.name,
            status=state.status,
            t=state.t,
            steps=state.step_count,
            summary=summary,
            output_dir=self.output_dir,
            trajectory=engine.trajectory if keep_trajectory else None,
        )

    def sweep(
        self,
        workers: Optional[int] = None,
        skipfun: Optional[Callable[[Dict[str, float]], bool]] = None,
    ) -> SweepResult:
        """
        Run every point of the sweep section. Each member writes to its own
        directory under `members/`; the merged table `sweep.csv` is sorted by
        the parameter values.

        On Windows calling this method should be guarded by
        `if __name__ == '__main__':`

        Args:
            workers: Number of processes. If `None` one per point.
            skipfun: Called with the parameter values of each point. Points for
                which it returns `True` are skipped.

        Raises:
            NltConfigError: If the configuration has no sweep section or no
                points remain.
        """
        if self.config.sweep is None:
            raise NltConfigError("The configuration has no sweep section")
        skipfun = skipfun or _default_skipfun
        tstart = time.time()

        points = sweep_points(self.config.sweep.parameters, self.config.sweep.method)
        base = self.config.as_dict()
        args = []
        for point in points:
            if skipfun(point):
                continue
            label = "_".join(f"{k}={v:g}" for k, v in sorted(point.items()))
            member_dir = os.path.join(self.output_dir, "members", label)
            args.append((point, base, f"{self.config.name}-{label}", member_dir))

        if len(args) == 0:
            raise NltConfigError("No points found for sweep")

        nproc = len(args) if workers is None else max(workers, 1)
        logging.info(f"Sweep over {len(args)} points with {nproc} processes")
        if nproc == 1:
            rows = [_member_row(*arg) for arg in args]
        else:
            with Pool(nproc) as pool:
                rows = pool.starmap(_member_row, args)

        names = sorted(self.config.sweep.parameters)
        rows = sorted(rows, key=lambda r: tuple(r[name] for name in names))
        os.makedirs(self.output_dir, exist_ok=True)
        path = os.path.join(self.output_dir, "sweep.csv")
        columns = names + [
            "status", "exit_code", "regime", "expected", "t", "steps", "error"
        ]
        extra = sorted({key for row in rows for key in row} - set(columns))
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=columns + extra, restval="")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)

        statuses: Dict[str, int] = {}
        for row in rows:
            statuses[row["status"]] = statuses.get(row["status"], 0) + 1
        self._log._add_item(
            "sweep",
            time.time() - tstart,
            statuses,
            {"total": int(sum(row.get("steps", 0) for row in rows))},
        )
        logging.info("Sweep processed in {} s".format(time.time() - tstart))
        return SweepResult(rows=rows, path=path)

    def vanishing_viscosity(self, epsilons: Optional[Sequence[float]] = None) -> ViscosityStudy:
        """
        Run the same mollified data for a descending list of eps with a
        common fixed step and report the L2(0, T; L2) distance between
        consecutive members.

        Raises:
            NltConfigError: If the eps list is not descending.
        """
        tstart = time.time()
        section = self.config.vanishing_viscosity
        if epsilons is None:
            epsilons = section.epsilons if section is not None else None
        if epsilons is None:
            epsilons = VanishingViscositySection().epsilons
        eps = [float(e) for e in epsilons]
        if len(eps) < 2 or any(b > a for a, b in zip(eps, eps[1:])):
            raise NltConfigError(f"Vanishing viscosity needs a descending eps list. Got {eps}")

        base = copy.deepcopy(self.config)
        spec = base.to_spec()
        theta0 = spec.initial_field(base.seed)
        horizon = self.resolve_horizon(theta0, spec)
        dt = section.dt if section is not None and section.dt else base.stepping.dt
        if dt is None:
            stepper = Stepper(spec, base.stepper_config(), horizon=horizon)
            dt = 0.5 * stepper.cfl(theta0)
        base.stepping.dt = dt
        base.stepping.adaptive = False
        base.outputs.snapshot_stride = 1

        trajectories = []
        statuses = []
        for e in eps:
            member = copy.deepcopy(base)
            member.model.epsilon = e
            member.name = f"{base.name}-eps={e:g}"
            member.validate()
            member_dir = os.path.join(self.output_dir, "members", f"eps={e:g}")
            state, engine, _ = self._run(member, member_dir, horizon=horizon)
            statuses.append(state.status.value)
            trajectories.append(engine.trajectory)

        dx = spec.grid.dx
        differences = []
        for a, b in zip(trajectories, trajectories[1:]):
            differences.append(
                l2_time_difference(
                    np.asarray(a.snapshot_times),
                    np.asarray(a.snapshots),
                    np.asarray(b.snapshot_times),
                    np.asarray(b.snapshots),
                    dx,
                )
            )
        study = ViscosityStudy(eps, differences, statuses)
        if study.failed:
            logging.warning(f"Vanishing viscosity members did not finish: {study.failed}")

        os.makedirs(self.output_dir, exist_ok=True)
        csv_path = os.path.join(self.output_dir, "viscosity.csv")
        with open(csv_path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["epsilon", "next_epsilon", "difference"])
            for a, b, d in zip(eps, eps[1:], differences):
                writer.writerow([a, b, d])
        write_json(os.path.join(self.output_dir, "viscosity.json"), study.as_dict())
        study.path = csv_path

        counts: Dict[str, int] = {}
        for status in statuses:
            counts[status] = counts.get(status, 0) + 1
        self._log._add_item(
            "vanishing-viscosity",
            time.time() - tstart,
            counts,
            {f"eps={e:g}": len(t) - 1 for e, t in zip(eps, trajectories)},
        )
        return study

    def blowup_study(self, n: Optional[int] = None, horizon_factor: float = 50.0) -> RunResult:
        """
        Inviscid model1 run on the configured data: nu = eps = 0, adaptive
        steps, and unless a numeric horizon is configured `horizon_factor`
        times the local horizon estimate. Only every 16th snapshot is kept.
        """
        cfg = copy.deepcopy(self.config)
        cfg.model.family = ModelFamily.MODEL1.value
        cfg.model.alpha = 0.0
        cfg.model.beta = 0.0
        cfg.model.nu = 0.0
        cfg.model.epsilon = 0.0
        cfg.model.transport = True
        cfg.stepping.adaptive = True
        cfg.outputs.snapshot_stride = max(cfg.outputs.snapshot_stride, 16)
        if n is not None:
            cfg.grid.n = int(n)
            cfg.grid.validate()
        if cfg.stepping.horizon == "auto":
            spec = cfg.to_spec()
            theta0 = spec.initial_field(cfg.seed)
            cfg.stepping.horizon = horizon_factor * self.resolve_horizon(theta0, spec)
            logging.info(f"Blow-up study horizon {cfg.stepping.horizon:.4g}")
        cfg.validate()
        study = Experiment(cfg, self.output_dir)
        result = study.simulate()
        self._log.log_items[:0] = study.log().log_items
        return result
