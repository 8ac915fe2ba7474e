"""
Experiment configuration.

A configuration file is YAML with the top-level keys below. Every section
is optional and falls back to its defaults.

```yaml
schema_version: 1
name: model1-bump
seed: 0
model:
  family: model1
  nu: 0.0
  epsilon: 0.0
grid:
  n: 1024
  period: 32pi
initial_data:
  kind: positive-bump
  width: 4.0
stepping:
  horizon: auto
thresholds:
  blowup_growth: 100
outputs:
  directory: runs/model1-bump
sweep:
  parameters:
    gamma: [0.5, 1.0]
  method: product
```
"""

from __future__ import annotations
import copy
from dataclasses import asdict, dataclass, field, fields
import hashlib
import json
import math
import os
import re
from typing import Any, Dict, List, Optional, Type, TypeVar, Union

import yaml

from .errors import NltConfigError, NltError
from .integrator import StepperConfig
from .models import InitialDataKind, InitialDataRecipe, ModelFamily, ModelSpec
from .spectral import Grid

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "NLTLAB_OUTPUT_DIR"
SWEEP_PARAMETERS = ("alpha", "beta", "gamma", "epsilon", "nu", "n")
SWEEP_METHODS = ("product", "zip")

_PI_PATTERN = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*$")

T = TypeVar("T")


def parse_period(value: Union[str, float, int]) -> float:
    """A number or a multiple of pi written as e.g. `32pi` or `2*pi`."""
    if isinstance(value, (int, float)):
        return float(value)
    match = _PI_PATTERN.match(str(value))
    if match is None:
        try:
            return float(value)
        except ValueError:
            raise NltConfigError(f"Cannot read grid period '{value}'")
    factor = match.group(1)
    return (float(factor) if factor else 1.0) * math.pi


def _coerce(value: Any, annotation: str) -> Any:
    # YAML 1.1 reads 1e-2 as a string
    if isinstance(value, str) and "float" in annotation:
        try:
            return float(value)
        except ValueError:
            return value
    return value


def _section(cls: Type[T], cfg: Optional[Dict], name: str) -> T:
    if cfg is None:
        cfg = {}
    if not isinstance(cfg, dict):
        raise NltConfigError(f"Section '{name}' must be a mapping")
    types = {f.name: str(f.type) for f in fields(cls)}
    cfg = {key: _coerce(value, types.get(key, "")) for key, value in cfg.items()}
    known = set(types)
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise NltConfigError(f"Unknown key(s) in section '{name}': {', '.join(unknown)}")
    try:
        return cls(**cfg)
    except TypeError as err:
        raise NltConfigError(f"Invalid section '{name}': {err}")


@dataclass
class ModelSection:
    family: str = ModelFamily.MODEL1.value
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 1.0
    nu: float = 0.0
    epsilon: float = 0.0
    sign: int = 1
    inhomogeneous_smoothing: bool = False
    transport: bool = True

    def validate(self) -> ModelSection:
        families = [f.value for f in ModelFamily]
        if self.family not in families:
            raise NltConfigError(
                f"model.family must be one of {families}. Got '{self.family}'"
            )
        return self

    @classmethod
    def from_cfg(cls, cfg: Optional[Dict]) -> ModelSection:
        return _section(cls, cfg, "model").validate()


@dataclass
class GridSection:
    n: int = 1024
    period: float = 32.0 * math.pi

    def validate(self) -> GridSection:
        try:
            Grid(int(self.n), float(self.period))
        except NltError as err:
            raise NltConfigError(f"grid: {err}")
        return self

    @classmethod
    def from_cfg(cls, cfg: Optional[Dict]) -> GridSection:
        section = _section(cls, cfg, "grid")
        section.period = parse_period(section.period)
        section.n = int(section.n)
        return section.validate()


@dataclass
class InitialDataSection:
    kind: str = InitialDataKind.GAUSSIAN_LIKE.value
    amplitude: float = 1.0
    center: Optional[float] = None
    width: float = 1.0
    modes: List[List[float]] = field(default_factory=list)
    offset: float = 0.0
    random_phases: bool = False
    path: Optional[str] = None
    mollify_epsilon: float = 0.0

    def validate(self) -> InitialDataSection:
        kinds = [k.value for k in InitialDataKind]
        if self.kind not in kinds:
            raise NltConfigError(f"initial_data.kind must be one of {kinds}. Got '{self.kind}'")
        for mode in self.modes:
            if len(mode) != 2:
                raise NltConfigError("initial_data.modes entries are [m, amplitude] pairs")
        try:
            self.recipe().validate()
        except NltError as err:
            raise NltConfigError(f"initial_data: {err}")
        return self

    def recipe(self) -> InitialDataRecipe:
        return InitialDataRecipe(
            kind=InitialDataKind(self.kind),
            amplitude=float(self.amplitude),
            center=None if self.center is None else float(self.center),
            width=float(self.width),
            modes=[(int(m), float(a)) for m, a in self.modes],
            offset=float(self.offset),
            random_phases=bool(self.random_phases),
            path=self.path,
            mollify_epsilon=float(self.mollify_epsilon),
        )

    @classmethod
    def from_cfg(cls, cfg: Optional[Dict]) -> InitialDataSection:
        return _section(cls, cfg, "initial_data").validate()


@dataclass
class SteppingSection:
    """`horizon` is a final time or "auto", in which case c / ||theta_0||
    is used with c = `horizon_constant`."""

    horizon: Union[str, float] = "auto"
    horizon_constant: float = 1.0
    safety: float = 0.5
    dt_min: float = 1e-10
    dt_max: float = 1e-2
    dt: Optional[float] = None
    adaptive: bool = True
    max_steps: Optional[int] = None

    def validate(self) -> SteppingSection:
        if isinstance(self.horizon, str):
            if self.horizon != "auto":
                raise NltConfigError(f"stepping.horizon must be a number or 'auto'. Got '{self.horizon}'")
        elif not self.horizon > 0.0:
            raise NltConfigError("stepping.horizon must be positive")
        if not 0.0 < self.safety <= 1.0:
            raise NltConfigError("stepping.safety must lie in (0, 1]")
        if not 0.0 < self.dt_min <= self.dt_max:
            raise NltConfigError("stepping requires 0 < dt_min <= dt_max")
        if self.dt is not None and not self.dt > 0.0:
            raise NltConfigError("stepping.dt must be positive")
        if not self.horizon_constant > 0.0:
            raise NltConfigError("stepping.horizon_constant must be positive")
        return self

    @classmethod
    def from_cfg(cls, cfg: Optional[Dict]) -> SteppingSection:
        return _section(cls, cfg, "stepping").validate()


@dataclass
class ThresholdSection:
    """Blow-up detection settings and the tolerances the summary checks
    residuals against."""

    blowup_threshold: Optional[float] = None
    blowup_growth: float = 100.0
    tail_threshold: float = 1e-3
    l1_identity: float = 1e-6
    energy_identity: float = 1e-8
    max_increment: float = 1e-9
    positivity: float = 1e-8

    def validate(self) -> ThresholdSection:
        if self.blowup_threshold is not None and not self.blowup_threshold > 0.0:
            raise NltConfigError("thresholds.blowup_threshold must be positive")
        if not self.blowup_growth > 1.0:
            raise NltConfigError("thresholds.blowup_growth must exceed 1")
        if not 0.0 < self.tail_threshold < 1.0:
            raise NltConfigError("thresholds.tail_threshold must lie in (0, 1)")
        return self

    @classmethod
    def from_cfg(cls, cfg: Optional[Dict]) -> ThresholdSection:
        return _section(cls, cfg, "thresholds").validate()


@dataclass
class OutputSection:
    directory: Optional[str] = None
    record_stride: int = 1
    snapshot_stride: int = 1
    checkpoint_every: int = 0

    def validate(self) -> OutputSection:
        if self.record_stride < 1 or self.snapshot_stride < 1:
            raise NltConfigError("outputs strides must be positive integers")
        if self.checkpoint_every < 0:
            raise NltConfigError("outputs.checkpoint_every must be nonnegative")
        return self

    @classmethod
    def from_cfg(cls, cfg: Optional[Dict]) -> OutputSection:
        return _section(cls, cfg, "outputs").validate()


@dataclass
class SweepSection:
    """
    Args:
        parameters: Parameter name to list of values.
        method: `product` for the cartesian product of the value lists, `zip`
            to pair the lists element by element.
    """

    parameters: Dict[str, List[float]] = field(default_factory=dict)
    method: str = "product"

    def validate(self) -> SweepSection:
        for name, values in self.parameters.items():
            if name not in SWEEP_PARAMETERS:
                raise NltConfigError(
                    f"sweep.parameters.{name} is not sweepable. Use one of {SWEEP_PARAMETERS}"
                )
            if not isinstance(values, list):
                raise NltConfigError(f"sweep.parameters.{name} must be a list")
        if self.method not in SWEEP_METHODS:
            raise NltConfigError(f"sweep.method must be one of {SWEEP_METHODS}")
        if self.method == "zip":
            lengths = {len(v) for v in self.parameters.values()}
            if len(lengths) > 1:
                raise NltConfigError("sweep.method 'zip' requires lists of equal length")
        return self

    @classmethod
    def from_cfg(cls, cfg: Optional[Dict]) -> SweepSection:
        return _section(cls, cfg, "sweep").validate()


@dataclass
class WeakFormSection:
    """Space-time bump test function for the weak formulation check. A
    `duration` of None uses the run horizon."""

    center: Optional[float] = None
    width: float = 4.0
    duration: Optional[float] = None
    amplitude: float = 1.0

    @classmethod
    def from_cfg(cls, cfg: Optional[Dict]) -> WeakFormSection:
        section = _section(cls, cfg, "weak_form")
        if not section.width > 0.0 or not section.amplitude >= 0.0:
            raise NltConfigError("weak_form requires width > 0 and amplitude >= 0")
        return section


@dataclass
class VanishingViscositySection:
    epsilons: List[float] = field(default_factory=lambda: [1e-2, 5e-3, 2.5e-3, 1.25e-3])
    dt: Optional[float] = None

    def validate(self) -> VanishingViscositySection:
        eps = [float(e) for e in self.epsilons]
        if len(eps) < 2:
            raise NltConfigError("vanishing_viscosity.epsilons needs at least two values")
        if any(e <= 0.0 for e in eps):
            raise NltConfigError("vanishing_viscosity.epsilons must be positive")
        if any(b > a for a, b in zip(eps, eps[1:])):
            raise NltConfigError("vanishing_viscosity.epsilons must be descending")
        self.epsilons = eps
        return self

    @classmethod
    def from_cfg(cls, cfg: Optional[Dict]) -> VanishingViscositySection:
        return _section(cls, cfg, "vanishing_viscosity").validate()


_SECTIONS = {
    "model": ModelSection,
    "grid": GridSection,
    "initial_data": InitialDataSection,
    "stepping": SteppingSection,
    "thresholds": ThresholdSection,
    "outputs": OutputSection,
    "sweep": SweepSection,
    "weak_form": WeakFormSection,
    "vanishing_viscosity": VanishingViscositySection,
}


@dataclass
class ExperimentConfig:
    """Complete experiment description. Serializes back to the mapping it
    was read from, normalized and with defaults filled in."""

    name: str = "experiment"
    seed: int = 0
    model: ModelSection = field(default_factory=ModelSection)
    grid: GridSection = field(default_factory=GridSection)
    initial_data: InitialDataSection = field(default_factory=InitialDataSection)
    stepping: SteppingSection = field(default_factory=SteppingSection)
    thresholds: ThresholdSection = field(default_factory=ThresholdSection)
    outputs: OutputSection = field(default_factory=OutputSection)
    sweep: Optional[SweepSection] = None
    weak_form: Optional[WeakFormSection] = None
    vanishing_viscosity: Optional[VanishingViscositySection] = None
    schema_version: int = SCHEMA_VERSION

    def validate(self) -> ExperimentConfig:
        """
        Raises:
            NltConfigError: If the model parameters are inconsistent.
        """
        if self.schema_version != SCHEMA_VERSION:
            raise NltConfigError(
                f"Unsupported schema_version {self.schema_version}. Expected {SCHEMA_VERSION}"
            )
        try:
            self.to_spec().validate()
        except NltError as err:
            raise NltConfigError(f"model: {err}")
        return self

    @classmethod
    def from_cfg(cls, cfg: Optional[Dict]) -> ExperimentConfig:
        """
        Create instance from configuration data

        Args:
            cfg: Configuration mapping as read from YAML.

        Returns:
            ExperimentConfig: Validated configuration.

        Raises:
            NltConfigError: On unknown keys or invalid values.
        """
        cfg = copy.deepcopy(cfg or {})
        if not isinstance(cfg, dict):
            raise NltConfigError("Configuration must be a mapping")
        top = {"name", "seed", "schema_version", *_SECTIONS}
        unknown = sorted(set(cfg) - top)
        if unknown:
            raise NltConfigError(f"Unknown top-level key(s): {', '.join(unknown)}")
        kwargs: Dict[str, Any] = {
            "name": str(cfg.get("name", "experiment")),
            "seed": int(cfg.get("seed", 0)),
            "schema_version": int(cfg.get("schema_version", SCHEMA_VERSION)),
        }
        for key, section in _SECTIONS.items():
            if key in cfg or key not in ("sweep", "weak_form", "vanishing_viscosity"):
                kwargs[key] = section.from_cfg(cfg.get(key))
        return cls(**kwargs).validate()

    @classmethod
    def from_file(cls, path: str) -> ExperimentConfig:
        """
        Raises:
            NltConfigError: If the file cannot be read or parsed.
        """
        try:
            with open(path, "r") as stream:
                cfg = yaml.load(stream, Loader=yaml.FullLoader)
        except (OSError, yaml.YAMLError) as err:
            raise NltConfigError(f"Cannot read configuration '{path}': {err}")
        return cls.from_cfg(cfg)

    def as_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        return {key: value for key, value in out.items() if value is not None}

    def canonical_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)

    def run_id(self) -> str:
        """md5 of the canonical JSON serialization."""
        return hashlib.md5(self.canonical_json().encode("utf-8")).hexdigest()

    def to_spec(self) -> ModelSpec:
        m = self.model
        return ModelSpec(
            family=ModelFamily(m.family),
            alpha=float(m.alpha),
            beta=float(m.beta),
            gamma=float(m.gamma),
            nu=float(m.nu),
            epsilon=float(m.epsilon),
            sign=int(m.sign),
            grid=Grid(int(self.grid.n), float(self.grid.period)),
            initial_data=self.initial_data.recipe(),
            inhomogeneous_smoothing=bool(m.inhomogeneous_smoothing),
            transport=bool(m.transport),
        )

    def stepper_config(self) -> StepperConfig:
        s = self.stepping
        th = self.thresholds
        return StepperConfig(
            safety=s.safety,
            dt_min=s.dt_min,
            dt_max=s.dt_max,
            dt=s.dt,
            adaptive=s.adaptive,
            blowup_threshold=th.blowup_threshold,
            blowup_growth=th.blowup_growth,
            tail_threshold=th.tail_threshold,
        )

    def with_parameters(self, **params) -> ExperimentConfig:
        """Copy with model or grid parameters replaced, as for a sweep point.

        Raises:
            NltConfigError: If a parameter is not sweepable.
        """
        out = copy.deepcopy(self)
        for name, value in params.items():
            if name == "n":
                out.grid.n = int(value)
                out.grid.validate()
            elif name in SWEEP_PARAMETERS:
                setattr(out.model, name, float(value))
            else:
                raise NltConfigError(f"'{name}' is not a sweepable parameter")
        out.sweep = None
        return out.validate()

    def output_directory(self, override: Optional[str] = None) -> str:
        """`override`, then outputs.directory, then $NLTLAB_OUTPUT_DIR, then
        ./runs, with the config name appended to the last two."""
        if override:
            return override
        if self.outputs.directory:
            return self.outputs.directory
        base = os.environ.get(OUTPUT_DIR_ENV, "runs")
        return os.path.join(base, self.name)

