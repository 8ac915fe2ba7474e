"""
Norms, identity residuals and budget monitors evaluated along a run.

A `DiagnosticsEngine` observes accepted stepper states, records the norm
series of every step in a `Trajectory` together with strided snapshots of
theta, and keeps streaming residuals for the record stream. The functions
below it evaluate the trajectory-level identities with Simpson quadrature
in time.
"""

from __future__ import annotations
from dataclasses import dataclass, field
import logging
import math
from typing import Any, Dict, List, Optional, Protocol, Tuple

import numpy as np
from scipy import integrate

from .errors import NltDegenerateError, NltInapplicableError, NltParameterError
from .integrator import StepperState
from .models import ModelFamily, ModelSpec, rhs
from .operators import hardy_product, hilbert, lambda_pow, smoothing_op, velocity
from .paley import dyadic_partition, half_commutator
from .spectral import (
    Grid,
    SpectralField,
    dealiased_product,
    derivative,
    inner,
    lp_norm,
    sobolev_norm,
    sup_norm,
)
from .utils import RunningIntegral, bump, periodic_distance

NORM_NAMES = ("L1", "L2", "Linf", "H1/2", "Hgamma/2", "H2", "B3/2_2,1")

# Below this fraction of ||theta||_inf negative values are treated as round-off
NEGATIVITY_TOLERANCE = 1e-10


@dataclass
class RunRecord:
    t: float
    dt: float
    step: int
    status: str
    mean: float
    min: float
    norms: Dict[str, float]
    residuals: Dict[str, Optional[float]]
    blowup: Dict[str, float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "dt": self.dt,
            "step": self.step,
            "status": self.status,
            "mean": self.mean,
            "min": self.min,
            "norms": dict(self.norms),
            "residuals": dict(self.residuals),
            "blowup": dict(self.blowup),
        }


@dataclass
class Trajectory:
    """Scalar series of every observed step and snapshots of theta taken at a
    fixed stride. The first and the last observed states are always kept."""

    grid: Grid
    snapshot_stride: int = 1
    times: List[float] = field(default_factory=list)
    series: Dict[str, List[float]] = field(default_factory=dict)
    snapshot_times: List[float] = field(default_factory=list)
    snapshots: List[np.ndarray] = field(default_factory=list)
    records: List[RunRecord] = field(default_factory=list)

    def append(self, t: float, values: Dict[str, float]):
        self.times.append(float(t))
        for name, value in values.items():
            self.series.setdefault(name, []).append(float(value))

    def add_snapshot(self, t: float, theta: SpectralField):
        if self.snapshot_times and self.snapshot_times[-1] == t:
            return
        self.snapshot_times.append(float(t))
        self.snapshots.append(theta.physical.copy())

    def series_array(self, name: str) -> np.ndarray:
        return np.asarray(self.series.get(name, []), dtype=float)

    def time_array(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)

    def fields(self) -> List[SpectralField]:
        return [SpectralField.from_physical(self.grid, v) for v in self.snapshots]

    @property
    def theta0(self) -> SpectralField:
        if not self.snapshots:
            raise NltDegenerateError("Trajectory holds no snapshots")
        return SpectralField.from_physical(self.grid, self.snapshots[0])

    def __len__(self):
        return len(self.times)


def _cumulative(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Running integral from the first time, Simpson when at least three
    samples exist."""
    if values.size < 2:
        return np.zeros_like(values)
    if values.size < 3:
        return integrate.cumulative_trapezoid(values, x=times, initial=0.0)
    return integrate.cumulative_simpson(values, x=times, initial=0.0)


def _total(values: np.ndarray, times: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    if values.size < 3:
        return float(integrate.trapezoid(values, x=times))
    return float(integrate.simpson(values, x=times))


def _check_nonnegative(theta: SpectralField, what: str):
    values = theta.physical
    scale = float(np.max(np.abs(values)))
    if values.min() < -NEGATIVITY_TOLERANCE * scale:
        raise NltInapplicableError(
            f"{what} requires a nonnegative field. Found min {values.min():.3e}"
        )


def l1_exponent(spec: ModelSpec) -> float:
    """Exponent e of the L1 dissipation ||Lambda^e theta||^2: 1/2 for model1,
    1/2 - alpha for model2."""
    family = ModelFamily(spec.family)
    if family == ModelFamily.MODEL3:
        raise NltInapplicableError("The L1 identity does not apply to model3")
    return 0.5 - spec.alpha if family == ModelFamily.MODEL2 else 0.5


def _l1_dissipation(theta: SpectralField, spec: ModelSpec, exponent: float) -> float:
    if ModelFamily(spec.family) == ModelFamily.MODEL2 and spec.inhomogeneous_smoothing:
        # ||Lambda^1/2 (1 - dxx)^(-alpha/2) theta||^2 = <Lambda S theta, theta>
        smoothed = smoothing_op(theta.grid, spec.alpha, True)(lambda_pow(theta, 1.0))
        return inner(smoothed, theta)
    return sobolev_norm(theta, exponent) ** 2


# ---------------------------------------------------------------------------
# Instantaneous identities
# ---------------------------------------------------------------------------


def _relative(lhs: float, rhs_value: float, terms: Tuple[float, ...]) -> float:
    scale = max(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs_value) / scale


def energy_identity_residual(theta: SpectralField, spec: ModelSpec) -> float:
    """
    Residual of 1/2 d/dt ||theta||^2 + nu ||Lambda^(gamma/2) theta||^2
    + eps ||theta_x||^2 = 1/2 int u_x theta^2, with the time derivative taken
    from <rhs(theta), theta> and the cubic term assembled separately.
    """
    rate = inner(rhs(theta, spec), theta)
    dissipation = spec.nu * sobolev_norm(theta, 0.5 * spec.gamma) ** 2
    dissipation += spec.epsilon * sobolev_norm(theta, 1.0) ** 2
    if spec.transport:
        u_x = velocity(derivative(theta, 1), spec)
        cubic = 0.5 * inner(u_x, dealiased_product(theta, theta))
    else:
        cubic = 0.0
    return _relative(rate + dissipation, cubic, (rate, dissipation, cubic))


def h1_energy_identity_residual(theta: SpectralField, spec: ModelSpec) -> float:
    """
    Residual of 1/2 d/dt ||theta_x||^2 + nu ||Lambda^(gamma/2) theta_x||^2
    + eps ||theta_xx||^2 = int u theta_x theta_xx.
    """
    theta_x = derivative(theta, 1)
    rate = inner(derivative(rhs(theta, spec), 1), theta_x)
    dissipation = spec.nu * sobolev_norm(theta_x, 0.5 * spec.gamma) ** 2
    dissipation += spec.epsilon * sobolev_norm(theta, 2.0) ** 2
    if spec.transport:
        u = velocity(theta, spec)
        cubic = inner(u, dealiased_product(theta_x, derivative(theta, 2)))
    else:
        cubic = 0.0
    return _relative(rate + dissipation, cubic, (rate, dissipation, cubic))


def h_half_energy_residual(theta: SpectralField, spec: ModelSpec) -> float:
    """
    Residual of 1/2 d/dt ||Lambda^1/2 theta||^2 + nu ||Lambda^((1+gamma)/2) theta||^2
    + eps ||Lambda^3/2 theta||^2 = -int u theta_x H theta_x, with the product
    theta_x H theta_x written through the Hardy identity.
    """
    rate = inner(rhs(theta, spec), lambda_pow(theta, 1.0))
    dissipation = spec.nu * sobolev_norm(theta, 0.5 * (1.0 + spec.gamma)) ** 2
    dissipation += spec.epsilon * sobolev_norm(theta, 1.5) ** 2
    if spec.transport:
        u = velocity(theta, spec)
        cubic = -inner(u, hardy_product(derivative(theta, 1)))
    else:
        cubic = 0.0
    return _relative(rate + dissipation, cubic, (rate, dissipation, cubic))


def sobolev_interpolation_ratio(
    f: SpectralField, s0: float, s1: float, lam: float
) -> float:
    """
    ||f||_{H^s} / (||f||_{H^s0}^(1-lam) ||f||_{H^s1}^lam) with
    s = (1-lam) s0 + lam s1, homogeneous norms. At most one by Hoelder.

    Raises:
        NltParameterError: If lam is outside [0, 1].
        NltDegenerateError: If a norm in the denominator vanishes.
    """
    if not 0.0 <= lam <= 1.0:
        raise NltParameterError(f"Interpolation weight must lie in [0, 1]. Got {lam}")
    low = sobolev_norm(f, s0)
    high = sobolev_norm(f, s1)
    if low == 0.0 or high == 0.0:
        raise NltDegenerateError("Interpolation ratio of a constant field is undefined")
    s = (1.0 - lam) * s0 + lam * s1
    return sobolev_norm(f, s) / (low ** (1.0 - lam) * high**lam)


# ---------------------------------------------------------------------------
# Streaming engine
# ---------------------------------------------------------------------------


class DiagnosticsEngine:
    """
    Computes the norms and the running residuals of every observed state.

    Args:
        spec: Model description of the run.
        snapshot_stride: Keep theta every this many observed states.
        record_stride: Emit a `RunRecord` every this many observed states.
    """

    def __init__(self, spec: ModelSpec, snapshot_stride: int = 1, record_stride: int = 1):
        if snapshot_stride < 1 or record_stride < 1:
            raise NltParameterError("Strides must be positive integers")
        self.spec = spec
        self.partition = dyadic_partition(spec.grid)
        self.record_stride = record_stride
        self.trajectory = Trajectory(spec.grid, snapshot_stride)
        family = ModelFamily(spec.family)
        self._l1_exponent = None if family == ModelFamily.MODEL3 else l1_exponent(spec)
        self._l1_integral = RunningIntegral()
        self._l2_integral = RunningIntegral()
        self._initial: Dict[str, float] = {}
        self._count = 0
        self._worst: Dict[str, float] = {}
        self._last: Optional[Tuple[SpectralField, Dict, Dict, Dict]] = None

    def norms(self, theta: SpectralField) -> Dict[str, float]:
        return {
            "L1": lp_norm(theta, 1.0),
            "L2": lp_norm(theta, 2.0),
            "Linf": sup_norm(theta),
            "H1/2": sobolev_norm(theta, 0.5),
            "Hgamma/2": sobolev_norm(theta, 0.5 * self.spec.gamma),
            "H2": sobolev_norm(theta, 2.0, homogeneous=False),
            "B3/2_2,1": self.partition.besov_norm(theta, 1.5, 2.0, 1.0).value,
        }

    def _series_values(self, theta: SpectralField, norms: Dict[str, float]) -> Dict[str, float]:
        spec = self.spec
        values = dict(norms)
        values["min"] = float(theta.physical.min())
        values["mean"] = theta.mean
        values["l2_dissipation"] = (
            spec.nu * norms["Hgamma/2"] ** 2 + spec.epsilon * sobolev_norm(theta, 1.0) ** 2
        )
        if spec.transport:
            u_x = velocity(derivative(theta, 1), spec)
            values["cubic"] = 0.5 * inner(u_x, dealiased_product(theta, theta))
        else:
            values["cubic"] = 0.0
        if self._l1_exponent is not None:
            values["l1_dissipation"] = _l1_dissipation(theta, spec, self._l1_exponent)
        return values

    def observe(self, state: StepperState) -> Optional[RunRecord]:
        """Record one accepted state. Returns a `RunRecord` on record steps."""
        theta = state.theta
        norms = self.norms(theta)
        values = self._series_values(theta, norms)
        if state.indicator is not None:
            values["indicator"] = state.indicator.total
            values["tail_fraction"] = state.indicator.tail_fraction
        self.trajectory.append(state.t, values)
        if self._count % self.trajectory.snapshot_stride == 0:
            self.trajectory.add_snapshot(state.t, theta)
        if not self._initial:
            self._initial = dict(values)

        residuals = self._residuals(state, values)
        for name, value in residuals.items():
            if value is not None and name not in ("max_increment", "positivity"):
                self._worst[name] = max(self._worst.get(name, 0.0), abs(value))

        self._last = (state.theta, norms, values, residuals)
        record = None
        if self._count % self.record_stride == 0:
            record = self._record(state, norms, values, residuals)
        self._count += 1
        return record

    def _record(self, state, norms, values, residuals) -> RunRecord:
        record = RunRecord(
            t=state.t,
            dt=state.dt,
            step=state.step_count,
            status=state.status.value,
            mean=values["mean"],
            min=values["min"],
            norms=norms,
            residuals=residuals,
            blowup=state.indicator.as_dict() if state.indicator else {},
        )
        self.trajectory.records.append(record)
        return record

    def finalize(self, state: StepperState) -> Optional[RunRecord]:
        """Keep the snapshot of the last observed state and emit a closing
        record carrying the terminal status, unless the last record already
        does."""
        if self._last is None:
            return None
        theta, norms, values, residuals = self._last
        self.trajectory.add_snapshot(self.trajectory.times[-1], theta)
        records = self.trajectory.records
        if records and records[-1].t == state.t and records[-1].status == state.status.value:
            return None
        return self._record(state, norms, values, residuals)

    def _residuals(self, state: StepperState, values: Dict[str, float]) -> Dict[str, Optional[float]]:
        spec = self.spec
        theta = state.theta
        first = self._initial
        out: Dict[str, Optional[float]] = {}

        if self._l1_exponent is not None:
            integral = self._l1_integral.add(state.t, values["l1_dissipation"])
            scale = first["L1"]
            nonnegative = values["min"] >= -NEGATIVITY_TOLERANCE * values["Linf"]
            if scale > 0.0 and nonnegative:
                out["l1_identity"] = (values["L1"] + integral - scale) / scale
            else:
                out["l1_identity"] = None

        budget = self._l2_integral.add(state.t, values["l2_dissipation"] - values["cubic"])
        energy0 = 0.5 * first["L2"] ** 2
        out["l2_budget"] = (
            (0.5 * values["L2"] ** 2 + budget - energy0) / energy0 if energy0 > 0.0 else 0.0
        )
        out["energy_identity"] = energy_identity_residual(theta, spec)
        out["h1_identity"] = h1_energy_identity_residual(theta, spec)
        out["h_half_identity"] = h_half_energy_residual(theta, spec)

        linf = self.trajectory.series["Linf"]
        scale = first["Linf"]
        increment = linf[-1] - linf[-2] if len(linf) > 1 else 0.0
        out["max_increment"] = increment / scale if scale > 0.0 else 0.0
        out["positivity"] = values["min"] / scale if scale > 0.0 else 0.0
        return out

    def worst_residuals(self) -> Dict[str, float]:
        out = dict(self._worst)
        if len(self.trajectory) > 0:
            out["max_increment"] = max_principle_monitor(self.trajectory, relative=True)
            out["positivity"] = positivity_monitor(self.trajectory)
        return out


# ---------------------------------------------------------------------------
# Trajectory identities
# ---------------------------------------------------------------------------


def l1_budget_residual(trajectory: Trajectory, spec: ModelSpec, exponent: float) -> np.ndarray:
    """
    (||theta(t)||_1 + int_0^t ||Lambda^exponent theta||^2 ds - ||theta_0||_1) / ||theta_0||_1
    at every snapshot time.

    Raises:
        NltInapplicableError: If a snapshot is negative beyond round-off.
    """
    fields = trajectory.fields()
    if not fields:
        return np.zeros(0)
    times = np.asarray(trajectory.snapshot_times)
    masses = []
    dissipation = []
    for theta in fields:
        _check_nonnegative(theta, "The L1 identity")
        masses.append(lp_norm(theta, 1.0))
        dissipation.append(_l1_dissipation(theta, spec, exponent))
    masses = np.asarray(masses)
    scale = masses[0]
    if scale == 0.0:
        return np.zeros_like(masses)
    running = _cumulative(np.asarray(dissipation), times)
    return (masses + running - scale) / scale


def l1_identity_residual(trajectory: Trajectory, spec: Optional[ModelSpec] = None) -> float:
    """
    Signed residual of largest magnitude in
    ||theta(t)||_1 + int_0^t ||Lambda^1/2 theta||^2 ds = ||theta_0||_1.

    On the torus the identity is an equality for every nu and eps, since
    Lambda^gamma theta and theta_xx integrate to zero.
    """
    spec = spec or ModelSpec(grid=trajectory.grid)
    residual = l1_budget_residual(trajectory, spec, 0.5)
    if residual.size == 0:
        return 0.0
    return float(residual[np.argmax(np.abs(residual))])


def model2_l1_budget(trajectory: Trajectory, spec: ModelSpec) -> float:
    """
    Largest signed residual of
    ||theta(t)||_1 + int_0^t ||Lambda^1/2 (dxx)^(-alpha/2) theta||^2 ds <= ||theta_0||_1.
    For alpha = 0 this is the model1 identity.
    """
    residual = l1_budget_residual(trajectory, spec, 0.5 - spec.alpha)
    if residual.size == 0:
        return 0.0
    return float(residual.max())


@dataclass
class EnergyReport:
    identity_residual: float
    budget_residual: float
    finite: bool
    bound_ratio: float

    def as_dict(self) -> Dict[str, Any]:
        return {
            "identity_residual": self.identity_residual,
            "budget_residual": self.budget_residual,
            "finite": self.finite,
            "bound_ratio": self.bound_ratio,
        }


def l2_energy_residual(trajectory: Trajectory, spec: ModelSpec) -> EnergyReport:
    """
    L2 energy balance along a run.

    `identity_residual` is the worst instantaneous residual over the snapshots.
    `budget_residual` is the worst relative defect of
    1/2 ||theta||^2 + int (nu ||Lambda^(gamma/2) theta||^2 + eps ||theta_x||^2)
    - int 1/2 int u_x theta^2 = 1/2 ||theta_0||^2. `bound_ratio` is the largest
    ||theta||^2 + 2 int nu ||Lambda^(gamma/2) theta||^2 over
    ||theta_0||_1^2 ||theta_0||_inf^2.
    """
    fields = trajectory.fields()
    identity = max((energy_identity_residual(theta, spec) for theta in fields), default=0.0)

    times = trajectory.time_array()
    l2 = trajectory.series_array("L2")
    if l2.size == 0:
        return EnergyReport(identity, 0.0, True, 0.0)
    dissipation = trajectory.series_array("l2_dissipation")
    cubic = trajectory.series_array("cubic")
    energy0 = 0.5 * l2[0] ** 2
    balance = 0.5 * l2**2 + _cumulative(dissipation - cubic, times) - energy0
    budget = float(np.max(np.abs(balance))) / energy0 if energy0 > 0.0 else 0.0

    gamma_norm = trajectory.series_array("Hgamma/2")
    running = l2**2 + 2.0 * _cumulative(spec.nu * gamma_norm**2, times)
    finite = bool(np.all(np.isfinite(running)))
    l1_0 = trajectory.series_array("L1")[0]
    linf_0 = trajectory.series_array("Linf")[0]
    reference = (l1_0 * linf_0) ** 2
    ratio = float(np.max(running)) / reference if reference > 0.0 else 0.0
    return EnergyReport(identity, budget, finite, ratio)


def a_priori_bound_check(trajectory: Trajectory) -> float:
    """
    Worst relative excess of ||theta(t)||_1 + ||theta(t)||_inf
    + int_0^t ||Lambda^1/2 theta||^2 over ||theta_0||_1 + ||theta_0||_inf.
    Nonpositive up to round-off for nonnegative model1 data.
    """
    times = trajectory.time_array()
    if times.size == 0:
        return 0.0
    l1 = trajectory.series_array("L1")
    linf = trajectory.series_array("Linf")
    half = trajectory.series_array("H1/2")
    bound = l1[0] + linf[0]
    if bound == 0.0:
        return 0.0
    total = l1 + linf + _cumulative(half**2, times)
    return float(np.max(total - bound)) / bound


def max_principle_monitor(trajectory: Trajectory, relative: bool = False) -> float:
    """Largest increment of ||theta||_inf between consecutive steps,
    optionally relative to ||theta_0||_inf."""
    linf = trajectory.series_array("Linf")
    if linf.size < 2:
        return 0.0
    worst = float(np.max(np.diff(linf)))
    if relative:
        return worst / linf[0] if linf[0] > 0.0 else 0.0
    return worst


def positivity_monitor(trajectory: Trajectory) -> float:
    """min over the run of min_x theta divided by ||theta_0||_inf."""
    minima = trajectory.series_array("min")
    linf = trajectory.series_array("Linf")
    if minima.size == 0 or linf[0] == 0.0:
        return 0.0
    return float(minima.min()) / float(linf[0])


# ---------------------------------------------------------------------------
# Weak formulations
# ---------------------------------------------------------------------------


class SpaceTimeFunction(Protocol):
    def values(self, grid: Grid, t: float) -> SpectralField:
        ...

    def time_derivative(self, grid: Grid, t: float) -> SpectralField:
        ...


@dataclass
class SpaceTimeBump:
    """
    psi(t, x) = amplitude a(t) b(|x - center| / width) with the smooth
    compactly supported bump b and a(t) = b(t / duration), so a(0) = 1 and
    psi vanishes for t >= duration.
    """

    center: float
    width: float
    duration: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.width > 0.0 or not self.duration > 0.0:
            raise NltParameterError("Test function width and duration must be positive")

    def _space(self, grid: Grid) -> np.ndarray:
        if self.width >= 0.5 * grid.period:
            raise NltParameterError("Test function width must be below half the period")
        d = periodic_distance(grid.x, self.center, grid.period)
        return self.amplitude * bump(d / self.width)

    def profile(self, t: float) -> float:
        return float(bump(np.asarray(t / self.duration)))

    def profile_derivative(self, t: float) -> float:
        r = t / self.duration
        if abs(r) >= 1.0:
            return 0.0
        return self.profile(t) * (-2.0 * r / (1.0 - r * r) ** 2) / self.duration

    def values(self, grid: Grid, t: float) -> SpectralField:
        return SpectralField.from_physical(grid, self.profile(t) * self._space(grid))

    def time_derivative(self, grid: Grid, t: float) -> SpectralField:
        return SpectralField.from_physical(grid, self.profile_derivative(t) * self._space(grid))


@dataclass
class WeakFormReport:
    """
    `value` is the weak functional W(theta, psi) and `viscous_defect` the
    term it equals for a smooth eps-solution; `mismatch` is their difference.
    """

    value: float
    viscous_defect: float
    scale: float
    stride: int
    quadrature: str = "simpson"

    @property
    def mismatch(self) -> float:
        return self.value - self.viscous_defect

    @property
    def relative_mismatch(self) -> float:
        return self.mismatch / self.scale if self.scale > 0.0 else 0.0

    def is_supersolution(self, tolerance: float = 1e-6) -> bool:
        return self.value >= -tolerance * self.scale

    def as_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "viscous_defect": self.viscous_defect,
            "mismatch": self.mismatch,
            "relative_mismatch": self.relative_mismatch,
            "scale": self.scale,
            "stride": self.stride,
            "quadrature": self.quadrature,
        }


def _weak_form(
    trajectory: Trajectory, psi: SpaceTimeFunction, integrand, defect
) -> WeakFormReport:
    grid = trajectory.grid
    fields = trajectory.fields()
    if not fields:
        return WeakFormReport(0.0, 0.0, 0.0, trajectory.snapshot_stride)
    times = np.asarray(trajectory.snapshot_times)

    terms = []
    defects = []
    for t, theta in zip(times, fields):
        p = psi.values(grid, t)
        if p.physical.min() < -1e-14 * max(float(np.max(np.abs(p.physical))), 1e-300):
            raise NltInapplicableError("The weak super-solution test requires psi >= 0")
        terms.append(integrand(theta, p, psi.time_derivative(grid, t)))
        defects.append(defect(theta, p))
    terms = np.asarray(terms)

    start = inner(fields[0], psi.values(grid, times[0]))
    end = inner(fields[-1], psi.values(grid, times[-1]))
    contributions = [_total(terms[:, i], times) for i in range(terms.shape[1])]
    value = float(sum(contributions)) + start - end
    scale = max([abs(start), abs(end)] + [abs(c) for c in contributions])
    return WeakFormReport(
        value=value,
        viscous_defect=_total(np.asarray(defects), times),
        scale=scale,
        stride=trajectory.snapshot_stride,
    )


def weak_form_residual(
    trajectory: Trajectory, psi: SpaceTimeFunction, spec: Optional[ModelSpec] = None
) -> WeakFormReport:
    """
    Super-solution functional of model1,

    W = int int [theta psi_t - (H theta) theta psi_x - Lambda^1/2 theta [Lambda^1/2, psi] theta
        - |Lambda^1/2 theta|^2 psi] dx dt + int theta_0 psi(0) dx - int theta(T) psi(T) dx.

    Integrating by parts against a smooth eps-solution gives
    W = -eps int int theta psi_xx + nu int int theta Lambda^gamma psi, reported
    as `viscous_defect`. W >= 0 is the super-solution inequality.

    Raises:
        NltInapplicableError: If psi takes negative values.
    """
    spec = spec or ModelSpec(grid=trajectory.grid)

    def integrand(theta, p, p_t):
        half = lambda_pow(theta, 0.5)
        return (
            inner(theta, p_t),
            -inner(dealiased_product(hilbert(theta), theta), derivative(p, 1)),
            -inner(half, half_commutator(p, theta)),
            -inner(dealiased_product(half, half), p),
        )

    def defect(theta, p):
        out = -spec.epsilon * inner(theta, derivative(p, 2))
        if spec.nu > 0.0:
            out += spec.nu * inner(theta, lambda_pow(p, spec.gamma))
        return out

    report = _weak_form(trajectory, psi, integrand, defect)
    logging.info(
        f"Weak form: W={report.value:.6e}, viscous defect={report.viscous_defect:.6e}"
    )
    return report


def model2_weak_form_residual(
    trajectory: Trajectory, psi: SpaceTimeFunction, spec: ModelSpec
) -> WeakFormReport:
    """
    Weak formulation of model2,

    W = int int [theta psi_t - (H (dxx)^(-alpha) theta) theta psi_x
        - Lambda^(1-gamma/2) (dxx)^(-alpha) theta Lambda^(gamma/2) (theta psi)
        - nu theta Lambda^gamma psi] dx dt + int theta_0 psi(0) - int theta(T) psi(T),

    equal to -eps int int theta psi_xx for an eps-solution.
    """
    smoothing = smoothing_op(trajectory.grid, spec.alpha, spec.inhomogeneous_smoothing)
    g = spec.gamma

    def integrand(theta, p, p_t):
        smoothed = smoothing(theta)
        return (
            inner(theta, p_t),
            -inner(dealiased_product(hilbert(smoothed), theta), derivative(p, 1)),
            -inner(
                lambda_pow(smoothed, 1.0 - 0.5 * g),
                lambda_pow(dealiased_product(theta, p), 0.5 * g),
            ),
            -spec.nu * inner(theta, lambda_pow(p, g)),
        )

    def defect(theta, p):
        return -spec.epsilon * inner(theta, derivative(p, 2))

    return _weak_form(trajectory, psi, integrand, defect)


# ---------------------------------------------------------------------------
# Norm trajectories
# ---------------------------------------------------------------------------


@dataclass
class BesovTrajectory:
    times: np.ndarray
    values: np.ndarray

    @property
    def initial(self) -> float:
        return float(self.values[0]) if self.values.size else 0.0

    def doubling_time(self) -> Optional[float]:
        """First time the norm exceeds twice its initial value."""
        if self.initial == 0.0:
            return None
        above = np.nonzero(self.values > 2.0 * self.initial)[0]
        return float(self.times[above[0]]) if above.size else None

    def empirical_constant(self) -> Optional[float]:
        """c such that the doubling time equals c / ||theta_0||."""
        t = self.doubling_time()
        return None if t is None else t * self.initial

    def bound_holds(self, constant: float = 1.0) -> bool:
        """||theta(t)|| <= 2 ||theta_0|| for t <= constant / ||theta_0||."""
        if self.initial == 0.0:
            return True
        window = self.times <= constant / self.initial
        return bool(np.all(self.values[window] <= 2.0 * self.initial * (1.0 + 1e-12)))

    def as_dict(self, constant: float = 1.0) -> Dict[str, Any]:
        return {
            "initial": self.initial,
            "max": float(self.values.max()) if self.values.size else 0.0,
            "doubling_time": self.doubling_time(),
            "empirical_constant": self.empirical_constant(),
            "constant": constant,
            "bound_holds": self.bound_holds(constant),
        }


def besov_trajectory(trajectory: Trajectory) -> BesovTrajectory:
    return BesovTrajectory(
        times=trajectory.time_array(), values=trajectory.series_array("B3/2_2,1")
    )


@dataclass
class H2GrowthReport:
    constant: float
    max_ratio: float
    holds: bool
    calibration_end: float

    def as_dict(self) -> Dict[str, Any]:
        return {
            "constant": self.constant,
            "max_ratio": self.max_ratio,
            "holds": self.holds,
            "calibration_end": self.calibration_end,
        }


def h2_growth_check(
    trajectory: Trajectory, calibration_fraction: float = 0.1, tolerance: float = 1e-6
) -> H2GrowthReport:
    """
    Compare d/dt ||theta||_{H2}^2 with the envelope C (||theta||^3 + ||theta||^4).
    C is the largest ratio seen during the first `calibration_fraction` of
    the run; the check holds if the ratio never exceeds C afterwards.
    """
    times = trajectory.time_array()
    h2 = trajectory.series_array("H2")
    if times.size < 3:
        return H2GrowthReport(0.0, 0.0, True, float(times[-1]) if times.size else 0.0)
    energy = h2**2
    rate = np.gradient(energy, times)
    envelope = h2**3 + h2**4
    ratio = np.divide(rate, envelope, out=np.zeros_like(rate), where=envelope > 0.0)
    end = times[0] + calibration_fraction * (times[-1] - times[0])
    calibration = times <= end
    constant = max(float(ratio[calibration].max()), 0.0)
    rest = ratio[~calibration]
    worst = float(rest.max()) if rest.size else 0.0
    holds = worst <= constant * (1.0 + tolerance) + tolerance
    return H2GrowthReport(
        constant=constant,
        max_ratio=worst / constant if constant > 0.0 else worst,
        holds=bool(holds),
        calibration_end=float(end),
    )


def summarize(engine: DiagnosticsEngine, horizon_constant: float = 1.0) -> Dict[str, Any]:
    """Trajectory-level diagnostics for the run summary."""
    trajectory = engine.trajectory
    spec = engine.spec
    out: Dict[str, Any] = {"worst_residuals": engine.worst_residuals()}
    out["besov"] = besov_trajectory(trajectory).as_dict(horizon_constant)
    out["energy"] = l2_energy_residual(trajectory, spec).as_dict()
    family = ModelFamily(spec.family)
    try:
        if family == ModelFamily.MODEL1:
            out["l1_identity"] = l1_identity_residual(trajectory, spec)
            out["a_priori_excess"] = a_priori_bound_check(trajectory)
        elif family == ModelFamily.MODEL2:
            out["l1_budget"] = model2_l1_budget(trajectory, spec)
    except NltInapplicableError as err:
        logging.warning(f"L1 diagnostics skipped: {err}")
    if family == ModelFamily.MODEL3:
        out["h2_growth"] = h2_growth_check(trajectory).as_dict()
    if not math.isfinite(out["energy"]["bound_ratio"]):
        out["energy"]["bound_ratio"] = None
    return out
