"""
Time integration of theta_t = rhs(theta).

The linear part -nu |k|^gamma - eps k^2 is propagated exactly by its
exponential (integrating factor) and the transport term by classical RK4
in the integrating-factor variable. Every step starts from the physical
samples of theta, so a run resumed from a checkpoint continues bit for bit.
"""

from __future__ import annotations
from dataclasses import dataclass, replace
from enum import Enum
import logging
from typing import Callable, Optional

import numpy as np
from scipy import fft

from .errors import NltError
from .models import ModelSpec, linear_symbol, nonlinear_term
from .spectral import SpectralField, derivative, lp_norm

Forcing = Callable[[float], SpectralField]


class RunStatus(str, Enum):
    RUNNING = "running"
    FINISHED = "finished"
    BLOWUP_DETECTED = "blowup-detected"
    RESOLUTION_LOST = "resolution-lost"

    @property
    def is_terminal(self) -> bool:
        return self != RunStatus.RUNNING


@dataclass
class StepperConfig:
    """
    Args:
        safety: CFL safety factor in (0, 1].
        dt_min: Smallest admissible step. Falling below it ends the run
            with status resolution-lost.
        dt_max: Largest admissible step.
        dt: Initial (and, if not adaptive, fixed) step. Defaults to the CFL step.
        adaptive: Propose the CFL step after every accepted step.
        blowup_threshold: Absolute threshold on ||theta_x||_inf + ||u_x||_inf.
            If None, `blowup_growth` times the initial value is used.
        blowup_growth: Growth factor used when no absolute threshold is set.
        tail_threshold: Spectral tail fraction above which the resolution is
            no longer trusted.
        velocity_floor: Lower bound on ||u||_inf in the CFL step.
    """

    safety: float = 0.5
    dt_min: float = 1e-10
    dt_max: float = 1e-2
    dt: Optional[float] = None
    adaptive: bool = True
    blowup_threshold: Optional[float] = None
    blowup_growth: float = 100.0
    tail_threshold: float = 1e-3
    velocity_floor: float = 1e-12


@dataclass
class BlowupIndicator:
    theta_x_inf: float
    u_x_inf: float
    integral: float = 0.0
    tail_fraction: float = 0.0

    @property
    def total(self) -> float:
        return self.theta_x_inf + self.u_x_inf

    def as_dict(self):
        return {
            "theta_x_inf": self.theta_x_inf,
            "u_x_inf": self.u_x_inf,
            "integral": self.integral,
            "tail_fraction": self.tail_fraction,
        }


@dataclass
class StepperState:
    t: float
    theta: SpectralField
    dt: float
    step_count: int = 0
    status: RunStatus = RunStatus.RUNNING
    rejections: int = 0
    accepted: bool = True
    indicator: Optional[BlowupIndicator] = None
    blowup_reference: Optional[float] = None

    def with_status(self, status: RunStatus) -> StepperState:
        """
        Raises:
            NltError: If leaving a terminal status.
        """
        if self.status.is_terminal and status != self.status:
            raise NltError(
                f"Status transitions are monotone: cannot go from {self.status.value} to {status.value}"
            )
        if status != self.status:
            logging.info(f"Status {self.status.value} -> {status.value} at t={self.t:.6g}")
        return replace(self, status=status)


def _velocity(theta: SpectralField, spec: ModelSpec) -> SpectralField:
    return SpectralField.from_spectral(theta.grid, spec.velocity_symbol() * theta.spectral)


def cfl_dt(
    theta: SpectralField,
    spec: ModelSpec,
    safety: float = 0.5,
    dt_max: Optional[float] = 1e-2,
    floor: float = 1e-12,
) -> float:
    """safety dx / max(||u||_inf, floor), capped by dt_max."""
    umax = lp_norm(_velocity(theta, spec), np.inf) if spec.transport else 0.0
    dt = safety * theta.grid.dx / max(umax, floor)
    if dt_max is not None:
        dt = min(dt, dt_max)
    return dt


def spectral_tail_fraction(theta: SpectralField) -> float:
    """Energy in the top eighth of the modes over the energy without the mean."""
    grid = theta.grid
    power = grid.parseval_weights * np.abs(theta.spectral) ** 2
    total = float(np.sum(power[1:]))
    if total == 0.0:
        return 0.0
    start = grid.n // 2 - grid.n // 16
    return float(np.sum(power[start:])) / total


def blowup_indicator(theta: SpectralField, spec: ModelSpec) -> BlowupIndicator:
    """Pointwise ingredients of the blow-up criterion. The running integral is
    filled in by the stepper."""
    theta_x = derivative(theta, 1)
    u_x = derivative(_velocity(theta, spec), 1) if spec.transport else None
    return BlowupIndicator(
        theta_x_inf=lp_norm(theta_x, np.inf),
        u_x_inf=lp_norm(u_x, np.inf) if u_x is not None else 0.0,
        tail_fraction=spectral_tail_fraction(theta),
    )


class Stepper:
    """
    Integrating-factor RK4 stepper with CFL control.

    Args:
        spec: Model description.
        config: Step control settings.
        forcing: Optional source term f(t) added to the right-hand side.
        horizon: Final time. Steps are clipped so the run ends exactly there.
    """

    def __init__(
        self,
        spec: ModelSpec,
        config: Optional[StepperConfig] = None,
        forcing: Optional[Forcing] = None,
        horizon: Optional[float] = None,
    ):
        self.spec = spec.validate()
        self.config = config or StepperConfig()
        self.forcing = forcing
        self.horizon = horizon
        self._linear = linear_symbol(spec)

    def _nonlinear(self, v: np.ndarray, t: float) -> np.ndarray:
        theta = SpectralField.from_spectral(self.spec.grid, v)
        out = nonlinear_term(theta, self.spec).spectral
        if self.forcing is not None:
            out = out + self.forcing(t).spectral
        return out

    def advance(self, values: np.ndarray, t: float, dt: float) -> np.ndarray:
        """One integrating-factor RK4 step from physical samples to physical
        samples."""
        v = fft.rfft(values, norm="forward")
        e = np.exp(self._linear * dt)
        e2 = np.exp(self._linear * 0.5 * dt)
        a = self._nonlinear(v, t)
        b = self._nonlinear(e2 * (v + 0.5 * dt * a), t + 0.5 * dt)
        c = self._nonlinear(e2 * v + 0.5 * dt * b, t + 0.5 * dt)
        d = self._nonlinear(e * v + dt * e2 * c, t + dt)
        v_new = e * v + dt / 6.0 * (e * a + 2.0 * e2 * (b + c) + d)
        return fft.irfft(v_new, n=self.spec.grid.n, norm="forward")

    def cfl(self, theta: SpectralField) -> float:
        return cfl_dt(
            theta,
            self.spec,
            self.config.safety,
            self.config.dt_max,
            self.config.velocity_floor,
        )

    def initial_state(
        self,
        theta0: SpectralField,
        t0: float = 0.0,
        blowup_reference: Optional[float] = None,
    ) -> StepperState:
        """`blowup_reference` overrides the initial indicator as the base of the
        relative blow-up threshold, e.g. when resuming from a checkpoint."""
        dt = self.config.dt if self.config.dt is not None else self.cfl(theta0)
        dt = min(dt, self.config.dt_max)
        theta0 = SpectralField.from_physical(theta0.grid, theta0.physical)
        indicator = blowup_indicator(theta0, self.spec)
        state = StepperState(t=t0, theta=theta0, dt=dt, indicator=indicator)
        if self.config.blowup_threshold is None:
            state.blowup_reference = (
                indicator.total if blowup_reference is None else blowup_reference
            )
        if self.horizon is not None and self.horizon - t0 <= 1e-9 * max(dt, self.config.dt_min):
            return state.with_status(RunStatus.FINISHED)
        if dt < self.config.dt_min:
            return state.with_status(RunStatus.RESOLUTION_LOST)
        return state

    def _blowup_threshold(self, state: StepperState) -> float:
        if self.config.blowup_threshold is not None:
            return self.config.blowup_threshold
        if not state.blowup_reference:
            return np.inf
        return self.config.blowup_growth * state.blowup_reference

    def step(self, state: StepperState) -> StepperState:
        """
        Advance by one step, or reject the step and shrink dt if it exceeds
        the CFL bound.

        Raises:
            NltError: If the state is not running.
        """
        if state.status != RunStatus.RUNNING:
            raise NltError(f"Cannot step a run with status {state.status.value}")
        cfg = self.config

        cfl = self.cfl(state.theta)
        if state.dt > cfl * (1.0 + 1e-12):
            logging.info(f"Step rejected at t={state.t:.6g}: dt={state.dt:.3e} exceeds CFL {cfl:.3e}")
            new = replace(state, dt=cfl, rejections=state.rejections + 1, accepted=False)
            if cfl < cfg.dt_min:
                return new.with_status(RunStatus.RESOLUTION_LOST)
            return new

        dt = state.dt
        if self.horizon is not None:
            dt = min(dt, self.horizon - state.t)

        values = self.advance(state.theta.physical, state.t, dt)
        if not np.all(np.isfinite(values)):
            logging.warning(f"Non-finite values after step at t={state.t:.6g}")
            return replace(state, accepted=False).with_status(RunStatus.RESOLUTION_LOST)

        theta = SpectralField.from_physical(state.theta.grid, values)
        t = state.t + dt
        indicator = blowup_indicator(theta, self.spec)
        previous = state.indicator or blowup_indicator(state.theta, self.spec)
        indicator.integral = previous.integral + 0.5 * dt * (previous.total + indicator.total)

        new = replace(
            state,
            t=t,
            theta=theta,
            step_count=state.step_count + 1,
            accepted=True,
            indicator=indicator,
        )
        logging.debug(
            f"step {new.step_count} t={t:.6g} dt={dt:.3e} indicator={indicator.total:.4g} tail={indicator.tail_fraction:.2e}"
        )

        if self.horizon is not None and self.horizon - t <= 1e-9 * max(dt, cfg.dt_min):
            return new.with_status(RunStatus.FINISHED)

        if (
            indicator.total > self._blowup_threshold(new)
            and indicator.tail_fraction > cfg.tail_threshold
        ):
            return new.with_status(RunStatus.BLOWUP_DETECTED)

        if cfg.adaptive:
            next_dt = self.cfl(theta)
            if next_dt < cfg.dt_min:
                return replace(new, dt=next_dt).with_status(RunStatus.RESOLUTION_LOST)
            new.dt = next_dt
        return new

    def run(
        self,
        theta0: SpectralField,
        t0: float = 0.0,
        on_step: Optional[Callable[[StepperState], None]] = None,
        max_steps: Optional[int] = None,
        blowup_reference: Optional[float] = None,
    ) -> StepperState:
        """Step until a terminal status. `on_step` is called with the initial
        state and after every accepted step."""
        state = self.initial_state(theta0, t0, blowup_reference)
        if on_step is not None:
            on_step(state)
        while state.status == RunStatus.RUNNING:
            if max_steps is not None and state.step_count >= max_steps:
                break
            state = self.step(state)
            if state.accepted and on_step is not None:
                on_step(state)
        return state


def integrate(
    theta0: SpectralField,
    spec: ModelSpec,
    horizon: float,
    config: Optional[StepperConfig] = None,
    forcing: Optional[Forcing] = None,
    t0: float = 0.0,
    on_step: Optional[Callable[[StepperState], None]] = None,
) -> StepperState:
    return Stepper(spec, config, forcing, horizon).run(theta0, t0, on_step)
