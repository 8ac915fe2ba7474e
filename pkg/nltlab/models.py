"""
Model catalog for theta_t + u theta_x + nu Lambda^gamma theta = eps theta_xx
with u = N(theta):

* model1: u = -H theta
* model2: u = -H Lambda^(-2 alpha) theta
* model3: u = -sign H Lambda^(2 beta) theta
"""

from __future__ import annotations
from dataclasses import dataclass, field, replace
from enum import Enum
import logging
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from .errors import NltGridError, NltDegenerateError, NltParameterError, NltResolutionError
from .checkpoint import read_checkpoint
from .operators import velocity_op
from .paley import dyadic_partition
from .spectral import (
    Grid,
    SpectralField,
    dealiased_product,
    derivative,
    sobolev_norm,
)
from .utils import bump, periodic_distance


class ModelFamily(str, Enum):
    MODEL1 = "model1"
    MODEL2 = "model2"
    MODEL3 = "model3"


class InitialDataKind(str, Enum):
    POSITIVE_BUMP = "positive-bump"
    GAUSSIAN_LIKE = "gaussian-like"
    SINGLE_MODE = "single-mode"
    SUM_OF_MODES = "sum-of-modes"
    FROM_FILE = "from-file"


@dataclass
class InitialDataRecipe:
    """
    Recipe for theta_0.

    Args:
        kind: One of the `InitialDataKind` values.
        amplitude: Peak value for bumps and the single mode.
        center: Bump center. Defaults to the middle of the domain.
        width: Bump half width (positive-bump) or Gaussian width (gaussian-like).
        modes: (m, amplitude) pairs where m indexes the wavenumber 2 pi m / L.
        offset: Constant added to the data.
        random_phases: Draw mode phases from the seeded generator.
        path: Checkpoint file for `from-file`.
        mollify_epsilon: Mollifier width. Zero disables mollification.
    """

    kind: InitialDataKind = InitialDataKind.GAUSSIAN_LIKE
    amplitude: float = 1.0
    center: Optional[float] = None
    width: float = 1.0
    modes: List[Tuple[int, float]] = field(default_factory=list)
    offset: float = 0.0
    random_phases: bool = False
    path: Optional[str] = None
    mollify_epsilon: float = 0.0

    def validate(self) -> InitialDataRecipe:
        if not isinstance(self.kind, InitialDataKind):
            self.kind = InitialDataKind(self.kind)
        if self.width <= 0.0:
            raise NltParameterError(f"Initial data width must be positive. Got {self.width}")
        if self.mollify_epsilon < 0.0:
            raise NltParameterError("Mollifier width must be nonnegative")
        if self.kind == InitialDataKind.FROM_FILE and not self.path:
            raise NltParameterError("Initial data of kind 'from-file' requires a path")
        return self

    def build(self, grid: Grid, seed: int = 0) -> SpectralField:
        """
        Raises:
            NltGridError: If a checkpoint does not match the grid.
        """
        self.validate()
        x = grid.x
        center = 0.5 * grid.period if self.center is None else self.center
        if self.kind == InitialDataKind.POSITIVE_BUMP:
            values = self.amplitude * bump(periodic_distance(x, center, grid.period) / self.width)
        elif self.kind == InitialDataKind.GAUSSIAN_LIKE:
            d = periodic_distance(x, center, grid.period)
            values = self.amplitude * np.exp(-((d / self.width) ** 2))
        elif self.kind == InitialDataKind.SINGLE_MODE:
            m = self.modes[0][0] if self.modes else 1
            values = self.amplitude * np.cos(2.0 * np.pi * m * x / grid.period)
        elif self.kind == InitialDataKind.SUM_OF_MODES:
            rng = np.random.default_rng(seed)
            values = np.zeros(grid.n)
            for m, a in self.modes:
                phase = rng.uniform(0.0, 2.0 * np.pi) if self.random_phases else 0.0
                values += a * np.cos(2.0 * np.pi * m * x / grid.period + phase)
        else:
            chk = read_checkpoint(self.path)
            if chk.n != grid.n or chk.period != grid.period:
                raise NltGridError(
                    f"Checkpoint grid (n={chk.n}, L={chk.period}) does not match (n={grid.n}, L={grid.period})"
                )
            values = chk.values.copy()

        theta = SpectralField.from_physical(grid, values + self.offset)
        if self.mollify_epsilon > 0.0:
            theta = mollify(theta, self.mollify_epsilon)
        return theta.without_nyquist().to_physical()


@dataclass(frozen=True)
class ModelSpec:
    """Full problem description.

    Args:
        family: Velocity law.
        alpha: Smoothing exponent of model2.
        beta: Roughening exponent of model3.
        gamma: Dissipation order in (0, 2].
        nu: Dissipation coefficient.
        epsilon: Regularizing viscosity.
        sign: Nonlinearity sign of model3, +1 or -1.
        grid: Computational grid.
        initial_data: Recipe for theta_0.
        inhomogeneous_smoothing: Use (1 + k^2)^(-alpha) instead of |k|^(-2 alpha).
        transport: If False the nonlinear term is switched off.
    """

    family: ModelFamily = ModelFamily.MODEL1
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 1.0
    nu: float = 0.0
    epsilon: float = 0.0
    sign: int = 1
    grid: Grid = field(default_factory=lambda: Grid(256))
    initial_data: InitialDataRecipe = field(default_factory=InitialDataRecipe)
    inhomogeneous_smoothing: bool = False
    transport: bool = True

    def validate(self) -> ModelSpec:
        """
        Raises:
            NltParameterError: If any parameter is out of range for the family.
        """
        family = ModelFamily(self.family)
        if family == ModelFamily.MODEL1 and (self.alpha != 0.0 or self.beta != 0.0):
            raise NltParameterError("model1 requires alpha = beta = 0")
        if family == ModelFamily.MODEL2 and (self.beta != 0.0 or not self.alpha > 0.0):
            raise NltParameterError("model2 requires beta = 0 and alpha > 0")
        if family == ModelFamily.MODEL3 and (self.alpha != 0.0 or not self.beta > 0.0):
            raise NltParameterError("model3 requires alpha = 0 and beta > 0")
        if not 0.0 < self.gamma <= 2.0:
            raise NltParameterError(f"gamma must lie in (0, 2]. Got {self.gamma}")
        if self.nu < 0.0 or self.epsilon < 0.0:
            raise NltParameterError("nu and epsilon must be nonnegative")
        if self.sign not in (1, -1):
            raise NltParameterError(f"sign must be +1 or -1. Got {self.sign}")
        return self

    def with_params(self, **kwargs) -> ModelSpec:
        return replace(self, **kwargs)

    def velocity_symbol(self) -> np.ndarray:
        return velocity_op(
            self.grid,
            ModelFamily(self.family).value,
            self.alpha,
            self.beta,
            self.sign,
            self.inhomogeneous_smoothing,
        ).symbol

    def initial_field(self, seed: int = 0) -> SpectralField:
        return self.initial_data.build(self.grid, seed)


def mollify(f: SpectralField, eps: float) -> SpectralField:
    """
    Convolution with a nonnegative, unit-mass bump of half width `eps`,
    applied as a wrap-around discrete convolution. Nonnegativity and the mean
    are preserved.

    Raises:
        NltParameterError: If eps is not positive or exceeds half the period.
    """
    grid = f.grid
    if not eps > 0.0:
        raise NltParameterError(f"Mollifier width must be positive. Got {eps}")
    if eps >= 0.5 * grid.period:
        raise NltParameterError("Mollifier width must be below half the period")
    radius = int(math.ceil(eps / grid.dx))
    if radius < 1:
        return f.copy()
    offsets = np.arange(-radius, radius + 1) * grid.dx
    weights = bump(offsets / eps)
    weights /= weights.sum()
    values = ndimage.convolve1d(f.physical, weights, mode="wrap")
    return SpectralField.from_physical(grid, values)


def linear_symbol(spec: ModelSpec) -> np.ndarray:
    """-nu |k|^gamma - eps k^2 on the half spectrum."""
    k = spec.grid.rwavenumbers
    return -spec.nu * np.abs(k) ** spec.gamma - spec.epsilon * k**2


def nonlinear_term(theta: SpectralField, spec: ModelSpec) -> SpectralField:
    """-P(u theta_x) with the 2/3-rule projection P."""
    if not spec.transport:
        return SpectralField.zeros(theta.grid)
    u = SpectralField.from_spectral(theta.grid, spec.velocity_symbol() * theta.spectral)
    return -dealiased_product(u, derivative(theta, 1))


def rhs(theta: SpectralField, spec: ModelSpec) -> SpectralField:
    """
    -P(u theta_x) - nu Lambda^gamma theta + eps theta_xx.

    Raises:
        NltResolutionError: If theta holds NaN or Inf.
    """
    spec.grid.check_same(theta.grid)
    spec.validate()
    if not theta.is_finite():
        raise NltResolutionError("theta")
    linear = SpectralField.from_spectral(theta.grid, linear_symbol(spec) * theta.spectral)
    return nonlinear_term(theta, spec) + linear


@dataclass
class RegimeReport:
    """Which known result covers a parameter point, and the behaviour a run
    is therefore expected to show."""

    family: str
    label: str
    covered_by: List[str]
    expected: str

    def as_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "label": self.label,
            "covered_by": list(self.covered_by),
            "expected": self.expected,
        }


def _is_two(gamma: float) -> bool:
    return math.isclose(gamma, 2.0, rel_tol=0.0, abs_tol=1e-12)


def classify_regime(spec: ModelSpec) -> RegimeReport:
    family = ModelFamily(spec.family)
    gamma, alpha, beta = spec.gamma, spec.alpha, spec.beta
    if family == ModelFamily.MODEL1:
        covered = ["local well-posedness in the critical Besov space B^{3/2}_{2,1}"]
        if spec.nu == 0.0:
            covered.append("global weak super-solutions for nonnegative L1 and Linf data")
        return RegimeReport(
            family.value,
            "local regime",
            covered,
            "local-only; inviscid data may develop finite-time gradient blow-up",
        )

    if family == ModelFamily.MODEL2:
        if 0.0 < gamma < 1.0 and alpha >= 0.5 - 0.5 * gamma:
            return RegimeReport(
                family.value,
                "weak-solution regime",
                ["global weak solutions for 0 < gamma < 1 and alpha >= 1/2 - gamma/2"],
                "global; L1 and L2 budgets stay bounded",
            )
        return RegimeReport(family.value, "uncovered", [], "no known result")

    covered = []
    if _is_two(gamma) and beta < 0.25:
        covered.append("global well-posedness in H^2 for gamma = 2 and beta < 1/4")
    if (0.0 < gamma < 2.0 and beta <= 0.25 * gamma) or (_is_two(gamma) and beta < 1.0):
        covered.append("local well-posedness in H^2 with a blow-up criterion")
    if _is_two(gamma) and beta < 0.5:
        covered.append("local well-posedness in H^{1/2} for gamma = 2 and beta < 1/2")

    if _is_two(gamma) and beta < 0.25:
        return RegimeReport(family.value, "global regime", covered, "global; H^2 norm stays bounded")
    if covered:
        return RegimeReport(
            family.value, "local regime", covered, "local-only; survival beyond the local horizon is not guaranteed"
        )
    return RegimeReport(family.value, "uncovered", [], "no known result")


def local_horizon_estimate(
    theta0: SpectralField, spec: ModelSpec, constant: float = 1.0
) -> float:
    """
    Default horizon c / ||theta_0||, with the Besov norm B^{3/2}_{2,1} for
    model1 and model2 and the H^2 norm for model3.

    Raises:
        NltDegenerateError: If the norm of the initial data vanishes.
    """
    if ModelFamily(spec.family) == ModelFamily.MODEL3:
        norm = sobolev_norm(theta0, 2.0, homogeneous=False)
        name = "H2"
    else:
        norm = dyadic_partition(theta0.grid).besov_norm(theta0, 1.5, 2.0, 1.0).value
        name = "B^3/2_2,1"
    if norm == 0.0:
        raise NltDegenerateError("Local horizon is undefined for vanishing initial data")
    horizon = constant / norm
    logging.info(f"Local horizon {horizon:.4g} from {name} norm {norm:.4g} and c={constant}")
    return horizon
