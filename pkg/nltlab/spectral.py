"""
Periodic grid, spectral transforms, differentiation, dealiased products
and discrete norms.

Spectral coefficients are stored as the half spectrum returned by
`scipy.fft.rfft` with `norm="forward"`, so a field is
f(x) = sum_m c_m exp(i k_m x) and the zero mode equals the spatial mean.
The half spectrum holds the n/2 + 1 nonnegative wavenumbers; the negative
ones follow from Hermitian symmetry. The Nyquist wavenumber is counted as
positive, i.e. the full table is k_m = 2 pi m / L for m in {-n/2+1, ..., n/2}.
"""

from __future__ import annotations
from dataclasses import dataclass
from functools import cached_property
import math
from typing import Callable, Optional

import numpy as np
from scipy import fft

from .errors import NltFieldError, NltGridError, NltParameterError
from .utils import is_power_of_two

_FFT_NORM = "forward"


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, period).

    Args:
        n: Number of collocation points. A power of two, at least 8.
        period: Domain length L.
    """

    n: int
    period: float = 2.0 * math.pi

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not is_power_of_two(
            int(self.n)
        ):
            raise NltGridError(f"Grid size must be a power of two. Got {self.n}")
        if self.n < 8:
            raise NltGridError(f"Grid size must be at least 8. Got {self.n}")
        if not self.period > 0.0:
            raise NltGridError(f"Grid period must be positive. Got {self.period}")

    @cached_property
    def dx(self) -> float:
        return self.period / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Full wavenumber table in FFT order with the Nyquist mode positive."""
        m = fft.fftfreq(self.n, d=1.0 / self.n)
        m[self.n // 2] = self.n // 2
        return 2.0 * np.pi * m / self.period

    @cached_property
    def rwavenumbers(self) -> np.ndarray:
        """Nonnegative wavenumbers matching the half spectrum."""
        return 2.0 * np.pi * np.arange(self.n // 2 + 1) / self.period

    @cached_property
    def k_nyquist(self) -> float:
        return np.pi * self.n / self.period

    @cached_property
    def parseval_weights(self) -> np.ndarray:
        """Multiplicity of each half-spectrum mode in the full spectrum."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    def check_same(self, other: Grid):
        if self != other:
            raise NltGridError(f"Grid mismatch: {self} and {other}")


def make_grid(n: int, period: float = 2.0 * math.pi) -> Grid:
    return Grid(n=int(n), period=float(period))


class SpectralField:
    """Real scalar field holding physical samples and half-spectrum
    coefficients. Each representation is computed on demand and marked
    current; mutating one through the setters marks the other stale.
    """

    def __init__(
        self,
        grid: Grid,
        physical: Optional[np.ndarray] = None,
        spectral: Optional[np.ndarray] = None,
    ):
        self.grid = grid
        self._physical: Optional[np.ndarray] = None
        self._spectral: Optional[np.ndarray] = None
        self._physical_current = False
        self._spectral_current = False
        if physical is not None:
            self.physical = physical
        elif spectral is not None:
            self.spectral = spectral

    @classmethod
    def from_physical(cls, grid: Grid, values) -> SpectralField:
        return cls(grid, physical=values)

    @classmethod
    def from_spectral(cls, grid: Grid, coefficients) -> SpectralField:
        return cls(grid, spectral=coefficients)

    @classmethod
    def from_function(
        cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray]
    ) -> SpectralField:
        return cls(grid, physical=func(grid.x))

    @classmethod
    def zeros(cls, grid: Grid) -> SpectralField:
        return cls(grid, physical=np.zeros(grid.n))

    @property
    def is_initialized(self) -> bool:
        return self._physical_current or self._spectral_current

    @property
    def physical(self) -> np.ndarray:
        self.to_physical()
        assert self._physical is not None
        return self._physical

    @physical.setter
    def physical(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (self.grid.n,):
            raise NltGridError(
                f"Expected {self.grid.n} physical values. Got shape {values.shape}"
            )
        self._physical = values.copy()
        self._physical_current = True
        self._spectral_current = False

    @property
    def spectral(self) -> np.ndarray:
        self.to_spectral()
        assert self._spectral is not None
        return self._spectral

    @spectral.setter
    def spectral(self, coefficients):
        coefficients = np.asarray(coefficients, dtype=complex)
        if coefficients.shape != (self.grid.n // 2 + 1,):
            raise NltGridError(
                f"Expected {self.grid.n // 2 + 1} coefficients. Got shape {coefficients.shape}"
            )
        coefficients = coefficients.copy()
        # Real field: zero and Nyquist modes are real
        coefficients[0] = coefficients[0].real
        coefficients[-1] = coefficients[-1].real
        self._spectral = coefficients
        self._spectral_current = True
        self._physical_current = False

    def to_spectral(self) -> SpectralField:
        if not self.is_initialized:
            raise NltFieldError("Field has no current representation")
        if not self._spectral_current:
            self._spectral = fft.rfft(self._physical, norm=_FFT_NORM)
            self._spectral_current = True
        return self

    def to_physical(self) -> SpectralField:
        if not self.is_initialized:
            raise NltFieldError("Field has no current representation")
        if not self._physical_current:
            self._physical = fft.irfft(self._spectral, n=self.grid.n, norm=_FFT_NORM)
            self._physical_current = True
        return self

    def copy(self) -> SpectralField:
        out = SpectralField(self.grid)
        if self._physical_current:
            out._physical = self._physical.copy()
            out._physical_current = True
        if self._spectral_current:
            out._spectral = self._spectral.copy()
            out._spectral_current = True
        return out

    @property
    def mean(self) -> float:
        return float(self.spectral[0].real)

    def is_finite(self) -> bool:
        if self._physical_current:
            return bool(np.all(np.isfinite(self._physical)))
        return bool(np.all(np.isfinite(self.spectral)))

    def without_nyquist(self) -> SpectralField:
        coefficients = self.spectral.copy()
        coefficients[-1] = 0.0
        return SpectralField.from_spectral(self.grid, coefficients)

    def _linear(self, other, op) -> SpectralField:
        if isinstance(other, SpectralField):
            self.grid.check_same(other.grid)
            return SpectralField.from_spectral(
                self.grid, op(self.spectral, other.spectral)
            )
        # Scalars only touch the mean
        coefficients = self.spectral.copy()
        coefficients[0] = op(coefficients[0], float(other))
        return SpectralField.from_spectral(self.grid, coefficients)

    def __add__(self, other) -> SpectralField:
        return self._linear(other, np.add)

    __radd__ = __add__

    def __sub__(self, other) -> SpectralField:
        return self._linear(other, np.subtract)

    def __neg__(self) -> SpectralField:
        return SpectralField.from_spectral(self.grid, -self.spectral)

    def __mul__(self, scalar: float) -> SpectralField:
        if isinstance(scalar, SpectralField):
            raise NltFieldError(
                "Use dealiased_product to multiply two fields"
            )
        return SpectralField.from_spectral(self.grid, float(scalar) * self.spectral)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralField(n={self.grid.n}, period={self.grid.period})"


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    """Spectral derivative, multiplication by (ik)^order. Odd orders
    annihilate the Nyquist mode whose derivative is not real-representable."""
    if order < 1:
        raise NltParameterError(f"Derivative order must be positive. Got {order}")
    symbol = (1j * f.grid.rwavenumbers) ** order
    if order % 2 == 1:
        symbol[-1] = 0.0
    return SpectralField.from_spectral(f.grid, symbol * f.spectral)


def padded_spectrum(coefficients: np.ndarray, n: int, m: int) -> np.ndarray:
    """Zero-pad a half spectrum of an n-point field to an m-point grid. The
    Nyquist coefficient is split between the two wavenumbers it represents."""
    out = np.zeros(m // 2 + 1, dtype=complex)
    out[: n // 2 + 1] = coefficients
    if m > n:
        out[n // 2] *= 0.5
    return out


def padded_values(f: SpectralField, factor: int = 2) -> np.ndarray:
    """Samples of the trigonometric interpolant of f on a grid `factor`
    times finer."""
    n = f.grid.n
    m = n * factor
    return fft.irfft(padded_spectrum(f.spectral, n, m), n=m, norm=_FFT_NORM)


def dealiased_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """
    Pointwise product with the 2/3 rule. Both factors are zero padded to 3n/2
    points, multiplied, transformed back and truncated to the original modes.
    The Nyquist mode of the result is set to zero.

    Raises:
        NltGridError: If the fields live on different grids.
    """
    f.grid.check_same(g.grid)
    n = f.grid.n
    m = 3 * n // 2
    fp = fft.irfft(padded_spectrum(f.spectral, n, m), n=m, norm=_FFT_NORM)
    gp = fft.irfft(padded_spectrum(g.spectral, n, m), n=m, norm=_FFT_NORM)
    product = fft.rfft(fp * gp, norm=_FFT_NORM)[: n // 2 + 1]
    product[-1] = 0.0
    return SpectralField.from_spectral(f.grid, product)


def lp_norm(f: SpectralField, p: float = 2.0) -> float:
    """Trapezoidal L^p norm over one period. `p=np.inf` gives the grid maximum.

    Raises:
        NltParameterError: If p < 1.
    """
    if p < 1.0:
        raise NltParameterError(f"L^p norms require p >= 1. Got {p}")
    values = np.abs(f.physical)
    if np.isinf(p):
        return float(values.max())
    return float((f.grid.dx * np.sum(values**p)) ** (1.0 / p))


def lp_norm_padded(f: SpectralField, p: float = 2.0, factor: int = 2) -> float:
    """L^p norm of the interpolant sampled on a finer grid."""
    if p < 1.0:
        raise NltParameterError(f"L^p norms require p >= 1. Got {p}")
    values = np.abs(padded_values(f, factor))
    if np.isinf(p):
        return float(values.max())
    dx = f.grid.period / values.size
    return float((dx * np.sum(values**p)) ** (1.0 / p))


def sobolev_norm(f: SpectralField, s: float, homogeneous: bool = True) -> float:
    """
    Parseval-weighted Sobolev norm. The homogeneous norm uses |k|^s weights and
    excludes the zero mode; the inhomogeneous norm uses (1 + k^2)^(s/2).
    """
    grid = f.grid
    k = grid.rwavenumbers
    power = np.abs(f.spectral) ** 2 * grid.parseval_weights
    if homogeneous:
        weights = np.zeros_like(k)
        weights[1:] = k[1:] ** (2.0 * s)
    else:
        weights = (1.0 + k**2) ** s
    return float(np.sqrt(grid.period * np.sum(weights * power)))


def inner(f: SpectralField, g: SpectralField) -> float:
    """L^2 inner product over one period via Parseval."""
    f.grid.check_same(g.grid)
    return float(
        f.grid.period
        * np.sum(f.grid.parseval_weights * (f.spectral * np.conj(g.spectral)).real)
    )


def _interpolant(f: SpectralField, x: float, order: int = 0) -> float:
    grid = f.grid
    k = grid.rwavenumbers
    terms = grid.parseval_weights * f.spectral * (1j * k) ** order * np.exp(1j * k * x)
    if order % 2 == 1:
        terms[-1] = 0.0
    return float(np.sum(terms).real)


def sup_norm(f: SpectralField, iterations: int = 8) -> float:
    """
    Maximum of |f| over the continuous trigonometric interpolant. The grid
    argmax is refined with Newton iterations on f' = 0; a refinement leaving
    the neighbouring cells is discarded.
    """
    values = f.physical
    i = int(np.argmax(np.abs(values)))
    best = float(abs(values[i]))
    x0 = f.grid.x[i]
    x = x0
    for _ in range(iterations):
        d2 = _interpolant(f, x, 2)
        if d2 == 0.0:
            break
        x = x - _interpolant(f, x, 1) / d2
        if abs(x - x0) > f.grid.dx:
            return best
    return max(best, abs(_interpolant(f, x, 0)))
