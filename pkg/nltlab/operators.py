"""
Nonlocal operators as Fourier multipliers: Hilbert transform, powers of
Lambda = sqrt(-d^2/dx^2), smoothing and roughening, and the velocity laws
of the three model families. Also a direct principal-value quadrature of
Lambda^gamma used as an independent oracle, and the Hardy product identity.

Every symbol vanishes at k = 0. Odd symbols vanish at the Nyquist
wavenumber; even symbols keep their real value there.
"""

from __future__ import annotations
from dataclasses import dataclass
from functools import lru_cache
import logging
from typing import TYPE_CHECKING

import numpy as np
from scipy import integrate, linalg, special

from .errors import NltOperatorError, NltParameterError
from .spectral import (
    Grid,
    SpectralField,
    dealiased_product,
    lp_norm,
)

if TYPE_CHECKING:
    from .models import ModelSpec


@dataclass(frozen=True, eq=False)
class MultiplierOp:
    """Diagonal Fourier-space operator.

    Args:
        grid: Grid the symbol is tabulated on.
        symbol: Complex symbol on the half spectrum (nonnegative wavenumbers).
        label: Descriptive name.
    """

    grid: Grid
    symbol: np.ndarray
    label: str = ""

    def __call__(self, f: SpectralField) -> SpectralField:
        self.grid.check_same(f.grid)
        return SpectralField.from_spectral(self.grid, self.symbol * f.spectral)

    def compose(self, other: MultiplierOp) -> MultiplierOp:
        self.grid.check_same(other.grid)
        return MultiplierOp(
            self.grid, self.symbol * other.symbol, f"{self.label}{other.label}"
        )

    __matmul__ = compose

    def scaled(self, factor: float) -> MultiplierOp:
        return MultiplierOp(self.grid, factor * self.symbol, f"{factor:g}{self.label}")

    @property
    def full_symbol(self) -> np.ndarray:
        """Symbol on the full wavenumber table, negative wavenumbers obtained
        from symbol(-k) = conj(symbol(k))."""
        n = self.grid.n
        full = np.empty(n, dtype=complex)
        full[: n // 2 + 1] = self.symbol
        full[n // 2 + 1 :] = np.conj(self.symbol[1 : n // 2][::-1])
        return full

    def validate(self) -> MultiplierOp:
        """
        Raises:
            NltOperatorError: If the symbol table has the wrong length, does not
                annihilate the mean, or maps real fields to complex ones.
        """
        if self.symbol.shape != (self.grid.n // 2 + 1,):
            raise NltOperatorError(f'Symbol table of "{self.label}" has wrong length')
        if not np.all(np.isfinite(self.symbol)):
            raise NltOperatorError(f'Symbol of "{self.label}" is not finite')
        if self.symbol[0] != 0.0:
            raise NltOperatorError(f'Symbol of "{self.label}" is nonzero at k=0')
        if self.symbol[-1].imag != 0.0:
            raise NltOperatorError(
                f'Symbol of "{self.label}" is not real at the Nyquist wavenumber'
            )
        return self


def _abs_power(grid: Grid, s: float) -> np.ndarray:
    k = grid.rwavenumbers
    out = np.zeros_like(k)
    out[1:] = k[1:] ** s
    return out


@lru_cache(maxsize=128)
def hilbert_op(grid: Grid) -> MultiplierOp:
    symbol = np.full(grid.n // 2 + 1, -1j, dtype=complex)
    symbol[0] = 0.0
    symbol[-1] = 0.0
    return MultiplierOp(grid, symbol, "H")


@lru_cache(maxsize=128)
def lambda_op(grid: Grid, s: float) -> MultiplierOp:
    return MultiplierOp(grid, _abs_power(grid, s).astype(complex), f"L^{s:g}")


@lru_cache(maxsize=128)
def smoothing_op(grid: Grid, alpha: float, inhomogeneous: bool = False) -> MultiplierOp:
    """(d_xx)^(-alpha) read as |k|^(-2 alpha), or (1 + k^2)^(-alpha) when
    `inhomogeneous`. Both vanish at k = 0."""
    if not inhomogeneous:
        return lambda_op(grid, -2.0 * alpha)
    k = grid.rwavenumbers
    symbol = ((1.0 + k**2) ** (-alpha)).astype(complex)
    symbol[0] = 0.0
    return MultiplierOp(grid, symbol, f"(1-dxx)^-{alpha:g}")


@lru_cache(maxsize=128)
def roughening_op(grid: Grid, beta: float) -> MultiplierOp:
    """(d_xx)^beta read as |k|^(2 beta)."""
    return lambda_op(grid, 2.0 * beta)


@lru_cache(maxsize=128)
def velocity_op(
    grid: Grid,
    family: str,
    alpha: float = 0.0,
    beta: float = 0.0,
    sign: int = 1,
    inhomogeneous: bool = False,
) -> MultiplierOp:
    """
    Velocity law u = N(theta) as a multiplier:
    model1: -H, model2: -H L^(-2 alpha), model3: -sign H L^(2 beta).
    Parameters are not range checked here.
    """
    family = str(family)
    h = hilbert_op(grid)
    if family == "model1":
        op = h
        sgn = 1
    elif family == "model2":
        op = h @ smoothing_op(grid, alpha, inhomogeneous)
        sgn = 1
    elif family == "model3":
        op = h @ roughening_op(grid, beta)
        sgn = sign
    else:
        raise NltParameterError(f"Unknown model family '{family}'")
    return MultiplierOp(grid, -sgn * op.symbol, f"u[{family}]")


def hilbert(f: SpectralField) -> SpectralField:
    return hilbert_op(f.grid)(f)


def lambda_pow(f: SpectralField, s: float) -> SpectralField:
    return lambda_op(f.grid, float(s))(f)


def velocity(theta: SpectralField, spec: ModelSpec) -> SpectralField:
    """Velocity field for `theta` under the law declared by `spec`.

    Raises:
        NltParameterError: If the exponents are out of range for the family.
    """
    spec.validate()
    return velocity_op(
        theta.grid,
        getattr(spec.family, "value", spec.family),
        spec.alpha,
        spec.beta,
        spec.sign,
        spec.inhomogeneous_smoothing,
    )(theta)


@dataclass
class HardyCheck:
    residual: float
    ratio: float


def hardy_identity_residual(f: SpectralField) -> HardyCheck:
    """
    Check 2 H(f Hf) = (Hf)^2 - f^2 with dealiased products.

    Returns the maximum pointwise residual and the ratio
    ||f Hf||_{L^1} / ||f||_{L^2}^2, which is at most one.
    For a field with nonzero mean the identity picks up a constant
    equal to the squared mean.
    """
    mean = f.mean
    if abs(mean) > 1e-12 * max(lp_norm(f, np.inf), 1e-300):
        logging.warning(
            "Hardy identity evaluated on a field with mean %.3e; the residual includes the mean squared",
            mean,
        )
    hf = hilbert(f)
    fhf = dealiased_product(f, hf)
    lhs = hilbert(fhf) * 2.0
    rhs = dealiased_product(hf, hf) - dealiased_product(f, f)
    residual = lp_norm(lhs - rhs, np.inf)
    energy = lp_norm(f, 2) ** 2
    l1 = f.grid.dx * float(np.sum(np.abs(f.physical * hf.physical)))
    ratio = l1 / energy if energy > 0.0 else 0.0
    return HardyCheck(residual=residual, ratio=ratio)


def hardy_product(f: SpectralField) -> SpectralField:
    """f Hf written as (1/2) H(f^2 - (Hf)^2), exact for mean-zero f."""
    hf = hilbert(f)
    return hilbert(dealiased_product(f, f) - dealiased_product(hf, hf)) * 0.5


def _check_gamma(gamma: float):
    if not 0.0 < gamma < 2.0:
        raise NltParameterError(f"Kernel order must lie in (0, 2). Got {gamma}")


@lru_cache(maxsize=32)
def kernel_constant(gamma: float) -> float:
    """
    c_gamma such that c_gamma p.v. int (f(x) - f(y)) |x - y|^(-1-gamma) dy
    acts on exp(ikx) as |k|^gamma. Obtained from
    int_0^inf (1 - cos t) t^(-1-gamma) dt by adaptive quadrature.
    """
    _check_gamma(gamma)

    def near(t):
        # (1 - cos t) / t^2, smooth at 0
        return 0.5 * np.sinc(t / (2.0 * np.pi)) ** 2

    head, _ = integrate.quad(near, 0.0, 1.0, weight="alg", wvar=(1.0 - gamma, 0.0))
    oscillating, _ = integrate.quad(
        lambda t: t ** (-1.0 - gamma), 1.0, np.inf, weight="cos", wvar=1.0
    )
    tail = 1.0 / gamma - oscillating
    return 1.0 / (2.0 * (head + tail))


@lru_cache(maxsize=16)
def _pv_weights(grid: Grid, gamma: float) -> np.ndarray:
    """Periodized kernel weights h |j h|^(-1-gamma) summed over all images,
    in closed form through the Hurwitz zeta function."""
    n = grid.n
    r = np.arange(1, n) / n
    image_sum = special.zeta(1.0 + gamma, r) + special.zeta(1.0 + gamma, 1.0 - r)
    weights = np.zeros(n)
    weights[1:] = grid.dx ** (-gamma) * n ** (-1.0 - gamma) * image_sum
    return weights


def lambda_pv_oracle(f: SpectralField, gamma: float) -> SpectralField:
    """
    Direct quadrature of c_gamma p.v. int (f(x) - f(y)) / |x - y|^(1+gamma) dy
    on the periodic grid.

    The singular node is omitted and the leading error term of the punctured
    trapezoid rule, zeta(gamma - 1) h^(2-gamma) f''(x), is added back with f''
    from central differences. The rule converges at order 4 - gamma.

    Raises:
        NltParameterError: If gamma is outside (0, 2).
    """
    _check_gamma(gamma)
    grid = f.grid
    values = f.physical
    weights = _pv_weights(grid, float(gamma))
    h = grid.dx
    sums = weights.sum() * values - linalg.circulant(weights) @ values
    second = (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) / h**2
    correction = special.zeta(gamma - 1.0) * h ** (2.0 - gamma) * second
    return SpectralField.from_physical(
        grid, kernel_constant(float(gamma)) * (sums + correction)
    )
