"""
Discrete homogeneous Littlewood-Paley decomposition on the periodic grid.

The low-pass profile chi is a C-infinity step equal to 1 on [0, 3/4] and 0
on [4/3, inf). The ring profile phi(xi) = chi(xi/2) - chi(xi) is supported in
[3/4, 8/3], so S_{j+1} = S_j + Delta_j and the blocks telescope to the
identity exactly.

Shell range:

* `j_min` is the largest j with (4/3) 2^j <= 2 pi / L, so S_{j_min} keeps only
  the mean.
* `j_max` is the largest j with (3/4) 2^j <= k_Nyquist, so every grid
  wavenumber is covered and S_{j_min} f + sum Delta_j f = f.
* `j_resolved` is the largest j with (8/3) 2^j <= k_Nyquist; shells above it
  are only partially represented on the grid and are flagged in the Besov
  metadata.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
import logging
import math
from typing import Dict, Tuple

import numpy as np

from .errors import NltDegenerateError, NltEmptyShellError, NltParameterError
from .operators import MultiplierOp, lambda_op
from .spectral import (
    Grid,
    SpectralField,
    dealiased_product,
    derivative,
    lp_norm,
    lp_norm_padded,
    sobolev_norm,
)
from .utils import smooth_step

INNER_RADIUS = 3.0 / 4.0
OUTER_RADIUS = 8.0 / 3.0
BALL_RADIUS = 4.0 / 3.0


def chi(xi: np.ndarray) -> np.ndarray:
    xi = np.abs(np.asarray(xi, dtype=float))
    return 1.0 - smooth_step((xi - INNER_RADIUS) / (BALL_RADIUS - INNER_RADIUS))


def phi(xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return chi(0.5 * xi) - chi(xi)


@dataclass
class BesovNorm:
    """Value of a truncated homogeneous Besov norm and its shell metadata."""

    value: float
    s: float
    p: float
    q: float
    j_min: int
    j_max: int
    j_resolved: int
    shells: Dict[int, float] = field(default_factory=dict)

    def __float__(self):
        return self.value

    def metadata(self) -> Dict:
        return {
            "s": self.s,
            "p": self.p,
            "q": self.q,
            "j_min": self.j_min,
            "j_max": self.j_max,
            "j_resolved": self.j_resolved,
        }


class DyadicPartition:
    """Littlewood-Paley blocks on a grid.

    Args:
        grid: The periodic grid.
        lp_padding: Refinement factor of the grid used for L^p norms of
            blocks with p != 2.
    """

    def __init__(self, grid: Grid, lp_padding: int = 2):
        self.grid = grid
        self.lp_padding = lp_padding
        k1 = 2.0 * math.pi / grid.period
        kn = grid.k_nyquist
        self.j_min = math.floor(math.log2(k1 / BALL_RADIUS))
        self.j_max = math.floor(math.log2(kn / INNER_RADIUS))
        self.j_resolved = math.floor(math.log2(kn / OUTER_RADIUS))

    @property
    def shells(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def _check_shell(self, j: int):
        if not self.j_min <= j <= self.j_max:
            raise NltParameterError(
                f"Shell {j} outside the resolvable range [{self.j_min}, {self.j_max}]"
            )

    def block_symbol(self, j: int) -> np.ndarray:
        self._check_shell(j)
        return phi(2.0 ** (-j) * self.grid.rwavenumbers)

    def low_pass_symbol(self, j: int) -> np.ndarray:
        return chi(2.0 ** (-j) * self.grid.rwavenumbers)

    @cached_property
    def block_symbols(self) -> Dict[int, np.ndarray]:
        return {j: self.block_symbol(j) for j in self.shells}

    def block_op(self, j: int) -> MultiplierOp:
        return MultiplierOp(self.grid, self.block_symbols[j].astype(complex), f"D{j}")

    def block(self, f: SpectralField, j: int) -> SpectralField:
        """Delta_j f."""
        self._check_shell(j)
        self.grid.check_same(f.grid)
        return SpectralField.from_spectral(self.grid, self.block_symbols[j] * f.spectral)

    def low_pass(self, f: SpectralField, j: int) -> SpectralField:
        """S_j f."""
        if not self.j_min <= j <= self.j_max + 1:
            raise NltParameterError(
                f"Low pass index {j} outside [{self.j_min}, {self.j_max + 1}]"
            )
        self.grid.check_same(f.grid)
        return SpectralField.from_spectral(
            self.grid, self.low_pass_symbol(j) * f.spectral
        )

    def partition_sum(self) -> np.ndarray:
        """chi(2^-j_min k) + sum_j phi(2^-j k) at every grid wavenumber."""
        total = self.low_pass_symbol(self.j_min).copy()
        for j in self.shells:
            total += self.block_symbols[j]
        return total

    def _block_lp(self, block: SpectralField, p: float) -> float:
        if p == 2.0:
            # Parseval, equal to the trapezoid rule on the grid
            return sobolev_norm(block, 0.0, homogeneous=False)
        return lp_norm_padded(block, p, self.lp_padding)

    def besov_norm(
        self, f: SpectralField, s: float = 1.5, p: float = 2.0, q: float = 1.0
    ) -> BesovNorm:
        """
        || 2^(js) ||Delta_j f||_{L^p} ||_{l^q} over the shells
        j_min, ..., j_max.

        Raises:
            NltParameterError: If p or q is below 1.
        """
        if p < 1.0 or q < 1.0:
            raise NltParameterError(f"Besov indices require p, q >= 1. Got p={p}, q={q}")
        shells = {}
        for j in self.shells:
            shells[j] = 2.0 ** (j * s) * self._block_lp(self.block(f, j), p)
        values = np.array(list(shells.values()))
        if np.isinf(q):
            value = float(values.max(initial=0.0))
        else:
            value = float(np.sum(values**q) ** (1.0 / q))
        top = shells.get(self.j_max, 0.0)
        if self.j_max > self.j_resolved and value > 0.0 and top > 1e-8 * value:
            logging.warning(
                "Partially resolved shell %d carries %.2e of the Besov norm",
                self.j_max,
                top / value,
            )
        return BesovNorm(
            value=value,
            s=s,
            p=p,
            q=q,
            j_min=self.j_min,
            j_max=self.j_max,
            j_resolved=self.j_resolved,
            shells=shells,
        )

    def bernstein_ratio(
        self, f: SpectralField, j: int, k: int = 1, p: float = 2.0, q: float = np.inf
    ) -> Tuple[float, float]:
        """
        Returns:
            (||d^k Delta_j f||_p / (2^(jk) ||Delta_j f||_p),
             ||Delta_j f||_q / (2^(j(1/p - 1/q)) ||Delta_j f||_p))

        Raises:
            NltParameterError: If p > q.
            NltEmptyShellError: If Delta_j f vanishes.
        """
        if p > q:
            raise NltParameterError(f"Bernstein ratio requires p <= q. Got p={p}, q={q}")
        b = self.block(f, j)
        base = self._block_lp(b, p)
        if base <= 1e-14 * max(lp_norm(f, 2), 1e-300) or base == 0.0:
            raise NltEmptyShellError(j)
        d = derivative(b, k)
        first = self._block_lp(d, p) / (2.0 ** (j * k) * base)
        exponent = 1.0 / p - (0.0 if np.isinf(q) else 1.0 / q)
        second = self._block_lp(b, q) / (2.0 ** (j * exponent) * base)
        return first, second

    def commutator_j(self, f: SpectralField, g: SpectralField, j: int) -> SpectralField:
        """[f, Delta_j] g_x = f Delta_j g_x - Delta_j (f g_x)."""
        gx = derivative(g, 1)
        return dealiased_product(f, self.block(gx, j)) - self.block(
            dealiased_product(f, gx), j
        )

    def commutator_ratio(self, f: SpectralField, g: SpectralField, j: int) -> float:
        """||[f, Delta_j] g_x||_2 / (2^(-3j/2) ||f_x||_{B^1/2_2,1} ||g||_{B^3/2_2,1}).

        Raises:
            NltDegenerateError: If the denominator vanishes.
        """
        denominator = (
            2.0 ** (-1.5 * j)
            * self.besov_norm(derivative(f, 1), 0.5, 2.0, 1.0).value
            * self.besov_norm(g, 1.5, 2.0, 1.0).value
        )
        if denominator == 0.0:
            raise NltDegenerateError("Commutator ratio has a vanishing denominator")
        return lp_norm(self.commutator_j(f, g, j), 2.0) / denominator

    def besov_scaling_exponent(
        self, f: SpectralField, m: int = 1, s: float = 1.5, p: float = 2.0, q: float = 1.0
    ) -> float:
        """log2 of ||f(2^m .)|| / ||f|| in B^s_{p,q}, divided by m. The dilate
        keeps the grid, so f must be band-limited to k_Nyquist / 2^m."""
        if m < 1:
            raise NltParameterError(f"Dilation exponent must be positive. Got {m}")
        n = self.grid.n
        coefficients = f.spectral
        dilated = np.zeros_like(coefficients)
        factor = 2**m
        keep = (n // 2) // factor
        tail = np.abs(coefficients[keep:])
        if tail.max() > 1e-14 * np.abs(coefficients).max():
            raise NltParameterError("Field is not band-limited enough to be dilated")
        dilated[: keep * factor : factor] = coefficients[:keep]
        base = self.besov_norm(f, s, p, q).value
        if base == 0.0:
            raise NltDegenerateError("Besov norm of the field vanishes")
        scaled = self.besov_norm(SpectralField.from_spectral(self.grid, dilated), s, p, q)
        return math.log2(scaled.value / base) / m


@lru_cache(maxsize=32)
def dyadic_partition(grid: Grid) -> DyadicPartition:
    return DyadicPartition(grid)


def commutator_ratio(f: SpectralField, g: SpectralField, j: int) -> float:
    return dyadic_partition(f.grid).commutator_ratio(f, g, j)


def half_commutator(psi: SpectralField, f: SpectralField) -> SpectralField:
    """[Lambda^1/2, psi] f = Lambda^1/2 (psi f) - psi Lambda^1/2 f."""
    half = lambda_op(psi.grid, 0.5)
    return half(dealiased_product(psi, f)) - dealiased_product(psi, half(f))


def half_commutator_ratio(psi: SpectralField, f: SpectralField, g: SpectralField) -> float:
    """||[Lambda^1/2, psi](f - g)||_{L^6} / (||psi||_{W^1,inf} ||f - g||_{L^3/2}).

    Raises:
        NltDegenerateError: If f and g coincide.
    """
    diff = f - g
    base = lp_norm(diff, 1.5)
    if base == 0.0:
        raise NltDegenerateError("Half commutator ratio is undefined for f = g")
    w1inf = lp_norm(psi, np.inf) + lp_norm(derivative(psi, 1), np.inf)
    if w1inf == 0.0:
        raise NltDegenerateError("Half commutator ratio is undefined for psi = 0")
    return lp_norm(half_commutator(psi, diff), 6.0) / (w1inf * base)
