"""
Property suites for the operators and the Littlewood-Paley blocks.

Every check returns a `CheckResult`; `run_suite` collects them into a
`VerificationReport`. The Hilbert transform and the powers of Lambda are
taken from an `OperatorTable`, whose symbols can be corrupted on purpose to
confirm that the suite notices.
"""

from __future__ import annotations
from dataclasses import dataclass, field
import logging
import math
import time
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .errors import NltError, NltOperatorError, NltParameterError
from .operators import MultiplierOp, hilbert_op, lambda_op, lambda_pv_oracle
from .paley import DyadicPartition, half_commutator_ratio
from .spectral import Grid, SpectralField, dealiased_product, derivative, lp_norm

LEVELS = {
    "quick": {"n": 256, "samples": 20, "oracle_n": (256, 512)},
    "full": {"n": 2048, "samples": 100, "oracle_n": (1024, 2048)},
}
ORACLE_GAMMAS = (0.5, 1.0, 1.5)
COMMUTATOR_BOUND = 100.0
BERNSTEIN_BOUND = 2.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""
    elapsed: float = 0.0

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
            "elapsed": self.elapsed,
        }


@dataclass
class VerificationReport:
    level: str
    n: int
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def as_dict(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "n": self.n,
            "passed": self.passed,
            "failed": self.failed,
            "checks": [check.as_dict() for check in self.checks],
        }


class OperatorTable:
    """Symbols of H and Lambda^s used by the suite.

    Args:
        grid: Grid of the symbol tables.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self._hilbert = hilbert_op(grid)
        self._lambda_factor = np.ones(grid.n // 2 + 1, dtype=complex)

    def hilbert(self, f: SpectralField) -> SpectralField:
        return self._hilbert(f)

    def lambda_symbol(self, s: float) -> MultiplierOp:
        op = lambda_op(self.grid, float(s))
        return MultiplierOp(self.grid, op.symbol * self._lambda_factor, op.label)

    def lam(self, f: SpectralField, s: float) -> SpectralField:
        return self.lambda_symbol(s)(f)

    def symbols(self) -> Dict[str, MultiplierOp]:
        return {"H": self._hilbert, "Lambda": self.lambda_symbol(1.0)}

    def corrupt(self, name: str, index: Optional[int] = None, factor: float = 1.5) -> OperatorTable:
        """
        Scale one entry of a symbol table. Index 0 sets the symbol at k = 0
        to one instead.

        Raises:
            NltParameterError: If `name` is not "hilbert" or "lambda".
        """
        index = self.grid.n // 8 if index is None else index
        if name == "hilbert":
            symbol = self._hilbert.symbol.copy()
            symbol[index] = 1.0 if index == 0 else symbol[index] * factor
            self._hilbert = MultiplierOp(self.grid, symbol, "H*")
        elif name == "lambda":
            if index == 0:
                self._lambda_factor[0] = np.inf
            else:
                self._lambda_factor[index] = factor
        else:
            raise NltParameterError(f"Unknown symbol table '{name}'. Use 'hilbert' or 'lambda'")
        logging.warning(f"Symbol table '{name}' corrupted at index {index}")
        return self


def random_field(
    grid: Grid, rng: np.random.Generator, max_mode: Optional[int] = None, decay: float = 0.0
) -> SpectralField:
    """Mean-zero band-limited field with random complex coefficients,
    optionally damped by exp(-decay m)."""
    max_mode = grid.n // 8 if max_mode is None else max_mode
    coefficients = np.zeros(grid.n // 2 + 1, dtype=complex)
    m = np.arange(1, max_mode + 1)
    coefficients[1 : max_mode + 1] = (
        rng.standard_normal(max_mode) + 1j * rng.standard_normal(max_mode)
    ) * np.exp(-decay * m)
    return SpectralField.from_spectral(grid, coefficients)


def _relative_linf(a: SpectralField, b: SpectralField) -> float:
    scale = max(lp_norm(b, np.inf), 1e-300)
    return lp_norm(a - b, np.inf) / scale


def check_symbol_tables(table: OperatorTable, **kwargs) -> CheckResult:
    try:
        for op in table.symbols().values():
            op.validate()
    except NltOperatorError as err:
        return CheckResult("symbol_tables", False, 1.0, 0.0, str(err))
    return CheckResult("symbol_tables", True, 0.0, 0.0)


def check_hilbert_square(table: OperatorTable, samples: int, rng, **kwargs) -> CheckResult:
    """H^2 = -I on mean-zero fields."""
    worst = 0.0
    for _ in range(samples):
        f = random_field(table.grid, rng)
        worst = max(worst, _relative_linf(table.hilbert(table.hilbert(f)), -f))
    return CheckResult("hilbert_square", worst <= 1e-10, worst, 1e-10)


def check_lambda_hilbert(table: OperatorTable, samples: int, rng, **kwargs) -> CheckResult:
    """Lambda f = H f_x."""
    worst = 0.0
    for _ in range(samples):
        f = random_field(table.grid, rng)
        worst = max(worst, _relative_linf(table.lam(f, 1.0), table.hilbert(derivative(f, 1))))
    return CheckResult("lambda_equals_h_dx", worst <= 1e-10, worst, 1e-10)


def check_hardy(table: OperatorTable, samples: int, rng, **kwargs) -> CheckResult:
    """2 H(f Hf) = (Hf)^2 - f^2 and ||f Hf||_1 <= ||f||_2^2 on random
    band-limited fields. Fields use a quarter of the modes so the products
    are exact."""
    worst = 0.0
    worst_ratio = 0.0
    grid = table.grid
    for _ in range(samples):
        f = random_field(grid, rng, max_mode=grid.n // 8)
        hf = table.hilbert(f)
        lhs = table.hilbert(dealiased_product(f, hf)) * 2.0
        rhs = dealiased_product(hf, hf) - dealiased_product(f, f)
        scale = max(lp_norm(f, np.inf) ** 2, 1e-300)
        worst = max(worst, lp_norm(lhs - rhs, np.inf) / scale)
        l1 = grid.dx * float(np.sum(np.abs(f.physical * hf.physical)))
        worst_ratio = max(worst_ratio, l1 / lp_norm(f, 2.0) ** 2)
    passed = worst <= 1e-10 and worst_ratio <= 1.0 + 1e-12
    return CheckResult(
        "hardy_identity", passed, worst, 1e-10, f"max ||f Hf||_1 / ||f||^2 = {worst_ratio:.6f}"
    )


def _oracle_error(table: OperatorTable, gamma: float) -> float:
    f = SpectralField.from_function(table.grid, lambda x: np.exp(np.cos(x)))
    f = f - f.mean
    spectral = table.lam(f, gamma)
    oracle = lambda_pv_oracle(f, gamma)
    return lp_norm(spectral - oracle, 2.0) / lp_norm(spectral, 2.0)


def check_pv_oracle(table: OperatorTable, oracle_n, **kwargs) -> CheckResult:
    """Spectral Lambda^gamma against the principal-value quadrature: relative
    L2 error below 1e-3 on the finer grid and an observed order of at least 2."""
    coarse, fine = oracle_n
    worst_error = 0.0
    worst_order = math.inf
    details = []
    tables = [
        table if table.grid == Grid(n) else OperatorTable(Grid(n)) for n in (coarse, fine)
    ]
    for gamma in ORACLE_GAMMAS:
        e_coarse = _oracle_error(tables[0], gamma)
        e_fine = _oracle_error(tables[1], gamma)
        order = math.log2(e_coarse / e_fine) if e_fine > 1e-13 and e_coarse > 1e-13 else math.inf
        worst_error = max(worst_error, e_fine)
        worst_order = min(worst_order, order)
        details.append(f"gamma={gamma:g}: error {e_fine:.2e}, order {order:.2f}")
    passed = worst_error <= 1e-3 and worst_order >= 2.0
    return CheckResult("pv_oracle", passed, worst_error, 1e-3, "; ".join(details))


def check_partition(table: OperatorTable, samples: int, rng, **kwargs) -> CheckResult:
    """Partition of unity at every grid wavenumber and exact reconstruction."""
    partition = DyadicPartition(table.grid)
    unity = float(np.max(np.abs(partition.partition_sum() - 1.0)))
    worst = 0.0
    for _ in range(max(samples // 10, 1)):
        f = random_field(table.grid, rng, max_mode=table.grid.n // 2 - 1) + 0.5
        total = partition.low_pass(f, partition.j_min)
        for j in partition.shells:
            total = total + partition.block(f, j)
        worst = max(worst, _relative_linf(total, f))
    value = max(unity, worst)
    return CheckResult(
        "littlewood_paley_partition",
        value <= 1e-10,
        value,
        1e-10,
        f"unity {unity:.2e}, reconstruction {worst:.2e}",
    )


def check_bernstein(table: OperatorTable, samples: int, rng, **kwargs) -> CheckResult:
    """||d Delta_j f||_2 <= (8/3) 2^j ||Delta_j f||_2 and
    ||Delta_j f||_inf <= C 2^(j/2) ||Delta_j f||_2 on every fully resolved shell."""
    partition = DyadicPartition(table.grid)
    worst_derivative = 0.0
    worst_sup = 0.0
    for _ in range(max(samples // 10, 1)):
        f = random_field(table.grid, rng, max_mode=table.grid.n // 2 - 1)
        for j in range(partition.j_min, partition.j_resolved + 1):
            try:
                first, second = partition.bernstein_ratio(f, j, k=1, p=2.0, q=np.inf)
            except NltError:
                continue
            worst_derivative = max(worst_derivative, first)
            worst_sup = max(worst_sup, second)
    passed = worst_derivative <= 8.0 / 3.0 + 1e-10 and worst_sup <= BERNSTEIN_BOUND
    return CheckResult(
        "bernstein",
        passed,
        max(worst_derivative, worst_sup),
        BERNSTEIN_BOUND,
        f"derivative ratio {worst_derivative:.4f}, sup ratio {worst_sup:.4f}",
    )


def check_commutators(table: OperatorTable, samples: int, rng, **kwargs) -> CheckResult:
    """Dyadic commutator ratio and the Lambda^1/2 commutator ratio over a
    random family; both stay below a fixed bound."""
    grid = table.grid
    partition = DyadicPartition(grid)
    worst_dyadic = 0.0
    worst_half = 0.0
    for _ in range(max(samples // 10, 1)):
        f = random_field(grid, rng, max_mode=grid.n // 8, decay=0.2)
        g = random_field(grid, rng, max_mode=grid.n // 8, decay=0.2)
        for j in range(partition.j_min, partition.j_resolved + 1):
            worst_dyadic = max(worst_dyadic, partition.commutator_ratio(f, g, j))
        psi = random_field(grid, rng, max_mode=8, decay=0.5)
        h = random_field(grid, rng, max_mode=grid.n // 8, decay=0.1)
        worst_half = max(worst_half, half_commutator_ratio(psi, f, h))
    value = max(worst_dyadic, worst_half)
    return CheckResult(
        "commutators",
        value <= COMMUTATOR_BOUND,
        value,
        COMMUTATOR_BOUND,
        f"dyadic {worst_dyadic:.3f}, half {worst_half:.3f}",
    )


CHECKS: Dict[str, Callable[..., CheckResult]] = {
    "symbol_tables": check_symbol_tables,
    "hilbert_square": check_hilbert_square,
    "lambda_equals_h_dx": check_lambda_hilbert,
    "hardy_identity": check_hardy,
    "pv_oracle": check_pv_oracle,
    "littlewood_paley_partition": check_partition,
    "bernstein": check_bernstein,
    "commutators": check_commutators,
}


def run_suite(
    level: str = "quick",
    table: Optional[OperatorTable] = None,
    seed: int = 0,
    only: Optional[List[str]] = None,
) -> VerificationReport:
    """
    Run the property suite at `level` ("quick" or "full").

    Args:
        level: Suite size. Sets the grid size and the number of random samples.
        table: Symbol tables to verify. Defaults to the library operators on
            the level's grid of period 2 pi.
        seed: Seed of the random families.
        only: Names of the checks to run. Defaults to all.

    Raises:
        NltParameterError: If the level or a check name is unknown.
    """
    if level not in LEVELS:
        raise NltParameterError(f"Unknown level '{level}'. Use one of {list(LEVELS)}")
    settings = LEVELS[level]
    grid = table.grid if table is not None else Grid(settings["n"])
    table = table or OperatorTable(grid)
    names = only or list(CHECKS)
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise NltParameterError(f"Unknown checks: {unknown}")

    report = VerificationReport(level=level, n=grid.n)
    for name in names:
        rng = np.random.default_rng(seed)
        tstart = time.time()
        result = CHECKS[name](
            table=table,
            samples=settings["samples"],
            rng=rng,
            oracle_n=settings["oracle_n"],
        )
        result.elapsed = time.time() - tstart
        logging.info(
            f"{name}: {'pass' if result.passed else 'FAIL'} value={result.value:.3e} ({result.elapsed:.2f} s)"
        )
        report.checks.append(result)
    return report
