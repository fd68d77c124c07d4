"""Zeta-zero ordinates and the zero-sum bounds c30(t, t0).

For t = 0 the bound is 2 (S - sum_{0 < gamma <= t0} gamma^-2), with S an
upper bound for the full sum over gamma > 0. For t = k T0 >= 1 the bound
comes from Lehman's formula applied to 1/(x - t)^2 + 1/(x + t)^2 and is
evaluated in closed form.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import settings
from .exceptions import (
    CoverageError,
    DomainError,
    EmptyZeroTableError,
    NonMonotoneZeroError,
    NonNumericZeroError,
    ZeroTableError,
)
from .quadrature import integrate

logger = logging.getLogger(__name__)

FIRST_ZERO_RANGE = (14.0, 15.0)
LOG_2PI = math.log(2 * math.pi)


@dataclass(frozen=True)
class ZeroTable:
    """Ascending ordinates with running sums of gamma^-2."""
    gammas: np.ndarray
    prefix_inv_sq: np.ndarray

    @classmethod
    def from_ordinates(cls, gammas) -> "ZeroTable":
        gammas = np.asarray(gammas, dtype=float)
        return cls(gammas=gammas, prefix_inv_sq=np.cumsum(1.0 / gammas**2))

    @property
    def count(self) -> int:
        return int(self.gammas.size)

    @property
    def max_gamma(self) -> float:
        return float(self.gammas[-1])

    def partial_inv_sq(self, t0: float) -> float:
        """sum of gamma^-2 over 0 < gamma <= t0."""
        index = int(np.searchsorted(self.gammas, t0, side="right"))
        return float(self.prefix_inv_sq[index - 1]) if index else 0.0


@dataclass(frozen=True)
class TailConstant:
    """Upper bound for the sum of gamma^-2 over all zeros with gamma > 0."""
    total_inv_sq_bound: float = field(default_factory=lambda: settings.TAIL_INV_SQ)


def load_zeros(path: str | Path) -> ZeroTable:
    """Read one ordinate per line, ascending; '#' lines are ignored."""
    path = Path(path)
    if not path.exists():
        raise ZeroTableError(f"Zeros file not found: {path}")

    gammas = []
    previous = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                gamma = float(line)
            except ValueError:
                raise NonNumericZeroError(f"not a number: {line!r}", line=lineno)
            if not math.isfinite(gamma) or gamma <= 0.0:
                raise NonNumericZeroError(f"ordinate must be a positive finite number, got {line!r}", line=lineno)
            if previous is not None and gamma <= previous:
                raise NonMonotoneZeroError(f"ordinate {gamma} does not exceed previous {previous}", line=lineno)
            gammas.append(gamma)
            previous = gamma

    if not gammas:
        raise EmptyZeroTableError(f"No ordinates in {path.name}")

    lo, hi = FIRST_ZERO_RANGE
    if not lo < gammas[0] < hi:
        raise ZeroTableError(f"{path.name}: first ordinate {gammas[0]} is not the first zero (expected about 14.13)")

    table = ZeroTable.from_ordinates(gammas)
    logger.info(f"Loaded {table.count} zeros from {path.name}, max gamma {table.max_gamma}")
    return table


def sigma_zero_bound(t0: float, table: ZeroTable, tail: Optional[TailConstant] = None) -> float:
    """Upper bound for the sum over zeros with |gamma| >= t0 of gamma^-2."""
    tail = tail or TailConstant()
    if t0 > table.max_gamma:
        raise CoverageError(
            f"Zeros table reaches {table.max_gamma}, partial sum up to t0={t0} would be incomplete"
        )
    return 2.0 * (tail.total_inv_sq_bound - table.partial_inv_sq(t0))


@dataclass(frozen=True)
class ZeroSumProvider:
    """Source of c30(0, t0): a zeros table, the published fallback, or both."""
    table: Optional[ZeroTable] = None
    use_fallback: bool = False
    tail: TailConstant = field(default_factory=TailConstant)

    def zero_sum(self, t0: float) -> float:
        if self.table is not None and t0 <= self.table.max_gamma:
            value = sigma_zero_bound(t0, self.table, self.tail)
            logger.info(f"c30(0, {t0:g}) = {value:.9g} from zeros table ({self.table.count} zeros)")
            return value
        if self.use_fallback and t0 == settings.C30_FALLBACK_T0:
            logger.info(f"c30(0, {t0:g}) = {settings.C30_FALLBACK} from published fallback constant")
            return settings.C30_FALLBACK
        if self.use_fallback:
            raise CoverageError(
                f"The fallback constant only covers t0={settings.C30_FALLBACK_T0:g}; supply zeros for t0={t0:g}"
            )
        raise CoverageError(f"No zeros data covers t0={t0:g}; pass a zeros file or enable the fallback")


def c30_integral(b: float, t0: float) -> float:
    """(1/2pi) int_{t0}^inf log((x+b)/2pi) (x^-2 + (x+2b)^-2) dx in closed form.

    Integration by parts gives, for the two pieces,
    (log(t0+b) - log 2pi)/t0 + log(1 + b/t0)/b and
    (log(t0+b) - log 2pi)/(t0+2b) + log(1 + b/(t0+b))/b.
    """
    log_shift = math.log(t0 + b) - LOG_2PI
    first = log_shift / t0 + math.log1p(b / t0) / b
    second = log_shift / (t0 + 2 * b) + math.log1p(b / (t0 + b)) / b
    return (first + second) / (2 * math.pi)


def c30_integral_quadrature(b: float, t0: float, rel_tol: float = 1e-13, span: float = 100.0) -> float:
    """Same integral by quadrature after x = t0 e^v, truncated at v = span."""
    def integrand(v):
        x = t0 * np.exp(v)
        with np.errstate(over="ignore"):
            return np.log((x + b) / (2 * np.pi)) * (1.0 / x**2 + 1.0 / (x + 2 * b) ** 2) * x

    scale = (math.log(t0 + b) + 1.0) / t0
    result = integrate(integrand, 0.0, span, tol=rel_tol * scale)
    return result.value / (2 * math.pi)


def c30(k: int, T0: float, t0: float, provider: ZeroSumProvider) -> float:
    """Upper bound c30(k T0, t0) for the sum over |gamma| >= kT0 + t0 of 1/(gamma - kT0)^2."""
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    if T0 <= 0 or t0 <= 0:
        raise DomainError(f"T0 and t0 must be positive, got T0={T0}, t0={t0}")

    if k == 0:
        return provider.zero_sum(t0)

    b = k * T0
    return (
        c30_integral(b, t0)
        + 4.0 * math.log(b + t0) * ((1.0 / t0) ** 2 + (1.0 / (t0 + 2 * b)) ** 2)
        + 4.0 / (b * t0)
    )
