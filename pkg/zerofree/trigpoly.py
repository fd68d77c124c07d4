"""Nonnegative cosine polynomials built from spectral factors.

A spectral factor c_0..c_n defines f(phi) = |sum c_k e^{ik phi}|^2, which is
nonnegative everywhere. Its cosine coefficients are the aperiodic
autocorrelations of c: a_0 = sum c_j^2 and a_k = 2 sum_j c_j c_{j+k}.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, MembershipError
from .models import MembershipReport

logger = logging.getLogger(__name__)


@dataclass
class SpectralFactor:
    """Real sequence c_0..c_n with c_0 = 1."""
    c: np.ndarray

    def __post_init__(self):
        self.c = np.array(self.c, dtype=float)
        if self.c.ndim != 1 or self.c.size < 2:
            raise DomainError(f"A spectral factor needs at least two entries, got {self.c.size}")
        if self.c[0] != 1.0:
            raise DomainError(f"Spectral factors are normalized with c_0 = 1, got c_0 = {self.c[0]}")

    @property
    def n(self) -> int:
        return self.c.size - 1

    @classmethod
    def normalized(cls, c) -> "SpectralFactor":
        """Scale an arbitrary factor so that c_0 = 1."""
        c = np.asarray(c, dtype=float)
        if c[0] == 0.0:
            raise DomainError("Cannot normalize a factor with c_0 = 0")
        return cls(c / c[0])

    def copy(self) -> "SpectralFactor":
        return SpectralFactor(self.c.copy())


@dataclass
class CosinePolynomial:
    """f(phi) = sum a_k cos(k phi), with A = a_1 + ... + a_n."""
    a: np.ndarray
    A: float = field(init=False)

    def __post_init__(self):
        self.a = np.array(self.a, dtype=float)
        if self.a.ndim != 1 or self.a.size < 2:
            raise DomainError(f"A cosine polynomial needs at least two coefficients, got {self.a.size}")
        self.A = float(self.a[1:].sum())

    @property
    def n(self) -> int:
        return self.a.size - 1

    @property
    def a0(self) -> float:
        return float(self.a[0])

    @property
    def a1(self) -> float:
        return float(self.a[1])

    def normalized(self) -> "CosinePolynomial":
        """Coefficients divided by a_0."""
        return CosinePolynomial(self.a / self.a[0])


def autocorrelation(c: np.ndarray) -> np.ndarray:
    """Cosine coefficients of |sum c_k e^{ik phi}|^2."""
    n = c.size - 1
    a = np.correlate(c, c, mode="full")[n:].copy()
    a[1:] *= 2.0
    return a


def cosine_from_factor(factor: SpectralFactor) -> CosinePolynomial:
    return CosinePolynomial(autocorrelation(factor.c))


def from_product_form(b1: float, b2: float | None = None) -> SpectralFactor:
    """Spectral factor of (b1 + cos phi)^2 (b2 + cos phi)^2.

    With b2 omitted this is (b1 + cos phi)^2. The square root p(phi) is a
    cosine polynomial, and e^{i m phi} p(phi) has real coefficients
    (p_m/2, ..., p_1/2, p_0, p_1/2, ..., p_m/2).
    """
    if b2 is None:
        p = [b1, 1.0]
    else:
        p = [b1 * b2 + 0.5, b1 + b2, 0.5]
    half = [x / 2 for x in p[1:]]
    return SpectralFactor.normalized(half[::-1] + [p[0]] + half)


def evaluate(f: CosinePolynomial, phi):
    """Evaluate f at phi (scalar or array, radians)."""
    phi_arr = np.asarray(phi, dtype=float)
    k = np.arange(f.a.size)
    values = np.cos(np.multiply.outer(phi_arr, k)) @ f.a
    if phi_arr.ndim == 0:
        return float(values)
    return values


def evaluate_factor(factor: SpectralFactor, phi):
    """|sum c_k e^{ik phi}|^2, the direct form of the same polynomial."""
    phi_arr = np.asarray(phi, dtype=float)
    k = np.arange(factor.c.size)
    values = np.abs(np.exp(1j * np.multiply.outer(phi_arr, k)) @ factor.c) ** 2
    if phi_arr.ndim == 0:
        return float(values)
    return values


def objective_from(a0: float, a1: float, A: float) -> float:
    """Landau quotient from its three inputs, one square root per call."""
    return A / (a0 + a1 - 2.0 * math.sqrt(a0 * a1))


def landau_objective(f: CosinePolynomial) -> float:
    """(f(0) - a_0) / (sqrt(a_1) - sqrt(a_0))^2."""
    if f.a0 <= 0.0:
        raise DomainError(f"Landau objective needs a_0 > 0, got {f.a0}")
    if f.a1 <= f.a0:
        raise DomainError(f"Landau objective needs a_1 > a_0, got a_1={f.a1}, a_0={f.a0}")
    return objective_from(f.a0, f.a1, f.A)


def is_member(a: np.ndarray) -> bool:
    """Fast P_n test on a raw coefficient array."""
    return bool(a[1] > a[0]) and bool((a >= 0.0).all())


def membership_check(f: CosinePolynomial) -> MembershipReport:
    negative = np.flatnonzero(f.a < 0.0)
    first_negative = int(negative[0]) if negative.size else None
    a1_exceeds_a0 = f.a1 > f.a0
    return MembershipReport(
        is_member=first_negative is None and a1_exceeds_a0,
        first_negative_index=first_negative,
        a1_exceeds_a0=a1_exceeds_a0,
    )


def require_member(f: CosinePolynomial) -> None:
    report = membership_check(f)
    if not report.is_member:
        raise MembershipError(f"Polynomial of degree {f.n} is not in P_n: {report.reason()}")


def apply_step(factor: SpectralFactor, a: np.ndarray, k: int, s: float) -> tuple[SpectralFactor, np.ndarray]:
    """Change c_k by s and update the autocorrelations in place, O(n).

    a_0 gains s(2 c_k + s); for i >= 1, a_i gains 2s(c_{k-i} + c_{k+i})
    over the indices that exist.
    """
    c = factor.c
    n = c.size - 1
    if not 1 <= k <= n:
        raise DomainError(f"Step index must lie in 1..{n}, got {k}")

    a[0] += s * (2.0 * c[k] + s)
    a[1:k + 1] += 2.0 * s * c[k - 1::-1]
    if k < n:
        a[1:n - k + 1] += 2.0 * s * c[k + 1:]
    c[k] += s
    return factor, a


def min_value(f: CosinePolynomial, points: int = 10_000) -> float:
    """Smallest sampled value of f on [0, pi]."""
    return float(evaluate(f, np.linspace(0.0, math.pi, points)).min())
