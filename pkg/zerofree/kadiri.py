"""The theta-dependent analytic quantities and the error term C(eta).

Everything that depends on theta alone (g1, d1, m, the moments M_k, t* and
the constant c) is computed once in a ThetaTable. The error term is
assembled per round from the table, the scale parameters, kappa and delta
and the zero-sum bounds c30(k T0, t0).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np
from scipy.special import digamma

from .exceptions import BracketError, ConstraintError, DomainError, MembershipError
from .models import THETA_MIN
from .quadrature import find_max_abs, find_root, integrate, integrate_abs
from .trigpoly import CosinePolynomial

logger = logging.getLogger(__name__)

# e^y <= 1 + y + y^2/2 + y^3/3.45 holds on [0, EXP_CUBIC_LIMIT]
EXP_CUBIC_LIMIT = 1.91094
MOMENT_NUDGE = 1e-12

DELTA_MIN = (math.sqrt(5.0) - 1.0) / 2.0
DELTA_MAX = 0.866
DELTA_TOL = 1e-12
KAPPA_MATCH_TOL = 1e-9

THETA_TOL = 1e-12
ITERATION_TOL = 1e-10
WINDOW_TOL = 1e-14
DEFAULT_EPSILON = 1e-3

# k = 0 outer window is integrated in v with t = t* e^v up to this span
LOG_SPAN = 60.0

# the k = 0 window sits under both members of each conjugate zero pair
CENTERED_WEIGHT = 2.0


def _check_theta(theta: float) -> None:
    if not math.pi / 2 < theta < math.pi:
        raise DomainError(f"theta must lie in (pi/2, pi), got {theta}")


def _scalar_or_array(values: np.ndarray, u):
    return float(values) if np.ndim(u) == 0 else values


def h_theta(theta: float, u):
    """Kadiri's weight h_theta(u); accepts scalars or arrays."""
    _check_theta(theta)
    x = np.asarray(u, dtype=float)
    tan = math.tan(theta)
    sec2 = 1.0 / math.cos(theta) ** 2
    alpha = -theta / tan
    ut = x * tan
    values = sec2 * (
        sec2 * (alpha - x / 2) * np.cos(ut)
        - 2 * theta / tan
        - x
        - np.sin(2 * theta + ut) / math.sin(2 * theta)
        + 2 * (1 + np.sin(theta + ut) / math.sin(theta))
    )
    return _scalar_or_array(values, u)


def h2_theta(theta: float, u):
    """Second derivative of h_theta in u."""
    _check_theta(theta)
    x = np.asarray(u, dtype=float)
    tan = math.tan(theta)
    sec2 = 1.0 / math.cos(theta) ** 2
    alpha = -theta / tan
    ut = x * tan
    values = sec2 * (
        sec2 * (tan * np.sin(ut) - (alpha - x / 2) * tan**2 * np.cos(ut))
        + tan**2 * np.sin(2 * theta + ut) / math.sin(2 * theta)
        - 2 * tan**2 * np.sin(theta + ut) / math.sin(theta)
    )
    return _scalar_or_array(values, u)


def g1(theta: float) -> float:
    """h_theta(0) = sec^2(theta)(3 - theta tan(theta) - 3 theta cot(theta))."""
    _check_theta(theta)
    tan = math.tan(theta)
    return (3.0 - theta * tan - 3.0 * theta / tan) / math.cos(theta) ** 2


def d1(theta: float) -> float:
    _check_theta(theta)
    return -2.0 * theta / math.tan(theta)


def t_star_constants() -> tuple[float, float]:
    """t* where log(t/2) = 2/(1+4t^2), and the best c with U0(t) <= log t - c past it."""
    t_star = find_root(lambda t: math.log(t / 2) - 2 / (1 + 4 * t * t), 2.0, 3.0, tol=1e-15)
    c = (
        math.log(2)
        + 2 / (1 + 4 * t_star**2)
        - 2 / (3 * t_star)
        - 1 / (8 * t_star**2)
    )
    return t_star, c


@dataclass(frozen=True)
class ThetaTable:
    """Quantities fixed by theta; the moments are stored as upper values."""
    theta: float
    g1: float
    d1: float
    m: float
    M0: float
    M1: float
    M2: float
    M3: float
    t_star: float
    c_const: float

    @property
    def moments(self) -> tuple[float, float, float, float]:
        return self.M0, self.M1, self.M2, self.M3


def theta_table(theta: float, tol: float = THETA_TOL) -> ThetaTable:
    """Build the table for theta; ``tol`` is relative to m * d1."""
    if not THETA_MIN < theta < math.pi:
        raise DomainError(
            f"theta={theta} outside ({THETA_MIN}, pi): the cubic bound for M* "
            f"needs d1(theta) <= {EXP_CUBIC_LIMIT}"
        )

    width = d1(theta)
    second = lambda u: h2_theta(theta, u)
    m = find_max_abs(second, 0.0, width)

    abs_tol = tol * m * width
    moments = [
        integrate_abs(lambda u, k=k: second(u) * u**k, 0.0, width, tol=abs_tol).upper
        for k in range(4)
    ]
    t_star, c_const = t_star_constants()

    table = ThetaTable(
        theta=theta,
        g1=g1(theta),
        d1=width,
        m=m,
        M0=moments[0],
        M1=moments[1],
        M2=moments[2],
        M3=moments[3],
        t_star=t_star,
        c_const=c_const,
    )
    logger.info(
        f"theta={theta}: g1={table.g1:.10g}, d1={table.d1:.10g}, m={table.m:.10g}, "
        f"M=({table.M0:.10g}, {table.M1:.10g}, {table.M2:.10g}, {table.M3:.10g})"
    )
    return table


def m_star(z: float, table: ThetaTable) -> float:
    """Upper bound for int_0^d1 |h''(u)| e^{-zu} du from the cached moments.

    Each term of M0 - M1 z + M2 z^2/2 - M3 z^3/3.45 is pushed up by a
    relative 1e-12, which enlarges the total for every z <= 0.
    """
    if not -1.0 < z <= 0.0:
        raise DomainError(f"m_star needs z in (-1, 0], got {z}")
    if table.d1 > EXP_CUBIC_LIMIT:
        raise DomainError(f"d1={table.d1} exceeds {EXP_CUBIC_LIMIT}; the cubic bound for e^y does not apply")

    terms = (
        table.M0,
        -table.M1 * z,
        table.M2 * z**2 / 2,
        -table.M3 * z**3 / 3.45,
    )
    return sum(term + abs(term) * MOMENT_NUDGE for term in terms)


@dataclass(frozen=True)
class ScaleParams:
    eta0: float
    sigma0: float
    w0: float


@dataclass(frozen=True)
class KappaDelta:
    delta: float
    kappa: float


def _kappa_parts(sigma0: float, eta0: float, table: ThetaTable) -> tuple[float, float, float]:
    spread = 2 * sigma0 - 1
    m_eta = table.m * eta0**2
    numerator = table.g1 * spread - m_eta / spread
    return spread, m_eta, numerator


def kappa2(delta: float, sigma0: float, eta0: float, table: ThetaTable) -> float:
    spread, m_eta, numerator = _kappa_parts(sigma0, eta0, table)
    denominator = (1 + 2 * delta) * table.g1 + (1 / delta + 1 / (delta + spread)) * m_eta
    return numerator / denominator


def kappa3(delta: float, sigma0: float, eta0: float, table: ThetaTable) -> float:
    spread, m_eta, numerator = _kappa_parts(sigma0, eta0, table)
    denominator = (
        (1 / delta + (1 + delta) / (delta + spread) ** 2) * table.g1
        + (1 / delta**3 + 1 / (delta + spread) ** 3) * m_eta
    )
    return numerator / denominator


def kappa_delta(sigma0: float, eta0: float, table: ThetaTable) -> KappaDelta:
    """Solve kappa2(delta) = kappa3(delta) and check the admissibility constraints."""
    if not 0.5 < sigma0 < 1.0:
        raise DomainError(f"sigma0 must lie in (1/2, 1), got {sigma0}")
    if eta0 <= 0:
        raise DomainError(f"eta0 must be positive, got {eta0}")

    gap = lambda d: kappa2(d, sigma0, eta0, table) - kappa3(d, sigma0, eta0, table)
    try:
        delta = find_root(gap, DELTA_MIN, DELTA_MAX, tol=DELTA_TOL)
    except BracketError as e:
        raise ConstraintError(
            f"kappa2 = kappa3 has no solution for delta in [{DELTA_MIN:.6f}, {DELTA_MAX}]: {e}",
            inequality="(sqrt(5)-1)/2 <= delta <= 0.866",
        )

    k2 = kappa2(delta, sigma0, eta0, table)
    k3 = kappa3(delta, sigma0, eta0, table)
    if abs(k2 - k3) > KAPPA_MATCH_TOL:
        raise ConstraintError(f"kappa2={k2} and kappa3={k3} differ at delta={delta}", inequality="kappa2 = kappa3")
    kappa = k2
    if kappa <= 0:
        raise ConstraintError(f"kappa={kappa} is not positive", inequality="kappa > 0")

    inverse = 1 / kappa
    lower = 1 / delta + 1 / (0.99 + delta)
    upper = 1 / delta**3 + 1 / (1 + delta) ** 3
    if inverse < lower:
        raise ConstraintError(
            f"1/kappa={inverse} below {lower} at delta={delta}",
            inequality="1/delta + 1/(0.99 + delta) <= 1/kappa",
        )
    if inverse > upper:
        raise ConstraintError(
            f"1/kappa={inverse} above {upper} at delta={delta}",
            inequality="1/kappa <= 1/delta^3 + 1/(1 + delta)^3",
        )

    return KappaDelta(delta=delta, kappa=kappa)


def k_integral(w: float, table: ThetaTable, a0: float, a1: float, tol: float = ITERATION_TOL) -> float:
    """Lower value of K(w) = int_0^d1 (a1 e^{-u} - a0) h(u) e^{wu} du."""
    if a0 <= 0 or a1 <= 0:
        raise DomainError(f"K needs positive a0 and a1, got a0={a0}, a1={a1}")
    if w < 0:
        raise DomainError(f"K is only used for w >= 0, got {w}")

    theta = table.theta

    def integrand(u):
        return (a1 * np.exp(-u) - a0) * h_theta(theta, u) * np.exp(w * u)

    return integrate(integrand, 0.0, table.d1, tol=tol).lower


# C1


def r2(x0: float, x1: float, y0: float, kd: KappaDelta) -> float:
    """x0 does not enter this bound; kept for symmetry with r3."""
    kappa, delta = kd.kappa, kd.delta
    return (
        (1 - kappa) / 2 * math.log1p(((x1 + delta) / y0) ** 2)
        + (math.atan(y0 / x1) + kappa * math.atan(y0 / (x1 + delta))) / y0
    )


def r3(x0: float, x1: float, y0: float, kd: KappaDelta) -> float:
    kappa, delta = kd.kappa, kd.delta
    return (
        (1 / x0 + kappa / (x0 + delta)) / (3 * y0)
        + ((x1 / y0) ** 2 + kappa * ((x1 + delta) / y0) ** 2) / 2
    )


def c1_coeffs(kd: KappaDelta, sigma0: float, T0: float, n: int) -> np.ndarray:
    """c1(0), ..., c1(n)."""
    kappa, delta = kd.kappa, kd.delta
    coeffs = np.empty(n + 1)
    coeffs[0] = (
        (kappa - 1) / 2 * math.log(math.pi)
        + 0.5 * digamma(1.5)
        - kappa / 2 * digamma((sigma0 + delta) / 2 + 1)
    )
    for k in range(1, n + 1):
        y0 = k * T0
        coeffs[k] = (kappa - 1) / 2 * math.log(2 * math.pi / k) + 0.5 * min(
            r2(sigma0 + 2, 3.0, y0, kd),
            r3(sigma0 + 2, 3.0, y0, kd),
        )
    return coeffs


# C4


def u0_bound(t):
    """Upper bound for U0(t), the |t| < 1/2 and |t| >= 1/2 branches."""
    x = np.abs(np.asarray(t, dtype=float))
    q = 1 + 4 * x**2
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = 0.5 * np.log(16 / q) + 2 / q + 2
        outer = np.abs(np.log(x / 2) - 2 / q) + 2 / (3 * x) + 1 / (8 * x**2)
    values = np.where(x < 0.5, inner, outer)
    return _scalar_or_array(values, t)


def _window(a: float, b: float, lo: float, hi: float) -> float:
    def integrand(t):
        with np.errstate(over="ignore"):
            return u0_bound(t) / (a**2 + (b - t) ** 2)

    return integrate(integrand, lo, hi, tol=WINDOW_TOL).upper


def _centered_integral(a: float, table: ThetaTable) -> float:
    """Bound for int U0(t)/(a^2 + t^2) dt over the real line."""
    t_star, c = table.t_star, table.c_const

    def outer(v):
        t = t_star * np.exp(v)
        return u0_bound(t) * t / (a**2 + t**2)

    far = t_star * math.exp(LOG_SPAN)
    tail = (math.log(far) + 1 - c) / far
    outer_part = integrate(outer, 0.0, LOG_SPAN, tol=WINDOW_TOL).upper + tail
    return 2 * (_window(a, 0.0, 0.0, 0.5) + _window(a, 0.0, 0.5, t_star) + outer_part)


def _shifted_integral(a: float, b: float, table: ThetaTable, epsilon: float) -> float:
    """Bound for int U0(t)/(a^2 + (b-t)^2) dt, b >= 1, split at -t*, -1/2, 1/2, t*."""
    t_star, c = table.t_star, table.c_const
    if b * (1 - epsilon) <= t_star:
        raise DomainError(f"b(1-epsilon)={b * (1 - epsilon)} must exceed t*={t_star}")

    i1 = math.log(b + t_star) / b - t_star * math.log(t_star) / (b * (b + t_star)) - c / (b + t_star)
    i2 = _window(a, b, -t_star, -0.5)
    i3 = _window(a, b, -0.5, 0.5)
    i4 = _window(a, b, 0.5, t_star)

    below = (
        math.log(b) / epsilon
        - math.log(b - t_star)
        + math.log(epsilon)
        - (1 - 1 / epsilon) * math.log1p(-epsilon)
        - t_star * math.log(t_star) / (b - t_star)
    ) / b
    around = math.pi / a * math.log(b * (1 + epsilon))
    above = (math.log(b) + epsilon * math.log1p(1 / epsilon) + math.log1p(epsilon)) / (b * epsilon)
    shift = c / a * (math.atan((b - t_star) / a) + math.pi / 2)
    i5 = below + around + above - shift

    return i1 + i2 + i3 + i4 + i5


def c41_integral(a: float, b: float, table: ThetaTable, epsilon: float = DEFAULT_EPSILON) -> float:
    """Upper bound for int U0(t)/(a^2 + (b-t)^2) dt."""
    if a <= 0:
        raise DomainError(f"a must be positive, got {a}")
    if b == 0:
        return _centered_integral(a, table)
    return _shifted_integral(a, b, table, epsilon)


def c41(
    k: int,
    sigma0: float,
    kd: KappaDelta,
    T0: float,
    table: ThetaTable,
    epsilon: float = DEFAULT_EPSILON,
) -> float:
    a = sigma0 - 0.5
    shifted = a + kd.delta
    b = k * T0
    return (
        c41_integral(a, b, table, epsilon) / (2 * math.pi * a)
        + kd.kappa * c41_integral(shifted, b, table, epsilon) / (2 * math.pi * shifted)
    )


def c41_weight(k: int) -> float:
    """Multiplicity of C41(k) inside the C4 sum."""
    return CENTERED_WEIGHT if k == 0 else 1.0


def c42(k: int, sigma0: float, kd: KappaDelta, T0: float) -> float:
    if k == 0:
        return 1 / sigma0**3 + kd.kappa / (sigma0 + kd.delta) ** 3
    return (1 / sigma0 + kd.kappa / (sigma0 + kd.delta)) * (1 / (k * T0)) ** 2


@dataclass(frozen=True)
class ErrorContext:
    """Everything C(eta) depends on for one round."""
    poly: CosinePolynomial
    table: ThetaTable
    scale: ScaleParams
    kd: KappaDelta
    T0: float
    t0: float
    r: float
    R: float
    c30_values: Sequence[float]
    epsilon: float = DEFAULT_EPSILON


@dataclass(frozen=True)
class ErrorTerm:
    """C(eta) = C1 + C2 + C3 + C4 with the eta-free coefficients precomputed."""
    c1_slope: float
    q: tuple[float, float, float]
    p: tuple[float, float, float]
    c4_cubic: float
    M_star: float = field(default=0.0)

    @classmethod
    def from_context(cls, ctx: ErrorContext) -> "ErrorTerm":
        a = ctx.poly.a
        if (a < 0).any():
            raise MembershipError(f"Error term needs nonnegative coefficients, a_{int(np.flatnonzero(a < 0)[0])} < 0")
        n = ctx.poly.n
        if len(ctx.c30_values) != n + 1:
            raise DomainError(f"Need c30 for k = 0..{n}, got {len(ctx.c30_values)} values")

        table, kd = ctx.table, ctx.kd
        kappa, delta = kd.kappa, kd.delta
        eta0, sigma0 = ctx.scale.eta0, ctx.scale.sigma0
        a0, a1 = float(a[0]), float(a[1])
        m, g = table.m, table.g1

        M_star = m_star(-ctx.r / ctx.R, table)
        k = np.arange(1, n + 1)
        inv_sq = float(np.dot(a[1:], (1.0 / (k * ctx.T0)) ** 2))
        zero_sums = float(np.dot(a, ctx.c30_values))
        gap = sigma0 - 1 + delta
        lean = sigma0 - eta0 + delta

        c1_slope = g * float(np.dot(a, c1_coeffs(kd, sigma0, ctx.T0, n)))

        q = (
            -kappa * g * (a0 / delta + gap / 2 * inv_sq),
            M_star * inv_sq,
            a0 * m * kappa / gap**3 + m * kappa / gap * inv_sq,
        )
        p = (
            a1 * g * ((1 / delta + 1 / lean) * kappa - 1) + M_star * eta0 * zero_sums,
            (1 + 2 * kappa) * m * eta0 / (sigma0 - 0.5) * zero_sums,
            a1 * m * ((1 / delta**3 + 1 / lean**3) * kappa + 1),
        )

        c4_sum = sum(
            a[j] * (c41_weight(j) * c41(j, sigma0, kd, ctx.T0, table, ctx.epsilon) + c42(j, sigma0, kd, ctx.T0))
            for j in range(n + 1)
        )

        term = cls(c1_slope=c1_slope, q=q, p=p, c4_cubic=m * float(c4_sum), M_star=M_star)
        logger.debug(f"Error term coefficients: {term}")
        return term

    def pieces(self, eta: float) -> Dict[str, float]:
        powers = (eta, eta**2, eta**3)
        return {
            "C1": self.c1_slope * eta,
            "C2": sum(coef * x for coef, x in zip(self.q, powers)),
            "C3": sum(coef * x for coef, x in zip(self.p, powers)),
            "C4": self.c4_cubic * eta**3,
        }

    def __call__(self, eta: float) -> float:
        return sum(self.pieces(eta).values())


def error_C(eta1: float, context: ErrorContext) -> float:
    """C(eta1) for the round described by ``context``."""
    if eta1 <= 0:
        raise DomainError(f"eta1 must be positive, got {eta1}")
    return ErrorTerm.from_context(context)(eta1)
