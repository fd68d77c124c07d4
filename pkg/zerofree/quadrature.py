"""Adaptive quadrature, bracketing root finding and bounded maximization.

Integrands passed to ``integrate`` and ``integrate_abs`` are evaluated on
numpy arrays of nodes; scalar-valued callables are broadcast.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import BracketError, DomainError, QuadratureError

logger = logging.getLogger(__name__)

GAUSS_ORDER = 20
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2

MAX_SAFETY = 1e-10
# Panels whose halves agree to within rounding are accepted whatever tol asks
ROUNDING_FLOOR = 64 * np.finfo(float).eps

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntegralResult:
    """Value of a definite integral with its estimated absolute error."""
    value: float
    error_estimate: float
    subdivisions: int

    @property
    def upper(self) -> float:
        return self.value + self.error_estimate

    @property
    def lower(self) -> float:
        return self.value - self.error_estimate


def _panel(f: Integrand, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _NODES
    y = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    return half * float(np.dot(_WEIGHTS, y))


def integrate(
    f: Integrand,
    a: float,
    b: float,
    tol: float = 1e-10,
    max_subdivisions: int = 20_000,
) -> IntegralResult:
    """Integrate f over [a, b] by adaptive bisection of Gauss-Legendre panels.

    A panel is accepted once its two halves agree with it to within the
    panel's share of ``tol``; the discrepancies are summed into
    ``error_estimate``.
    """
    if a > b:
        raise DomainError(f"Integration limits out of order: a={a} > b={b}")
    if tol <= 0:
        raise DomainError(f"Tolerance must be positive, got {tol}")
    if a == b:
        return IntegralResult(0.0, 0.0, 0)

    width = b - a
    stack = [(a, b, _panel(f, a, b))]
    total = 0.0
    error = 0.0
    subdivisions = 0

    while stack:
        lo, hi, estimate = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid)
        right = _panel(f, mid, hi)
        refined = left + right
        diff = abs(refined - estimate)

        if (
            diff <= tol * (hi - lo) / width
            or diff <= ROUNDING_FLOOR * abs(refined)
            or mid <= lo
            or mid >= hi
        ):
            total += refined
            error += diff
            continue

        subdivisions += 1
        if subdivisions > max_subdivisions:
            partial = total + refined + sum(item[2] for item in stack)
            raise QuadratureError(
                f"Subdivision limit {max_subdivisions} exceeded on [{a}, {b}]",
                partial=partial,
            )
        stack.append((lo, mid, left))
        stack.append((mid, hi, right))

    if not (math.isfinite(total) and math.isfinite(error)):
        raise QuadratureError(f"Non-finite integral on [{a}, {b}]", partial=total)

    return IntegralResult(total, error, subdivisions)


def sign_changes(f: Integrand, a: float, b: float, scan_points: int = 2000) -> list[float]:
    """Locate the sign changes of f on [a, b] by a scan plus bisection."""
    x = np.linspace(a, b, scan_points + 1)
    y = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    scalar = lambda t: float(np.asarray(f(np.array([t])), dtype=float).reshape(-1)[0])

    roots = []
    for i in range(scan_points):
        if y[i] == 0.0 and 0 < i:
            roots.append(float(x[i]))
        elif y[i] * y[i + 1] < 0.0:
            roots.append(find_root(scalar, float(x[i]), float(x[i + 1]), tol=1e-15 * max(1.0, abs(b - a))))
    return roots


def integrate_abs(
    f: Integrand,
    a: float,
    b: float,
    tol: float = 1e-10,
    scan_points: int = 2000,
) -> IntegralResult:
    """Integrate |f| over [a, b], splitting at the sign changes of f."""
    if a > b:
        raise DomainError(f"Integration limits out of order: a={a} > b={b}")

    cuts = [a] + [r for r in sign_changes(f, a, b, scan_points) if a < r < b] + [b]
    share = tol / (len(cuts) - 1)

    value = 0.0
    error = 0.0
    subdivisions = 0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        piece = integrate(f, lo, hi, tol=share)
        value += abs(piece.value)
        error += piece.error_estimate
        subdivisions += piece.subdivisions

    return IntegralResult(value, error, subdivisions)


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Bisect a sign change of f on [lo, hi] down to width tol."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise BracketError(f"No sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0.0) == (flo < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid

    return 0.5 * (lo + hi)


def _golden_max(g: Callable[[float], float], a: float, b: float, tol: float = 1e-14) -> float:
    """Golden-section search for the maximum of a unimodal g on [a, b]."""
    h = b - a
    if h <= tol:
        return max(g(a), g(b))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    gc = g(c)
    gd = g(d)
    steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    for _ in range(steps):
        if gc > gd:
            b, d, gd = d, c, gc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            h = INV_PHI * h
            d = a + INV_PHI * h
            gd = g(d)

    return max(gc, gd)


def find_max_abs(
    f: Integrand,
    lo: float,
    hi: float,
    scan_points: int = 20_000,
    refine: int = 5,
) -> float:
    """Upper estimate of max |f| on [lo, hi].

    A dense scan picks the best ``refine`` local maxima of |f|, each is
    refined by golden-section search on its neighbouring cells, and the
    result is inflated by a relative 1e-10.
    """
    x = np.linspace(lo, hi, scan_points + 1)
    y = np.abs(np.broadcast_to(np.asarray(f(x), dtype=float), x.shape))
    g = lambda t: abs(float(np.asarray(f(np.array([t])), dtype=float).reshape(-1)[0]))

    padded = np.concatenate(([-np.inf], y, [-np.inf]))
    peaks = np.flatnonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:]))
    best = peaks[np.argsort(y[peaks])[::-1][:refine]]

    top = float(y.max())
    for i in best:
        left = float(x[max(i - 1, 0)])
        right = float(x[min(i + 1, scan_points)])
        top = max(top, _golden_max(g, left, right))

    return top * (1.0 + MAX_SAFETY)
