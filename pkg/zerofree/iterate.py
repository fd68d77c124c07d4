"""The two-level R0 iteration with the eta1 saving, and the T0 sweep.

Inner loop: at fixed R, evaluate R0 at r and move r to (r + R0)/2 until the
two agree to Delta. Each converged inner loop is one outer round: R takes the
new R0 and r is reset. Rounds stop once R0 improves by no more than v.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, Decimal
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import curve_fit

from observability.metrics import collectors

from .exceptions import ConvergenceError, DomainError, FitError, WindowError, ZeroFreeError
from .kadiri import (
    ErrorContext,
    ErrorTerm,
    KappaDelta,
    ScaleParams,
    ThetaTable,
    k_integral,
    kappa_delta,
    theta_table,
)
from .models import IterationRow, RegionParams
from .trigpoly import CosinePolynomial, require_member
from .zetazeros import ZeroSumProvider, c30

logger = logging.getLogger(__name__)

# Beyond this exponent exp(x) leaves binary64
EXP_LIMIT = 700.0
ETA1_LOWER_FRACTION = 1e-6
ETA1_BRACKET_WIDTH = 1e-10
THEOREM_DECIMALS = 6


def scale_params(r: float, R: float, params: RegionParams, n: int) -> ScaleParams:
    """eta0 = 1/(r log T0), sigma0 = 1 - 1/(R log(n T0 + t0)), w0 = (1 - sigma0)/eta0."""
    if not 0 < r < R:
        raise DomainError(f"need 0 < r < R, got r={r}, R={R}")
    log_T0 = math.log(params.T0)
    eta0 = 1.0 / (r * log_T0)
    sigma0 = 1.0 - 1.0 / (R * (log_T0 + math.log(n + params.t0 / params.T0)))
    return ScaleParams(eta0=eta0, sigma0=sigma0, w0=(1.0 - sigma0) / eta0)


def log_n_exp_plus(x: float, n: int, t0: float) -> float:
    """log(n e^x + t0)."""
    if x > EXP_LIMIT:
        return x + math.log(n + t0 * math.exp(-x))
    return math.log(n * math.exp(x) + t0)


def w1_of(eta1: float, r: float, R: float, n: int, t0: float) -> float:
    """Lower bound for w once eta <= eta1."""
    if eta1 <= 0:
        raise DomainError(f"eta1 must be positive, got {eta1}")
    x = 1.0 / (r * eta1)
    return (1.0 / (R * eta1)) / log_n_exp_plus(x, n, t0)


@dataclass(frozen=True)
class RegionCache:
    """Per-(theta, T0, t0, f) quantities shared by every round."""
    poly: CosinePolynomial
    params: RegionParams
    table: ThetaTable
    c30_values: tuple
    degree: int


def build_cache(
    poly: CosinePolynomial,
    params: RegionParams,
    provider: ZeroSumProvider,
    table: Optional[ThetaTable] = None,
) -> RegionCache:
    require_member(poly)
    degree = params.n if params.n is not None else poly.n
    if degree != poly.n:
        logger.warning(f"Using n={degree} in sigma0 for a degree-{poly.n} polynomial")

    table = table or theta_table(params.theta)
    values = tuple(c30(k, params.T0, params.t0, provider) for k in range(poly.n + 1))
    logger.info(f"c30(k T0, t0) for k=0..{poly.n}: {', '.join(f'{x:.6g}' for x in values)}")
    return RegionCache(poly=poly, params=params, table=table, c30_values=values, degree=degree)


@dataclass(frozen=True)
class Eta1Context:
    scale: ScaleParams
    r: float
    R: float
    n: int
    t0: float
    table: ThetaTable
    a0: float
    a1: float
    K0: float
    error_term: ErrorTerm
    eps: float


@dataclass(frozen=True)
class Eta1Result:
    eta1: float
    denominator: float
    balanced: bool
    gap: float


def _sides(eta1: float, ctx: Eta1Context) -> tuple[float, float]:
    w1 = w1_of(eta1, ctx.r, ctx.R, ctx.n, ctx.t0)
    return k_integral(w1, ctx.table, ctx.a0, ctx.a1), ctx.K0 - ctx.error_term(eta1)


def eta1_search(ctx: Eta1Context) -> Eta1Result:
    """Bisect on (eta0 1e-6, eta0] for K(w1) = K(w0) - C(eta1).

    The returned denominator min{K(w1), K(w0) - C(eta1)} is valid for the
    returned eta1 whether or not the balance tolerance was met.
    """
    eta0 = ctx.scale.eta0
    hi = eta0
    hi_sides = _sides(hi, ctx)
    hi_gap = hi_sides[0] - hi_sides[1]
    if abs(hi_gap) <= ctx.eps:
        return Eta1Result(eta1=hi, denominator=min(hi_sides), balanced=True, gap=hi_gap)

    lo = eta0 * ETA1_LOWER_FRACTION
    lo_sides = _sides(lo, ctx)
    lo_gap = lo_sides[0] - lo_sides[1]

    if lo_gap * hi_gap > 0:
        eta1, sides = max(((lo, lo_sides), (hi, hi_sides)), key=lambda item: min(item[1]))
        logger.warning(
            f"No balance point for eta1 in ({lo:.3e}, {hi:.3e}]: gaps {lo_gap:.3e}, {hi_gap:.3e}; "
            f"using eta1={eta1:.6e}"
        )
        return Eta1Result(eta1=eta1, denominator=min(sides), balanced=False, gap=sides[0] - sides[1])

    steps = 0
    while hi - lo > ETA1_BRACKET_WIDTH * eta0:
        mid = 0.5 * (lo + hi)
        mid_sides = _sides(mid, ctx)
        mid_gap = mid_sides[0] - mid_sides[1]
        steps += 1
        if mid_gap == 0.0:
            lo, lo_sides, lo_gap = mid, mid_sides, mid_gap
            break
        if (mid_gap > 0) == (lo_gap > 0):
            lo, lo_sides, lo_gap = mid, mid_sides, mid_gap
        else:
            hi, hi_sides, hi_gap = mid, mid_sides, mid_gap

    eta1, sides = max(((lo, lo_sides), (hi, hi_sides)), key=lambda item: min(item[1]))
    gap = sides[0] - sides[1]
    balanced = abs(gap) <= ctx.eps
    logger.debug(f"eta1 bisection: {steps} steps, eta1={eta1:.9e}, gap={gap:.3e}")
    if not balanced:
        logger.warning(f"eta1={eta1:.6e} leaves K(w1) and K(w0) - C(eta1) {abs(gap):.3e} apart")
    return Eta1Result(eta1=eta1, denominator=min(sides), balanced=balanced, gap=gap)


@dataclass(frozen=True)
class RoundResult:
    """One evaluation of the improved bound at (r, R)."""
    R0: float
    r: float
    R: float
    scale: ScaleParams
    kd: KappaDelta
    eta1: float
    K0: float
    denominator: float
    balanced: bool

    def row(self) -> IterationRow:
        return IterationRow(
            R=self.R,
            r=self.r,
            eta0=self.scale.eta0,
            eta1=self.eta1,
            kappa=self.kd.kappa,
            delta=self.kd.delta,
            R0=self.R0,
        )


def _prefactor(poly: CosinePolynomial, table: ThetaTable, kd: KappaDelta) -> float:
    return poly.A / 2 * table.g1 * (1 - kd.kappa)


def evaluate_round(r: float, R: float, cache: RegionCache) -> RoundResult:
    params, poly, table = cache.params, cache.poly, cache.table
    scale = scale_params(r, R, params, cache.degree)
    kd = kappa_delta(scale.sigma0, scale.eta0, table)

    context = ErrorContext(
        poly=poly,
        table=table,
        scale=scale,
        kd=kd,
        T0=params.T0,
        t0=params.t0,
        r=r,
        R=R,
        c30_values=cache.c30_values,
        epsilon=params.epsilon,
    )
    term = ErrorTerm.from_context(context)
    K0 = k_integral(scale.w0, table, poly.a0, poly.a1)

    search = eta1_search(Eta1Context(
        scale=scale,
        r=r,
        R=R,
        n=cache.degree,
        t0=params.t0,
        table=table,
        a0=poly.a0,
        a1=poly.a1,
        K0=K0,
        error_term=term,
        eps=params.eps_eta1,
    ))
    if search.denominator <= 0:
        raise DomainError(f"Bound denominator {search.denominator} is not positive at r={r}, R={R}")

    R0 = _prefactor(poly, table, kd) / search.denominator
    return RoundResult(
        R0=R0,
        r=r,
        R=R,
        scale=scale,
        kd=kd,
        eta1=search.eta1,
        K0=K0,
        denominator=search.denominator,
        balanced=search.balanced,
    )


def r0_once(f: CosinePolynomial, r: float, R: float, params: RegionParams, cache: RegionCache) -> float:
    """The improved bound at one (r, R)."""
    if cache.poly is not f and not np.array_equal(cache.poly.a, f.a):
        raise ZeroFreeError("Cache was built for a different polynomial")
    if cache.params != params:
        cache = RegionCache(
            poly=cache.poly,
            params=params,
            table=cache.table,
            c30_values=cache.c30_values,
            degree=cache.degree,
        )
    return evaluate_round(r, R, cache).R0


def r0_plain(r: float, R: float, cache: RegionCache) -> float:
    """A g1 (1 - kappa) / (2 K(w0)), the bound without the eta1 saving."""
    scale = scale_params(r, R, cache.params, cache.degree)
    kd = kappa_delta(scale.sigma0, scale.eta0, cache.table)
    K0 = k_integral(scale.w0, cache.table, cache.poly.a0, cache.poly.a1)
    return _prefactor(cache.poly, cache.table, kd) / K0


@dataclass
class IterationOutcome:
    R0: float
    trace: List[IterationRow] = field(default_factory=list)
    stopped_after: int = 0

    def __iter__(self):
        return iter((self.R0, self.trace))


def _inner_loop(R: float, cache: RegionCache) -> RoundResult:
    params = cache.params
    r = params.r_init
    for step in range(1, params.max_inner_steps + 1):
        result = evaluate_round(r, R, cache)
        logger.debug(f"R={R:.9f} step {step}: r={r:.9f} -> R0={result.R0:.10f}")
        if not r < result.R0 < R:
            raise WindowError(r, result.R0, R, step)
        if abs(result.R0 - r) < params.Delta:
            return result
        r = 0.5 * (r + result.R0)
    raise ConvergenceError(f"Inner loop at R={R} did not settle within {params.max_inner_steps} steps")


def run_iteration(
    f: CosinePolynomial,
    params: RegionParams,
    provider: Optional[ZeroSumProvider] = None,
    extra_rounds: int = 0,
    cache: Optional[RegionCache] = None,
) -> IterationOutcome:
    """Run outer rounds until R0 improves by no more than v, then ``extra_rounds`` more."""
    if cache is None:
        if provider is None:
            raise ZeroFreeError("run_iteration needs a zero-sum provider or a prepared cache")
        cache = build_cache(f, params, provider)

    trace: List[IterationRow] = []
    R = params.R_init
    stopped_after = 0
    remaining = None

    for round_no in range(1, params.max_outer_rounds + 1):
        started = time.time()
        result = _inner_loop(R, cache)
        row = result.row()
        trace.append(row)

        collectors.r0_rounds_total.inc()
        collectors.r0_value.set(row.R0)
        collectors.r0_round_duration_seconds.observe(time.time() - started)
        logger.info(
            f"Round {round_no}: R={row.R:.7f} r={row.r:.5f} eta0={row.eta0 * 1e3:.5f}e-3 "
            f"eta1={row.eta1 * 1e3:.6f}e-3 kappa={row.kappa:.6f} delta={row.delta:.6f} R0={row.R0:.10f}"
        )

        improvement = R - row.R0
        R = row.R0

        if remaining is None:
            if improvement <= params.v:
                stopped_after = round_no
                remaining = extra_rounds
        if remaining is not None:
            if remaining == 0:
                return IterationOutcome(R0=row.R0, trace=trace, stopped_after=stopped_after)
            remaining -= 1

    raise ConvergenceError(
        f"R0 still improving after {params.max_outer_rounds} outer rounds",
        trace=trace,
    )


def theorem_constant(R0: float, decimals: int = THEOREM_DECIMALS) -> Decimal:
    """R0 rounded up at the given number of decimals."""
    return Decimal(repr(R0)).quantize(Decimal(1).scaleb(-decimals), rounding=ROUND_CEILING)


@dataclass
class SweepResult:
    points: List[Dict[str, Any]]
    A_fit: Optional[float] = None
    B_fit: Optional[float] = None

    @property
    def degenerate(self) -> bool:
        return self.B_fit is None


def _sweep_point(task: tuple) -> Dict[str, Any]:
    f, params, provider, table = task
    try:
        cache = build_cache(f, params, provider, table=table)
        outcome = run_iteration(f, params, cache=cache)
        return {"T0": params.T0, "R0": outcome.R0, "rounds": len(outcome.trace), "status": "success", "error": ""}
    except ZeroFreeError as e:
        return {"T0": params.T0, "R0": float("nan"), "rounds": 0, "status": "failed", "error": str(e)}


def _fit_line(x, A, B):
    return A + B * x


def t0_sweep(
    f: CosinePolynomial,
    T0_list: Sequence[float],
    params: RegionParams,
    provider: ZeroSumProvider,
    workers: int = 1,
) -> SweepResult:
    """R0 at each T0, then a least-squares fit of R0 = A + B / log T0."""
    if not T0_list:
        raise FitError("T0 grid is empty")

    tasks = []
    points: List[Dict[str, Any]] = []
    table = theta_table(params.theta)
    for T0 in T0_list:
        if T0 <= params.t0:
            logger.warning(f"Rejected T0={T0:g}: must exceed t0={params.t0:g}")
            points.append({"T0": T0, "R0": float("nan"), "rounds": 0, "status": "rejected", "error": "T0 <= t0"})
            continue
        tasks.append((f, params.model_copy(update={"T0": float(T0)}), provider, table))

    logger.info(f"Sweeping {len(tasks)} T0 value(s) on {workers} worker(s)")
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(task) for task in tasks]

    for point in results:
        if point["status"] == "success":
            logger.info(f"T0={point['T0']:.6g}: R0={point['R0']:.10f}")
        else:
            logger.warning(f"T0={point['T0']:.6g} failed: {point['error']}")
    points.extend(results)
    points.sort(key=lambda point: point["T0"])

    good = [point for point in points if point["status"] == "success"]
    if not good:
        raise FitError("No T0 value produced an R0; nothing to fit")
    if len(good) < 2:
        logger.warning("Sweep fit is degenerate with a single point; B is undefined")
        return SweepResult(points=points)

    x = np.array([1.0 / math.log(point["T0"]) for point in good])
    y = np.array([point["R0"] for point in good])
    (A_fit, B_fit), _ = curve_fit(_fit_line, x, y)

    for point in points:
        if point["status"] == "success":
            point["fit"] = float(_fit_line(1.0 / math.log(point["T0"]), A_fit, B_fit))
            point["residual"] = point["R0"] - point["fit"]

    logger.info(f"Sweep fit: R0 ~ {A_fit:.6f} + {B_fit:.6f}/log T0 over {len(good)} points")
    return SweepResult(points=points, A_fit=float(A_fit), B_fit=float(B_fit))
