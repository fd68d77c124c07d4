"""Simulated annealing over spectral factors, minimizing Landau's quotient.

For each maximum step size S the chain runs M trials at each of Kz inverse
temperatures Z0, Z0 + dZ, ..., then M trials of greedy descent, after which
S is divided by 1 + lambda. The sweep over Z restarts at Z0 for every S.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from observability.metrics import collectors

from .exceptions import MembershipError, RetryCapError, ZeroFreeError
from .models import AnnealSchedule
from .trigpoly import (
    CosinePolynomial,
    SpectralFactor,
    apply_step,
    autocorrelation,
    cosine_from_factor,
    is_member,
    landau_objective,
    objective_from,
)

logger = logging.getLogger(__name__)

RESYNC_INTERVAL = 100_000
DEFAULT_RETRY_CAP = 10**6
GREEDY = math.inf

# Intervals from which jittered chains draw their schedules
JITTER_RANGES = {
    "B": (100.0, 200.0),
    "Z0": (8.0, 16.0),
    "dZ": (0.5, 2.0),
    "S0_init": (2.5, 4.0),
    "lambda": (0.015, 0.05),
}


def derive_seed(master_seed: int, index: int, stream: int = 0) -> int:
    """Seed of chain ``index``: the first 64-bit word of
    SeedSequence(master_seed, spawn_key=(index, stream)).

    Stream 0 drives the chain itself, stream 1 its parameter jitter.
    """
    sequence = np.random.SeedSequence(master_seed, spawn_key=(index, stream))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def chain_seed(master_seed: int, index: int) -> int:
    """Chain 0 runs on the master seed, so a single chain matches run_chain."""
    return master_seed if index == 0 else derive_seed(master_seed, index)


@dataclass
class ChainState:
    """Mutable state of one annealing chain."""
    factor: SpectralFactor
    a: np.ndarray
    objective: float
    best_c: np.ndarray
    best_objective: float
    accepted: int = 0
    rejected: int = 0
    constraint_rejections: int = 0
    steps_since_resync: int = 0

    @classmethod
    def start(cls, factor: SpectralFactor) -> "ChainState":
        a = autocorrelation(factor.c)
        if not is_member(a):
            raise MembershipError("Annealing must start from a member of P_n")
        g = objective_from(a[0], a[1], float(a[1:].sum()))
        return cls(factor=factor, a=a, objective=g, best_c=factor.c.copy(), best_objective=g)

    def resync(self) -> None:
        """Recompute a from c to discard accumulated rounding."""
        fresh = autocorrelation(self.factor.c)
        if is_member(fresh):
            self.a[:] = fresh
            self.objective = objective_from(fresh[0], fresh[1], float(fresh[1:].sum()))
        else:
            logger.debug("Skipped resync: recomputed coefficients leave P_n by rounding")
        self.steps_since_resync = 0


@dataclass
class ChainResult:
    best_factor: SpectralFactor
    best_objective: float
    accepted_steps: int
    rejected_steps: int
    constraint_rejections: int
    seed: int
    schedule: AnnealSchedule
    elapsed_seconds: float = 0.0

    def log_row(self, index: int) -> Dict[str, Any]:
        return {
            "chain": index,
            "seed": self.seed,
            "B": self.schedule.B,
            "Z0": self.schedule.Z0,
            "dZ": self.schedule.dZ,
            "Kz": self.schedule.Kz,
            "M": self.schedule.trials(self.best_factor.n),
            "S0_init": self.schedule.S0_init,
            "lambda": self.schedule.lambda_,
            "S_min": self.schedule.S_min,
            "best_objective": self.best_objective,
            "accepted": self.accepted_steps,
            "rejected": self.rejected_steps,
            "constraint_rejections": self.constraint_rejections,
        }


def draw_member(
    n: int,
    B: float,
    rng: np.random.Generator,
    max_retries: int = DEFAULT_RETRY_CAP,
) -> tuple[SpectralFactor, CosinePolynomial, int]:
    """Draw c_1..c_n uniformly from [0, B] until the polynomial lies in P_n.

    Returns the factor, its polynomial and the number of draws used.
    """
    if n < 2:
        # 2c <= 1 + c^2 forces a_1 <= a_0 at degree 1
        raise RetryCapError(n, B, 0)

    c = np.empty(n + 1)
    c[0] = 1.0
    for attempt in range(1, max_retries + 1):
        c[1:] = rng.uniform(0.0, B, n)
        a = autocorrelation(c)
        if is_member(a):
            return SpectralFactor(c.copy()), CosinePolynomial(a), attempt

    raise RetryCapError(n, B, max_retries)


def random_member(
    n: int,
    B: float,
    rng: np.random.Generator,
    max_retries: int = DEFAULT_RETRY_CAP,
) -> tuple[SpectralFactor, CosinePolynomial]:
    factor, poly, attempts = draw_member(n, B, rng, max_retries)
    logger.debug(f"Random member of P_{n} after {attempts} draws")
    return factor, poly


def accept_move(delta: float, Z: float, rng: np.random.Generator) -> bool:
    """Metropolis rule: keep improvements, keep a worsening delta with
    probability exp(-Z * delta); Z = inf is greedy descent."""
    if delta <= 0.0:
        return True
    if Z == GREEDY:
        return False
    return rng.random() < math.exp(-Z * delta)


def metropolis_step(state: ChainState, k: int, s: float, Z: float, rng: np.random.Generator) -> bool:
    """Propose c_k += s; revert on membership failure or Metropolis rejection."""
    saved_a = state.a.copy()
    saved_ck = state.factor.c[k]

    apply_step(state.factor, state.a, k, s)
    state.steps_since_resync += 1

    a = state.a
    if not is_member(a):
        state.a[:] = saved_a
        state.factor.c[k] = saved_ck
        state.constraint_rejections += 1
        return False

    g = objective_from(a[0], a[1], float(a[1:].sum()))
    if accept_move(g - state.objective, Z, rng):
        state.objective = g
        state.accepted += 1
        if g < state.best_objective:
            state.best_objective = g
            state.best_c[:] = state.factor.c
        if state.steps_since_resync >= RESYNC_INTERVAL:
            state.resync()
        return True

    state.a[:] = saved_a
    state.factor.c[k] = saved_ck
    state.rejected += 1
    return False


def _anneal(factor: SpectralFactor, sched: AnnealSchedule, rng: np.random.Generator) -> ChainResult:
    started = time.time()
    n = factor.n
    trials = sched.trials(n)
    state = ChainState.start(factor)

    if sched.S_min >= sched.S0_init:
        logger.warning(f"S_min={sched.S_min} >= S0_init={sched.S0_init}: no step-size rounds will run")

    S = sched.S0_init
    rounds = 0
    while S > sched.S_min:
        temperatures = [sched.Z0 + j * sched.dZ for j in range(sched.Kz)] + [GREEDY]
        for Z in temperatures:
            ks = rng.integers(1, n + 1, size=trials)
            steps = rng.uniform(-S, S, size=trials)
            for k, s in zip(ks.tolist(), steps.tolist()):
                metropolis_step(state, k, s, Z, rng)
        S /= 1.0 + sched.lambda_
        rounds += 1

    best_factor = SpectralFactor(state.best_c.copy())
    best_objective = landau_objective(cosine_from_factor(best_factor))
    logger.debug(f"Chain finished {rounds} step-size rounds, best G={best_objective:.12f}")

    return ChainResult(
        best_factor=best_factor,
        best_objective=best_objective,
        accepted_steps=state.accepted,
        rejected_steps=state.rejected,
        constraint_rejections=state.constraint_rejections,
        seed=sched.seed,
        schedule=sched,
        elapsed_seconds=time.time() - started,
    )


def run_chain(n: int, sched: AnnealSchedule) -> ChainResult:
    """One chain from a random member of P_n."""
    rng = np.random.default_rng(sched.seed)
    factor, _ = random_member(n, sched.B, rng)
    return _anneal(factor, sched, rng)


def polish(factor: SpectralFactor, sched: AnnealSchedule) -> ChainResult:
    """One chain started from a given member instead of a random draw."""
    if not is_member(autocorrelation(factor.c)):
        raise MembershipError("polish needs a starting factor whose polynomial lies in P_n")
    rng = np.random.default_rng(sched.seed)
    return _anneal(factor.copy(), sched, rng)


def jitter_schedule(template: AnnealSchedule, n: int, rng: np.random.Generator) -> AnnealSchedule:
    """Draw B, Z0, dZ, M, Kz, S0_init and lambda from their search intervals."""
    values = {name: float(rng.uniform(lo, hi)) for name, (lo, hi) in JITTER_RANGES.items()}
    values["M"] = int(rng.integers(250 * n, 350 * n + 1))
    values["Kz"] = int(rng.integers(10, 12))
    return template.model_copy(update={
        "B": values["B"],
        "Z0": values["Z0"],
        "dZ": values["dZ"],
        "S0_init": values["S0_init"],
        "lambda_": values["lambda"],
        "M": values["M"],
        "Kz": values["Kz"],
    })


@dataclass
class MultiChainResult:
    best: ChainResult
    chains: List[Optional[ChainResult]]
    failures: List[Dict[str, Any]] = field(default_factory=list)

    def log_rows(self) -> List[Dict[str, Any]]:
        rows = []
        for index, result in enumerate(self.chains):
            if result is not None:
                rows.append({**result.log_row(index), "status": "success", "error": ""})
        for failure in self.failures:
            rows.append({**failure, "status": "failed"})
        return sorted(rows, key=lambda row: row["chain"])


def _chain_task(task: tuple) -> tuple[str, Any]:
    n, sched, start_c = task
    try:
        if start_c is None:
            return "ok", run_chain(n, sched)
        return "ok", polish(SpectralFactor(start_c), sched)
    except ZeroFreeError as e:
        return "error", str(e)


def run_chains(
    n: int,
    sched_template: AnnealSchedule,
    chains: int,
    parameter_jitter: bool = False,
    workers: int = 1,
    start: Optional[SpectralFactor] = None,
) -> MultiChainResult:
    """Independent chains; chain 0 keeps the template's seed and the rest derive from it.

    Per-chain failures are logged and collected; the result is the chain
    with the smallest objective.
    """
    if chains < 1:
        raise ZeroFreeError(f"Need at least one chain, got {chains}")

    master = sched_template.seed
    tasks = []
    for index in range(chains):
        sched = sched_template
        if parameter_jitter:
            jitter_rng = np.random.default_rng(derive_seed(master, index, stream=1))
            sched = jitter_schedule(sched_template, n, jitter_rng)
        sched = sched.model_copy(update={"seed": chain_seed(master, index)})
        tasks.append((n, sched, None if start is None else start.c.copy()))

    logger.info(f"Running {chains} chain(s) at degree {n} on {workers} worker(s)")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_chain_task, tasks))
    else:
        outcomes = [_chain_task(task) for task in tasks]

    results: List[Optional[ChainResult]] = []
    failures = []
    for index, ((status, payload), task) in enumerate(zip(outcomes, tasks)):
        if status == "ok":
            results.append(payload)
            logger.info(f"Chain {index} (seed {payload.seed}) best G={payload.best_objective:.12f}")
            collectors.anneal_steps_total.labels(outcome="accepted").inc(payload.accepted_steps)
            collectors.anneal_steps_total.labels(outcome="rejected").inc(payload.rejected_steps)
            collectors.anneal_steps_total.labels(outcome="constraint").inc(payload.constraint_rejections)
            collectors.anneal_chains_total.labels(status="success").inc()
        else:
            results.append(None)
            failures.append({"chain": index, "seed": task[1].seed, "error": payload})
            logger.warning(f"Chain {index} (seed {task[1].seed}) failed: {payload}")
            collectors.anneal_chains_total.labels(status="failed").inc()

    finished = [result for result in results if result is not None]
    if not finished:
        raise ZeroFreeError(f"All {chains} chains failed")

    best = min(finished, key=lambda result: result.best_objective)
    collectors.anneal_best_objective.labels(degree=str(n)).set(best.best_objective)
    return MultiChainResult(best=best, chains=results, failures=failures)
