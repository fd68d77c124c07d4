import math

import numpy as np
import pytest

from zerofree.anneal import (
    GREEDY,
    JITTER_RANGES,
    ChainState,
    accept_move,
    derive_seed,
    draw_member,
    jitter_schedule,
    metropolis_step,
    polish,
    run_chain,
    run_chains,
)
from zerofree.exceptions import MembershipError, RetryCapError
from zerofree.models import AnnealSchedule
from zerofree.trigpoly import SpectralFactor, autocorrelation, from_product_form, is_member

# three step-size rounds of three temperature levels, 20 trials each
QUICK = AnnealSchedule(M=20, Kz=2, S0_init=1.0, **{"lambda": 1.0}, S_min=0.2, seed=7)


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(42, 0) == derive_seed(42, 0)
    seeds = {derive_seed(42, index) for index in range(50)}
    assert len(seeds) == 50
    assert derive_seed(42, 3, stream=0) != derive_seed(42, 3, stream=1)


def test_draw_member_returns_member():
    rng = np.random.default_rng(1)
    factor, poly, attempts = draw_member(4, 150.0, rng)
    assert attempts >= 1
    assert factor.c[0] == 1.0
    assert is_member(poly.a)


def test_draw_member_impossible_at_degree_one():
    with pytest.raises(RetryCapError):
        draw_member(1, 150.0, np.random.default_rng(0))


def test_draw_member_cap():
    with pytest.raises(RetryCapError) as info:
        draw_member(6, 1e-9, np.random.default_rng(0), max_retries=5)
    assert info.value.attempts == 5


def test_accept_move():
    rng = np.random.default_rng(0)
    assert accept_move(-1.0, 10.0, rng)
    assert accept_move(0.0, GREEDY, rng)
    assert not accept_move(1e-6, GREEDY, rng)
    assert not accept_move(10.0, 1e3, rng)


@pytest.mark.parametrize("Z,delta", [(1.0, 0.5), (20.0, 0.05), (1e3, 1e-3)])
def test_accept_move_frequency(Z, delta):
    rng = np.random.default_rng(2024)
    trials = 10_000
    p = math.exp(-Z * delta)
    hits = sum(accept_move(delta, Z, rng) for _ in range(trials))
    sigma = math.sqrt(trials * p * (1 - p))
    assert abs(hits - trials * p) <= 3 * sigma


def test_constraint_rejection_restores_state():
    state = ChainState.start(SpectralFactor([1.0, 2.0, 1.0]))
    before_a = state.a.copy()
    before_c = state.factor.c.copy()

    accepted = metropolis_step(state, 1, -10.0, 12.0, np.random.default_rng(0))

    assert not accepted
    assert state.constraint_rejections == 1
    np.testing.assert_array_equal(state.a, before_a)
    np.testing.assert_array_equal(state.factor.c, before_c)


def test_chain_state_needs_member():
    with pytest.raises(MembershipError):
        ChainState.start(SpectralFactor([1.0, 0.1]))


def test_run_chain_is_deterministic():
    first = run_chain(4, QUICK)
    second = run_chain(4, QUICK)
    assert first.best_objective == second.best_objective
    np.testing.assert_array_equal(first.best_factor.c, second.best_factor.c)


def test_run_chain_finds_member_with_sane_objective():
    result = run_chain(4, QUICK)
    a = autocorrelation(result.best_factor.c)
    assert is_member(a)
    # no member of any P_n beats this
    assert result.best_objective > 34.46
    assert result.accepted_steps + result.rejected_steps + result.constraint_rejections == 3 * 3 * 20


def test_polish_does_not_worsen_start():
    start = from_product_form(0.91, 0.265)
    initial = ChainState.start(start.copy()).objective
    result = polish(start, QUICK)
    assert result.best_objective <= initial + 1e-9


def test_polish_needs_member():
    with pytest.raises(MembershipError):
        polish(SpectralFactor([1.0, 0.1, 0.1]), QUICK)


def test_jitter_stays_in_ranges():
    rng = np.random.default_rng(3)
    sched = jitter_schedule(QUICK, 8, rng)
    assert JITTER_RANGES["B"][0] <= sched.B <= JITTER_RANGES["B"][1]
    assert JITTER_RANGES["lambda"][0] <= sched.lambda_ <= JITTER_RANGES["lambda"][1]
    assert 250 * 8 <= sched.M <= 350 * 8
    assert sched.Kz in (10, 11)


def test_run_chains_picks_best():
    result = run_chains(4, QUICK, chains=3)
    finished = [chain for chain in result.chains if chain is not None]
    assert len(finished) == 3
    assert result.best.best_objective == min(chain.best_objective for chain in finished)
    assert [chain.seed for chain in finished] == [QUICK.seed, derive_seed(QUICK.seed, 1), derive_seed(QUICK.seed, 2)]
    assert [row["chain"] for row in result.log_rows()] == [0, 1, 2]


def test_single_chain_matches_run_chain():
    single = run_chains(4, QUICK, chains=1).best
    direct = run_chain(4, QUICK)
    assert single.seed == direct.seed == QUICK.seed
    assert single.best_objective == direct.best_objective
    np.testing.assert_array_equal(single.best_factor.c, direct.best_factor.c)
    assert (single.accepted_steps, single.rejected_steps, single.constraint_rejections) == (
        direct.accepted_steps, direct.rejected_steps, direct.constraint_rejections
    )


@pytest.mark.slow
def test_long_schedule_degree_four():
    result = run_chain(4, AnnealSchedule(M=200, seed=11))
    assert 34.46 < result.best_objective < 36.0


@pytest.mark.slow
def test_degree_eight_reaches_record_band():
    result = run_chains(8, AnnealSchedule(seed=1), chains=20, workers=4)
    assert result.best.best_objective <= 34.60
    assert is_member(autocorrelation(result.best.best_factor.c))


@pytest.mark.slow
def test_degree_sixteen_with_jitter_reaches_record_band():
    result = run_chains(16, AnnealSchedule(seed=3), chains=32, parameter_jitter=True, workers=4)
    assert result.best.best_objective <= 34.52
