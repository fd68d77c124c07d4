import math
from decimal import Decimal

import numpy as np
import pytest

from zerofree import iterate
from zerofree.exceptions import (
    ConvergenceError,
    DomainError,
    FitError,
    MembershipError,
    WindowError,
    ZeroFreeError,
)
from zerofree.iterate import (
    RegionCache,
    RoundResult,
    build_cache,
    evaluate_round,
    log_n_exp_plus,
    r0_once,
    r0_plain,
    run_iteration,
    scale_params,
    t0_sweep,
    theorem_constant,
    w1_of,
)
from zerofree.kadiri import KappaDelta, ScaleParams
from zerofree.models import RegionParams
from zerofree.preset_reader import PresetReader
from zerofree.tables import compare_trace
from zerofree.trigpoly import CosinePolynomial

from tests.conftest import PRESETS


def test_eta0_first_and_last_rounds(baseline_params):
    assert scale_params(5.58682, 5.7, baseline_params, 16).eta0 * 1e3 == pytest.approx(7.41347, abs=6e-6)
    assert scale_params(5.57341, 5.5734120, baseline_params, 16).eta0 * 1e3 == pytest.approx(7.43130, abs=6e-6)


def test_scale_params_relation(baseline_params):
    scale = scale_params(5.0, 5.7, baseline_params, 16)
    assert 0.5 < scale.sigma0 < 1.0
    assert scale.w0 == pytest.approx((1 - scale.sigma0) / scale.eta0)


def test_scale_params_needs_ordered_radii(baseline_params):
    with pytest.raises(DomainError):
        scale_params(5.7, 5.0, baseline_params, 16)


def test_w1_at_eta0_is_w0(baseline_params):
    r, R = 5.2, 5.6
    scale = scale_params(r, R, baseline_params, 16)
    assert w1_of(scale.eta0, r, R, 16, baseline_params.t0) == pytest.approx(scale.w0, rel=1e-12)


def test_w1_grows_as_eta1_shrinks(baseline_params):
    r, R = 5.2, 5.6
    eta0 = scale_params(r, R, baseline_params, 16).eta0
    values = [w1_of(eta0 * f, r, R, 16, baseline_params.t0) for f in (1.0, 0.5, 0.1, 1e-3, 1e-6)]
    assert values == sorted(values)
    assert values[-1] == pytest.approx(r / R, rel=1e-3)


def test_log_n_exp_plus_is_continuous_across_switch():
    below = log_n_exp_plus(700.0, 16, 1e5)
    above = log_n_exp_plus(700.0 + 1e-9, 16, 1e5)
    assert above == pytest.approx(below, abs=1e-8)
    assert log_n_exp_plus(5000.0, 16, 1e5) == pytest.approx(5000.0 + math.log(16.0))


def test_theorem_constant_rounds_up():
    assert theorem_constant(5.5734118005) == Decimal("5.573412")
    assert theorem_constant(5.573412) == Decimal("5.573412")
    assert theorem_constant(5.5734120001) == Decimal("5.573413")


def test_build_cache_requires_member(baseline_params, fallback_provider, baseline_table):
    with pytest.raises(MembershipError):
        build_cache(CosinePolynomial([1.0, 0.9, 0.2]), baseline_params, fallback_provider, table=baseline_table)


def test_cache_holds_every_c30(baseline_cache):
    assert len(baseline_cache.c30_values) == 17
    assert baseline_cache.c30_values[0] == pytest.approx(0.00027)
    assert baseline_cache.degree == 16


def _fake_round(r: float, R: float, R0: float) -> RoundResult:
    return RoundResult(
        R0=R0,
        r=r,
        R=R,
        scale=ScaleParams(eta0=1e-2, sigma0=0.98, w0=2.0),
        kd=KappaDelta(delta=0.62, kappa=0.44),
        eta1=1e-3,
        K0=1.0,
        denominator=1.0,
        balanced=True,
    )


def _fake_cache(params: RegionParams) -> RegionCache:
    poly = CosinePolynomial([1.0, 1.7, 0.8])
    return RegionCache(poly=poly, params=params, table=None, c30_values=(0.0, 0.0, 0.0), degree=2)


def test_outer_rounds_stop_after_first_small_improvement(monkeypatch):
    improvements = iter([0.1, 0.01, 1e-3, 4e-7, 1e-8, 1e-9])
    monkeypatch.setattr(iterate, "_inner_loop", lambda R, cache: _fake_round(5.0, R, R - next(improvements)))
    params = RegionParams(v=5e-7)

    outcome = run_iteration(None, params, cache=_fake_cache(params))

    assert outcome.stopped_after == 4
    assert len(outcome.trace) == 4
    assert outcome.R0 == pytest.approx(5.7 - 0.1 - 0.01 - 1e-3 - 4e-7)
    R0, trace = outcome
    assert trace[1].R == pytest.approx(5.6)


def test_extra_rounds_extend_trace(monkeypatch):
    improvements = iter([0.1, 1e-8, 1e-9, 1e-10])
    monkeypatch.setattr(iterate, "_inner_loop", lambda R, cache: _fake_round(5.0, R, R - next(improvements)))
    params = RegionParams()

    outcome = run_iteration(None, params, extra_rounds=1, cache=_fake_cache(params))

    assert outcome.stopped_after == 2
    assert len(outcome.trace) == 3


def test_outer_round_cap(monkeypatch):
    monkeypatch.setattr(iterate, "_inner_loop", lambda R, cache: _fake_round(5.0, R, R - 0.01))
    params = RegionParams(max_outer_rounds=3)

    with pytest.raises(ConvergenceError) as info:
        run_iteration(None, params, cache=_fake_cache(params))
    assert len(info.value.trace) == 3


def test_inner_loop_averages_r(monkeypatch):
    seen = []

    def fake(r, R, cache):
        seen.append(r)
        return _fake_round(r, R, 5.5)

    monkeypatch.setattr(iterate, "evaluate_round", fake)
    params = RegionParams(r_init=5.0, R_init=5.7, Delta=1e-6)
    result = iterate._inner_loop(5.7, _fake_cache(params))

    assert seen[:3] == [5.0, 5.25, 5.375]
    assert abs(result.R0 - result.r) < 1e-6


def test_inner_loop_cap(monkeypatch):
    monkeypatch.setattr(iterate, "evaluate_round", lambda r, R, cache: _fake_round(r, R, r + 1.0))
    params = RegionParams(max_inner_steps=5)
    with pytest.raises(ConvergenceError):
        iterate._inner_loop(10.0, _fake_cache(params))


@pytest.mark.parametrize("R0", [5.8, 5.7, 4.9])
def test_inner_loop_rejects_step_outside_window(monkeypatch, R0):
    monkeypatch.setattr(iterate, "evaluate_round", lambda r, R, cache: _fake_round(r, R, R0))
    params = RegionParams(r_init=5.0, R_init=5.7)

    with pytest.raises(WindowError) as info:
        iterate._inner_loop(5.7, _fake_cache(params))

    assert (info.value.step, info.value.r, info.value.R0, info.value.R) == (1, 5.0, R0, 5.7)


def test_run_iteration_needs_inputs():
    with pytest.raises(ZeroFreeError):
        run_iteration(CosinePolynomial([1.0, 1.7, 0.8]), RegionParams())


def _sweep_stub(monkeypatch, failing=()):
    def fake_point(task):
        _, params, _, _ = task
        if params.T0 in failing:
            return {"T0": params.T0, "R0": float("nan"), "rounds": 0, "status": "failed", "error": "boom"}
        return {"T0": params.T0, "R0": 5.0 + 2.0 / math.log(params.T0), "rounds": 3, "status": "success", "error": ""}

    monkeypatch.setattr(iterate, "_sweep_point", fake_point)
    monkeypatch.setattr(iterate, "theta_table", lambda theta: None)


def test_sweep_recovers_line(monkeypatch):
    _sweep_stub(monkeypatch)
    result = t0_sweep(None, [1e10, 1e20, 1e50, 1e100], RegionParams(), provider=None)
    assert not result.degenerate
    assert result.A_fit == pytest.approx(5.0, abs=1e-9)
    assert result.B_fit == pytest.approx(2.0, abs=1e-7)
    assert all(abs(point["residual"]) < 1e-9 for point in result.points)


def test_sweep_rejects_small_T0(monkeypatch):
    _sweep_stub(monkeypatch)
    result = t0_sweep(None, [1e3, 1e10, 1e20], RegionParams(), provider=None)
    statuses = {point["T0"]: point["status"] for point in result.points}
    assert statuses[1e3] == "rejected"
    assert [point["T0"] for point in result.points] == [1e3, 1e10, 1e20]


def test_sweep_single_point_is_degenerate(monkeypatch):
    _sweep_stub(monkeypatch, failing={1e20})
    result = t0_sweep(None, [1e10, 1e20], RegionParams(), provider=None)
    assert result.degenerate
    assert result.A_fit is None


def test_sweep_without_points(monkeypatch):
    _sweep_stub(monkeypatch, failing={1e10})
    with pytest.raises(FitError):
        t0_sweep(None, [1e10], RegionParams(), provider=None)
    with pytest.raises(FitError):
        t0_sweep(None, [], RegionParams(), provider=None)


@pytest.mark.slow
def test_converged_round_balances_eta1(baseline_cache):
    result = evaluate_round(5.57341, 5.5734120, baseline_cache)
    assert result.balanced
    assert result.eta1 * 1e3 == pytest.approx(0.878386, abs=2e-6)
    assert result.R0 == pytest.approx(5.5734118, abs=1e-6)
    assert result.denominator <= result.K0


@pytest.mark.slow
def test_first_round_eta1(baseline_cache):
    result = evaluate_round(5.58682, 5.7, baseline_cache)
    assert result.eta1 * 1e3 == pytest.approx(0.861315, abs=2e-6)


@pytest.mark.slow
def test_eta1_saving_improves_plain_bound(baseline_cache, f16, baseline_params):
    improved = r0_once(f16.poly, 5.57341, 5.5734120, baseline_params, baseline_cache)
    assert improved < r0_plain(5.57341, 5.5734120, baseline_cache)


@pytest.mark.slow
def test_baseline_trace(f16, baseline_params, baseline_cache):
    golden = PresetReader.read(PRESETS).golden.trace
    outcome = run_iteration(f16.poly, baseline_params, extra_rounds=1, cache=baseline_cache)

    check = compare_trace(outcome.trace, golden)
    assert check.summary() == "Iteration trace: 7/7 rows match", [m.describe() for m in check.mismatches]
    assert outcome.stopped_after == 7
    assert outcome.trace[6].R0 == pytest.approx(5.5734118, abs=1e-6)
    assert outcome.trace[7].R0 == pytest.approx(5.57341178, abs=2e-7)
    assert str(theorem_constant(outcome.trace[6].R0)) == "5.573412"
    assert all(row.R0 < row.R for row in outcome.trace)
    values = [row.R0 for row in outcome.trace]
    assert values == sorted(values, reverse=True)


@pytest.mark.slow
def test_larger_verification_height(f16, fallback_provider):
    params = RegionParams(T0=3e11, t0=1e5, theta=1.85567)
    outcome = run_iteration(f16.poly, params, fallback_provider)
    assert outcome.R0 == pytest.approx(5.5666305, abs=1e-6)


@pytest.mark.slow
def test_sweep_fit_constants(f16, fallback_provider):
    params = RegionParams(T0=3.06e10, t0=1e5, theta=1.8552)
    grid = np.logspace(np.log10(3.06e10), 300, 20).tolist()
    result = t0_sweep(f16.poly, grid, params, fallback_provider)

    assert not result.degenerate
    assert result.A_fit == pytest.approx(5.4912, abs=0.01)
    assert result.B_fit == pytest.approx(2.0185, abs=0.05)
    first = result.points[0]
    assert abs(first["residual"]) < 0.01
