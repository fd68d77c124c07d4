"""Reproduce the published tables and diff them against golden values."""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional

from .iterate import IterationOutcome, run_iteration
from .models import IterationRow, PresetsConfig, TraceGolden
from .preset_reader import PresetReader, resolve_path
from .source_loader import PolynomialLoader
from .trigpoly import landau_objective
from .zetazeros import ZeroSumProvider, load_zeros

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("R", "r", "eta0_e3", "eta1_e3", "kappa", "delta", "R0")
FINAL_R0_TOL = 1e-6
NEXT_ROUND_TOL = 2e-7


@dataclass
class Mismatch:
    item: str
    column: str
    expected: float
    actual: float
    tolerance: float

    def describe(self) -> str:
        return (
            f"{self.item} {self.column}: expected {self.expected!r}, got {self.actual!r} "
            f"(|diff|={abs(self.actual - self.expected):.3e} > {self.tolerance:.3e})"
        )


@dataclass
class TableCheck:
    name: str
    checked: int = 0
    matched: int = 0
    mismatches: List[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.checked == self.matched and not self.mismatches

    def summary(self) -> str:
        return f"{self.name}: {self.matched}/{self.checked} rows match"


def _within(expected: float, actual: float, tolerance: float) -> bool:
    return abs(actual - expected) <= tolerance


def compare_trace(trace: List[IterationRow], golden: TraceGolden, tol: float = 1.0) -> TableCheck:
    """Row-by-row comparison; each column may differ by tol units of its last printed decimal."""
    check = TableCheck(name="Iteration trace")
    for index, expected in enumerate(golden.rows):
        check.checked += 1
        if index >= len(trace):
            check.mismatches.append(Mismatch(f"row {index + 1}", "missing", 0.0, float("nan"), 0.0))
            continue

        actual = trace[index].as_table()
        row_ok = True
        for column in TRACE_COLUMNS:
            tolerance = tol * 10.0 ** -golden.decimals[column]
            if not _within(expected[column], actual[column], tolerance):
                row_ok = False
                check.mismatches.append(
                    Mismatch(f"row {index + 1}", column, expected[column], actual[column], tolerance)
                )
        if row_ok:
            check.matched += 1
    return check


def _check_rounds(outcome: IterationOutcome, golden: TraceGolden, tol: float, check: TableCheck) -> None:
    rounds = outcome.stopped_after
    final = outcome.trace[rounds - 1].R0 if rounds else outcome.R0
    if not _within(golden.final_R0, final, tol * FINAL_R0_TOL):
        check.mismatches.append(Mismatch("final", "R0", golden.final_R0, final, tol * FINAL_R0_TOL))
    if len(outcome.trace) > rounds:
        extra = outcome.trace[rounds].R0
        if not _within(golden.next_round_R0, extra, tol * NEXT_ROUND_TOL):
            check.mismatches.append(
                Mismatch("next round", "R0", golden.next_round_R0, extra, tol * NEXT_ROUND_TOL)
            )


def _wanted(only: Optional[str], polynomial: str) -> bool:
    return only is None or Path(polynomial).stem.lower() == only.lower()


def reproduce_tables(
    presets: PresetsConfig,
    presets_path: str | Path,
    provider: ZeroSumProvider,
    tol: float = 1.0,
    only: Optional[str] = None,
) -> tuple[List[TableCheck], Dict[str, IterationOutcome]]:
    """Regenerate the iteration trace, the checkable V_n rows and the R0 ceilings."""
    checks: List[TableCheck] = []
    outcomes: Dict[str, IterationOutcome] = {}

    def outcome_for(name: str, extra_rounds: int = 0) -> IterationOutcome:
        if name not in outcomes:
            preset = PresetReader.configuration(presets, name)
            record = PolynomialLoader.load(resolve_path(preset.polynomial, presets_path))
            source = provider
            if preset.zeros:
                source = replace(provider, table=load_zeros(resolve_path(preset.zeros, presets_path)))
            logger.info(f"Running configuration '{name}' with {record.name}")
            outcomes[name] = run_iteration(record.poly, preset.region, source, extra_rounds=extra_rounds)
        return outcomes[name]

    golden = presets.golden
    trace_preset = PresetReader.configuration(presets, golden.trace.configuration)
    if _wanted(only, trace_preset.polynomial):
        outcome = outcome_for(golden.trace.configuration, extra_rounds=1)
        check = compare_trace(outcome.trace, golden.trace, tol)
        _check_rounds(outcome, golden.trace, tol, check)
        checks.append(check)

    landau = TableCheck(name="Landau objectives")
    for entry in golden.landau:
        if not _wanted(only, entry.polynomial):
            continue
        record = PolynomialLoader.load(resolve_path(entry.polynomial, presets_path))
        landau.checked += 1
        objective = landau_objective(record.poly)
        row_ok = _within(entry.objective, objective, tol * entry.objective_tolerance)
        if not row_ok:
            landau.mismatches.append(
                Mismatch(record.name, "objective", entry.objective, objective, tol * entry.objective_tolerance)
            )
        if entry.A is not None and not _within(entry.A, record.poly.A, tol * entry.A_tolerance):
            row_ok = False
            landau.mismatches.append(Mismatch(record.name, "A", entry.A, record.poly.A, tol * entry.A_tolerance))
        if row_ok:
            landau.matched += 1
    if landau.checked:
        checks.append(landau)

    vn = TableCheck(name="V_n rows")
    for entry in golden.vn:
        preset = PresetReader.configuration(presets, entry.configuration)
        if not _wanted(only, preset.polynomial):
            continue
        record = PolynomialLoader.load(resolve_path(preset.polynomial, presets_path))
        vn.checked += 1
        objective = landau_objective(record.poly)
        R0 = outcome_for(entry.configuration).R0
        row_ok = True
        if not _within(entry.objective, objective, tol * entry.objective_tolerance):
            row_ok = False
            vn.mismatches.append(
                Mismatch(f"n={entry.n}", "objective", entry.objective, objective, tol * entry.objective_tolerance)
            )
        if not _within(entry.R0, R0, tol * entry.R0_tolerance):
            row_ok = False
            vn.mismatches.append(Mismatch(f"n={entry.n}", "R0", entry.R0, R0, tol * entry.R0_tolerance))
        if row_ok:
            vn.matched += 1
    if vn.checked:
        checks.append(vn)

    ceilings = TableCheck(name="R0 ceilings")
    for entry in golden.ceilings:
        preset = PresetReader.configuration(presets, entry.configuration)
        if not _wanted(only, preset.polynomial):
            continue
        ceilings.checked += 1
        R0 = outcome_for(entry.configuration).R0
        if R0 <= entry.R0_max:
            ceilings.matched += 1
        else:
            ceilings.mismatches.append(Mismatch(entry.configuration, "R0 ceiling", entry.R0_max, R0, 0.0))
    if ceilings.checked:
        checks.append(ceilings)

    for check in checks:
        logger.info(check.summary())
        for mismatch in check.mismatches:
            logger.warning(mismatch.describe())

    return checks, outcomes
