"""Command-line entry point: anneal, objective, r0, tables, plot, sweep."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from observability.metrics.exporter import push_metrics, write_metrics

from . import settings
from .anneal import run_chains
from .exceptions import ConfigError, FitError, GoldenMismatchError, ZeroFreeError
from .iterate import build_cache, r0_plain, run_iteration, t0_sweep, theorem_constant
from .models import AnnealSchedule, RegionParams, RunConfig
from .preset_reader import PresetReader, resolve_path
from .sink_writer import write_csv, write_polynomial
from .source_loader import PolynomialLoader
from .tables import reproduce_tables
from .trigpoly import cosine_from_factor, evaluate, landau_objective, membership_check, min_value
from .zetazeros import ZeroSumProvider, load_zeros

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# flag dest -> RegionParams field
REGION_FLAGS = {
    "T0": "T0",
    "t0": "t0",
    "theta": "theta",
    "r": "r_init",
    "R": "R_init",
    "Delta": "Delta",
    "v": "v",
    "eps_eta1": "eps_eta1",
    "epsilon": "epsilon",
    "n": "n",
}

# flag dest -> AnnealSchedule field
SCHEDULE_FLAGS = {
    "B": "B",
    "Z0": "Z0",
    "dZ": "dZ",
    "Kz": "Kz",
    "M": "M",
    "S0": "S0_init",
    "lambda_": "lambda_",
    "S_min": "S_min",
}


def _add_region_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("region parameters")
    group.add_argument("--config", help="named configuration from the presets file")
    group.add_argument("--T0", type=float, help="height to which RH is verified")
    group.add_argument("--t0", type=float, help="zero-sum cutoff")
    group.add_argument("--theta", type=float)
    group.add_argument("--r", type=float, help="initial r")
    group.add_argument("--R", type=float, help="initial R")
    group.add_argument("--Delta", type=float, help="inner tolerance")
    group.add_argument("--v", type=float, help="outer tolerance")
    group.add_argument("--eps-eta1", dest="eps_eta1", type=float, help="eta1 balance tolerance")
    group.add_argument("--epsilon", type=float, help="window parameter of the C41 split")
    group.add_argument("--n", type=int, help="degree used in sigma0 (defaults to the polynomial's)")
    group.add_argument("--zeros", type=Path, help="file of zeta-zero ordinates")
    group.add_argument("--fallback-c30", dest="fallback_c30", action="store_true",
                       help="use the published c30(0, 1e5) when no zeros file covers t0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zerofree", description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(settings.OUTPUT_DIR), help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--presets", type=Path, default=Path("config/presets.json"))
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    anneal = sub.add_parser("anneal", help="search P_n for small Landau objectives")
    anneal.add_argument("--degree", type=int)
    anneal.add_argument("--start", type=Path, help="polish a polynomial file with c lines")
    anneal.add_argument("--chains", type=int, default=1)
    anneal.add_argument("--jitter", action="store_true", help="draw each chain's schedule from the search ranges")
    anneal.add_argument("--workers", type=int, default=1)
    anneal.add_argument("--max-failures", dest="max_failures", type=int)
    schedule = anneal.add_argument_group("schedule")
    schedule.add_argument("--B", type=float)
    schedule.add_argument("--Z0", type=float)
    schedule.add_argument("--dZ", type=float)
    schedule.add_argument("--Kz", type=int)
    schedule.add_argument("--M", type=int)
    schedule.add_argument("--S0", type=float)
    schedule.add_argument("--lambda", dest="lambda_", type=float)
    schedule.add_argument("--S-min", dest="S_min", type=float)

    objective = sub.add_parser("objective", help="Landau objective of polynomial files")
    objective.add_argument("polynomials", nargs="+", type=Path)

    r0 = sub.add_parser("r0", help="run the R0 iteration")
    r0.add_argument("polynomial", nargs="?", type=Path)
    r0.add_argument("--extra-rounds", dest="extra_rounds", type=int, default=0)
    _add_region_flags(r0)

    tables = sub.add_parser("tables", help="reproduce the published tables")
    tables.add_argument("--tol", type=float, default=1.0, help="tolerance multiplier, 0 demands exact agreement")
    tables.add_argument("--only", help="restrict to one bundled polynomial, e.g. record40")
    tables.add_argument("--zeros", type=Path)
    tables.add_argument("--fallback-c30", dest="fallback_c30", action="store_true")

    plot = sub.add_parser("plot", help="sample f on [pi/2, pi] for plotting")
    plot.add_argument("polynomial", type=Path)
    plot.add_argument("--points", type=int, default=2000)

    sweep = sub.add_parser("sweep", help="R0 across T0 with a fit in 1/log T0")
    sweep.add_argument("polynomial", nargs="?", type=Path)
    sweep.add_argument("--T0-grid", dest="T0_grid", type=float, nargs="+")
    sweep.add_argument("--T0-range", dest="T0_range", type=float, nargs=3, metavar=("MIN", "MAX", "COUNT"),
                       help="COUNT log-spaced values from MIN to MAX")
    sweep.add_argument("--workers", type=int, default=1)
    _add_region_flags(sweep)

    return parser


def _pick(args: argparse.Namespace, flags: Dict[str, str]) -> Dict[str, object]:
    return {field: getattr(args, dest) for dest, field in flags.items() if getattr(args, dest, None) is not None}


def build_config(args: argparse.Namespace) -> RunConfig:
    """Turn parsed flags into a validated RunConfig."""
    fields: Dict[str, object] = {
        "subcommand": args.subcommand,
        "out": args.out,
        "seed": args.seed,
        "presets": args.presets,
    }

    region: Dict[str, object] = {}
    polynomials: List[Path] = []
    preset_zeros = None
    if getattr(args, "config", None):
        preset = PresetReader.configuration(PresetReader.read(args.presets), args.config)
        region = preset.region.model_dump()
        polynomials = [resolve_path(preset.polynomial, args.presets)]
        if preset.zeros:
            preset_zeros = resolve_path(preset.zeros, args.presets)
    region.update(_pick(args, REGION_FLAGS))
    fields["region"] = RegionParams(**region)

    if args.subcommand == "anneal":
        fields["schedule"] = AnnealSchedule(**{**_pick(args, SCHEDULE_FLAGS), "seed": args.seed})
        fields.update(
            degree=args.degree,
            start=args.start,
            chains=args.chains,
            jitter=args.jitter,
            workers=args.workers,
            max_failures=args.max_failures,
        )
    elif args.subcommand == "objective":
        polynomials = list(args.polynomials)
    elif args.subcommand in ("r0", "plot", "sweep"):
        if args.polynomial is not None:
            polynomials = [args.polynomial]

    if args.subcommand == "r0":
        fields["extra_rounds"] = args.extra_rounds
    if args.subcommand == "plot":
        fields["points"] = args.points
    if args.subcommand == "tables":
        fields.update(tol=args.tol, only=args.only)
    if args.subcommand == "sweep":
        grid = list(args.T0_grid or [])
        if args.T0_range:
            low, high, count = args.T0_range
            grid.extend(np.logspace(np.log10(low), np.log10(high), int(count)).tolist())
        fields.update(T0_grid=grid, workers=args.workers)

    fields["zeros"] = getattr(args, "zeros", None) or preset_zeros
    fields["fallback_c30"] = getattr(args, "fallback_c30", False)
    fields["polynomials"] = polynomials
    return RunConfig(**fields)


def zero_sum_provider(config: RunConfig) -> ZeroSumProvider:
    table = load_zeros(config.zeros) if config.zeros else None
    return ZeroSumProvider(table=table, use_fallback=config.fallback_c30)


def cmd_anneal(config: RunConfig) -> int:
    start = None
    degree = config.degree
    if config.start is not None:
        record = PolynomialLoader.load(config.start)
        if record.factor is None:
            raise ConfigError(f"{config.start} has no c lines to start annealing from")
        start = record.factor
        degree = start.n

    result = run_chains(
        degree,
        config.schedule,
        config.chains,
        parameter_jitter=config.jitter,
        workers=config.workers,
        start=start,
    )

    stem = f"anneal_n{degree}_seed{config.seed}"
    best = result.best
    write_polynomial(
        config.out / f"{stem}.txt",
        cosine_from_factor(best.best_factor),
        best.best_factor,
        comment=f"annealed, degree {degree}, chain seed {best.seed}, G = {best.best_objective!r}",
    )
    write_csv(result.log_rows(), config.out / f"{stem}_chains.csv")

    print(f"best objective: {best.best_objective:.12f}")

    threshold = config.max_failures if config.max_failures is not None else config.chains // 2
    if len(result.failures) > threshold:
        logger.error(f"{len(result.failures)} of {config.chains} chains failed (threshold {threshold})")
        return 1
    return 0


def cmd_objective(config: RunConfig) -> int:
    status = 0
    for path in config.polynomials:
        record = PolynomialLoader.load(path)
        report = membership_check(record.poly)
        print(f"{record.name}: n = {record.poly.n}")
        print(f"  A = {record.poly.A!r}")
        print(f"  membership: {report.reason()}")
        print(f"  min on [0, pi] (sampled): {min_value(record.poly):.3e}")
        if report.is_member:
            print(f"  objective = {landau_objective(record.poly)!r}")
        else:
            status = 1
    return status


def cmd_r0(config: RunConfig) -> int:
    record = PolynomialLoader.load(config.polynomials[0])
    cache = build_cache(record.poly, config.region, zero_sum_provider(config))
    outcome = run_iteration(record.poly, config.region, extra_rounds=config.extra_rounds, cache=cache)

    write_csv([row.as_table() for row in outcome.trace], config.out / f"r0_{record.name}.csv")

    last = outcome.trace[-1]
    plain = r0_plain(last.r, last.R, cache)
    logger.info(f"Without the eta1 saving the last round gives {plain:.10f}")

    print(f"R0 = {outcome.R0:.10f} after {len(outcome.trace)} rounds")
    print(f"zero-free constant: {theorem_constant(outcome.R0)}")
    return 0


def cmd_tables(config: RunConfig) -> int:
    presets = PresetReader.read(config.presets)
    provider = zero_sum_provider(config)
    if config.zeros is None and not provider.use_fallback:
        logger.info("No zeros file given, reproducing with the published c30(0, 1e5)")
        provider = ZeroSumProvider(use_fallback=True)
    checks, outcomes = reproduce_tables(
        presets,
        config.presets,
        provider,
        tol=config.tol,
        only=config.only,
    )
    for name, outcome in outcomes.items():
        write_csv([row.as_table() for row in outcome.trace], config.out / f"trace_{name}.csv")

    for check in checks:
        print(check.summary())
        for mismatch in check.mismatches:
            print(f"  {mismatch.describe()}")

    if not checks:
        logger.error(f"Nothing to check for --only {config.only}")
        return 1
    failed = [check.name for check in checks if not check.ok]
    if failed:
        raise GoldenMismatchError(f"Reproduction drifted from golden values in: {', '.join(failed)}")
    return 0


def cmd_plot(config: RunConfig) -> int:
    record = PolynomialLoader.load(config.polynomials[0])
    phi = np.linspace(np.pi / 2, np.pi, config.points)
    values = evaluate(record.poly, phi)
    write_csv(pd.DataFrame({"phi": phi, "value": values}), config.out / f"plot_{record.name}.csv")
    return 0


def cmd_sweep(config: RunConfig) -> int:
    record = PolynomialLoader.load(config.polynomials[0])
    try:
        result = t0_sweep(
            record.poly,
            config.T0_grid,
            config.region,
            zero_sum_provider(config),
            workers=config.workers,
        )
    except FitError as e:
        logger.error(f"Sweep fit impossible: {e}")
        return 1

    write_csv(result.points, config.out / f"sweep_{record.name}.csv")
    if result.degenerate:
        print("fit: degenerate (fewer than two points), B undefined")
    else:
        print(f"fit: R0 = {result.A_fit:.6f} + {result.B_fit:.6f} / log T0")
    return 0


COMMANDS = {
    "anneal": cmd_anneal,
    "objective": cmd_objective,
    "r0": cmd_r0,
    "tables": cmd_tables,
    "plot": cmd_plot,
    "sweep": cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else settings.LOG_LEVEL,
        format=LOG_FORMAT,
    )

    try:
        config = build_config(args)
    except (ValidationError, ConfigError) as e:
        logger.error(f"Invalid arguments: {e}")
        return 2
    except ZeroFreeError as e:
        logger.error(str(e))
        return 1

    logger.info(f"Running {config.subcommand}, outputs under {config.out}")
    try:
        status = COMMANDS[config.subcommand](config)
    except ZeroFreeError as e:
        logger.error(f"{config.subcommand} failed: {e}")
        status = 1

    write_metrics(config.out)
    push_metrics(job_name=f"zerofree_{config.subcommand}")
    return status


if __name__ == "__main__":
    sys.exit(main())
