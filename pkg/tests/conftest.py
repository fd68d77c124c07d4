"""Shared fixtures: bundled data paths, the baseline region and its caches."""

import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from zerofree.iterate import build_cache
from zerofree.kadiri import theta_table
from zerofree.models import RegionParams
from zerofree.source_loader import PolynomialLoader
from zerofree.zetazeros import ZeroSumProvider

PROJECT_ROOT = Path(__file__).resolve().parent.parent
POLYNOMIALS = PROJECT_ROOT / "data" / "polynomials"
ZEROS = PROJECT_ROOT / "data" / "zeros" / "first_zeros.txt"
PRESETS = PROJECT_ROOT / "config" / "presets.json"

settings.register_profile("ci", max_examples=200, deadline=None)
settings.register_profile("dev", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture(scope="session")
def f16():
    return PolynomialLoader.load(POLYNOMIALS / "record16.txt")


@pytest.fixture(scope="session")
def baseline_params():
    return RegionParams(T0=3.06e10, t0=1e5, theta=1.85573, r_init=5.0, R_init=5.7)


@pytest.fixture(scope="session")
def fallback_provider():
    return ZeroSumProvider(use_fallback=True)


@pytest.fixture(scope="session")
def baseline_table(baseline_params):
    return theta_table(baseline_params.theta)


@pytest.fixture(scope="session")
def baseline_cache(f16, baseline_params, fallback_provider, baseline_table):
    return build_cache(f16.poly, baseline_params, fallback_provider, table=baseline_table)
