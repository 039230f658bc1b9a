"""Shared metrics, radial problems and spectra."""

from __future__ import annotations

import math
from pathlib import Path

import pytest

from liouville_scattering.angular import solve_angular
from liouville_scattering.config import MetricConfig, load_config
from liouville_scattering.metric import build_metric
from liouville_scattering.radial import RadialProblem

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def bump_config(**params) -> MetricConfig:
    base = {"height": 1.0, "width": 0.25, "beta": 0.3}
    base.update(params)
    return MetricConfig(family="hyperbolic_bump", A=1.0, B=2 * math.pi, params=base)


@pytest.fixture(scope="session")
def config_dir() -> Path:
    return CONFIG_DIR


@pytest.fixture(scope="session")
def default_run():
    return load_config(CONFIG_DIR / "hyperbolic_bump.toml")


@pytest.fixture(scope="session")
def metric():
    return build_metric(bump_config())


@pytest.fixture(scope="session")
def rp(metric):
    return RadialProblem.from_metric(metric, 1.0)


@pytest.fixture(scope="session")
def spectrum(metric):
    return solve_angular(metric, 1.0, 29)
