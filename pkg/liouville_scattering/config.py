"""TOML configuration for metric families and scattering runs."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import voluptuous as vol

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - Python < 3.11
    import tomli as tomllib

from .const import (
    CONF_A,
    CONF_B,
    CONF_C10,
    CONF_C11,
    CONF_CHANNELS,
    CONF_DELTA,
    CONF_DIRECTORY,
    CONF_EPS0,
    CONF_EPS1,
    CONF_FAMILY,
    CONF_LAMBDA,
    CONF_METRIC,
    CONF_MU_PATH,
    CONF_OUTPUT,
    CONF_PARAMS,
    CONF_POLE_COUNT,
    CONF_POLES,
    CONF_RUN,
    CONF_SCATTER,
    CONF_STRIP_HEIGHT,
    CONF_THREADS,
    CONF_TOL_ANGULAR,
    CONF_TOL_IDENTITY,
    CONF_TOL_MATCH,
    CONF_TOL_ODE,
    CONF_TOL_PICARD,
    CONF_TOL_UNITARITY,
    CONF_TOLERANCES,
    CONF_VALIDATE,
    DEFAULT_ANGULAR_TOL,
    DEFAULT_CHANNELS,
    DEFAULT_IDENTITY_TOL,
    DEFAULT_LAMBDA,
    DEFAULT_MATCH_TOL,
    DEFAULT_ODE_TOL,
    DEFAULT_PICARD_TOL,
    DEFAULT_UNITARITY_TOL,
    ENV_THREADS,
    FAMILIES,
    FAMILY_HYPERBOLIC_BUMP,
)
from .exceptions import LiouvilleError

LOGGER = logging.getLogger(__name__)


class ConfigError(LiouvilleError):
    """Raised when a configuration file cannot be read or fails validation."""


def _complex_value(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise vol.Invalid("expected a number or a [re, im] pair")
        result = complex(float(value[0]), float(value[1]))
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        result = complex(value)
    else:
        raise vol.Invalid("expected a number or a [re, im] pair")
    if result == 0:
        raise vol.Invalid("normalization constant must be nonzero")
    return result


def _nonzero(value: float) -> float:
    if value == 0:
        raise vol.Invalid("must be nonzero")
    return value


def _param_value(value: Any) -> Any:
    if isinstance(value, bool):
        raise vol.Invalid("parameters are numbers or lists of numbers")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return [float(v) for v in value]
    raise vol.Invalid("parameters are numbers or lists of numbers")


_positive = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))

METRIC_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_FAMILY, default=FAMILY_HYPERBOLIC_BUMP): vol.In(FAMILIES),
        vol.Required(CONF_A): _positive,
        vol.Required(CONF_B): _positive,
        vol.Optional(CONF_EPS0, default=1.0): _positive,
        vol.Optional(CONF_EPS1, default=1.0): _positive,
        vol.Optional(CONF_DELTA, default=0.1): _positive,
        vol.Optional(CONF_VALIDATE, default=True): bool,
        vol.Optional(CONF_PARAMS, default=dict): {str: _param_value},
    }
)

TOLERANCE_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_TOL_PICARD, default=DEFAULT_PICARD_TOL): _positive,
        vol.Optional(CONF_TOL_ODE, default=DEFAULT_ODE_TOL): _positive,
        vol.Optional(CONF_TOL_MATCH, default=DEFAULT_MATCH_TOL): _positive,
        vol.Optional(CONF_TOL_UNITARITY, default=DEFAULT_UNITARITY_TOL): _positive,
        vol.Optional(CONF_TOL_IDENTITY, default=DEFAULT_IDENTITY_TOL): _positive,
        vol.Optional(CONF_TOL_ANGULAR, default=DEFAULT_ANGULAR_TOL): _positive,
    }
)

RUN_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_LAMBDA, default=DEFAULT_LAMBDA): vol.All(vol.Coerce(float), _nonzero),
        vol.Optional(CONF_CHANNELS, default=DEFAULT_CHANNELS): vol.All(int, vol.Range(min=1)),
        vol.Optional(CONF_C10, default=1.0): _complex_value,
        vol.Optional(CONF_C11, default=1.0): _complex_value,
        vol.Optional(CONF_THREADS): vol.All(int, vol.Range(min=1)),
    }
)

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_METRIC): METRIC_SCHEMA,
        vol.Optional(CONF_RUN, default=dict): RUN_SCHEMA,
        vol.Optional(CONF_TOLERANCES, default=dict): TOLERANCE_SCHEMA,
        vol.Optional(CONF_OUTPUT, default=dict): {vol.Optional(CONF_DIRECTORY, default="out"): str},
        vol.Optional(CONF_POLES, default=dict): {
            vol.Optional(CONF_POLE_COUNT, default=15): vol.All(int, vol.Range(min=1)),
            vol.Optional(CONF_STRIP_HEIGHT, default=0.0): vol.All(vol.Coerce(float), vol.Range(min=0)),
        },
        vol.Optional(CONF_SCATTER, default=dict): {vol.Optional(CONF_MU_PATH): str},
    }
)


@dataclass(frozen=True, slots=True)
class MetricConfig:
    family: str
    A: float
    B: float
    eps0: float = 1.0
    eps1: float = 1.0
    delta: float = 0.1
    params: Mapping[str, Any] = field(default_factory=dict)
    validate: bool = True

    def with_params(self, **updates: Any) -> MetricConfig:
        return replace(self, params={**self.params, **updates})


@dataclass(frozen=True, slots=True)
class Tolerances:
    picard: float = DEFAULT_PICARD_TOL
    ode: float = DEFAULT_ODE_TOL
    match: float = DEFAULT_MATCH_TOL
    unitarity: float = DEFAULT_UNITARITY_TOL
    identity: float = DEFAULT_IDENTITY_TOL
    angular: float = DEFAULT_ANGULAR_TOL


@dataclass(frozen=True, slots=True)
class RunConfig:
    metric: MetricConfig
    lam: float = DEFAULT_LAMBDA
    n_channels: int = DEFAULT_CHANNELS
    C10: complex = 1.0
    C11: complex = 1.0
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_dir: Path = Path("out")
    threads: int | None = None
    pole_count: int = 15
    strip_height: float = 0.0
    mu_path: str | None = None
    source: Path | None = None


def _format_invalid(err: vol.MultipleInvalid) -> str:
    return "; ".join(str(error) for error in err.errors)


def run_config_from_mapping(mapping: Mapping[str, Any], source: Path | None = None) -> RunConfig:
    """Validate a parsed document and build the run configuration."""
    try:
        data = CONFIG_SCHEMA(dict(mapping))
    except vol.MultipleInvalid as err:
        where = f"{source}: " if source else ""
        raise ConfigError(f"{where}{_format_invalid(err)}") from err

    metric = data[CONF_METRIC]
    run = data[CONF_RUN]
    tol = data[CONF_TOLERANCES]
    return RunConfig(
        metric=MetricConfig(
            family=metric[CONF_FAMILY],
            A=metric[CONF_A],
            B=metric[CONF_B],
            eps0=metric[CONF_EPS0],
            eps1=metric[CONF_EPS1],
            delta=metric[CONF_DELTA],
            params=dict(metric[CONF_PARAMS]),
            validate=metric[CONF_VALIDATE],
        ),
        lam=run[CONF_LAMBDA],
        n_channels=run[CONF_CHANNELS],
        C10=run[CONF_C10],
        C11=run[CONF_C11],
        tolerances=Tolerances(
            picard=tol[CONF_TOL_PICARD],
            ode=tol[CONF_TOL_ODE],
            match=tol[CONF_TOL_MATCH],
            unitarity=tol[CONF_TOL_UNITARITY],
            identity=tol[CONF_TOL_IDENTITY],
            angular=tol[CONF_TOL_ANGULAR],
        ),
        output_dir=Path(data[CONF_OUTPUT][CONF_DIRECTORY]),
        threads=run.get(CONF_THREADS),
        pole_count=data[CONF_POLES][CONF_POLE_COUNT],
        strip_height=data[CONF_POLES][CONF_STRIP_HEIGHT],
        mu_path=data[CONF_SCATTER].get(CONF_MU_PATH),
        source=source,
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        with path.open("rb") as handle:
            document = tomllib.load(handle)
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from err
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path}: invalid TOML: {err}") from err
    LOGGER.debug("Loaded configuration from %s", path)
    return run_config_from_mapping(document, source=path)


def apply_overrides(
    config: RunConfig,
    lam: float | None = None,
    n_channels: int | None = None,
    tol: float | None = None,
    out: str | Path | None = None,
) -> RunConfig:
    """Apply command-line values on top of the file; the flags win."""
    updates: dict[str, Any] = {}
    if lam is not None:
        if lam == 0:
            raise ConfigError("lambda must be nonzero")
        updates["lam"] = float(lam)
    if n_channels is not None:
        if n_channels < 1:
            raise ConfigError("n_channels must be at least 1")
        updates["n_channels"] = int(n_channels)
    if tol is not None:
        if tol <= 0:
            raise ConfigError("tolerance must be positive")
        updates["tolerances"] = replace(config.tolerances, picard=tol, ode=tol)
    if out is not None:
        updates["output_dir"] = Path(out)
    return replace(config, **updates) if updates else config


def resolve_threads(flag: int | None = None, configured: int | None = None) -> int:
    """Worker count: --threads, then the environment, then [run] threads, then 1."""
    if flag is not None:
        if flag < 1:
            raise ConfigError("--threads must be at least 1")
        return flag
    raw = os.environ.get(ENV_THREADS)
    if raw:
        try:
            value = int(raw)
        except ValueError as err:
            raise ConfigError(f"{ENV_THREADS}={raw!r} is not an integer") from err
        if value < 1:
            raise ConfigError(f"{ENV_THREADS} must be at least 1")
        return value
    return configured if configured is not None else 1
