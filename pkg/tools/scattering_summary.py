"""Summarize one metric configuration: angular spectrum, radial channels, Regge poles."""

from __future__ import annotations

import argparse
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from liouville_scattering.analysis import find_regge_poles
from liouville_scattering.angular import muntz_partial_sums, solve_angular
from liouville_scattering.config import ConfigError, apply_overrides, load_config, resolve_threads
from liouville_scattering.exceptions import LiouvilleError
from liouville_scattering.metric import build_metric
from liouville_scattering.radial import RadialProblem
from liouville_scattering.scattering import assemble_operator


LOGGER = logging.getLogger("scattering_summary")


@dataclass(slots=True)
class SummaryResult:
    angular: dict[str, Any] | None = None
    channels: list[dict[str, Any]] | None = None
    poles: dict[str, Any] | None = None
    failures: list[str] = field(default_factory=list)


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description=(
            "Run selected stages of the scattering pipeline for one configuration "
            "and print a short summary."
        )
    )
    parser.add_argument("--config", type=Path, required=True, help="Run configuration (TOML)")
    parser.add_argument(
        "--sections",
        choices=["angular", "channels", "poles", "all"],
        default="all",
        help="Which stages to run",
    )
    parser.add_argument("--lambda", dest="lam", type=float, help="Override lambda")
    parser.add_argument("--channels", type=int, help="Override the number of channels")
    parser.add_argument("--threads", type=int, help="Worker threads")
    parser.add_argument(
        "--json-out",
        type=Path,
        help="Optional path to write the gathered data as JSON",
    )
    parser.add_argument(
        "--verbose",
        action="store_true",
        help="Enable debug logging",
    )
    return parser


def run_summary(args: argparse.Namespace) -> SummaryResult:
    wanted = {args.sections} if args.sections != "all" else {"angular", "channels", "poles"}
    config = apply_overrides(load_config(args.config), lam=args.lam, n_channels=args.channels)
    threads = resolve_threads(args.threads, config.threads)
    metric = build_metric(config.metric)
    rp = RadialProblem.from_metric(metric, config.lam, C10=config.C10, C11=config.C11)
    result = SummaryResult()

    spectrum = None
    if wanted & {"angular", "channels"}:
        try:
            spectrum = solve_angular(metric, config.lam, config.n_channels - 1)
        except LiouvilleError as err:
            msg = f"angular: {err}"
            LOGGER.error(msg)
            result.failures.append(msg)
        else:
            muntz = muntz_partial_sums(spectrum)
            result.angular = {
                "eigenvalues": spectrum.eigenvalues.tolist(),
                "muntz_slope": muntz.slope,
                "muntz_expected": muntz.expected_slope,
            }

    if "channels" in wanted and spectrum is not None:
        try:
            op = assemble_operator(rp, spectrum, threads)
        except LiouvilleError as err:
            msg = f"channels: {err}"
            LOGGER.error(msg)
            result.failures.append(msg)
        else:
            result.channels = op.as_dict()["channels"]

    if "poles" in wanted:
        try:
            poles = find_regge_poles(rp, config.pole_count, config.strip_height, threads)
        except LiouvilleError as err:
            msg = f"poles: {err}"
            LOGGER.error(msg)
            result.failures.append(msg)
        else:
            result.poles = poles.as_dict()

    return result


def print_summary(summary: SummaryResult) -> None:
    if summary.angular is not None:
        values = summary.angular["eigenvalues"]
        LOGGER.info("Computed %d angular eigenvalues", len(values))
        for n, value in enumerate(values[:10]):
            LOGGER.info("  mu_%d^2 = %.12g", n, value)
        if len(values) > 10:
            LOGGER.info("  ... %d additional eigenvalues omitted", len(values) - 10)
        LOGGER.info("  Muntz slope %.4g (limit %.4g)", summary.angular["muntz_slope"], summary.angular["muntz_expected"])
    else:
        LOGGER.info("No angular spectrum computed")

    if summary.channels is not None:
        LOGGER.info("Solved %d radial channels", len(summary.channels))
        for channel in summary.channels[:10]:
            t_re, t_im = channel["T"]
            LOGGER.info("  n=%d |T|^2=%.10f", channel["n"], t_re**2 + t_im**2)
    else:
        LOGGER.info("No channels solved")

    if summary.poles is not None:
        LOGGER.info("Certified %d Regge poles (offset p=%d)", len(summary.poles["poles"]), summary.poles["offset"])
        for re, im in summary.poles["poles"][:5]:
            LOGGER.info("  alpha = %.10f + %.10fi", re, im)
    else:
        LOGGER.info("No poles computed")

    if summary.failures:
        LOGGER.error("Failures: %s", "; ".join(summary.failures))
    else:
        LOGGER.info("All requested sections completed successfully")


def export_json(path: Path, summary: SummaryResult) -> None:
    payload = {
        "angular": summary.angular,
        "channels": summary.channels,
        "poles": summary.poles,
        "failures": summary.failures or None,
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    LOGGER.info("Wrote diagnostics to %s", path)


def main() -> None:
    args = build_arg_parser().parse_args()
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    try:
        summary = run_summary(args)
    except ConfigError as err:
        LOGGER.error("Configuration error: %s", err)
        raise SystemExit(2)
    except KeyboardInterrupt:  # pragma: no cover - interactive use
        LOGGER.warning("Interrupted by user")
        raise SystemExit(130)

    print_summary(summary)

    if args.json_out:
        export_json(args.json_out, summary)


if __name__ == "__main__":  # pragma: no cover - script entry point
    main()
