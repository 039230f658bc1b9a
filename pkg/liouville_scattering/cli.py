"""Command-line front end: validate, angular, scatter, poles, compare, verify."""

from __future__ import annotations

import argparse
import cmath
import csv
import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import mpmath
import numpy as np

from . import __version__
from .analysis import AsymptoticModel, bounds_report, delta_at_zero, find_regge_poles, hadamard_reconstruct
from .angular import momenta, solve_angular, weyl_check
from .config import ConfigError, MetricConfig, RunConfig, apply_overrides, load_config, resolve_threads
from .const import CSV_FLOAT_FORMAT, ENV_THREADS, FAMILY_HYPERBOLIC_BUMP
from .exceptions import LiouvilleError
from .inverse_harness import eigenspace_angles, fingerprint_compare, gauge_equivalence_test, shift_invariance_test
from .metric import LiouvilleMetric, build_metric, shifted_config, validate_ahls
from .radial import (
    LEFT,
    RIGHT,
    RadialProblem,
    channel_functions,
    channel_functions_batch,
    fss_wronskian_defect,
    ode_fss,
    picard_fss,
)
from .scattering import ScatteringOperator, assemble_operator, unitarity_defect
from .specfun import BesselOrder, bessel_i, bessel_k, bessel_wronskian_check

LOGGER = logging.getLogger(__name__)

ANGULAR_HEADER = ["n", "mu_sq", "mu_re", "mu_im"]
SCATTER_HEADER = ["n", "mu_sq", "T_re", "T_im", "L_re", "L_im", "R_re", "R_im", "unitarity_defect"]
MU_PATH_HEADER = ["mu_re", "mu_im", "delta_re", "delta_im", "dsmall_re", "dsmall_im", "m_re", "m_im"]
POLES_HEADER = ["n", "alpha_re", "alpha_im", "residual", "winding"]

COMPARE_TOL = 1e-6
GAUGE_SHIFT = 2.5
HADAMARD_TRUNCATIONS = (10, 20, 40)
SHIFT_SAMPLES = 10
ORACLE_POINTS = 50
FREE_CHANNELS = 20
NORMALIZATION_LAMBDAS = (0.5, 1.0, 2.0)
MONOTONE_CHANNELS = 20


def _fmt(value: float) -> str:
    return format(float(value), CSV_FLOAT_FORMAT)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, (int, str)) else _fmt(cell) for cell in row])
    LOGGER.info("Wrote %s", path)


def write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    LOGGER.info("Wrote %s", path)


def parse_mu_path(text: str) -> np.ndarray:
    """'start:stop:count[:axis]' with axis real (default) or imag."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"mu path {text!r} must look like start:stop:count[:axis]")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as err:
        raise ConfigError(f"mu path {text!r}: {err}") from err
    axis = parts[3] if len(parts) == 4 else "real"
    if count < 2:
        raise ConfigError("mu path needs at least 2 points")
    if axis not in ("real", "imag"):
        raise ConfigError(f"mu path axis must be real or imag, not {axis!r}")
    points = np.linspace(start, stop, count)
    return points.astype(complex) if axis == "real" else 1j * points


def _metric(config: RunConfig, validate: bool | None = None) -> LiouvilleMetric:
    metric_config = config.metric if validate is None else replace(config.metric, validate=validate)
    return build_metric(metric_config)


def _radial_problem(config: RunConfig, metric: LiouvilleMetric) -> RadialProblem:
    tol = config.tolerances
    return RadialProblem.from_metric(
        metric,
        config.lam,
        C10=config.C10,
        C11=config.C11,
        picard_tol=tol.picard,
        ode_tol=tol.ode,
        match_tol=tol.match,
    )


def _operator(config: RunConfig, metric: LiouvilleMetric, threads: int) -> tuple[RadialProblem, ScatteringOperator]:
    spectrum = solve_angular(metric, config.lam, config.n_channels - 1, tol=config.tolerances.angular)
    rp = _radial_problem(config, metric)
    return rp, assemble_operator(rp, spectrum, threads)


def cmd_validate(config: RunConfig, args: argparse.Namespace) -> int:
    metric = _metric(config, validate=False)
    report = validate_ahls(metric)
    write_json(config.output_dir / "validate.json", report.as_dict())
    if not report.passed:
        for failure in report.failures():
            LOGGER.error("Validation failed: %s", failure)
        return 1
    LOGGER.info("Metric %s passes all checks", config.metric.family)
    return 0


def cmd_angular(config: RunConfig, args: argparse.Namespace) -> int:
    metric = _metric(config)
    spectrum = solve_angular(metric, config.lam, config.n_channels - 1, tol=config.tolerances.angular)
    rows = [(ch.n, ch.mu_sq, ch.mu.real, ch.mu.imag) for ch in momenta(spectrum)]
    write_csv(config.output_dir / "angular.csv", ANGULAR_HEADER, rows)
    return 0


def _channel_checks(config: RunConfig, op: ScatteringOperator) -> dict[str, Any]:
    tol = config.tolerances
    unitarity = max((max(ch.unitarity_residuals().values()) for ch in op.channels if ch.real_channel), default=0.0)
    identity = 0.0
    for ch in op.channels:
        residuals = ch.identity_residuals()
        keys = ("delta_times_t", "l_from_m", "r_conjugate") if ch.real_channel else ("delta_times_t", "l_from_m")
        identity = max(identity, *(residuals[key] for key in keys))
    relation = max((d for d in unitarity_defect(op) if not math.isnan(d)), default=0.0)
    return {
        "unitarity": {"value": max(unitarity, relation), "threshold": tol.unitarity, "passed": bool(max(unitarity, relation) < tol.unitarity)},
        "identities": {"value": identity, "threshold": tol.identity, "passed": bool(identity < tol.identity)},
    }


def cmd_scatter(config: RunConfig, args: argparse.Namespace) -> int:
    threads = resolve_threads(args.threads, config.threads)
    metric = _metric(config)
    rp, op = _operator(config, metric, threads)
    defects = unitarity_defect(op)
    rows = [
        (ch.channel.n, ch.channel.mu_sq, ch.T.real, ch.T.imag, ch.L.real, ch.L.imag, ch.R.real, ch.R.imag, defect)
        for ch, defect in zip(op.channels, defects)
    ]
    write_csv(config.output_dir / "scatter.csv", SCATTER_HEADER, rows)
    payload = op.as_dict()
    status = 0
    if args.check:
        checks = _channel_checks(config, op)
        payload["check"] = checks
        for name, check in checks.items():
            LOGGER.info("%-12s %.3e (threshold %.1e) %s", name, check["value"], check["threshold"], "ok" if check["passed"] else "FAIL")
        status = 0 if all(check["passed"] for check in checks.values()) else 1
    write_json(config.output_dir / "scatter.json", payload)

    mu_path = args.mu_path or config.mu_path
    if mu_path:
        mus = parse_mu_path(mu_path)
        funcs = channel_functions_batch(rp, mus)
        write_csv(
            config.output_dir / "mu_path.csv",
            MU_PATH_HEADER,
            [
                (mu.real, mu.imag, f.Delta.real, f.Delta.imag, f.delta_small.real, f.delta_small.imag, f.M.real, f.M.imag)
                for mu, f in zip(mus, funcs)
            ],
        )
    return status


def cmd_poles(config: RunConfig, args: argparse.Namespace) -> int:
    threads = resolve_threads(args.threads, config.threads)
    rp = _radial_problem(config, _metric(config))
    poles = find_regge_poles(rp, config.pole_count, config.strip_height, threads)
    write_csv(config.output_dir / "poles.csv", POLES_HEADER, poles.as_rows())
    write_json(config.output_dir / "poles.json", poles.as_dict())
    return 0


def cmd_compare(config: RunConfig, args: argparse.Namespace) -> int:
    other = apply_overrides(load_config(args.other), lam=config.lam, n_channels=config.n_channels)
    threads = resolve_threads(args.threads, config.threads)
    report = fingerprint_compare(
        _metric(config),
        _metric(other),
        config.lam,
        config.n_channels,
        args.compare_tol,
        quantity=args.quantity,
        C10=config.C10,
        C11=config.C11,
        tolerances=config.tolerances,
        threads=threads,
    )
    write_json(config.output_dir / "compare.json", report.as_dict())
    LOGGER.info("Verdict: %s", report.verdict)
    return 1 if report.verdict == "inconclusive" else 0


@dataclass(slots=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "value": float(self.value),
            "threshold": float(self.threshold),
            "passed": bool(self.passed),
            "detail": self.detail,
        }


def _check_bessel(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    x = np.logspace(-2, 1.5, 34)
    worst = max(float(np.max(np.abs(bessel_wronskian_check(BesselOrder(lam), x) + 1))) for lam in (0.5, 1.0, 2.0))
    return CheckResult("bessel_wronskian", worst, 1e-10, worst < 1e-10)


def _check_bessel_oracle(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    order = BesselOrder(1.0)
    z = 1.0 + 1.0j
    by_definition = (math.pi / 2) * (bessel_i(order.flipped(), z) - bessel_i(order, z)) / cmath.sin(order.nu * math.pi)
    defining = abs(bessel_k(order, z) - by_definition) / abs(by_definition)

    rng = np.random.default_rng(11)
    radius = rng.uniform(2.0, 12.0, ORACLE_POINTS)
    points = radius * np.exp(1j * rng.uniform(-math.pi / 4, math.pi / 4, ORACLE_POINTS))
    oracle = 0.0
    with mpmath.workdps(50):
        nu = mpmath.mpc(0, order.lam)
        for point in points:
            w = mpmath.mpc(point.real, point.imag)
            for ours, func in ((bessel_i(order, point), mpmath.besseli), (bessel_k(order, point), mpmath.besselk)):
                expected = complex(func(nu, w))
                oracle = max(oracle, abs(ours - expected) / abs(expected))
    worst = max(defining, oracle)
    detail = f"defK residual {defining:.2e}, oracle {oracle:.2e} over {ORACLE_POINTS} points"
    return CheckResult("bessel_oracle", worst, 1e-12, worst < 1e-12, detail)


def _check_angular(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    spectrum = solve_angular(ctx["metric"], config.lam, 200, tol=config.tolerances.angular)
    weyl = weyl_check(spectrum)
    return CheckResult("angular_weyl", weyl.deviation, 0.02, weyl.passed)


def _check_free_angular(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    # b = 0: mu^2 = (2 pi k / B)^2, every k > 0 twice
    free = build_metric(MetricConfig(FAMILY_HYPERBOLIC_BUMP, config.metric.A, config.metric.B, validate=False))
    spectrum = solve_angular(free, config.lam, FREE_CHANNELS)
    k = np.array([0] + [j for j in range(1, FREE_CHANNELS // 2 + 1) for _ in range(2)], dtype=float)
    expected = (2 * math.pi * k / config.metric.B) ** 2
    worst = float(np.max(np.abs(spectrum.eigenvalues - expected) / np.maximum(1.0, expected)))
    doubled = spectrum.clusters() == [[0]] + [[n, n + 1] for n in range(1, FREE_CHANNELS, 2)]
    detail = "double multiplicity" if doubled else f"clusters {spectrum.clusters()}"
    return CheckResult("angular_free", worst, 1e-12, worst < 1e-12 and doubled, detail)


def _check_angular_shift(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    shifted = build_metric(replace(shifted_config(config.metric, 1.0), validate=False))
    first = solve_angular(ctx["metric"], config.lam, config.n_channels - 1)
    second = solve_angular(shifted, config.lam, config.n_channels - 1)
    coupling = config.lam**2 + 0.25
    drift = float(np.max(np.abs(second.eigenvalues - first.eigenvalues - coupling) / np.maximum(1.0, np.abs(first.eigenvalues))))
    angle = max(eigenspace_angles(first, second, config.n_channels)[0], default=0.0)
    detail = f"largest eigenspace angle {angle:.2e}"
    return CheckResult("angular_shift_covariance", drift, 1e-9, drift < 1e-9 and angle < 1e-8, detail)


def _check_dual_path(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    rp = ctx["rp"]
    worst = 0.0
    for mu in (1.0, 5.0, 20.0):
        for end in (LEFT, RIGHT):
            series = picard_fss(rp, mu, end)
            ode = ode_fss(rp, mu, end)
            scale = np.maximum(np.abs(series.values), 1e-300)
            worst = max(worst, float(np.max(np.abs(series.values - ode.values) / scale)))
    return CheckResult("radial_dual_path", worst, 1e-6, worst < 1e-6)


def _check_fss_normalization(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    """W(S10, S20) = W(S11, S21) = 1 across energies and momenta."""
    grid = np.linspace(0.1, 0.9, 9) * config.metric.A
    worst = 0.0
    for lam in NORMALIZATION_LAMBDAS:
        rp = RadialProblem.from_metric(ctx["metric"], lam, C10=config.C10, C11=config.C11, picard_tol=config.tolerances.picard)
        for mu in (1.0, 5.0, 20.0):
            for end in (LEFT, RIGHT):
                worst = max(worst, fss_wronskian_defect(picard_fss(rp, mu, end, grid)))
    return CheckResult("fss_normalization", worst, 1e-8, worst < 1e-8)


def _check_match(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    spread = max(channel_functions(ctx["rp"], mu).match_spread for mu in (1.0, 5.0, 3.0 + 2.0j))
    return CheckResult("match_independence", spread, 1e-7, spread < 1e-7)


def _check_unitarity(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    check = _channel_checks(config, ctx["operator"])["unitarity"]
    return CheckResult("unitarity", check["value"], check["threshold"], check["passed"])


def _check_identities(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    check = _channel_checks(config, ctx["operator"])["identities"]
    return CheckResult("scattering_identities", check["value"], check["threshold"], check["passed"])


def _check_asymptotics(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    rp = ctx["rp"]
    model = AsymptoticModel.for_problem(rp)
    errors = []
    for scale in (10.0, 20.0, 40.0):
        mu = scale / rp.A
        errors.append(abs(channel_functions(rp, mu).Delta / model.evaluate(mu) - 1))
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    bounds = bounds_report(rp, np.linspace(0.5, 40.0, 80) / rp.A, np.linspace(0.5, 40.0, 40) / rp.A)
    passed = decreasing and errors[-1] < 0.05 and bounds.passed
    detail = f"errors {', '.join(f'{e:.3e}' for e in errors)}; mu*={bounds.real_threshold}"
    return CheckResult("asymptotics", errors[-1], 0.05, passed, detail)


def _check_m_monotone(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    """|M| rises strictly toward 1/(2 |lam| |C10|^2) over the top channels."""
    op = ctx["operator"]
    first = len(op.channels) - MONOTONE_CHANNELS
    tail = [ch for ch in op.distinct_channels() if ch.channel.n >= first and ch.real_channel]
    values = np.array([abs(ch.funcs.M) for ch in tail])
    bound = op.m_bound()
    rising = values.size > 1 and bool(np.all(np.diff(values) > 0))
    gap = float(1 - values[-1] / bound) if values.size else math.inf
    passed = rising and bool(np.all(values <= bound * (1 + 1e-9))) and gap < 0.05
    detail = f"{values.size} distinct channels, {'rising' if rising else 'not rising'}, top |M| {gap:.2e} below the bound"
    return CheckResult("m_monotone", gap, 0.05, passed, detail)


def _poles(config: RunConfig, ctx: dict[str, Any]):
    if "poles" not in ctx:
        count = max(config.pole_count, max(HADAMARD_TRUNCATIONS))
        ctx["poles"] = find_regge_poles(ctx["rp"], count, config.strip_height, ctx["threads"], small_zeros=False)
    return ctx["poles"]


def _check_poles(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    poles = _poles(config, ctx)
    rp = ctx["rp"]
    spacing = np.abs(poles.spacings()[10:] * rp.A / math.pi - 1)
    worst = float(np.max(spacing)) if spacing.size else math.inf
    passed = (
        poles.poles.size >= 15
        and worst < 0.01
        and poles.off_ladder_winding == 0
        and bool(np.all(poles.windings == 1))
    )
    detail = f"{poles.poles.size} poles, offset p={poles.offset}, off-ladder winding {poles.off_ladder_winding}"
    return CheckResult("regge_poles", worst, 0.01, passed, detail)


def _check_pole_trend(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    """Re(alpha_n) approaches lam pi / A up the ladder."""
    poles = _poles(config, ctx)
    rp = ctx["rp"]
    offsets = np.abs(poles.poles.real - rp.lam * math.pi / rp.A)
    third = max(offsets.size // 3, 1)
    early, late = float(np.median(offsets[:third])), float(np.median(offsets[-third:]))
    passed = offsets.size >= 6 and late < early
    detail = f"median |Re alpha - lam pi/A| {early:.3e} (first third), {late:.3e} (last third)"
    return CheckResult("pole_real_trend", late, early, passed, detail)


def _check_hadamard(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    poles = _poles(config, ctx)
    rp = ctx["rp"]
    mu_sq = (2.0 / rp.A) ** 2
    direct = channel_functions(rp, 2.0 / rp.A).Delta
    G = delta_at_zero(rp)
    errors = [abs(hadamard_reconstruct(poles, G, mu_sq, n) / direct - 1) for n in HADAMARD_TRUNCATIONS]
    tail = abs(hadamard_reconstruct(poles, G, mu_sq, HADAMARD_TRUNCATIONS[-1], tail=True) / direct - 1)
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    passed = decreasing and errors[-1] < 0.05 and tail < 0.01
    detail = f"errors {', '.join(f'{e:.3e}' for e in errors)}; with tail {tail:.3e}"
    return CheckResult("hadamard", errors[-1], 0.05, passed, detail)


def _check_shift_invariance(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(SHIFT_SAMPLES):
        L = float(rng.uniform(-5.0, 5.0))
        mu = float(rng.uniform(1.0, 10.0))
        worst = max(worst, shift_invariance_test(ctx["rp"], L, [mu]))
    return CheckResult("shift_invariance", worst, 1e-7, worst < 1e-7)


def _check_gauge(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    report = gauge_equivalence_test(ctx["metric"], GAUGE_SHIFT, config.lam, config.n_channels, COMPARE_TOL, threads=ctx["threads"])
    control = gauge_equivalence_test(
        ctx["metric"], GAUGE_SHIFT, config.lam, config.n_channels, COMPARE_TOL, radial_only=True, threads=ctx["threads"]
    )
    spread = report.shift_spread if report.shift_spread is not None else math.inf
    passed = report.verdict == "indistinguishable" and control.verdict == "distinguished" and spread < 1e-8
    detail = (
        f"gauge {report.verdict}, control {control.verdict}, recovered C={report.recovered_shift}, "
        f"shift spread {spread:.2e}"
    )
    return CheckResult("gauge_equivalence", report.max_deviation, COMPARE_TOL, passed, detail)


def _check_perturbed(config: RunConfig, ctx: dict[str, Any]) -> CheckResult:
    """A taller, off-center bump must be told apart from the configured one."""
    if config.metric.family != FAMILY_HYPERBOLIC_BUMP:
        return CheckResult("perturbed_pair", math.nan, COMPARE_TOL, True, f"skipped for family {config.metric.family}")
    params, A = config.metric.params, config.metric.A
    perturbed = config.metric.with_params(
        height=float(params.get("height", 0.0)) + 0.5,
        center=float(params.get("center", 0.5 * A)) - 0.1 * A,
        width=0.8 * float(params.get("width", 0.25 * A)),
    )
    report = fingerprint_compare(
        ctx["metric"],
        build_metric(replace(perturbed, validate=False)),
        config.lam,
        config.n_channels,
        COMPARE_TOL,
        C10=config.C10,
        C11=config.C11,
        tolerances=config.tolerances,
        threads=ctx["threads"],
    )
    detail = f"verdict {report.verdict}"
    return CheckResult("perturbed_pair", report.max_deviation, COMPARE_TOL, report.verdict == "distinguished", detail)


VERIFY_CHECKS: tuple[Callable[[RunConfig, dict[str, Any]], CheckResult], ...] = (
    _check_bessel,
    _check_bessel_oracle,
    _check_angular,
    _check_free_angular,
    _check_angular_shift,
    _check_dual_path,
    _check_fss_normalization,
    _check_match,
    _check_unitarity,
    _check_identities,
    _check_asymptotics,
    _check_m_monotone,
    _check_poles,
    _check_pole_trend,
    _check_hadamard,
    _check_shift_invariance,
    _check_gauge,
    _check_perturbed,
)


def run_verify_suite(config: RunConfig, threads: int = 1) -> list[CheckResult]:
    metric = _metric(config)
    rp, op = _operator(config, metric, threads)
    ctx: dict[str, Any] = {"metric": metric, "rp": rp, "operator": op, "threads": threads}
    results = []
    for check in VERIFY_CHECKS:
        try:
            result = check(config, ctx)
        except LiouvilleError as err:
            name = check.__name__.removeprefix("_check_")
            LOGGER.error("Check %s raised %s: %s", name, type(err).__name__, err)
            result = CheckResult(name, math.nan, math.nan, False, f"{type(err).__name__}: {err}")
        LOGGER.info("%-26s %12.4e  %-9.1e %s %s", result.name, result.value, result.threshold, "pass" if result.passed else "FAIL", result.detail)
        results.append(result)
    return results


def cmd_verify(config: RunConfig, args: argparse.Namespace) -> int:
    results = run_verify_suite(config, resolve_threads(args.threads, config.threads))
    write_json(
        config.output_dir / "verify.json",
        {"passed": bool(all(r.passed for r in results)), "checks": [r.as_dict() for r in results]},
    )
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "validate": cmd_validate,
    "angular": cmd_angular,
    "scatter": cmd_scatter,
    "poles": cmd_poles,
    "compare": cmd_compare,
    "verify": cmd_verify,
}


def build_arg_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Run configuration (TOML)")
    common.add_argument("--out", type=Path, help="Output directory, overrides [output] directory")
    common.add_argument("--channels", type=int, help="Number of angular channels")
    common.add_argument("--lambda", dest="lam", type=float, help="Energy parameter lambda (nonzero)")
    common.add_argument(
        "--threads",
        type=int,
        help=f"Worker threads (this flag, else ${ENV_THREADS}, else [run] threads, else 1)",
    )
    common.add_argument("--tol", type=float, help="Radial solver tolerance (Picard and ODE)")
    common.add_argument("--verbose", action="store_true", help="Enable debug logging")

    parser = argparse.ArgumentParser(
        prog="liouville_scattering",
        description="Forward scattering on Liouville surfaces with two asymptotically hyperbolic ends.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="Check the metric conditions and write validate.json")
    sub.add_parser("angular", parents=[common], help="Angular eigenvalues and momenta as CSV")
    scatter = sub.add_parser("scatter", parents=[common], help="Per-channel T, L, R as CSV and JSON")
    scatter.add_argument("--check", action="store_true", help="Check unitarity and identities, exit 1 on failure")
    scatter.add_argument("--mu-path", help="Sample Delta, delta and M along start:stop:count[:axis]")
    sub.add_parser("poles", parents=[common], help="Certified Regge poles as CSV")
    compare = sub.add_parser("compare", parents=[common], help="Compare two metrics channel by channel")
    compare.add_argument("other", type=Path, help="Configuration of the second metric")
    compare.add_argument("--quantity", choices=["M", "Delta"], default="M", help="Channel quantity to compare")
    compare.add_argument(
        "--compare-tol", type=float, default=COMPARE_TOL, help=f"Channel deviation tolerance (default {COMPARE_TOL:g})"
    )
    sub.add_parser("verify", parents=[common], help="Run the full check suite and write verify.json")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    try:
        if args.config is None:
            raise ConfigError("--config is required")
        config = apply_overrides(
            load_config(args.config),
            lam=args.lam,
            n_channels=args.channels,
            tol=args.tol,
            out=args.out,
        )
        return COMMANDS[args.command](config, args)
    except ConfigError as err:
        LOGGER.error("Configuration error: %s", err)
        return 2
    except LiouvilleError as err:
        LOGGER.error("%s: %s", type(err).__name__, err)
        return 1
