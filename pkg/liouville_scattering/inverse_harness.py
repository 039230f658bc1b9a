"""Numerical checks of the uniqueness statements: shift invariance, gauge pairs, fingerprints."""

from __future__ import annotations

import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Literal, Sequence

import numpy as np
import scipy.linalg

from .angular import AngularSpectrum, solve_angular
from .config import MetricConfig, Tolerances
from .exceptions import LiouvilleError
from .metric import LiouvilleMetric, build_metric, shifted_config
from .radial import RadialProblem, channel_functions
from .scattering import ScatteringOperator, assemble_operator

LOGGER = logging.getLogger(__name__)

Quantity = Literal["M", "Delta"]
Verdict = Literal["indistinguishable", "distinguished", "inconclusive"]

SHIFT_SPREAD_TOL = 1e-6
EIGENSPACE_GAP = 1e-6
DISTINGUISHED_FACTOR = 10.0
DISTINGUISHED_CHANNELS = 3
COMPARE_POINTS = 256


class InconsistentShift(LiouvilleError):
    """Raised when two angular spectra are not related by a constant shift."""


class IncompatibleB(LiouvilleError):
    """Raised when two metrics are compared on angular periods of different length."""


def shift_invariance_test(rp: RadialProblem, L: complex, mu_samples: Sequence[complex]) -> float:
    """Max relative deviation between Delta, M of q at mu^2 and of q + L at mu^2 - L.

    Both sides come from separate radial solves; the shifted momentum takes
    the branch with Re >= 0.
    """
    shifted = rp.shifted(L)
    worst = 0.0
    for mu in mu_samples:
        mu = complex(mu)
        base = channel_functions(rp, mu)
        moved = channel_functions(shifted, cmath.sqrt(mu * mu - L))
        dev = max(
            abs(moved.Delta - base.Delta) / abs(base.Delta),
            abs(moved.M - base.M) / max(abs(base.M), 1e-300),
        )
        LOGGER.debug("Shift L=%s at mu=%s: deviation %.3e", L, mu, dev)
        worst = max(worst, dev)
    return worst


@dataclass(slots=True)
class Fingerprint:
    """Angular spectrum and scattering operator of one metric at one energy."""

    metric: LiouvilleMetric
    spectrum: AngularSpectrum
    operator: ScatteringOperator


def compute_fingerprint(
    metric: LiouvilleMetric,
    lam: float,
    n_channels: int,
    C10: complex = 1.0,
    C11: complex = 1.0,
    tolerances: Tolerances | None = None,
    threads: int = 1,
) -> Fingerprint:
    tolerances = tolerances or Tolerances()
    spectrum = solve_angular(metric, lam, n_channels - 1, tol=tolerances.angular)
    rp = RadialProblem.from_metric(
        metric,
        lam,
        C10=C10,
        C11=C11,
        picard_tol=tolerances.picard,
        ode_tol=tolerances.ode,
        match_tol=tolerances.match,
    )
    return Fingerprint(metric, spectrum, assemble_operator(rp, spectrum, threads))


@dataclass(slots=True)
class ShiftEstimate:
    C: float
    b_residual: float
    spread: float
    estimates: np.ndarray


def recover_angular_shift(
    s1: AngularSpectrum,
    s2: AngularSpectrum,
    lam: float,
    metrics: tuple[LiouvilleMetric, LiouvilleMetric] | None = None,
) -> ShiftEstimate:
    """C with b - b~ = C, from mu_n^2 - mu~_n^2 = (lam^2 + 1/4) C.

    With ``metrics`` the residual is sup |b - b~ - C| on a grid, otherwise
    the spread of the per-channel estimates.
    """
    if s1.B != s2.B:
        raise IncompatibleB(f"angular periods differ: {s1.B} != {s2.B}")
    count = min(s1.eigenvalues.size, s2.eigenvalues.size)
    coupling = lam * lam + 0.25
    estimates = (s1.eigenvalues[:count] - s2.eigenvalues[:count]) / coupling
    C = float(np.median(estimates))
    spread = float(np.max(np.abs(estimates - C)))
    if spread > SHIFT_SPREAD_TOL * max(1.0, abs(C)):
        raise InconsistentShift(f"per-channel shift estimates spread by {spread:.3e} around C={C:.6g}")
    if metrics is not None:
        y = np.linspace(0.0, s1.B, COMPARE_POINTS, endpoint=False)
        m1, m2 = metrics
        residual = float(np.max(np.abs(m1.b(y) - m2.b(y) - C)))
    else:
        residual = spread
    LOGGER.info("Recovered angular shift C=%.10g (spread %.2e)", C, spread)
    return ShiftEstimate(C, residual, spread, estimates)


def eigenspace_angles(s1: AngularSpectrum, s2: AngularSpectrum, count: int) -> tuple[list[float], list[list[int]]]:
    """Largest principal angle per eigenvalue cluster, with the clusters that hold more than one index.

    A last cluster that continues past the returned eigenpairs is flagged too.
    """
    y = np.linspace(0.0, s1.B, COMPARE_POINTS, endpoint=False)
    angles: list[float] = []
    flagged: list[list[int]] = []
    last = s1.eigenvalues.size - 1
    for group in s1.clusters(EIGENSPACE_GAP):
        group = [n for n in group if n < count]
        if not group:
            continue
        cut = group[-1] == last and (s1.tail_split or s2.tail_split)
        if len(group) > 1 or cut:
            flagged.append(group)
        first = np.column_stack([s1.eigenfunction(n, y) for n in group])
        second = np.column_stack([s2.eigenfunction(n, y) for n in group])
        angles.append(float(np.max(scipy.linalg.subspace_angles(first, second))))
    return angles, flagged


@dataclass(slots=True)
class FingerprintReport:
    labels: tuple[str, str]
    quantity: str
    rows: list[dict[str, Any]]
    recovered_shift: float | None
    b_residual: float | None
    max_deviation: float
    max_angle: float
    tolerance: float
    verdict: Verdict
    shift_spread: float | None = None
    flagged_clusters: list[list[int]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def deviations(self) -> np.ndarray:
        return np.array([row["deviation"] for row in self.rows])

    def as_dict(self) -> dict[str, Any]:
        return {
            "labels": list(self.labels),
            "quantity": self.quantity,
            "recovered_shift": self.recovered_shift,
            "b_residual": self.b_residual,
            "shift_spread": self.shift_spread,
            "max_deviation": self.max_deviation,
            "max_angle": self.max_angle,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "flagged_clusters": self.flagged_clusters,
            "notes": self.notes,
            "channels": self.rows,
        }


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def _verdict(deviations: np.ndarray, angles: Sequence[float], tol: float) -> Verdict:
    if np.count_nonzero(deviations > DISTINGUISHED_FACTOR * tol) >= DISTINGUISHED_CHANNELS:
        return "distinguished"
    if np.all(deviations < tol) and all(angle < tol for angle in angles):
        return "indistinguishable"
    return "inconclusive"


def compare_fingerprints(
    first: Fingerprint,
    second: Fingerprint,
    tol: float,
    quantity: Quantity = "M",
    labels: tuple[str, str] = ("first", "second"),
) -> FingerprintReport:
    """Channel-wise comparison of two computed fingerprints at matching indices."""
    if quantity not in ("M", "Delta"):
        raise ValueError(f"unknown quantity {quantity!r}")
    s1, s2 = first.spectrum, second.spectrum
    if s1.B != s2.B:
        raise IncompatibleB(f"angular periods differ: {s1.B} != {s2.B}")
    lam = first.operator.lam
    notes: list[str] = []
    try:
        shift = recover_angular_shift(s1, s2, lam, (first.metric, second.metric))
    except InconsistentShift as err:
        shift = None
        notes.append(str(err))

    count = min(len(first.operator.channels), len(second.operator.channels))
    angles, flagged = eigenspace_angles(s1, s2, count)
    rows = []
    for ch1, ch2 in zip(first.operator.channels[:count], second.operator.channels[:count]):
        f1, f2 = ch1.funcs, ch2.funcs
        value1, value2 = (f1.M, f2.M) if quantity == "M" else (f1.Delta, f2.Delta)
        rows.append(
            {
                "n": ch1.channel.n,
                "mu_sq": ch1.channel.mu_sq,
                "mu_sq_tilde": ch2.channel.mu_sq,
                "Delta": _pair(f1.Delta),
                "Delta_tilde": _pair(f2.Delta),
                "M": _pair(f1.M),
                "M_tilde": _pair(f2.M),
                "deviation": abs(value1 - value2) / max(abs(value1), 1e-300),
            }
        )
    deviations = np.array([row["deviation"] for row in rows])
    verdict = _verdict(deviations, angles, tol)
    if shift is None:
        # spectra that are not shift-related cannot share M(lambda)
        verdict = "distinguished"
    report = FingerprintReport(
        labels=labels,
        quantity=quantity,
        rows=rows,
        recovered_shift=None if shift is None else shift.C,
        b_residual=None if shift is None else shift.b_residual,
        shift_spread=None if shift is None else shift.spread,
        max_deviation=float(np.max(deviations)) if deviations.size else 0.0,
        max_angle=max(angles, default=0.0),
        tolerance=tol,
        verdict=verdict,
        flagged_clusters=flagged,
        notes=notes,
    )
    LOGGER.info(
        "Compared %s vs %s on %s: max deviation %.3e, verdict %s",
        labels[0],
        labels[1],
        quantity,
        report.max_deviation,
        verdict,
    )
    return report


def fingerprint_compare(
    m1: LiouvilleMetric,
    m2: LiouvilleMetric,
    lam: float,
    n_channels: int,
    tol: float,
    quantity: Quantity = "M",
    C10: complex = 1.0,
    C11: complex = 1.0,
    tolerances: Tolerances | None = None,
    threads: int = 1,
) -> FingerprintReport:
    """Run both pipelines side by side and compare them channel by channel."""
    if m1.B != m2.B:
        raise IncompatibleB(f"angular periods differ: {m1.B} != {m2.B}")
    with ThreadPoolExecutor(max_workers=2) as pool:
        first, second = pool.map(
            lambda metric: compute_fingerprint(metric, lam, n_channels, C10, C11, tolerances, threads),
            (m1, m2),
        )
    return compare_fingerprints(first, second, tol, quantity, (m1.family, m2.family))


def gauge_equivalence_test(
    m: LiouvilleMetric | MetricConfig,
    C: float,
    lam: float,
    n_channels: int,
    tol: float = 1e-6,
    radial_only: bool = False,
    threads: int = 1,
) -> FingerprintReport:
    """Compare a metric with its gauge partner (a + C, b + C).

    ``radial_only`` shifts a alone, which changes a - b and must be told apart.
    """
    config = m if isinstance(m, MetricConfig) else m.config
    if config is None:
        raise ValueError("the metric carries no configuration to shift")
    base = m if isinstance(m, LiouvilleMetric) else build_metric(config)
    partner = build_metric(shifted_config(config, C, radial_only=radial_only))
    report = fingerprint_compare(base, partner, lam, n_channels, tol, threads=threads)
    if report.recovered_shift is not None and not radial_only:
        coupling = lam * lam + 0.25
        expected = -C
        if not math.isclose(report.recovered_shift, expected, rel_tol=0, abs_tol=1e-8 * max(1.0, abs(C))):
            report.notes.append(
                f"eigenvalues moved by {-report.recovered_shift * coupling:.10g}, expected {C * coupling:.10g}"
            )
    report.labels = (f"{config.family}", f"{config.family}+{'a' if radial_only else 'gauge'}({C:g})")
    return report
