"""Regge poles, the large-mu model of Delta, delta and M, and Hadamard checks."""

from __future__ import annotations

import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Sequence

import numpy as np

from .exceptions import LiouvilleError
from .radial import RadialProblem, channel_functions, channel_functions_batch
from .specfun import complex_gamma

LOGGER = logging.getLogger(__name__)

Which = Literal["Delta", "delta_small", "M", "dDelta"]

SAMPLES_PER_SIDE = 16
MAX_PHASE_STEP = math.pi / 4
MAX_CONTOUR_POINTS = 4096
WINDING_TOL = 0.25
MAX_SUBDIVISION = 3
TAIL_TERMS = 100_000
BOUND_SLACK = 1e-9


class PoleMissed(LiouvilleError):
    """Raised when the asymptotic ladder predicts a zero in a box where none is certified."""


class SectorError(LiouvilleError):
    """Raised when the asymptotic model is evaluated outside its sector."""


@dataclass(frozen=True, slots=True)
class AsymptoticModel:
    """Leading large-mu behavior of the channel functions, remainder set to 1."""

    lam: float
    A: float
    C10: complex = 1.0
    C11: complex = 1.0

    @classmethod
    def for_problem(cls, rp: RadialProblem) -> AsymptoticModel:
        return cls(rp.lam, rp.A, complex(rp.C10), complex(rp.C11))

    def _sign(self, mu: complex, sign: int | None) -> int:
        if mu == 0 or abs(cmath.phase(mu)) > math.pi / 2 + 1e-15:
            raise SectorError(f"mu={mu} lies outside the sector |arg mu| <= pi/2")
        if sign is not None:
            return sign
        return 1 if mu.imag >= 0 else -1

    def evaluate(self, mu: complex, which: Which = "Delta", sign: int | None = None) -> complex:
        """Model value; on the real axis ``sign`` picks the branch (default upper)."""
        mu = complex(mu)
        s = self._sign(mu, sign)
        lam, A = self.lam, self.A
        g_minus = complex_gamma(1 - 1j * lam)
        g_plus = complex_gamma(1 + 1j * lam)
        shift = s * lam * math.pi
        power = cmath.exp(2j * lam * cmath.log(mu))
        two_power = cmath.exp(2j * lam * math.log(2.0))
        front = self.C10 * self.C11 * g_minus**2 / (math.pi * two_power) * power * math.exp(shift)
        if which == "Delta":
            return front * 2 * cmath.cosh(mu * A - shift)
        if which == "dDelta":
            return front * A * 2 * cmath.sinh(mu * A - shift)
        if which == "delta_small":
            return self.C11 * g_minus * g_plus / (self.C10 * 2j * lam * math.pi) * 2 * cmath.cosh(mu * A)
        if which == "M":
            ratio = cmath.cosh(mu * A) / cmath.cosh(mu * A - shift)
            return -g_plus * math.exp(-shift) * two_power / (2j * lam * self.C10**2 * g_minus) / power * ratio
        raise ValueError(f"unknown model quantity {which!r}")

    def both_signs(self, mu: complex, which: Which = "Delta") -> tuple[complex, complex]:
        return self.evaluate(mu, which, 1), self.evaluate(mu, which, -1)

    def pole(self, n: int, offset: int = 0) -> complex:
        return complex(self.lam * math.pi / self.A, (n + 0.5 + offset) * math.pi / self.A)

    def small_zero(self, n: int, offset: int = 0) -> complex:
        return complex(0.0, (n + 0.5 + offset) * math.pi / self.A)


def asymptotic_model_eval(am: AsymptoticModel, mu: complex, which: Which = "Delta") -> complex:
    return am.evaluate(mu, which)


@dataclass(frozen=True, slots=True)
class Box:
    left: float
    right: float
    bottom: float
    top: float

    def contains(self, z: complex) -> bool:
        return self.left < z.real < self.right and self.bottom < z.imag < self.top

    @property
    def center(self) -> complex:
        return complex((self.left + self.right) / 2, (self.bottom + self.top) / 2)

    def point(self, s: np.ndarray) -> np.ndarray:
        """Counter-clockwise boundary point for s in [0, 4], s = 0 at the lower-left corner."""
        s = np.asarray(s, dtype=float) % 4.0
        side = np.minimum(np.floor(s), 3).astype(int)
        frac = s - side
        width, height = self.right - self.left, self.top - self.bottom
        re = np.choose(side, [self.left + frac * width, np.full_like(frac, self.right), self.right - frac * width, np.full_like(frac, self.left)])
        im = np.choose(side, [np.full_like(frac, self.bottom), self.bottom + frac * height, np.full_like(frac, self.top), self.top - frac * height])
        return re + 1j * im

    def secant_starts(self, guess: complex) -> tuple[complex, complex, complex]:
        """The guess (or the center), then points above and below the center."""
        height = self.top - self.bottom
        first = guess if self.contains(guess) else self.center
        return first, self.center + 0.1j * height, self.center - 0.1j * height

    def quarters(self) -> list[Box]:
        mx, my = (self.left + self.right) / 2, (self.bottom + self.top) / 2
        return [
            Box(self.left, mx, self.bottom, my),
            Box(mx, self.right, self.bottom, my),
            Box(self.left, mx, my, self.top),
            Box(mx, self.right, my, self.top),
        ]


@dataclass(slots=True)
class WindingCertificate:
    box: Box
    winding: int
    raw: float
    points: int
    boundary_max: float


class _Evaluator:
    """Batched Delta or delta along arbitrary mu, memoized by point."""

    def __init__(self, rp: RadialProblem, which: str) -> None:
        self.rp = rp
        self.which = which
        self.cache: dict[complex, complex] = {}

    def __call__(self, mus) -> np.ndarray:
        mus = np.atleast_1d(np.asarray(mus, dtype=complex))
        missing = [mu for mu in dict.fromkeys(mus.tolist()) if mu not in self.cache]
        if missing:
            for mu, funcs in zip(missing, channel_functions_batch(self.rp, missing)):
                self.cache[mu] = funcs.Delta if self.which == "Delta" else funcs.delta_small
        return np.array([self.cache[mu] for mu in mus.tolist()])


def winding_number(func: Callable[[np.ndarray], np.ndarray], box: Box) -> WindingCertificate:
    """Argument principle on the box boundary from the unwrapped phase.

    Intervals whose phase step exceeds pi/4 are bisected until none does.
    """
    s = np.linspace(0.0, 4.0, 4 * SAMPLES_PER_SIDE + 1)
    values = func(box.point(s[:-1]))
    values = np.append(values, values[0])
    while True:
        steps = np.angle(values[1:] / values[:-1])
        coarse = np.flatnonzero(np.abs(steps) > MAX_PHASE_STEP)
        if coarse.size == 0 or s.size >= MAX_CONTOUR_POINTS:
            break
        mids = (s[coarse] + s[coarse + 1]) / 2
        new_vals = func(box.point(mids))
        s = np.insert(s, coarse + 1, mids)
        values = np.insert(values, coarse + 1, new_vals)
        LOGGER.debug("Contour refinement: %d points", s.size)
    if s.size >= MAX_CONTOUR_POINTS:
        LOGGER.warning("Contour around %s hit %d points before resolving the phase", box, MAX_CONTOUR_POINTS)
    raw = float(np.sum(np.angle(values[1:] / values[:-1])) / (2 * math.pi))
    return WindingCertificate(box, int(round(raw)), raw, s.size, float(np.max(np.abs(values))))


def _secant(func: Callable[[complex], complex], z0: complex, z1: complex, tol: float = 1e-13, max_iter: int = 60):
    f0, f1 = func(z0), func(z1)
    for _ in range(max_iter):
        if f1 == f0:
            break
        z2 = z1 - f1 * (z1 - z0) / (f1 - f0)
        z0, f0 = z1, f1
        z1, f1 = z2, func(z2)
        if abs(z1 - z0) < tol * max(1.0, abs(z1)):
            break
    return z1, f1


@dataclass(slots=True)
class LocatedZero:
    value: complex
    residual: float
    winding: int


def _locate(func: _Evaluator, box: Box, guess: complex, depth: int = 0) -> list[LocatedZero]:
    cert = winding_number(func, box)
    if abs(cert.raw - cert.winding) > WINDING_TOL:
        LOGGER.warning("Winding %.3f around %s is not close to an integer", cert.raw, box)
    if cert.winding <= 0:
        return []
    if cert.winding > 1 and depth < MAX_SUBDIVISION:
        found = []
        for quarter in box.quarters():
            found.extend(_locate(func, quarter, quarter.center, depth + 1))
        return found

    scalar = lambda z: complex(func(np.array([z]))[0])
    height = box.top - box.bottom
    for start in box.secant_starts(guess):
        root, value = _secant(scalar, start, start + 1e-3 * height)
        if box.contains(root):
            residual = abs(value) / cert.boundary_max
            return [LocatedZero(root, residual, cert.winding)]
    raise PoleMissed(f"winding {cert.winding} around {box} but the secant iteration left the box")


@dataclass(slots=True)
class ReggePoleSet:
    poles: np.ndarray
    residuals: np.ndarray
    windings: np.ndarray
    offset: int
    model_residuals: np.ndarray
    small_zeros: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    small_offset: int | None = None
    total_winding: int = 0
    off_ladder_winding: int | None = None
    lam: float = 1.0
    A: float = 1.0

    def spacings(self) -> np.ndarray:
        return np.diff(self.poles.imag)

    def as_rows(self) -> list[tuple[int, float, float, float, int]]:
        return [
            (n, float(z.real), float(z.imag), float(res), int(w))
            for n, (z, res, w) in enumerate(zip(self.poles, self.residuals, self.windings))
        ]

    def as_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "A": self.A,
            "offset": self.offset,
            "small_offset": self.small_offset,
            "total_winding": self.total_winding,
            "off_ladder_winding": self.off_ladder_winding,
            "poles": [[z.real, z.imag] for z in self.poles],
            "small_zeros": [[z.real, z.imag] for z in self.small_zeros],
        }


def _ladder_boxes(rp: RadialProblem, center: float, rows: int) -> list[Box]:
    width = 3 * rp.lam * math.pi / rp.A
    step = math.pi / rp.A
    return [Box(center - width / 2, center + width / 2, k * step, (k + 1) * step) for k in range(rows)]


def _fit_offset(zeros: np.ndarray, A: float) -> int:
    labels = np.rint(zeros.imag * A / math.pi - 0.5)
    return int(np.median(labels - np.arange(zeros.size)))


def _sweep(rp: RadialProblem, which: str, center: float, count: int, rows: int, threads: int, model: Callable[[int], complex]):
    func = _Evaluator(rp, which)
    found: list[LocatedZero] = []
    total = 0
    built = 0
    while len(found) < count and built < count + 10:
        boxes = _ladder_boxes(rp, center, max(rows, built + count - len(found)))[built:]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda item: _locate(func, item[1], model(built + item[0])), enumerate(boxes)))
        for k, zeros in enumerate(results, start=built):
            if not zeros and k >= 5:
                raise PoleMissed(f"no zero of {which} certified in ladder box {k}")
            found.extend(zeros)
            total += sum(z.winding for z in zeros)
        built += len(boxes)
    found.sort(key=lambda z: z.value.imag)
    return found, total, built, func


def find_regge_poles(
    rp: RadialProblem,
    count: int,
    strip_height: float = 0.0,
    threads: int = 1,
    small_zeros: bool = True,
) -> ReggePoleSet:
    """Zeros of Delta (and optionally delta) in the upper half mu-plane.

    Boxes of height pi/A and width 3 lam pi/A are stacked along the
    predicted ladder; each carries an argument-principle certificate and its
    zero is polished with a secant iteration.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    model = AsymptoticModel.for_problem(rp)
    rows = max(count, math.ceil(strip_height * rp.A / math.pi))
    LOGGER.info("Searching %d Regge poles (lambda=%s, A=%s)", count, rp.lam, rp.A)
    found, total, built, func = _sweep(rp, "Delta", rp.lam * math.pi / rp.A, count, rows, threads, model.pole)
    poles = np.array([z.value for z in found])
    offset = _fit_offset(poles, rp.A)
    predicted = np.array([model.pole(n, offset) for n in range(poles.size)])

    width = 3 * rp.lam * math.pi / rp.A
    off_box = Box(rp.lam * math.pi / rp.A + width / 2, rp.lam * math.pi / rp.A + 1.5 * width, 0.0, built * math.pi / rp.A)
    off_ladder = winding_number(func, off_box).winding

    result = ReggePoleSet(
        poles=poles,
        residuals=np.array([z.residual for z in found]),
        windings=np.array([z.winding for z in found]),
        offset=offset,
        model_residuals=np.abs(poles - predicted),
        total_winding=total,
        off_ladder_winding=off_ladder,
        lam=rp.lam,
        A=rp.A,
    )
    if small_zeros:
        betas, _, _, _ = _sweep(rp, "delta", 0.0, count, rows, threads, model.small_zero)
        result.small_zeros = np.array([z.value for z in betas])
        result.small_offset = _fit_offset(result.small_zeros, rp.A)
    LOGGER.info("Certified %d poles, ladder offset p=%d", poles.size, offset)
    return result


def estimate_extent(poles: ReggePoleSet, skip: int = 5) -> float:
    """A from the Im-spacing pi/A of the ladder, ignoring the first ``skip`` poles."""
    spacing = np.diff(poles.poles.imag)[skip:]
    if spacing.size == 0:
        spacing = np.diff(poles.poles.imag)
    return float(math.pi / np.median(spacing))


def hadamard_reconstruct(
    poles: ReggePoleSet, G: complex, mu_sq: complex, truncation: int, tail: bool = False
) -> complex:
    """G * prod_{n < truncation} (1 - mu^2 / alpha_n^2), optionally times the model tail."""
    if truncation > poles.poles.size:
        raise ValueError(f"truncation {truncation} exceeds the {poles.poles.size} available poles")
    mu_sq = complex(mu_sq)
    factors = 1 - mu_sq / poles.poles[:truncation] ** 2
    value = G * np.prod(factors)
    if tail:
        start = truncation + poles.offset
        n = np.arange(start, start + TAIL_TERMS)
        ladder = poles.lam * math.pi / poles.A + 1j * (n + 0.5) * math.pi / poles.A
        value *= np.exp(np.sum(np.log1p(-mu_sq / ladder**2)))
    return complex(value)


@dataclass(slots=True)
class BoundsReport:
    imag_max_delta: float
    imag_max_small: float
    imag_log_slope: float
    real_threshold: float | None
    lower_bound_margin: float
    m_bound_margin: float
    m_threshold: float | None
    violations: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.lower_bound_margin >= -BOUND_SLACK and self.m_bound_margin <= BOUND_SLACK and self.real_threshold is not None

    def as_dict(self) -> dict[str, Any]:
        return {
            "imag_max_delta": self.imag_max_delta,
            "imag_max_small": self.imag_max_small,
            "imag_log_slope": self.imag_log_slope,
            "real_threshold": self.real_threshold,
            "lower_bound_margin": self.lower_bound_margin,
            "m_bound_margin": self.m_bound_margin,
            "m_threshold": self.m_threshold,
            "violations": self.violations,
            "passed": self.passed,
        }


def _tail_threshold(grid: np.ndarray, values: np.ndarray) -> tuple[float | None, list[float]]:
    """Smallest grid point beyond which ``values`` increase strictly."""
    rising = np.diff(values) > 0
    violations = [float(grid[i + 1]) for i in np.flatnonzero(~rising)]
    if rising.size == 0 or not rising[-1]:
        return None, violations
    last_bad = np.flatnonzero(~rising)
    start = 0 if last_bad.size == 0 else int(last_bad[-1]) + 1
    return float(grid[start]), violations


def bounds_report(rp: RadialProblem, real_grid: Sequence[float], imag_grid: Sequence[float]) -> BoundsReport:
    """Boundedness on the imaginary axis, tail monotonicity and lower bounds on the real axis."""
    real_grid = np.sort(np.asarray(real_grid, dtype=float))
    imag_grid = np.sort(np.asarray(imag_grid, dtype=float))
    imag = channel_functions_batch(rp, 1j * imag_grid)
    real = channel_functions_batch(rp, real_grid)
    delta_imag = np.array([abs(f.Delta) for f in imag])
    small_imag = np.array([abs(f.delta_small) for f in imag])
    slope = float(np.polyfit(imag_grid, np.log(delta_imag), 1)[0]) if imag_grid.size > 1 else 0.0
    delta_real = np.array([abs(f.Delta) for f in real])
    m_real = np.array([abs(f.M) for f in real])
    threshold, violations = _tail_threshold(real_grid, delta_real)
    m_threshold, _ = _tail_threshold(real_grid, m_real)
    lower = 2 * rp.lam * abs(rp.C10) * abs(rp.C11)
    m_bound = 1 / (2 * rp.lam * abs(rp.C10) ** 2)
    report = BoundsReport(
        imag_max_delta=float(np.max(delta_imag)),
        imag_max_small=float(np.max(small_imag)),
        imag_log_slope=slope,
        real_threshold=threshold,
        lower_bound_margin=float(np.min(delta_real) - lower),
        m_bound_margin=float(np.max(m_real) - m_bound),
        m_threshold=m_threshold,
        violations=violations,
    )
    LOGGER.info("Bounds: max|Delta| on iR %.4g, threshold mu*=%s", report.imag_max_delta, threshold)
    return report


def delta_at_zero(rp: RadialProblem) -> complex:
    """G = Delta(0) through the limit path."""
    return channel_functions(rp, 0.0).Delta
