"""Liouville metrics (a(x) - b(y))(dx^2 + dy^2) with two hyperbolic ends.

a and b are sympy expressions in one variable, optionally plus a tabulated
B-spline.  The regular parts a(x) - 1/x^2 and a(A - s) - 1/s^2 are formed
symbolically so the 1/x^2 terms cancel exactly instead of in floating point.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping

import numpy as np
import sympy as sp
from sympy.functions.combinatorial.numbers import stirling
from scipy import integrate
from scipy.interpolate import make_interp_spline

from .config import MetricConfig
from .const import (
    DEFAULT_ANGULAR_POINTS,
    DEFAULT_RADIAL_POINTS,
    FAMILY_HYPERBOLIC_BUMP,
    FAMILY_ONE_ENDED,
    FAMILY_TABULATED,
)
from .exceptions import LiouvilleError

LOGGER = logging.getLogger(__name__)

X = sp.Symbol("x", real=True)

REFINEMENT_SPANS = (14.0, 18.0, 22.0)
STABILITY_FACTOR = 1.10
PERIODICITY_TOL = 1e-8


class InvalidFamily(LiouvilleError):
    """Raised when a metric family is unknown or its parameters are unusable."""


class PositivityViolation(LiouvilleError):
    """Raised when a(x) - b(y) is not positive somewhere on the validation grid."""

    def __init__(self, message: str, x: float, y: float, value: float) -> None:
        super().__init__(message)
        self.x = x
        self.y = y
        self.value = value


class AhlsViolation(LiouvilleError):
    """Raised when a metric fails the hyperbolic end bounds or periodicity."""

    def __init__(self, message: str, report: ValidationReport) -> None:
        super().__init__(message)
        self.report = report


class ZeroEnergy(LiouvilleError):
    """Raised when a computation needs a nonzero energy lambda."""


def _vectorize(expr: sp.Expr) -> Callable[[np.ndarray], np.ndarray]:
    func = sp.lambdify(X, expr, modules="numpy")

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = func(x)
        if np.ndim(out) == 0:
            return np.full(x.shape, float(out))
        return np.asarray(out, dtype=float)

    return evaluate


class Profile:
    """A smooth function of one variable: symbolic part plus optional spline.

    With ``mirror`` set the spline is read at mirror - x, which is how the
    right-end regular part reuses the left-end samples.
    """

    def __init__(self, expr: sp.Expr, spline=None, mirror: float | None = None) -> None:
        self.expr = sp.sympify(expr)
        self.spline = spline
        self.mirror = mirror
        self._cache: dict[int, Callable[[np.ndarray], np.ndarray]] = {}

    def __repr__(self) -> str:
        extra = " + spline" if self.spline is not None else ""
        return f"Profile({self.expr}{extra})"

    def derivative(self, order: int = 0) -> Callable[[np.ndarray], np.ndarray]:
        if order not in self._cache:
            symbolic = _vectorize(sp.diff(self.expr, X, order) if order else self.expr)
            spline = self.spline
            if spline is None:
                self._cache[order] = symbolic
            else:
                mirror = self.mirror
                sign = (-1.0) ** order if mirror is not None else 1.0
                piece = spline.derivative(order) if 0 < order <= spline.k else spline
                vanishes = order > spline.k

                def evaluate(x, symbolic=symbolic, piece=piece):
                    x = np.asarray(x, dtype=float)
                    base = symbolic(x)
                    if vanishes:
                        return base
                    arg = mirror - x if mirror is not None else x
                    return base + sign * piece(arg)

                self._cache[order] = evaluate
        return self._cache[order]

    def __call__(self, x):
        return self.derivative(0)(x)


@dataclass(frozen=True, slots=True)
class LiouvilleMetric:
    """Metric data on (0, A) x (0, B) with its end decompositions."""

    A: float
    B: float
    a: Profile
    b: Profile
    regular_left: Profile
    regular_right: Profile
    eps0: float = 1.0
    eps1: float = 1.0
    delta: float = 0.1
    config: MetricConfig | None = None

    @property
    def family(self) -> str:
        return self.config.family if self.config else "custom"

    def a_minus_b(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.a(x)[:, None] - self.b(y)[None, :]


@dataclass(frozen=True, slots=True)
class RadialPotential:
    """q(x) = -(lam^2 + 1/4) a(x) + offset, with q0 and q1 its regular end parts.

    ``offset`` is the constant L of a literal shift q -> q + L; it is zero for
    potentials coming straight from a metric.
    """

    lam: float
    A: float
    a: Profile
    regular_left: Profile
    regular_right: Profile
    offset: complex = 0.0

    @property
    def coupling(self) -> float:
        return self.lam * self.lam + 0.25

    def q(self, x):
        return -self.coupling * self.a(x) + self.offset

    def q0(self, x):
        """q(x) + (lam^2 + 1/4)/x^2, bounded near x = 0."""
        return -self.coupling * self.regular_left(x) + self.offset

    def q1(self, s):
        """q(A - s) + (lam^2 + 1/4)/s^2, bounded near s = 0."""
        return -self.coupling * self.regular_right(s) + self.offset

    def regular(self, end: str) -> Callable:
        return self.q0 if end == "left" else self.q1

    def shifted(self, L: complex) -> RadialPotential:
        return replace(self, offset=self.offset + L)

    def moment(self, end: str = "left", upper: float | None = None) -> float:
        """int_0^upper t |q_end(t)| dt, computed in the variable log t."""
        upper = self.A / 2 if upper is None else upper
        func = self.regular(end)

        def integrand(u: float) -> float:
            t = math.exp(u)
            return t * t * abs(complex(func(np.array([t]))[0]))

        value, _ = integrate.quad(integrand, math.log(upper) - 60.0, math.log(upper), limit=200)
        return value


@dataclass(frozen=True, slots=True)
class ValidationGrid:
    angular_points: int = DEFAULT_ANGULAR_POINTS
    radial_points: int = DEFAULT_RADIAL_POINTS
    spans: tuple[float, ...] = REFINEMENT_SPANS

    def ends(self, A: float, span: float) -> np.ndarray:
        """Distances to an end, x = A * sigmoid(u), kept up to A/2."""
        u = np.linspace(-span, span, self.radial_points)
        dist = A / (1.0 + np.exp(-u))
        return dist[dist <= A / 2]


@dataclass(slots=True)
class BoundCheck:
    end: str
    alpha: int
    n: int
    constant: float
    ratio: float
    constants: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.ratio) and self.ratio <= STABILITY_FACTOR)


@dataclass(slots=True)
class ValidationReport:
    min_a_minus_b: float
    argmin: tuple[float, float]
    periodicity_defects: list[float] = field(default_factory=list)
    bounds: list[BoundCheck] = field(default_factory=list)

    @property
    def positive(self) -> bool:
        return bool(self.min_a_minus_b > 0)

    @property
    def periodic(self) -> bool:
        return all(defect <= PERIODICITY_TOL for defect in self.periodicity_defects)

    @property
    def passed(self) -> bool:
        return self.positive and self.periodic and all(check.passed for check in self.bounds)

    def failures(self) -> list[str]:
        found = []
        if not self.positive:
            found.append(f"a - b = {self.min_a_minus_b:.3e} at (x, y) = {self.argmin}")
        for order, defect in enumerate(self.periodicity_defects):
            if defect > PERIODICITY_TOL:
                found.append(f"b is not periodic at derivative order {order} (defect {defect:.3e})")
        for check in self.bounds:
            if not check.passed:
                found.append(
                    f"{check.end} end bound (alpha={check.alpha}, n={check.n}) ratio {check.ratio:.3g}"
                )
        return found

    def as_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "positive": self.positive,
            "periodic": self.periodic,
            "min_a_minus_b": self.min_a_minus_b,
            "argmin": list(self.argmin),
            "periodicity_defects": self.periodicity_defects,
            "bounds": [
                {
                    "end": check.end,
                    "alpha": check.alpha,
                    "n": check.n,
                    "constant": check.constant,
                    "ratio": check.ratio,
                    "constants": list(check.constants),
                    "passed": check.passed,
                }
                for check in self.bounds
            ],
            "failures": self.failures(),
        }


def _bump(u: sp.Expr) -> sp.Expr:
    return sp.Piecewise((sp.exp(1 - 1 / (1 - u**2)), u**2 < 1), (0, True))


def _param(params: Mapping[str, Any], key: str, default: float) -> float:
    value = params.get(key, default)
    if isinstance(value, list):
        raise InvalidFamily(f"parameter {key} must be a number")
    return float(value)


def _angular_expr(B: float, params: Mapping[str, Any]) -> sp.Expr:
    omega = _param(params, "angular_frequency", 2 * math.pi / B)
    return (
        _param(params, "beta", 0.0) * sp.sin(omega * X)
        + _param(params, "beta_cos", 0.0) * sp.cos(omega * X)
        + _param(params, "beta2", 0.0) * sp.cos(2 * omega * X)
        + _param(params, "shift", 0.0)
    )


def _radial_extra(A: float, params: Mapping[str, Any]) -> sp.Expr:
    height = _param(params, "height", 0.0)
    center = _param(params, "center", 0.5 * A)
    width = _param(params, "width", 0.25 * A)
    if width <= 0:
        raise InvalidFamily("bump width must be positive")
    expr = _param(params, "shift", 0.0) + _param(params, "a_shift", 0.0)
    if height:
        expr = expr + height * _bump((X - center) / width)
    spike = _param(params, "end_spike", 0.0)
    if spike:
        expr = expr + spike * X ** sp.Rational(-5, 2)
    return expr


def _tabulated(config: MetricConfig):
    params = config.params
    order = int(_param(params, "spline_order", 5))
    try:
        nodes = np.asarray(params["radial_nodes"], dtype=float)
        values = np.asarray(params["radial_values"], dtype=float)
        angular = np.asarray(params["angular_values"], dtype=float)
    except KeyError as err:
        raise InvalidFamily(f"tabulated family needs parameter {err.args[0]}") from err
    if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size <= order:
        raise InvalidFamily("radial_nodes and radial_values must be equal-length lists longer than the spline order")
    if np.any(np.diff(nodes) <= 0) or nodes[0] < 0 or nodes[-1] > config.A:
        raise InvalidFamily("radial_nodes must increase strictly inside [0, A]")
    if angular.size <= order:
        raise InvalidFamily("angular_values needs more samples than the spline order")
    radial_spline = make_interp_spline(nodes, values, k=order)
    y = np.linspace(0.0, config.B, angular.size + 1)
    angular_spline = make_interp_spline(y, np.append(angular, angular[0]), k=order, bc_type="periodic")
    return radial_spline, angular_spline


def build_metric(config: MetricConfig, grid: ValidationGrid | None = None) -> LiouvilleMetric:
    """Instantiate a metric family and check it.

    Positivity of a - b is always enforced; the end bounds and periodicity
    only when ``config.validate`` is set.
    """
    A = sp.Float(config.A)
    B = config.B
    spline = b_spline = None
    if config.family == FAMILY_HYPERBOLIC_BUMP:
        a_expr = X**-2 + (A - X) ** -2 + _radial_extra(config.A, config.params)
        b_expr = _angular_expr(B, config.params)
    elif config.family == FAMILY_ONE_ENDED:
        a_expr = X**-2 + _param(config.params, "shift", 0.0)
        b_expr = _angular_expr(B, config.params)
    elif config.family == FAMILY_TABULATED:
        spline, b_spline = _tabulated(config)
        a_expr = X**-2 + (A - X) ** -2 + _param(config.params, "shift", 0.0)
        b_expr = sp.Float(_param(config.params, "shift", 0.0))
    else:
        raise InvalidFamily(f"unknown metric family {config.family!r}")

    left = a_expr - X**-2
    right = a_expr.subs(X, A - X) - X**-2
    metric = LiouvilleMetric(
        A=config.A,
        B=B,
        a=Profile(a_expr, spline),
        b=Profile(b_expr, b_spline),
        regular_left=Profile(left, spline),
        regular_right=Profile(right, spline, mirror=config.A),
        eps0=config.eps0,
        eps1=config.eps1,
        delta=config.delta,
        config=config,
    )
    LOGGER.debug("Built %s metric: a = %s, b = %s", config.family, a_expr, b_expr)

    grid = grid or ValidationGrid()
    value, x, y = _positivity(metric, grid)
    if value <= 0:
        raise PositivityViolation(
            f"a(x) - b(y) = {value:.4g} <= 0 at x = {x:.6g}, y = {y:.6g}", x, y, value
        )
    if config.validate:
        report = validate_ahls(metric, grid)
        if not report.passed:
            raise AhlsViolation("; ".join(report.failures()), report)
    return metric


def _positivity(metric: LiouvilleMetric, grid: ValidationGrid) -> tuple[float, float, float]:
    dist = grid.ends(metric.A, grid.spans[0])
    x = np.concatenate([dist, metric.A - dist[::-1]])
    y = np.linspace(0.0, metric.B, grid.angular_points, endpoint=False)
    values = metric.a_minus_b(x, y)
    i, j = np.unravel_index(np.argmin(values), values.shape)
    return float(values[i, j]), float(x[i]), float(y[j])


def _end_derivative(regular: Profile, b_vals: list[np.ndarray], x: np.ndarray, alpha: int, n: int) -> np.ndarray:
    """(x d/dx)^n d_y^alpha [x^2 (r(x) - b(y))] on the product grid, r the regular part."""
    if alpha:
        return -(2.0**n) * (x**2)[:, None] * b_vals[alpha][None, :]
    total = np.zeros((x.size, b_vals[0].size))
    for j in range(n + 1):
        weight = float(stirling(n, j))
        if weight == 0:
            continue
        # d^j/dx^j of x^2 (r - b) by Leibniz; x^2 has three nonzero derivatives.
        part = np.zeros_like(total)
        for i, factor in ((0, x**2), (1, 2 * x), (2, np.full_like(x, 2.0))):
            if i > j:
                break
            m = j - i
            inner = regular.derivative(m)(x)[:, None]
            if m == 0:
                inner = inner - b_vals[0][None, :]
            part += math.comb(j, i) * factor[:, None] * inner
        total += weight * (x**j)[:, None] * part
    return total


def validate_ahls(metric: LiouvilleMetric, grid: ValidationGrid | None = None, max_order: int = 2) -> ValidationReport:
    """Sampled check of positivity, periodicity of b and the two end bounds.

    For every alpha + n <= max_order and both ends the constant C of
    |d_y^alpha (x d_x)^n [x^2 (a - b) - 1]| <= C (1 + |log x|)^(-1 - eps - n)
    is fitted on the coarsest grid; the ratio reported is the worst excess
    over that constant seen on the refined grids.
    """
    grid = grid or ValidationGrid()
    value, x, y = _positivity(metric, grid)
    report = ValidationReport(min_a_minus_b=value, argmin=(x, y))

    for order in range(max_order + 1):
        ends = metric.b.derivative(order)(np.array([0.0, metric.B]))
        scale = 1.0 + abs(ends[0])
        report.periodicity_defects.append(float(abs(ends[1] - ends[0]) / scale))

    y_grid = np.linspace(0.0, metric.B, grid.angular_points, endpoint=False)
    b_vals = [metric.b.derivative(k)(y_grid) for k in range(max_order + 1)]
    sides = (("left", metric.regular_left, metric.eps0), ("right", metric.regular_right, metric.eps1))
    for end, regular, eps in sides:
        for alpha in range(max_order + 1):
            for n in range(max_order + 1 - alpha):
                peaks = []
                for span in grid.spans:
                    dist = grid.ends(metric.A, span)
                    lhs = np.max(np.abs(_end_derivative(regular, b_vals, dist, alpha, n)), axis=1)
                    envelope = (1.0 + np.abs(np.log(dist))) ** (-1.0 - eps - n)
                    with np.errstate(invalid="ignore"):
                        peaks.append(float(np.nanmax(lhs / envelope)) if np.all(np.isfinite(lhs)) else math.inf)
                constant = peaks[0]
                if constant == 0:
                    ratio = 0.0 if max(peaks) == 0 else math.inf
                else:
                    ratio = max(peaks) / constant
                report.bounds.append(BoundCheck(end, alpha, n, constant, ratio, tuple(peaks)))
                LOGGER.debug("%s end (alpha=%d, n=%d): C=%.4g ratio=%.4g", end, alpha, n, constant, ratio)
    return report


def radial_potential(metric: LiouvilleMetric, lam: float) -> RadialPotential:
    if lam == 0:
        raise ZeroEnergy("the radial potential needs lambda != 0")
    return RadialPotential(
        lam=abs(float(lam)),
        A=metric.A,
        a=metric.a,
        regular_left=metric.regular_left,
        regular_right=metric.regular_right,
    )


def end_area(metric: LiouvilleMetric, eps: float) -> float:
    """Area of {eps < x < A/2, 0 < y < B}, split as B int a dx - (A/2 - eps) int b dy."""
    half = metric.A / 2
    if eps >= half:
        return 0.0
    if eps <= 0:
        raise ValueError("eps must be positive")

    def regular(u: float) -> float:
        t = math.exp(u)
        return t * float(metric.regular_left(np.array([t]))[0])

    radial, _ = integrate.quad(regular, math.log(eps), math.log(half), limit=200)
    angular, _ = integrate.quad(lambda y: float(metric.b(np.array([y]))[0]), 0.0, metric.B, limit=200)
    singular = 1.0 / eps - 1.0 / half
    return metric.B * (singular + radial) - (half - eps) * angular


def shifted_config(config: MetricConfig, C: float, radial_only: bool = False) -> MetricConfig:
    """(a + C, b + C), or (a + C, b) with ``radial_only`` to break the gauge."""
    key = "a_shift" if radial_only else "shift"
    return config.with_params(**{key: float(config.params.get(key, 0.0)) + C})
