"""Radial fundamental systems and the channel functions Delta, delta and M.

The radial equation is -u'' + q u = -mu^2 u with q = -(lam^2 + 1/4)/x^2 + q0
near x = 0 and the mirrored form near x = A.  Each end is solved in its
local coordinate r (r = x on the left, r = A - x on the right), where the
homogeneous part is solved by sqrt(r) I_{+-i lam}(mu r) and sqrt(r) K(mu r).

Two independent paths produce the same solutions:

* ``picard_fss`` sums the Volterra series S = sum g_k with
  g_{k+1}(r) = int_0^r G(r, t) q_end(t) g_k(t) dt on Gauss-Legendre panels,
* ``ode_fss`` integrates the equation with DOP853 from a small offset where
  the seeds are accurate, for many mu at once.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy.integrate import solve_ivp

from .const import DEFAULT_MATCH_TOL, DEFAULT_ODE_TOL, DEFAULT_PICARD_TOL
from .exceptions import LiouvilleError
from .metric import LiouvilleMetric, RadialPotential, radial_potential
from .specfun import BesselOrder, bessel_i_pair, bessel_k_pair, complex_gamma, imaginary_power

LOGGER = logging.getLogger(__name__)

LEFT = "left"
RIGHT = "right"

GAUSS_ORDER = 16
INNER_EDGE = 1e-12
MAX_DOUBLINGS = 4
MATCH_FRACTIONS = (0.5, 0.4, 0.6)
POLE_THRESHOLD = 1e-12
RICHARDSON_STEPS = (1e-2, 5e-3, 2.5e-3)

_NODES, _WEIGHTS = legendre.leggauss(GAUSS_ORDER)


class ZeroMomentum(LiouvilleError):
    """Raised when seeds are requested at mu = 0, a branch point of (mu/2)^(i lam)."""


class NoConvergence(LiouvilleError):
    """Raised when the Picard series has not converged after k_max terms."""


class QuadratureFailure(LiouvilleError):
    """Raised when the Volterra integrals do not settle under panel doubling."""


class StiffnessFailure(LiouvilleError):
    """Raised when the ODE integrator gives up, usually by step-size underflow."""


class AtReggePole(LiouvilleError):
    """Raised when Delta vanishes to working precision, so M is undefined."""

    def __init__(self, message: str, functions: ChannelFunctions) -> None:
        super().__init__(message)
        self.functions = functions


class DomainError(LiouvilleError):
    """Raised when the Green kernel is requested above the diagonal (t > x)."""


def _panel_operators() -> tuple[np.ndarray, np.ndarray]:
    """Cumulative-integration and differentiation matrices on [-1, 1] nodes."""
    vander = legendre.legvander(_NODES, GAUSS_ORDER - 1)
    inverse = np.linalg.inv(vander)
    antideriv = np.zeros((GAUSS_ORDER + 1, GAUSS_ORDER))
    deriv = np.zeros((GAUSS_ORDER, GAUSS_ORDER))
    for k in range(GAUSS_ORDER):
        unit = np.zeros(GAUSS_ORDER)
        unit[k] = 1.0
        antideriv[:, k] = legendre.legint(unit, lbnd=-1)
        column = legendre.legder(unit)
        deriv[: column.size, k] = column
    cumulative = legendre.legvander(_NODES, GAUSS_ORDER) @ antideriv @ inverse
    differentiate = vander @ deriv @ inverse
    return cumulative, differentiate


_CUMULATIVE, _DIFFERENTIATE = _panel_operators()


@dataclass(frozen=True, slots=True)
class RadialProblem:
    potential: RadialPotential
    C10: complex = 1.0
    C11: complex = 1.0
    picard_tol: float = DEFAULT_PICARD_TOL
    ode_tol: float = DEFAULT_ODE_TOL
    match_tol: float = DEFAULT_MATCH_TOL

    def __post_init__(self) -> None:
        if self.C10 == 0 or self.C11 == 0:
            raise ValueError("normalization constants C10 and C11 must be nonzero")

    @classmethod
    def from_metric(cls, metric: LiouvilleMetric, lam: float, **kwargs) -> RadialProblem:
        return cls(radial_potential(metric, lam), **kwargs)

    @property
    def lam(self) -> float:
        return self.potential.lam

    @property
    def A(self) -> float:
        return self.potential.A

    def constant(self, end: str) -> complex:
        return complex(self.C10 if end == LEFT else self.C11)

    def shifted(self, L: complex) -> RadialProblem:
        return replace(self, potential=self.potential.shifted(L))


@dataclass(frozen=True, slots=True)
class FssEvaluation:
    """Both solutions of one end on ``grid`` (ascending x).

    Row 0 holds S10 (left) or S11 (right), row 1 holds S20 or S21.
    """

    mu: complex
    end: str
    grid: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    method: str
    terms: int = 0
    term_norms: tuple[float, ...] = ()
    residual: float = math.nan

    def pair(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        return self.values[j], self.derivatives[j]


@dataclass(frozen=True, slots=True)
class ChannelFunctions:
    mu: complex
    Delta: complex
    delta_small: complex
    M: complex
    a1: complex
    match_spread: float = 0.0
    method: str = "picard"
    scale: float = 1.0

    @property
    def mu_sq(self) -> complex:
        return self.mu * self.mu


@dataclass(slots=True)
class SeedPair:
    """Seeds g1, g2 of one end with their x-derivatives."""

    lam: float
    mu: complex
    end: str
    constant: complex
    A: float
    first_factor: complex = field(init=False)
    second_factor: complex = field(init=False)

    def __post_init__(self) -> None:
        lam = self.lam
        self.first_factor = self.constant * complex_gamma(1 - 1j * lam) * imaginary_power(self.mu / 2, lam)
        self.second_factor = (
            complex_gamma(1 + 1j * lam) * imaginary_power(self.mu / 2, -lam) / (2j * lam * self.constant)
        )

    def local(self, r) -> np.ndarray:
        """(h1, h1', h2, h2') in the local coordinate r, derivatives in r."""
        r = np.asarray(r, dtype=float)
        z = self.mu * r
        minus, d_minus = bessel_i_pair(BesselOrder(self.lam, negative=True), z)
        plus, d_plus = bessel_i_pair(BesselOrder(self.lam), z)
        root = np.sqrt(r)
        return np.array(
            [
                self.first_factor * root * minus,
                self.first_factor * (minus / (2 * root) + root * self.mu * d_minus),
                self.second_factor * root * plus,
                self.second_factor * (plus / (2 * root) + root * self.mu * d_plus),
            ]
        )

    def evaluate(self, x) -> np.ndarray:
        """(g1, g1', g2, g2') at x, derivatives in x."""
        x = np.asarray(x, dtype=float)
        if self.end == LEFT:
            return self.local(x)
        return _to_right(self.local(self.A - x))


def _to_right(local: np.ndarray) -> np.ndarray:
    # S11(x) = h1(A - x), S21(x) = -h2(A - x) keeps W(S11, S21) = 1.
    h1, dh1, h2, dh2 = local
    return np.array([h1, -dh1, -h2, dh2])


def _check_mu(mu: complex) -> complex:
    mu = complex(mu)
    if mu == 0:
        raise ZeroMomentum("seeds are singular at mu = 0; use the limit path of channel_functions")
    if mu.real < 0:
        raise ValueError("mu must satisfy Re(mu) >= 0; reflect with -mu first")
    return mu


def picard_seeds(rp: RadialProblem, mu: complex, end: str = LEFT) -> SeedPair:
    mu = _check_mu(mu)
    return SeedPair(rp.lam, mu, end, rp.constant(end), rp.A)


def wronskian(f, g):
    """W(f, g) = f g' - f' g for (value, derivative) pairs."""
    return f[0] * g[1] - f[1] * g[0]


def fss_wronskian_defect(fss: FssEvaluation) -> float:
    """max |W - 1| over the grid, scaled by the size of the products in W."""
    first, second = fss.pair(0), fss.pair(1)
    value = wronskian(first, second)
    scale = np.maximum(1.0, np.abs(first[0] * second[1]) + np.abs(first[1] * second[0]))
    return float(np.max(np.abs(value - 1.0) / scale))


def green_kernel(x: float, t: float, mu: complex, lam: float) -> complex:
    if t > x:
        raise DomainError(f"Green kernel needs t <= x, got t={t}, x={x}")
    if t == x:
        return 0j
    mu = complex(mu)
    order = BesselOrder(lam)
    args = np.array([mu * x, mu * t])
    i_vals, _ = bessel_i_pair(order, args)
    k_vals, _ = bessel_k_pair(order, args)
    return complex(math.sqrt(x * t) * (i_vals[0] * k_vals[1] - i_vals[1] * k_vals[0]))


def _local_points(rp: RadialProblem, end: str, grid: np.ndarray) -> np.ndarray:
    return grid if end == LEFT else rp.A - grid


def _panel_edges(mu_abs: float, upper: float, A: float, points: np.ndarray) -> np.ndarray:
    start = INNER_EDGE * A
    geometric_end = min(0.5 / mu_abs if mu_abs else A / 16, A / 16, upper)
    edges = [start]
    while edges[-1] * 2 < geometric_end:
        edges.append(edges[-1] * 2)
    step = min(A / 16, 1.5 / mu_abs if mu_abs else A / 16)
    count = max(1, math.ceil((upper - geometric_end) / step))
    edges.extend(np.linspace(geometric_end, upper, count + 1))
    merged = np.unique(np.concatenate([edges, points]))
    keep = np.concatenate([[True], np.diff(merged) > 1e-14 * A])
    return merged[keep]


def _refine(edges: np.ndarray) -> np.ndarray:
    mids = (edges[:-1] + edges[1:]) / 2
    out = np.empty(edges.size + mids.size)
    out[0::2] = edges
    out[1::2] = mids
    return out


@dataclass(slots=True)
class _PicardResult:
    values: np.ndarray
    derivatives: np.ndarray
    terms: int
    term_norms: list[float]
    residual: float


def _picard_series(
    rp: RadialProblem, mu: complex, end: str, points: np.ndarray, edges: np.ndarray, k_max: int, tol: float
) -> _PicardResult:
    """Sum the Volterra series for both seeds of one end, in local coordinates."""
    lam = rp.lam
    seeds = SeedPair(lam, mu, end, rp.constant(end), rp.A)
    left, right = edges[:-1], edges[1:]
    half = (right - left) / 2
    nodes = (left + right)[:, None] / 2 + half[:, None] * _NODES[None, :]
    panel_of_point = np.searchsorted(edges, points) - 1

    order = BesselOrder(lam)
    i_nodes, di_nodes = bessel_i_pair(order, mu * nodes)
    k_nodes, dk_nodes = bessel_k_pair(order, mu * nodes)
    i_pts, di_pts = bessel_i_pair(order, mu * points)
    k_pts, dk_pts = bessel_k_pair(order, mu * points)
    root_nodes = np.sqrt(nodes)
    root_pts = np.sqrt(points)
    q_nodes = np.asarray(rp.potential.regular(end)(nodes.ravel()), dtype=complex).reshape(nodes.shape)

    seed_nodes = seeds.local(nodes)
    seed_pts = seeds.local(points)
    term = seed_nodes[[0, 2]]
    total = term.copy()
    total_d = seed_nodes[[1, 3]].copy()
    values = seed_pts[[0, 2]].copy()
    derivs = seed_pts[[1, 3]].copy()

    # Derivative weights of sqrt(r) I(mu r) and sqrt(r) K(mu r).
    di_weight_nodes = i_nodes / (2 * root_nodes) + root_nodes * mu * di_nodes
    dk_weight_nodes = k_nodes / (2 * root_nodes) + root_nodes * mu * dk_nodes
    di_weight_pts = i_pts / (2 * root_pts) + root_pts * mu * di_pts
    dk_weight_pts = k_pts / (2 * root_pts) + root_pts * mu * dk_pts

    norms: list[float] = []
    for k in range(1, k_max + 1):
        source = q_nodes * term
        f_k = root_nodes * k_nodes * source
        f_i = root_nodes * i_nodes * source
        j_k_nodes, j_k_pts = _cumulative(f_k, half, panel_of_point)
        j_i_nodes, j_i_pts = _cumulative(f_i, half, panel_of_point)

        term = root_nodes * (i_nodes * j_k_nodes - k_nodes * j_i_nodes)
        total += term
        total_d += di_weight_nodes * j_k_nodes - dk_weight_nodes * j_i_nodes
        step_vals = root_pts * (i_pts * j_k_pts - k_pts * j_i_pts)
        values += step_vals
        derivs += di_weight_pts * j_k_pts - dk_weight_pts * j_i_pts

        sup_term = np.max(np.abs(term), axis=(1, 2))
        sup_total = np.maximum(np.max(np.abs(total), axis=(1, 2)), np.finfo(float).tiny)
        point_ratio = np.max(np.abs(step_vals) / np.maximum(np.abs(values), np.finfo(float).tiny))
        ratio = float(max(np.max(sup_term / sup_total), point_ratio))
        norms.append(float(np.max(sup_term)))
        LOGGER.debug("Picard term %d (%s, mu=%s): ratio %.3e", k, end, mu, ratio)
        if ratio < tol:
            break
    else:
        raise NoConvergence(f"Picard series for mu={mu} ({end}) did not reach {tol:.1e} in {k_max} terms")

    residual = _collocation_residual(rp, mu, end, nodes, half, total, total_d)
    return _PicardResult(values, derivs, k, norms, residual)


def _cumulative(f: np.ndarray, half: np.ndarray, panel_of_point: np.ndarray):
    """int_0^r f at every node and at the panel edges listed in ``panel_of_point``."""
    within = half[None, :, None] * (f @ _CUMULATIVE.T)
    totals = half[None, :] * (f @ _WEIGHTS)
    inclusive = np.cumsum(totals, axis=1)
    exclusive = inclusive - totals
    return exclusive[..., None] + within, inclusive[:, panel_of_point]


def _collocation_residual(rp, mu, end, nodes, half, total, total_d) -> float:
    """Relative residual of u'' = (mu^2 + q) u away from the singular end."""
    outer = nodes[:, 0] >= nodes[-1, -1] / 8
    if not np.any(outer):
        return math.nan
    r = nodes[outer]
    second = (total_d[:, outer] @ _DIFFERENTIATE.T) / half[None, outer, None]
    coupling = rp.potential.coupling
    q = -coupling / r**2 + np.asarray(rp.potential.regular(end)(r.ravel()), dtype=complex).reshape(r.shape)
    rhs = (mu * mu + q) * total[:, outer]
    return float(np.max(np.abs(second - rhs)) / np.max(np.abs(rhs)))


def picard_fss(
    rp: RadialProblem,
    mu: complex,
    end: str = LEFT,
    grid: Sequence[float] | None = None,
    k_max: int = 200,
    tol: float | None = None,
) -> FssEvaluation:
    """Fundamental system of one end from the Volterra series.

    The panel set is doubled until the solutions at the grid points move by
    less than tol/10 (relative).
    """
    mu = _check_mu(mu)
    tol = rp.picard_tol if tol is None else tol
    if tol < 1e-12:
        raise ValueError("Picard tolerance must be at least 1e-12")
    grid = np.asarray(grid if grid is not None else [rp.A / 2], dtype=float)
    if np.any((grid <= 0) | (grid >= rp.A)):
        raise ValueError("grid points must lie inside (0, A)")
    local = _local_points(rp, end, grid)
    if np.any(local <= INNER_EDGE * rp.A):
        raise ValueError("grid points too close to the end being solved")
    order = np.argsort(local)
    points = local[order]
    edges = _panel_edges(abs(mu), float(points[-1]), rp.A, points)

    result = _picard_series(rp, mu, end, points, edges, k_max, tol)
    threshold = max(tol / 10, 1e-13)
    for doubling in range(MAX_DOUBLINGS):
        edges = _refine(edges)
        finer = _picard_series(rp, mu, end, points, edges, k_max, tol)
        change = float(np.max(np.abs(finer.values - result.values) / np.abs(finer.values)))
        LOGGER.debug("Panel doubling %d (%s, mu=%s): change %.3e", doubling + 1, end, mu, change)
        result = finer
        if change < threshold:
            break
    else:
        raise QuadratureFailure(
            f"Volterra integrals for mu={mu} ({end}) still change by {change:.3e} after {MAX_DOUBLINGS} doublings"
        )

    inverse = np.argsort(order)
    local_vals = np.array([result.values[0], result.derivatives[0], result.values[1], result.derivatives[1]])
    local_vals = local_vals[:, inverse]
    if end == RIGHT:
        local_vals = _to_right(local_vals)
    return FssEvaluation(
        mu=mu,
        end=end,
        grid=grid,
        values=local_vals[[0, 2]],
        derivatives=local_vals[[1, 3]],
        method="picard",
        terms=result.terms,
        term_norms=tuple(result.term_norms),
        residual=result.residual,
    )


@lru_cache(maxsize=64)
def _start_offset(potential: RadialPotential, end: str, tol: float) -> float:
    """Largest r0 = A/2^k with int_0^r0 t |q_end| dt / min(lam, 1) < tol."""
    offset = potential.A / 2
    weight = 1.0 / min(potential.lam, 1.0)
    while weight * potential.moment(end, offset) >= tol and offset > 1e-10 * potential.A:
        offset /= 2
    return offset


def _ode_batch(
    rp: RadialProblem, mus: np.ndarray, end: str, points: np.ndarray, offset: float, tol: float
) -> np.ndarray:
    """Local (h1, h1', h2, h2') at ascending ``points`` for every mu, shape (4, len(mus), len(points))."""
    count = mus.size
    start = np.empty((4, count), dtype=complex)
    for idx, mu in enumerate(mus):
        start[:, idx] = SeedPair(rp.lam, mu, end, rp.constant(end), rp.A).local(np.array([offset]))[:, 0]
    mu_sq = mus * mus
    coupling = rp.potential.coupling
    regular = rp.potential.regular(end)

    def rhs(r, y):
        u1, d1, u2, d2 = y.reshape(4, count)
        factor = mu_sq + (-coupling / (r * r) + complex(regular(np.array([r]))[0]))
        return np.concatenate([d1, factor * u1, d2, factor * u2])

    solution = solve_ivp(
        rhs,
        (offset, float(points[-1])),
        start.ravel(),
        method="DOP853",
        t_eval=points,
        rtol=tol,
        atol=tol * 1e-10,
    )
    if solution.status != 0:
        raise StiffnessFailure(f"ODE integration ({end}) failed near r={solution.t[-1]:.6g}: {solution.message}")
    return solution.y.reshape(4, count, points.size)


def ode_fss(
    rp: RadialProblem,
    mu: complex,
    end: str = LEFT,
    grid: Sequence[float] | None = None,
    x_start_offset: float | None = None,
    tol: float | None = None,
) -> FssEvaluation:
    mu = _check_mu(mu)
    tol = rp.ode_tol if tol is None else tol
    grid = np.asarray(grid if grid is not None else [rp.A / 2], dtype=float)
    offset = x_start_offset if x_start_offset is not None else _start_offset(rp.potential, end, tol)
    local = _local_points(rp, end, grid)
    if np.any(local <= offset):
        raise ValueError(f"grid points must lie beyond the start offset {offset:.3e}")
    order = np.argsort(local)
    raw = _ode_batch(rp, np.array([mu]), end, local[order], offset, tol)[:, 0, :]
    raw = raw[:, np.argsort(order)]
    if end == RIGHT:
        raw = _to_right(raw)
    return FssEvaluation(mu=mu, end=end, grid=grid, values=raw[[0, 2]], derivatives=raw[[1, 3]], method="ode")


def match_points(A: float, x_match: float | None = None) -> np.ndarray:
    if x_match is None:
        return np.array([A * f for f in MATCH_FRACTIONS])
    if not 0 < x_match < A:
        raise ValueError("x_match must lie inside (0, A)")
    # two more points 0.1A or 0.2A away, all inside [0.05A, 0.95A]
    candidates = [x_match + d * A for d in (-0.1, 0.1, -0.2, 0.2)]
    others = [x for x in candidates if 0.05 * A <= x <= 0.95 * A][:2]
    return np.array([x_match, *others])


def _assemble(mu: complex, left: np.ndarray, right: np.ndarray, method: str, match_tol: float) -> ChannelFunctions:
    """Channel functions from (4, npoints) arrays (S, S', S2, S2') of both ends."""
    s10 = (left[0], left[1])
    s20 = (left[2], left[3])
    s11 = (right[0], right[1])
    s21 = (right[2], right[3])
    deltas = wronskian(s11, s10)
    smalls = wronskian(s11, s20)
    a1s = wronskian(s10, s21)
    Delta, delta_small, a1 = complex(deltas[0]), complex(smalls[0]), complex(a1s[0])
    spread = max(
        float(np.max(np.abs(deltas - Delta))) / max(abs(Delta), np.finfo(float).tiny),
        float(np.max(np.abs(smalls - delta_small))) / max(abs(delta_small), np.finfo(float).tiny),
    )
    scale = float(abs(s11[0][0] * s10[1][0]) + abs(s11[1][0] * s10[0][0]))
    if spread > match_tol:
        LOGGER.warning("Wronskian match spread %.3e at mu=%s exceeds %.1e", spread, mu, match_tol)
    M = -delta_small / Delta if abs(Delta) >= POLE_THRESHOLD * scale else complex(math.nan, math.nan)
    return ChannelFunctions(mu, Delta, delta_small, M, a1, spread, method, scale)


def _pick_method(mu: complex, method: str) -> str:
    if method != "auto":
        return method
    return "picard" if mu.imag == 0 and mu.real > 0 else "ode"


def _end_values(rp: RadialProblem, mu: complex, end: str, xs: np.ndarray, method: str) -> np.ndarray:
    solver = picard_fss if method == "picard" else ode_fss
    fss = solver(rp, mu, end, xs)
    return np.array([fss.values[0], fss.derivatives[0], fss.values[1], fss.derivatives[1]])


def _limit_at_zero(rp: RadialProblem, xs: np.ndarray, method: str) -> ChannelFunctions:
    """Richardson extrapolation in mu^2 of Delta, delta and a1 from small real mu."""
    samples = [channel_functions(rp, h, x_match=xs[0], method=method, raise_on_pole=False) for h in RICHARDSON_STEPS]

    def extrapolate(values: list[complex]) -> complex:
        first = [(4 * values[i + 1] - values[i]) / 3 for i in range(2)]
        return (16 * first[1] - first[0]) / 15

    Delta = extrapolate([s.Delta for s in samples])
    delta_small = extrapolate([s.delta_small for s in samples])
    a1 = extrapolate([s.a1 for s in samples])
    spread = max(s.match_spread for s in samples)
    return ChannelFunctions(0j, Delta, delta_small, -delta_small / Delta, a1, spread, "richardson", samples[-1].scale)


def channel_functions(
    rp: RadialProblem,
    mu: complex,
    x_match: float | None = None,
    method: str = "auto",
    raise_on_pole: bool = True,
) -> ChannelFunctions:
    """Delta = W(S11, S10), delta = W(S11, S20) and M = -delta/Delta at one mu.

    The Wronskians are taken at three match points; the first one is
    reported and the relative spread across them is kept as ``match_spread``.
    Values depend on mu^2 only, so Re(mu) < 0 is reflected to -mu.
    """
    mu = complex(mu)
    if mu.real < 0 or (mu.real == 0 and mu.imag < 0):
        mu = -mu
    xs = match_points(rp.A, x_match)
    if mu == 0:
        return _limit_at_zero(rp, xs, "picard" if method == "auto" else method)
    chosen = _pick_method(mu, method)
    left = _end_values(rp, mu, LEFT, xs, chosen)
    right = _end_values(rp, mu, RIGHT, xs, chosen)
    functions = _assemble(mu, left, right, chosen, rp.match_tol)
    if raise_on_pole and math.isnan(functions.M.real):
        raise AtReggePole(f"|Delta| = {abs(functions.Delta):.3e} at mu={mu}", functions)
    return functions


def channel_functions_batch(rp: RadialProblem, mus, x_match: float | None = None) -> list[ChannelFunctions]:
    """Channel functions along many mu with one ODE integration per end.

    Points at Regge poles come back with M = nan instead of raising.
    """
    raw = np.atleast_1d(np.asarray(mus, dtype=complex))
    flip = (raw.real < 0) | ((raw.real == 0) & (raw.imag < 0))
    reps = np.where(flip, -raw, raw)
    xs = match_points(rp.A, x_match)
    results: list[ChannelFunctions | None] = [None] * reps.size
    nonzero = np.flatnonzero(reps != 0)
    for idx in np.flatnonzero(reps == 0):
        results[idx] = _limit_at_zero(rp, xs, "picard")
    if nonzero.size:
        ends = {}
        for end in (LEFT, RIGHT):
            offset = _start_offset(rp.potential, end, rp.ode_tol)
            local = _local_points(rp, end, xs)
            order = np.argsort(local)
            data = _ode_batch(rp, reps[nonzero], end, local[order], offset, rp.ode_tol)
            data = data[:, :, np.argsort(order)]
            ends[end] = _to_right(data) if end == RIGHT else data
        for pos, idx in enumerate(nonzero):
            results[idx] = _assemble(
                complex(reps[idx]), ends[LEFT][:, pos, :], ends[RIGHT][:, pos, :], "ode", rp.match_tol
            )
    return results
