"""Complex gamma and modified Bessel functions of purely imaginary order.

Only the orders needed by the radial problem are supported: nu = +i*lambda and
nu = -i*lambda (plus nu = 0 for I, as a degenerate test path).  Arguments live
in the closed right half-plane.

Evaluation paths for I:

* power series for |z| <= Z_SWITCH when it does not cancel,
* the large-argument expansion with both exponentials beyond Z_SWITCH, or from
  ASYMPTOTIC_RADIUS up when the series would cancel,
* mpmath for the remaining small, cancelling points.

K uses the large-argument expansion from ASYMPTOTIC_RADIUS up, the
(I_{-nu} - I_nu) / sin(nu pi) difference where it keeps enough digits, and the
integral K_{i lam}(z) = int_0^inf exp(-z cosh t) cos(lam t) dt otherwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import mpmath
import numpy as np
from scipy.special import loggamma

from .exceptions import LiouvilleError

LOGGER = logging.getLogger(__name__)

Z_SWITCH = 30.0
ASYMPTOTIC_RADIUS = 17.0
SERIES_TERMS = 120
ASYMPTOTIC_TERMS = 40
SERIES_LOSS_DIGITS = 3.0
DIFFERENCE_LOSS_DIGITS = 3.0
CANCELLATION_DIGITS = 8.0
QUADRATURE_ARG_MARGIN = 0.2
QUADRATURE_CHUNK = 2048
MP_DPS = 40
POLE_TOLERANCE = 1e-12
DEFAULT_PRECISION = 1e-13

Method = Literal["auto", "series", "asymptotic", "difference", "integral", "mpmath"]


class PoleOfGamma(LiouvilleError):
    """Raised when the gamma function is requested at a non-positive integer."""


class NonConvergence(LiouvilleError):
    """Raised when a Bessel series or expansion misses the requested precision."""


class CatastrophicCancellation(LiouvilleError):
    """Raised when the I_{-nu} - I_nu difference loses more than eight digits."""


@dataclass(frozen=True, slots=True)
class BesselOrder:
    """Order nu = i*lam, or nu = -i*lam when ``negative`` is set.

    A negative ``lam`` is folded onto the positive one by flipping the branch,
    I_{i(-lam)} being I_{-i lam}.
    """

    lam: float
    negative: bool = False

    def __post_init__(self) -> None:
        lam = float(self.lam)
        if lam < 0:
            object.__setattr__(self, "lam", -lam)
            object.__setattr__(self, "negative", not self.negative)
        else:
            object.__setattr__(self, "lam", lam)

    @property
    def nu(self) -> complex:
        return (-1j if self.negative else 1j) * self.lam

    def flipped(self) -> BesselOrder:
        return BesselOrder(self.lam, not self.negative)


def complex_gamma(z: complex) -> complex:
    """Gamma function for complex arguments.

    scipy's ``loggamma`` already applies the reflection formula left of
    Re z = 1/2 and a recurrence shift before its Stirling series, which keeps
    the relative error of exp(loggamma) near 1e-14 for |z| <= 50.
    """
    z = complex(z)
    nearest = round(z.real)
    if nearest <= 0 and abs(z - nearest) < POLE_TOLERANCE:
        raise PoleOfGamma(f"Gamma has a pole at z = {nearest}")
    return complex(np.exp(loggamma(z)))


def _check_precision(precision: float) -> None:
    if not 0.0 < precision <= 1e-6:
        raise ValueError(f"precision must lie in (0, 1e-6], got {precision}")


def _eval_points(z, allow_zero: bool = False) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(arr.real < -1e-14 * np.abs(arr)):
        raise ValueError("Bessel arguments must satisfy Re(z) >= 0")
    if not allow_zero and np.any(arr == 0):
        raise ValueError("Bessel functions of imaginary order are singular at z = 0")
    return arr


def _unwrap(values: np.ndarray, like):
    if np.ndim(like) == 0:
        return complex(values.reshape(-1)[0])
    return values.reshape(np.shape(like))


def _series(nu: complex, z: np.ndarray, precision: float):
    """Power series of I_nu and I_nu' with the number of digits lost to cancellation."""
    quarter = (z / 2.0) ** 2
    term = np.full(z.shape, 1.0 / complex_gamma(nu + 1.0), dtype=complex)
    total = term.copy()
    dtotal = nu * term
    peak = np.abs(term)
    last = np.abs(term)
    for k in range(1, SERIES_TERMS + 1):
        term = term * quarter / (k * (k + nu))
        total += term
        dtotal += (2 * k + nu) * term
        last = np.abs(term)
        peak = np.maximum(peak, last)
        if np.all(last <= 1e-17 * peak):
            break
    scale = np.maximum(np.abs(total), np.finfo(float).tiny)
    residual = last / scale
    with np.errstate(divide="ignore"):
        loss = np.log10(peak / scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        prefactor = np.exp(nu * np.log(z / 2.0))
        value = prefactor * total
        derivative = prefactor * dtotal / z
    if nu == 0:
        value = np.where(z == 0, 1.0 + 0j, value)
        derivative = np.where(z == 0, 0j, derivative)
    if np.any(residual > precision):
        worst = float(np.max(residual))
        raise NonConvergence(f"I series residual {worst:.3e} exceeds precision {precision:.1e}")
    return value, derivative, loss


def _asymptotic_sums(nu: complex, z: np.ndarray, precision: float):
    """Optimally truncated sums of the large-argument expansion.

    Returns the alternating sum, the plain sum, and their companions for the
    derivatives of e^{z} z^{-1/2} sum and e^{-z} z^{-1/2} sum.
    """
    inv = 1.0 / z
    mu4 = 4.0 * nu * nu
    coeff = 1.0 + 0j
    power = np.ones(z.shape, dtype=complex)
    alt = np.zeros(z.shape, dtype=complex)
    plain = np.zeros(z.shape, dtype=complex)
    d_alt = np.zeros(z.shape, dtype=complex)
    d_plain = np.zeros(z.shape, dtype=complex)
    active = np.ones(z.shape, dtype=bool)
    smallest = np.full(z.shape, np.inf)
    for k in range(ASYMPTOTIC_TERMS):
        if k:
            coeff *= (mu4 - (2 * k - 1) ** 2) / (8.0 * k)
            power = power * inv
        term = coeff * power
        size = np.abs(term)
        active &= size < smallest
        if not np.any(active):
            break
        sign = -1.0 if k % 2 else 1.0
        grow = 1.0 - (k + 0.5) * inv
        decay = 1.0 + (k + 0.5) * inv
        alt += np.where(active, sign * term, 0)
        plain += np.where(active, term, 0)
        d_alt += np.where(active, sign * term * grow, 0)
        d_plain += np.where(active, term * decay, 0)
        smallest = np.where(active, size, smallest)
        if np.all(smallest < 1e-17):
            break
    if np.any(smallest > precision):
        worst = float(np.max(smallest))
        raise NonConvergence(
            f"large-argument expansion stalls at {worst:.3e}; |z| too small for precision {precision:.1e}"
        )
    return alt, plain, d_alt, d_plain


def _asymptotic_i(nu: complex, z: np.ndarray, precision: float):
    alt, plain, d_alt, d_plain = _asymptotic_sums(nu, z, precision)
    # Stokes multiplier of the recessive exponential: upper and lower sector
    # forms off the real axis, their mean on it.
    upper = 1j * np.exp(1j * nu * np.pi)
    lower = -1j * np.exp(-1j * nu * np.pi)
    recessive = np.where(z.imag > 0, upper, np.where(z.imag < 0, lower, -np.sin(nu * np.pi)))
    root = np.sqrt(2.0 * np.pi * z)
    grow = np.exp(z)
    decay = np.exp(-z)
    value = (grow * alt + recessive * decay * plain) / root
    derivative = (grow * d_alt - recessive * decay * d_plain) / root
    return value, derivative


def _asymptotic_k(nu: complex, z: np.ndarray, precision: float):
    _, plain, _, d_plain = _asymptotic_sums(nu, z, precision)
    front = np.sqrt(np.pi / (2.0 * z)) * np.exp(-z)
    return front * plain, -front * d_plain


def _mp_pairs(kind: str, nu: complex, z: np.ndarray):
    values = np.empty(z.shape, dtype=complex)
    derivs = np.empty(z.shape, dtype=complex)
    func = mpmath.besseli if kind == "i" else mpmath.besselk
    sign = 1 if kind == "i" else -1
    with mpmath.workdps(MP_DPS):
        order = mpmath.mpc(nu.real, nu.imag)
        for idx, point in np.ndenumerate(z):
            arg = mpmath.mpc(point.real, point.imag)
            values[idx] = complex(func(order, arg))
            derivs[idx] = complex(sign * (func(order - 1, arg) + func(order + 1, arg)) / 2)
    return values, derivs


def _k_integral(lam: float, z: np.ndarray):
    """K_{i lam} and its derivative from the trapezoidal rule on the cosh integral.

    The integrand is analytic in the strip |Im t| < pi/2 - |arg z|, so the
    step is chosen from the narrowest strip of the batch.
    """
    values = np.empty(z.shape, dtype=complex)
    derivs = np.empty(z.shape, dtype=complex)
    flat = z.reshape(-1)
    out_v = values.reshape(-1)
    out_d = derivs.reshape(-1)
    for start in range(0, flat.size, QUADRATURE_CHUNK):
        chunk = flat[start : start + QUADRATURE_CHUNK]
        margin = np.pi / 2 - float(np.max(np.abs(np.angle(chunk))))
        step = min(0.1, margin / 8.0)
        re_min = float(np.min(chunk.real))
        t_max = float(np.arccosh(1.0 + 45.0 / re_min)) + step
        t = np.arange(0.0, t_max + step, step)
        weights = np.full(t.shape, step)
        weights[0] = step / 2
        cosh_t = np.cosh(t)
        integrand = np.exp(-np.outer(chunk, cosh_t)) * np.cos(lam * t)
        out_v[start : start + chunk.size] = integrand @ weights
        out_d[start : start + chunk.size] = -(integrand * cosh_t) @ weights
    return values, derivs


def _i_pairs(order: BesselOrder, z: np.ndarray, precision: float, method: str):
    nu = order.nu
    if method == "series":
        value, derivative, _ = _series(nu, z, precision)
        return value, derivative
    if method == "asymptotic":
        return _asymptotic_i(nu, z, precision)
    if method == "mpmath":
        return _mp_pairs("i", nu, z)
    if method != "auto":
        raise ValueError(f"unknown method for I: {method}")

    value = np.empty(z.shape, dtype=complex)
    derivative = np.empty(z.shape, dtype=complex)
    size = np.abs(z)
    far = size > Z_SWITCH
    near = ~far
    if np.any(far):
        value[far], derivative[far] = _asymptotic_i(nu, z[far], precision)
    if np.any(near):
        v, d, loss = _series(nu, z[near], 1.0)
        value[near], derivative[near] = v, d
        lossy = np.zeros(z.shape, dtype=bool)
        lossy[near] = loss > SERIES_LOSS_DIGITS
        expand = lossy & (size >= ASYMPTOTIC_RADIUS)
        exact = lossy & ~expand
        if np.any(expand):
            value[expand], derivative[expand] = _asymptotic_i(nu, z[expand], precision)
        if np.any(exact):
            LOGGER.debug("I series cancels at %d points, using mpmath", int(np.sum(exact)))
            value[exact], derivative[exact] = _mp_pairs("i", nu, z[exact])
    return value, derivative


def _difference(order: BesselOrder, z: np.ndarray, precision: float):
    """K from the I_{-nu} - I_nu difference, with the digits lost per point."""
    plus, d_plus = _i_pairs(order, z, precision, "auto")
    minus, d_minus = _i_pairs(order.flipped(), z, precision, "auto")
    nu = 1j * order.lam
    factor = (np.pi / 2) / np.sin(nu * np.pi)
    gap = minus - plus
    with np.errstate(divide="ignore"):
        loss = np.log10(np.maximum(np.abs(plus), np.abs(minus)) / np.abs(gap))
    return factor * gap, factor * (d_minus - d_plus), loss


def _k_pairs(order: BesselOrder, z: np.ndarray, precision: float, method: str):
    if order.lam == 0:
        raise ValueError("K is only provided for nonzero imaginary order")
    # K_{-nu} = K_nu, so the branch flag is irrelevant here.
    order = BesselOrder(order.lam)
    nu = order.nu
    if method == "asymptotic":
        return _asymptotic_k(nu, z, precision)
    if method == "integral":
        return _k_integral(order.lam, z)
    if method == "mpmath":
        return _mp_pairs("k", nu, z)
    if method == "difference":
        value, derivative, loss = _difference(order, z, precision)
        if np.any(loss > CANCELLATION_DIGITS):
            raise CatastrophicCancellation(
                f"I_(-nu) - I_nu loses {float(np.max(loss)):.1f} digits at lambda={order.lam}"
            )
        return value, derivative
    if method != "auto":
        raise ValueError(f"unknown method for K: {method}")

    value = np.empty(z.shape, dtype=complex)
    derivative = np.empty(z.shape, dtype=complex)
    far = np.abs(z) >= ASYMPTOTIC_RADIUS
    near = ~far
    if np.any(far):
        value[far], derivative[far] = _asymptotic_k(nu, z[far], precision)
    if np.any(near):
        v, d, loss = _difference(order, z[near], precision)
        value[near], derivative[near] = v, d
        lossy = np.zeros(z.shape, dtype=bool)
        lossy[near] = loss > DIFFERENCE_LOSS_DIGITS
        if np.any(lossy):
            severe = int(np.sum(loss > CANCELLATION_DIGITS))
            if severe:
                LOGGER.debug("catastrophic cancellation in K at %d points", severe)
            inside = np.abs(np.angle(z)) <= np.pi / 2 - QUADRATURE_ARG_MARGIN
            quad = lossy & inside
            exact = lossy & ~inside
            if np.any(quad):
                value[quad], derivative[quad] = _k_integral(order.lam, z[quad])
            if np.any(exact):
                LOGGER.debug("K difference cancels near the imaginary axis at %d points, using mpmath", int(np.sum(exact)))
                value[exact], derivative[exact] = _mp_pairs("k", nu, z[exact])
    return value, derivative


def bessel_i_pair(order: BesselOrder, z, precision: float = DEFAULT_PRECISION, method: Method = "auto"):
    """Return (I_nu(z), I_nu'(z)) for nu = +-i*lam."""
    _check_precision(precision)
    points = _eval_points(z, allow_zero=order.lam == 0)
    value, derivative = _i_pairs(order, points, precision, method)
    return _unwrap(value, z), _unwrap(derivative, z)


def bessel_i(order: BesselOrder, z, precision: float = DEFAULT_PRECISION, method: Method = "auto"):
    return bessel_i_pair(order, z, precision, method)[0]


def bessel_k_pair(order: BesselOrder, z, precision: float = DEFAULT_PRECISION, method: Method = "auto"):
    """Return (K_{i lam}(z), K_{i lam}'(z))."""
    _check_precision(precision)
    points = _eval_points(z)
    value, derivative = _k_pairs(order, points, precision, method)
    return _unwrap(value, z), _unwrap(derivative, z)


def bessel_k(order: BesselOrder, z, precision: float = DEFAULT_PRECISION, method: Method = "auto"):
    return bessel_k_pair(order, z, precision, method)[0]


def bessel_wronskian_check(order: BesselOrder, x):
    """W(sqrt(x) I(x), sqrt(x) K(x)), which equals -1 for every x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("the Wronskian check takes real positive x")
    i_val, i_der = bessel_i_pair(BesselOrder(order.lam), x)
    k_val, k_der = bessel_k_pair(order, x)
    root = np.sqrt(x)
    f, fp = root * i_val, i_val / (2 * root) + root * i_der
    g, gp = root * k_val, k_val / (2 * root) + root * k_der
    return f * gp - fp * g


def imaginary_power(base, exponent: float):
    """Principal-branch base**(i*exponent)."""
    return np.exp(1j * exponent * np.log(np.asarray(base, dtype=complex)))
