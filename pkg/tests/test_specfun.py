from __future__ import annotations

import cmath

import mpmath
import numpy as np
import pytest

from liouville_scattering.specfun import (
    BesselOrder,
    CatastrophicCancellation,
    PoleOfGamma,
    bessel_i,
    bessel_i_pair,
    bessel_k,
    bessel_k_pair,
    bessel_wronskian_check,
    complex_gamma,
    imaginary_power,
)

mpmath.mp.dps = 50


def _oracle(kind: str, nu: complex, z: complex) -> complex:
    func = mpmath.besseli if kind == "i" else mpmath.besselk
    return complex(func(mpmath.mpc(nu.real, nu.imag), mpmath.mpc(z.real, z.imag)))


def _sample_points(count: int = 50) -> np.ndarray:
    rng = np.random.default_rng(7)
    radius = rng.uniform(0.05, 40.0, count)
    angle = rng.uniform(-np.pi / 4, np.pi / 4, count)
    return radius * np.exp(1j * angle)


class TestComplexGamma:
    @pytest.mark.parametrize("z", [0.5 + 0.5j, 1 - 2j, 1 + 3.7j, -2.5 + 0.1j, 7.25 - 11j])
    def test_matches_mpmath(self, z):
        expected = complex(mpmath.gamma(mpmath.mpc(z.real, z.imag)))
        assert abs(complex_gamma(z) - expected) / abs(expected) < 1e-13

    def test_pole(self):
        with pytest.raises(PoleOfGamma):
            complex_gamma(-2.0)

    def test_reflection_modulus(self):
        # |Gamma(1 + i lam)|^2 = pi lam / sinh(pi lam)
        lam = 1.3
        value = abs(complex_gamma(1 + 1j * lam)) ** 2
        assert value == pytest.approx(np.pi * lam / np.sinh(np.pi * lam), rel=1e-13)


class TestBesselOrder:
    def test_negative_lambda_folds(self):
        order = BesselOrder(-1.5)
        assert order.lam == 1.5
        assert order.negative
        assert order.nu == -1.5j

    def test_flipped(self):
        assert BesselOrder(2.0).flipped().nu == -2j


class TestBesselI:
    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_oracle_agreement(self, lam):
        order = BesselOrder(lam)
        for z in _sample_points():
            expected = _oracle("i", order.nu, z)
            assert abs(bessel_i(order, z) - expected) / abs(expected) < 1e-11, z

    def test_negative_branch(self):
        order = BesselOrder(1.0, negative=True)
        z = 3.0 + 1.0j
        assert abs(bessel_i(order, z) - _oracle("i", -1j, z)) / abs(_oracle("i", -1j, z)) < 1e-12

    def test_series_and_asymptotic_overlap(self):
        order = BesselOrder(1.0)
        z = 25.0 + 5.0j
        series = bessel_i(order, z, method="series")
        expansion = bessel_i(order, z, method="asymptotic")
        assert abs(series - expansion) / abs(series) < 1e-10

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_conjugation(self, lam):
        z = _sample_points()
        plus = bessel_i(BesselOrder(lam), z)
        minus = bessel_i(BesselOrder(lam, negative=True), np.conj(z))
        assert np.max(np.abs(minus - np.conj(plus)) / np.abs(plus)) < 1e-11

    def test_growth_envelope(self):
        # |I(z)| <= C (1 + |z|)^(-1/2) exp(Re z); C fitted on a coarse grid holds on a fine one
        order = BesselOrder(1.0)

        def ratios(count: int) -> np.ndarray:
            x = np.logspace(-3, np.log10(40.0), count)
            z = np.concatenate([x + 0j, x + 3j])
            return np.abs(bessel_i(order, z)) * np.sqrt(1 + np.abs(z)) * np.exp(-z.real)

        fitted = np.max(ratios(60))
        assert np.max(ratios(600)) <= 1.01 * fitted

    def test_array_shape_preserved(self):
        values, derivs = bessel_i_pair(BesselOrder(1.0), np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert values.shape == (2, 2)
        assert derivs.shape == (2, 2)

    def test_zero_argument_rejected(self):
        with pytest.raises(ValueError):
            bessel_i(BesselOrder(1.0), 0.0)

    def test_left_half_plane_rejected(self):
        with pytest.raises(ValueError):
            bessel_i(BesselOrder(1.0), -1.0 + 0.5j)

    @pytest.mark.parametrize("precision", [0.0, 1e-3])
    def test_precision_range(self, precision):
        with pytest.raises(ValueError):
            bessel_i(BesselOrder(1.0), 1.0, precision=precision)


class TestBesselK:
    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_oracle_agreement(self, lam):
        order = BesselOrder(lam)
        # K_{i lam} oscillates through zeros for x < lam
        for z in _sample_points()[np.abs(_sample_points()) > lam + 2]:
            expected = _oracle("k", order.nu, z)
            assert abs(bessel_k(order, z) - expected) / abs(expected) < 1e-11, z

    def test_derivative_against_oracle(self):
        order = BesselOrder(1.0)
        z = 2.0 + 0.5j
        _, derivative = bessel_k_pair(order, z)
        expected = complex(mpmath.diff(lambda w: mpmath.besselk(1j, w), mpmath.mpc(z.real, z.imag)))
        assert abs(derivative - expected) / abs(expected) < 1e-11

    def test_difference_formula(self):
        # small argument, moderate order: the I difference keeps its digits
        order = BesselOrder(0.5)
        for x in (0.2, 0.7, 1.5):
            expected = _oracle("k", 0.5j, x)
            assert abs(bessel_k(order, x, method="difference") - expected) / abs(expected) < 1e-11

    def test_integral_path(self):
        order = BesselOrder(2.0)
        expected = _oracle("k", 2j, 9.0)
        assert abs(bessel_k(order, 9.0, method="integral") - expected) / abs(expected) < 1e-12

    def test_difference_cancellation_raises(self):
        with pytest.raises(CatastrophicCancellation):
            bessel_k(BesselOrder(3.0), 16.0, method="difference")

    def test_real_on_real_axis(self):
        values = bessel_k(BesselOrder(1.5), np.linspace(3.0, 30.0, 12))
        assert np.max(np.abs(values.imag) / np.abs(values)) < 1e-12


class TestWronskian:
    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_equals_minus_one(self, lam):
        x = np.logspace(-2, 1.5, 34)
        assert np.max(np.abs(bessel_wronskian_check(BesselOrder(lam), x) + 1)) < 1e-10

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            bessel_wronskian_check(BesselOrder(1.0), [0.0, 1.0])


def test_imaginary_power():
    assert complex(imaginary_power(2.0, 1.5)) == pytest.approx(cmath.exp(1.5j * cmath.log(2.0)), rel=1e-15)
