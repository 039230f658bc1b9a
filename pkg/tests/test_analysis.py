from __future__ import annotations

import math

import numpy as np
import pytest

from liouville_scattering.analysis import (
    AsymptoticModel,
    Box,
    ReggePoleSet,
    SectorError,
    asymptotic_model_eval,
    bounds_report,
    delta_at_zero,
    estimate_extent,
    find_regge_poles,
    hadamard_reconstruct,
    winding_number,
)
from liouville_scattering.radial import channel_functions


@pytest.fixture(scope="module")
def model(rp):
    return AsymptoticModel.for_problem(rp)


@pytest.fixture(scope="module")
def poles(rp):
    return find_regge_poles(rp, 40, threads=4, small_zeros=False)


def _cosh_ladder(count: int) -> ReggePoleSet:
    # cosh(mu) = prod (1 - mu^2 / alpha_n^2) with alpha_n = i (n + 1/2) pi
    alphas = 1j * (np.arange(count) + 0.5) * math.pi
    return ReggePoleSet(
        poles=alphas,
        residuals=np.zeros(count),
        windings=np.ones(count, dtype=int),
        offset=0,
        model_residuals=np.zeros(count),
        lam=0.0,
        A=1.0,
    )


class TestAsymptoticModel:
    def test_sector(self, model):
        with pytest.raises(SectorError):
            model.evaluate(-1.0 + 0.5j)
        with pytest.raises(SectorError):
            model.evaluate(0.0)

    def test_weyl_function_is_ratio(self, model):
        for mu in (3.0 + 2.0j, 7.0 - 1.0j, 4.0j):
            expected = -model.evaluate(mu, "delta_small") / model.evaluate(mu, "Delta")
            assert model.evaluate(mu, "M") == pytest.approx(expected, rel=1e-12)

    def test_derivative_ratio(self, model):
        mu = 30.0 + 0.3j
        ratio = model.evaluate(mu, "dDelta") / model.evaluate(mu, "Delta")
        assert ratio == pytest.approx(model.A, rel=1e-10)

    def test_m_modulus_limit(self, model):
        assert abs(model.evaluate(40.0, "M")) == pytest.approx(1 / (2 * model.lam), rel=1e-10)

    def test_branches_agree_far_out(self, model):
        upper, lower = model.both_signs(25.0, "Delta")
        assert abs(upper / lower - 1) < 1e-6

    def test_module_function(self, model):
        assert asymptotic_model_eval(model, 5.0) == model.evaluate(5.0)

    def test_delta_approaches_model(self, rp, model):
        errors = [
            abs(channel_functions(rp, scale / rp.A).Delta / model.evaluate(scale / rp.A) - 1)
            for scale in (10.0, 20.0, 40.0)
        ]
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 0.05

    def test_model_poles(self, model):
        alpha = model.pole(3)
        assert abs(model.evaluate(alpha, "Delta")) < 1e-9 * abs(model.evaluate(alpha + 0.5j, "Delta"))
        assert model.small_zero(0, offset=1) == pytest.approx(1.5j * math.pi)


class TestWinding:
    @staticmethod
    def _poly(z):
        return (z - 1.0) * (z - 1.2 - 0.1j) * (z - 5.0)

    def test_counts_zeros(self):
        assert winding_number(self._poly, Box(0.0, 2.0, -1.0, 1.0)).winding == 2
        assert winding_number(self._poly, Box(4.0, 6.0, -1.0, 1.0)).winding == 1
        assert winding_number(self._poly, Box(2.0, 4.0, -1.0, 1.0)).winding == 0

    def test_raw_close_to_integer(self):
        cert = winding_number(self._poly, Box(0.0, 6.0, -2.0, 2.0))
        assert cert.winding == 3
        assert abs(cert.raw - 3) < 1e-10

    def test_box_geometry(self):
        box = Box(0.0, 2.0, 0.0, 1.0)
        np.testing.assert_allclose(box.point(np.array([0.0, 1.0, 2.0, 3.0, 3.5])), [0, 2, 2 + 1j, 1j, 0.5j])
        assert sum(q.right - q.left for q in box.quarters()) == pytest.approx(4.0)
        assert box.contains(box.center)

    def test_secant_starts_stay_in_narrow_box(self):
        box = Box(0.0, 0.1, 0.0, 1.0)
        starts = box.secant_starts(5.0 + 5.0j)
        assert starts[0] == box.center
        assert all(box.contains(z) for z in starts)
        assert len(set(starts)) == 3


class TestHadamard:
    def test_cosh_product(self):
        ladder = _cosh_ladder(40)
        direct = math.cosh(2.0)
        errors = [abs(hadamard_reconstruct(ladder, 1.0, 4.0, n) / direct - 1) for n in (10, 20, 40)]
        assert errors[0] > errors[1] > errors[2]
        assert abs(hadamard_reconstruct(ladder, 1.0, 4.0, 40, tail=True) / direct - 1) < 1e-4

    def test_truncation_limit(self):
        with pytest.raises(ValueError):
            hadamard_reconstruct(_cosh_ladder(5), 1.0, 1.0, 10)


class TestBounds:
    def test_default_metric(self, rp):
        report = bounds_report(rp, np.linspace(0.5, 40.0, 80), np.linspace(0.5, 40.0, 40))
        assert report.passed
        assert report.lower_bound_margin >= 0
        assert report.m_bound_margin <= 1e-9
        assert abs(report.imag_log_slope) < 0.2
        assert report.as_dict()["real_threshold"] == report.real_threshold


@pytest.mark.slow
class TestReggePoles:
    def test_certified_ladder(self, poles, rp):
        assert poles.poles.size >= 40
        assert np.all(poles.windings == 1)
        assert poles.off_ladder_winding == 0
        assert poles.total_winding == poles.poles.size
        assert np.all(poles.poles.imag > 0)

    def test_spacing(self, poles, rp):
        spacing = poles.spacings()[10:] * rp.A / math.pi
        assert np.max(np.abs(spacing - 1)) < 0.01

    def test_real_parts_approach_ladder(self, poles, rp):
        target = rp.lam * math.pi / rp.A
        early = np.mean(np.abs(poles.poles.real[:5] - target))
        late = np.mean(np.abs(poles.poles.real[-5:] - target))
        assert late < early
        assert late < 0.05 * target

    def test_residuals(self, poles):
        assert np.max(poles.residuals) < 1e-8

    def test_extent(self, poles, rp):
        assert estimate_extent(poles) == pytest.approx(rp.A, rel=0.01)

    def test_hadamard_against_direct(self, poles, rp):
        mu = 2.0 / rp.A
        direct = channel_functions(rp, mu).Delta
        G = delta_at_zero(rp)
        errors = [abs(hadamard_reconstruct(poles, G, mu * mu, n) / direct - 1) for n in (10, 20, 40)]
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 0.05
        assert abs(hadamard_reconstruct(poles, G, mu * mu, 40, tail=True) / direct - 1) < 0.01

    def test_small_zeros(self, rp):
        found = find_regge_poles(rp, 15, threads=4)
        assert found.small_zeros.size >= 15
        assert np.max(np.abs(found.small_zeros.real)) < 0.1 * math.pi / rp.A
        assert found.small_offset is not None
