from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from liouville_scattering.config import MetricConfig
from liouville_scattering.metric import build_metric
from liouville_scattering.radial import (
    LEFT,
    RIGHT,
    DomainError,
    RadialProblem,
    ZeroMomentum,
    channel_functions,
    channel_functions_batch,
    fss_wronskian_defect,
    green_kernel,
    match_points,
    ode_fss,
    picard_fss,
    picard_seeds,
    wronskian,
)


def _relative(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)) / np.maximum(np.abs(b), 1e-300)))


class TestSeeds:
    @pytest.mark.parametrize("end", [LEFT, RIGHT])
    @pytest.mark.parametrize("mu", [0.7, 4.0 + 3.0j, 2.0j])
    def test_unit_wronskian(self, rp, end, mu):
        values = picard_seeds(rp, mu, end).evaluate(np.array([0.2, 0.5, 0.8]))
        w = wronskian(values[0:2], values[2:4])
        np.testing.assert_allclose(w, 1.0, atol=1e-11)

    def test_zero_momentum(self, rp):
        with pytest.raises(ZeroMomentum):
            picard_seeds(rp, 0.0)

    def test_left_half_plane(self, rp):
        with pytest.raises(ValueError):
            picard_seeds(rp, -1.0 + 1.0j)

    @pytest.mark.parametrize("mu", [1.0, 3.0 + 4.0j])
    def test_boundary_limit(self, metric, mu):
        # g1 ~ C10 x^(1/2 - i lam), g2 ~ x^(1/2 + i lam) / (2 i lam C10) as x -> 0
        rp = RadialProblem.from_metric(metric, 1.0, C10=2.0)
        x = 1e-7
        g1, _, g2, _ = picard_seeds(rp, mu).evaluate(np.array([x]))[:, 0]
        assert abs(g1 / (2.0 * x ** (0.5 - 1j)) - 1) < 1e-5
        assert abs(g2 / (x ** (0.5 + 1j) / (2j * 2.0)) - 1) < 1e-5

    @pytest.mark.parametrize("mu", [1.0, 5.0 + 2.0j, 20.0])
    def test_envelope(self, rp, mu):
        # |g_j| <= C (x / (1 + |mu| x))^(1/2) exp(Re(mu) x) with C of order one
        x = np.logspace(-6, 0, 80)[:-1]
        values = picard_seeds(rp, mu).evaluate(x)
        envelope = np.sqrt(x / (1 + abs(mu) * x)) * np.exp(complex(mu).real * x)
        assert np.max(np.abs(values[0]) / envelope) < 10
        assert np.max(np.abs(values[2]) / envelope) < 10


class TestGreenKernel:
    def test_diagonal(self):
        assert green_kernel(0.3, 0.3, 2.0, 1.0) == 0

    def test_domain(self):
        with pytest.raises(DomainError):
            green_kernel(0.2, 0.3, 2.0, 1.0)

    def test_unit_jump(self):
        # d/dx G(x, t) at x = t equals 1 for -u'' - c u / x^2 = -mu^2 u
        t, h = 0.4, 1e-6
        slope = green_kernel(t + h, t, 3.0 + 1.0j, 1.0) / h
        assert abs(slope - 1.0) < 1e-5

    def test_against_mpmath(self):
        x, t, mu = 0.5, 0.2, 2.0
        with mpmath.workdps(50):
            nu = mpmath.mpc(0, 1)
            expected = mpmath.sqrt(x * t) * (
                mpmath.besseli(nu, mu * x) * mpmath.besselk(nu, mu * t)
                - mpmath.besseli(nu, mu * t) * mpmath.besselk(nu, mu * x)
            )
            expected = complex(expected)
        value = green_kernel(x, t, mu, 1.0)
        assert abs(value - expected) / abs(expected) < 1e-11

    @pytest.mark.parametrize("mu", [3.0j, 5.0 + 1.0j, 20.0])
    def test_bound(self, mu):
        # |G(x, t)| <= C (x / (1 + |mu| x))^(1/2) (t / (1 + |mu| t))^(1/2) exp(Re(mu) (x - t))
        points = np.logspace(-3, 0, 30)
        worst = 0.0
        for i, x in enumerate(points):
            for t in points[:i]:
                envelope = math.sqrt(x / (1 + abs(mu) * x) * t / (1 + abs(mu) * t))
                envelope *= math.exp(complex(mu).real * (x - t))
                worst = max(worst, abs(green_kernel(x, t, mu, 1.0)) / envelope)
        assert worst < 10


class TestFundamentalSystems:
    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("mu", [1.0, 5.0, 20.0])
    def test_picard_matches_ode(self, metric, lam, mu):
        rp = RadialProblem.from_metric(metric, lam)
        for end in (LEFT, RIGHT):
            series = picard_fss(rp, mu, end)
            ode = ode_fss(rp, mu, end)
            assert _relative(ode.values, series.values) < 1e-6
            assert _relative(ode.derivatives, series.derivatives) < 1e-6

    @pytest.mark.parametrize("end", [LEFT, RIGHT])
    def test_normalization(self, rp, end):
        grid = np.linspace(0.1, 0.9, 9)
        assert fss_wronskian_defect(picard_fss(rp, 3.0, end, grid)) < 1e-8
        assert fss_wronskian_defect(ode_fss(rp, 3.0 + 2.0j, end, grid)) < 1e-8

    def test_term_norms_decay(self, rp):
        fss = picard_fss(rp, 5.0)
        assert fss.terms > 1
        assert fss.term_norms[-1] < 1e-8 * max(fss.term_norms)

    def test_large_mu_approaches_seed(self, rp):
        errors = []
        for mu in (10.0, 30.0, 100.0):
            fss = picard_fss(rp, mu, LEFT, [0.5])
            seed = picard_seeds(rp, mu).evaluate(np.array([0.5]))
            errors.append(abs(fss.values[0][0] / seed[0][0] - 1))
        assert errors[0] > errors[1] > errors[2]

    def test_vanishing_regular_part_returns_seed(self):
        # a = 1/x^2 makes q0 vanish, so the left system is the Bessel seed itself
        config = MetricConfig(family="one_ended", A=1.0, B=2 * math.pi, validate=False)
        rp = RadialProblem.from_metric(build_metric(config), 1.0)
        grid = np.array([0.2, 0.5])
        fss = picard_fss(rp, 3.0, LEFT, grid)
        seed = picard_seeds(rp, 3.0).evaluate(grid)
        np.testing.assert_allclose(fss.values, seed[[0, 2]], rtol=1e-14)
        np.testing.assert_allclose(fss.derivatives, seed[[1, 3]], rtol=1e-14)
        assert fss.term_norms == (0.0,)

    def test_picard_tolerance_floor(self, rp):
        with pytest.raises(ValueError):
            picard_fss(rp, 1.0, tol=1e-14)

    def test_grid_inside_interval(self, rp):
        with pytest.raises(ValueError):
            picard_fss(rp, 1.0, LEFT, [1.2])


class TestChannelFunctions:
    @pytest.mark.parametrize("x_match", [0.05, 0.5, 0.95])
    def test_match_points_distinct(self, x_match):
        points = match_points(1.0, x_match)
        assert points[0] == x_match
        assert len(set(points.tolist())) == 3
        assert np.all((points >= 0.05) & (points <= 0.95))

    def test_match_independence(self, rp):
        base = channel_functions(rp, 4.0)
        assert base.match_spread < 1e-7
        for x_match in (0.3, 0.7):
            other = channel_functions(rp, 4.0, x_match=x_match)
            assert abs(other.Delta - base.Delta) / abs(base.Delta) < 1e-7
            assert abs(other.delta_small - base.delta_small) / abs(base.delta_small) < 1e-7

    def test_weyl_function(self, rp):
        funcs = channel_functions(rp, 2.5)
        assert funcs.M == pytest.approx(-funcs.delta_small / funcs.Delta, rel=1e-15)
        assert funcs.mu_sq == pytest.approx(6.25)

    def test_even_in_mu(self, rp):
        plus = channel_functions(rp, 2.0 + 1.0j)
        minus = channel_functions(rp, -2.0 - 1.0j)
        assert minus.Delta == plus.Delta

    def test_methods_agree(self, rp):
        series = channel_functions(rp, 6.0, method="picard")
        ode = channel_functions(rp, 6.0, method="ode")
        assert abs(series.Delta - ode.Delta) / abs(series.Delta) < 1e-7
        assert abs(series.M - ode.M) / abs(series.M) < 1e-7

    def test_batch_matches_single(self, rp):
        mus = [1.5, 3.0 + 2.0j, 4.0j]
        batch = channel_functions_batch(rp, mus)
        for mu, funcs in zip(mus, batch):
            single = channel_functions(rp, mu)
            assert abs(funcs.Delta - single.Delta) / abs(single.Delta) < 1e-7

    def test_limit_at_zero(self, rp):
        limit = channel_functions(rp, 0.0)
        near = channel_functions(rp, 1e-3)
        assert limit.method == "richardson"
        assert abs(limit.Delta - near.Delta) / abs(limit.Delta) < 1e-5

    def test_normalization_constants_scale(self, metric):
        base = channel_functions(RadialProblem.from_metric(metric, 1.0), 3.0)
        scaled = channel_functions(RadialProblem.from_metric(metric, 1.0, C10=2.0, C11=0.5j), 3.0)
        assert scaled.Delta == pytest.approx(base.Delta * 2.0 * 0.5j, rel=1e-10)
        assert scaled.M == pytest.approx(base.M / 4.0, rel=1e-10)

    def test_zero_constant_rejected(self, metric):
        with pytest.raises(ValueError):
            RadialProblem.from_metric(metric, 1.0, C10=0.0)
