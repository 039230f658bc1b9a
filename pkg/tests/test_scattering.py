from __future__ import annotations

import math

import numpy as np
import pytest

from liouville_scattering.angular import MomentumChannel, momenta, solve_angular
from liouville_scattering.metric import ZeroEnergy
from liouville_scattering.radial import RadialProblem
from liouville_scattering.scattering import (
    assemble_operator,
    channel_scattering,
    omega_ratio,
    unitarity_defect,
)
from liouville_scattering.specfun import complex_gamma


@pytest.fixture(scope="module")
def operator(rp, spectrum):
    return assemble_operator(rp, spectrum, threads=2)


class TestOmegaRatio:
    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, -1.5])
    def test_unit_modulus(self, lam):
        assert abs(omega_ratio(lam)) == pytest.approx(1.0, rel=1e-14)

    def test_value(self):
        assert omega_ratio(1.0) == pytest.approx(complex_gamma(1 - 1j) / complex_gamma(1 + 1j), rel=1e-14)

    def test_zero_energy(self):
        with pytest.raises(ZeroEnergy):
            omega_ratio(0.0)


class TestChannelScattering:
    def test_unitarity(self, operator):
        real = [ch for ch in operator.channels if ch.real_channel]
        assert len(real) >= 25
        for ch in real:
            residuals = ch.unitarity_residuals()
            assert max(residuals.values()) < 1e-6, (ch.channel.n, residuals)

    def test_identities(self, operator):
        for ch in operator.channels:
            residuals = ch.identity_residuals()
            assert residuals["delta_times_t"] < 1e-8
            assert residuals["l_from_m"] < 1e-8
            if ch.real_channel:
                assert residuals["r_conjugate"] < 1e-8
                assert residuals["r_weyl_modulus"] < 1e-8

    def test_m_bound(self, operator):
        real = [ch for ch in operator.channels if ch.real_channel]
        assert max(abs(ch.funcs.M) for ch in real) <= operator.m_bound() * (1 + 1e-9)

    def test_m_rises_toward_bound(self, operator):
        # |M|^2 = 1/4 - 1/|Delta|^2 for lam = 1, C10 = 1, and |Delta| grows with mu
        first = len(operator.channels) - 20
        tail = [ch for ch in operator.distinct_channels() if ch.channel.n >= first and ch.real_channel]
        values = np.array([abs(ch.funcs.M) for ch in tail])
        assert values.size >= 9
        assert np.all(np.diff(values) > 0)
        assert values[-1] > 0.95 * operator.m_bound()

    def test_transmission_symmetric_matrix(self, operator):
        S = operator.channels[5].S_matrix
        assert S.shape == (2, 2)
        assert S[0, 1] == S[1, 0]

    def test_general_constants(self, metric, spectrum):
        rp = RadialProblem.from_metric(metric, 1.0, C10=1.0 + 0.5j, C11=0.3 - 2.0j)
        ch = channel_scattering(rp, momenta(spectrum)[4])
        assert max(ch.unitarity_residuals().values()) < 1e-6
        assert max(ch.identity_residuals().values()) < 1e-8

    def test_branch_cut_channel_is_not_real(self, rp, operator):
        ch = channel_scattering(rp, MomentumChannel(0, 0.0, 0j, on_branch_cut=True))
        assert not ch.real_channel
        assert all(ch.real_channel == ch.channel.is_real for ch in operator.channels)

    def test_serializes(self, operator):
        payload = operator.channels[3].as_dict()
        assert payload["n"] == 3
        assert set(payload) >= {"T", "L", "R", "M", "Delta", "mu_sq"}


class TestOperator:
    def test_unitarity_defect(self, operator):
        defects = unitarity_defect(operator)
        assert len(defects) == len(operator.channels)
        for ch, defect in zip(operator.channels, defects):
            if ch.real_channel:
                assert defect < 1e-6
            else:
                assert math.isnan(defect)

    def test_max_defect(self, operator):
        assert operator.max_unitarity_defect() < 1e-6

    def test_eigenvalue_sequences(self, operator):
        assert operator.delta_eigenvalues().shape == (30,)
        assert np.all(np.isfinite(operator.m_eigenvalues()))

    def test_distinct_channels(self, operator, spectrum):
        assert len(operator.distinct_channels()) == len(spectrum.clusters())

    def test_thread_count_does_not_change_results(self, rp, spectrum, operator):
        serial = assemble_operator(rp, spectrum, threads=1)
        assert serial.as_dict() == operator.as_dict()

    def test_lambda_mismatch(self, metric, spectrum):
        with pytest.raises(ValueError):
            assemble_operator(RadialProblem.from_metric(metric, 2.0), spectrum)

    def test_first_fifty_channels(self, metric, rp):
        op = assemble_operator(rp, solve_angular(metric, 1.0, 49), threads=4)
        assert op.max_unitarity_defect() < 1e-6
