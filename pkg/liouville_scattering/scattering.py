"""Per-channel 2x2 scattering matrices at fixed energy and the identities they obey."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .angular import AngularSpectrum, MomentumChannel, momenta
from .metric import ZeroEnergy
from .radial import ChannelFunctions, RadialProblem, channel_functions
from .specfun import complex_gamma

LOGGER = logging.getLogger(__name__)

DISTINCT_GAP = 1e-8


def omega_ratio(lam: float) -> complex:
    """omega_-/omega_+ = Gamma(1 - i lam) / Gamma(1 + i lam), of unit modulus."""
    if lam == 0:
        raise ZeroEnergy("omega ratio needs lambda != 0")
    return complex_gamma(1 - 1j * lam) / complex_gamma(1 + 1j * lam)


@dataclass(frozen=True, slots=True)
class ChannelScattering:
    channel: MomentumChannel
    funcs: ChannelFunctions
    T: complex
    L: complex
    R: complex
    R_weyl: complex
    R_conj: complex
    lam: float
    C10: complex
    C11: complex

    @property
    def real_channel(self) -> bool:
        return self.channel.is_real

    @property
    def S_matrix(self) -> np.ndarray:
        return np.array([[self.L, self.T], [self.T, self.R]])

    def s_defect(self) -> float:
        S = self.S_matrix
        return float(np.max(np.abs(S.conj().T @ S - np.eye(2))))

    def unitarity_residuals(self) -> dict[str, float]:
        T, L, R = self.T, self.L, self.R
        funcs = self.funcs
        c10, c11 = abs(self.C10) ** 2, abs(self.C11) ** 2
        relation = 4 * self.lam**2 * c10 * (abs(funcs.M) ** 2 * c10 + c11 / abs(funcs.Delta) ** 2)
        return {
            "left": abs(abs(T) ** 2 + abs(L) ** 2 - 1),
            "right": abs(abs(T) ** 2 + abs(R) ** 2 - 1),
            "cross": abs(L * T.conjugate() + T * R.conjugate()),
            "relation": abs(relation - 1),
            "matrix": self.s_defect(),
        }

    def identity_residuals(self) -> dict[str, float]:
        """Delta * T and L / M against their closed forms (relative)."""
        k = 2j * self.lam * omega_ratio(self.lam)
        target_t = k * self.C10 * self.C11
        target_l = -k * self.C10**2 * self.funcs.M
        return {
            "delta_times_t": abs(self.funcs.Delta * self.T - target_t) / abs(target_t),
            "l_from_m": abs(self.L - target_l) / max(abs(target_l), 1e-300),
            "r_conjugate": abs(self.R - self.R_conj) / max(abs(self.R), 1e-300),
            "r_weyl_modulus": abs(abs(self.R_weyl) - abs(self.R)) / max(abs(self.R), 1e-300),
        }

    def as_dict(self) -> dict[str, Any]:
        return {
            "n": self.channel.n,
            "mu_sq": self.channel.mu_sq,
            "mu": [self.channel.mu.real, self.channel.mu.imag],
            "Delta": [self.funcs.Delta.real, self.funcs.Delta.imag],
            "delta": [self.funcs.delta_small.real, self.funcs.delta_small.imag],
            "M": [self.funcs.M.real, self.funcs.M.imag],
            "T": [self.T.real, self.T.imag],
            "L": [self.L.real, self.L.imag],
            "R": [self.R.real, self.R.imag],
            "real_channel": self.real_channel,
        }


def channel_scattering(
    rp: RadialProblem, ch: MomentumChannel, functions: ChannelFunctions | None = None
) -> ChannelScattering:
    """T, L, R of one channel from the characteristic and Weyl-Titchmarsh functions.

    R uses the right-end Wronskian a1 = W(S10, S21); R_conj and R_weyl are the
    conjugation and M-proportional forms kept for cross-checks.
    """
    funcs = functions if functions is not None else channel_functions(rp, ch.mu)
    lam = rp.lam
    k = 2j * lam * omega_ratio(lam)
    C10, C11 = complex(rp.C10), complex(rp.C11)
    Delta, M = funcs.Delta, funcs.M
    T = k * C10 * C11 / Delta
    L = -k * C10**2 * M
    R = k * C11**2 * funcs.a1 / Delta
    R_conj = k * abs(C10) ** 2 * (C11 / C11.conjugate()) * (Delta.conjugate() / Delta) * M.conjugate()
    R_weyl = k * C11**2 * abs(C10) ** 2 * M / abs(C11) ** 2
    return ChannelScattering(ch, funcs, T, L, R, R_weyl, R_conj, lam, C10, C11)


@dataclass(slots=True)
class ScatteringOperator:
    """Block-diagonal scattering operator, one 2x2 block per angular channel."""

    lam: float
    C10: complex
    C11: complex
    channels: list[ChannelScattering]
    spectrum: AngularSpectrum | None = field(default=None, repr=False)

    def delta_eigenvalues(self) -> np.ndarray:
        return np.array([ch.funcs.Delta for ch in self.channels])

    def m_eigenvalues(self) -> np.ndarray:
        return np.array([ch.funcs.M for ch in self.channels])

    def m_bound(self) -> float:
        return 1.0 / (2 * abs(self.lam) * abs(self.C10) ** 2)

    def distinct_channels(self, gap: float = DISTINCT_GAP) -> list[ChannelScattering]:
        """First channel of every eigenvalue cluster."""
        picked: list[ChannelScattering] = []
        for ch in self.channels:
            if picked:
                prev = picked[-1].channel.mu_sq
                if abs(ch.channel.mu_sq - prev) <= gap * max(1.0, abs(prev)):
                    continue
            picked.append(ch)
        return picked

    def max_unitarity_defect(self) -> float:
        real = [ch for ch in self.channels if ch.real_channel]
        if not real:
            return 0.0
        return max(max(ch.unitarity_residuals().values()) for ch in real)

    def as_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "C10": [self.C10.real, self.C10.imag],
            "C11": [self.C11.real, self.C11.imag],
            "channels": [ch.as_dict() for ch in self.channels],
        }


def assemble_operator(rp: RadialProblem, spectrum: AngularSpectrum, threads: int = 1) -> ScatteringOperator:
    """One channel per eigenvalue; clustered eigenvalues share one radial solve."""
    if abs(spectrum.lam) != rp.lam:
        raise ValueError(f"spectrum at lambda={spectrum.lam} does not match radial problem at {rp.lam}")
    channels = momenta(spectrum)
    groups = spectrum.clusters(DISTINCT_GAP)
    leaders = [channels[group[0]] for group in groups]
    LOGGER.info("Solving %d radial channels (%d distinct) with %d threads", len(channels), len(leaders), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        solved = list(pool.map(lambda ch: channel_functions(rp, ch.mu), leaders))

    assembled: list[ChannelScattering] = []
    for group, funcs in zip(groups, solved):
        for n in group:
            assembled.append(channel_scattering(rp, channels[n], funcs))
    return ScatteringOperator(rp.lam, complex(rp.C10), complex(rp.C11), assembled, spectrum)


def unitarity_defect(op: ScatteringOperator) -> list[float]:
    """|Delta|^2 / (4 lam^2 |C10|^2 |C11|^2) - |C10|^2 |delta|^2 / |C11|^2 - 1, per channel.

    The relation holds for real momenta only; other channels get nan.  Both
    terms grow like exp(2 mu A), so the defect is taken relative to the first
    one once it exceeds 1.
    """
    c10, c11 = abs(op.C10) ** 2, abs(op.C11) ** 2
    defects = []
    for ch in op.channels:
        if not ch.real_channel:
            defects.append(math.nan)
            continue
        funcs = ch.funcs
        leading = abs(funcs.Delta) ** 2 / (4 * op.lam**2 * c10 * c11)
        lhs = leading - c10 * abs(funcs.delta_small) ** 2 / c11
        defects.append(abs(lhs - 1) / max(1.0, leading))
    return defects
