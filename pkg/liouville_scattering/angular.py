"""Periodic angular problem -v'' + (lam^2 + 1/4) b(y) v = mu^2 v on (0, B).

Fourier-Galerkin: on e_k(y) = exp(2 pi i k y / B) / sqrt(B), |k| <= K, the
operator is diag((2 pi k / B)^2) plus the Toeplitz matrix of the Fourier
coefficients of (lam^2 + 1/4) b.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import LiouvilleError
from .metric import LiouvilleMetric, ZeroEnergy

LOGGER = logging.getLogger(__name__)

CLUSTER_GAP = 1e-8
ZERO_MOMENTUM = 1e-12
RESIDUAL_TOL = 1e-8


class ResolutionInsufficient(LiouvilleError):
    """Raised when doubling the Fourier resolution moves an eigenvalue too much."""


@dataclass(frozen=True, slots=True)
class MomentumChannel:
    n: int
    mu_sq: float
    mu: complex
    on_branch_cut: bool = False

    @property
    def is_real(self) -> bool:
        return self.mu_sq > 0 and not self.on_branch_cut


@dataclass(frozen=True, slots=True)
class AngularSpectrum:
    """Lowest eigenpairs, eigenvectors as rows of Fourier coefficients."""

    lam: float
    B: float
    eigenvalues: np.ndarray
    coefficients: np.ndarray
    wavenumbers: np.ndarray
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    # the last returned eigenvalue belongs to a cluster that continues past n_max
    tail_split: bool = False

    @property
    def resolution(self) -> int:
        return self.wavenumbers.size

    @property
    def n_max(self) -> int:
        return self.eigenvalues.size - 1

    def eigenfunction(self, n: int, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        phases = np.exp(2j * np.pi * np.outer(y, self.wavenumbers) / self.B)
        return phases @ self.coefficients[n] / math.sqrt(self.B)

    def gram(self) -> np.ndarray:
        return self.coefficients.conj() @ self.coefficients.T

    def clusters(self, gap: float = CLUSTER_GAP) -> list[list[int]]:
        """Index groups of eigenvalues closer than ``gap`` (relative)."""
        groups: list[list[int]] = []
        for n, value in enumerate(self.eigenvalues):
            if groups:
                prev = self.eigenvalues[groups[-1][-1]]
                if abs(value - prev) <= gap * max(1.0, abs(value)):
                    groups[-1].append(n)
                    continue
            groups.append([n])
        return groups


@dataclass(slots=True)
class WeylDiagnostics:
    ratios: np.ndarray
    limit: float
    deviation: float

    @property
    def passed(self) -> bool:
        return self.deviation < 0.02


@dataclass(slots=True)
class MuntzDiagnostics:
    indices: np.ndarray
    partial_sums: np.ndarray
    slope: float
    expected_slope: float

    @property
    def increasing(self) -> bool:
        return bool(np.all(np.diff(self.partial_sums) > 0))


def _mode_order(wavenumbers: np.ndarray) -> np.ndarray:
    """Positions of 0, 1, -1, 2, -2, ... in ``wavenumbers``."""
    return np.array(sorted(range(wavenumbers.size), key=lambda i: (abs(wavenumbers[i]), wavenumbers[i] < 0)))


def _canonical_basis(vectors: np.ndarray, order: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(vectors) (columns).

    Gram-Schmidt on the projections of the standard basis vectors taken in
    mode order; the first surviving coefficient of each vector is real
    positive.
    """
    count = vectors.shape[1]
    projector = vectors @ vectors.conj().T
    basis: list[np.ndarray] = []
    for idx in order:
        v = projector[:, idx].copy()
        for u in basis:
            v -= u * np.vdot(u, v)
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            basis.append(v / norm)
            if len(basis) == count:
                break
    return np.column_stack(basis)


def _galerkin(metric: LiouvilleMetric, coupling: float, half: int):
    wavenumbers = np.arange(-half, half + 1)
    samples = 8 * half + 8
    y = np.arange(samples) * metric.B / samples
    b_hat = np.fft.fft(metric.b(y)) / samples
    omega = 2 * np.pi / metric.B
    diff = wavenumbers[:, None] - wavenumbers[None, :]
    matrix = coupling * b_hat[diff % samples] + np.diag((omega * wavenumbers) ** 2)
    return wavenumbers, (matrix + matrix.conj().T) / 2


def _eigenpairs(metric: LiouvilleMetric, coupling: float, half: int, count: int):
    wavenumbers, matrix = _galerkin(metric, coupling, half)
    values, vectors = scipy.linalg.eigh(matrix, subset_by_index=[0, count - 1])
    return wavenumbers, values, vectors


def _residuals(metric: LiouvilleMetric, coupling: float, spectrum_values, coefficients, wavenumbers) -> np.ndarray:
    """Relative L2 residual of each pair on a grid fine enough to hold b * Y."""
    samples = 4 * wavenumbers.size
    y = np.arange(samples) * metric.B / samples
    omega = 2 * np.pi / metric.B
    phases = np.exp(1j * omega * np.outer(y, wavenumbers))
    b_vals = metric.b(y)
    values = phases @ coefficients.T
    second = phases @ (-(omega * wavenumbers) ** 2 * coefficients).T
    residual = -second + (coupling * b_vals[:, None] - spectrum_values[None, :]) * values
    return np.linalg.norm(residual, axis=0) / np.linalg.norm(values, axis=0)


def solve_angular(
    metric: LiouvilleMetric,
    lam: float,
    n_max: int,
    modes: int | None = None,
    tol: float = 1e-9,
) -> AngularSpectrum:
    """Lowest n_max + 1 eigenpairs of the angular operator.

    ``modes`` is the number of Fourier modes 2K + 1; the result is accepted
    only if doubling K moves no returned eigenvalue by more than ``tol``
    relative.

    Two eigenpairs past the cut are solved as well, so a degenerate cluster
    cut by n_max still gets the canonical basis of its whole eigenspace and
    the truncated vectors are reproducible. Such a cut sets ``tail_split``.
    """
    if lam == 0:
        raise ZeroEnergy("the angular operator needs lambda != 0")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    modes = modes if modes is not None else 4 * n_max + 33
    if modes < 4 * n_max:
        raise ValueError(f"modes ({modes}) must be at least 4 * n_max ({4 * n_max})")
    half = max(modes // 2, 1)
    coupling = lam * lam + 0.25
    count = n_max + 1
    LOGGER.info("Solving angular problem: lambda=%s, n_max=%d, modes=%d", lam, n_max, 2 * half + 1)

    extended = min(count + 2, 2 * half + 1)
    wavenumbers, values, vectors = _eigenpairs(metric, coupling, half, extended)
    _, check, _ = _eigenpairs(metric, coupling, 2 * half, count)
    drift = np.abs(check - values[:count]) / np.maximum(1.0, np.abs(values[:count]))
    if np.max(drift) > tol:
        worst = int(np.argmax(drift))
        raise ResolutionInsufficient(
            f"eigenvalue {worst} moved by {drift[worst]:.3e} (relative) when doubling {2 * half + 1} modes"
        )

    order = _mode_order(wavenumbers)
    canonical = vectors.copy()
    provisional = AngularSpectrum(lam, metric.B, values, vectors.T, wavenumbers)
    tail_split = False
    for group in provisional.clusters():
        if group[0] >= count:
            break
        mean = float(np.mean(values[group]))
        values[group] = mean
        canonical[:, group] = _canonical_basis(vectors[:, group], order)
        if group[0] < count <= group[-1]:
            tail_split = True
            LOGGER.debug("Cluster %s is cut at n_max=%d", group, n_max)
    values = values[:count].copy()
    coefficients = canonical[:, :count].T.copy()

    residuals = _residuals(metric, coupling, values, coefficients, wavenumbers)
    if np.max(residuals) > RESIDUAL_TOL:
        LOGGER.warning("Angular residual %.3e exceeds %.0e", float(np.max(residuals)), RESIDUAL_TOL)
    LOGGER.debug("Angular eigenvalues: %s", values[: min(count, 8)])
    return AngularSpectrum(lam, metric.B, values, coefficients, wavenumbers, residuals, tail_split)


def momenta(spectrum: AngularSpectrum) -> list[MomentumChannel]:
    channels = []
    for n, mu_sq in enumerate(spectrum.eigenvalues):
        mu_sq = float(mu_sq)
        if abs(mu_sq) <= ZERO_MOMENTUM:
            channels.append(MomentumChannel(n, mu_sq, 0j, on_branch_cut=True))
        elif mu_sq > 0:
            channels.append(MomentumChannel(n, mu_sq, complex(math.sqrt(mu_sq))))
        else:
            channels.append(MomentumChannel(n, mu_sq, 1j * math.sqrt(-mu_sq)))
    return channels


def weyl_check(spectrum: AngularSpectrum) -> WeylDiagnostics:
    """mu_n^2 / n^2 against pi^2 / B^2."""
    if spectrum.n_max < 100:
        raise ValueError("the Weyl check needs n_max >= 100")
    n = np.arange(1, spectrum.n_max + 1)
    ratios = spectrum.eigenvalues[1:] / n**2
    limit = math.pi**2 / spectrum.B**2
    deviation = float(abs(ratios[-1] - limit) / limit)
    return WeylDiagnostics(ratios=ratios, limit=limit, deviation=deviation)


def muntz_partial_sums(spectrum: AngularSpectrum) -> MuntzDiagnostics:
    """Partial sums of 1/|mu_n| over the channels with nonzero momentum.

    The slope is a least-squares fit of the sums against log n over the
    upper half of the indices; it tends to B/pi.
    """
    channels = [ch for ch in momenta(spectrum) if not ch.on_branch_cut]
    indices = np.array([ch.n for ch in channels])
    sums = np.cumsum([1.0 / abs(ch.mu) for ch in channels])
    tail = slice(len(channels) // 2, None)
    if len(channels) >= 4:
        slope = float(np.polyfit(np.log(indices[tail]), sums[tail], 1)[0])
    else:
        slope = math.nan
    return MuntzDiagnostics(indices=indices, partial_sums=sums, slope=slope, expected_slope=spectrum.B / math.pi)
