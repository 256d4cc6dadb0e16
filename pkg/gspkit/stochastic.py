#!/usr/bin/env python3
"""Stationary graph processes.

A zero-mean process x is stationary in S when x = H(S) z with z white, i.e.
when its covariance V diag(p) V^T is a polynomial of S. p is the power
spectral density, indexed by eigenvalue position.
"""
from dataclasses import dataclass
from typing import Any
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from gspkit.filters import apply_response
from gspkit.graphs import Gso
from gspkit.spectral import as_signal_matrix
from gspkit.spectral import SignalMatrix
from gspkit.spectral import SpectralDecomposition
from gspkit.tools import GspDataError
from gspkit.tools import standard_normal_columns


@dataclass(frozen=True, eq=False)
class PsdEstimate:

    values: NDArray[np.float64]
    """Nonnegative p_l aligned with eigenvalue indices."""
    sample_count: int = 0
    """Number of realizations behind the estimate (0 for a prescribed PSD)."""
    fingerprint: Optional[str] = None
    """Fingerprint of the decomposition the PSD is aligned with."""

    def __post_init__(self):

        values = np.atleast_1d(np.array(self.values, dtype=np.float64))
        if values.ndim != 1:
            raise GspDataError("PSD: values should be a vector.")
        if not np.all(np.isfinite(values)):
            raise GspDataError("PSD: values should be finite.")
        if np.any(values < 0):
            raise GspDataError(
                f"PSD: negative entries at {np.flatnonzero(values < 0).tolist()}."
            )

        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def to_record(self) -> dict[str, Any]:
        return {
            "eigenvalue_index_psd": [float(v) for v in self.values],
            "samples": int(self.sample_count),
        }


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:

    matrix: NDArray[np.float64]
    """Symmetric PSD covariance C."""
    sample_count: int
    """Number of realizations M."""


def sample_covariance(xs: Any, remove_mean: bool = False) -> CovarianceEstimate:
    """C = (1/M) X X^T, with the sample mean removed first when asked."""

    xs = as_signal_matrix(xs)
    values = xs.values
    if remove_mean:
        values = values - values.mean(axis=1, keepdims=True)

    cov = values @ values.T / xs.m
    cov = 0.5 * (cov + cov.T)
    cov.setflags(write=False)

    return CovarianceEstimate(matrix=cov, sample_count=xs.m)


def population_covariance(
    d: SpectralDecomposition, psd: PsdEstimate
) -> NDArray[np.float64]:
    """V diag(p) V^T."""

    _check_psd(d, psd)
    vecs = _real_orthonormal_basis(d)
    return (vecs * psd.values[None, :]) @ vecs.T


def synthesize_stationary(
    d: SpectralDecomposition, psd: PsdEstimate, m: int, seed: int = 0
) -> SignalMatrix:
    """M realizations x = V diag(sqrt(p)) V^T z, z standard normal.

    Column j depends only on (seed, j).
    """

    _check_psd(d, psd)
    if m < 1:
        raise GspDataError(f"PSD: number of realizations should be >= 1, got {m}.")

    vecs = _real_orthonormal_basis(d)
    z = standard_normal_columns(seed, d.n, m)
    colour = (vecs * np.sqrt(psd.values)[None, :]) @ vecs.T

    return SignalMatrix(values=colour @ z)


def stationarity_score(c: CovarianceEstimate, s: Gso) -> float:
    """||C S - S C||_F / (||C||_F ||S||_F); zero iff C and S commute."""

    if not s.is_symmetric:
        raise GspDataError("PSD: stationarity score needs a symmetric operator.")

    cov = np.asarray(c.matrix)
    if cov.shape != (s.n, s.n):
        raise GspDataError(
            f"PSD: covariance of shape {cov.shape} does not match N={s.n}."
        )

    scale = np.linalg.norm(cov, "fro") * np.linalg.norm(s.matrix, "fro")
    if scale == 0.0:
        return 0.0

    commutator = cov @ s.matrix - s.matrix @ cov
    return float(np.linalg.norm(commutator, "fro") / scale)


def periodogram(
    d: SpectralDecomposition, xs: Any, average_clusters: bool = True
) -> PsdEstimate:
    """p_l = (1/M) sum_m |[V^{-1} x_m]_l|^2.

    Entries within a cluster of repeated eigenvalues are replaced by their mean.
    """

    xs = as_signal_matrix(xs)
    if xs.n != d.n:
        raise GspDataError(
            f"PSD: signals with N={xs.n} do not match the decomposition N={d.n}."
        )

    coefficients = d.inverse_basis @ xs.values
    power = np.mean(np.abs(coefficients) ** 2, axis=1)

    if average_clusters:
        power = _cluster_average(d, power)

    return PsdEstimate(values=power, sample_count=xs.m, fingerprint=d.fingerprint)


def wiener_gain(psd: PsdEstimate, noise_variance: float) -> NDArray[np.float64]:
    """p / (p + sigma^2), 0 where both vanish."""

    if noise_variance < 0:
        raise GspDataError(
            f"PSD: noise variance should be nonnegative, got {noise_variance}."
        )

    denominator = psd.values + noise_variance
    gain = np.zeros_like(psd.values)
    positive = denominator > 0
    gain[positive] = psd.values[positive] / denominator[positive]
    return gain


def wiener_denoise(
    d: SpectralDecomposition,
    psd: PsdEstimate,
    noise_variance: float,
    y: NDArray,
) -> NDArray:
    """Spectral Wiener estimate of a stationary signal observed in white noise."""

    _check_psd(d, psd)
    return apply_response(d, wiener_gain(psd, noise_variance), y)


def _check_psd(d: SpectralDecomposition, psd: PsdEstimate) -> None:

    if psd.n != d.n:
        raise GspDataError(
            f"PSD: {psd.n} entries do not match the decomposition N={d.n}."
        )
    if psd.fingerprint is not None and psd.fingerprint != d.fingerprint:
        raise GspDataError("PSD: estimate belongs to a different shift operator.")


def _real_orthonormal_basis(d: SpectralDecomposition) -> NDArray[np.float64]:

    if not (d.is_real and d.orthonormal):
        raise GspDataError(
            "PSD: stationary synthesis needs a real orthonormal decomposition."
        )
    return d.eigenvectors


def _cluster_average(
    d: SpectralDecomposition, values: NDArray[np.float64]
) -> NDArray[np.float64]:

    out = np.array(values)
    for label in np.unique(d.clusters):
        members = d.clusters == label
        if np.count_nonzero(members) > 1:
            out[members] = np.mean(values[members])
    return out
