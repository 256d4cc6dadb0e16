#!/usr/bin/env python3
"""Eigendecomposition of shift operators and the graph Fourier transform."""
from dataclasses import dataclass
from typing import Any
from typing import Optional

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from gspkit.graphs import Gso
from gspkit.graphs import is_directed_cycle
from gspkit.graphs import make_gso
from gspkit.tools import as_real
from gspkit.tools import GspDataError
from gspkit.tools import GspNumericalError
from gspkit.tools import relative_gap

DECOMPOSITION_TOL: float = 1e-10
"""Tolerance of the eigen-residual and inverse-basis checks."""
CLUSTER_TOL: float = 1e-8
"""Eigenvalues closer than this (relative to max(1, |lambda|_max)) form a cluster."""


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:

    eigenvectors: NDArray
    """N x N eigenvector matrix V (columns), possibly complex."""
    eigenvalues: NDArray
    """Eigenvalues aligned with the columns of V, possibly complex."""
    inverse_basis: NDArray
    """V^{-1}, the GFT matrix."""
    ordering: NDArray[np.int64]
    """Eigen indices sorted by increasing variation."""
    orthonormal: bool
    """Whether V^{-1} is the conjugate transpose of V."""
    gso: Gso
    """Decomposed shift operator."""
    clusters: NDArray[np.int64]
    """Cluster label of each eigen index; equal labels mark numerically repeated eigenvalues."""

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def fingerprint(self) -> str:
        return self.gso.fingerprint

    @property
    def is_real(self) -> bool:
        return not (
            np.iscomplexobj(self.eigenvectors)
            or np.iscomplexobj(self.eigenvalues)
        )

    @property
    def has_repeated_eigenvalues(self) -> bool:
        return len(np.unique(self.clusters)) < self.n


@dataclass(frozen=True, eq=False)
class SignalMatrix:

    values: NDArray[np.float64]
    """N x M matrix whose columns are graph signals."""

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise GspDataError(
                f"Signal: signal matrix should be 2D, got {values.ndim} dimensions."
            )
        if not np.all(np.isfinite(values)):
            raise GspDataError("Signal: signal matrix has non-finite entries.")

        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


def as_signal_matrix(xs: Any) -> SignalMatrix:
    if isinstance(xs, SignalMatrix):
        return xs
    return SignalMatrix(values=xs)


def decompose(
    s: Gso,
    eigenvectors: Optional[NDArray] = None,
    eigenvalues: Optional[NDArray] = None,
) -> SpectralDecomposition:
    """Eigendecomposition S = V diag(lambda) V^{-1}.

    - symmetric S: real orthonormal V, ascending eigenvalues;
    - directed cycle adjacency: DFT columns v_k[n] = exp(i 2 pi k n / N) / sqrt(N),
      lambda_k = exp(-i 2 pi k / N), produced analytically;
    - random-walk Laplacian: through the normalized Laplacian similarity;
    - anything else only with a caller supplied (eigenvectors, eigenvalues).

    Each eigenvector is scaled so that its largest-magnitude entry is positive real.
    """

    n = s.n

    if eigenvectors is not None or eigenvalues is not None:
        if eigenvectors is None or eigenvalues is None:
            raise GspDataError(
                "Spectral: supply both eigenvectors and eigenvalues."
            )
        vecs = np.asarray(eigenvectors)
        vals = np.asarray(eigenvalues)
        if vecs.shape != (n, n) or vals.shape != (n,):
            raise GspDataError(
                f"Spectral: supplied decomposition has shapes {vecs.shape}, {vals.shape}; expected ({n}, {n}), ({n},)."
            )
        vecs = _fix_phase(vecs)
        try:
            inverse = np.linalg.inv(vecs)
        except np.linalg.LinAlgError:
            raise GspNumericalError(
                "Spectral: supplied eigenvectors are not invertible."
            )
        orthonormal = bool(
            np.allclose(inverse, vecs.conj().T, atol=DECOMPOSITION_TOL)
        )
        if orthonormal:
            inverse = vecs.conj().T

    elif is_directed_cycle(s):
        idx = np.arange(n)
        vecs = np.exp(2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)
        vals = np.exp(-2j * np.pi * idx / n)
        inverse = vecs.conj().T
        orthonormal = True

    elif s.variant == "random-walk-laplacian":
        deg = s.source.degrees()
        if np.any(deg <= 0):
            raise GspDataError(
                "Spectral: random-walk Laplacian decomposition needs positive degrees."
            )
        vals, vecs_norm = scipy.linalg.eigh(
            make_gso(s.source, "normalized-laplacian").matrix
        )
        vecs_norm = _fix_phase(vecs_norm)
        vecs = vecs_norm / np.sqrt(deg)[:, None]
        inverse = vecs_norm.T * np.sqrt(deg)[None, :]
        orthonormal = False

    elif s.is_symmetric:
        vals, vecs = scipy.linalg.eigh(s.matrix)
        vecs = _fix_phase(vecs)
        inverse = vecs.T
        orthonormal = True

    else:
        raise GspDataError(
            "Spectral: non-symmetric shift operator needs a supplied decomposition (polynomial filtering works without one)."
        )

    _check_decomposition(s, vecs, vals, inverse)

    vecs = _frozen(vecs)
    vals = _frozen(vals)
    inverse = _frozen(inverse)

    return SpectralDecomposition(
        eigenvectors=vecs,
        eigenvalues=vals,
        inverse_basis=inverse,
        ordering=_frozen(_variation_order(s, vecs, vals)),
        orthonormal=orthonormal,
        gso=s,
        clusters=_frozen(eigenvalue_clusters(vals)),
    )


def gft(d: SpectralDecomposition, x: NDArray) -> NDArray:
    """Graph Fourier transform x_hat = V^{-1} x (columns of a 2D x are transformed independently)."""

    x = _check_length(d, x, "signal")
    return as_real(d.inverse_basis @ x)


def igft(d: SpectralDecomposition, x_hat: NDArray) -> NDArray:
    """Inverse graph Fourier transform x = V x_hat."""

    x_hat = _check_length(d, x_hat, "spectrum")
    return as_real(d.eigenvectors @ x_hat)


def frequency_order(d: SpectralDecomposition) -> NDArray[np.int64]:
    """Eigen indices by increasing variation.

    Laplacians: ascending eigenvalue. Other operators: ascending
    ||v - S v / |lambda|_max||_2^2. Ties keep the original index order.
    """
    return _variation_order(d.gso, d.eigenvectors, d.eigenvalues)


def total_variation(s: Gso, x: NDArray[np.float64]) -> float:
    """Variation of a graph signal.

    Laplacians: x^T L x, computed both as a quadratic form and as the edge sum
    sum_{(i,j)} A_ij (x_i - x_j)^2 (degree-normalized differences for the
    normalized Laplacian), the two being required to agree to 1e-10.
    Symmetric adjacency or custom operators: ||x - S x / |lambda|_max||_2^2.
    """

    x = np.asarray(x, dtype=np.float64)
    if x.shape != (s.n,):
        raise GspDataError(
            f"Spectral: signal of shape {x.shape} does not match N={s.n}."
        )

    if s.variant in ("combinatorial-laplacian", "normalized-laplacian"):
        quadratic = float(x @ s.matrix @ x)
        edge_sum = _edge_sum_variation(s, x)

        if relative_gap(quadratic, edge_sum) > DECOMPOSITION_TOL:
            raise GspNumericalError(
                f"Spectral: quadratic form {quadratic} and edge sum {edge_sum} disagree."
            )
        return max(quadratic, 0.0)

    if s.variant in ("adjacency", "custom"):
        if not s.is_symmetric:
            raise GspDataError(
                "Spectral: adjacency variation needs a symmetric operator."
            )
        radius = float(np.max(np.abs(scipy.linalg.eigvalsh(s.matrix))))
        if radius == 0.0:
            radius = 1.0
        diff = x - s.matrix @ x / radius
        return float(diff @ diff)

    raise GspDataError(
        f"Spectral: total variation is not supported for {s.variant}."
    )


def eigenvalue_clusters(
    eigenvalues: NDArray, tol: float = CLUSTER_TOL
) -> NDArray[np.int64]:
    """Label numerically repeated eigenvalues with a common cluster id."""

    vals = np.asarray(eigenvalues)
    n = vals.shape[0]
    scale = max(1.0, float(np.max(np.abs(vals), initial=0.0)))

    order = np.lexsort((vals.imag, vals.real)) if np.iscomplexobj(
        vals
    ) else np.argsort(vals, kind="stable")

    labels = np.empty(n, dtype=np.int64)
    label = 0
    for pos, idx in enumerate(order):
        if pos > 0 and abs(vals[idx] - vals[order[pos - 1]]) >= tol * scale:
            label += 1
        labels[idx] = label

    return labels


def spectrum_record(
    d: SpectralDecomposition, coefficients: Optional[NDArray] = None
) -> dict[str, Any]:
    """JSON-ready spectrum description; complex numbers become [re, im] pairs."""

    record: dict[str, Any] = {
        "eigenvalues": _json_numbers(d.eigenvalues),
        "ordering": [int(i) for i in d.ordering],
        "coefficients": []
        if coefficients is None
        else _json_numbers(np.asarray(coefficients)),
    }
    return record


def _json_numbers(values: NDArray) -> list:
    if np.iscomplexobj(values):
        return [[float(v.real), float(v.imag)] for v in values.ravel()]
    return [float(v) for v in values.ravel()]


def _variation_order(s: Gso, vecs: NDArray, vals: NDArray) -> NDArray[np.int64]:

    if s.is_laplacian:
        return np.argsort(np.real(vals), kind="stable")

    radius = float(np.max(np.abs(vals), initial=0.0))
    if radius == 0.0:
        radius = 1.0

    shifted = vecs - s.matrix @ vecs / radius
    variation = np.sum(np.abs(shifted) ** 2, axis=0)

    return np.argsort(variation, kind="stable")


def _fix_phase(vecs: NDArray) -> NDArray:
    """Make the largest-magnitude entry of every column positive real."""

    vecs = np.array(vecs)
    peak = np.argmax(np.abs(vecs), axis=0)
    pivot = vecs[peak, np.arange(vecs.shape[1])]
    if np.iscomplexobj(vecs):
        phase = np.conj(pivot) / np.abs(pivot)
    else:
        phase = np.sign(pivot)
    phase[pivot == 0] = 1
    return vecs * phase[None, :]


def _check_decomposition(
    s: Gso, vecs: NDArray, vals: NDArray, inverse: NDArray
) -> None:

    n = s.n
    scale = np.linalg.norm(s.matrix, "fro")
    if scale == 0.0:
        scale = 1.0

    residual = np.linalg.norm(s.matrix @ vecs - vecs * vals[None, :], "fro")
    if residual / scale > DECOMPOSITION_TOL:
        raise GspNumericalError(
            f"Spectral: eigen residual {residual / scale:.3e} exceeds {DECOMPOSITION_TOL}."
        )

    identity_gap = np.max(np.abs(inverse @ vecs - np.eye(n)))
    if identity_gap > DECOMPOSITION_TOL:
        raise GspNumericalError(
            f"Spectral: inverse basis error {identity_gap:.3e} exceeds {DECOMPOSITION_TOL}."
        )


def _check_length(d: SpectralDecomposition, x: NDArray, what: str) -> NDArray:

    x = np.asarray(x)
    if x.ndim not in (1, 2) or x.shape[0] != d.n:
        raise GspDataError(
            f"Spectral: {what} of shape {x.shape} does not match N={d.n}."
        )
    return x


def _frozen(values: NDArray) -> NDArray:
    values = np.array(values)
    values.setflags(write=False)
    return values


def _edge_sum_variation(s: Gso, x: NDArray[np.float64]) -> float:

    g = s.source
    if g is None:
        raise GspDataError("Spectral: Laplacian variation needs the source graph.")

    if s.variant == "combinatorial-laplacian":
        scaled = x
    else:
        deg = g.degrees()
        scaled = np.zeros_like(x)
        scaled[deg > 0] = x[deg > 0] / np.sqrt(deg[deg > 0])

    return float(sum(w * (scaled[i] - scaled[j]) ** 2 for i, j, w in g.edges))
