#!/usr/bin/env python3
"""Sampling, interpolation and source identification on graphs."""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from gspkit.filters import filter_matrix
from gspkit.filters import GraphFilter
from gspkit.filters import polynomial_matrix
from gspkit.graphs import Gso
from gspkit.spectral import SpectralDecomposition
from gspkit.tools import as_real
from gspkit.tools import GspDataError
from gspkit.tools import GspNumericalError
from gspkit.tools import system_logger

PINV_CUTOFF: float = 1e-10
"""Relative singular value cutoff of the pseudoinverse."""
RANK_TOL: float = 1e-10
"""Smallest singular value of Phi_M V_K accepted for bandlimited recovery."""
CONDITION_LIMIT: float = 1e12
NORMAL_EQUATION_TOL: float = 1e-8


@dataclass(frozen=True)
class SamplingSet:

    indices: tuple[int, ...]
    """Sampled vertices M, strictly increasing."""
    n: int
    """Ambient number of vertices N."""

    def __post_init__(self):

        indices = tuple(int(i) for i in self.indices)
        if len(indices) < 1:
            raise GspDataError("Sampling: sampling set should not be empty.")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise GspDataError(
                f"Sampling: indices should be strictly increasing, got {list(indices)}."
            )
        if indices[0] < 0 or indices[-1] >= self.n:
            raise GspDataError(
                f"Sampling: indices should lie in [0, {self.n}), got {list(indices)}."
            )
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_vertices(cls, vertices, n: int) -> "SamplingSet":
        """Sampling set from an unordered collection of distinct vertices."""

        vertices = [int(v) for v in vertices]
        if len(set(vertices)) != len(vertices):
            raise GspDataError(f"Sampling: repeated vertices in {vertices}.")
        return cls(indices=tuple(sorted(vertices)), n=n)

    @property
    def size(self) -> int:
        return len(self.indices)

    def selection_matrix(self) -> NDArray[np.float64]:
        """|M| x N selection matrix Phi_M."""

        phi = np.zeros((self.size, self.n))
        phi[np.arange(self.size), list(self.indices)] = 1.0
        return phi

    def zero_pad(self, x_m: NDArray) -> NDArray:
        """Phi_M^T x_M."""

        x_m = np.asarray(x_m)
        if x_m.shape[0] != self.size:
            raise GspDataError(
                f"Sampling: {x_m.shape[0]} samples for a set of size {self.size}."
            )
        out = np.zeros((self.n,) + x_m.shape[1:], dtype=x_m.dtype)
        out[list(self.indices)] = x_m
        return out


@dataclass(frozen=True, eq=False)
class BandlimitedModel:

    decomposition: SpectralDecomposition
    """Decomposition providing the frequency-ordered basis."""
    bandwidth: int
    """K, the number of retained frequencies."""

    def __post_init__(self):
        if not 1 <= self.bandwidth <= self.decomposition.n:
            raise GspDataError(
                f"Sampling: bandwidth should lie in [1, {self.decomposition.n}], got {self.bandwidth}."
            )

    @property
    def basis(self) -> NDArray:
        """V_K, the first K eigenvectors in frequency order."""
        d = self.decomposition
        return d.eigenvectors[:, d.ordering[: self.bandwidth]]

    def synthesize(self, coefficients: NDArray) -> NDArray:
        """x = V_K beta."""
        return as_real(self.basis @ np.asarray(coefficients))


@dataclass(frozen=True, eq=False)
class SourceEstimate:

    support: tuple[int, ...]
    """Selected source vertices, in selection order."""
    values: NDArray[np.float64]
    """Source amplitudes aligned with `support`."""
    residual_norm: float
    """||x - H z||_2."""
    coherence: float
    """Mutual coherence of the normalized columns of H."""

    def dense(self, n: int) -> NDArray[np.float64]:
        z = np.zeros(n)
        z[list(self.support)] = self.values
        return z


def sample(x: NDArray, m: SamplingSet) -> NDArray:
    """x_M = Phi_M x."""

    x = np.asarray(x)
    if x.shape[0] != m.n:
        raise GspDataError(
            f"Sampling: signal of length {x.shape[0]} does not match N={m.n}."
        )
    return x[list(m.indices)]


def sampling_quality(b: BandlimitedModel, m: SamplingSet) -> float:
    """sigma_min(Phi_M V_K), zero when recovery is impossible."""

    _check_model_set(b, m)
    return _sigma_min(b.basis[list(m.indices)])


def interpolate_bandlimited(
    b: BandlimitedModel, m: SamplingSet, x_m: NDArray
) -> NDArray:
    """x* = V_K (Phi_M V_K)^+ x_M.

    Exact when the signal is K-bandlimited, otherwise the least-squares
    bandlimited fit of the samples.
    """

    _check_model_set(b, m)
    x_m = np.asarray(x_m)
    if x_m.shape[0] != m.size:
        raise GspDataError(
            f"Sampling: {x_m.shape[0]} samples for a set of size {m.size}."
        )
    if m.size < b.bandwidth:
        raise GspDataError(
            f"Sampling: {m.size} samples cannot determine K={b.bandwidth} coefficients."
        )

    sampled_basis = b.basis[list(m.indices)]
    sigma_min = _sigma_min(sampled_basis)
    if sigma_min <= RANK_TOL:
        raise GspNumericalError(
            f"Sampling: Phi_M V_K is rank deficient (smallest singular value {sigma_min:.3e})."
        )

    beta = np.linalg.pinv(sampled_basis, rcond=PINV_CUTOFF) @ x_m
    return as_real(b.basis @ beta)


def select_sampling_set(b: BandlimitedModel, m_size: int) -> SamplingSet:
    """Greedy sampling set maximizing sigma_min(Phi_M V_K) at every addition.

    Ties go to the lowest vertex index.
    """

    n = b.decomposition.n
    if not b.bandwidth <= m_size <= n:
        raise GspDataError(
            f"Sampling: sampling set size should lie in [{b.bandwidth}, {n}], got {m_size}."
        )

    basis = b.basis
    chosen: list[int] = []
    best_sigma = 0.0
    for _ in range(m_size):
        best_vertex = -1
        best_sigma = -np.inf
        for v in range(n):
            if v in chosen:
                continue
            sigma = _sigma_min(basis[chosen + [v]])
            if sigma > best_sigma + 1e-12:
                best_vertex, best_sigma = v, sigma
        chosen.append(best_vertex)

    system_logger("SAMPLING", f"greedy set of size {m_size}, sigma_min", best_sigma)

    return SamplingSet.from_vertices(chosen, n)


def interpolate_regularized(
    s: Gso,
    hfilt: GraphFilter,
    alpha: float,
    m: SamplingSet,
    x_m: NDArray,
    d: Optional[SpectralDecomposition] = None,
) -> NDArray[np.float64]:
    """Minimizer of ||x_M - Phi_M x||^2 + alpha ||(I - H(S)) x||^2.

    Closed form (Phi^T Phi + alpha (I - H)^T (I - H))^{-1} Phi^T x_M, where
    (I - H)^T (I - H) = (I - H)^2 for symmetric H.
    """

    if not alpha > 0:
        raise GspDataError(f"Sampling: alpha should be positive, got {alpha}.")
    _check_samples(s, m, x_m)

    complement = np.eye(s.n) - filter_matrix(hfilt, s, d)
    penalty = complement.T @ complement

    return _regularized_solve(m, np.asarray(x_m, dtype=np.float64), alpha, penalty)


def ssl_labels(
    s: Gso,
    alpha: float,
    labeled: SamplingSet,
    labels: NDArray,
    hfilt: Optional[GraphFilter] = None,
    d: Optional[SpectralDecomposition] = None,
) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """Semi-supervised scores minimizing ||labels - Phi_M x||^2 + alpha x^T H(S) x.

    H defaults to S itself (the Laplacian regularizer). Classes are the signs of
    the scores with sign(0) = +1.
    """

    if not alpha > 0:
        raise GspDataError(f"SSL: alpha should be positive, got {alpha}.")
    _check_samples(s, labeled, labels)

    penalty = np.array(s.matrix) if hfilt is None else filter_matrix(hfilt, s, d)
    penalty = 0.5 * (penalty + penalty.T)

    scores = _regularized_solve(
        labeled, np.asarray(labels, dtype=np.float64), alpha, penalty
    )
    classes = np.where(scores >= 0, 1, -1).astype(np.int64)

    return scores, classes


def tikhonov_denoise(
    s: Gso, y: NDArray, alpha: float, power: int = 1
) -> NDArray[np.float64]:
    """Minimizer of ||y - x||^2 + alpha x^T S^power x, i.e. (I + alpha S^power)^{-1} y."""

    if not alpha >= 0:
        raise GspDataError(f"Denoise: alpha should be nonnegative, got {alpha}.")
    if power < 1:
        raise GspDataError(f"Denoise: power should be >= 1, got {power}.")

    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] != s.n:
        raise GspDataError(
            f"Denoise: signal of length {y.shape[0]} does not match N={s.n}."
        )

    coefficients = np.zeros(power + 1)
    coefficients[0] = 1.0
    coefficients[power] += alpha
    system = polynomial_matrix(s, coefficients)
    system = 0.5 * (system + system.T)

    return _solve_checked(system, y, "Denoise")


def identify_sources(hmat: NDArray, x: NDArray, k: int) -> SourceEstimate:
    """Orthogonal matching pursuit of x = H z with ||z||_0 = k.

    Each round picks the column of H most correlated (after normalization) with
    the residual and refits all selected amplitudes by least squares.
    """

    hmat = np.asarray(hmat, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    n = hmat.shape[0]

    if hmat.ndim != 2 or hmat.shape[1] != n or x.shape != (n,):
        raise GspDataError(
            f"Sources: filter matrix {hmat.shape} and signal {x.shape} do not match."
        )
    if k < 0 or k > n:
        raise GspDataError(f"Sources: sparsity should lie in [0, {n}], got {k}.")

    norms = np.linalg.norm(hmat, axis=0)
    if np.any(norms == 0.0):
        raise GspDataError(
            f"Sources: filter matrix has zero columns {np.flatnonzero(norms == 0).tolist()}."
        )
    atoms = hmat / norms[None, :]

    gram = np.abs(atoms.T @ atoms)
    np.fill_diagonal(gram, 0.0)
    coherence = float(np.max(gram)) if n > 1 else 0.0
    system_logger("SOURCES", "mutual coherence of the filter columns", coherence)

    support: list[int] = []
    values = np.zeros(0)
    residual = x.copy()
    for _ in range(k):
        scores = np.abs(atoms.T @ residual)
        scores[support] = -np.inf
        support.append(int(np.argmax(scores)))
        values, *_ = np.linalg.lstsq(hmat[:, support], x, rcond=None)
        residual = x - hmat[:, support] @ values

    return SourceEstimate(
        support=tuple(support),
        values=values,
        residual_norm=float(np.linalg.norm(residual)),
        coherence=coherence,
    )


def _regularized_solve(
    m: SamplingSet, x_m: NDArray, alpha: float, penalty: NDArray
) -> NDArray[np.float64]:

    phi = m.selection_matrix()
    system = phi.T @ phi + alpha * penalty
    rhs = phi.T @ x_m

    return _solve_checked(system, rhs, "Sampling")


def _solve_checked(system: NDArray, rhs: NDArray, prefix: str) -> NDArray:

    condition = np.linalg.cond(system)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise GspNumericalError(
            f"{prefix}: system matrix is singular (condition {condition:.3e})."
        )

    solution = np.linalg.solve(system, rhs)

    residual = np.linalg.norm(system @ solution - rhs)
    if residual > NORMAL_EQUATION_TOL * max(np.linalg.norm(rhs), 1.0):
        raise GspNumericalError(
            f"{prefix}: normal equations residual {residual:.3e} is too large."
        )

    return solution


def _check_model_set(b: BandlimitedModel, m: SamplingSet) -> None:
    if m.n != b.decomposition.n:
        raise GspDataError(
            f"Sampling: sampling set over N={m.n} does not match N={b.decomposition.n}."
        )


def _check_samples(s: Gso, m: SamplingSet, x_m: NDArray) -> None:

    if m.n != s.n:
        raise GspDataError(
            f"Sampling: sampling set over N={m.n} does not match N={s.n}."
        )
    if np.asarray(x_m).shape[0] != m.size:
        raise GspDataError(
            f"Sampling: {np.asarray(x_m).shape[0]} samples for a set of size {m.size}."
        )


def _sigma_min(matrix: NDArray) -> float:
    if matrix.size == 0:
        return 0.0
    return float(np.min(np.linalg.svd(matrix, compute_uv=False)))
