#!/usr/bin/env python3
"""Graph filters.

A filter H(S) has three interchangeable descriptions:
    - taps h:           H(S) = sum_l h_l S^l
    - response h_hat:   H(S) = V diag(h_hat) V^{-1}
    - rational a:       H(S) = (sum_l a_l S^l)^{-1}
"""
from dataclasses import dataclass
from typing import Callable
from typing import Optional

import numpy as np
import scipy.linalg
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import polynomial as nppoly
from numpy.typing import NDArray

from gspkit.graphs import Gso
from gspkit.spectral import SpectralDecomposition
from gspkit.tools import as_real
from gspkit.tools import GspDataError
from gspkit.tools import GspNumericalError
from gspkit.tools import map_columns
from gspkit.tools import system_logger

Kernel = Callable[[NDArray], NDArray]

FILTER_FORMS = ["taps", "response", "rational"]

CONDITION_LIMIT: float = 1e12
"""Largest condition number accepted for the IIR operator."""
VANDERMONDE_LIMIT: float = 1e14
"""Largest condition number accepted for the response-to-taps Vandermonde solve."""
IIR_RESIDUAL_TOL: float = 1e-8
CLUSTER_RESPONSE_TOL: float = 1e-8


@dataclass(frozen=True, eq=False)
class GraphFilter:

    form: str
    """One of `FILTER_FORMS`."""
    taps: Optional[NDArray] = None
    """h_0, ..., h_L (taps form)."""
    response: Optional[NDArray] = None
    """h_hat aligned with eigenvalue indices (response form)."""
    denominator: Optional[NDArray] = None
    """a_0, ..., a_{L-1} (rational form)."""
    fingerprint: Optional[str] = None
    """Fingerprint of the decomposition a response belongs to."""

    def __post_init__(self):

        if self.form not in FILTER_FORMS:
            raise GspDataError(
                f"Filter: unknown form {self.form}. Should be one of {FILTER_FORMS}."
            )

        values = {
            "taps": self.taps,
            "response": self.response,
            "rational": self.denominator,
        }[self.form]

        if values is None:
            raise GspDataError(f"Filter: {self.form} form without coefficients.")

        values = np.atleast_1d(np.array(values))
        if values.ndim != 1 or values.shape[0] < 1:
            raise GspDataError(
                f"Filter: coefficients should be a non-empty vector, got shape {values.shape}."
            )
        if not np.all(np.isfinite(values)):
            raise GspDataError("Filter: coefficients should be finite.")

        values.setflags(write=False)
        object.__setattr__(
            self,
            {"taps": "taps", "response": "response", "rational": "denominator"}[
                self.form
            ],
            values,
        )

    @classmethod
    def from_taps(
        cls, taps: NDArray, s: Optional[Gso] = None
    ) -> "GraphFilter":
        """Taps filter; reduced below degree N when `s` is given and the taps are longer."""

        taps = np.atleast_1d(np.asarray(taps))
        if s is not None and taps.shape[0] > s.n:
            taps = reduce_taps(taps, s)
        return cls(form="taps", taps=taps)

    @classmethod
    def from_response(
        cls, d: SpectralDecomposition, response: NDArray
    ) -> "GraphFilter":
        response = np.atleast_1d(np.asarray(response))
        if response.shape != (d.n,):
            raise GspDataError(
                f"Filter: response of length {response.shape[0]} does not match N={d.n}."
            )
        return cls(form="response", response=response, fingerprint=d.fingerprint)

    @classmethod
    def from_rational(cls, denominator: NDArray) -> "GraphFilter":
        return cls(form="rational", denominator=denominator)

    @property
    def coefficients(self) -> NDArray:
        if self.form == "taps":
            return self.taps
        if self.form == "response":
            return self.response
        return self.denominator


@dataclass(frozen=True, eq=False)
class ChebyshevExpansion:

    coefficients: NDArray[np.float64]
    """c_0, ..., c_K of sum_k c_k T_k on the mapped interval."""
    interval: tuple[float, float]
    """[lambda_lo, lambda_hi] mapped onto [-1, 1]."""

    @property
    def order(self) -> int:
        return self.coefficients.shape[0] - 1


def apply_polynomial(
    s: Gso, h: NDArray, x: NDArray, threads: Optional[int] = None
) -> NDArray:
    """y = sum_l h_l S^l x by Horner multiply-accumulate on the sparse operator.

    S^l is never formed. A 2D `x` is filtered column by column, the columns
    being split over a thread pool capped by `GSPKIT_THREADS`.
    """

    h = np.atleast_1d(np.asarray(h))
    if h.ndim != 1 or h.shape[0] < 1 or not np.all(np.isfinite(h)):
        raise GspDataError("Filter: taps should be a non-empty finite vector.")

    x = _check_signal(s.n, x)
    op = s.to_csr()

    def horner(block: NDArray) -> NDArray:
        y = h[-1] * block
        for coeff in h[-2::-1]:
            y = op @ y + coeff * block
        return y

    if x.ndim == 1:
        return horner(x)

    return map_columns(horner, x, threads)


def apply_response(
    d: SpectralDecomposition,
    response: NDArray,
    x: NDArray,
    fingerprint: Optional[str] = None,
) -> NDArray:
    """y = V diag(h_hat) V^{-1} x."""

    response = np.atleast_1d(np.asarray(response))
    if response.shape != (d.n,):
        raise GspDataError(
            f"Filter: response of length {response.shape[0]} does not match N={d.n}."
        )
    if fingerprint is not None and fingerprint != d.fingerprint:
        raise GspDataError(
            "Filter: response belongs to a different shift operator."
        )

    x = _check_signal(d.n, x)
    x_hat = d.inverse_basis @ x
    if x.ndim == 1:
        y_hat = response * x_hat
    else:
        y_hat = response[:, None] * x_hat

    return as_real(d.eigenvectors @ y_hat)


def apply_kernel(d: SpectralDecomposition, kernel: Kernel, x: NDArray) -> NDArray:
    """Spectral filtering with h_hat_l = kernel(lambda_l)."""
    return apply_response(d, evaluate_kernel(kernel, d.eigenvalues), x)


def apply_iir(s: Gso, a: NDArray, x: NDArray) -> NDArray:
    """Solve (sum_l a_l S^l) y = x by LU with partial pivoting."""

    x = _check_signal(s.n, x)
    operator = polynomial_matrix(s, a)

    condition = np.linalg.cond(operator)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise GspNumericalError(
            f"Filter: IIR operator is singular or ill-conditioned (condition {condition:.3e})."
        )

    lu, piv = scipy.linalg.lu_factor(operator)
    y = scipy.linalg.lu_solve((lu, piv), x)

    residual = np.linalg.norm(operator @ y - x)
    if residual > IIR_RESIDUAL_TOL * max(np.linalg.norm(x), 1e-300):
        raise GspNumericalError(
            f"Filter: IIR solve residual {residual:.3e} is too large."
        )

    return y


def polynomial_matrix(s: Gso, coefficients: NDArray) -> NDArray[np.float64]:
    """Dense sum_l c_l S^l by Horner on matrices."""

    coefficients = np.atleast_1d(np.asarray(coefficients, dtype=np.float64))
    if coefficients.shape[0] < 1 or not np.all(np.isfinite(coefficients)):
        raise GspDataError("Filter: coefficients should be a non-empty finite vector.")

    eye = np.eye(s.n)
    out = coefficients[-1] * eye
    for coeff in coefficients[-2::-1]:
        out = s.matrix @ out + coeff * eye
    return out


def taps_to_response(d: SpectralDecomposition, h: NDArray) -> NDArray:
    """h_hat_l = sum_k h_k lambda_l^k."""

    h = np.atleast_1d(np.asarray(h))
    return as_real(nppoly.polyval(d.eigenvalues, h))


def response_to_taps(d: SpectralDecomposition, response: NDArray) -> NDArray:
    """Taps realizing `response`, of degree (#distinct eigenvalues - 1).

    The response must be constant on every cluster of repeated eigenvalues.
    """

    response = np.atleast_1d(np.asarray(response))
    if response.shape != (d.n,):
        raise GspDataError(
            f"Filter: response of length {response.shape[0]} does not match N={d.n}."
        )

    labels = np.unique(d.clusters)
    scale = max(1.0, float(np.max(np.abs(response))))
    nodes = []
    values = []
    for label in labels:
        members = np.flatnonzero(d.clusters == label)
        spread = np.max(np.abs(response[members] - response[members[0]]))
        if spread > CLUSTER_RESPONSE_TOL * scale:
            raise GspDataError(
                f"Filter: response is not constant on the repeated eigenvalue cluster {members.tolist()}; no polynomial realizes it."
            )
        nodes.append(np.mean(d.eigenvalues[members]))
        values.append(np.mean(response[members]))

    vander = np.vander(np.asarray(nodes), increasing=True)
    condition = np.linalg.cond(vander)
    if not np.isfinite(condition) or condition > VANDERMONDE_LIMIT:
        raise GspNumericalError(
            f"Filter: Vandermonde system is too ill-conditioned (condition {condition:.3e})."
        )
    if condition > 1e8:
        system_logger("FILTER", "Vandermonde condition number", condition)

    return as_real(np.linalg.solve(vander, np.asarray(values)))


def reduce_taps(h: NDArray, s: Gso) -> NDArray:
    """Cayley-Hamilton reduction: remainder of h modulo the characteristic polynomial of S."""

    h = np.atleast_1d(np.asarray(h))
    h = h.astype(np.result_type(h, np.float64))
    if h.shape[0] <= s.n:
        return h

    roots = (
        scipy.linalg.eigvalsh(s.matrix)
        if s.is_symmetric
        else np.linalg.eigvals(s.matrix)
    )
    characteristic = np.real_if_close(np.poly(roots))[::-1]
    _, remainder = nppoly.polydiv(h, characteristic)

    reduced = np.zeros(s.n, dtype=h.dtype)
    reduced[: remainder.shape[0]] = (
        remainder if np.iscomplexobj(h) else np.real(remainder)
    )
    return reduced


def cascade(
    h1: GraphFilter,
    h2: GraphFilter,
    s: Optional[Gso] = None,
    d: Optional[SpectralDecomposition] = None,
) -> GraphFilter:
    """Series connection H2(S) H1(S).

    Taps cascades grow in degree and need `s` for the Cayley-Hamilton reduction,
    unless one side is a scalar gain.
    """

    if h1.form == "taps" and h2.form == "taps":
        if s is None and min(h1.taps.shape[0], h2.taps.shape[0]) > 1:
            raise GspDataError(
                "Filter: cascading taps filters needs the shift operator to keep at most N taps."
            )
        return GraphFilter.from_taps(np.convolve(h1.taps, h2.taps), s)

    if h1.form == "rational" and h2.form == "rational":
        return GraphFilter.from_rational(
            np.convolve(h1.denominator, h2.denominator)
        )

    if h1.form == "response" and h2.form == "response" and d is None:
        if h1.fingerprint != h2.fingerprint:
            raise GspDataError(
                "Filter: cannot cascade responses of different decompositions."
            )
        return GraphFilter(
            form="response",
            response=h1.response * h2.response,
            fingerprint=h1.fingerprint,
        )

    d = _require_decomposition(d, "cascade")
    return GraphFilter.from_response(
        d, to_response(h1, d) * to_response(h2, d)
    )


def parallel(
    h1: GraphFilter,
    h2: GraphFilter,
    s: Optional[Gso] = None,
    d: Optional[SpectralDecomposition] = None,
) -> GraphFilter:
    """Parallel connection H1(S) + H2(S)."""

    if h1.form == "taps" and h2.form == "taps":
        length = max(h1.taps.shape[0], h2.taps.shape[0])
        taps = np.zeros(length, dtype=np.result_type(h1.taps, h2.taps))
        taps[: h1.taps.shape[0]] += h1.taps
        taps[: h2.taps.shape[0]] += h2.taps
        return GraphFilter.from_taps(taps, s)

    if h1.form == "response" and h2.form == "response" and d is None:
        if h1.fingerprint != h2.fingerprint:
            raise GspDataError(
                "Filter: cannot combine responses of different decompositions."
            )
        return GraphFilter(
            form="response",
            response=h1.response + h2.response,
            fingerprint=h1.fingerprint,
        )

    d = _require_decomposition(d, "parallel connection")
    return GraphFilter.from_response(
        d, to_response(h1, d) + to_response(h2, d)
    )


def to_response(f: GraphFilter, d: SpectralDecomposition) -> NDArray:
    """Frequency response of any filter form on `d`."""

    if f.form == "taps":
        return taps_to_response(d, f.taps)

    if f.form == "response":
        if f.fingerprint is not None and f.fingerprint != d.fingerprint:
            raise GspDataError(
                "Filter: response belongs to a different shift operator."
            )
        return f.response

    denominator = nppoly.polyval(d.eigenvalues, f.denominator)
    if np.any(np.abs(denominator) == 0.0):
        raise GspNumericalError(
            "Filter: rational filter has a pole on the spectrum."
        )
    return as_real(1.0 / denominator)


def apply_filter(
    f: GraphFilter,
    x: NDArray,
    s: Optional[Gso] = None,
    d: Optional[SpectralDecomposition] = None,
) -> NDArray:
    """Apply any filter form; taps and rational forms need `s` (or `d`)."""

    if f.form == "response":
        d = _require_decomposition(d, "response filtering")
        return apply_response(d, f.response, x, f.fingerprint)

    if s is None:
        s = _require_decomposition(d, f"{f.form} filtering").gso

    if f.form == "taps":
        return apply_polynomial(s, f.taps, x)

    return apply_iir(s, f.denominator, x)


def filter_matrix(
    f: GraphFilter,
    s: Optional[Gso] = None,
    d: Optional[SpectralDecomposition] = None,
) -> NDArray[np.float64]:
    """Dense H(S)."""

    n = s.n if s is not None else _require_decomposition(d, "filter matrix").n
    return apply_filter(f, np.eye(n), s, d)


def evaluate_kernel(kernel: Kernel, eigenvalues: NDArray) -> NDArray:
    """Kernel values on the spectrum; scalar results are broadcast."""

    eigenvalues = np.asarray(eigenvalues)
    values = np.broadcast_to(
        np.asarray(kernel(eigenvalues)), eigenvalues.shape
    ).copy()

    if not np.all(np.isfinite(values)):
        bad = np.flatnonzero(~np.isfinite(values))
        raise GspDataError(
            f"Filter: kernel is not finite at eigenvalues {eigenvalues[bad].tolist()}."
        )
    return values


def chebyshev_fit(
    kernel: Kernel, order: int, interval: tuple[float, float]
) -> ChebyshevExpansion:
    """Chebyshev interpolant of `kernel` of degree `order` on `interval`."""

    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise GspDataError(
            f"Filter: Chebyshev interval should be increasing, got [{lo}, {hi}]."
        )
    if order < 0:
        raise GspDataError(f"Filter: Chebyshev order should be >= 0, got {order}.")

    nodes = npcheb.chebpts1(order + 1)
    lambdas = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    values = np.real(evaluate_kernel(kernel, lambdas))
    coefficients = npcheb.chebfit(nodes, values, order)

    return ChebyshevExpansion(coefficients=coefficients, interval=(lo, hi))


def chebyshev_apply(
    s: Gso,
    expansion: ChebyshevExpansion,
    x: NDArray,
    d: Optional[SpectralDecomposition] = None,
) -> NDArray:
    """sum_k c_k T_k(S_tilde) x by the three-term recurrence, S_tilde mapping the interval onto [-1, 1].

    When `d` is given, the spectrum is checked to lie inside the interval.
    """

    lo, hi = expansion.interval
    if d is not None:
        if d.fingerprint != s.fingerprint:
            raise GspDataError("Filter: decomposition belongs to a different shift operator.")
        slack = 1e-10 * max(1.0, abs(lo), abs(hi))
        vals = np.real(d.eigenvalues)
        if np.any(vals < lo - slack) or np.any(vals > hi + slack):
            raise GspNumericalError(
                f"Filter: spectrum [{vals.min()}, {vals.max()}] is outside the Chebyshev interval [{lo}, {hi}]."
            )

    x = _check_signal(s.n, x)
    op = s.to_csr()
    scale = 2.0 / (hi - lo)
    center = 0.5 * (hi + lo)

    def shifted(v: NDArray) -> NDArray:
        return scale * (op @ v - center * v)

    coeffs = expansion.coefficients
    t_prev = x
    y = coeffs[0] * t_prev
    if coeffs.shape[0] == 1:
        return y

    t_curr = shifted(x)
    y = y + coeffs[1] * t_curr
    for c in coeffs[2:]:
        t_prev, t_curr = t_curr, 2.0 * shifted(t_curr) - t_prev
        y = y + c * t_curr

    return y


def gershgorin_interval(s: Gso) -> tuple[float, float]:
    """Interval containing every Gershgorin disc of S (real parts)."""

    diag = np.diag(s.matrix)
    radius = np.sum(np.abs(s.matrix), axis=1) - np.abs(diag)
    lo = float(np.min(diag - radius))
    hi = float(np.max(diag + radius))
    if hi <= lo:
        hi = lo + 1.0
    return lo, hi


def kernel_filterbank(
    d: SpectralDecomposition, kernels: list[Kernel], x: NDArray
) -> NDArray:
    """Stack of J filtered signals c_j = kernel_j(S) x."""

    if len(kernels) < 1:
        raise GspDataError("Filter: filterbank needs at least one kernel.")
    return np.stack([apply_kernel(d, kernel, x) for kernel in kernels])


def filterbank_frame_bounds(
    d: SpectralDecomposition, kernels: list[Kernel]
) -> tuple[float, float]:
    """(min, max) over the spectrum of sum_j |kernel_j(lambda)|^2."""

    if len(kernels) < 1:
        raise GspDataError("Filter: filterbank needs at least one kernel.")

    energy = sum(
        np.abs(evaluate_kernel(kernel, d.eigenvalues)) ** 2 for kernel in kernels
    )
    return float(np.min(energy)), float(np.max(energy))


def heat_kernel(tau: float) -> Kernel:
    """exp(-tau lambda)."""
    return lambda lam: np.exp(-tau * np.asarray(lam))


def lowpass_kernel(cutoff: float) -> Kernel:
    """Rectangular low-pass: 1 for lambda <= cutoff, else 0."""
    return lambda lam: (np.real(np.asarray(lam)) <= cutoff).astype(np.float64)


def tikhonov_kernel(alpha: float, power: int = 1) -> Kernel:
    """1 / (1 + alpha lambda^power)."""
    return lambda lam: 1.0 / (1.0 + alpha * np.asarray(lam) ** power)


def tight_frame_pair(lambda_max: float) -> list[Kernel]:
    """cos/sin pair of theta(lambda) = pi lambda / (2 lambda_max); sum of squares is 1."""

    def theta(lam: NDArray) -> NDArray:
        return 0.5 * np.pi * np.clip(np.real(np.asarray(lam)) / lambda_max, 0.0, 1.0)

    return [lambda lam: np.cos(theta(lam)), lambda lam: np.sin(theta(lam))]


KERNEL_FACTORIES: dict[str, Callable[[float], Kernel]] = {
    "heat": heat_kernel,
    "lowpass": lowpass_kernel,
    "tikhonov": tikhonov_kernel,
}


def _check_signal(n: int, x: NDArray) -> NDArray:

    x = np.asarray(x)
    if x.ndim not in (1, 2) or x.shape[0] != n:
        raise GspDataError(
            f"Filter: signal of shape {x.shape} does not match N={n}."
        )
    return x


def _require_decomposition(
    d: Optional[SpectralDecomposition], what: str
) -> SpectralDecomposition:
    if d is None:
        raise GspDataError(f"Filter: {what} needs a spectral decomposition.")
    return d


