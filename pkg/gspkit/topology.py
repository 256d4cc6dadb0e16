#!/usr/bin/env python3
"""Learning graphs from data."""
from dataclasses import dataclass
from dataclasses import field
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq
from scipy.spatial.distance import pdist

from gspkit.graphs import build_graph
from gspkit.graphs import Graph
from gspkit.graphs import Gso
from gspkit.graphs import make_gso
from gspkit.spectral import as_signal_matrix
from gspkit.stochastic import sample_covariance
from gspkit.tools import f1_score
from gspkit.tools import GspDataError
from gspkit.tools import GspNumericalError
from gspkit.tools import solver_progress
from gspkit.tools import system_logger

MAX_BACKTRACKS: int = 60
TEMPLATE_STALL_WINDOW: int = 50
TEMPLATE_STALL_TOL: float = 1e-8
TEMPLATE_ZERO_TOL: float = 1e-6
TEMPLATE_CONSISTENCY_TOL: float = 1e-8
CONDITION_LIMIT: float = 1e12


@dataclass(frozen=True, eq=False)
class LearnedGraph:

    gso: Gso
    """Learned shift operator (Laplacian or adjacency)."""
    objective_trace: tuple[float, ...]
    """Objective value after every iteration."""
    diagnostics: dict[str, Any] = field(default_factory=dict)
    """Constraint residuals and solver status."""

    def weights(self) -> NDArray[np.float64]:
        """Symmetric edge-weight matrix (negated off-diagonal for Laplacians)."""

        matrix = np.array(self.gso.matrix)
        if self.gso.is_laplacian:
            matrix = -matrix
        np.fill_diagonal(matrix, 0.0)
        return matrix

    def to_graph(self, threshold: float = 0.0) -> Graph:
        """Undirected graph of the entries with |weight| > threshold."""
        return _graph_from_weights(self.weights(), threshold)


def learn_smooth_laplacian(
    xs: Any,
    beta: float,
    norm_trace: float,
    max_iters: int = 1000,
    tol: float = 1e-6,
) -> LearnedGraph:
    """Laplacian minimizing trace(X^T L X) + beta ||L||_F^2 with trace(L) = norm_trace.

    The Laplacian is parameterized by nonnegative edge weights w over all vertex
    pairs, for which trace(X^T L X) = sum_ij w_ij ||x_i - x_j||^2,
    ||L||_F^2 = ||deg||^2 + 2 ||w||^2 and trace(L) = 2 sum(w). Projected gradient
    with backtracking from a unit step keeps the objective non-increasing.
    """

    xs = as_signal_matrix(xs)
    if not beta > 0:
        raise GspDataError(f"Topology: beta should be positive, got {beta}.")
    if not norm_trace > 0:
        raise GspDataError(f"Topology: trace should be positive, got {norm_trace}.")
    if xs.m < 2:
        raise GspDataError(f"Topology: need at least 2 signals, got {xs.m}.")
    if xs.n < 2:
        raise GspDataError("Topology: need at least 2 vertices.")

    n = xs.n
    distances = pdist(xs.values, "sqeuclidean")
    if np.all(distances == 0.0):
        raise GspDataError(
            "Topology: all rows of X are identical; the smoothness term is degenerate."
        )

    rows, cols = np.triu_indices(n, 1)
    total = 0.5 * norm_trace

    def degrees(w: NDArray) -> NDArray:
        return np.bincount(rows, w, n) + np.bincount(cols, w, n)

    def objective(w: NDArray) -> float:
        deg = degrees(w)
        return float(distances @ w + beta * (deg @ deg + 2.0 * w @ w))

    def gradient(w: NDArray) -> NDArray:
        deg = degrees(w)
        return distances + beta * (2.0 * (deg[rows] + deg[cols]) + 4.0 * w)

    w = np.full(rows.shape[0], total / rows.shape[0])
    value = objective(w)
    trace = [value]
    converged = False

    with solver_progress() as progress:
        task = progress.add_task("[cyan]Learning smooth Laplacian...", total=max_iters)

        for _ in range(max_iters):
            grad = gradient(w)
            step = 1.0
            for _ in range(MAX_BACKTRACKS):
                candidate = project_simplex(w - step * grad, total)
                delta = candidate - w
                candidate_value = objective(candidate)
                if candidate_value <= value + grad @ delta + (delta @ delta) / (2 * step):
                    break
                step *= 0.5
            else:
                converged = True
                break

            if candidate_value > value:
                converged = True
                break

            change = abs(value - candidate_value) / max(abs(value), 1e-300)
            w, value = candidate, candidate_value
            trace.append(value)
            progress.advance(task)

            if change < tol:
                converged = True
                break

    graph = build_graph(
        n,
        [(i, j, wij) for i, j, wij in zip(rows, cols, w) if wij > 0],
    )
    gso = make_gso(graph, "combinatorial-laplacian")

    lap = gso.matrix
    offdiag = lap[~np.eye(n, dtype=bool)]
    diagnostics = {
        "laplacian_row_sum": float(np.max(np.abs(lap.sum(axis=1)))),
        "max_offdiagonal": float(np.max(offdiag)),
        "trace_error": float(abs(np.trace(lap) - norm_trace)),
        "iterations": len(trace) - 1,
        "converged": converged,
    }
    system_logger("TOPOLOGY", "smooth Laplacian objective", value)

    return LearnedGraph(gso=gso, objective_trace=tuple(trace), diagnostics=diagnostics)


def project_simplex(v: NDArray[np.float64], total: float) -> NDArray[np.float64]:
    """Euclidean projection onto {w >= 0, sum(w) = total}."""

    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - total
    ind = np.arange(1, v.shape[0] + 1)
    rho = np.flatnonzero(u - cumulative / ind > 0)[-1]
    theta = cumulative[rho] / (rho + 1)

    return np.maximum(v - theta, 0.0)


def correlation_graph(xs: Any, threshold: float) -> Graph:
    """Edge (i, j) of weight |corr(x_i, x_j)| whenever it exceeds `threshold`.

    Rows with zero variance stay isolated.
    """

    xs = as_signal_matrix(xs)
    if xs.m < 2:
        raise GspDataError(f"Topology: need at least 2 signals, got {xs.m}.")

    values = xs.values
    active = np.flatnonzero(values.std(axis=1) > 0)

    weights = np.zeros((xs.n, xs.n))
    if active.shape[0] >= 2:
        corr = np.corrcoef(values[active])
        weights[np.ix_(active, active)] = np.minimum(np.abs(corr), 1.0)

    return _graph_from_weights(weights, threshold)


def precision_graph(xs: Any, ridge: float, threshold: float) -> Graph:
    """Edges where |P_ij| > threshold, P = (C + ridge I)^{-1}."""

    if ridge < 0:
        raise GspDataError(f"Topology: ridge should be nonnegative, got {ridge}.")

    cov = sample_covariance(xs).matrix
    n = cov.shape[0]
    regularized = cov + ridge * np.eye(n)

    condition = np.linalg.cond(regularized)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise GspNumericalError(
            f"Topology: regularized covariance is singular (condition {condition:.3e})."
        )

    precision = np.linalg.solve(regularized, np.eye(n))
    precision = 0.5 * (precision + precision.T)

    return _graph_from_weights(np.abs(precision), threshold)


def spectral_template_adjacency(
    v_hat: NDArray[np.float64],
    sparsity_weight: float = 1.0,
    max_iters: int = 2000,
    feasibility_tol: float = 0.05,
    fit_weight: float = 50.0,
) -> LearnedGraph:
    """Sparse S with eigenvectors v_hat, zero diagonal and unit first-row sum.

    Exact templates leave S = V diag(mu) V^T with consistent affine constraints
    on mu; mu then minimizes sparsity_weight * ||S(mu)||_1 by projected
    subgradient descent, the constraints being enforced by a least-squares
    projection at every step.

    Templates from a sample covariance make those constraints inconsistent
    (the only zero-diagonal S in their span is 0). S is then only asked to lie
    close to the span: proximal gradient minimizes

        sparsity_weight * ||S||_1 + fit_weight / 2 * ||S - P(S)||_F^2,

    P the orthogonal projection on span{v_k v_k^T}, over symmetric zero-diagonal
    S with unit first-row sum, and the support found is refitted without the
    l1 term. The run fails when the refitted S is farther than
    `feasibility_tol` (relative Frobenius distance) from the span.
    """

    v_hat = np.asarray(v_hat, dtype=np.float64)
    n = v_hat.shape[0]
    if v_hat.ndim != 2 or v_hat.shape != (n, n):
        raise GspDataError(f"Topology: templates should be square, got {v_hat.shape}.")
    if n < 2:
        raise GspDataError("Topology: templates need at least 2 vertices.")
    if np.max(np.abs(v_hat.T @ v_hat - np.eye(n))) > 1e-8:
        raise GspDataError("Topology: templates are not orthonormal.")
    if not sparsity_weight > 0:
        raise GspDataError(
            f"Topology: sparsity weight should be positive, got {sparsity_weight}."
        )
    if not fit_weight > 0:
        raise GspDataError(f"Topology: fit weight should be positive, got {fit_weight}.")

    constraints = np.vstack([v_hat**2, v_hat[0] * v_hat.sum(axis=0)])
    target = np.zeros(n + 1)
    target[-1] = 1.0

    pinv = np.linalg.pinv(constraints, rcond=1e-10)
    mu = pinv @ target
    residual = float(np.linalg.norm(constraints @ mu - target))

    if residual <= TEMPLATE_CONSISTENCY_TOL:
        shift, trace = _exact_templates(
            v_hat, mu, constraints, target, pinv, sparsity_weight, max_iters
        )
        span_residual = 0.0
    else:
        system_logger(
            "TOPOLOGY", "template constraints are inconsistent, residual", residual
        )
        shift, trace, span_residual = _noisy_templates(
            v_hat, mu, sparsity_weight, fit_weight, max_iters
        )
        if span_residual > feasibility_tol:
            raise GspNumericalError(
                f"Topology: no sparse S close to the template span (relative distance {span_residual:.3e})."
            )

    shift = 0.5 * (shift + shift.T)
    diagonal_residual = float(np.max(np.abs(np.diag(shift))))
    row_sum = float(shift[0].sum())

    np.fill_diagonal(shift, 0.0)
    peak = np.max(np.abs(shift))
    shift[np.abs(shift) < TEMPLATE_ZERO_TOL * peak] = 0.0

    diagnostics = {
        "constraint_residual": residual,
        "span_residual": span_residual,
        "diagonal_residual": diagonal_residual,
        "first_row_sum": row_sum,
        "iterations": len(trace) - 1,
    }
    system_logger("TOPOLOGY", "spectral template objective", trace[-1])

    return LearnedGraph(
        gso=Gso.custom(shift), objective_trace=tuple(trace), diagnostics=diagnostics
    )


def _exact_templates(
    v_hat: NDArray[np.float64],
    mu: NDArray[np.float64],
    constraints: NDArray[np.float64],
    target: NDArray[np.float64],
    pinv: NDArray[np.float64],
    sparsity_weight: float,
    max_iters: int,
) -> tuple[NDArray[np.float64], list[float]]:

    n = v_hat.shape[0]
    # vec(S) = atoms @ mu
    atoms = np.einsum("ik,jk->ijk", v_hat, v_hat).reshape(n * n, n)
    null_projector = np.eye(n) - pinv @ constraints

    def objective(m: NDArray) -> float:
        return float(sparsity_weight * np.sum(np.abs(atoms @ m)))

    best_mu, best_value = mu, objective(mu)
    trace = [best_value]
    step0 = 0.1 * max(np.linalg.norm(mu), 1e-12)

    with solver_progress() as progress:
        task = progress.add_task("[cyan]Fitting spectral templates...", total=max_iters)

        for k in range(max_iters):
            subgradient = sparsity_weight * atoms.T @ np.sign(atoms @ mu)
            direction = null_projector @ subgradient
            norm = np.linalg.norm(direction)
            if norm < 1e-14:
                break

            mu = mu - step0 / np.sqrt(k + 1) * direction / norm
            mu = mu - pinv @ (constraints @ mu - target)

            value = objective(mu)
            if value < best_value:
                best_mu, best_value = mu, value
            trace.append(best_value)
            progress.advance(task)

            if _stalled(trace):
                break

    return (atoms @ best_mu).reshape(n, n), trace


def _noisy_templates(
    v_hat: NDArray[np.float64],
    mu: NDArray[np.float64],
    sparsity_weight: float,
    fit_weight: float,
    max_iters: int,
) -> tuple[NDArray[np.float64], list[float], float]:

    n = v_hat.shape[0]
    rows, cols = np.triu_indices(n, 1)
    first = rows == 0
    # s holds the upper triangle of S; P(S) has upper triangle 2 w w^T s
    w = v_hat[rows] * v_hat[cols]
    threshold = sparsity_weight / (2.0 * fit_weight)

    def distance(s: NDArray) -> float:
        return max(2.0 * s @ s - 4.0 * np.sum((w.T @ s) ** 2), 0.0)

    def objective(s: NDArray) -> float:
        return float(
            sparsity_weight * np.sum(np.abs(s)) + 0.5 * fit_weight * distance(s)
        )

    def prox(z: NDArray) -> NDArray:
        s = _soft(z, threshold)
        head = z[first]

        def excess(shift: float) -> float:
            return float(np.sum(_soft(head + shift, threshold)) - 1.0)

        shift = brentq(
            excess,
            threshold - np.max(head) - 1.0,
            2.0 + threshold - np.min(head),
            xtol=1e-14,
        )
        s[first] = _soft(head + shift, threshold)
        return s

    # monotone FISTA, unit step on the 1/(2 fit_weight)-scaled problem
    x = prox(w @ mu)
    y, momentum = x, 1.0
    trace = [objective(x)]

    with solver_progress() as progress:
        task = progress.add_task("[cyan]Fitting spectral templates...", total=max_iters)

        for _ in range(max_iters):
            u = prox(2.0 * w @ (w.T @ y))
            value = objective(u)
            following = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum**2))

            accepted = u if value <= trace[-1] else x
            y = (
                accepted
                + (momentum / following) * (u - accepted)
                + ((momentum - 1.0) / following) * (accepted - x)
            )
            x, momentum = accepted, following
            trace.append(min(value, trace[-1]))
            progress.advance(task)

            if _stalled(trace):
                break

    # least squares refit on the support, first-row sum kept at 1
    support = np.flatnonzero(x)
    gram = np.eye(support.size) - 2.0 * w[support] @ w[support].T
    head = first[support].astype(np.float64)
    kkt = np.block([[gram, head[:, None]], [head[None, :], np.zeros((1, 1))]])
    rhs = np.zeros(support.size + 1)
    rhs[-1] = 1.0
    solution, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)

    refit = np.zeros_like(x)
    refit[support] = solution[:-1]
    span_residual = float(np.sqrt(distance(refit) / (2.0 * refit @ refit)))

    shift = np.zeros((n, n))
    shift[rows, cols] = refit
    return shift + shift.T, trace, span_residual


def _soft(z: NDArray, threshold: float) -> NDArray:
    return np.sign(z) * np.maximum(np.abs(z) - threshold, 0.0)


def _stalled(trace: list[float]) -> bool:

    if len(trace) <= TEMPLATE_STALL_WINDOW:
        return False
    past = trace[-TEMPLATE_STALL_WINDOW - 1]
    return abs(past - trace[-1]) <= TEMPLATE_STALL_TOL * max(abs(past), 1e-300)


def edge_f1(weights: NDArray[np.float64], truth: Graph, threshold: float) -> float:
    """F1 score of the support {i < j : |w_ij| > threshold} against the edges of `truth`."""

    weights = np.asarray(weights)
    rows, cols = np.triu_indices(weights.shape[0], 1)
    keep = np.abs(weights[rows, cols]) > threshold
    predicted = set(zip(rows[keep].tolist(), cols[keep].tolist()))
    actual = {(min(i, j), max(i, j)) for i, j, _ in truth.edges}

    return f1_score(predicted, actual)


def threshold_sweep(
    weights: NDArray[np.float64], truth: Graph, thresholds: NDArray[np.float64]
) -> list[tuple[float, float]]:
    """(threshold, F1) table."""
    return [(float(t), edge_f1(weights, truth, float(t))) for t in thresholds]


def _graph_from_weights(weights: NDArray[np.float64], threshold: float) -> Graph:

    n = weights.shape[0]
    rows, cols = np.triu_indices(n, 1)
    values = weights[rows, cols]
    keep = np.abs(values) > threshold

    return build_graph(
        n, list(zip(rows[keep].tolist(), cols[keep].tolist(), values[keep].tolist()))
    )
