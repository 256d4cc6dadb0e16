#!/usr/bin/env python3
"""Graph-time processing.

Time series of graph signals are N x T matrices X (rows = vertices, columns =
time steps). Whenever an NT vector is needed, X is flattened in NumPy C order,
i.e. entry (n, t) sits at index n * T + t, so that S_g (x) S_t acts on vec(X)
as S_g X S_t^T.
"""
from dataclasses import dataclass
from typing import Any
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from gspkit.filters import apply_polynomial
from gspkit.filters import polynomial_matrix
from gspkit.graphs import Gso
from gspkit.spectral import as_signal_matrix
from gspkit.spectral import SpectralDecomposition
from gspkit.tools import as_real
from gspkit.tools import GspDataError
from gspkit.tools import GspNumericalError
from gspkit.tools import solver_progress
from gspkit.tools import system_logger

PRODUCT_KINDS = ["kronecker", "cartesian", "strong"]

VAR_MODES = ["graph-var", "structural-var"]

CONDITION_LIMIT: float = 1e12


@dataclass(frozen=True, eq=False)
class ProductGso:

    matrix: NDArray[np.float64]
    """NT x NT operator."""
    kind: str
    """One of `PRODUCT_KINDS`."""
    factors: tuple[Gso, Gso]
    """(graph operator S_g, time operator S_t)."""

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def to_gso(self) -> Gso:
        return Gso.custom(self.matrix)


@dataclass(frozen=True, eq=False)
class VarModel:

    order: int
    """Number of lags P."""
    mode: str
    """One of `VAR_MODES`."""
    taps: Optional[NDArray[np.float64]] = None
    """Graph VAR: P x (L+1) array, row p-1 holds h_{p,0..L}."""
    matrices: Optional[NDArray[np.float64]] = None
    """Structural VAR: (P+1) x N x N stack A_0, ..., A_P."""
    residual: float = 0.0
    """Residual energy relative to the energy of the fitted samples."""
    condition: float = 1.0
    """Condition number of the normal equations (graph VAR)."""
    causal: bool = False
    """Whether the taps were restricted to L <= p."""
    objective_trace: tuple[float, ...] = ()
    """Proximal-gradient objective per iteration (structural VAR)."""

    def __post_init__(self):

        if self.mode not in VAR_MODES:
            raise GspDataError(
                f"VAR: unknown mode {self.mode}. Should be one of {VAR_MODES}."
            )
        if self.order < 1:
            raise GspDataError(f"VAR: order should be >= 1, got {self.order}.")

        if self.mode == "graph-var":
            if self.taps is None:
                raise GspDataError("VAR: graph VAR without taps.")
            taps = np.array(self.taps, dtype=np.float64, ndmin=2)
            if taps.shape[0] != self.order:
                raise GspDataError(
                    f"VAR: {taps.shape[0]} tap rows do not match order {self.order}."
                )
            if not np.all(np.isfinite(taps)):
                raise GspDataError("VAR: taps should be finite.")
            taps.setflags(write=False)
            object.__setattr__(self, "taps", taps)
        else:
            if self.matrices is None:
                raise GspDataError("VAR: structural VAR without lag matrices.")
            matrices = np.array(self.matrices, dtype=np.float64)
            if matrices.ndim != 3 or matrices.shape[0] != self.order + 1:
                raise GspDataError(
                    f"VAR: expected {self.order + 1} lag matrices, got shape {matrices.shape}."
                )
            if matrices.shape[1] != matrices.shape[2]:
                raise GspDataError("VAR: lag matrices should be square.")
            if np.any(np.diag(matrices[0]) != 0.0):
                raise GspDataError("VAR: A_0 should have a zero diagonal.")
            matrices.setflags(write=False)
            object.__setattr__(self, "matrices", matrices)

    def to_structural(self, s: Gso) -> "VarModel":
        """Same process with dense lag matrices A_p = sum_l h_{p,l} S^l and A_0 = 0."""

        if self.mode == "structural-var":
            return self

        lags = [np.zeros((s.n, s.n))]
        lags += [polynomial_matrix(s, h) for h in self.taps]

        return VarModel(
            order=self.order,
            mode="structural-var",
            matrices=np.stack(lags),
            residual=self.residual,
            condition=self.condition,
        )

    def spectral_radius(self, s: Optional[Gso] = None) -> float:
        """Spectral radius of the companion matrix; below 1 for a stable process."""

        if self.mode == "graph-var" and s is None:
            raise GspDataError("VAR: graph VAR needs its shift operator.")
        model = self.to_structural(s)

        n = model.matrices.shape[1]
        instantaneous = np.eye(n) - model.matrices[0]
        lags = np.linalg.solve(instantaneous, np.hstack(list(model.matrices[1:])))

        companion = np.zeros((n * self.order, n * self.order))
        companion[:n] = lags
        companion[n:, :-n] = np.eye(n * (self.order - 1))

        return float(np.max(np.abs(np.linalg.eigvals(companion))))

    def to_record(self) -> dict[str, Any]:
        record: dict[str, Any] = {
            "mode": self.mode,
            "order": self.order,
            "residual": self.residual,
            "condition": self.condition,
        }
        if self.mode == "graph-var":
            record["causal"] = self.causal
            record["taps"] = self.taps.tolist()
        else:
            record["matrices"] = self.matrices.tolist()
        return record

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "VarModel":

        try:
            mode = record["mode"]
            order = int(record["order"])
        except KeyError as err:
            raise GspDataError(f"VAR: model record misses {err}.")

        return cls(
            order=order,
            mode=mode,
            taps=record.get("taps"),
            matrices=record.get("matrices"),
            residual=float(record.get("residual", 0.0)),
            condition=float(record.get("condition", 1.0)),
            causal=bool(record.get("causal", False)),
        )


def product_gso(s_g: Gso, s_t: Gso, kind: str) -> ProductGso:
    """Kronecker, Cartesian or strong product of a graph and a time operator."""

    if kind not in PRODUCT_KINDS:
        raise GspDataError(
            f"Product: unknown kind {kind}. Should be one of {PRODUCT_KINDS}."
        )

    kron = np.kron(s_g.matrix, s_t.matrix)
    cartesian = np.kron(s_g.matrix, np.eye(s_t.n)) + np.kron(
        np.eye(s_g.n), s_t.matrix
    )

    matrix = {
        "kronecker": kron,
        "cartesian": cartesian,
        "strong": kron + cartesian,
    }[kind]

    return ProductGso(matrix=matrix, kind=kind, factors=(s_g, s_t))


def joint_gft(
    d_g: SpectralDecomposition, d_t: SpectralDecomposition, xs: NDArray
) -> NDArray:
    """X_hat = V_g^{-1} X (V_t^{-1})^T, i.e. (V_g^{-1} (x) V_t^{-1}) vec(X)."""

    xs = _check_series(d_g, d_t, xs)
    return as_real(d_g.inverse_basis @ xs @ d_t.inverse_basis.T)


def joint_igft(
    d_g: SpectralDecomposition, d_t: SpectralDecomposition, x_hat: NDArray
) -> NDArray:
    x_hat = _check_series(d_g, d_t, x_hat)
    return as_real(d_g.eigenvectors @ x_hat @ d_t.eigenvectors.T)


def apply_joint_response(
    d_g: SpectralDecomposition,
    d_t: SpectralDecomposition,
    response: NDArray,
    xs: NDArray,
) -> NDArray:
    """Filter a time series with a joint frequency response h_hat(l, k)."""

    response = np.asarray(response)
    if response.shape != (d_g.n, d_t.n):
        raise GspDataError(
            f"Product: joint response of shape {response.shape} does not match ({d_g.n}, {d_t.n})."
        )

    return joint_igft(d_g, d_t, response * joint_gft(d_g, d_t, xs))


def fit_graph_var(
    xs: Any, s: Gso, p_order: int, l_order: int, causal: bool = False
) -> VarModel:
    """Least-squares taps of x_t = sum_p sum_l h_{p,l} S^l x_{t-p} + e_t.

    With `causal`, taps h_{p,l} with l > p are held at zero.
    """

    xs = as_signal_matrix(xs)
    n, t_len = xs.n, xs.m
    if n != s.n:
        raise GspDataError(f"VAR: series with N={n} does not match the operator N={s.n}.")
    if p_order < 1 or l_order < 0:
        raise GspDataError(f"VAR: invalid orders P={p_order}, L={l_order}.")
    if t_len <= p_order:
        raise GspDataError(f"VAR: need T > P, got T={t_len}, P={p_order}.")

    shifted = [xs.values]
    for _ in range(l_order):
        shifted.append(s.matrix @ shifted[-1])

    slots = [
        (p, l)
        for p in range(1, p_order + 1)
        for l in range(l_order + 1)
        if not causal or l <= p
    ]
    design = np.column_stack(
        [shifted[l][:, p_order - p : t_len - p].ravel() for p, l in slots]
    )
    target = xs.values[:, p_order:].ravel()

    singular = np.linalg.svd(design, compute_uv=False)
    rank_tol = singular[0] * max(design.shape) * np.finfo(np.float64).eps
    rank = int(np.count_nonzero(singular > rank_tol))
    if rank < len(slots):
        raise GspNumericalError(
            f"VAR: design matrix is rank deficient, nullspace dimension {len(slots) - rank}; "
            "taps are not identifiable."
        )

    condition = float((singular[0] / singular[-1]) ** 2)
    system_logger("VAR", "normal equations condition", f"{condition:.3e}")

    coefficients, *_ = np.linalg.lstsq(design, target, rcond=None)

    energy = float(target @ target)
    misfit = target - design @ coefficients
    residual = float(misfit @ misfit) / energy if energy > 0 else 0.0

    taps = np.zeros((p_order, l_order + 1))
    for (p, l), value in zip(slots, coefficients):
        taps[p - 1, l] = value

    return VarModel(
        order=p_order,
        mode="graph-var",
        taps=taps,
        residual=residual,
        condition=condition,
        causal=causal,
    )


def predict_var(
    m: VarModel, s: Optional[Gso], history: NDArray, noise: Optional[NDArray] = None
) -> NDArray[np.float64]:
    """One-step prediction from the last P signals (last column = x_{t-1}).

    `noise` is the innovation e_t; zero when absent.
    """

    history = np.asarray(history, dtype=np.float64)
    if history.ndim != 2 or history.shape[1] != m.order:
        raise GspDataError(
            f"VAR: history should hold {m.order} columns, got shape {history.shape}."
        )

    if m.mode == "graph-var":
        if s is None:
            raise GspDataError("VAR: graph VAR prediction needs the shift operator.")
        if history.shape[0] != s.n:
            raise GspDataError(
                f"VAR: history with N={history.shape[0]} does not match the operator N={s.n}."
            )

        out = np.zeros(s.n)
        for p in range(1, m.order + 1):
            out += apply_polynomial(s, m.taps[p - 1], history[:, -p])
        if noise is not None:
            out += noise
        return out

    n = m.matrices.shape[1]
    if history.shape[0] != n:
        raise GspDataError(
            f"VAR: history with N={history.shape[0]} does not match the model N={n}."
        )

    rhs = sum(m.matrices[p] @ history[:, -p] for p in range(1, m.order + 1))
    if noise is not None:
        rhs = rhs + noise

    instantaneous = np.eye(n) - m.matrices[0]
    condition = np.linalg.cond(instantaneous)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise GspNumericalError(
            f"VAR: I - A_0 is singular (condition {condition:.3e})."
        )

    return np.linalg.solve(instantaneous, rhs)


def simulate_var(
    m: VarModel,
    s: Optional[Gso],
    initial: NDArray,
    steps: int,
    noise: Optional[NDArray] = None,
) -> NDArray[np.float64]:
    """Run the model forward from `initial` (N x P); returns the N x (P + steps) series."""

    initial = np.asarray(initial, dtype=np.float64)
    if initial.ndim != 2 or initial.shape[1] != m.order:
        raise GspDataError(
            f"VAR: initial state should hold {m.order} columns, got shape {initial.shape}."
        )
    if noise is not None:
        noise = np.asarray(noise, dtype=np.float64)
        if noise.shape != (initial.shape[0], steps):
            raise GspDataError(
                f"VAR: innovations of shape {noise.shape} do not match ({initial.shape[0]}, {steps})."
            )

    series = np.zeros((initial.shape[0], m.order + steps))
    series[:, : m.order] = initial
    for t in range(m.order, m.order + steps):
        e_t = None if noise is None else noise[:, t - m.order]
        series[:, t] = predict_var(m, s, series[:, t - m.order : t], e_t)

    return series


def fit_structural_var(
    xs: Any,
    p_order: int,
    lam: float,
    max_iters: int = 5000,
    tol: float = 1e-10,
) -> VarModel:
    """Sparse structural VAR x_t = A_0 x_t + sum_p A_p x_{t-p} + e_t.

    Minimizes sum_t ||x_t - A_0 x_t - sum_p A_p x_{t-p}||^2 + lam sum_p ||A_p||_1
    (p = 0..P) by proximal gradient with step 1 / (2 sigma_max(Z)^2), Z being the
    stacked [x_t; x_{t-1}; ...; x_{t-P}] design. diag(A_0) is held at zero.
    """

    xs = as_signal_matrix(xs)
    n, t_len = xs.n, xs.m
    if lam < 0:
        raise GspDataError(f"VAR: sparsity weight should be nonnegative, got {lam}.")
    if p_order < 1:
        raise GspDataError(f"VAR: order should be >= 1, got {p_order}.")
    if t_len <= p_order:
        raise GspDataError(f"VAR: need T > P, got T={t_len}, P={p_order}.")

    values = xs.values
    target = values[:, p_order:]
    design = np.vstack(
        [values[:, p_order - p : t_len - p] for p in range(p_order + 1)]
    )

    sigma_max = np.linalg.norm(design, 2)
    if sigma_max == 0.0:
        return VarModel(
            order=p_order,
            mode="structural-var",
            matrices=np.zeros((p_order + 1, n, n)),
        )
    step = 1.0 / (2.0 * sigma_max**2)

    # B = [A_0, A_1, ..., A_P]
    coefs = np.zeros((n, n * (p_order + 1)))
    diagonal = np.arange(n)

    def objective(b: NDArray) -> float:
        misfit = target - b @ design
        return float(np.sum(misfit**2) + lam * np.sum(np.abs(b)))

    value = objective(coefs)
    trace = [value]

    with solver_progress() as progress:
        task = progress.add_task("[cyan]Fitting structural VAR...", total=max_iters)

        for _ in range(max_iters):
            gradient = -2.0 * (target - coefs @ design) @ design.T
            moved = coefs - step * gradient
            updated = np.sign(moved) * np.maximum(np.abs(moved) - step * lam, 0.0)
            updated[diagonal, diagonal] = 0.0

            change = np.linalg.norm(updated - coefs)
            coefs = updated
            value = objective(coefs)
            trace.append(value)
            progress.advance(task)

            if change <= tol * max(np.linalg.norm(coefs), 1.0):
                break

    energy = float(np.sum(target**2))
    misfit = float(np.sum((target - coefs @ design) ** 2))
    system_logger("VAR", "structural VAR objective", value)

    return VarModel(
        order=p_order,
        mode="structural-var",
        matrices=coefs.reshape(n, p_order + 1, n).transpose(1, 0, 2),
        residual=misfit / energy if energy > 0 else 0.0,
        objective_trace=tuple(trace),
    )


def _check_series(
    d_g: SpectralDecomposition, d_t: SpectralDecomposition, xs: NDArray
) -> NDArray:

    xs = np.asarray(xs)
    if xs.ndim == 1 and d_t.n == 1:
        xs = xs[:, None]
    if xs.shape != (d_g.n, d_t.n):
        raise GspDataError(
            f"Product: series of shape {xs.shape} does not match ({d_g.n}, {d_t.n})."
        )
    return xs
