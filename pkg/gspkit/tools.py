#!/usr/bin/env python3
"""Useful tools."""
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable
from typing import Optional

import numpy as np
from dotenv import dotenv_values
from numpy.typing import NDArray
from rich.console import Console
from rich.progress import Progress
from rich.progress import TextColumn
from rich.progress import TimeElapsedColumn

console = Console()
rprint = console.print

err_console = Console(stderr=True, highlight=False)

TEXT_COLUMN = TextColumn("{task.description}")
TIME_COLUMN = TimeElapsedColumn()

THREADS_ENV = "GSPKIT_THREADS"

CSV_FLOAT_FORMAT = "%.17g"


class GspDataError(ValueError):
    """Invalid input data or violated invariant."""


class GspNumericalError(RuntimeError):
    """Singular, ill-conditioned or otherwise numerically failed computation."""


class GspUsageError(TypeError):
    """Command line usage that does not fit the subcommand schema."""


def system_logger(
    prefix: str, msg: str, values: Optional[float] = None
) -> None:
    """Pretty logger using rich."""

    if values is None:
        console.print(f"[bold blue]{prefix.upper()}[/bold blue]: " + msg)
    else:
        console.print(
            f"[bold blue]{prefix.upper()}[/bold blue]: "
            + msg
            + f"[bold magenta] - {values} [/bold magenta]"
        )


def set_quiet(quiet: bool) -> None:
    """Silence (or restore) every console output except error lines."""
    console.quiet = quiet


def solver_progress() -> Progress:
    """Transient progress bar for iterative solvers."""
    return Progress(
        TEXT_COLUMN,
        TIME_COLUMN,
        console=console,
        transient=True,
        disable=console.quiet,
    )


def thread_count() -> int:
    """Number of worker threads allowed for batched kernels.

    `GSPKIT_THREADS` is read from the environment first, then from `.env`.
    """

    value = os.environ.get(THREADS_ENV)
    if value is None:
        value = dotenv_values(".env").get(THREADS_ENV)

    if value is None:
        return 1

    try:
        threads = int(value)
    except ValueError:
        raise GspDataError(
            f"Config: {THREADS_ENV} should be a positive integer, got {value!r}."
        )

    return max(threads, 1)


def map_columns(
    func: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    xs: NDArray[np.float64],
    threads: Optional[int] = None,
) -> NDArray[np.float64]:
    """Apply `func` to column blocks of `xs` and stitch the blocks back in order.

    `func` must act column by column, so the result does not depend on the
    blocking.
    """

    if threads is None:
        threads = thread_count()

    n_cols = xs.shape[1]
    if threads <= 1 or n_cols < 2:
        return func(xs)

    blocks = np.array_split(np.arange(n_cols), min(threads, n_cols))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda idx: func(xs[:, idx]), blocks))

    return np.concatenate(results, axis=1)


def column_generator(seed: int, column: int) -> np.random.Generator:
    """Philox (counter-based, 64-bit key) generator for a single column.

    Streams of different columns never overlap, so columns can be drawn in any
    order or in parallel.
    """
    return np.random.Generator(np.random.Philox(key=seed).jumped(column))


def standard_normal_columns(seed: int, n: int, m: int) -> NDArray[np.float64]:
    """N x M matrix of i.i.d. standard normals, column j drawn from stream j."""

    out = np.empty((n, m), dtype=np.float64)
    for j in range(m):
        out[:, j] = column_generator(seed, j).standard_normal(n)
    return out


def as_real(
    values: NDArray, tol: float = 1e-10
) -> NDArray:
    """Drop a negligible imaginary part."""

    if not np.iscomplexobj(values):
        return values

    scale = max(float(np.max(np.abs(values), initial=0.0)), 1.0)
    if np.max(np.abs(values.imag), initial=0.0) <= tol * scale:
        return np.ascontiguousarray(values.real)

    return values


def relative_gap(a: float, b: float) -> float:
    """|a - b| relative to max(1, |a|, |b|)."""
    return abs(a - b) / max(1.0, abs(a), abs(b))


def f1_score(predicted: set, truth: set) -> float:
    """F1 score of a predicted support against the true one."""

    if len(predicted) == 0 and len(truth) == 0:
        return 1.0

    hits = len(predicted & truth)
    if hits == 0:
        return 0.0

    precision = hits / len(predicted)
    recall = hits / len(truth)

    return 2 * precision * recall / (precision + recall)
