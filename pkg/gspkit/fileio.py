#!/usr/bin/env python3
"""File formats.

    - edge list: CSV `src,dst,weight` or `src,dst` (header optional) plus a
      sidecar JSON `{"n": N, "directed": false}` with the same stem;
    - signals: headerless CSV, one row per vertex, one column per signal;
    - labels: CSV `vertex,label`;
    - samples: JSON `{"n": N, "indices": [...], "values": [...]}`;
    - filters: JSON `{"form": ..., "coefficients": [...]}` (plus `"interval"`
      for Chebyshev expansions);
    - PSD: JSON `{"eigenvalue_index_psd": [...], "samples": M}`.

Every number is written with 17 significant digits.
"""
import json
from pathlib import Path
from typing import Any
from typing import Union

import numpy as np
from numpy.typing import NDArray

from gspkit.filters import ChebyshevExpansion
from gspkit.filters import GraphFilter
from gspkit.graphs import build_graph
from gspkit.graphs import Graph
from gspkit.inverse import SamplingSet
from gspkit.stochastic import PsdEstimate
from gspkit.tools import CSV_FLOAT_FORMAT
from gspkit.tools import GspDataError

PathLike = Union[str, Path]

EDGE_HEADER = "src,dst,weight"


def sidecar_path(path: PathLike) -> Path:
    return Path(path).with_suffix(".json")


def read_graph(path: PathLike) -> Graph:
    """Edge list CSV and its sidecar.

    Without a sidecar the graph is undirected and N is the largest vertex id + 1.
    """

    table = _read_table(path)
    edges = []
    if table.size > 0:
        if table.shape[1] not in (2, 3):
            raise GspDataError(f"File: {path} should have 2 or 3 columns per edge.")
        ids = _vertex_ids(table[:, :2], path)
        weights = table[:, 2] if table.shape[1] == 3 else np.ones(table.shape[0])
        edges = [
            (int(s), int(d), float(w)) for (s, d), w in zip(ids.tolist(), weights)
        ]

    meta = {}
    if sidecar_path(path).exists():
        meta = read_json(sidecar_path(path))

    n = meta.get("n")
    if n is None:
        n = 1 + max((max(s, d) for s, d, _ in edges), default=0)

    return build_graph(n, edges, bool(meta.get("directed", False)))


def write_graph(path: PathLike, g: Graph) -> None:
    """Edge list CSV (undirected edges once) plus sidecar."""

    with open(path, "w", newline="\n") as f:
        f.write(EDGE_HEADER + "\n")
        for s, d, w in g.edges:
            f.write(f"{s},{d},{CSV_FLOAT_FORMAT % w}\n")

    write_json(sidecar_path(path), {"n": g.n_vertices, "directed": g.directed})


def read_signal(path: PathLike) -> NDArray[np.float64]:
    """N x M signal matrix (a single column for one signal)."""

    values = _read_table(path)
    if values.size == 0:
        raise GspDataError(f"File: {path} holds no signal.")

    if not np.all(np.isfinite(values)):
        raise GspDataError(f"File: {path} has non-finite entries.")

    return values


def write_matrix(path: PathLike, values: NDArray) -> None:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    np.savetxt(path, values, fmt=CSV_FLOAT_FORMAT, delimiter=",", newline="\n")


def write_table(path: PathLike, header: str, columns: list[NDArray]) -> None:
    """CSV with a header line; integer columns stay integers."""

    columns = [np.asarray(c) for c in columns]
    formats = [
        "%d" if np.issubdtype(c.dtype, np.integer) else CSV_FLOAT_FORMAT
        for c in columns
    ]

    with open(path, "w", newline="\n") as f:
        f.write(header + "\n")
        for row in zip(*columns):
            f.write(",".join(fmt % v for fmt, v in zip(formats, row)) + "\n")


def read_labels(path: PathLike, n: int) -> tuple[SamplingSet, NDArray[np.float64]]:
    """Labeled vertices and their +-1 labels, ordered by vertex."""

    table = _read_table(path)
    if table.size == 0 or table.shape[1] != 2:
        raise GspDataError(f"File: {path} should list vertex,label pairs.")

    vertices = _vertex_ids(table[:, 0], path)
    pairs = sorted(zip(vertices.tolist(), table[:, 1].tolist()))

    labeled = SamplingSet.from_vertices([v for v, _ in pairs], n)
    return labeled, np.array([label for _, label in pairs])


def read_samples(path: PathLike, n: int) -> tuple[SamplingSet, NDArray[np.float64]]:
    """Sampling set and sampled values, ordered by vertex."""

    record = read_json(path)
    try:
        vertices = [int(v) for v in record["indices"]]
        values = [float(v) for v in record["values"]]
    except KeyError as err:
        raise GspDataError(f"File: {path} misses {err}.")

    if len(vertices) != len(values):
        raise GspDataError(
            f"File: {path} lists {len(vertices)} vertices but {len(values)} values."
        )
    if record.get("n", n) != n:
        raise GspDataError(f"File: {path} samples N={record['n']}, graph has N={n}.")

    pairs = sorted(zip(vertices, values))
    m = SamplingSet.from_vertices([v for v, _ in pairs], n)
    return m, np.array([x for _, x in pairs])


def write_samples(path: PathLike, m: SamplingSet, values: NDArray) -> None:
    write_json(
        path,
        {
            "n": m.n,
            "indices": list(m.indices),
            "values": [float(v) for v in values],
        },
    )


def filter_record(f: Union[GraphFilter, ChebyshevExpansion]) -> dict[str, Any]:

    if isinstance(f, ChebyshevExpansion):
        return {
            "form": "chebyshev",
            "coefficients": [float(c) for c in f.coefficients],
            "interval": [float(f.interval[0]), float(f.interval[1])],
        }

    coefficients = np.asarray(f.coefficients)
    if np.iscomplexobj(coefficients):
        values: list = [[float(c.real), float(c.imag)] for c in coefficients]
    else:
        values = [float(c) for c in coefficients]

    record: dict[str, Any] = {"form": f.form, "coefficients": values}
    if f.fingerprint is not None:
        record["fingerprint"] = f.fingerprint
    return record


def read_filter(path: PathLike) -> Union[GraphFilter, ChebyshevExpansion]:

    record = read_json(path)
    try:
        form = record["form"]
        raw = record["coefficients"]
    except KeyError as err:
        raise GspDataError(f"File: filter {path} misses {err}.")

    coefficients = np.array(
        [complex(*c) if isinstance(c, list) else c for c in raw]
    )
    if np.iscomplexobj(coefficients) and not np.any(coefficients.imag):
        coefficients = coefficients.real

    if form == "chebyshev":
        interval = record.get("interval")
        if interval is None or len(interval) != 2:
            raise GspDataError(f"File: Chebyshev filter {path} needs an interval.")
        return ChebyshevExpansion(
            coefficients=np.asarray(coefficients, dtype=np.float64),
            interval=(float(interval[0]), float(interval[1])),
        )

    return GraphFilter(
        form=form,
        taps=coefficients if form == "taps" else None,
        response=coefficients if form == "response" else None,
        denominator=coefficients if form == "rational" else None,
        fingerprint=record.get("fingerprint"),
    )


def read_psd(path: PathLike) -> PsdEstimate:

    record = read_json(path)
    if "eigenvalue_index_psd" not in record:
        raise GspDataError(f"File: {path} misses 'eigenvalue_index_psd'.")
    return PsdEstimate(
        values=record["eigenvalue_index_psd"],
        sample_count=int(record.get("samples", 0)),
    )


def read_json(path: PathLike) -> dict[str, Any]:

    try:
        with open(path) as f:
            record = json.load(f)
    except json.JSONDecodeError as err:
        raise GspDataError(f"File: {path} is not valid JSON ({err}).")

    if not isinstance(record, dict):
        raise GspDataError(f"File: {path} should hold a JSON object.")
    return record


def write_json(path: PathLike, record: dict[str, Any]) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(record, f, indent=2, sort_keys=True)
        f.write("\n")


def parse_floats(text: str) -> NDArray[np.float64]:
    """Comma separated numbers such as `0,1,0.5`."""

    try:
        return np.array([float(v) for v in text.split(",") if v.strip() != ""])
    except ValueError as err:
        raise GspDataError(f"File: malformed number list {text!r} ({err}).")


def _read_table(path: PathLike) -> NDArray[np.float64]:
    """Numeric CSV as a 2-d array; a non-numeric first line is a header."""

    path = Path(path)
    if not path.exists():
        raise GspDataError(f"File: {path} does not exist.")

    try:
        return _loadtxt(path)
    except ValueError as err:
        error = err

    try:
        _loadtxt(path, max_rows=1)
    except ValueError:
        try:
            return _loadtxt(path, skiprows=1)
        except ValueError as err:
            error = err

    raise GspDataError(f"File: malformed CSV {path} ({error}).")


def _loadtxt(path: Path, **kwargs: Any) -> NDArray[np.float64]:
    return np.loadtxt(
        path, dtype=np.float64, delimiter=",", comments="#", ndmin=2, **kwargs
    )


def _vertex_ids(values: NDArray, path: PathLike) -> NDArray[np.int64]:

    if np.any(values != np.round(values)):
        raise GspDataError(f"File: vertex ids in {path} should be integers.")
    return values.astype(np.int64)
