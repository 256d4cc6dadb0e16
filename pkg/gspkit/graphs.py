#!/usr/bin/env python3
"""Graphs and graph shift operators.

Adjacency convention: an edge `src -> dst` with weight `w` gives `A[dst, src] = w`,
so that a signal moves along the edges when multiplied by `A`. For the directed
cycle this is the unit delay `[A x]_{i+1} = [x]_i`.
"""
import hashlib
from dataclasses import dataclass
from dataclasses import field
from typing import Iterable
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy import sparse
from scipy.sparse.csgraph import connected_components as _cs_components

from gspkit.tools import GspDataError

GSO_VARIANTS = [
    "adjacency",
    "combinatorial-laplacian",
    "normalized-laplacian",
    "random-walk-laplacian",
    "custom",
]

LAPLACIAN_VARIANTS = [
    "combinatorial-laplacian",
    "normalized-laplacian",
    "random-walk-laplacian",
]

# CLI / config shorthands
VARIANT_ALIASES = {
    "laplacian": "combinatorial-laplacian",
    "combinatorial": "combinatorial-laplacian",
    "normalized": "normalized-laplacian",
    "random-walk": "random-walk-laplacian",
}

Edge = tuple[int, int, float]


@dataclass(frozen=True)
class Graph:

    n_vertices: int
    """Number of vertices N. Vertex ids are 0, ..., N-1."""
    edges: tuple[Edge, ...]
    """Stored edges (src, dst, weight). Undirected edges are stored once with src < dst."""
    directed: bool = False
    """Whether edges are directed."""

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def is_unweighted(self) -> bool:
        return all(w == 1.0 for _, _, w in self.edges)

    @property
    def has_negative_weights(self) -> bool:
        return any(w < 0.0 for _, _, w in self.edges)

    def expanded_edges(self) -> list[Edge]:
        """Edge list with undirected edges listed in both directions."""

        if self.directed:
            return list(self.edges)

        out = []
        for src, dst, w in self.edges:
            out.append((src, dst, w))
            out.append((dst, src, w))
        return out

    def adjacency(self) -> NDArray[np.float64]:
        """Dense weighted adjacency with `A[dst, src] = weight`."""

        adj = np.zeros((self.n_vertices, self.n_vertices), dtype=np.float64)
        for src, dst, w in self.expanded_edges():
            adj[dst, src] = w
        return adj

    def degrees(self) -> NDArray[np.float64]:
        """Weighted degree vector D = diag(A 1) (in-degree for directed graphs)."""

        deg = np.zeros(self.n_vertices, dtype=np.float64)
        for _, dst, w in self.expanded_edges():
            deg[dst] += w
        return deg

    def disjoint_union(self, other: "Graph") -> "Graph":
        """Graph with `other`'s vertices appended after this graph's vertices."""

        if self.directed != other.directed:
            raise GspDataError(
                "Graph: cannot join a directed and an undirected graph."
            )

        shift = self.n_vertices
        edges = list(self.edges) + [
            (s + shift, d + shift, w) for s, d, w in other.edges
        ]
        return build_graph(
            self.n_vertices + other.n_vertices, edges, self.directed
        )


def build_graph(n: int, edges: Iterable, directed: bool = False) -> Graph:
    """Validate an edge list and build a Graph.

    Args:
        n (int): number of vertices.
        edges (Iterable): (src, dst, weight) triples, or (src, dst) pairs for unit weights.
        directed (bool, optional): edge orientation. Defaults to False.

    Returns:
        Graph: validated graph.
    """

    if int(n) != n or n < 1:
        raise GspDataError(f"Graph: number of vertices should be >= 1, got {n}.")
    n = int(n)

    stored: dict[tuple[int, int], float] = {}
    seen: set[tuple[int, int]] = set()
    for edge in edges:
        if len(edge) == 2:
            src, dst = edge
            w = 1.0
        else:
            src, dst, w = edge

        src, dst, w = int(src), int(dst), float(w)

        if not (0 <= src < n and 0 <= dst < n):
            raise GspDataError(
                f"Graph: vertex id out of range [0, {n}) in edge ({src}, {dst})."
            )
        if src == dst:
            raise GspDataError(f"Graph: self-loop at vertex {src}.")
        if not np.isfinite(w):
            raise GspDataError(f"Graph: non-finite weight on edge ({src}, {dst}).")

        if (src, dst) in seen:
            raise GspDataError(f"Graph: duplicate edge ({src}, {dst}).")
        seen.add((src, dst))

        key = (src, dst) if directed else (min(src, dst), max(src, dst))
        if key in stored:
            # mirror (j, i) of an undirected (i, j) already stored
            if stored[key] != w:
                raise GspDataError(
                    f"Graph: conflicting weights {stored[key]} and {w} for undirected edge {key}."
                )
            continue

        stored[key] = w

    return Graph(
        n_vertices=n,
        edges=tuple((s, d, w) for (s, d), w in sorted(stored.items())),
        directed=directed,
    )


def directed_cycle(n: int) -> Graph:
    """Directed cycle i -> (i+1 mod n) with unit weights."""

    if n < 2:
        raise GspDataError(f"Graph: directed cycle needs n >= 2, got {n}.")

    return build_graph(n, [(i, (i + 1) % n, 1.0) for i in range(n)], True)


def connected_components(g: Graph) -> int:
    """Number of weakly connected components."""

    if g.n_edges == 0:
        return g.n_vertices

    src = np.array([e[0] for e in g.edges])
    dst = np.array([e[1] for e in g.edges])
    pattern = sparse.coo_matrix(
        (np.ones(g.n_edges), (src, dst)), shape=(g.n_vertices, g.n_vertices)
    )
    count, _ = _cs_components(pattern, directed=True, connection="weak")

    return int(count)


@dataclass(frozen=True, eq=False)
class Gso:

    matrix: NDArray[np.float64]
    """N x N shift operator S."""
    variant: str
    """One of `GSO_VARIANTS`."""
    source: Optional[Graph] = None
    """Originating graph, absent for custom operators."""
    _fingerprint: str = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise GspDataError(
                f"Gso: shift operator should be square, got shape {matrix.shape}."
            )
        if not np.all(np.isfinite(matrix)):
            raise GspDataError("Gso: shift operator has non-finite entries.")
        if self.variant not in GSO_VARIANTS:
            raise GspDataError(
                f"Gso: unknown variant {self.variant}. Should be one of {GSO_VARIANTS}."
            )

        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(
            self,
            "_fingerprint",
            hashlib.sha1(np.ascontiguousarray(matrix).tobytes()).hexdigest(),
        )

    @classmethod
    def custom(cls, matrix: NDArray[np.float64]) -> "Gso":
        return cls(matrix=matrix, variant="custom")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def fingerprint(self) -> str:
        """sha1 of the operator bytes."""
        return self._fingerprint

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.matrix, self.matrix.T))

    @property
    def is_laplacian(self) -> bool:
        return self.variant in LAPLACIAN_VARIANTS

    def to_csr(self) -> sparse.csr_array:
        """Compressed sparse row view used by the multiply-accumulate kernels."""
        return sparse.csr_array(self.matrix)


def make_gso(g: Graph, variant: str) -> Gso:
    """Assemble the shift operator `variant` of `g`.

    Laplacians are assembled entry by entry from the edge list (L 1 = 0 holds
    exactly up to the rounding of the degree sums).
    """

    variant = VARIANT_ALIASES.get(variant, variant)

    if variant not in GSO_VARIANTS or variant == "custom":
        raise GspDataError(
            f"Gso: variant {variant} cannot be built from a graph. Should be one of {GSO_VARIANTS[:-1]}."
        )

    if variant == "adjacency":
        return Gso(matrix=g.adjacency(), variant=variant, source=g)

    if g.directed:
        raise GspDataError(
            f"Gso: {variant} is only defined for undirected graphs."
        )
    if g.has_negative_weights:
        raise GspDataError(
            f"Gso: {variant} requires nonnegative edge weights."
        )

    n = g.n_vertices
    deg = g.degrees()
    lap = np.zeros((n, n), dtype=np.float64)

    if variant == "combinatorial-laplacian":
        lap[np.diag_indices(n)] = deg
        for src, dst, w in g.expanded_edges():
            lap[dst, src] = -w

    elif variant == "normalized-laplacian":
        inv_sqrt = np.zeros(n, dtype=np.float64)
        inv_sqrt[deg > 0] = 1.0 / np.sqrt(deg[deg > 0])
        lap[np.diag_indices(n)] = (deg > 0).astype(np.float64)
        for src, dst, w in g.expanded_edges():
            lap[dst, src] = -w * inv_sqrt[dst] * inv_sqrt[src]

    else:
        inv = np.zeros(n, dtype=np.float64)
        inv[deg > 0] = 1.0 / deg[deg > 0]
        lap[np.diag_indices(n)] = (deg > 0).astype(np.float64)
        for src, dst, w in g.expanded_edges():
            lap[dst, src] = -w * inv[dst]

    return Gso(matrix=lap, variant=variant, source=g)


def is_directed_cycle(s: Gso) -> bool:
    """Whether `s` is the unit-weight adjacency of the directed cycle 0 -> 1 -> ... -> 0."""

    n = s.n
    if n < 2:
        return False

    return bool(np.array_equal(s.matrix, np.roll(np.eye(n), 1, axis=0)))
