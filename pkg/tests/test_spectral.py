#!/usr/bin/env python3
import numpy as np
import pytest

from gspkit.fileio import read_graph
from gspkit.graphs import build_graph
from gspkit.graphs import directed_cycle
from gspkit.graphs import Gso
from gspkit.graphs import make_gso
from gspkit.spectral import decompose
from gspkit.spectral import eigenvalue_clusters
from gspkit.spectral import frequency_order
from gspkit.spectral import gft
from gspkit.spectral import igft
from gspkit.spectral import SignalMatrix
from gspkit.spectral import spectrum_record
from gspkit.spectral import total_variation
from gspkit.tools import GspDataError


def _random_graph(rng: np.random.Generator, n: int, p: float = 0.4):

    # connected: a weighted path plus random chords
    edges = [
        (i, j, rng.uniform(0.1, 2.0))
        for i in range(n)
        for j in range(i + 1, n)
        if j == i + 1 or rng.uniform() < p
    ]
    return build_graph(n, edges)


def test_directed_cycle_gft_is_dft() -> None:

    n = 8
    d = decompose(make_gso(directed_cycle(n), "adjacency"))

    idx = np.arange(n)
    dft = np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)

    assert d.orthonormal
    assert not d.is_real
    assert np.allclose(d.inverse_basis, dft, atol=1e-10, rtol=0)
    assert np.allclose(d.eigenvalues, np.exp(-2j * np.pi * idx / n), atol=1e-12)

    x = np.random.default_rng(1).standard_normal(n)
    assert np.allclose(gft(d, x), np.fft.fft(x) / np.sqrt(n), atol=1e-10)


def test_k3_spectrum() -> None:

    d = decompose(make_gso(read_graph("./tests/test_data/k3.csv"), "laplacian"))

    assert np.allclose(d.eigenvalues, [0.0, 3.0, 3.0], atol=1e-12)
    assert d.has_repeated_eigenvalues
    assert list(d.clusters) == [0, 1, 1]
    assert list(frequency_order(d)) == [0, 1, 2]


def test_connected_laplacian_has_constant_null_vector() -> None:

    rng = np.random.default_rng(3)
    path = [(i, i + 1, rng.uniform(0.5, 1.5)) for i in range(9)]
    g = build_graph(10, path + [(0, 5, 1.0), (2, 8, 0.3)])
    d = decompose(make_gso(g, "laplacian"))

    zero = np.abs(d.eigenvalues) < 1e-10
    assert np.count_nonzero(zero) == 1

    v0 = d.eigenvectors[:, np.flatnonzero(zero)[0]]
    assert np.allclose(np.abs(v0), 1.0 / np.sqrt(10), atol=1e-10)


def test_zero_multiplicity_counts_components() -> None:

    k3 = read_graph("./tests/test_data/k3.csv")
    hexagon = read_graph("./tests/test_data/hexagon.csv")
    g = k3.disjoint_union(hexagon).disjoint_union(k3)

    d = decompose(make_gso(g, "laplacian"))

    assert np.count_nonzero(np.abs(d.eigenvalues) < 1e-10) == 3


def test_total_variation_matches_edge_sum() -> None:

    rng = np.random.default_rng(11)

    for _ in range(100):
        n = int(rng.integers(3, 12))
        g = _random_graph(rng, n)
        x = rng.standard_normal(n)

        edge_sum = sum(w * (x[i] - x[j]) ** 2 for i, j, w in g.edges)
        tv = total_variation(make_gso(g, "laplacian"), x)

        assert abs(tv - edge_sum) <= 1e-10 * max(1.0, edge_sum)


def test_total_variation_of_constant_signal() -> None:

    s = make_gso(read_graph("./tests/test_data/hexagon.csv"), "laplacian")

    assert total_variation(s, np.ones(6)) == pytest.approx(0.0, abs=1e-12)

    with pytest.raises(GspDataError):
        total_variation(s, np.ones(5))

    with pytest.raises(GspDataError):
        total_variation(make_gso(directed_cycle(4), "adjacency"), np.ones(4))


def test_gft_round_trip() -> None:

    rng = np.random.default_rng(5)
    g = _random_graph(rng, 12, 0.5)

    for variant in ["adjacency", "laplacian", "normalized", "random-walk"]:
        s = make_gso(g, variant)
        d = decompose(s)
        x = rng.standard_normal((12, 3))

        assert np.allclose(igft(d, gft(d, x)), x, atol=1e-10)
        assert np.allclose(
            s.matrix @ d.eigenvectors, d.eigenvectors * d.eigenvalues[None, :], atol=1e-10
        )


def test_random_walk_decomposition_is_not_orthonormal() -> None:

    s = make_gso(read_graph("./tests/test_data/hexagon.csv"), "random-walk")
    d = decompose(s)

    assert not d.orthonormal
    assert np.allclose(d.inverse_basis @ d.eigenvectors, np.eye(6), atol=1e-10)
    assert np.all(np.diff(d.eigenvalues[frequency_order(d)]) >= 0)


def test_random_walk_needs_positive_degrees() -> None:

    s = make_gso(build_graph(3, [(0, 1)]), "random-walk")

    with pytest.raises(GspDataError):
        decompose(s)


def test_adjacency_frequency_order() -> None:

    path = build_graph(6, [(i, i + 1) for i in range(5)])
    d = decompose(make_gso(path, "adjacency"))
    order = frequency_order(d)

    # largest adjacency eigenvalue is the smoothest
    assert order[0] == 5
    assert order[-1] == 0


def test_orthonormal_gft_preserves_energy() -> None:

    rng = np.random.default_rng(14)
    operators = [
        make_gso(read_graph("./tests/test_data/hexagon.csv"), "laplacian"),
        make_gso(_random_graph(rng, 10), "normalized"),
        make_gso(directed_cycle(6), "adjacency"),
    ]

    for s in operators:
        d = decompose(s)
        x = rng.standard_normal(s.n)

        assert d.orthonormal
        assert np.allclose(d.eigenvectors.conj().T @ d.eigenvectors, np.eye(s.n), atol=1e-10)
        assert np.linalg.norm(gft(d, x)) == pytest.approx(np.linalg.norm(x), rel=1e-10)


def test_directed_cycle_frequency_order() -> None:

    d = decompose(make_gso(directed_cycle(4), "adjacency"))

    # |1 - lambda_k|^2 = 0, 2, 4, 2 for lambda_k = 1, -i, -1, i
    order = frequency_order(d)

    assert order[0] == 0
    assert sorted(order[1:3]) == [1, 3]
    assert order[-1] == 2


def test_non_symmetric_needs_supplied_decomposition() -> None:

    s = Gso.custom(np.array([[0.0, 1.0], [2.0, 0.0]]))

    with pytest.raises(GspDataError):
        decompose(s)

    vals, vecs = np.linalg.eig(s.matrix)
    d = decompose(s, vecs, vals)

    assert not d.orthonormal
    assert np.allclose(igft(d, gft(d, np.array([1.0, -2.0]))), [1.0, -2.0])

    with pytest.raises(GspDataError):
        decompose(s, eigenvectors=vecs)


def test_eigenvalue_clusters() -> None:

    labels = eigenvalue_clusters(np.array([2.0, 0.0, 2.0 + 1e-12, 1.0]))

    assert labels[0] == labels[2]
    assert len(set(labels.tolist())) == 3


def test_spectrum_record_complex_pairs() -> None:

    d = decompose(make_gso(directed_cycle(4), "adjacency"))
    record = spectrum_record(d, gft(d, np.array([1.0, 0.0, 0.0, 0.0])))

    assert len(record["eigenvalues"]) == 4
    assert record["eigenvalues"][0] == [1.0, 0.0]
    assert len(record["coefficients"]) == 4


def test_signal_matrix_validation() -> None:

    xs = SignalMatrix(values=np.ones(4))
    assert (xs.n, xs.m) == (4, 1)

    with pytest.raises(GspDataError):
        SignalMatrix(values=np.array([[1.0, np.nan]]))

    with pytest.raises(GspDataError):
        SignalMatrix(values=np.ones((2, 2, 2)))
