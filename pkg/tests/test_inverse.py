#!/usr/bin/env python3
import numpy as np
import pytest

from gspkit.fileio import read_graph
from gspkit.filters import filter_matrix
from gspkit.filters import GraphFilter
from gspkit.filters import heat_kernel
from gspkit.graphs import build_graph
from gspkit.graphs import make_gso
from gspkit.inverse import BandlimitedModel
from gspkit.inverse import identify_sources
from gspkit.inverse import interpolate_bandlimited
from gspkit.inverse import interpolate_regularized
from gspkit.inverse import sample
from gspkit.inverse import sampling_quality
from gspkit.inverse import SamplingSet
from gspkit.inverse import select_sampling_set
from gspkit.inverse import ssl_labels
from gspkit.inverse import tikhonov_denoise
from gspkit.spectral import decompose
from gspkit.tools import GspDataError
from gspkit.tools import GspNumericalError


def _random_connected(rng: np.random.Generator, n: int):

    edges = [(i, i + 1, rng.uniform(0.5, 1.5)) for i in range(n - 1)]
    edges += [
        (i, j, rng.uniform(0.5, 1.5))
        for i in range(n)
        for j in range(i + 2, n)
        if rng.uniform() < 0.25
    ]
    return build_graph(n, edges)


def _two_cliques(size: int = 10):

    edges = []
    for offset in (0, size):
        edges += [
            (offset + i, offset + j, 5.0) for i in range(size) for j in range(i + 1, size)
        ]
    edges.append((size - 1, size, 0.1))
    return build_graph(2 * size, edges)


def test_sampling_set_validation() -> None:

    m = SamplingSet.from_vertices([2, 0], 3)

    assert m.indices == (0, 2)
    assert np.array_equal(sample(np.array([5.0, 7.0, 9.0]), m), [5.0, 9.0])
    assert np.array_equal(m.zero_pad([5.0, 9.0]), [5.0, 0.0, 9.0])
    assert np.array_equal(m.selection_matrix() @ np.array([5.0, 7.0, 9.0]), [5.0, 9.0])

    x = np.arange(3.0)
    assert np.array_equal(sample(m.zero_pad(sample(x, m)), m), sample(x, m))

    with pytest.raises(GspDataError):
        SamplingSet(indices=(2, 1), n=3)

    with pytest.raises(GspDataError):
        SamplingSet(indices=(0, 3), n=3)

    with pytest.raises(GspDataError):
        SamplingSet.from_vertices([1, 1], 3)

    with pytest.raises(GspDataError):
        SamplingSet(indices=(), n=3)


def test_constant_extension() -> None:

    d = decompose(make_gso(read_graph("./tests/test_data/hexagon.csv"), "laplacian"))
    b = BandlimitedModel(decomposition=d, bandwidth=1)
    m = SamplingSet.from_vertices([0], 6)

    assert np.allclose(interpolate_bandlimited(b, m, np.array([2.5])), 2.5, atol=1e-12)
    assert select_sampling_set(b, 1).indices == (0,)


def test_bandlimited_recovery_from_greedy_sets() -> None:

    rng = np.random.default_rng(21)

    for _ in range(20):
        n = int(rng.integers(6, 17))
        d = decompose(make_gso(_random_connected(rng, n), "laplacian"))

        for k in range(1, 5):
            b = BandlimitedModel(decomposition=d, bandwidth=k)
            x = b.synthesize(rng.standard_normal(k))

            for size in (k, k + 2):
                m = select_sampling_set(b, size)
                assert sampling_quality(b, m) > 1e-10

                recovered = interpolate_bandlimited(b, m, sample(x, m))
                assert np.max(np.abs(recovered - x)) <= 1e-8


def test_too_few_samples() -> None:

    rng = np.random.default_rng(22)
    d = decompose(make_gso(_random_connected(rng, 12), "laplacian"))
    b = BandlimitedModel(decomposition=d, bandwidth=3)
    m = SamplingSet.from_vertices([0, 5], 12)

    with pytest.raises(GspDataError):
        interpolate_bandlimited(b, m, np.zeros(2))

    with pytest.raises(GspDataError):
        select_sampling_set(b, 2)


def test_rank_deficient_sampling_set() -> None:

    # swapping vertices 1 and 2 is an automorphism; rows 1 and 2 of V_2 coincide
    diamond = build_graph(4, [(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)])
    d = decompose(make_gso(diamond, "laplacian"))
    b = BandlimitedModel(decomposition=d, bandwidth=2)
    m = SamplingSet.from_vertices([1, 2], 4)

    assert sampling_quality(b, m) < 1e-10

    with pytest.raises(GspNumericalError, match="rank deficient"):
        interpolate_bandlimited(b, m, np.ones(2))


def test_full_sampling_set_sigma_min() -> None:

    d = decompose(make_gso(read_graph("./tests/test_data/hexagon.csv"), "laplacian"))
    b = BandlimitedModel(decomposition=d, bandwidth=3)

    m = select_sampling_set(b, 6)

    assert m.indices == tuple(range(6))
    assert sampling_quality(b, m) == pytest.approx(1.0)


def test_regularized_interpolation_normal_equations() -> None:

    rng = np.random.default_rng(31)

    for _ in range(50):
        g = _random_connected(rng, 10)
        s = make_gso(g, "laplacian")
        d = decompose(s)
        hfilt = GraphFilter.from_response(d, heat_kernel(0.5)(d.eigenvalues))
        m = SamplingSet.from_vertices(rng.choice(10, 6, replace=False), 10)
        x_m = rng.standard_normal(6)

        x = interpolate_regularized(s, hfilt, 1.0, m, x_m, d)

        phi = m.selection_matrix()
        complement = np.eye(10) - filter_matrix(hfilt, d=d)
        system = phi.T @ phi + complement.T @ complement
        oracle = np.linalg.solve(system, phi.T @ x_m)

        assert np.allclose(x, oracle, atol=1e-9)
        assert np.linalg.norm(system @ x - phi.T @ x_m) <= 1e-8


def test_regularized_penalty_decreases_with_alpha() -> None:

    rng = np.random.default_rng(32)
    s = make_gso(_random_connected(rng, 10), "laplacian")
    hfilt = GraphFilter.from_taps([1.0, -0.1])
    m = SamplingSet.from_vertices([0, 2, 4, 6, 8], 10)
    x_m = rng.standard_normal(5)
    complement = np.eye(10) - filter_matrix(hfilt, s)

    penalties = [
        float(np.sum((complement @ interpolate_regularized(s, hfilt, alpha, m, x_m)) ** 2))
        for alpha in np.logspace(-3, 3, 10)
    ]

    assert all(b <= a + 1e-12 for a, b in zip(penalties, penalties[1:]))


def test_regularized_interpolation_edge_cases() -> None:

    s = make_gso(read_graph("./tests/test_data/hexagon.csv"), "laplacian")
    x_m = np.arange(6, dtype=np.float64)
    everything = SamplingSet.from_vertices(range(6), 6)

    x = interpolate_regularized(s, GraphFilter.from_taps([1.0, -0.2]), 1e-8, everything, x_m)
    assert np.allclose(x, x_m, atol=1e-6)

    with pytest.raises(GspNumericalError):
        interpolate_regularized(
            s, GraphFilter.from_taps([1.0]), 1.0, SamplingSet.from_vertices([0, 1], 6), x_m[:2]
        )

    with pytest.raises(GspDataError):
        interpolate_regularized(s, GraphFilter.from_taps([1.0]), 0.0, everything, x_m)


def test_ssl_disconnected_components() -> None:

    k3 = read_graph("./tests/test_data/k3.csv")
    s = make_gso(k3.disjoint_union(k3), "laplacian")
    labeled = SamplingSet.from_vertices([0, 3], 6)

    scores, classes = ssl_labels(s, 1.0, labeled, np.array([1.0, -1.0]))

    assert np.allclose(scores, [1.0, 1.0, 1.0, -1.0, -1.0, -1.0], atol=1e-10)
    assert list(classes) == [1, 1, 1, -1, -1, -1]


def test_ssl_two_clusters() -> None:

    s = make_gso(_two_cliques(), "laplacian")
    labeled = SamplingSet.from_vertices([0, 19], 20)

    _, classes = ssl_labels(s, 0.1, labeled, np.array([1.0, -1.0]))
    truth = np.array([1] * 10 + [-1] * 10)

    assert np.count_nonzero(classes == truth) >= 18


def test_ssl_unlabeled_component_is_singular() -> None:

    k3 = read_graph("./tests/test_data/k3.csv")
    s = make_gso(k3.disjoint_union(k3), "laplacian")

    with pytest.raises(GspNumericalError):
        ssl_labels(s, 1.0, SamplingSet.from_vertices([0], 6), np.array([1.0]))


def test_ssl_all_labeled() -> None:

    s = make_gso(read_graph("./tests/test_data/hexagon.csv"), "laplacian")
    labels = np.array([1.0, -1.0, 1.0, 1.0, -1.0, 0.5])

    scores, _ = ssl_labels(s, 1e-9, SamplingSet.from_vertices(range(6), 6), labels)

    assert np.allclose(scores, labels, atol=1e-6)


def test_tikhonov_denoise() -> None:

    s = make_gso(read_graph("./tests/test_data/hexagon.csv"), "laplacian")
    y = np.random.default_rng(3).standard_normal(6)

    assert np.allclose(tikhonov_denoise(s, y, 0.0), y)

    x = tikhonov_denoise(s, y, 2.0, power=2)
    system = np.eye(6) + 2.0 * s.matrix @ s.matrix
    assert np.allclose(system @ x, y, atol=1e-10)

    smooth = tikhonov_denoise(s, y, 1e6)
    assert np.allclose(smooth, np.mean(y), atol=1e-4)


def test_source_identification() -> None:

    z = identify_sources(np.eye(4), 3.0 * np.eye(4)[2], 1)
    assert z.support == (2,)
    assert np.allclose(z.values, [3.0])
    assert np.allclose(z.dense(4), [0.0, 0.0, 3.0, 0.0])

    empty = identify_sources(np.eye(4), np.ones(4), 0)
    assert empty.support == ()
    assert empty.residual_norm == pytest.approx(2.0)

    with pytest.raises(GspDataError):
        identify_sources(np.eye(4), np.ones(4), 5)


def test_diffused_sources_recovered() -> None:

    path = build_graph(15, [(i, i + 1) for i in range(14)])
    s = make_gso(path, "laplacian")
    d = decompose(s)
    hmat = filter_matrix(GraphFilter.from_response(d, np.exp(-0.3 * d.eigenvalues)), d=d)

    z = np.zeros(15)
    z[2], z[11] = 2.0, -1.5
    x = hmat @ z

    estimate = identify_sources(hmat, x, 2)

    assert sorted(estimate.support) == [2, 11]
    assert np.allclose(estimate.dense(15), z, atol=1e-8)
    assert estimate.residual_norm <= 1e-8

    residuals = [identify_sources(hmat, x, k).residual_norm for k in range(4)]
    assert all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))
