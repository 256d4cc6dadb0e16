#!/usr/bin/env python3
import numpy as np
import pytest

from gspkit.fileio import read_graph
from gspkit.fileio import read_signal
from gspkit.filters import apply_filter
from gspkit.filters import apply_iir
from gspkit.filters import apply_kernel
from gspkit.filters import apply_polynomial
from gspkit.filters import apply_response
from gspkit.filters import cascade
from gspkit.filters import chebyshev_apply
from gspkit.filters import chebyshev_fit
from gspkit.filters import filter_matrix
from gspkit.filters import filterbank_frame_bounds
from gspkit.filters import gershgorin_interval
from gspkit.filters import GraphFilter
from gspkit.filters import heat_kernel
from gspkit.filters import kernel_filterbank
from gspkit.filters import lowpass_kernel
from gspkit.filters import parallel
from gspkit.filters import reduce_taps
from gspkit.filters import response_to_taps
from gspkit.filters import taps_to_response
from gspkit.filters import tight_frame_pair
from gspkit.filters import tikhonov_kernel
from gspkit.graphs import build_graph
from gspkit.graphs import directed_cycle
from gspkit.graphs import make_gso
from gspkit.spectral import decompose
from gspkit.tools import GspDataError
from gspkit.tools import GspNumericalError


def _hexagon(variant: str = "laplacian"):
    return make_gso(read_graph("./tests/test_data/hexagon.csv"), variant)


def test_unit_delay_on_cycle() -> None:

    s = make_gso(read_graph("./tests/test_data/cycle4.csv"), "adjacency")
    x = read_signal("./tests/test_data/e0.csv")[:, 0]

    y = apply_polynomial(s, [0.0, 1.0], x)

    assert np.array_equal(y, [0.0, 1.0, 0.0, 0.0])


def test_cycle_filtering_is_circular_convolution() -> None:

    n = 8
    s = make_gso(directed_cycle(n), "adjacency")
    d = decompose(s)
    rng = np.random.default_rng(2)
    h = rng.standard_normal(4)
    x = rng.standard_normal(n)

    padded = np.zeros(n)
    padded[:4] = h
    expected = np.real(np.fft.ifft(np.fft.fft(padded) * np.fft.fft(x)))

    assert np.allclose(apply_polynomial(s, h, x), expected, atol=1e-10)
    assert np.allclose(
        apply_response(d, taps_to_response(d, h), x), expected, atol=1e-10
    )


def test_polynomial_and_spectral_paths_agree() -> None:

    rng = np.random.default_rng(13)

    for _ in range(100):
        n = int(rng.integers(3, 51))
        edges = [(i, i + 1, rng.uniform(0.2, 1.0)) for i in range(n - 1)]
        edges += [
            (i, j, rng.uniform(0.2, 1.0))
            for i in range(n)
            for j in range(i + 2, n)
            if rng.uniform() < 3.0 / n
        ]
        s = make_gso(build_graph(n, edges), "laplacian")
        d = decompose(s)
        h = rng.standard_normal(int(rng.integers(1, 8)))
        x = rng.standard_normal(n)

        y_poly = apply_polynomial(s, h, x)
        y_spec = apply_response(d, taps_to_response(d, h), x)

        assert np.linalg.norm(y_poly - y_spec) <= 1e-8 * max(1.0, np.linalg.norm(y_poly))


def test_shift_invariance_and_cascade_commutativity() -> None:

    s = _hexagon()
    rng = np.random.default_rng(4)
    h1 = GraphFilter.from_taps(rng.standard_normal(3))
    h2 = GraphFilter.from_taps(rng.standard_normal(4))
    x = rng.standard_normal(6)

    hx = apply_filter(h1, x, s=s)
    assert np.allclose(s.matrix @ hx, apply_filter(h1, s.matrix @ x, s=s), atol=1e-9)

    y12 = apply_filter(cascade(h1, h2, s=s), x, s=s)
    y21 = apply_filter(cascade(h2, h1, s=s), x, s=s)
    y_seq = apply_filter(h2, apply_filter(h1, x, s=s), s=s)

    assert np.allclose(y12, y21, atol=1e-9)
    assert np.allclose(y12, y_seq, atol=1e-9)


def test_mixed_form_cascade_and_parallel() -> None:

    s = _hexagon()
    d = decompose(s)
    rng = np.random.default_rng(8)
    taps = GraphFilter.from_taps([1.0, -0.2])
    response = GraphFilter.from_response(d, rng.uniform(size=6))
    x = rng.standard_normal(6)

    with pytest.raises(GspDataError):
        cascade(taps, response)

    both = cascade(taps, response, d=d)
    expected = apply_filter(response, apply_filter(taps, x, s=s), d=d)
    assert np.allclose(apply_filter(both, x, d=d), expected, atol=1e-10)

    total = parallel(taps, GraphFilter.from_taps([0.5, 0.0, 0.1]))
    assert np.allclose(total.taps, [1.5, -0.2, 0.1])

    summed = parallel(response, response)
    assert np.allclose(summed.response, 2.0 * response.response)


def test_response_to_taps_round_trip() -> None:

    d = decompose(_hexagon())
    taps = np.array([0.5, -0.25, 0.125])
    response = taps_to_response(d, taps)

    recovered = response_to_taps(d, response)
    assert np.allclose(taps_to_response(d, recovered), response, atol=1e-8)


def test_response_must_be_constant_on_clusters() -> None:

    d = decompose(make_gso(read_graph("./tests/test_data/k3.csv"), "laplacian"))

    with pytest.raises(GspDataError):
        response_to_taps(d, np.array([1.0, 0.5, 0.25]))

    taps = response_to_taps(d, np.array([1.0, 0.5, 0.5]))
    assert taps.shape == (2,)


def test_taps_longer_than_n_are_reduced() -> None:

    s = _hexagon()
    rng = np.random.default_rng(6)
    h = rng.standard_normal(9) / 10.0
    x = rng.standard_normal(6)

    reduced = reduce_taps(h, s)
    assert reduced.shape == (6,)

    y_long = apply_polynomial(s, h, x)
    y_short = apply_polynomial(s, reduced, x)
    assert np.linalg.norm(y_long - y_short) <= 1e-6 * np.linalg.norm(y_long)

    assert GraphFilter.from_taps(h, s).taps.shape == (6,)


def test_taps_cascade_keeps_at_most_n_taps() -> None:

    s = make_gso(directed_cycle(4), "adjacency")
    ones = GraphFilter.from_taps(np.ones(4), s)
    x = np.random.default_rng(9).standard_normal(4)

    # (I + A + A^2 + A^3)^2 = 4 (I + A + A^2 + A^3) since A^4 = I
    both = cascade(ones, ones, s=s)

    assert both.taps.shape == (4,)
    assert np.allclose(both.taps, 4.0)
    assert np.allclose(
        apply_filter(both, x, s=s),
        apply_filter(ones, apply_filter(ones, x, s=s), s=s),
    )

    with pytest.raises(GspDataError):
        cascade(ones, ones)

    gain = cascade(ones, GraphFilter.from_taps([2.0]))
    assert np.allclose(gain.taps, 2.0)


def test_reduction_keeps_complex_taps() -> None:

    s = make_gso(directed_cycle(4), "adjacency")

    # 1j A^4 + 2 A^5 = 1j I + 2 A
    reduced = reduce_taps(np.array([0.0, 0.0, 0.0, 0.0, 1j, 2.0]), s)

    assert np.iscomplexobj(reduced)
    assert np.allclose(reduced, [1j, 2.0, 0.0, 0.0])
    assert not np.iscomplexobj(reduce_taps(np.ones(6), s))


def test_iir_matches_direct_solve() -> None:

    s = _hexagon()
    x = np.arange(6, dtype=np.float64)

    y = apply_iir(s, [1.0, 0.5], x)
    assert np.allclose((np.eye(6) + 0.5 * s.matrix) @ y, x, atol=1e-10)

    f = GraphFilter.from_rational([1.0, 0.5])
    assert np.allclose(apply_filter(f, x, s=s), y)


def test_iir_singular_operator() -> None:

    # L itself is singular on a connected graph
    with pytest.raises(GspNumericalError):
        apply_iir(_hexagon(), [0.0, 1.0], np.ones(6))


def test_chebyshev_approximates_heat_kernel() -> None:

    s = _hexagon()
    d = decompose(s)
    x = np.random.default_rng(0).standard_normal(6)

    expansion = chebyshev_fit(heat_kernel(0.5), 25, gershgorin_interval(s))
    exact = apply_kernel(d, heat_kernel(0.5), x)

    assert expansion.order == 25
    assert np.allclose(chebyshev_apply(s, expansion, x, d), exact, atol=1e-8)


def test_chebyshev_interval_must_cover_spectrum() -> None:

    s = _hexagon()
    d = decompose(s)
    expansion = chebyshev_fit(heat_kernel(1.0), 5, (0.0, 1.0))

    with pytest.raises(GspNumericalError):
        chebyshev_apply(s, expansion, np.ones(6), d)

    with pytest.raises(GspDataError):
        chebyshev_fit(heat_kernel(1.0), 5, (1.0, 0.0))


def test_tight_frame_preserves_energy() -> None:

    s = _hexagon()
    d = decompose(s)
    kernels = tight_frame_pair(float(np.max(d.eigenvalues)))
    x = np.random.default_rng(9).standard_normal(6)

    lo, hi = filterbank_frame_bounds(d, kernels)
    coefficients = kernel_filterbank(d, kernels, x)

    assert lo == pytest.approx(1.0)
    assert hi == pytest.approx(1.0)
    assert coefficients.shape == (2, 6)
    assert np.sum(coefficients**2) == pytest.approx(np.sum(x**2))


def test_named_kernels() -> None:

    lam = np.array([0.0, 1.0, 2.0])

    assert np.allclose(lowpass_kernel(1.0)(lam), [1.0, 1.0, 0.0])
    assert np.allclose(tikhonov_kernel(1.0, 2)(lam), [1.0, 0.5, 0.2])
    assert np.allclose(heat_kernel(0.0)(lam), 1.0)


def test_batched_filtering_is_blocking_independent() -> None:

    s = _hexagon("normalized")
    xs = np.random.default_rng(12).standard_normal((6, 11))
    h = [0.3, -1.0, 0.25, 0.5]

    single = apply_polynomial(s, h, xs, threads=1)
    threaded = apply_polynomial(s, h, xs, threads=4)

    assert np.array_equal(single, threaded)
    for j in range(11):
        assert np.array_equal(apply_polynomial(s, h, xs[:, j]), single[:, j])


def test_filter_matrix_and_validation() -> None:

    s = _hexagon()
    h = GraphFilter.from_taps([1.0, 2.0])

    assert np.allclose(filter_matrix(h, s), np.eye(6) + 2.0 * s.matrix)

    with pytest.raises(GspDataError):
        GraphFilter(form="taps")

    with pytest.raises(GspDataError):
        GraphFilter(form="wavelet", taps=[1.0])

    with pytest.raises(GspDataError):
        GraphFilter.from_taps([np.nan])

    with pytest.raises(GspDataError):
        apply_polynomial(s, [1.0], np.ones(4))
