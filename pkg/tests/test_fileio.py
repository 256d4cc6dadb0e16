#!/usr/bin/env python3
from pathlib import Path

import numpy as np
import pytest

from gspkit.fileio import read_graph
from gspkit.fileio import read_labels
from gspkit.fileio import read_signal
from gspkit.fileio import write_graph
from gspkit.fileio import write_matrix
from gspkit.graphs import build_graph
from gspkit.tools import GspDataError


def test_read_graph_with_and_without_header(tmp_path: Path) -> None:

    (tmp_path / "pairs.csv").write_text("0,1\n# comment\n\n2,1\n")
    g = read_graph(tmp_path / "pairs.csv")

    assert g.n_vertices == 3
    assert not g.directed
    assert g.edges == ((0, 1, 1.0), (1, 2, 1.0))

    (tmp_path / "weighted.csv").write_text("0,2,0.5\n")
    assert read_graph(tmp_path / "weighted.csv").edges == ((0, 2, 0.5),)

    k3 = read_graph("./tests/test_data/k3.csv")
    assert k3.n_vertices == 3
    assert k3.n_edges == 3


def test_graph_files_round_trip(tmp_path: Path) -> None:

    g = build_graph(4, [(0, 1, 0.1), (2, 3, 1.0 / 3.0), (3, 0, -2.0)], directed=True)
    write_graph(tmp_path / "g.csv", g)

    again = read_graph(tmp_path / "g.csv")

    assert again.directed
    assert again.n_vertices == 4
    assert np.array_equal(again.adjacency(), g.adjacency())

    write_graph(tmp_path / "empty.csv", build_graph(3, []))
    assert read_graph(tmp_path / "empty.csv").n_edges == 0


def test_read_signal(tmp_path: Path) -> None:

    values = np.random.default_rng(0).standard_normal((5, 3))
    write_matrix(tmp_path / "xs.csv", values)

    assert np.array_equal(read_signal(tmp_path / "xs.csv"), values)
    assert read_signal("./tests/test_data/e0.csv").shape == (4, 1)


def test_malformed_files(tmp_path: Path) -> None:

    (tmp_path / "ragged.csv").write_text("1,2\n3\n")
    with pytest.raises(GspDataError):
        read_signal(tmp_path / "ragged.csv")

    (tmp_path / "words.csv").write_text("a,b\n1,x\n")
    with pytest.raises(GspDataError):
        read_signal(tmp_path / "words.csv")

    (tmp_path / "nan.csv").write_text("1\nnan\n")
    with pytest.raises(GspDataError):
        read_signal(tmp_path / "nan.csv")

    (tmp_path / "fraction.csv").write_text("0,1.5,1\n")
    with pytest.raises(GspDataError):
        read_graph(tmp_path / "fraction.csv")

    with pytest.raises(GspDataError):
        read_graph(tmp_path / "missing.csv")


def test_read_labels() -> None:

    labeled, labels = read_labels("./tests/test_data/labels.csv", 6)

    assert list(labeled.indices) == [0, 5]
    assert np.array_equal(labels, [1.0, -1.0])
