"""
File Format Tests
-----------------
Edge-list parsing, label mapping and MatrixFile validation.
"""

import io
import json

import numpy as np
import pytest

from ghype.exceptions import InputError
from ghype.models.graph import MultiGraph
from ghype.utils.file_io import (
    edges_to_graph,
    integer_matrix,
    load_graph,
    parse_edge_lines,
    parse_matrix,
    read_matrix,
    write_edge_blocks,
    write_matrix,
)


def test_parse_skips_comments_and_defaults_multiplicity():
    lines = ["# header\n", "\n", "a\tb\n", "b\tc\n"]
    edges = parse_edge_lines(lines)
    assert edges[["src", "dst", "multiplicity"]].values.tolist() == [["a", "b", 1], ["b", "c", 1]]
    assert edges["line"].tolist() == [3, 4]


def test_parse_reads_multiplicities():
    edges = parse_edge_lines(["a\tb\t3\r\n", "b\ta\t1\n"])
    assert edges["multiplicity"].tolist() == [3, 1]


@pytest.mark.parametrize(
    "lines, fragment",
    [
        (["a\tb\n", "a b\n"], "g.tsv:2"),
        (["a\tb\t1\t2\n"], "g.tsv:1"),
        (["a\tb\tx\n"], "not an integer"),
        (["a\tb\t0\n"], "must be positive"),
        (["a\tb\t-2\n"], "must be positive"),
        (["a\tb\t2\n", "b\tc\n"], "earlier lines have 3"),
        (["\tb\n"], "empty vertex label"),
    ],
)
def test_parse_errors_name_the_line(lines, fragment):
    with pytest.raises(InputError, match=fragment):
        parse_edge_lines(lines, source="g.tsv")


def test_error_line_numbers_count_skipped_lines():
    lines = ["# header\n", "a\tb\t2\n", "\n", "# note\n", "b\tc\tmany\n"]
    with pytest.raises(InputError, match=r"g\.tsv:5: multiplicity 'many' is not an integer"):
        parse_edge_lines(lines, source="g.tsv")


def test_three_column_lines_keep_their_line_numbers():
    edges = parse_edge_lines(["# c\n", "a\tb\t2\n", "\n", "b\ta\t5\n"])
    assert edges["line"].tolist() == [2, 4]
    assert edges["multiplicity"].tolist() == [2, 5]


def test_empty_input_gives_empty_graph():
    lg = edges_to_graph(parse_edge_lines([]), directed=True)
    assert lg.labels == []
    assert lg.graph.n == 0
    assert lg.graph.m == 0


def test_labels_follow_first_appearance():
    lg = edges_to_graph(parse_edge_lines(["z\ty\n", "x\tz\n"]), directed=True)
    assert lg.labels == ["z", "y", "x"]
    assert lg.graph.multiplicity(0, 1) == 1
    assert lg.graph.multiplicity(2, 0) == 1


def test_undirected_self_loop_line_is_doubled():
    lg = edges_to_graph(parse_edge_lines(["v\tv\t2\n", "v\tw\t1\n"]), directed=False)
    assert lg.graph.adj.tolist() == [[4, 1], [1, 0]]
    assert lg.graph.m == 3


def test_load_graph_from_file(tmp_path):
    path = tmp_path / "g.tsv"
    path.write_text("a\tb\t2\nb\ta\t1\n", encoding="utf-8")
    lg = load_graph(str(path), directed=True)
    assert lg.graph.adj.tolist() == [[0, 2], [1, 0]]


def test_missing_file_is_an_input_error(tmp_path):
    with pytest.raises(InputError, match="Cannot open"):
        load_graph(str(tmp_path / "absent.tsv"), directed=True)


def test_write_edge_blocks_reuses_labels():
    graphs = [
        MultiGraph(adj=[[0, 2], [0, 0]], directed=True),
        MultiGraph(adj=[[0, 0], [0, 0]], directed=True),
    ]
    stream = io.StringIO()
    assert write_edge_blocks(graphs, ["left", "right"], stream) == 2
    assert stream.getvalue() == "# sample 0\nleft\tright\t2\n# sample 1\n"


def test_matrix_file_round_trip(tmp_path):
    path = tmp_path / "m.json"
    write_matrix(str(path), np.array([[0.5, 1.0], [2.0, 0.0]]), ["a", "b"], directed=True)
    mf = read_matrix(str(path))
    assert mf.n == 2 and mf.directed and mf.labels == ["a", "b"]
    assert mf.matrix.tolist() == [[0.5, 1.0], [2.0, 0.0]]


@pytest.mark.parametrize(
    "payload, fragment",
    [
        ({"n": 2, "directed": True, "labels": ["a", "b"]}, "missing key"),
        ({"n": 2, "directed": True, "labels": ["a", "b"], "data": [1, 2, 3]}, "expected n\\^2 = 4"),
        ({"n": 2, "directed": True, "labels": ["a"], "data": [0, 0, 0, 0]}, "1 labels"),
        ({"n": 2, "directed": "yes", "labels": ["a", "b"], "data": [0, 0, 0, 0]}, "directed"),
        ({"n": 1, "directed": False, "labels": ["a"], "data": [-1]}, "non-negative"),
        ({"n": -1, "directed": False, "labels": [], "data": []}, "non-negative integer"),
    ],
)
def test_parse_matrix_rejects_bad_payloads(payload, fragment):
    with pytest.raises(InputError, match=fragment):
        parse_matrix(payload)


def test_invalid_json_names_the_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(InputError, match="invalid JSON"):
        read_matrix(str(path))


def test_integer_matrix_rejects_fractions():
    mf = parse_matrix({"n": 1, "directed": True, "labels": ["a"], "data": [1.5]})
    with pytest.raises(InputError):
        integer_matrix(mf, "Xi")
    ok = parse_matrix(json.loads('{"n": 1, "directed": true, "labels": ["a"], "data": [3.0]}'))
    assert integer_matrix(ok, "Xi").tolist() == [[3]]
