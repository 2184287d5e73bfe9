import numpy as np
import numpy.testing as npt
import pytest

from domset.bench import OUTLIER, gen_synthetic
from domset.io import (
    load_matrix,
    read_clusterings,
    read_dense_matrix,
    read_descriptors,
    read_edge_list,
    read_groups,
    read_labeled_points,
    write_dense_matrix,
    write_labeled_points,
)
from domset.exceptions import ParseError


def put(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, newline="\n")
    return path


class TestDenseMatrix:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        a = rng.random((5, 5))
        a = (a + a.T) / 2.0
        np.fill_diagonal(a, 0.0)
        path = tmp_path / "m.txt"
        write_dense_matrix(path, a)
        npt.assert_array_equal(read_dense_matrix(path), a)

    def test_hand_written_content(self, tmp_path):
        path = put(tmp_path, "m.txt", "2\n0 0.5\n0.5 0\n")
        npt.assert_allclose(read_dense_matrix(path), [[0.0, 0.5], [0.5, 0.0]])

    def test_blank_lines_tolerated(self, tmp_path):
        path = put(tmp_path, "m.txt", "2\n\n0 1\n1 0\n\n")
        assert read_dense_matrix(path).shape == (2, 2)

    def test_bad_header_rejected(self, tmp_path):
        path = put(tmp_path, "m.txt", "two\n0 1\n1 0\n")
        with pytest.raises(ParseError):
            read_dense_matrix(path)

    def test_short_row_rejected(self, tmp_path):
        path = put(tmp_path, "m.txt", "2\n0 1\n1\n")
        with pytest.raises(ParseError):
            read_dense_matrix(path)

    def test_missing_row_rejected(self, tmp_path):
        path = put(tmp_path, "m.txt", "2\n0 1\n")
        with pytest.raises(ParseError):
            read_dense_matrix(path)

    def test_non_numeric_rejected(self, tmp_path):
        path = put(tmp_path, "m.txt", "2\n0 x\n1 0\n")
        with pytest.raises(ParseError):
            read_dense_matrix(path)


class TestEdgeList:
    def test_two_edges(self, tmp_path):
        path = put(tmp_path, "e.txt", "0 1 0.5\n1 2 0.25\n")
        a = read_edge_list(path)
        assert a.shape == (3, 3)
        assert a[0, 1] == 0.5 and a[1, 0] == 0.5
        assert a[2, 1] == 0.25
        assert a[0, 2] == 0.0

    def test_duplicate_edge_rejected(self, tmp_path):
        path = put(tmp_path, "e.txt", "0 1 0.5\n1 0 0.25\n")
        with pytest.raises(ParseError):
            read_edge_list(path)

    def test_self_loop_rejected(self, tmp_path):
        path = put(tmp_path, "e.txt", "1 1 0.5\n")
        with pytest.raises(ParseError):
            read_edge_list(path)

    def test_wrong_arity_rejected(self, tmp_path):
        path = put(tmp_path, "e.txt", "0 1\n")
        with pytest.raises(ParseError):
            read_edge_list(path)

    def test_empty_file_rejected(self, tmp_path):
        path = put(tmp_path, "e.txt", "\n")
        with pytest.raises(ParseError):
            read_edge_list(path)


class TestLoadMatrix:
    def test_dispatches_on_shape(self, tmp_path):
        dense = put(tmp_path, "d.txt", "2\n0 1\n1 0\n")
        edges = put(tmp_path, "e.txt", "0 1 1.0\n")
        npt.assert_array_equal(load_matrix(dense), load_matrix(edges))

    def test_garbage_rejected(self, tmp_path):
        path = put(tmp_path, "g.txt", "0 1 2 3\n")
        with pytest.raises(ParseError):
            load_matrix(path)


class TestLabeledPoints:
    def test_round_trip(self, tmp_path):
        data = gen_synthetic(k=2, m=3, d=4, sigma=0.1, l=2, seed=0)
        path = tmp_path / "pts.txt"
        write_labeled_points(path, data.points, data.labels)
        points, labels = read_labeled_points(path)
        npt.assert_array_equal(points, data.points)
        npt.assert_array_equal(labels, data.labels)

    def test_hand_written_content(self, tmp_path):
        path = put(tmp_path, "p.txt", "3 2\n0 0 C0\n1 1 C1\n0.5 0.5 OUT\n")
        points, labels = read_labeled_points(path)
        npt.assert_allclose(points, [[0, 0], [1, 1], [0.5, 0.5]])
        npt.assert_array_equal(labels, [0, 1, OUTLIER])

    def test_bad_label_token_rejected(self, tmp_path):
        path = put(tmp_path, "p.txt", "1 2\n0 0 L0\n")
        with pytest.raises(ParseError):
            read_labeled_points(path)

    def test_wrong_coordinate_count_rejected(self, tmp_path):
        path = put(tmp_path, "p.txt", "1 3\n0 0 C0\n")
        with pytest.raises(ParseError):
            read_labeled_points(path)

    def test_wrong_point_count_rejected(self, tmp_path):
        path = put(tmp_path, "p.txt", "2 2\n0 0 C0\n")
        with pytest.raises(ParseError):
            read_labeled_points(path)


class TestDescriptors:
    def test_groups_elements_by_id(self, tmp_path):
        path = put(
            tmp_path,
            "desc.txt",
            "a 1 0\na 0 1\nb 2 2\na 1 1\nb 0 2\n",
        )
        table = read_descriptors(path)
        assert list(table.keys()) == ["a", "b"]
        npt.assert_allclose(table["a"], [[1, 0], [0, 1], [1, 1]])
        npt.assert_allclose(table["b"], [[2, 2], [0, 2]])

    def test_inconsistent_width_rejected(self, tmp_path):
        path = put(tmp_path, "desc.txt", "a 1 0\nb 1 2 3\n")
        with pytest.raises(ParseError):
            read_descriptors(path)

    def test_value_only_lines_rejected(self, tmp_path):
        path = put(tmp_path, "desc.txt", "a\n")
        with pytest.raises(ParseError):
            read_descriptors(path)


class TestClusterings:
    def test_one_vector_per_line(self, tmp_path):
        path = put(tmp_path, "c.txt", "0 0 1\n0 1 1\n")
        rows = read_clusterings(path)
        assert len(rows) == 2
        npt.assert_array_equal(rows[0], ["0", "0", "1"])

    def test_empty_file_rejected(self, tmp_path):
        path = put(tmp_path, "c.txt", "\n\n")
        with pytest.raises(ParseError):
            read_clusterings(path)


class TestGroups:
    def test_groups_ordered_by_group_id(self, tmp_path):
        path = put(tmp_path, "g.txt", "0 1\n1 0\n2 1\n3 0\n")
        groups = read_groups(path)
        assert [g.tolist() for g in groups] == [[1, 3], [0, 2]]

    def test_duplicate_entity_rejected(self, tmp_path):
        path = put(tmp_path, "g.txt", "0 0\n0 1\n")
        with pytest.raises(ParseError):
            read_groups(path)

    def test_non_integer_rejected(self, tmp_path):
        path = put(tmp_path, "g.txt", "0 a\n")
        with pytest.raises(ParseError):
            read_groups(path)
