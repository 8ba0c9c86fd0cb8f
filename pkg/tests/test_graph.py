"""Tests for skeleton graphs, hop distances and adjacency partitions."""

import json
import math
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pytest

from effgcn.core.errors import ArgumentError, FormatError, GraphStructureError
from effgcn.graph import (
    DEGREE_EPS,
    SkeletonGraph,
    build_partitions,
    chain_graph,
    hop_distances,
    load_graph,
    normalize_partition,
    ntu_graph,
    row_normalize_partition,
)


def floyd_warshall(graph: SkeletonGraph) -> np.ndarray:
    """Independent all-pairs shortest paths over the raw edge list."""
    n = graph.num_joints
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0)
    for i, j in graph.edges:
        dist[i, j] = dist[j, i] = 1
    for k in range(n):
        dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
    return dist


def random_tree(rng: np.random.Generator, joints: int) -> SkeletonGraph:
    """Random tree rooted at joint 0, with its parent map."""
    parents = [0] + [int(rng.integers(0, i)) for i in range(1, joints)]
    return SkeletonGraph(
        num_joints=joints,
        edges=tuple((i, parents[i]) for i in range(1, joints)),
        center=0,
        parents=tuple(parents),
    ).validate()


class TestSkeletonGraph(unittest.TestCase):
    """Construction and validation of SkeletonGraph."""

    def test_edge_out_of_range(self):
        with self.assertRaises(ArgumentError):
            SkeletonGraph(num_joints=2, edges=((0, 2),), center=0, parents=(0, 0))

    def test_parent_without_edge_rejected(self):
        graph = SkeletonGraph(
            num_joints=3, edges=((0, 1), (1, 2)), center=1, parents=(1, 1, 0))
        with self.assertRaises(GraphStructureError):
            graph.validate()

    def test_center_must_be_own_parent(self):
        graph = SkeletonGraph(
            num_joints=2, edges=((0, 1),), center=0, parents=(1, 0))
        with self.assertRaises(GraphStructureError):
            graph.validate()

    def test_dict_round_trip(self):
        graph = chain_graph(5)
        self.assertEqual(SkeletonGraph.from_dict(graph.to_dict()), graph)

    def test_one_based_file_is_shifted(self):
        data = {"num_joints": 3, "index_base": 1, "center": 2,
                "edges": [[1, 2], [2, 3]], "parents": [2, 2, 2]}
        graph = SkeletonGraph.from_dict(data)
        self.assertEqual(graph.center, 1)
        self.assertEqual(graph.edges, ((0, 1), (1, 2)))
        self.assertEqual(graph.parents, (1, 1, 1))

    def test_missing_key_is_format_error(self):
        with self.assertRaises(FormatError):
            SkeletonGraph.from_dict({"num_joints": 3, "edges": []})

    def test_load_graph_from_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "chain.json"
            path.write_text(json.dumps(chain_graph(4).to_dict()))
            self.assertEqual(load_graph(path).num_joints, 4)

    def test_load_graph_bad_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "broken.json"
            path.write_text("{not json")
            with self.assertRaises(FormatError) as ctx:
                load_graph(path)
            self.assertIsNotNone(ctx.exception.offset)

    def test_chain_graph_center_default(self):
        graph = chain_graph(7)
        self.assertEqual(graph.center, 3)
        self.assertEqual(graph.parents[0], 1)
        self.assertEqual(graph.parents[6], 5)


class TestNTUGraph(unittest.TestCase):
    """The shipped 25-joint skeleton."""

    def setUp(self):
        self.graph = ntu_graph()

    def test_shape(self):
        self.assertEqual(self.graph.num_joints, 25)
        self.assertEqual(len(self.graph.edges), 24)
        self.assertEqual(self.graph.joint_names[self.graph.center], "middle_of_spine")

    def test_hand_tip_distance_matches_oracle(self):
        """Hand tips are seven hops from the middle of the spine."""
        oracle = floyd_warshall(self.graph)
        dist = hop_distances(self.graph)
        np.testing.assert_array_equal(dist, oracle)
        right_tip = self.graph.joint_names.index("tip_of_right_hand")
        left_tip = self.graph.joint_names.index("tip_of_left_hand")
        self.assertEqual(dist[right_tip, self.graph.center], 7)
        self.assertEqual(dist[left_tip, self.graph.center], 7)

    def test_partitions_disjoint_at_distance_two(self):
        adj = build_partitions(self.graph, 2)
        coverage = adj.partitions.sum(axis=0)
        self.assertLessEqual(coverage.max(), 1.0)
        for a in range(3):
            for b in range(a + 1, 3):
                self.assertEqual(float(np.sum(adj.partitions[a] * adj.partitions[b])), 0.0)


class TestHopDistances:
    """Shortest-path distances."""

    def test_path_of_three(self):
        dist = hop_distances(chain_graph(3))
        assert dist[0, 2] == 2
        assert dist[0, 1] == 1
        assert np.all(np.diag(dist) == 0)
        np.testing.assert_array_equal(dist, dist.T)

    def test_single_joint(self):
        dist = hop_distances(chain_graph(1))
        assert dist.shape == (1, 1)
        assert dist[0, 0] == 0

    def test_disconnected_graph_names_pair(self):
        graph = SkeletonGraph(num_joints=3, edges=((0, 1),), center=0, parents=(0, 0, 0))
        with pytest.raises(GraphStructureError, match="joint 2"):
            hop_distances(graph)

    def test_random_trees_match_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            graph = random_tree(rng, int(rng.integers(2, 12)))
            np.testing.assert_array_equal(hop_distances(graph), floyd_warshall(graph))


class TestBuildPartitions:
    """Distance partitions A_0..A_D."""

    def test_zero_distance_is_identity(self):
        adj = build_partitions(ntu_graph(), 0)
        assert adj.num_partitions == 1
        np.testing.assert_array_equal(adj.partitions[0], np.eye(25))

    def test_path_direct_adjacency(self):
        adj = build_partitions(chain_graph(3), 1)
        expected = np.zeros((3, 3))
        for i, j in [(0, 1), (1, 0), (1, 2), (2, 1)]:
            expected[i, j] = 1
        np.testing.assert_array_equal(adj.partitions[1], expected)

    def test_path_second_order(self):
        adj = build_partitions(chain_graph(3), 2)
        expected = np.zeros((3, 3))
        expected[0, 2] = expected[2, 0] = 1
        np.testing.assert_array_equal(adj.partitions[2], expected)

    def test_negative_distance_rejected(self):
        with pytest.raises(ArgumentError):
            build_partitions(chain_graph(3), -1)

    def test_far_pairs_appear_nowhere(self):
        adj = build_partitions(chain_graph(6), 2)
        assert adj.partitions[:, 0, 5].sum() == 0

    def test_partitions_are_read_only(self):
        adj = build_partitions(chain_graph(3), 1)
        with pytest.raises(ValueError):
            adj.partitions[0, 0, 0] = 5

    def test_partitions_match_exact_distance_indicator(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            graph = random_tree(rng, int(rng.integers(2, 10)))
            depth = int(rng.integers(0, 4))
            adj = build_partitions(graph, depth)
            oracle = floyd_warshall(graph)
            for d in range(depth + 1):
                np.testing.assert_array_equal(adj.partitions[d], (oracle == d).astype(float))
                np.testing.assert_array_equal(adj.partitions[d], adj.partitions[d].T)

    def test_normalized_symmetric_and_bounded(self):
        adj = build_partitions(ntu_graph(), 3)
        for matrix in adj.normalized:
            np.testing.assert_allclose(matrix, matrix.T, atol=1e-12)
            assert matrix.min() >= 0.0
            assert matrix.max() <= 1.0


class TestNormalizePartition:
    """Symmetric and row normalization."""

    def test_identity(self):
        out = normalize_partition(np.eye(4))
        np.testing.assert_allclose(out, np.eye(4), rtol=1e-6)
        assert np.all(np.diag(out) < 1.0)

    def test_path_entry(self):
        a1 = build_partitions(chain_graph(3), 1).partitions[1]
        out = normalize_partition(a1)
        expected = 1.0 / math.sqrt((1 + DEGREE_EPS) * (2 + DEGREE_EPS))
        assert out[0, 1] == pytest.approx(expected, rel=1e-12)
        assert out[0, 1] == pytest.approx(1 / math.sqrt(2), abs=1e-6)

    def test_all_zero(self):
        np.testing.assert_array_equal(normalize_partition(np.zeros((3, 3))), np.zeros((3, 3)))

    def test_non_square_rejected(self):
        with pytest.raises(ArgumentError):
            normalize_partition(np.zeros((2, 3)))

    def test_row_normalized_columns_average_subsets(self):
        a1 = build_partitions(chain_graph(3), 1).partitions[1]
        out = row_normalize_partition(a1)
        np.testing.assert_allclose(out.sum(axis=0), [1.0, 1.0, 1.0])
        assert out[0, 1] == pytest.approx(0.5)
        assert out[1, 0] == pytest.approx(1.0)

    def test_row_normalized_empty_subset_stays_zero(self):
        adj = build_partitions(chain_graph(3), 2)
        row = adj.row_normalized()
        np.testing.assert_array_equal(row[2][:, 1], np.zeros(3))
