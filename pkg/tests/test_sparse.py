"""CSR adjacency contracts, checked against dense brute-force oracles."""

import numpy as np
import pytest

from fairdtd.errors import DimensionError, DomainError
from fairdtd.sparse import SparseAdjacency


def random_sym_edges(n, p, rng):
    upper = np.triu(rng.random((n, n)) < p, k=1)
    return np.argwhere(upper)


class TestConstruction:
    def test_from_edges_symmetrizes(self):
        adj = SparseAdjacency.from_edges(3, [[0, 1], [1, 2]])
        dense = adj.to_dense()
        np.testing.assert_array_equal(dense, dense.T)
        assert dense[0, 1] == 1.0 and dense[1, 0] == 1.0
        assert dense[0, 2] == 0.0

    def test_self_loops(self):
        adj = SparseAdjacency.from_edges(2, np.empty((0, 2)), add_self_loops=True)
        np.testing.assert_array_equal(adj.to_dense(), np.eye(2))

    def test_rejects_asymmetric_pattern(self):
        with pytest.raises(DomainError):
            SparseAdjacency(2, [0, 1, 1], [1], [1.0])

    def test_rejects_nonpositive_values(self):
        with pytest.raises(DomainError):
            SparseAdjacency.from_edges(2, [[0, 1]], values=np.array([0.0]))

    def test_rejects_bad_indptr(self):
        with pytest.raises(DomainError):
            SparseAdjacency(2, [0, 2, 1], [0, 1, 1], [1.0, 1.0, 1.0])


class TestMatmulDense:
    def test_self_loop_only_scales_rows(self):
        adj = SparseAdjacency.from_edges(
            3, np.empty((0, 2)), add_self_loops=True, loop_values=np.array([1.0, 2.0, 3.0])
        )
        x = np.arange(6.0).reshape(3, 2)
        np.testing.assert_allclose(adj.matmul_dense(x), x * np.array([[1.0], [2.0], [3.0]]))

    def test_two_node_normalized_path(self):
        # normalized path graph: both degrees 2 after self-loops -> all entries 1/2
        adj = SparseAdjacency.from_edges(
            2, [[0, 1]], values=np.array([0.5]), add_self_loops=True,
            loop_values=np.array([0.5, 0.5]),
        )
        out = adj.matmul_dense(np.array([[1.0], [3.0]]))
        np.testing.assert_allclose(out, [[2.0], [2.0]], atol=1e-15)

    def test_matches_dense_oracle_on_random_graphs(self):
        rng = np.random.default_rng(42)
        for n in (2, 10, 25, 50):
            for trial in range(5):
                edges = random_sym_edges(n, 0.3, rng)
                adj = SparseAdjacency.from_edges(n, edges, add_self_loops=True)
                x = rng.normal(size=(n, 7))
                expected = adj.to_dense() @ x
                np.testing.assert_allclose(adj.matmul_dense(x), expected, atol=1e-12)
                np.testing.assert_allclose(adj.matmul_dense_t(x), expected, atol=1e-12)

    def test_dimension_mismatch(self):
        adj = SparseAdjacency.from_edges(3, [[0, 1]])
        with pytest.raises(DimensionError):
            adj.matmul_dense(np.zeros((4, 2)))
