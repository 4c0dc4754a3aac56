"""Symmetric sparse matrices in compressed-sparse-row form.

Holds graph adjacencies (raw or degree-normalized).  The stored pattern must
be symmetric and all stored values strictly positive.  Dense products go
through scipy's CSR kernels, which accumulate per row and therefore agree
with a dense matmul to within rounding.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, DomainError


class SparseAdjacency:
    """CSR matrix with a symmetric pattern and positive float64 values."""

    __slots__ = ("n", "indptr", "indices", "values", "_csr", "_csr_t")

    def __init__(self, n: int, indptr, indices, values):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64)
        self._validate()
        self._csr = sp.csr_matrix(
            (self.values, self.indices, self.indptr), shape=(self.n, self.n)
        )
        self._csr_t = self._csr.T.tocsr()

    def _validate(self) -> None:
        if self.n < 0:
            raise DimensionError("dimension must be non-negative")
        if self.indptr.shape != (self.n + 1,):
            raise DimensionError(
                f"indptr must have length n+1={self.n + 1}, got {self.indptr.shape[0]}"
            )
        if self.indptr[0] != 0 or (np.diff(self.indptr) < 0).any():
            raise DomainError("row offsets must start at 0 and be non-decreasing")
        nnz = int(self.indptr[-1])
        if self.indices.shape != (nnz,) or self.values.shape != (nnz,):
            raise DimensionError("indices/values length must match indptr[-1]")
        if nnz and (self.indices.min() < 0 or self.indices.max() >= self.n):
            raise DomainError("column index out of range")
        if (self.values <= 0).any():
            raise DomainError("all stored values must be positive")
        pattern = sp.csr_matrix(
            (np.ones_like(self.values), self.indices, self.indptr),
            shape=(self.n, self.n),
        )
        if (pattern != pattern.T).nnz != 0:
            raise DomainError("sparsity pattern must be symmetric")

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: np.ndarray,
        values: np.ndarray | None = None,
        add_self_loops: bool = False,
        loop_values: np.ndarray | None = None,
    ) -> "SparseAdjacency":
        """Build from an undirected edge list of canonical ``(i, j)`` pairs.

        Each pair is stored in both directions.  ``values`` gives one weight
        per input pair (default 1); ``loop_values`` gives per-node self-loop
        weights when ``add_self_loops`` is set.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        m = edges.shape[0]
        vals = np.ones(m) if values is None else np.asarray(values, dtype=np.float64)
        if vals.shape != (m,):
            raise DimensionError("values must have one entry per edge")
        rows = np.concatenate([edges[:, 0], edges[:, 1]])
        cols = np.concatenate([edges[:, 1], edges[:, 0]])
        data = np.concatenate([vals, vals])
        if add_self_loops:
            loops = (
                np.ones(n) if loop_values is None
                else np.asarray(loop_values, dtype=np.float64)
            )
            if loops.shape != (n,):
                raise DimensionError("loop_values must have one entry per node")
            rows = np.concatenate([rows, np.arange(n)])
            cols = np.concatenate([cols, np.arange(n)])
            data = np.concatenate([data, loops])
        coo = sp.coo_matrix((data, (rows, cols)), shape=(n, n))
        csr = coo.tocsr()
        csr.sum_duplicates()
        csr.sort_indices()
        return cls(n, csr.indptr, csr.indices, csr.data)

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])

    def matmul_dense(self, x: np.ndarray) -> np.ndarray:
        if x.shape[0] != self.n:
            raise DimensionError(f"matrix has {x.shape[0]} rows, expected {self.n}")
        return np.asarray(self._csr @ x)

    def matmul_dense_t(self, x: np.ndarray) -> np.ndarray:
        if x.shape[0] != self.n:
            raise DimensionError(f"matrix has {x.shape[0]} rows, expected {self.n}")
        return np.asarray(self._csr_t @ x)

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()
