"""
Sparse row-stochastic spatial weight matrix.

The N x N matrix w is stored once; the NT x NT operator I_T (x) w is never
built, it is applied period by period (see spatial_lag).
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from packages.core.errors import EmptyRow, InvalidWeights
from packages.core.hashing import array_hash

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    matrix: sp.csr_matrix
    k: Optional[int] = None
    region_ids: Optional[Tuple[str, ...]] = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=float, copy=True)
        m.eliminate_zeros()
        m.sort_indices()
        object.__setattr__(self, "matrix", m)
        if self.region_ids is not None:
            object.__setattr__(self, "region_ids", tuple(str(r) for r in self.region_ids))
        _check_row_stochastic(m)
        if self.region_ids is not None and len(self.region_ids) != m.shape[0]:
            raise InvalidWeights(
                f"{len(self.region_ids)} region ids for a {m.shape[0]} x {m.shape[0]} matrix"
            )
        if self.k is not None:
            nnz = np.diff(m.indptr)
            if np.any(nnz != self.k):
                raise InvalidWeights(f"Expected exactly {self.k} neighbors in every row")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def content_hash(self) -> str:
        m = self.matrix
        return array_hash(
            np.asarray(m.shape), m.indptr.astype(np.int64), m.indices.astype(np.int64), m.data
        )

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def neighbors(self, i: int) -> np.ndarray:
        m = self.matrix
        return m.indices[m.indptr[i]:m.indptr[i + 1]].copy()

    def is_symmetric(self, atol: float = 1e-14) -> bool:
        diff = abs(self.matrix - self.matrix.T)
        return diff.nnz == 0 or float(diff.max()) <= atol


def _check_row_stochastic(m: sp.csr_matrix):
    n_rows, n_cols = m.shape
    if n_rows != n_cols:
        raise InvalidWeights(f"Weight matrix must be square, got {m.shape}")
    if m.nnz and float(m.data.min()) < 0:
        raise InvalidWeights("Weight matrix entries must be nonnegative")
    if np.any(m.diagonal() != 0):
        raise InvalidWeights("Weight matrix must have a zero diagonal")
    row_sums = np.asarray(m.sum(axis=1)).ravel()
    bad = np.flatnonzero(np.abs(row_sums - 1.0) > ROW_SUM_TOL)
    if bad.size:
        raise InvalidWeights(
            f"Weight matrix is not row-stochastic; rows {bad[:10].tolist()} do not sum to 1"
        )


def row_normalize(
    adjacency: Union[np.ndarray, sp.spmatrix],
    k: Optional[int] = None,
    region_ids: Optional[Tuple[str, ...]] = None,
) -> WeightMatrix:
    """Divide every row of a nonnegative zero-diagonal adjacency by its sum."""
    a = sp.csr_matrix(adjacency, dtype=float, copy=True)
    if a.shape[0] != a.shape[1]:
        raise InvalidWeights(f"Adjacency must be square, got {a.shape}")
    if a.nnz and float(a.data.min()) < 0:
        raise InvalidWeights("Adjacency entries must be nonnegative")
    if np.any(a.diagonal() != 0):
        raise InvalidWeights("Adjacency must have a zero diagonal")
    a.eliminate_zeros()

    row_sums = np.asarray(a.sum(axis=1)).ravel()
    empty = np.flatnonzero(row_sums <= 0)
    if empty.size:
        raise EmptyRow(empty.tolist())

    w = sp.diags(1.0 / row_sums) @ a
    return WeightMatrix(matrix=sp.csr_matrix(w), k=k, region_ids=region_ids)
