# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Minimal sparse kernel set every other module consumes.

A `SparseMatrix` is a canonical :class:`scipy.sparse.csr_matrix`: float64
values, column indices strictly increasing within each row, no duplicates
and no explicitly stored zeros. A `DenseMatrix` is a 2-D float64
:class:`numpy.ndarray`. Matrices are never mutated after construction.

Degree matrices are never materialized; degrees are nonzero counts per
row or column, as returned by :func:`nnz_degrees`.
"""

from typing import Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .exceptions import DimensionError, ParameterError

__all__ = [
    'SparseMatrix', 'csr_from_triplets', 'check_csr', 'from_dense', 'to_dense',
    'spmm', 'transpose', 'nnz_degrees', 'sym_normalize', 'bipartite_normalize',
]

SparseMatrix = sp.csr_matrix

AXIS_ROWS = 'rows'
AXIS_COLS = 'cols'


def _canonical(a: sp.spmatrix) -> sp.csr_matrix:
    out = sp.csr_matrix(a, dtype=np.float64, copy=True)
    out.sum_duplicates()
    out.eliminate_zeros()
    out.sort_indices()
    return out


def csr_from_triplets(rows: Sequence[int], cols: Sequence[int], values: Union[Sequence[float], float],
                      shape: Tuple[int, int]) -> sp.csr_matrix:
    """
    Build a canonical CSR matrix from coordinate triplets. Duplicate
    coordinates are summed, zero values are dropped.

    :param rows: row indices,
    :param cols: column indices,
    :param values: stored values, or a scalar broadcast to every triplet,
    :param shape: (n_rows, n_cols),
    :return: canonical CSR matrix.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if np.isscalar(values):
        values = np.full(rows.shape, float(values))
    values = np.asarray(values, dtype=np.float64)
    if not (rows.shape == cols.shape == values.shape):
        raise ParameterError('rows, cols and values must have the same length')
    n_rows, n_cols = shape
    if rows.size and (rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols):
        raise ParameterError(f'triplet index out of range for shape {shape}')
    return _canonical(sp.coo_matrix((values, (rows, cols)), shape=shape))


def check_csr(a: sp.csr_matrix):
    """
    Verify the CSR invariants.

    :raise ParameterError: when any invariant is violated.
    """
    if not sp.isspmatrix_csr(a):
        raise ParameterError(f'expected CSR matrix, got {type(a).__name__}')
    n_rows, n_cols = a.shape
    offsets = a.indptr
    if len(offsets) != n_rows + 1 or offsets[0] != 0:
        raise ParameterError('row offsets must have n_rows + 1 entries starting with 0')
    if np.any(np.diff(offsets) < 0):
        raise ParameterError('row offsets must be non-decreasing')
    if offsets[-1] != len(a.indices) or len(a.indices) != len(a.data):
        raise ParameterError('row offsets, column indices and values disagree in length')
    if len(a.indices) and (a.indices.min() < 0 or a.indices.max() >= n_cols):
        raise ParameterError('column index out of range')
    for row in range(n_rows):
        cols = a.indices[offsets[row]:offsets[row + 1]]
        if np.any(np.diff(cols) <= 0):
            raise ParameterError(f'column indices of row {row} are not strictly increasing')
    if np.any(a.data == 0):
        raise ParameterError('explicitly stored zero values')


def from_dense(x: np.ndarray) -> sp.csr_matrix:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ParameterError('dense input must be 2-dimensional')
    return _canonical(sp.csr_matrix(x))


def to_dense(a: sp.spmatrix) -> np.ndarray:
    return np.asarray(a.toarray(), dtype=np.float64)


def spmm(a: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
    """
    Sparse times dense product.

    :param a: sparse n×m matrix,
    :param b: dense m×d matrix,
    :return: dense n×d matrix; empty rows of `a` give zero rows.
    """
    if b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f'cannot multiply {a.shape[0]}×{a.shape[1]} by {"×".join(map(str, b.shape))}')
    return np.ascontiguousarray(a @ b, dtype=np.float64)


def transpose(a: sp.csr_matrix) -> sp.csr_matrix:
    """
    Transpose into a canonical CSR matrix. Values are only moved, so
    `transpose(transpose(a))` reproduces `a` bit for bit.
    """
    out = a.transpose().tocsr()
    out.sort_indices()
    return out


def nnz_degrees(a: sp.csr_matrix, axis: str = AXIS_ROWS) -> np.ndarray:
    """
    Count stored entries per row or per column.

    :param a: CSR matrix,
    :param axis: `rows` or `cols`,
    :return: integer count vector.
    """
    if axis == AXIS_ROWS:
        return np.diff(a.indptr).astype(np.int64)
    if axis == AXIS_COLS:
        return np.bincount(a.indices, minlength=a.shape[1]).astype(np.int64)
    raise ParameterError(f'axis must be {AXIS_ROWS!r} or {AXIS_COLS!r}, got {axis!r}')


def _row_of_entries(a: sp.csr_matrix) -> np.ndarray:
    return np.repeat(np.arange(a.shape[0], dtype=np.int64), np.diff(a.indptr))


def sym_normalize(a: sp.csr_matrix) -> sp.csr_matrix:
    """
    Symmetric degree normalization: entry (i, j) divided by
    sqrt(deg_i * deg_j), where deg is the row nonzero count. A stored
    entry always has nonzero degrees on both ends of a symmetric matrix.

    :param a: square CSR matrix,
    :return: normalized matrix with the sparsity pattern of `a`.
    """
    if a.shape[0] != a.shape[1]:
        raise ParameterError(f'symmetric normalization needs a square matrix, got {a.shape}')
    deg = nnz_degrees(a, AXIS_ROWS).astype(np.float64)
    rows = _row_of_entries(a)
    denom = np.sqrt(deg[rows] * deg[a.indices])
    if np.any(denom == 0):
        raise ParameterError('stored entry references a column whose row holds no entries')
    out = sp.csr_matrix((a.data / denom, a.indices.copy(), a.indptr.copy()), shape=a.shape)
    return out


def bipartite_normalize(r: sp.csr_matrix) -> sp.csr_matrix:
    """
    Normalize the user-item block of the bipartite adjacency: entry (u, i)
    becomes r[u, i] / sqrt(deg_u * deg_i), with deg_u the row and deg_i the
    column nonzero count. Equals the upper-right block of the symmetric
    normalization of [[0, R], [R^T, 0]].
    """
    deg_u = nnz_degrees(r, AXIS_ROWS).astype(np.float64)
    deg_i = nnz_degrees(r, AXIS_COLS).astype(np.float64)
    rows = _row_of_entries(r)
    values = r.data / np.sqrt(deg_u[rows] * deg_i[r.indices])
    return sp.csr_matrix((values, r.indices.copy(), r.indptr.copy()), shape=r.shape)
