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
Propagation operators built from a :class:`~socgcf.data.Dataset`:

 * `r_norm` / `r_norm_t` − the normalized user-item block of the bipartite
   adjacency and its transpose; the full (n+m)-square adjacency is never
   materialized,
 * `c_norm` − the user-correlation matrix: Jaccard index of every user pair's
   item sets, bucketed into typical values, then symmetrically normalized,
 * `s_norm` − the symmetrically normalized friendship matrix.

Only training interactions feed R and C.
"""

import logging
import os
from typing import List, Optional, Tuple

import attr
import numpy as np
import scipy.sparse as sp

from .constants import CLASSIFY_BOUNDS, CLASSIFY_VALUES, JACCARD_FLOOR
from .data import Dataset
from .exceptions import ParameterError
from .linalg import (
    AXIS_ROWS, bipartite_normalize, csr_from_triplets, nnz_degrees, sym_normalize, transpose,
)
from .stream import write_coo

logger = logging.getLogger(__name__)

__all__ = [
    'GraphInputs', 'build_R', 'build_interaction_operator', 'jaccard_pairs', 'classify_f', 'classify',
    'correlation_matrix', 'build_C', 'build_S', 'build_graph_inputs', 'operator_stats', 'write_operators',
]


@attr.s(frozen=True)
class GraphInputs:
    """
    The frozen operator triple plus channel-enable flags.
    """
    r_norm = attr.ib(type=sp.csr_matrix)
    r_norm_t = attr.ib(type=sp.csr_matrix)
    s_norm = attr.ib(type=Optional[sp.csr_matrix], default=None)
    c_norm = attr.ib(type=Optional[sp.csr_matrix], default=None)
    use_social = attr.ib(type=bool, default=False)
    use_correlation = attr.ib(type=bool, default=False)

    @r_norm_t.validator
    def _check_transpose(self, attribute, value):
        if value.shape != self.r_norm.shape[::-1]:
            raise ParameterError(f'r_norm_t has shape {value.shape}, expected {self.r_norm.shape[::-1]}')

    @property
    def n_users(self) -> int:
        return self.r_norm.shape[0]

    @property
    def n_items(self) -> int:
        return self.r_norm.shape[1]

    @property
    def social_active(self) -> bool:
        return self.use_social and self.s_norm is not None

    @property
    def correlation_active(self) -> bool:
        return self.use_correlation and self.c_norm is not None

    def with_channels(self, use_social: bool, use_correlation: bool) -> 'GraphInputs':
        return attr.evolve(self, use_social=use_social, use_correlation=use_correlation)


def build_R(d: Dataset) -> sp.csr_matrix:
    """
    Binary user-item matrix over the training interactions.
    """
    if not d.train:
        raise ParameterError('cannot build the interaction matrix from an empty train split')
    users, items = zip(*d.train)
    r = csr_from_triplets(users, items, 1.0, (d.n_users, d.n_items))
    # repeated pairs were summed by the builder
    r.data[:] = 1.0
    return r


def build_interaction_operator(r: sp.csr_matrix) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    r_norm = bipartite_normalize(r)
    return r_norm, transpose(r_norm)


def jaccard_pairs(r: sp.csr_matrix, floor: float = JACCARD_FLOOR) -> sp.csr_matrix:
    """
    Jaccard index |I_i ∩ I_j| / |I_i ∪ I_j| of every pair of distinct users
    sharing at least one item, keeping only values of at least `floor`.
    Co-occurrence counts come from the sparse product R·R^T, i.e. an
    accumulation over each item's user list; nothing n×n is dense.

    :param r: binary user-item matrix,
    :param floor: smallest stored value, in [0, 1),
    :return: symmetric n×n matrix with an empty diagonal.
    """
    if not 0 <= floor < 1:
        raise ParameterError(f'floor must lie in [0, 1), got {floor}')
    binary = r.copy()
    binary.data[:] = 1.0
    co = (binary @ binary.T).tocoo()
    off_diagonal = co.row != co.col
    rows, cols = co.row[off_diagonal], co.col[off_diagonal]
    intersection = np.rint(co.data[off_diagonal])

    deg = nnz_degrees(binary, AXIS_ROWS).astype(np.float64)
    union = deg[rows] + deg[cols] - intersection
    jac = intersection / union

    keep = jac >= floor
    return csr_from_triplets(rows[keep], cols[keep], jac[keep], (r.shape[0], r.shape[0]))


def classify_f(j: float) -> float:
    """
    Bucket a Jaccard index into its typical value:
    [0, 0.1) → 0.0, [0.1, 0.4) → 0.005, [0.4, 0.6) → 0.05,
    [0.6, 0.9) → 0.5, [0.9, 1.0] → 1.0.
    """
    if not 0.0 <= j <= 1.0:
        raise ParameterError(f'Jaccard index must lie in [0, 1], got {j}')
    return CLASSIFY_VALUES[int(np.searchsorted(CLASSIFY_BOUNDS, j, side='right'))]


def classify(values: np.ndarray) -> np.ndarray:
    """
    Vectorized :func:`classify_f`.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise ParameterError('Jaccard indices must lie in [0, 1]')
    return np.asarray(CLASSIFY_VALUES)[np.searchsorted(CLASSIFY_BOUNDS, values, side='right')]


def correlation_matrix(r: sp.csr_matrix, floor: float = JACCARD_FLOOR) -> sp.csr_matrix:
    """
    The bucketed, not yet normalized, user-correlation matrix C.
    """
    jac = jaccard_pairs(r, floor)
    c = jac.copy()
    c.data = classify(jac.data)
    c.eliminate_zeros()
    return c


def build_C(r: sp.csr_matrix, floor: float = JACCARD_FLOOR) -> sp.csr_matrix:
    c_norm = sym_normalize(correlation_matrix(r, floor))
    logger.info('correlation operator: %d stored entries', c_norm.nnz)
    return c_norm


def build_S(d: Dataset) -> Optional[sp.csr_matrix]:
    """
    Normalized binary friendship matrix, or None when there are no edges.
    """
    if not d.social_edges:
        return None
    a, b = (np.array(x, dtype=np.int64) for x in zip(*d.social_edges))
    rows = np.concatenate([a, b])
    cols = np.concatenate([b, a])
    s = csr_from_triplets(rows, cols, 1.0, (d.n_users, d.n_users))
    s.data[:] = 1.0
    s_norm = sym_normalize(s)
    logger.info('social operator: %d stored entries', s_norm.nnz)
    return s_norm


def build_graph_inputs(d: Dataset, use_social: bool = True, use_correlation: bool = True,
                       floor: float = JACCARD_FLOOR) -> GraphInputs:
    """
    Build every operator the requested channels need.

    :param d: dataset,
    :param use_social: enable the friendship channel,
    :param use_correlation: enable the user-correlation channel,
    :param floor: Jaccard sparsity floor,
    :return: frozen graph inputs.
    """
    r = build_R(d)
    r_norm, r_norm_t = build_interaction_operator(r)
    logger.info('interaction operator: %d×%d, %d stored entries', r.shape[0], r.shape[1], r.nnz)

    s_norm = build_S(d) if use_social else None
    if use_social and s_norm is None:
        logger.warning('social channel requested but the dataset has no social edges; disabling it')
        use_social = False
    c_norm = build_C(r, floor) if use_correlation else None

    return GraphInputs(
        r_norm=r_norm,
        r_norm_t=r_norm_t,
        s_norm=s_norm,
        c_norm=c_norm,
        use_social=use_social,
        use_correlation=use_correlation,
    )


def operator_stats(g: GraphInputs) -> List[Tuple[str, Tuple[int, int], int, float]]:
    """
    (name, shape, nnz, density) for every present operator.
    """
    stats = []
    for name, op in (('r_norm', g.r_norm), ('s_norm', g.s_norm), ('c_norm', g.c_norm)):
        if op is None:
            continue
        cells = op.shape[0] * op.shape[1]
        stats.append((name, op.shape, op.nnz, op.nnz / cells if cells else 0.0))
    return stats


def write_operators(g: GraphInputs, directory: str) -> List[str]:
    os.makedirs(directory, exist_ok=True)
    written = []
    for name, op in (('r_norm', g.r_norm), ('s_norm', g.s_norm), ('c_norm', g.c_norm)):
        if op is None:
            continue
        path = os.path.join(directory, f'{name}.coo')
        write_coo(op, path)
        written.append(path)
    return written
