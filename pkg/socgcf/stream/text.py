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
Plain-text persistence: the COO matrix format (`rows cols nnz` header,
then one `i j v` line per stored entry) and index-pair lists.
"""

import os
from typing import Iterable, List, Tuple

import numpy as np
import scipy.sparse as sp

from socgcf.constants import TEXT_ENCODING
from socgcf.exceptions import ParseError
from socgcf.linalg import csr_from_triplets


def write_coo(a: sp.csr_matrix, path: str):
    """
    Write a sparse matrix in the text COO format. Values are written as the
    shortest decimal that round-trips to the same 64-bit float.

    :param a: canonical CSR matrix,
    :param path: destination file.
    """
    coo = a.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, 'w', encoding=TEXT_ENCODING, newline='\n') as f:
        f.write(f'{a.shape[0]} {a.shape[1]} {coo.nnz}\n')
        for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            f.write(f'{int(i)} {int(j)} {float(v)!r}\n')


def read_coo(path: str) -> sp.csr_matrix:
    """
    Read a sparse matrix from the text COO format.

    :param path: source file,
    :return: canonical CSR matrix.
    """
    try:
        with open(path, 'r', encoding=TEXT_ENCODING) as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise ParseError(f'cannot read {path}: {e}') from e

    if not lines:
        raise ParseError(f'{path}: missing header line')
    try:
        n_rows, n_cols, nnz = (int(x) for x in lines[0].split())
    except ValueError:
        raise ParseError(f'{path}:1: header must be "rows cols nnz", got {lines[0]!r}')

    body = [line for line in lines[1:] if line.strip()]
    if len(body) != nnz:
        raise ParseError(f'{path}: header announces {nnz} entries, file holds {len(body)}')

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    values = np.empty(nnz, dtype=np.float64)
    for pos, line in enumerate(body):
        parts = line.split()
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except (ValueError, IndexError):
            raise ParseError(f'{path}:{pos + 2}: expected "i j v", got {line!r}')
        if not (0 <= i < n_rows and 0 <= j < n_cols):
            raise ParseError(f'{path}:{pos + 2}: index ({i}, {j}) outside {n_rows}×{n_cols}')
        rows[pos], cols[pos], values[pos] = i, j, v

    return csr_from_triplets(rows, cols, values, (n_rows, n_cols))


def write_pairs(pairs: Iterable[Tuple[int, int]], path: str):
    with open(path, 'w', encoding=TEXT_ENCODING, newline='\n') as f:
        for a, b in pairs:
            f.write(f'{a} {b}\n')


def read_pairs(path: str) -> List[Tuple[int, int]]:
    if not os.path.exists(path):
        raise ParseError(f'{path} does not exist')
    pairs = []
    with open(path, 'r', encoding=TEXT_ENCODING) as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                a, b = line.split()
                pairs.append((int(a), int(b)))
            except ValueError:
                raise ParseError(f'{path}:{line_no}: expected "a b", got {line.rstrip()!r}')
    return pairs
