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
import os

import numpy as np

from socgcf.linalg import csr_from_triplets

N_RAW_USERS = 12
CORE_ITEMS = [f'i{i}' for i in range(8)]
RARE_ITEM = 'rare'


def write_raw_fixture(directory: str) -> dict:
    """
    Write a small raw dataset: 12 users, each holding 5 of 8 core items
    at increasing timestamps, plus one rare item (2 interactions) and a
    few lines the readers must skip or reject.

    :return: {'interactions': path, 'social': path}.
    """
    interactions = os.path.join(directory, 'ratings.txt')
    social = os.path.join(directory, 'trust.txt')
    with open(interactions, 'w', encoding='utf-8') as f:
        f.write('# user item timestamp rating\n')
        for u in range(N_RAW_USERS):
            for t in range(5):
                item = CORE_ITEMS[(u + t) % len(CORE_ITEMS)]
                f.write(f'u{u:02d} {item} {1000 + 10 * u + t} 4\n')
        f.write(f'u00 {RARE_ITEM} 5000\n')
        f.write(f'u01 {RARE_ITEM} 5001\n')
        # repeated interaction, later timestamp
        f.write('u00 i0 9999\n')
        f.write('\n')
        f.write('this line is broken\n')
    with open(social, 'w', encoding='utf-8') as f:
        for u in range(0, N_RAW_USERS, 2):
            f.write(f'u{u:02d} u{u + 1:02d} 1\n')
        f.write('u03 u02\n')
        f.write('u05 u05\n')
        f.write('u01 stranger\n')
        f.write('lonely\n')
    return {'interactions': interactions, 'social': social}


def random_csr(rng: np.random.Generator, shape, density: float = 0.3, symmetric: bool = False):
    mask = rng.random(shape) < density
    if symmetric:
        mask = np.triu(mask, 1)
        mask = mask | mask.T
    rows, cols = np.nonzero(mask)
    return csr_from_triplets(rows, cols, rng.uniform(0.5, 2.0, size=len(rows)), shape)


def dense_sym_normalize(x: np.ndarray) -> np.ndarray:
    deg = np.count_nonzero(x, axis=1).astype(np.float64)
    out = np.zeros_like(x, dtype=np.float64)
    for i, j in zip(*np.nonzero(x)):
        out[i, j] = x[i, j] / np.sqrt(deg[i] * deg[j])
    return out


def dense_jaccard(r: np.ndarray) -> np.ndarray:
    n = r.shape[0]
    sets = [set(np.flatnonzero(row)) for row in r]
    out = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            if a != b and sets[a] | sets[b]:
                out[a, b] = len(sets[a] & sets[b]) / len(sets[a] | sets[b])
    return out


def write_config(path: str, **values) -> str:
    with open(path, 'w', encoding='utf-8') as f:
        for key, value in values.items():
            f.write(f'{key} = {value}\n')
    return path
