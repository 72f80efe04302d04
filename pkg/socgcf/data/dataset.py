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

import json
import logging
import os
from typing import Dict, List, Tuple

import attr
import numpy as np

from socgcf.constants import TEXT_ENCODING
from socgcf.exceptions import DatasetError, ParseError
from socgcf.stream import read_pairs, write_pairs

logger = logging.getLogger(__name__)

TRAIN_FILE = 'train.txt'
TEST_FILE = 'test.txt'
SOCIAL_FILE = 'social.txt'
MAPS_FILE = 'maps.json'
STATS_FILE = 'stats.txt'

Pair = Tuple[int, int]


def _as_pairs(value) -> Tuple[Pair, ...]:
    return tuple((int(a), int(b)) for a, b in value)


@attr.s(frozen=True)
class Dataset:
    """
    Remapped user/item universe with train/test interaction splits and
    undirected social edges (stored once, smaller index first).
    """
    n_users = attr.ib(type=int)
    n_items = attr.ib(type=int)
    train = attr.ib(type=tuple, converter=_as_pairs)
    test = attr.ib(type=tuple, converter=_as_pairs)
    social_edges = attr.ib(type=tuple, converter=_as_pairs, factory=tuple)
    user_id_map = attr.ib(type=dict, factory=dict)
    item_id_map = attr.ib(type=dict, factory=dict)

    def validate(self):
        """
        Check index ranges, train/test disjointness and social edge shape.

        :raise DatasetError: on the first violated invariant.
        """
        for name, pairs in (('train', self.train), ('test', self.test)):
            for u, i in pairs:
                if not (0 <= u < self.n_users and 0 <= i < self.n_items):
                    raise DatasetError(f'{name} pair ({u}, {i}) out of range')
            if len(set(pairs)) != len(pairs):
                raise DatasetError(f'{name} holds duplicate pairs')
        if set(self.train) & set(self.test):
            raise DatasetError('train and test overlap')
        seen = set()
        for a, b in self.social_edges:
            if a == b:
                raise DatasetError(f'social self-loop on user {a}')
            if not (0 <= a < self.n_users and 0 <= b < self.n_users):
                raise DatasetError(f'social edge ({a}, {b}) out of range')
            key = (min(a, b), max(a, b))
            if key in seen:
                raise DatasetError(f'duplicate social edge {key}')
            seen.add(key)

    def items_by_user(self, split: str = 'train') -> List[np.ndarray]:
        """
        Sorted item indices per user for the `train` or `test` split.
        """
        pairs = self.train if split == 'train' else self.test
        buckets = [[] for _ in range(self.n_users)]
        for u, i in pairs:
            buckets[u].append(i)
        return [np.array(sorted(items), dtype=np.int64) for items in buckets]


@attr.s(frozen=True)
class DatasetStats:
    n_users = attr.ib(type=int)
    n_items = attr.ib(type=int)
    n_edges = attr.ib(type=int)
    #: directed count, i.e. twice the number of undirected friendships
    n_social = attr.ib(type=int)

    def to_line(self) -> str:
        return f'n_users={self.n_users} n_items={self.n_items} n_edges={self.n_edges} n_social={self.n_social}'


def dataset_stats(d: Dataset) -> DatasetStats:
    return DatasetStats(
        n_users=d.n_users,
        n_items=d.n_items,
        n_edges=len(d.train) + len(d.test),
        n_social=2 * len(d.social_edges),
    )


def save_dataset(d: Dataset, directory: str) -> DatasetStats:
    """
    Write the dataset as text files. Pairs are sorted and maps are written
    with sorted keys, so equal datasets give identical bytes.

    :param d: dataset,
    :param directory: destination directory, created if missing,
    :return: the dataset statistics written to `stats.txt`.
    """
    os.makedirs(directory, exist_ok=True)
    write_pairs(sorted(d.train), os.path.join(directory, TRAIN_FILE))
    write_pairs(sorted(d.test), os.path.join(directory, TEST_FILE))
    write_pairs(sorted(d.social_edges), os.path.join(directory, SOCIAL_FILE))

    maps = {'users': d.user_id_map, 'items': d.item_id_map}
    with open(os.path.join(directory, MAPS_FILE), 'w', encoding=TEXT_ENCODING, newline='\n') as f:
        json.dump(maps, f, sort_keys=True, indent=1)
        f.write('\n')

    stats = dataset_stats(d)
    with open(os.path.join(directory, STATS_FILE), 'w', encoding=TEXT_ENCODING, newline='\n') as f:
        f.write(stats.to_line() + '\n')
    return stats


def load_dataset(directory: str) -> Dataset:
    """
    Load a dataset written by :func:`save_dataset`.

    :raise DatasetError: when files are missing or the content is inconsistent.
    """
    maps_path = os.path.join(directory, MAPS_FILE)
    try:
        with open(maps_path, 'r', encoding=TEXT_ENCODING) as f:
            maps: Dict[str, Dict[str, int]] = json.load(f)
        train = read_pairs(os.path.join(directory, TRAIN_FILE))
        test = read_pairs(os.path.join(directory, TEST_FILE))
        social = read_pairs(os.path.join(directory, SOCIAL_FILE))
    except (OSError, ValueError, ParseError) as e:
        raise DatasetError(f'cannot load dataset from {directory}: {e}') from e

    d = Dataset(
        n_users=len(maps['users']),
        n_items=len(maps['items']),
        train=train,
        test=test,
        social_edges=social,
        user_id_map=maps['users'],
        item_id_map=maps['items'],
    )
    d.validate()
    logger.info('loaded dataset from %s: %s', directory, dataset_stats(d).to_line())
    return d
