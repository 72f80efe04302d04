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
The filtering pipeline: a single item k-core pass, Jaccard-ranked user
selection against the surviving item universe, contiguous remapping,
a per-user temporal train/test split and the social graph rebuilt over the
selected users.
"""

import logging
import math
from collections import Counter, defaultdict
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from socgcf.constants import DEFAULT_K_CORE, DEFAULT_TEST_FRACTION
from socgcf.exceptions import DatasetError, ParameterError
from .dataset import Dataset, dataset_stats
from .raw import RawInteraction

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


def dedupe_interactions(raw: Iterable[RawInteraction]) -> List[RawInteraction]:
    """
    Collapse repeated (user, item) records into one, keeping the earliest
    timestamp. Records keep the order of their first appearance.
    """
    best: Dict[Tuple[str, str], RawInteraction] = {}
    for record in raw:
        key = (record.user_id, record.item_id)
        kept = best.get(key)
        if kept is None or record.timestamp < kept.timestamp:
            best[key] = record
    return list(best.values())


def kcore_filter_items(raw: Sequence[RawInteraction], k: int = DEFAULT_K_CORE) -> List[RawInteraction]:
    """
    Keep exactly the records whose item has at least `k` interactions in
    `raw`. Items are filtered once; degrees are not recomputed afterwards.

    :param raw: interaction records,
    :param k: minimum number of interactions per item,
    :return: surviving records in input order.
    """
    if k < 1:
        raise ParameterError(f'k must be at least 1, got {k}')
    counts = Counter(record.item_id for record in raw)
    kept = [record for record in raw if counts[record.item_id] >= k]
    if not kept:
        raise DatasetError(f'all {len(counts)} items have fewer than {k} interactions')
    logger.info(
        'item %d-core: kept %d of %d items, %d of %d records',
        k, sum(1 for c in counts.values() if c >= k), len(counts), len(kept), len(raw),
    )
    return kept


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def select_users_by_jaccard(filtered: Sequence[RawInteraction], ratio: float) -> Set[str]:
    """
    Keep the `round(|I| / ratio)` users whose item sets are closest, by
    Jaccard index, to the set `I` of all items present in `filtered`.
    Ties go to the lexicographically smaller user ID.

    :param filtered: records left by the item filter,
    :param ratio: items-per-user ratio,
    :return: selected original user IDs.
    """
    if not ratio > 0:
        raise ParameterError(f'ratio must be positive, got {ratio}')

    universe = {record.item_id for record in filtered}
    user_items: Dict[str, Set[str]] = defaultdict(set)
    for record in filtered:
        user_items[record.user_id].add(record.item_id)

    q = _round_half_up(len(universe) / ratio)
    if q < 1:
        raise DatasetError(f'{len(universe)} items at ratio {ratio} select no users')
    if q > len(user_items):
        logger.warning('ratio %s asks for %d users, only %d available; keeping all', ratio, q, len(user_items))
        return set(user_items)

    def similarity(items: Set[str]) -> float:
        return len(items & universe) / len(items | universe)

    ranked = sorted(user_items, key=lambda user: (-similarity(user_items[user]), user))
    selected = set(ranked[:q])
    logger.info('selected %d of %d users (%d items, ratio %s)', q, len(user_items), len(universe), ratio)
    return selected


def temporal_split(interactions: Iterable[Tuple[int, int, int]],
                   test_fraction: float = DEFAULT_TEST_FRACTION) -> Tuple[List[Pair], List[Pair]]:
    """
    Per-user temporal split: the latest `ceil(test_fraction * n_u)`
    interactions of each user go to test, the rest to train. Users with
    fewer than two interactions keep everything in train; every other user
    keeps at least one training interaction. Timestamp ties are ordered by
    item index.

    :param interactions: (user_idx, item_idx, timestamp) triples,
    :param test_fraction: share of each user's interactions held out,
    :return: sorted (train, test) pair lists.
    """
    if not 0 < test_fraction < 1:
        raise ParameterError(f'test_fraction must lie in (0, 1), got {test_fraction}')

    by_user: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    for user, item, timestamp in interactions:
        by_user[user].append((timestamp, item))

    train, test = [], []
    for user, records in by_user.items():
        records.sort()
        n_u = len(records)
        n_test = 0
        if n_u >= 2:
            # rounding first keeps e.g. 0.2 * 15 at 3
            n_test = min(math.ceil(round(test_fraction * n_u, 9)), n_u - 1)
        cut = n_u - n_test
        train.extend((user, item) for _, item in records[:cut])
        test.extend((user, item) for _, item in records[cut:])

    return sorted(train), sorted(test)


def rebuild_social(raw_edges: Iterable[Tuple[str, str]], surviving_users: Mapping[str, int]) -> List[Pair]:
    """
    Rebuild the undirected friendship graph over the surviving users.

    :param raw_edges: (user_id, user_id) pairs, direction ignored,
    :param surviving_users: original user ID → contiguous index,
    :return: sorted (a, b) index pairs with a < b, without duplicates.
    """
    edges = set()
    for a, b in raw_edges:
        if a == b or a not in surviving_users or b not in surviving_users:
            continue
        ia, ib = surviving_users[a], surviving_users[b]
        edges.add((min(ia, ib), max(ia, ib)))
    return sorted(edges)


def preprocess(raw: Sequence[RawInteraction], raw_edges: Optional[Iterable[Tuple[str, str]]] = None,
               k: int = DEFAULT_K_CORE, ratio: float = None,
               test_fraction: float = DEFAULT_TEST_FRACTION) -> Dataset:
    """
    Run the whole pipeline from raw records to a :class:`Dataset`.

    Items are indexed in lexicographic order of their original IDs over
    every item that survived the k-core pass; users likewise over the
    selected users.

    :param raw: raw interaction records,
    :param raw_edges: raw social pairs, optional,
    :param k: item k-core threshold,
    :param ratio: items-per-user ratio for user selection,
    :param test_fraction: per-user share of test interactions,
    :return: the dataset.
    """
    if ratio is None:
        raise ParameterError('ratio is required (give it explicitly or via a known dataset name)')

    records = dedupe_interactions(raw)
    if len(records) < len(raw):
        logger.info('collapsed %d duplicate interactions', len(raw) - len(records))
    filtered = kcore_filter_items(records, k)
    users = select_users_by_jaccard(filtered, ratio)

    item_ids = sorted({record.item_id for record in filtered})
    user_ids = sorted(users)
    item_id_map = {item: idx for idx, item in enumerate(item_ids)}
    user_id_map = {user: idx for idx, user in enumerate(user_ids)}

    triples = [
        (user_id_map[record.user_id], item_id_map[record.item_id], record.timestamp)
        for record in filtered if record.user_id in users
    ]
    train, test = temporal_split(triples, test_fraction)
    social = rebuild_social(raw_edges or (), user_id_map)

    d = Dataset(
        n_users=len(user_ids),
        n_items=len(item_ids),
        train=train,
        test=test,
        social_edges=social,
        user_id_map=user_id_map,
        item_id_map=item_id_map,
    )
    logger.info('preprocessed dataset: %s', dataset_stats(d).to_line())
    return d
