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
import logging

import pytest

from socgcf.data import (
    RawInteraction, dedupe_interactions, kcore_filter_items, load_interactions, load_social_edges, preprocess,
    rebuild_social, select_users_by_jaccard, temporal_split,
)
from socgcf.exceptions import DatasetError, ParameterError
from tests.util import CORE_ITEMS, RARE_ITEM


def records(*triples):
    return [RawInteraction(u, i, t) for u, i, t in triples]


def test_dedupe_keeps_earliest():
    raw = records(('a', 'x', 5), ('b', 'x', 1), ('a', 'x', 2), ('a', 'y', 3), ('a', 'x', 2))
    out = dedupe_interactions(raw)
    assert [(r.user_id, r.item_id, r.timestamp) for r in out] == [('a', 'x', 2), ('b', 'x', 1), ('a', 'y', 3)]


def test_kcore_single_pass():
    raw = records(('a', 'x', 0), ('b', 'x', 0), ('c', 'x', 0), ('a', 'y', 0), ('b', 'y', 0), ('c', 'z', 0))
    kept = kcore_filter_items(raw, 2)
    assert sorted({r.item_id for r in kept}) == ['x', 'y']
    assert len(kept) == 5


def test_kcore_everything_filtered():
    with pytest.raises(DatasetError):
        kcore_filter_items(records(('a', 'x', 0)), 2)
    with pytest.raises(ParameterError):
        kcore_filter_items(records(('a', 'x', 0)), 0)


def test_select_users_by_jaccard():
    # universe {x, y, z}
    raw = records(
        ('d', 'x', 0), ('d', 'y', 0), ('d', 'z', 0),
        ('c', 'x', 0), ('c', 'y', 0),
        ('b', 'x', 0), ('b', 'z', 0),
        ('a', 'z', 0),
    )
    assert select_users_by_jaccard(raw, 1.0) == {'d', 'b', 'c'}
    assert select_users_by_jaccard(raw, 3.0) == {'d'}
    # round(3 / 1.2) = round(2.5) = 3 with halves going up
    assert select_users_by_jaccard(raw, 1.2) == {'d', 'b', 'c'}


def test_select_users_more_than_available(caplog):
    raw = records(('a', 'x', 0), ('a', 'y', 0), ('b', 'y', 0))
    with caplog.at_level(logging.WARNING):
        assert select_users_by_jaccard(raw, 0.1) == {'a', 'b'}
    assert 'only 2 available' in caplog.text


def test_select_users_none_selected():
    with pytest.raises(DatasetError):
        select_users_by_jaccard(records(('a', 'x', 0)), 5.0)


@pytest.mark.parametrize(
    'n_u, n_test',
    [
        (1, 0),
        (2, 1),
        (5, 1),
        (6, 2),
        (10, 2),
        (15, 3),
    ]
)
def test_temporal_split_sizes(n_u, n_test):
    triples = [(0, i, 100 - i) for i in range(n_u)]
    train, test = temporal_split(triples, 0.2)
    assert len(test) == n_test
    assert len(train) == n_u - n_test
    # latest timestamps belong to the smallest item indices here
    assert sorted(i for _, i in test) == list(range(n_test))


@pytest.mark.parametrize(
    'test_fraction, n_u, n_test',
    [
        (0.9, 2, 1),
        (0.9, 3, 2),
        (0.5, 2, 1),
        (0.9, 1, 0),
        (0.9, 20, 18),
    ]
)
def test_temporal_split_keeps_one_train_interaction(test_fraction, n_u, n_test):
    triples = [(0, i, i) for i in range(n_u)]
    train, test = temporal_split(triples, test_fraction)
    assert len(test) == n_test
    assert train[0] == (0, 0)


def test_temporal_split_orders_by_time():
    triples = [(0, 0, 30), (0, 1, 10), (0, 2, 20), (0, 3, 40), (0, 4, 50), (1, 0, 5), (1, 1, 5)]
    train, test = temporal_split(triples, 0.4)
    assert test == [(0, 3), (0, 4), (1, 1)]
    assert train == [(0, 0), (0, 1), (0, 2), (1, 0)]
    assert not set(train) & set(test)


def test_temporal_split_bad_fraction():
    with pytest.raises(ParameterError):
        temporal_split([], 1.0)


def test_rebuild_social():
    users = {'a': 0, 'b': 1, 'c': 2}
    edges = [('a', 'b'), ('b', 'a'), ('c', 'a'), ('c', 'c'), ('a', 'zed')]
    assert rebuild_social(edges, users) == [(0, 1), (0, 2)]


def test_preprocess_pipeline(raw_files):
    raw = load_interactions(raw_files['interactions'])
    d = preprocess(raw, load_social_edges(raw_files['social']), k=3, ratio=1.0, test_fraction=0.2)
    d.validate()

    assert d.n_items == len(CORE_ITEMS)
    assert RARE_ITEM not in d.item_id_map
    assert sorted(d.item_id_map) == CORE_ITEMS
    assert d.user_id_map == {f'u{u:02d}': u for u in range(8)}
    assert len(d.train) == 8 * 4
    assert len(d.test) == 8
    assert d.social_edges == ((0, 1), (2, 3), (4, 5), (6, 7))

    # each user's latest interaction is its test record
    for u in range(8):
        latest = d.item_id_map[CORE_ITEMS[(u + 4) % len(CORE_ITEMS)]]
        assert (u, latest) in d.test


def test_preprocess_duplicate_takes_earliest(raw_files):
    raw = load_interactions(raw_files['interactions'])
    d = preprocess(raw, None, k=3, ratio=1.0)
    # u00 saw i0 at 1000 and again at 9999; the early one stays in train
    assert (0, d.item_id_map['i0']) in d.train
    assert d.social_edges == ()


def test_preprocess_needs_ratio(raw_files):
    with pytest.raises(ParameterError):
        preprocess(load_interactions(raw_files['interactions']), k=3)


def test_preprocess_is_deterministic(raw_files):
    raw = load_interactions(raw_files['interactions'])
    edges = load_social_edges(raw_files['social'])
    assert preprocess(raw, edges, k=3, ratio=1.0) == preprocess(list(reversed(raw)), edges, k=3, ratio=1.0)
