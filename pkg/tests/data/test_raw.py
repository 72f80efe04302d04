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

from socgcf.data import FORMAT_ADJACENCY, RawInteraction, load_interactions, load_social_edges
from socgcf.exceptions import DatasetError, ParameterError
from tests.util import N_RAW_USERS


def write(path, text):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)
    return str(path)


def test_load_canonical(raw_files, caplog):
    with caplog.at_level(logging.WARNING):
        records = load_interactions(raw_files['interactions'])
    assert len(records) == N_RAW_USERS * 5 + 3
    assert records[0] == RawInteraction('u00', 'i0', 1000, 4.0)
    assert records[-1] == RawInteraction('u00', 'i0', 9999)
    assert 'ratings.txt:66' in caplog.text


def test_load_adjacency(tmp_path):
    path = write(tmp_path / 'adj.txt', 'u1 a b c\nu2 c\nu3\n')
    records = load_interactions(path, FORMAT_ADJACENCY)
    assert [(r.user_id, r.item_id, r.timestamp) for r in records] == [
        ('u1', 'a', 0), ('u1', 'b', 1), ('u1', 'c', 2), ('u2', 'c', 0),
    ]


def test_zero_valid_records(tmp_path):
    path = write(tmp_path / 'bad.txt', '# only comments\nnot a record at all\n')
    with pytest.raises(DatasetError, match='zero valid records'):
        load_interactions(path)


def test_unreadable_file(tmp_path):
    with pytest.raises(DatasetError):
        load_interactions(str(tmp_path / 'missing.txt'))


def test_unknown_format(raw_files):
    with pytest.raises(ParameterError):
        load_interactions(raw_files['interactions'], 'json')


def test_load_social_edges(raw_files, caplog):
    with caplog.at_level(logging.WARNING):
        edges = load_social_edges(raw_files['social'])
    assert edges[0] == ('u00', 'u01')
    assert ('u05', 'u05') in edges
    assert len(edges) == N_RAW_USERS // 2 + 3
    assert 'expected "u v"' in caplog.text
