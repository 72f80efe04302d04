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

import pytest

from socgcf.data import Dataset
from tests.util import write_raw_fixture


@pytest.fixture(autouse=True)
def run_datasets(request):
    if request.node.get_closest_marker('datasets'):
        if not request.config.getoption('--datasets'):
            pytest.skip('skipped dataset checks: --datasets is not passed')


@pytest.fixture
def toy_dataset():
    """
    4 users, 6 items, with test items for every user and two friendships.
    """
    return Dataset(
        n_users=4,
        n_items=6,
        train=[(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (1, 3), (2, 3), (2, 4), (3, 0), (3, 4), (3, 5)],
        test=[(0, 3), (1, 4), (2, 5), (3, 1)],
        social_edges=[(0, 1), (2, 3)],
        user_id_map={'alice': 0, 'bob': 1, 'carol': 2, 'dave': 3},
        item_id_map={f'i{i}': i for i in range(6)},
    )


@pytest.fixture
def raw_files(tmp_path):
    """
    Interaction and social files on which the whole pipeline runs quickly.
    """
    return write_raw_fixture(str(tmp_path))


@pytest.fixture
def thread_env(monkeypatch):
    def set_threads(value):
        if value is None:
            monkeypatch.delenv('SOCGCF_THREADS', raising=False)
        else:
            monkeypatch.setenv('SOCGCF_THREADS', str(value))
    return set_threads


def pytest_addoption(parser):
    parser.addoption(
        '--datasets',
        action='store',
        default=None,
        metavar='DIR',
        help='directory holding raw dataset files (e.g. epinions/ratings.txt and epinions/trust.txt)',
    )


def pytest_configure(config):
    marker_docs = [
        "datasets: mark test to run only if --datasets is set",
    ]

    for marker_doc in marker_docs:
        config.addinivalue_line("markers", marker_doc)
