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
import os

import numpy as np
import pytest

from socgcf.data import Dataset
from socgcf.exceptions import ParameterError
from socgcf.graph import (
    GraphInputs, build_C, build_R, build_S, build_graph_inputs, classify, classify_f, correlation_matrix,
    jaccard_pairs, operator_stats, write_operators,
)
from socgcf.linalg import check_csr, to_dense, transpose
from socgcf.stream import read_coo
from tests.util import dense_jaccard, dense_sym_normalize


@pytest.mark.parametrize(
    'j, expected',
    [
        (0.0, 0.0),
        (0.0999, 0.0),
        (0.1, 0.005),
        (0.3999, 0.005),
        (0.4, 0.05),
        (0.5999, 0.05),
        (0.6, 0.5),
        (0.8999, 0.5),
        (0.9, 1.0),
        (1.0, 1.0),
    ]
)
def test_classify_f(j, expected):
    assert classify_f(j) == expected


@pytest.mark.parametrize('j', [-0.01, 1.01, float('nan')])
def test_classify_f_out_of_range(j):
    with pytest.raises(ParameterError):
        classify_f(j)


def test_classify_vectorized():
    values = np.array([0.05, 0.2, 0.45, 0.7, 0.95])
    np.testing.assert_array_equal(classify(values), [classify_f(v) for v in values])


def test_build_R_is_binary(toy_dataset):
    r = build_R(toy_dataset)
    check_csr(r)
    assert r.shape == (4, 6)
    assert r.nnz == len(toy_dataset.train)
    assert set(r.data) == {1.0}
    # test interactions stay out of the graph
    assert r[0, 3] == 0.0


def test_jaccard_matches_dense_oracle():
    rng = np.random.default_rng(6)
    dense = (rng.random((9, 12)) < 0.35).astype(np.float64)
    r = build_R(Dataset(n_users=9, n_items=12, train=list(zip(*np.nonzero(dense))), test=[]))
    expected = dense_jaccard(dense)
    expected[expected < 0.1] = 0.0
    np.testing.assert_allclose(to_dense(jaccard_pairs(r)), expected, rtol=0, atol=1e-15)


def test_correlation_matrix(toy_dataset):
    c = to_dense(correlation_matrix(build_R(toy_dataset)))
    # users 0 and 1 share {1, 2} of {0, 1, 2, 3}: J = 0.5
    assert c[0, 1] == 0.05
    # users 0 and 3 share {0} of {0, 1, 2, 4, 5}: J = 0.2
    assert c[0, 3] == 0.005
    # users 0 and 2 share nothing
    assert c[0, 2] == 0.0
    np.testing.assert_array_equal(c, c.T)
    np.testing.assert_array_equal(np.diag(c), np.zeros(4))


def test_build_C_is_normalized(toy_dataset):
    r = build_R(toy_dataset)
    c_norm = build_C(r)
    check_csr(c_norm)
    expected = dense_sym_normalize(to_dense(correlation_matrix(r)))
    np.testing.assert_allclose(to_dense(c_norm), expected, rtol=0, atol=1e-15)


def test_build_S(toy_dataset):
    s = to_dense(build_S(toy_dataset))
    expected = np.zeros((4, 4))
    expected[0, 1] = expected[1, 0] = expected[2, 3] = expected[3, 2] = 1.0
    np.testing.assert_array_equal(s, expected)


def test_build_S_without_edges(toy_dataset):
    d = Dataset(n_users=4, n_items=6, train=toy_dataset.train, test=[])
    assert build_S(d) is None


def test_graph_inputs(toy_dataset):
    g = build_graph_inputs(toy_dataset)
    assert (g.n_users, g.n_items) == (4, 6)
    assert g.social_active and g.correlation_active
    np.testing.assert_array_equal(to_dense(g.r_norm_t), to_dense(g.r_norm).T)

    off = g.with_channels(False, False)
    assert not off.social_active and not off.correlation_active
    assert off.r_norm is g.r_norm


def test_graph_inputs_social_forced_off(toy_dataset, caplog):
    d = Dataset(n_users=4, n_items=6, train=toy_dataset.train, test=[])
    with caplog.at_level(logging.WARNING):
        g = build_graph_inputs(d, use_social=True, use_correlation=False)
    assert not g.use_social
    assert g.s_norm is None
    assert 'no social edges' in caplog.text


def test_graph_inputs_transpose_checked(toy_dataset):
    g = build_graph_inputs(toy_dataset)
    with pytest.raises(ParameterError):
        GraphInputs(r_norm=g.r_norm, r_norm_t=g.r_norm)
    GraphInputs(r_norm=g.r_norm, r_norm_t=transpose(g.r_norm))


def test_operator_stats_and_files(tmp_path, toy_dataset):
    g = build_graph_inputs(toy_dataset, use_social=False)
    stats = operator_stats(g)
    assert [name for name, *_ in stats] == ['r_norm', 'c_norm']
    name, shape, nnz, density = stats[0]
    assert shape == (4, 6)
    assert nnz == 11
    assert density == pytest.approx(11 / 24)

    written = write_operators(g, str(tmp_path / 'graph'))
    assert [os.path.basename(p) for p in written] == ['r_norm.coo', 'c_norm.coo']
    np.testing.assert_array_equal(to_dense(read_coo(written[0])), to_dense(g.r_norm))
