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
import numpy as np
import pytest

import socgcf.checks as checks
from socgcf.checks import (
    check_classification, check_dense_oracle, check_gradients, check_lightgcn_reduction, check_metric_oracles,
    dense_normalized_adjacency, run_checks,
)
from socgcf.exceptions import CheckFailedError
from socgcf.linalg import spmm
from socgcf.model import propagate_layer


def flipped_social_layer(state, g, cfg):
    out = propagate_layer(state, g, cfg)
    if g.social_active:
        out.e_users -= 2 * cfg.w_s * spmm(g.s_norm, state.e_users)
    return out


def test_dense_adjacency_is_symmetric():
    r = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    a = dense_normalized_adjacency(r)
    np.testing.assert_array_equal(a, a.T)
    assert a[0, 2 + 2] == pytest.approx(1 / np.sqrt(2 * 2))
    assert a[0, 2 + 0] == pytest.approx(1 / np.sqrt(2 * 1))


def test_dense_oracle_passes():
    result = check_dense_oracle(n_graphs=24, seed=0)
    assert result.passed, result.to_line()
    assert result.value <= 1e-10


def test_dense_oracle_catches_sign_flip():
    result = check_dense_oracle(n_graphs=24, seed=0, layer_fn=flipped_social_layer)
    assert not result.passed
    assert result.to_line().startswith('FAIL dense-oracle propagation')


def test_gradient_check():
    result = check_gradients()
    assert result.passed, result.to_line()
    assert result.value < 1e-4


def test_lightgcn_reduction():
    result = check_lightgcn_reduction()
    assert result.passed, result.to_line()


def test_metric_oracles_and_classification():
    assert check_metric_oracles().passed
    assert check_classification().passed


def test_run_checks_strict(monkeypatch):
    results = run_checks(strict=True)
    assert [r.name for r in results] == [
        'dense-oracle propagation', 'finite-difference gradient', 'LightGCN reduction', 'metric oracles',
        'correlation buckets',
    ]

    monkeypatch.setattr(
        checks, 'check_dense_oracle',
        lambda seed=0: check_dense_oracle(n_graphs=24, seed=seed, layer_fn=flipped_social_layer),
    )
    with pytest.raises(CheckFailedError) as err:
        run_checks(strict=True)
    assert err.value.check_name == 'dense-oracle propagation'

