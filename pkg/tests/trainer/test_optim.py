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

from socgcf.exceptions import ParameterError
from socgcf.model import EmbeddingState
from socgcf.optim import Adam, AdamState


def state(users, items):
    return EmbeddingState(np.array(users, dtype=np.float64), np.array(items, dtype=np.float64))


def test_first_step_moves_by_lr():
    params = state([[1.0, -1.0]], [[0.5, 0.0]])
    grad = state([[0.2, -3.0]], [[-0.01, 0.0]])
    adam = AdamState.zeros_like(params)
    out = Adam(lr=0.1).step(params, grad, adam)

    # bias-corrected first step is lr * g / (|g| + eps)
    np.testing.assert_allclose(out.e_users, [[0.9, -0.9]], rtol=1e-6)
    np.testing.assert_allclose(out.e_items, [[0.6, 0.0]], rtol=1e-6)
    assert adam.t == 1
    np.testing.assert_allclose(adam.m_users, 0.1 * grad.e_users)
    np.testing.assert_allclose(adam.v_users, 0.001 * grad.e_users ** 2)


def test_steps_follow_formula():
    rng = np.random.default_rng(0)
    params = state(rng.normal(size=(3, 2)), rng.normal(size=(4, 2)))
    adam = AdamState.zeros_like(params)
    optimizer = Adam(lr=0.01, beta1=0.8, beta2=0.95, eps=1e-6)

    theta, m, v = params.e_users.copy(), np.zeros((3, 2)), np.zeros((3, 2))
    for t in range(1, 4):
        grad = state(rng.normal(size=(3, 2)), rng.normal(size=(4, 2)))
        params = optimizer.step(params, grad, adam)
        m = 0.8 * m + 0.2 * grad.e_users
        v = 0.95 * v + 0.05 * grad.e_users ** 2
        theta = theta - 0.01 * (m / (1 - 0.8 ** t)) / (np.sqrt(v / (1 - 0.95 ** t)) + 1e-6)
    np.testing.assert_allclose(params.e_users, theta, rtol=1e-12)
    assert adam.t == 3


@pytest.mark.parametrize(
    'kwargs',
    [
        {'lr': 0.0},
        {'beta1': 1.0},
        {'beta2': -0.1},
    ]
)
def test_adam_validation(kwargs):
    with pytest.raises(ParameterError):
        Adam(**kwargs)
