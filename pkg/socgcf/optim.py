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
Adam with bias correction over the two embedding blocks.
"""

import attr
import numpy as np

from .exceptions import ParameterError
from .model import EmbeddingState


@attr.s
class AdamState:
    m_users = attr.ib(type=np.ndarray)
    v_users = attr.ib(type=np.ndarray)
    m_items = attr.ib(type=np.ndarray)
    v_items = attr.ib(type=np.ndarray)
    t = attr.ib(type=int, default=0)

    @classmethod
    def zeros_like(cls, state: EmbeddingState) -> 'AdamState':
        return cls(
            m_users=np.zeros_like(state.e_users),
            v_users=np.zeros_like(state.e_users),
            m_items=np.zeros_like(state.e_items),
            v_items=np.zeros_like(state.e_items),
        )


class Adam:
    """
    Adaptive moment estimation:

     * m ← β1·m + (1 − β1)·g,
     * v ← β2·v + (1 − β2)·g²,
     * θ ← θ − lr·m̂ / (√v̂ + ε), with m̂ = m / (1 − β1ᵗ), v̂ = v / (1 − β2ᵗ).
    """
    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if not lr > 0:
            raise ParameterError(f'learning rate must be positive, got {lr}')
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise ParameterError(f'Adam betas must lie in [0, 1), got {beta1}, {beta2}')
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps

    def _update(self, param: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray, t: int) -> np.ndarray:
        m *= self.beta1
        m += (1 - self.beta1) * grad
        v *= self.beta2
        v += (1 - self.beta2) * grad ** 2
        m_hat = m / (1 - self.beta1 ** t)
        v_hat = v / (1 - self.beta2 ** t)
        return param - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def step(self, state: EmbeddingState, grad: EmbeddingState, adam: AdamState) -> EmbeddingState:
        """
        Apply one update. The moments in `adam` are advanced in place; the
        parameters are returned as a new state.
        """
        adam.t += 1
        e_users = self._update(state.e_users, grad.e_users, adam.m_users, adam.v_users, adam.t)
        e_items = self._update(state.e_items, grad.e_items, adam.m_items, adam.v_items, adam.t)
        return EmbeddingState(e_users, e_items)
