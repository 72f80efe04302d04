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
Linear three-signal propagation.

Per layer, users gather from items through the normalized interaction
block, and from other users through the correlation and social
operators; items gather from users:

    E_U' = w_a·R̃·E_I + w_c·C̃·E_U + w_s·S̃·E_U
    E_I' = R̃ᵀ·E_U

There are no transformation matrices and no activations. The final
embeddings are the mean over all K+1 layer snapshots (layer 0 included),
and the initial embeddings are the only trainable parameters.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import attr
import numpy as np

from .constants import DEFAULT_EMBED_DIM, DEFAULT_N_LAYERS, INIT_STD
from .exceptions import DimensionError, ParameterError
from .graph import GraphInputs
from .linalg import spmm
from .utils import make_rng

logger = logging.getLogger(__name__)

__all__ = [
    'ModelConfig', 'EmbeddingState', 'ForwardTrace', 'init_embeddings', 'propagate_layer', 'forward',
    'final_embeddings', 'backward', 'score', 'score_all_items', 'score_matrix',
]


def _at_least(minimum: int):
    def validator(_, attrib, value):
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < minimum:
            raise ParameterError(f"'{attrib.name}' must be an integer >= {minimum}, got {value!r}")
    return validator


def _weights(_, attrib, value):
    if len(value) != 3 or not all(np.isfinite(w) and w >= 0 for w in value):
        raise ParameterError(f"'{attrib.name}' must be three finite non-negative reals, got {value!r}")


@attr.s(frozen=True)
class ModelConfig:
    #: embedding size d
    embed_dim = attr.ib(kw_only=True, default=DEFAULT_EMBED_DIM, validator=_at_least(1))
    #: number of propagation layers K
    n_layers = attr.ib(kw_only=True, default=DEFAULT_N_LAYERS, validator=_at_least(0))
    #: (w_a, w_c, w_s): interaction, correlation and social weights
    agg_weights = attr.ib(
        kw_only=True, default=(1.0, 1.0, 1.0),
        converter=lambda ws: tuple(float(w) for w in ws), validator=_weights,
    )
    seed = attr.ib(kw_only=True, default=0, converter=int)

    @property
    def w_a(self) -> float:
        return self.agg_weights[0]

    @property
    def w_c(self) -> float:
        return self.agg_weights[1]

    @property
    def w_s(self) -> float:
        return self.agg_weights[2]


@attr.s
class EmbeddingState:
    e_users = attr.ib(type=np.ndarray)
    e_items = attr.ib(type=np.ndarray)

    @property
    def n_users(self) -> int:
        return self.e_users.shape[0]

    @property
    def n_items(self) -> int:
        return self.e_items.shape[0]

    @property
    def embed_dim(self) -> int:
        return self.e_users.shape[1]

    def copy(self) -> 'EmbeddingState':
        return EmbeddingState(self.e_users.copy(), self.e_items.copy())

    def scaled(self, alpha: float) -> 'EmbeddingState':
        return EmbeddingState(alpha * self.e_users, alpha * self.e_items)

    def __add__(self, other: 'EmbeddingState') -> 'EmbeddingState':
        return EmbeddingState(self.e_users + other.e_users, self.e_items + other.e_items)

    def norm_sq(self) -> float:
        return float(np.sum(self.e_users ** 2) + np.sum(self.e_items ** 2))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.e_users)) and np.all(np.isfinite(self.e_items)))

    def equals(self, other: 'EmbeddingState') -> bool:
        return np.array_equal(self.e_users, other.e_users) and np.array_equal(self.e_items, other.e_items)


@attr.s
class ForwardTrace:
    #: K+1 snapshots, `layers[0]` is the input state
    layers = attr.ib(type=List[EmbeddingState])
    #: layerwise mean
    final = attr.ib(type=EmbeddingState)


def init_embeddings(n: int, m: int, cfg: ModelConfig, rng: Optional[np.random.Generator] = None) -> EmbeddingState:
    """
    Draw the initial embeddings i.i.d. from N(0, 0.1²), user block first.

    :param n: number of users,
    :param m: number of items,
    :param cfg: model configuration (embedding size and seed),
    :param rng: generator to draw from; seeded from `cfg.seed` when omitted,
    :return: embedding state.
    """
    rng = rng if rng is not None else make_rng(cfg.seed)
    e_users = rng.normal(0.0, INIT_STD, size=(n, cfg.embed_dim))
    e_items = rng.normal(0.0, INIT_STD, size=(m, cfg.embed_dim))
    return EmbeddingState(e_users, e_items)


def _check_dims(state: EmbeddingState, g: GraphInputs):
    if state.n_users != g.n_users or state.n_items != g.n_items:
        raise DimensionError(
            f'embeddings are {state.n_users} users × {state.n_items} items, '
            f'graph is {g.n_users} × {g.n_items}'
        )
    if state.e_users.shape[1] != state.e_items.shape[1]:
        raise DimensionError('user and item blocks disagree in embedding size')


def propagate_layer(state: EmbeddingState, g: GraphInputs, cfg: ModelConfig) -> EmbeddingState:
    """
    One propagation layer. Disabled or absent channels contribute nothing.
    """
    _check_dims(state, g)
    e_users = cfg.w_a * spmm(g.r_norm, state.e_items)
    if g.correlation_active:
        e_users += cfg.w_c * spmm(g.c_norm, state.e_users)
    if g.social_active:
        e_users += cfg.w_s * spmm(g.s_norm, state.e_users)
    e_items = spmm(g.r_norm_t, state.e_users)
    return EmbeddingState(e_users, e_items)


def forward(state0: EmbeddingState, g: GraphInputs, cfg: ModelConfig) -> ForwardTrace:
    """
    Run K layers and average all K+1 snapshots.
    """
    _check_dims(state0, g)
    layers = [state0]
    for _ in range(cfg.n_layers):
        layers.append(propagate_layer(layers[-1], g, cfg))
    return ForwardTrace(layers=layers, final=_layer_mean(layers))


def _layer_mean(layers: Sequence[EmbeddingState]) -> EmbeddingState:
    count = len(layers)
    e_users = np.sum([layer.e_users for layer in layers], axis=0) / count
    e_items = np.sum([layer.e_items for layer in layers], axis=0) / count
    return EmbeddingState(e_users, e_items)


def final_embeddings(state0: EmbeddingState, g: GraphInputs, cfg: ModelConfig) -> EmbeddingState:
    """
    `forward(...).final`, without keeping every snapshot alive.
    """
    _check_dims(state0, g)
    current = state0
    sum_users, sum_items = state0.e_users.copy(), state0.e_items.copy()
    for _ in range(cfg.n_layers):
        current = propagate_layer(current, g, cfg)
        sum_users += current.e_users
        sum_items += current.e_items
    count = cfg.n_layers + 1
    return EmbeddingState(sum_users / count, sum_items / count)


def _adjoint_layer(grad: EmbeddingState, g: GraphInputs, cfg: ModelConfig) -> EmbeddingState:
    g_users = spmm(g.r_norm, grad.e_items)
    if g.correlation_active:
        g_users += cfg.w_c * spmm(g.c_norm.T, grad.e_users)
    if g.social_active:
        g_users += cfg.w_s * spmm(g.s_norm.T, grad.e_users)
    g_items = cfg.w_a * spmm(g.r_norm_t, grad.e_users)
    return EmbeddingState(g_users, g_items)


def backward(grad_final: EmbeddingState, g: GraphInputs, cfg: ModelConfig) -> EmbeddingState:
    """
    Pull a gradient with respect to the final embeddings back to the
    initial embeddings. The forward pass is linear, so this is its exact
    adjoint: the transposed layer operator, applied 0..K times and averaged.

    :param grad_final: gradient w.r.t. the final embeddings,
    :param g: graph inputs,
    :param cfg: model configuration,
    :return: gradient w.r.t. the initial embeddings.
    """
    _check_dims(grad_final, g)
    current = grad_final
    sum_users, sum_items = grad_final.e_users.copy(), grad_final.e_items.copy()
    for _ in range(cfg.n_layers):
        current = _adjoint_layer(current, g, cfg)
        sum_users += current.e_users
        sum_items += current.e_items
    count = cfg.n_layers + 1
    return EmbeddingState(sum_users / count, sum_items / count)


def _check_user(final: EmbeddingState, u: int):
    if not 0 <= u < final.n_users:
        raise ParameterError(f'user index {u} out of range [0, {final.n_users})')


def score(final: EmbeddingState, u: int, i: int) -> float:
    """
    Predicted preference of user `u` for item `i`: the dot product of
    their final embeddings.
    """
    _check_user(final, u)
    if not 0 <= i < final.n_items:
        raise ParameterError(f'item index {i} out of range [0, {final.n_items})')
    return float(np.sum(final.e_items[i] * final.e_users[u]))


def score_all_items(final: EmbeddingState, u: int) -> np.ndarray:
    """
    Scores of user `u` for every item; entry i equals `score(final, u, i)`.
    """
    _check_user(final, u)
    return np.sum(final.e_items * final.e_users[u], axis=1)


def score_matrix(final: EmbeddingState, users: Sequence[int]) -> np.ndarray:
    """
    Score rows for a block of users, one row per user.
    """
    return final.e_users[np.asarray(users, dtype=np.int64)] @ final.e_items.T
