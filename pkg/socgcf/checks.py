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
Verification suite behind the `check` command: dense-matrix propagation
oracle, finite-difference gradients, reduction to the plain LightGCN layer
rule, metric oracles and the correlation buckets.
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import attr
import numpy as np

from .data import Dataset
from .evaluator import evaluate_all, ndcg_at_k, precision_recall
from .exceptions import CheckFailedError
from .graph import GraphInputs, build_graph_inputs, classify_f
from .linalg import to_dense
from .model import EmbeddingState, ModelConfig, init_embeddings, propagate_layer
from .trainer import finite_diff_check
from .utils import make_rng

logger = logging.getLogger(__name__)

CHANNEL_COMBOS = ((False, False), (True, False), (False, True), (True, True))

DENSE_ORACLE_TOL = 1e-10
GRADIENT_TOL = 1e-4
# relative errors of near-zero coordinates are measured against this
GRADIENT_ABS_FLOOR = 1e-3
REDUCTION_TOL = 1e-12
METRIC_TOL = 1e-9

CLASSIFY_POINTS = (
    (0.0, 0.0), (0.0999, 0.0), (0.1, 0.005), (0.3999, 0.005), (0.4, 0.05),
    (0.5999, 0.05), (0.6, 0.5), (0.8999, 0.5), (0.9, 1.0), (1.0, 1.0),
)

LayerFn = Callable[[EmbeddingState, GraphInputs, ModelConfig], EmbeddingState]


@attr.s(frozen=True)
class CheckResult:
    name = attr.ib(type=str)
    passed = attr.ib(type=bool)
    #: worst observed error
    value = attr.ib(type=float)
    tolerance = attr.ib(type=float)
    detail = attr.ib(type=str, default='')

    def to_line(self) -> str:
        status = 'PASS' if self.passed else 'FAIL'
        line = f'{status} {self.name}: max error {self.value:.3e} (tolerance {self.tolerance:.0e})'
        return f'{line} {self.detail}' if self.detail else line


def random_dataset(rng: np.random.Generator, n_users: int, n_items: int, density: float = 0.35,
                   social_density: float = 0.3) -> Dataset:
    """
    A random toy dataset where every user holds at least one training item
    and the social graph has at least one edge.
    """
    mask = rng.random((n_users, n_items)) < density
    for u in range(n_users):
        if not mask[u].any():
            mask[u, rng.integers(n_items)] = True
    train = [(int(u), int(i)) for u, i in zip(*np.nonzero(mask))]

    edges = [(a, b) for a in range(n_users) for b in range(a + 1, n_users) if rng.random() < social_density]
    if not edges and n_users > 1:
        edges = [(0, 1)]
    return Dataset(
        n_users=n_users,
        n_items=n_items,
        train=train,
        test=[],
        social_edges=edges,
        user_id_map={f'u{u}': u for u in range(n_users)},
        item_id_map={f'i{i}': i for i in range(n_items)},
    )


def gradient_fixture() -> Dataset:
    """
    5 users, 8 items; every channel carries entries.
    """
    items = ({0, 1, 2, 3}, {1, 2, 3, 4}, {4, 5}, {5, 6, 7}, {0, 7})
    return Dataset(
        n_users=5,
        n_items=8,
        train=[(u, i) for u, owned in enumerate(items) for i in sorted(owned)],
        test=[],
        social_edges=[(0, 2), (0, 4), (1, 3), (2, 4)],
        user_id_map={f'u{u}': u for u in range(5)},
        item_id_map={f'i{i}': i for i in range(8)},
    )


def dense_normalized_adjacency(r: np.ndarray) -> np.ndarray:
    """
    The symmetrically normalized (n+m)-square adjacency [[0, R], [Rᵀ, 0]],
    computed densely.
    """
    n, m = r.shape
    a = np.zeros((n + m, n + m))
    a[:n, n:] = r
    a[n:, :n] = r.T
    deg = np.count_nonzero(a, axis=1).astype(np.float64)
    out = np.zeros_like(a)
    rows, cols = np.nonzero(a)
    out[rows, cols] = a[rows, cols] / np.sqrt(deg[rows] * deg[cols])
    return out


def dense_propagation_matrix(g: GraphInputs, cfg: ModelConfig) -> np.ndarray:
    """
    The full layer operator: the normalized adjacency with its user-item
    block weighted by w_a and the user-user block holding w_c·C̃ + w_s·S̃.
    """
    n = g.n_users
    binary = (to_dense(g.r_norm) != 0).astype(np.float64)
    p = dense_normalized_adjacency(binary)
    p[:n, n:] *= cfg.w_a
    if g.correlation_active:
        p[:n, :n] += cfg.w_c * to_dense(g.c_norm)
    if g.social_active:
        p[:n, :n] += cfg.w_s * to_dense(g.s_norm)
    return p


def dense_forward(state0: EmbeddingState, g: GraphInputs, cfg: ModelConfig) -> List[np.ndarray]:
    """
    Layer snapshots followed by their mean, all as stacked (n+m)×d arrays.
    """
    p = dense_propagation_matrix(g, cfg)
    layers = [np.vstack([state0.e_users, state0.e_items])]
    for _ in range(cfg.n_layers):
        layers.append(p @ layers[-1])
    return layers + [np.mean(layers, axis=0)]


def _stacked(state: EmbeddingState) -> np.ndarray:
    return np.vstack([state.e_users, state.e_items])


def check_dense_oracle(n_graphs: int = 24, seed: int = 0, layer_fn: Optional[LayerFn] = None) -> CheckResult:
    """
    Compare the sparse block propagation against the explicit dense
    operator on random toy graphs with n+m <= 30, K <= 4 and every channel
    combination.

    :param layer_fn: propagation layer under test, `propagate_layer` by default.
    """
    layer_fn = layer_fn or propagate_layer
    rng = make_rng(seed)
    worst = 0.0
    for graph_no in range(n_graphs):
        n_users = int(rng.integers(2, 13))
        n_items = int(rng.integers(2, 31 - n_users))
        d = random_dataset(rng, n_users, n_items)
        use_social, use_correlation = CHANNEL_COMBOS[graph_no % len(CHANNEL_COMBOS)]
        g = build_graph_inputs(d, use_social=use_social, use_correlation=use_correlation, floor=0.0)
        cfg = ModelConfig(
            embed_dim=int(rng.integers(1, 6)),
            n_layers=int(rng.integers(0, 5)),
            agg_weights=tuple(rng.uniform(0.5, 1.5, size=3)),
            seed=int(rng.integers(1 << 31)),
        )
        state = init_embeddings(n_users, n_items, cfg)
        snapshots = [state]
        for _ in range(cfg.n_layers):
            snapshots.append(layer_fn(snapshots[-1], g, cfg))
        ours = [_stacked(s) for s in snapshots]
        ours.append(np.mean(ours, axis=0))
        for got, want in zip(ours, dense_forward(state, g, cfg)):
            worst = max(worst, float(np.max(np.abs(got - want))) if got.size else 0.0)
    return CheckResult('dense-oracle propagation', worst <= DENSE_ORACLE_TOL, worst, DENSE_ORACLE_TOL,
                       f'({n_graphs} graphs)')


def check_gradients(eps: float = 1e-4, l2_lambda: float = 1e-2) -> CheckResult:
    """
    Finite-difference gradient check, 5 users / 8 items / d=4 / K=2, for
    every channel combination.
    """
    d = gradient_fixture()
    full = build_graph_inputs(d, use_social=True, use_correlation=True)
    cfg = ModelConfig(embed_dim=4, n_layers=2, seed=7)
    errors = []
    for use_social, use_correlation in CHANNEL_COMBOS:
        errors.append(finite_diff_check(full.with_channels(use_social, use_correlation), cfg, eps, l2_lambda,
                                        abs_floor=GRADIENT_ABS_FLOOR))
    worst = max(errors)
    detail = '(' + ', '.join(f'{e:.1e}' for e in errors) + ')'
    return CheckResult('finite-difference gradient', worst < GRADIENT_TOL, worst, GRADIENT_TOL, detail)


def lightgcn_layer(e: np.ndarray, edges: Sequence[Tuple[int, int]], n_users: int) -> np.ndarray:
    """
    The plain LightGCN layer rule over the joint node set: every node sums
    its neighbours scaled by 1/sqrt(deg_a·deg_b).
    """
    deg = np.zeros(len(e))
    for u, i in edges:
        deg[u] += 1
        deg[n_users + i] += 1
    out = np.zeros_like(e)
    for u, i in edges:
        weight = 1.0 / math.sqrt(deg[u] * deg[n_users + i])
        out[u] += weight * e[n_users + i]
        out[n_users + i] += weight * e[u]
    return out


def check_lightgcn_reduction(n_graphs: int = 8, seed: int = 1) -> CheckResult:
    """
    With both optional channels off and w_a = 1 every layer must equal the
    LightGCN rule.
    """
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(n_graphs):
        n_users, n_items = int(rng.integers(2, 10)), int(rng.integers(2, 15))
        d = random_dataset(rng, n_users, n_items)
        g = build_graph_inputs(d, use_social=True, use_correlation=True).with_channels(False, False)
        cfg = ModelConfig(embed_dim=3, n_layers=3, agg_weights=(1.0, 1.0, 1.0), seed=int(rng.integers(1 << 31)))
        state = init_embeddings(n_users, n_items, cfg)
        reference = _stacked(state)
        for _ in range(cfg.n_layers):
            state = propagate_layer(state, g, cfg)
            reference = lightgcn_layer(reference, d.train, n_users)
            worst = max(worst, float(np.max(np.abs(_stacked(state) - reference))))
    return CheckResult('LightGCN reduction', worst <= REDUCTION_TOL, worst, REDUCTION_TOL)


def metric_fixture() -> Tuple[Dataset, EmbeddingState, Tuple[float, float, float]]:
    """
    Three users over 12 items with known top-3 lists:

     * user 0 ranks [0, 1, 2], test {0, 1, 2} → P 1, R 1, NDCG 1,
     * user 1 ranks [3, 4, 5], test {4} → P 1/3, R 1, NDCG 1/log2(3),
     * user 2 ranks [6, 7, 8], test {9, 10} → all zero.

    Item 11 scores highest for everybody but is a training item, so it is
    excluded. Item embeddings are one-hot; user rows carry the scores.

    :return: (dataset, final embeddings, expected (precision, recall, ndcg) at k=3).
    """
    n_items = 12
    scores = np.zeros((3, n_items))
    for u, ranked in enumerate(([0, 1, 2], [3, 4, 5], [6, 7, 8])):
        scores[u, ranked] = [3.0, 2.0, 1.0]
    scores[:, 11] = 10.0
    d = Dataset(
        n_users=3,
        n_items=n_items,
        train=[(0, 11), (1, 11), (2, 11)],
        test=[(0, 0), (0, 1), (0, 2), (1, 4), (2, 9), (2, 10)],
        user_id_map={'a': 0, 'b': 1, 'c': 2},
        item_id_map={f'i{i:02d}': i for i in range(n_items)},
    )
    final = EmbeddingState(scores, np.eye(n_items))
    ndcg_b = 1.0 / math.log2(3)
    expected = ((1.0 + 1.0 / 3 + 0.0) / 3, (1.0 + 1.0 + 0.0) / 3, (1.0 + ndcg_b + 0.0) / 3)
    return d, final, expected


def check_metric_oracles(seed: int = 2, n_random: int = 1000) -> CheckResult:
    d, final, (precision, recall, ndcg) = metric_fixture()
    report = evaluate_all(final, d, k=3)
    errors = [abs(report.precision - precision), abs(report.recall - recall), abs(report.ndcg - ndcg)]
    errors.append(abs(ndcg_at_k([7, 3], [3], 2) - math.log(2) / math.log(3)))

    rng = make_rng(seed)
    for _ in range(n_random):
        k = int(rng.integers(1, 30))
        topk = rng.choice(100, size=k, replace=False)
        test = rng.choice(100, size=int(rng.integers(1, 40)), replace=False)
        p, r = precision_recall(topk, test)
        hits = len(set(topk.tolist()) & set(test.tolist()))
        errors.append(max(abs(p * k - hits), abs(r * len(test) - hits)))
    worst = max(errors)
    return CheckResult('metric oracles', worst <= METRIC_TOL, worst, METRIC_TOL)


def check_classification() -> CheckResult:
    worst = max(abs(classify_f(j) - expected) for j, expected in CLASSIFY_POINTS)
    return CheckResult('correlation buckets', worst == 0.0, worst, 0.0)


def run_checks(seed: int = 0, strict: bool = False) -> List[CheckResult]:
    """
    Run the whole suite.

    :param seed: base seed of the randomized checks,
    :param strict: raise on the first failing check,
    :return: one result per check,
    :raise CheckFailedError: in strict mode, naming the failing check.
    """
    results = [
        check_dense_oracle(seed=seed),
        check_gradients(),
        check_lightgcn_reduction(seed=seed + 1),
        check_metric_oracles(seed=seed + 2),
        check_classification(),
    ]
    for result in results:
        (logger.info if result.passed else logger.error)(result.to_line())
        if strict and not result.passed:
            raise CheckFailedError(result.name, result.to_line())
    return results
