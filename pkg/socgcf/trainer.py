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
BPR pairwise training of the initial embeddings with mini-batch Adam,
uniform negative sampling, L2 regularization and early stopping on
recall@20.
"""

import csv
import logging
import time
from typing import Iterator, List, Optional, Sequence, Tuple

import attr
import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .constants import DEFAULT_TOP_K, HISTORY_CSV_HEADER
from .data import Dataset
from .evaluator import evaluate_all
from .exceptions import ParameterError, TrainingError
from .graph import GraphInputs
from .model import EmbeddingState, ModelConfig, backward, final_embeddings, init_embeddings
from .optim import Adam, AdamState
from .utils import make_rng

logger = logging.getLogger(__name__)

__all__ = [
    'TrainConfig', 'BPRTriple', 'TripleBatch', 'HistoryRecord', 'TrainHistory', 'sample_epoch', 'bpr_loss',
    'objective', 'gradient', 'grad_step', 'train', 'finite_diff_check', 'write_history_csv',
]

#: validation metrics are tracked at this cutoff
EVAL_K = DEFAULT_TOP_K


def _positive(_, attrib, value):
    if not value > 0:
        raise ParameterError(f"'{attrib.name}' must be positive, got {value!r}")


def _non_negative(_, attrib, value):
    if not value >= 0:
        raise ParameterError(f"'{attrib.name}' must not be negative, got {value!r}")


def _unit_interval(_, attrib, value):
    if not 0 <= value < 1:
        raise ParameterError(f"'{attrib.name}' must lie in [0, 1), got {value!r}")


@attr.s(frozen=True)
class TrainConfig:
    lr = attr.ib(kw_only=True, default=1e-3, converter=float, validator=_positive)
    l2_lambda = attr.ib(kw_only=True, default=1e-4, converter=float, validator=_non_negative)
    batch_size = attr.ib(kw_only=True, default=2048, converter=int, validator=_positive)
    max_epochs = attr.ib(kw_only=True, default=1500, converter=int, validator=_non_negative)
    #: evaluate every this many epochs
    eval_every = attr.ib(kw_only=True, default=10, converter=int, validator=_positive)
    #: stop after this many evaluations without recall@20 improvement
    patience = attr.ib(kw_only=True, default=5, converter=int, validator=_positive)
    adam_beta1 = attr.ib(kw_only=True, default=0.9, converter=float, validator=_unit_interval)
    adam_beta2 = attr.ib(kw_only=True, default=0.999, converter=float, validator=_unit_interval)
    adam_eps = attr.ib(kw_only=True, default=1e-8, converter=float, validator=_positive)
    seed = attr.ib(kw_only=True, default=0, converter=int)

    def optimizer(self) -> Adam:
        return Adam(lr=self.lr, beta1=self.adam_beta1, beta2=self.adam_beta2, eps=self.adam_eps)


@attr.s(frozen=True, slots=True)
class BPRTriple:
    u = attr.ib(type=int)
    i_pos = attr.ib(type=int)
    j_neg = attr.ib(type=int)


@attr.s(frozen=True)
class TripleBatch:
    """
    A stream of BPR triples as three aligned index arrays.
    """
    users = attr.ib(type=np.ndarray)
    pos = attr.ib(type=np.ndarray)
    neg = attr.ib(type=np.ndarray)

    @classmethod
    def empty(cls) -> 'TripleBatch':
        none = np.empty(0, dtype=np.int64)
        return cls(none, none.copy(), none.copy())

    def __len__(self) -> int:
        return len(self.users)

    def triples(self) -> Iterator[BPRTriple]:
        for u, i, j in zip(self.users, self.pos, self.neg):
            yield BPRTriple(int(u), int(i), int(j))

    def batches(self, size: int) -> Iterator['TripleBatch']:
        for start in range(0, len(self), size):
            stop = start + size
            yield TripleBatch(self.users[start:stop], self.pos[start:stop], self.neg[start:stop])


@attr.s(frozen=True)
class HistoryRecord:
    epoch = attr.ib(type=int)
    loss = attr.ib(type=float)
    recall = attr.ib(type=float)
    precision = attr.ib(type=float)
    ndcg = attr.ib(type=float)


@attr.s
class TrainHistory:
    records = attr.ib(type=List[HistoryRecord], factory=list)
    epochs_to_best = attr.ib(type=int, default=0)
    best_recall = attr.ib(type=float, default=0.0)
    #: mean wall-clock seconds per epoch; not part of the CSV
    epoch_seconds = attr.ib(type=float, default=0.0)

    def append(self, record: HistoryRecord):
        if self.records and record.epoch <= self.records[-1].epoch:
            raise ParameterError(f'history epochs must increase, got {record.epoch} after {self.records[-1].epoch}')
        self.records.append(record)


def sample_epoch(train: Sequence[Tuple[int, int]], n_items: int, rng: np.random.Generator) -> TripleBatch:
    """
    Draw one BPR triple per training interaction, in shuffled order. The
    negative item is uniform over the items the user has not interacted
    with in train, drawn by rejection. Users who interacted with every item
    have no negatives; their triples are skipped.

    :param train: (user, item) training pairs,
    :param n_items: size of the item universe,
    :param rng: generator, consumed deterministically,
    :return: the epoch's triples.
    """
    pairs = np.asarray(train, dtype=np.int64).reshape(-1, 2)
    if not len(pairs):
        return TripleBatch.empty()

    codes = np.unique(pairs[:, 0] * n_items + pairs[:, 1])
    degrees = np.bincount(codes // n_items)
    saturated = np.flatnonzero(degrees >= n_items)
    if len(saturated):
        logger.warning('skipping %d users who interacted with all %d items', len(saturated), n_items)
        pairs = pairs[~np.isin(pairs[:, 0], saturated)]
        if not len(pairs):
            return TripleBatch.empty()

    pairs = pairs[rng.permutation(len(pairs))]
    users, pos = pairs[:, 0], pairs[:, 1]
    neg = rng.integers(0, n_items, size=len(pairs))
    rejected = np.flatnonzero(np.isin(users * n_items + neg, codes))
    while len(rejected):
        neg[rejected] = rng.integers(0, n_items, size=len(rejected))
        still = np.isin(users[rejected] * n_items + neg[rejected], codes)
        rejected = rejected[still]
    return TripleBatch(users.copy(), pos.copy(), neg)


def bpr_loss(pos_scores: np.ndarray, neg_scores: np.ndarray, params_norm_sq: float, l2_lambda: float) -> float:
    """
    Σ −ln σ(ŷ_ui − ŷ_uj) + λ·‖Φ‖², evaluated stably as a sum of softplus terms.
    """
    diff = np.asarray(pos_scores, dtype=np.float64) - np.asarray(neg_scores, dtype=np.float64)
    return float(np.sum(np.logaddexp(0.0, -diff)) + l2_lambda * params_norm_sq)


def _touched_rows(batch: TripleBatch) -> Tuple[np.ndarray, np.ndarray]:
    return np.unique(batch.users), np.unique(np.concatenate([batch.pos, batch.neg]))


def _regularized_norm_sq(state0: EmbeddingState, batch: TripleBatch, full_regularization: bool) -> float:
    if full_regularization:
        return state0.norm_sq()
    users, items = _touched_rows(batch)
    return float(np.sum(state0.e_users[users] ** 2) + np.sum(state0.e_items[items] ** 2))


def objective(state0: EmbeddingState, g: GraphInputs, cfg: ModelConfig, batch: TripleBatch,
              l2_lambda: float, full_regularization: bool = False) -> float:
    """
    BPR loss of a batch as a function of the initial embeddings.
    """
    final = final_embeddings(state0, g, cfg)
    eu = final.e_users[batch.users]
    pos = np.sum(eu * final.e_items[batch.pos], axis=1)
    neg = np.sum(eu * final.e_items[batch.neg], axis=1)
    return bpr_loss(pos, neg, _regularized_norm_sq(state0, batch, full_regularization), l2_lambda)


def gradient(state0: EmbeddingState, g: GraphInputs, cfg: ModelConfig, batch: TripleBatch,
             l2_lambda: float, full_regularization: bool = False) -> Tuple[float, EmbeddingState]:
    """
    Loss and its exact gradient with respect to the initial embeddings:
    through the scores to the final embeddings, then back through the
    layer mean and every propagation layer.

    :return: (loss, gradient).
    """
    final = final_embeddings(state0, g, cfg)
    eu = final.e_users[batch.users]
    ei = final.e_items[batch.pos]
    ej = final.e_items[batch.neg]
    diff = np.sum(eu * (ei - ej), axis=1)
    loss = bpr_loss(diff, np.zeros_like(diff), _regularized_norm_sq(state0, batch, full_regularization), l2_lambda)

    # d/d(diff) of −ln σ(diff)
    coef = -expit(-diff)[:, None]
    grad_users = np.zeros_like(final.e_users)
    grad_items = np.zeros_like(final.e_items)
    np.add.at(grad_users, batch.users, coef * (ei - ej))
    np.add.at(grad_items, batch.pos, coef * eu)
    np.add.at(grad_items, batch.neg, -coef * eu)

    grad = backward(EmbeddingState(grad_users, grad_items), g, cfg)
    if l2_lambda:
        if full_regularization:
            grad.e_users += 2 * l2_lambda * state0.e_users
            grad.e_items += 2 * l2_lambda * state0.e_items
        else:
            users, items = _touched_rows(batch)
            grad.e_users[users] += 2 * l2_lambda * state0.e_users[users]
            grad.e_items[items] += 2 * l2_lambda * state0.e_items[items]
    return loss, grad


def grad_step(state0: EmbeddingState, g: GraphInputs, cfg: ModelConfig, batch: TripleBatch,
              optimizer: Adam, adam: AdamState, l2_lambda: float) -> Tuple[EmbeddingState, AdamState, float]:
    """
    One Adam step on a mini-batch. Only the initial embeddings change.

    :raise TrainingError: on a non-finite loss or gradient.
    """
    loss, grad = gradient(state0, g, cfg, batch, l2_lambda)
    if not np.isfinite(loss) or not grad.is_finite():
        raise TrainingError(f'non-finite {"loss" if not np.isfinite(loss) else "gradient"} at Adam step {adam.t + 1}')
    return optimizer.step(state0, grad, adam), adam, loss


def train(dataset: Dataset, g: GraphInputs, model_cfg: ModelConfig,
          train_cfg: TrainConfig) -> Tuple[EmbeddingState, TrainHistory]:
    """
    Train until `max_epochs` or until recall@20 stalls for `patience`
    consecutive evaluations.

    :param dataset: train/test interactions,
    :param g: graph inputs built from the same dataset,
    :param model_cfg: model configuration,
    :param train_cfg: training configuration,
    :return: the initial embeddings of the best-recall evaluation, and the history.
    """
    state = init_embeddings(dataset.n_users, dataset.n_items, model_cfg)
    history = TrainHistory()
    if train_cfg.max_epochs == 0:
        return state, history

    rng = make_rng(train_cfg.seed)
    optimizer = train_cfg.optimizer()
    adam = AdamState.zeros_like(state)
    train_items = dataset.items_by_user('train')
    test_items = dataset.items_by_user('test')

    best_state, best_recall, stale = state.copy(), -np.inf, 0
    elapsed = 0.0
    for epoch in range(1, train_cfg.max_epochs + 1):
        started = time.perf_counter()
        triples = sample_epoch(dataset.train, dataset.n_items, rng)
        total = 0.0
        for batch in triples.batches(train_cfg.batch_size):
            try:
                state, adam, loss = grad_step(state, g, model_cfg, batch, optimizer, adam, train_cfg.l2_lambda)
            except TrainingError as e:
                raise TrainingError(f'epoch {epoch}: {e.message}', epoch=epoch) from e
            total += loss
        elapsed += time.perf_counter() - started
        mean_loss = total / max(len(triples), 1)
        logger.debug('epoch %d: loss %.6f', epoch, mean_loss)

        if epoch % train_cfg.eval_every and epoch != train_cfg.max_epochs:
            continue

        report = evaluate_all(
            final_embeddings(state, g, model_cfg), dataset, k=EVAL_K,
            train_items=train_items, test_items=test_items,
        )
        history.append(HistoryRecord(epoch, mean_loss, report.recall, report.precision, report.ndcg))
        logger.info(
            'epoch %d: loss %.6f recall@%d %.4f precision@%d %.4f ndcg@%d %.4f',
            epoch, mean_loss, EVAL_K, report.recall, EVAL_K, report.precision, EVAL_K, report.ndcg,
        )
        if report.recall > best_recall:
            best_state, best_recall, stale = state.copy(), report.recall, 0
            history.epochs_to_best, history.best_recall = epoch, report.recall
        else:
            stale += 1
            if stale >= train_cfg.patience:
                logger.info('early stop at epoch %d, best recall@%d %.4f at epoch %d',
                            epoch, EVAL_K, best_recall, history.epochs_to_best)
                break

    history.epoch_seconds = elapsed / epoch
    logger.info('trained %d epochs, %.3f s per epoch', epoch, history.epoch_seconds)
    return best_state, history


def _train_pairs_of(g: GraphInputs) -> List[Tuple[int, int]]:
    coo = sp.coo_matrix(g.r_norm)
    return list(zip(coo.row.tolist(), coo.col.tolist()))


def finite_diff_check(g: GraphInputs, model_cfg: ModelConfig, eps: float = 1e-4, l2_lambda: float = 1e-4,
                      batch: Optional[TripleBatch] = None, full_regularization: bool = False,
                      abs_floor: float = 1e-6) -> float:
    """
    Compare the analytic gradient with central differences, coordinate by
    coordinate, at embeddings drawn from `model_cfg.seed`.

    :param g: graph inputs of a small instance,
    :param model_cfg: model configuration,
    :param eps: finite-difference step,
    :param l2_lambda: regularization strength,
    :param batch: triples to evaluate; one sampled epoch over the graph's
     interactions when omitted,
    :param full_regularization: regularize the whole embedding table,
    :param abs_floor: smallest denominator of the relative error,
    :return: maximum relative error over all coordinates.
    """
    state0 = init_embeddings(g.n_users, g.n_items, model_cfg)
    if batch is None:
        batch = sample_epoch(_train_pairs_of(g), g.n_items, make_rng(model_cfg.seed))

    _, analytic = gradient(state0, g, model_cfg, batch, l2_lambda, full_regularization)

    def loss_at(block: str, index: Tuple[int, int], delta: float) -> float:
        shifted = state0.copy()
        getattr(shifted, block)[index] += delta
        return objective(shifted, g, model_cfg, batch, l2_lambda, full_regularization)

    worst = 0.0
    for block in ('e_users', 'e_items'):
        exact = getattr(analytic, block)
        for index in np.ndindex(*exact.shape):
            numeric = (loss_at(block, index, eps) - loss_at(block, index, -eps)) / (2 * eps)
            denom = max(abs(exact[index]), abs(numeric), abs_floor)
            worst = max(worst, abs(exact[index] - numeric) / denom)
    return worst


def write_history_csv(history: TrainHistory, path: str):
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(HISTORY_CSV_HEADER)
        for record in history.records:
            writer.writerow([
                record.epoch, f'{record.loss:.8f}', f'{record.recall:.8f}',
                f'{record.precision:.8f}', f'{record.ndcg:.8f}',
            ])
