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
Top-k evaluation: per-user ranking with train-item exclusion,
precision@k, recall@k and NDCG@k with binary gains and a log2(r+1)
discount, and ablation comparison tables.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import attr
import numpy as np

from .constants import DEFAULT_TOP_K
from .data import Dataset
from .exceptions import DatasetError, ParameterError
from .model import EmbeddingState, score_all_items
from .utils import thread_count

logger = logging.getLogger(__name__)

__all__ = [
    'MetricsReport', 'AblationRow', 'AblationTable', 'rank_scores', 'rank_topk', 'precision_recall',
    'ndcg_at_k', 'evaluate_all', 'ablation_report',
]

# users scored per matrix product
_USER_CHUNK = 256


@attr.s(frozen=True)
class MetricsReport:
    k = attr.ib(type=int)
    precision = attr.ib(type=float)
    recall = attr.ib(type=float)
    ndcg = attr.ib(type=float)
    n_eval_users = attr.ib(type=int)

    def to_text(self) -> str:
        return (
            f'k={self.k}\n'
            f'precision={self.precision!r}\n'
            f'recall={self.recall!r}\n'
            f'ndcg={self.ndcg!r}\n'
            f'n_eval_users={self.n_eval_users}\n'
        )

    def csv_row(self, run: str) -> str:
        return f'{run},{self.k},{self.precision:.8f},{self.recall:.8f},{self.ndcg:.8f},{self.n_eval_users}'


METRICS_CSV_HEADER = 'run,k,precision,recall,ndcg,n_users'


def rank_scores(scores: np.ndarray, k: int, exclude: Optional[Iterable[int]] = None) -> np.ndarray:
    """
    Indices of the `k` highest scores outside `exclude`, best first; equal
    scores are ordered by ascending index. Fewer than `k` candidates give
    all of them.
    """
    if k < 1:
        raise ParameterError(f'k must be at least 1, got {k}')
    scores = np.array(scores, dtype=np.float64)
    excluded = np.zeros(len(scores), dtype=bool)
    if exclude is not None:
        excluded[np.fromiter(exclude, dtype=np.int64)] = True
    candidates = np.flatnonzero(~excluded)
    k = min(k, len(candidates))
    if k == 0:
        return np.empty(0, dtype=np.int64)

    neg = -scores[candidates]
    if k < len(candidates):
        kth = np.partition(neg, k - 1)[k - 1]
        # every candidate tied with the k-th score stays in the race
        inside = neg <= kth
        candidates, neg = candidates[inside], neg[inside]
    order = np.argsort(neg, kind='stable')[:k]
    return candidates[order]


def rank_topk(final: EmbeddingState, u: int, k: int, exclude: Optional[Iterable[int]] = None) -> np.ndarray:
    return rank_scores(score_all_items(final, u), k, exclude)


def precision_recall(topk: Sequence[int], test_items: Iterable[int]) -> Tuple[float, float]:
    """
    precision = TP / |topk|, recall = TP / |test_items|.
    """
    test_set = set(int(i) for i in test_items)
    if not test_set:
        raise ParameterError('precision and recall need at least one test item')
    if len(topk) == 0:
        return 0.0, 0.0
    hits = sum(1 for i in topk if int(i) in test_set)
    return hits / len(topk), hits / len(test_set)


def _dcg(gains: Iterable[bool]) -> float:
    return sum(1.0 / math.log2(rank + 1) for rank, hit in enumerate(gains, start=1) if hit)


def ndcg_at_k(topk: Sequence[int], test_items: Iterable[int], k: int) -> float:
    """
    Normalized discounted cumulative gain with binary relevance:
    DCG = Σ rel(r) / log2(r + 1) over the first `k` ranks, normalized by
    the DCG of min(|test_items|, k) leading hits.
    """
    test_set = set(int(i) for i in test_items)
    if not test_set:
        raise ParameterError('NDCG needs at least one test item')
    dcg = _dcg(int(i) in test_set for i in list(topk)[:k])
    idcg = _dcg([True] * min(len(test_set), k))
    return dcg / idcg


def _evaluate_users(final: EmbeddingState, users: np.ndarray, k: int, train_items: Sequence[np.ndarray],
                    test_items: Sequence[np.ndarray]) -> np.ndarray:
    out = np.empty((len(users), 3), dtype=np.float64)
    for row, u in enumerate(users):
        topk = rank_topk(final, int(u), k, train_items[u])
        precision, recall = precision_recall(topk, test_items[u])
        out[row] = precision, recall, ndcg_at_k(topk, test_items[u], k)
    return out


def evaluate_all(final: EmbeddingState, dataset: Dataset, k: int = DEFAULT_TOP_K,
                 train_items: Optional[Sequence[np.ndarray]] = None,
                 test_items: Optional[Sequence[np.ndarray]] = None) -> MetricsReport:
    """
    Average precision@k, recall@k and NDCG@k over the users holding at
    least one test item. Users are scored in chunks, spread over at most
    `SOCGCF_THREADS` threads; results are gathered in user order.

    :param final: final embeddings,
    :param dataset: train/test split,
    :param k: cutoff,
    :param train_items: per-user train items, derived from `dataset` when omitted,
    :param test_items: per-user test items, derived from `dataset` when omitted,
    :return: metrics report,
    :raise DatasetError: when no user has a test item.
    """
    train_items = train_items if train_items is not None else dataset.items_by_user('train')
    test_items = test_items if test_items is not None else dataset.items_by_user('test')
    users = np.array([u for u in range(dataset.n_users) if len(test_items[u])], dtype=np.int64)
    if not len(users):
        raise DatasetError('no user has a test interaction; nothing to evaluate')

    chunks = [users[start:start + _USER_CHUNK] for start in range(0, len(users), _USER_CHUNK)]
    threads = min(thread_count(), len(chunks))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _evaluate_users(final, c, k, train_items, test_items), chunks))
    else:
        parts = [_evaluate_users(final, c, k, train_items, test_items) for c in chunks]

    per_user = np.concatenate(parts, axis=0)
    precision, recall, ndcg = np.mean(per_user, axis=0)
    return MetricsReport(k=k, precision=float(precision), recall=float(recall), ndcg=float(ndcg),
                         n_eval_users=len(users))


#: percentage change of (precision, recall, ndcg); None where the baseline metric is zero
Deltas = Tuple[Optional[float], Optional[float], Optional[float]]


@attr.s(frozen=True)
class AblationRow:
    name = attr.ib(type=str)
    report = attr.ib(type=MetricsReport)
    #: baseline name -> deltas against that baseline
    deltas = attr.ib(type=Dict[str, Deltas])


def _delta(value: float, base: float) -> Optional[float]:
    if base == 0:
        return None
    return (value - base) / base * 100.0


def _fmt_delta(delta: Optional[float]) -> str:
    if delta is None:
        return 'n/a'
    # avoid "-0.0%"
    delta = round(delta, 1) + 0.0
    return f'{delta:+.1f}%'


@attr.s(frozen=True)
class AblationTable:
    """
    Runs compared with one or more baseline runs, one block per baseline.
    """
    baselines = attr.ib(type=Tuple[str, ...])
    rows = attr.ib(type=List[AblationRow])

    def _block(self, baseline: str) -> List[str]:
        width = max([len('run')] + [len(row.name) for row in self.rows])
        lines = [f'vs {baseline}', f'{"run":<{width}}  {"recall":<16}  {"precision":<16}  {"ndcg":<16}']
        for row in self.rows:
            d_precision, d_recall, d_ndcg = row.deltas[baseline]
            cells = []
            for value, delta in ((row.report.recall, d_recall), (row.report.precision, d_precision),
                                 (row.report.ndcg, d_ndcg)):
                cells.append(f'{value:.4f}' if row.name == baseline else f'{value:.4f} ({_fmt_delta(delta)})')
            lines.append(f'{row.name:<{width}}  ' + '  '.join(f'{cell:<16}' for cell in cells).rstrip())
        return lines

    def to_text(self) -> str:
        return '\n\n'.join('\n'.join(self._block(baseline)) for baseline in self.baselines) + '\n'

    def to_csv(self) -> str:
        lines = [f'{METRICS_CSV_HEADER},baseline,d_precision,d_recall,d_ndcg']
        for baseline in self.baselines:
            for row in self.rows:
                deltas = ','.join(_fmt_delta(d) for d in row.deltas[baseline])
                lines.append(f'{row.report.csv_row(row.name)},{baseline},{deltas}')
        return '\n'.join(lines) + '\n'


def ablation_report(runs: Sequence[Tuple[str, MetricsReport]],
                    baselines: Union[str, Sequence[str]]) -> AblationTable:
    """
    Compare named runs against every baseline run.

    :param runs: (name, report) pairs, in display order,
    :param baselines: name(s) of the reference runs,
    :return: ablation table with percentage deltas,
    :raise ParameterError: when a baseline is not among the runs.
    """
    baselines = (baselines,) if isinstance(baselines, str) else tuple(baselines)
    if not baselines:
        raise ParameterError('at least one baseline run is needed')
    reports = dict(runs)
    for baseline in baselines:
        if baseline not in reports:
            raise ParameterError(f'baseline run {baseline!r} is not among {[name for name, _ in runs]}')

    rows = []
    for name, report in runs:
        deltas = {}
        for baseline in baselines:
            base = reports[baseline]
            deltas[baseline] = (
                _delta(report.precision, base.precision),
                _delta(report.recall, base.recall),
                _delta(report.ndcg, base.ndcg),
            )
        rows.append(AblationRow(name=name, report=report, deltas=deltas))
    return AblationTable(baselines=baselines, rows=rows)
