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
Command-line surface: `socgcf <command> [--config FILE] [--key value ...]`.
"""

import argparse
import csv
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .checks import CheckResult, run_checks
from .config import RunConfig, build_run_config
from .constants import INTERACT_RUN, LIGHTGCN_RUN
from .data import (
    Dataset, DatasetStats, load_dataset, load_interactions, load_social_edges, preprocess, save_dataset,
)
from .evaluator import METRICS_CSV_HEADER, AblationTable, MetricsReport, ablation_report, evaluate_all
from .exceptions import DatasetError, ParameterError, SocgcfError
from .graph import GraphInputs, build_graph_inputs, operator_stats, write_operators
from .model import EmbeddingState, final_embeddings
from .stream import read_checkpoint, write_checkpoint
from .trainer import TrainHistory, train, write_history_csv
from .utils import output_lock

logger = logging.getLogger(__name__)

LOG_FORMAT = '[%(asctime)s.%(msecs)03d][%(levelname)s] %(name)s: %(message)s'
LOG_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

CHECKPOINT_FILE = 'embeddings.ckpt'
HISTORY_FILE = 'history.csv'
METRICS_TEXT_FILE = 'metrics.txt'
METRICS_CSV_FILE = 'metrics.csv'
GRAPH_DIR = 'graph'
ABLATION_TEXT_FILE = 'ablation.txt'
ABLATION_CSV_FILE = 'ablation.csv'
CONVERGENCE_CSV_FILE = 'convergence.csv'
CONVERGENCE_CSV_HEADER = ('run', 'seed', 'epochs_to_best', 'best_recall20', 'epoch_seconds')

# deltas are reported against each of these that was run
BASELINE_RUNS = (LIGHTGCN_RUN, INTERACT_RUN)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2


def parse_overrides(tokens: Sequence[str]) -> Dict[str, str]:
    """
    Turn `--key value` and `--key=value` tokens into a mapping.

    :raise ParameterError: on stray values or a key without a value.
    """
    overrides = {}
    tokens = list(tokens)
    while tokens:
        token = tokens.pop(0)
        if not token.startswith('--') or len(token) == 2:
            raise ParameterError(f'unexpected argument {token!r}')
        key, sep, value = token[2:].partition('=')
        if not sep:
            if not tokens or tokens[0].startswith('--'):
                raise ParameterError(f'option --{key} needs a value')
            value = tokens.pop(0)
        overrides[key.replace('-', '_')] = value
    return overrides


def _write_text(path: str, text: str):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)


def _require_file(path: Optional[str], what: str, key: str):
    if path is None:
        raise ParameterError(f'no {what} given (set "{key}")')
    if not os.path.isfile(path):
        raise DatasetError(f'{what} {path} does not exist')


def cmd_preprocess(cfg: RunConfig) -> DatasetStats:
    """
    Raw files → dataset directory.
    """
    _require_file(cfg.interactions, 'interactions file', 'interactions')
    raw_edges = None
    if cfg.use_social:
        if cfg.social is None or not os.path.isfile(cfg.social):
            raise DatasetError(
                f'social channel requested but the social file {cfg.social!r} is missing; '
                f'give "social" or set "use_social = false"'
            )
        raw_edges = load_social_edges(cfg.social)
    elif cfg.social is not None:
        logger.info('social channel disabled; ignoring %s', cfg.social)

    raw = load_interactions(cfg.interactions, cfg.interactions_format)
    d = preprocess(raw, raw_edges, k=cfg.k_core, ratio=cfg.resolved_ratio(), test_fraction=cfg.test_fraction)
    return save_dataset(d, cfg.resolved_dataset_dir())


def _graph_for(cfg: RunConfig, d: Dataset) -> GraphInputs:
    return build_graph_inputs(d, use_social=cfg.use_social, use_correlation=cfg.use_correlation,
                              floor=cfg.jaccard_floor)


def cmd_graph(cfg: RunConfig) -> Tuple[GraphInputs, List[str]]:
    d = load_dataset(cfg.resolved_dataset_dir())
    g = _graph_for(cfg, d)
    return g, write_operators(g, os.path.join(cfg.output_dir, GRAPH_DIR))


def _write_run(run_dir: str, label: str, state0: EmbeddingState, history: TrainHistory, report: MetricsReport):
    os.makedirs(run_dir, exist_ok=True)
    write_checkpoint(state0.e_users, state0.e_items, os.path.join(run_dir, CHECKPOINT_FILE))
    write_history_csv(history, os.path.join(run_dir, HISTORY_FILE))
    _write_text(os.path.join(run_dir, METRICS_TEXT_FILE), report.to_text())
    _write_text(os.path.join(run_dir, METRICS_CSV_FILE), f'{METRICS_CSV_HEADER}\n{report.csv_row(label)}\n')


def _train_run(cfg: RunConfig, d: Dataset, g: GraphInputs, seed: Optional[int] = None,
               run_dir: Optional[str] = None) -> Tuple[MetricsReport, TrainHistory]:
    model_cfg = cfg.model_config(seed)
    label = cfg.run_label
    logger.info('training %s (seed %s)', label, cfg.seed if seed is None else seed)
    state0, history = train(d, g, model_cfg, cfg.train_config(seed))
    report = evaluate_all(final_embeddings(state0, g, model_cfg), d, k=cfg.top_k)
    _write_run(run_dir or cfg.run_dir(), label, state0, history, report)
    return report, history


def cmd_train(cfg: RunConfig) -> MetricsReport:
    """
    Train the configured variant and persist its checkpoint, history and
    metrics under `<output_dir>/<run label>/`.
    """
    d = load_dataset(cfg.resolved_dataset_dir())
    report, _ = _train_run(cfg, d, _graph_for(cfg, d))
    return report


def cmd_evaluate(cfg: RunConfig) -> MetricsReport:
    """
    Score a saved checkpoint; `checkpoint` defaults to the run directory's.
    """
    d = load_dataset(cfg.resolved_dataset_dir())
    path = cfg.checkpoint or os.path.join(cfg.run_dir(), CHECKPOINT_FILE)
    e_users, e_items = read_checkpoint(path)
    if e_users.shape[0] != d.n_users or e_items.shape[0] != d.n_items:
        raise DatasetError(
            f'checkpoint {path} holds {e_users.shape[0]} users and {e_items.shape[0]} items, '
            f'the dataset {d.n_users} and {d.n_items}'
        )
    if e_users.shape[1] != cfg.embed_dim:
        raise ParameterError(f'checkpoint {path} has embedding size {e_users.shape[1]}, not {cfg.embed_dim}')
    g = _graph_for(cfg, d)
    return evaluate_all(final_embeddings(EmbeddingState(e_users, e_items), g, cfg.model_config()), d, k=cfg.top_k)


def _mean_report(reports: Sequence[MetricsReport]) -> MetricsReport:
    return MetricsReport(
        k=reports[0].k,
        precision=float(np.mean([r.precision for r in reports])),
        recall=float(np.mean([r.recall for r in reports])),
        ndcg=float(np.mean([r.ndcg for r in reports])),
        n_eval_users=reports[0].n_eval_users,
    )


def cmd_ablate(cfg: RunConfig) -> AblationTable:
    """
    Train every variant of `ablate_variants` under every seed, average the
    metrics over seeds and compare them with the `lightgcn` and `w_interact`
    runs, whichever of the two were trained.
    """
    d = load_dataset(cfg.resolved_dataset_dir())
    full = build_graph_inputs(d, use_social=True, use_correlation=True, floor=cfg.jaccard_floor)
    seeds = cfg.resolved_seeds()

    per_variant: Dict[str, List[MetricsReport]] = {label: [] for label in cfg.ablate_variants}
    convergence = []
    for seed in seeds:
        for label in cfg.ablate_variants:
            variant = cfg.with_channels(label)
            g = full.with_channels(variant.use_social, variant.use_correlation)
            report, history = _train_run(variant, d, g, seed, run_dir=cfg.run_dir(label, seed))
            per_variant[label].append(report)
            convergence.append((label, seed, history.epochs_to_best, history.best_recall, history.epoch_seconds))

    baselines = [label for label in BASELINE_RUNS if label in per_variant]
    if not baselines:
        baselines = [cfg.ablate_variants[0]]
        logger.warning('none of %s is among the variants; comparing against %s',
                       ', '.join(BASELINE_RUNS), baselines[0])
    table = ablation_report([(label, _mean_report(reports)) for label, reports in per_variant.items()], baselines)

    _write_text(os.path.join(cfg.output_dir, ABLATION_TEXT_FILE), table.to_text())
    _write_text(os.path.join(cfg.output_dir, ABLATION_CSV_FILE), table.to_csv())
    with open(os.path.join(cfg.output_dir, CONVERGENCE_CSV_FILE), 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CONVERGENCE_CSV_HEADER)
        for label, seed, epochs, recall, seconds in convergence:
            writer.writerow([label, seed, epochs, f'{recall:.8f}', f'{seconds:.6f}'])
    return table


def cmd_check(cfg: RunConfig) -> List[CheckResult]:
    return run_checks(seed=cfg.seed)


def _run_preprocess(cfg: RunConfig, args: argparse.Namespace) -> int:
    with output_lock(cfg.output_dir):
        stats = cmd_preprocess(cfg)
    print(stats.to_line())
    return EXIT_OK


def _run_graph(cfg: RunConfig, args: argparse.Namespace) -> int:
    with output_lock(cfg.output_dir):
        g, written = cmd_graph(cfg)
    for path in written:
        logger.info('wrote %s', path)
    if args.stats:
        for name, shape, nnz, density in operator_stats(g):
            print(f'{name} {shape[0]}x{shape[1]} nnz={nnz} density={density:.6g}')
    return EXIT_OK


def _run_train(cfg: RunConfig, args: argparse.Namespace) -> int:
    with output_lock(cfg.output_dir):
        report = cmd_train(cfg)
    print(report.to_text(), end='')
    return EXIT_OK


def _run_evaluate(cfg: RunConfig, args: argparse.Namespace) -> int:
    print(cmd_evaluate(cfg).to_text(), end='')
    return EXIT_OK


def _run_ablate(cfg: RunConfig, args: argparse.Namespace) -> int:
    with output_lock(cfg.output_dir):
        table = cmd_ablate(cfg)
    print(table.to_text(), end='')
    return EXIT_OK


def _run_check(cfg: RunConfig, args: argparse.Namespace) -> int:
    results = cmd_check(cfg)
    for result in results:
        print(result.to_line())
    failed = [result.name for result in results if not result.passed]
    if failed:
        logger.error('failed checks: %s', ', '.join(failed))
        return EXIT_CHECK_FAILED
    return EXIT_OK


COMMANDS = {
    'preprocess': (_run_preprocess, 'filter, select and split raw interactions into a dataset'),
    'graph': (_run_graph, 'build the normalized operators and write them as COO text'),
    'train': (_run_train, 'train one variant and write checkpoint, history and metrics'),
    'evaluate': (_run_evaluate, 'score a saved checkpoint on the test split'),
    'ablate': (_run_ablate, 'train the ablation variants over all seeds and compare them'),
    'check': (_run_check, 'run the verification suite'),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='socgcf',
        allow_abbrev=False,
        description='Social and correlation fused graph-convolution recommender.',
        epilog='Any configuration key may be overridden with --key value.',
    )
    parser.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True
    for name, (_, help_text) in COMMANDS.items():
        sub = commands.add_parser(name, help=help_text, allow_abbrev=False)
        sub.add_argument('--config', help='flat "key = value" configuration file')
        if name == 'graph':
            sub.add_argument('--stats', action='store_true', help='print shape, nnz and density per operator')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)

    handler, _ = COMMANDS[args.command]
    try:
        cfg = build_run_config(args.config, parse_overrides(extra))
        return handler(cfg, args)
    except SocgcfError as e:
        logger.error('%s failed: %s', args.command, e)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
