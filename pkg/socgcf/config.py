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
Run configuration: defaults declared on :class:`RunConfig`, a flat
`key = value` file, and `--key value` command-line overrides, in
increasing order of precedence.
"""

import os
from typing import Dict, Mapping, Optional, Tuple

import attr

from .constants import (
    DATASET_RATIOS, DEFAULT_EMBED_DIM, DEFAULT_K_CORE, DEFAULT_N_LAYERS, DEFAULT_TEST_FRACTION, DEFAULT_TOP_K,
    JACCARD_FLOOR, RUN_LABELS, TEXT_ENCODING,
)
from .data import FORMAT_ADJACENCY, FORMAT_CANONICAL
from .exceptions import ParameterError, ParseError
from .model import ModelConfig
from .trainer import TrainConfig
from .utils import derive_seed, parse_bool

DEFAULT_VARIANTS = ('lightgcn', 'w_interact', 'w_social', 'model_all')


def _optional_str(value) -> Optional[str]:
    if value is None or str(value).strip().lower() in ('', 'none'):
        return None
    return str(value)


def _optional_float(value) -> Optional[float]:
    text = _optional_str(value)
    return None if text is None else float(text)


def _str_tuple(value) -> Tuple[str, ...]:
    if isinstance(value, str):
        return tuple(part.strip() for part in value.split(',') if part.strip())
    return tuple(str(part) for part in value)


def _int_tuple(value) -> Tuple[int, ...]:
    return tuple(int(part) for part in _str_tuple(value))


def _float_triple(value) -> Tuple[float, ...]:
    return tuple(float(part) for part in _str_tuple(value))


def _choice(*options):
    def validator(_, attrib, value):
        if value not in options:
            raise ParameterError(f"'{attrib.name}' must be one of {options}, got {value!r}")
    return validator


def _variants(_, attrib, value):
    known = set(RUN_LABELS.values())
    unknown = [v for v in value if v not in known]
    if unknown or not value:
        raise ParameterError(f"'{attrib.name}' must list run labels out of {sorted(known)}, got {value!r}")


def _fraction(_, attrib, value):
    if not 0 < value < 1:
        raise ParameterError(f"'{attrib.name}' must lie in (0, 1), got {value!r}")


def _at_least_one(_, attrib, value):
    if value < 1:
        raise ParameterError(f"'{attrib.name}' must be at least 1, got {value!r}")


@attr.s(frozen=True)
class RunConfig:
    # data
    interactions = attr.ib(kw_only=True, default=None, converter=_optional_str)
    social = attr.ib(kw_only=True, default=None, converter=_optional_str)
    interactions_format = attr.ib(kw_only=True, default=FORMAT_CANONICAL,
                                  validator=_choice(FORMAT_CANONICAL, FORMAT_ADJACENCY))
    dataset_name = attr.ib(kw_only=True, default=None, converter=_optional_str)

    # preprocessing
    k_core = attr.ib(kw_only=True, default=DEFAULT_K_CORE, converter=int, validator=_at_least_one)
    ratio = attr.ib(kw_only=True, default=None, converter=_optional_float)
    test_fraction = attr.ib(kw_only=True, default=DEFAULT_TEST_FRACTION, converter=float, validator=_fraction)

    # model
    embed_dim = attr.ib(kw_only=True, default=DEFAULT_EMBED_DIM, converter=int)
    n_layers = attr.ib(kw_only=True, default=DEFAULT_N_LAYERS, converter=int)
    agg_weights = attr.ib(kw_only=True, default=(1.0, 1.0, 1.0), converter=_float_triple)
    use_social = attr.ib(kw_only=True, default=True, converter=parse_bool)
    use_correlation = attr.ib(kw_only=True, default=True, converter=parse_bool)
    jaccard_floor = attr.ib(kw_only=True, default=JACCARD_FLOOR, converter=float)

    # training
    lr = attr.ib(kw_only=True, default=1e-3, converter=float)
    l2_lambda = attr.ib(kw_only=True, default=1e-4, converter=float)
    batch_size = attr.ib(kw_only=True, default=2048, converter=int)
    max_epochs = attr.ib(kw_only=True, default=1500, converter=int)
    eval_every = attr.ib(kw_only=True, default=10, converter=int)
    patience = attr.ib(kw_only=True, default=5, converter=int)
    adam_beta1 = attr.ib(kw_only=True, default=0.9, converter=float)
    adam_beta2 = attr.ib(kw_only=True, default=0.999, converter=float)
    adam_eps = attr.ib(kw_only=True, default=1e-8, converter=float)
    top_k = attr.ib(kw_only=True, default=DEFAULT_TOP_K, converter=int, validator=_at_least_one)

    # outputs and randomness
    output_dir = attr.ib(kw_only=True, default='runs', converter=str)
    dataset_dir = attr.ib(kw_only=True, default=None, converter=_optional_str)
    checkpoint = attr.ib(kw_only=True, default=None, converter=_optional_str)
    seed = attr.ib(kw_only=True, default=2024, converter=int)
    seeds = attr.ib(kw_only=True, default=(), converter=_int_tuple)
    ablate_variants = attr.ib(kw_only=True, default=DEFAULT_VARIANTS, converter=_str_tuple, validator=_variants)

    def __attrs_post_init__(self):
        # surface invalid model and training values at load time
        self.model_config()
        self.train_config()

    @classmethod
    def keys(cls) -> Tuple[str, ...]:
        return tuple(a.name for a in attr.fields(cls))

    @property
    def run_label(self) -> str:
        return RUN_LABELS[(self.use_social, self.use_correlation)]

    def resolved_ratio(self) -> float:
        if self.ratio is not None:
            return self.ratio
        if self.dataset_name and self.dataset_name.lower() in DATASET_RATIOS:
            return DATASET_RATIOS[self.dataset_name.lower()]
        raise ParameterError(
            f'no ratio given and dataset name {self.dataset_name!r} is not one of {sorted(DATASET_RATIOS)}'
        )

    def resolved_dataset_dir(self) -> str:
        return self.dataset_dir or os.path.join(self.output_dir, 'dataset')

    def run_dir(self, label: Optional[str] = None, seed: Optional[int] = None) -> str:
        name = label or self.run_label
        if seed is not None:
            name = f'{name}-seed{seed}'
        return os.path.join(self.output_dir, name)

    def resolved_seeds(self) -> Tuple[int, ...]:
        return self.seeds or (self.seed,)

    def model_config(self, seed: Optional[int] = None) -> ModelConfig:
        root = self.seed if seed is None else seed
        return ModelConfig(
            embed_dim=self.embed_dim,
            n_layers=self.n_layers,
            agg_weights=self.agg_weights,
            seed=derive_seed(root, 'init'),
        )

    def train_config(self, seed: Optional[int] = None) -> TrainConfig:
        root = self.seed if seed is None else seed
        return TrainConfig(
            lr=self.lr,
            l2_lambda=self.l2_lambda,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            eval_every=self.eval_every,
            patience=self.patience,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            adam_eps=self.adam_eps,
            seed=derive_seed(root, 'sampling'),
        )

    def with_channels(self, label: str) -> 'RunConfig':
        for (use_social, use_correlation), name in RUN_LABELS.items():
            if name == label:
                return attr.evolve(self, use_social=use_social, use_correlation=use_correlation)
        raise ParameterError(f'unknown run label {label!r}')


def read_config_file(path: str) -> Dict[str, str]:
    """
    Parse a flat `key = value` file. `#` starts a comment; blank lines are
    ignored.

    :raise ParseError: on unreadable files or lines without `=`.
    """
    try:
        with open(path, 'r', encoding=TEXT_ENCODING) as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise ParseError(f'cannot read config {path}: {e}') from e

    values = {}
    for line_no, line in enumerate(lines, start=1):
        text = line.split('#', 1)[0].strip()
        if not text:
            continue
        if '=' not in text:
            raise ParseError(f'{path}:{line_no}: expected "key = value", got {line!r}')
        key, value = (part.strip() for part in text.split('=', 1))
        values[key.replace('-', '_')] = value
    return values


def build_run_config(path: Optional[str] = None, overrides: Optional[Mapping[str, str]] = None) -> RunConfig:
    """
    Merge defaults, the config file and command-line overrides.

    :param path: config file, optional,
    :param overrides: already parsed `--key value` pairs,
    :return: run configuration,
    :raise ParameterError: on unknown keys or invalid values.
    """
    merged: Dict[str, str] = {}
    if path:
        merged.update(read_config_file(path))
    merged.update({key.replace('-', '_'): value for key, value in (overrides or {}).items()})

    unknown = sorted(set(merged) - set(RunConfig.keys()))
    if unknown:
        raise ParameterError(f'unknown configuration keys: {", ".join(unknown)}')
    try:
        return RunConfig(**merged)
    except (TypeError, ValueError) as e:
        raise ParameterError(f'invalid configuration value: {e}') from e
