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
import os

import pytest

from socgcf.config import DEFAULT_VARIANTS, RunConfig, build_run_config, read_config_file
from socgcf.exceptions import ParameterError, ParseError
from socgcf.utils import derive_seed
from tests.util import write_config


def test_defaults():
    cfg = build_run_config()
    assert cfg.k_core == 10
    assert cfg.test_fraction == 0.2
    assert cfg.top_k == 20
    assert cfg.agg_weights == (1.0, 1.0, 1.0)
    assert cfg.run_label == 'model_all'
    assert cfg.ablate_variants == DEFAULT_VARIANTS
    assert cfg.resolved_seeds() == (cfg.seed,)


def test_precedence(tmp_path):
    path = write_config(str(tmp_path / 'run.cfg'), lr='0.01', embed_dim='32', use_social='no')
    cfg = build_run_config(path, {'embed-dim': '16'})
    assert cfg.lr == 0.01
    assert cfg.embed_dim == 16
    assert cfg.use_social is False
    assert cfg.run_label == 'w_interact'


def test_config_file_syntax(tmp_path):
    path = str(tmp_path / 'run.cfg')
    with open(path, 'w', encoding='utf-8') as f:
        f.write('# comment\n\nagg_weights = 1, 0.5, 2  # trailing\nseeds = 1,2,3\n')
    assert read_config_file(path) == {'agg_weights': '1, 0.5, 2', 'seeds': '1,2,3'}
    cfg = build_run_config(path)
    assert cfg.agg_weights == (1.0, 0.5, 2.0)
    assert cfg.resolved_seeds() == (1, 2, 3)

    with open(path, 'a', encoding='utf-8') as f:
        f.write('no equals sign here\n')
    with pytest.raises(ParseError):
        read_config_file(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ParseError):
        build_run_config(str(tmp_path / 'absent.cfg'))


@pytest.mark.parametrize(
    'overrides',
    [
        {'learning_rate': '0.1'},
        {'embed_dim': 'many'},
        {'embed_dim': '0'},
        {'use_social': 'perhaps'},
        {'test_fraction': '1.5'},
        {'interactions_format': 'xml'},
        {'ablate_variants': 'w_interact,w_correlation'},
        {'agg_weights': '1,2'},
        {'lr': '-1'},
    ]
)
def test_invalid_values(overrides):
    with pytest.raises(ParameterError):
        build_run_config(overrides=overrides)


def test_ratio_resolution():
    assert build_run_config(overrides={'dataset_name': 'Epinions'}).resolved_ratio() == 11.95
    assert build_run_config(overrides={'dataset_name': 'epinions', 'ratio': '3'}).resolved_ratio() == 3.0
    with pytest.raises(ParameterError):
        build_run_config(overrides={'dataset_name': 'movielens'}).resolved_ratio()


def test_paths():
    cfg = RunConfig(output_dir='out')
    assert cfg.resolved_dataset_dir() == os.path.join('out', 'dataset')
    assert cfg.run_dir() == os.path.join('out', 'model_all')
    assert cfg.run_dir('w_social', 7) == os.path.join('out', 'w_social-seed7')


def test_derived_configs():
    cfg = RunConfig(seed=5, embed_dim=8, n_layers=2, lr=0.02)
    model_cfg, train_cfg = cfg.model_config(), cfg.train_config()
    assert model_cfg.embed_dim == 8
    assert model_cfg.seed == derive_seed(5, 'init')
    assert train_cfg.seed == derive_seed(5, 'sampling')
    assert train_cfg.lr == 0.02
    assert cfg.model_config(6).seed == derive_seed(6, 'init')


def test_with_channels():
    cfg = RunConfig()
    channels = {
        label: (cfg.with_channels(label).use_social, cfg.with_channels(label).use_correlation)
        for label in cfg.ablate_variants
    }
    assert channels == {
        'lightgcn': (False, False),
        'w_interact': (False, True),
        'w_social': (True, False),
        'model_all': (True, True),
    }
    assert all(cfg.with_channels(label).run_label == label for label in channels)
    with pytest.raises(ParameterError):
        cfg.with_channels('w_correlation')
