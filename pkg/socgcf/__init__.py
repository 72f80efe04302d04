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
`socgcf` trains and evaluates a linear graph-convolution recommender that
fuses user-item interactions, a Jaccard-derived user-correlation matrix and
a social friendship matrix.
"""

from socgcf.data import Dataset, preprocess
from socgcf.graph import GraphInputs, build_graph_inputs
from socgcf.model import ModelConfig, EmbeddingState, forward, init_embeddings
from socgcf.trainer import TrainConfig, train
from socgcf.evaluator import MetricsReport, evaluate_all

__version__ = '0.1.0'
