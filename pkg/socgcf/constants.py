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
This module contains some constants, used internally throughout the engine.
"""

__all__ = [
    'DEFAULT_K_CORE', 'DEFAULT_TEST_FRACTION', 'DEFAULT_EMBED_DIM', 'DEFAULT_N_LAYERS',
    'DEFAULT_TOP_K', 'INIT_STD', 'JACCARD_FLOOR', 'CLASSIFY_BOUNDS', 'CLASSIFY_VALUES',
    'DATASET_RATIOS', 'CHECKPOINT_MAGIC', 'CHECKPOINT_BYTE_ORDER', 'TEXT_ENCODING',
    'THREADS_ENV', 'LOCK_FILE_NAME', 'HISTORY_CSV_HEADER', 'RUN_LABELS', 'LIGHTGCN_RUN', 'INTERACT_RUN',
]

DEFAULT_K_CORE = 10
DEFAULT_TEST_FRACTION = 0.2
DEFAULT_EMBED_DIM = 64
DEFAULT_N_LAYERS = 3
DEFAULT_TOP_K = 20

INIT_STD = 0.1

# lower bounds of the correlation buckets and the value assigned to each;
# everything below the first bound maps to 0.0
JACCARD_FLOOR = 0.1
CLASSIFY_BOUNDS = (0.1, 0.4, 0.6, 0.9)
CLASSIFY_VALUES = (0.0, 0.005, 0.05, 0.5, 1.0)

# items-per-user ratios
DATASET_RATIOS = {
    'gowalla': 1.44,
    'librarything': 1.60,
    'ciao': 18.78,
    'epinions': 11.95,
}

CHECKPOINT_MAGIC = b'SOCGCF1'
CHECKPOINT_BYTE_ORDER = 'little'
TEXT_ENCODING = 'utf-8'

THREADS_ENV = 'SOCGCF_THREADS'
LOCK_FILE_NAME = '.socgcf.lock'

HISTORY_CSV_HEADER = ('epoch', 'loss', 'recall20', 'precision20', 'ndcg20')

# (use_social, use_correlation) -> run label; `lightgcn` propagates over R alone,
# `w_interact` drops only the social matrix
RUN_LABELS = {
    (False, False): 'lightgcn',
    (False, True): 'w_interact',
    (True, False): 'w_social',
    (True, True): 'model_all',
}

LIGHTGCN_RUN = 'lightgcn'
INTERACT_RUN = 'w_interact'
