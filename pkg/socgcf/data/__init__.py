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

from .raw import RawInteraction, load_interactions, load_social_edges, FORMAT_CANONICAL, FORMAT_ADJACENCY
from .dataset import Dataset, DatasetStats, dataset_stats, save_dataset, load_dataset
from .preprocess import (
    dedupe_interactions, kcore_filter_items, select_users_by_jaccard, temporal_split, rebuild_social, preprocess,
)
