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
Raw interaction and social-edge readers.

Two interaction layouts are understood:

 * `canonical` − one `user item timestamp [rating]` record per line,
 * `adjacency` − `user item1 item2 ...` per line; each record gets its
   position on the line as a synthetic timestamp.

Blank lines and lines starting with `#` are skipped. Malformed lines are
reported with their line numbers and skipped.
"""

import logging
from typing import List, Optional, Tuple

import attr

from socgcf.constants import TEXT_ENCODING
from socgcf.exceptions import DatasetError, ParameterError

logger = logging.getLogger(__name__)

FORMAT_CANONICAL = 'canonical'
FORMAT_ADJACENCY = 'adjacency'

# report at most this many malformed lines individually
_MAX_REPORTED = 20


@attr.s(frozen=True, slots=True)
class RawInteraction:
    user_id = attr.ib(type=str)
    item_id = attr.ib(type=str)
    timestamp = attr.ib(type=int)
    #: kept for reference only, interactions are treated as implicit
    rating = attr.ib(type=Optional[float], default=None)


def _read_lines(path: str) -> List[str]:
    try:
        with open(path, 'r', encoding=TEXT_ENCODING) as f:
            return f.read().splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise DatasetError(f'cannot read {path}: {e}') from e


def _report_malformed(path: str, malformed: List[Tuple[int, str]]):
    for line_no, reason in malformed[:_MAX_REPORTED]:
        logger.warning('%s:%d: %s', path, line_no, reason)
    if len(malformed) > _MAX_REPORTED:
        logger.warning('%s: %d more malformed lines not shown', path, len(malformed) - _MAX_REPORTED)


def _parse_canonical(parts: List[str]) -> RawInteraction:
    if len(parts) not in (3, 4):
        raise ValueError(f'expected 3 or 4 fields, got {len(parts)}')
    rating = float(parts[3]) if len(parts) == 4 else None
    return RawInteraction(parts[0], parts[1], int(parts[2]), rating)


def load_interactions(path: str, fmt: str = FORMAT_CANONICAL) -> List[RawInteraction]:
    """
    Parse raw interactions in file order.

    :param path: interaction file,
    :param fmt: `canonical` or `adjacency`,
    :return: list of raw interactions,
    :raise DatasetError: when the file cannot be read or holds no valid record.
    """
    if fmt not in (FORMAT_CANONICAL, FORMAT_ADJACENCY):
        raise ParameterError(f'unknown interaction format {fmt!r}')

    records, malformed = [], []
    for line_no, line in enumerate(_read_lines(path), start=1):
        parts = line.split()
        if not parts or parts[0].startswith('#'):
            continue
        if fmt == FORMAT_CANONICAL:
            try:
                records.append(_parse_canonical(parts))
            except ValueError as e:
                malformed.append((line_no, str(e)))
        else:
            if len(parts) < 2:
                malformed.append((line_no, 'user without items'))
                continue
            user = parts[0]
            records.extend(RawInteraction(user, item, pos) for pos, item in enumerate(parts[1:]))

    _report_malformed(path, malformed)
    if not records:
        raise DatasetError(f'{path}: zero valid records')
    logger.info('loaded %d interactions from %s (%d malformed lines)', len(records), path, len(malformed))
    return records


def load_social_edges(path: str) -> List[Tuple[str, str]]:
    """
    Parse a social file holding one `u v` pair per line. Extra fields
    (e.g. trust values) are ignored.

    :param path: social file,
    :return: list of (user_id, user_id) pairs in file order.
    """
    edges, malformed = [], []
    for line_no, line in enumerate(_read_lines(path), start=1):
        parts = line.split()
        if not parts or parts[0].startswith('#'):
            continue
        if len(parts) < 2:
            malformed.append((line_no, 'expected "u v"'))
            continue
        edges.append((parts[0], parts[1]))

    _report_malformed(path, malformed)
    logger.info('loaded %d social edges from %s', len(edges), path)
    return edges
