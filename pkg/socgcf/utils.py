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

import logging
import os
from contextlib import contextmanager
from typing import Union

import numpy as np

from .constants import LOCK_FILE_NAME, THREADS_ENV
from .exceptions import OutputLockedError, ParameterError

logger = logging.getLogger(__name__)

_TRUE_WORDS = {'true', 'yes', '1', 'on'}
_FALSE_WORDS = {'false', 'no', '0', 'off'}
_SEED_MODULUS = 2 ** 64


def derive_seed(root: int, label: str) -> int:
    """
    Fan a root seed out to an independent, reproducible component seed.
    The label's UTF-8 bytes form the spawn key, so distinct labels never
    share a stream.

    :param root: root seed of the run, taken modulo 2⁶⁴,
    :param label: component label, e.g. `init` or `sampling`,
    :return: 64-bit component seed.
    """
    seq = np.random.SeedSequence(root % _SEED_MODULUS, spawn_key=tuple(label.encode('utf-8')))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def thread_count() -> int:
    """
    Internal parallelism cap, read from the `SOCGCF_THREADS` environment
    variable. Defaults to 1.
    """
    value = os.getenv(THREADS_ENV)
    if value is None or value.strip() == '':
        return 1
    try:
        threads = int(value)
    except ValueError:
        raise ParameterError(f'{THREADS_ENV} must be a positive integer, got {value!r}')
    if threads < 1:
        raise ParameterError(f'{THREADS_ENV} must be a positive integer, got {value!r}')
    return threads


def parse_bool(value: Union[str, bool, int]) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return bool(value)
    word = str(value).strip().lower()
    if word in _TRUE_WORDS:
        return True
    if word in _FALSE_WORDS:
        return False
    raise ParameterError(f'cannot interpret {value!r} as a boolean')


@contextmanager
def output_lock(directory: str):
    """
    Hold the output directory for the duration of a command by means
    of a presence file.

    :param directory: output directory, created if missing,
    :raise OutputLockedError: when the presence file already exists.
    """
    os.makedirs(directory, exist_ok=True)
    lock_path = os.path.join(directory, LOCK_FILE_NAME)
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise OutputLockedError(
            f'output directory {directory} is in use (remove {lock_path} if no other command runs)'
        )
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield directory
    finally:
        try:
            os.remove(lock_path)
        except OSError:
            logger.warning('could not remove lock file %s', lock_path)
