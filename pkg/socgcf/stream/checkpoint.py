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
Embedding checkpoints: the `SOCGCF1` magic line, an `n m d` decimal header
line, then the user block and the item block as little-endian 32-bit
floats, row-major.
"""

from io import BytesIO
from typing import Optional, Tuple, Union

import numpy as np

from socgcf.constants import CHECKPOINT_MAGIC
from socgcf.exceptions import ParseError

_FLOAT = np.dtype('<f4')


class CheckpointStream:
    """
    A thin byte stream around the checkpoint layout.
    """
    def __init__(self, buf: Optional[Union[bytes, bytearray, memoryview]] = None):
        """
        :param buf: buffer to parse, optional. If not passed, creates empty BytesIO.
        """
        self.stream = BytesIO(buf) if buf else BytesIO()

    def read(self, size: int) -> bytes:
        return self.stream.read(size)

    def readline(self) -> bytes:
        return self.stream.readline()

    def write(self, buf) -> int:
        return self.stream.write(buf)

    def tell(self) -> int:
        return self.stream.tell()

    def getvalue(self) -> bytes:
        return self.stream.getvalue()

    def write_header(self, n: int, m: int, d: int):
        self.write(CHECKPOINT_MAGIC + b'\n')
        self.write(f'{n} {m} {d}\n'.encode('ascii'))

    def read_header(self) -> Tuple[int, int, int]:
        magic = self.readline().rstrip(b'\n')
        if magic != CHECKPOINT_MAGIC:
            raise ParseError(f'not a checkpoint: magic {magic[:16]!r}')
        line = self.readline()
        try:
            n, m, d = (int(x) for x in line.decode('ascii').split())
        except (UnicodeDecodeError, ValueError):
            raise ParseError(f'malformed checkpoint header {line[:32]!r}')
        if min(n, m, d) < 0:
            raise ParseError(f'negative checkpoint dimensions {n} {m} {d}')
        return n, m, d

    def write_block(self, block: np.ndarray):
        self.write(np.ascontiguousarray(block, dtype=_FLOAT).tobytes())

    def read_block(self, rows: int, cols: int) -> np.ndarray:
        size = rows * cols * _FLOAT.itemsize
        buf = self.read(size)
        if len(buf) != size:
            raise ParseError(f'truncated checkpoint: expected {size} payload bytes, got {len(buf)}')
        return np.frombuffer(buf, dtype=_FLOAT).reshape(rows, cols).astype(np.float64)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.stream.close()


def write_checkpoint(e_users: np.ndarray, e_items: np.ndarray, path: str):
    """
    Persist the two embedding blocks.

    :param e_users: n×d user block,
    :param e_items: m×d item block,
    :param path: destination file.
    """
    if e_users.shape[1] != e_items.shape[1]:
        raise ParseError('user and item blocks disagree in embedding size')
    with CheckpointStream() as stream:
        stream.write_header(e_users.shape[0], e_items.shape[0], e_users.shape[1])
        stream.write_block(e_users)
        stream.write_block(e_items)
        payload = stream.getvalue()
    with open(path, 'wb') as f:
        f.write(payload)


def read_checkpoint(path: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    Load embedding blocks, widened back to 64-bit floats.

    :param path: checkpoint file,
    :return: (user block, item block).
    """
    try:
        with open(path, 'rb') as f:
            payload = f.read()
    except OSError as e:
        raise ParseError(f'cannot read checkpoint {path}: {e}') from e

    with CheckpointStream(payload) as stream:
        n, m, d = stream.read_header()
        e_users = stream.read_block(n, d)
        e_items = stream.read_block(m, d)
        if stream.tell() != len(payload):
            raise ParseError(f'checkpoint {path} has {len(payload) - stream.tell()} trailing bytes')
    return e_users, e_items
