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


class SocgcfError(Exception):
    """
    Base class of every exception `socgcf` raises on purpose.
    """
    pass


class ParameterError(SocgcfError):
    """
    This exception represents the parameter validation error in any `socgcf`
    function or configuration record.
    """
    pass


class DimensionError(ParameterError):
    """
    This exception is raised, when operand shapes of a matrix product
    or a propagation step do not agree.
    """
    pass


class ParseError(SocgcfError):
    """
    This exception is raised, when `socgcf` is unable to parse a persisted
    artifact: COO text files, checkpoints or configuration files.
    """
    pass


class DatasetError(SocgcfError):
    """
    This exception is raised, when raw data cannot be read or the
    preprocessing pipeline leaves nothing to work with.
    """
    pass


class TrainingError(SocgcfError):
    """
    This exception aborts a training run, e.g. on a non-finite gradient.
    """

    def __init__(self, message: str, epoch: int = None):
        super().__init__(message)
        self.message = message
        self.epoch = epoch


class CheckFailedError(SocgcfError):
    """
    This exception is raised when a verification check violates its tolerance.
    """

    def __init__(self, check_name: str, message: str):
        super().__init__(f'{check_name}: {message}')
        self.check_name = check_name
        self.message = message


class OutputLockedError(SocgcfError):
    """
    This exception is raised when another command holds the output directory.
    """
    pass
