# Copyright 2024 The dyndtw Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Core aliases, constants and errors used in dyndtw."""

from typing import Optional, Tuple

import numpy as np


# Characters are exact signed integers with |c| <= CHARACTER_BOUND, so every
# squared local cost fits in 42 bits and every path cost fits in an int64.
CHARACTER_BOUND = 2**20
DEFAULT_ALPHABET_SIZE = 26
# Constant of the soft `cells_touched <= C * (m + n + chg)` regression guard.
WORK_BOUND_CONSTANT = 16
# Timed regions are repeated until at least this much time has accumulated.
MIN_TIMED_NS = 1_000_000

Character = int
Cost = int
# 1-based `(i, j)` coordinates of a cell of the DP table.
Coordinate = Tuple[int, int]
# Handle of a cell in the sparse table arena.
Handle = int
NO_LINK: Handle = -1

COST_DTYPE = np.int64


class DynDtwError(ValueError):
  """Base class of all errors raised by dyndtw."""


class EmptyInputError(DynDtwError):
  """A sequence has no characters."""


class CharacterOutOfRangeError(DynDtwError):
  """A character is not an integer or exceeds `CHARACTER_BOUND`."""


class NotABoundaryCellError(DynDtwError):
  """A cell is not stored in the sparse table."""


class WouldEmptyStringError(DynDtwError):
  """An edit would delete every character of `B`."""


class PositionOutOfRangeError(DynDtwError):
  """An edit position or extent lies outside of `B`."""


class NotARunError(DynDtwError):
  """A run-wise edit names a segment that is not one repeated character."""


class InfeasibleSpecError(DynDtwError):
  """An instance specification cannot be satisfied."""


class BoundViolatedError(DynDtwError):
  """A measured change count is below its proven lower bound."""


class VerificationError(DynDtwError):
  """The sparse table disagrees with the dense oracle."""


class ParseError(DynDtwError):
  """Malformed sequence or script text.

  Attributes:
    line: the 1-based line number of the offending line, if known.
  """

  def __init__(self, message: str, line: Optional[int] = None):
    if line is not None:
      message = f"line {line}: {message}"
    super().__init__(message)
    self.line = line


class ScriptError(ParseError):
  """Malformed or failing edit script line."""
