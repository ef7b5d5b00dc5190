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
"""Run-length encoded strings over an exact integer alphabet."""

from typing import Iterable, NamedTuple, Sequence, Tuple, Union

import chex
import numpy as np

from dyndtw._src import base


ArrayLike = Union[np.ndarray, Sequence[int]]

_FLAT_HEADER = "# format: flat"
_RLE_HEADER = "# format: rle"
# Longest run a sequence file may declare.
_MAX_EXPONENT = 2**31 - 1


class Run(NamedTuple):
  """A maximal block of equal characters."""
  char: int
  exponent: int


@chex.dataclass(frozen=True)
class RleString:
  """A sequence stored both flat and as maximal runs.

  flat: `[length]` the characters, as `int64`.
  runs: `(size,)` the maximal runs in order.
  run_offsets: `[size, 2]` the 1-based first and last position of every run,
    i.e. `(i_T, i_B)` for a run of `A` and `(j_L, j_R)` for a run of `B`.
  """
  flat: chex.Array
  runs: Tuple[Run, ...]
  run_offsets: chex.Array

  @property
  def length(self) -> int:
    return int(self.flat.shape[0])

  @property
  def size(self) -> int:
    """The number of runs, i.e. the RLE size."""
    return len(self.runs)

  def char_at(self, position: int) -> int:
    """Returns the character at a 1-based position."""
    return int(self.flat[position - 1])

  def run_of(self, position: int) -> int:
    """Returns the 0-based index of the run holding a 1-based position."""
    return int(np.searchsorted(self.run_offsets[:, 1], position))

  def splice(self, start: int, removed: int,
             inserted: ArrayLike = ()) -> "RleString":
    """Returns the string with `removed` characters at `start` replaced."""
    inserted = np.asarray(inserted, dtype=base.COST_DTYPE).reshape(-1)
    return rle_encode(np.concatenate([
        self.flat[:start - 1], inserted, self.flat[start - 1 + removed:]]))


def check_character(value) -> int:
  """Validates one character and returns it as a Python `int`."""
  if isinstance(value, (bool, np.bool_)) or not isinstance(
      value, (int, np.integer)):
    raise base.CharacterOutOfRangeError(
        f"character {value!r} is not an integer")
  value = int(value)
  if abs(value) > base.CHARACTER_BOUND:
    raise base.CharacterOutOfRangeError(
        f"character {value} exceeds the bound 2**20")
  return value


def _as_characters(flat: ArrayLike) -> np.ndarray:
  array = np.asarray(flat)
  if array.size == 0:
    raise base.EmptyInputError("a sequence needs at least one character")
  if array.ndim != 1 or array.dtype.kind not in "iu":
    raise base.CharacterOutOfRangeError(
        f"characters must be a flat integer array, got {array.dtype}")
  array = array.astype(base.COST_DTYPE)
  if int(np.abs(array).max()) > base.CHARACTER_BOUND:
    raise base.CharacterOutOfRangeError(
        "a character exceeds the bound 2**20")
  return array


def rle_encode(flat: ArrayLike) -> RleString:
  """Encodes a non-empty integer sequence into maximal runs.

  Args:
    flat: the characters of the sequence.

  Returns:
    An `RleString` whose adjacent runs have distinct characters.

  Raises:
    EmptyInputError: `flat` is empty.
    CharacterOutOfRangeError: a character is not an integer or is too large.
  """
  array = _as_characters(flat)
  starts = np.concatenate([[0], np.flatnonzero(np.diff(array)) + 1])
  ends = np.concatenate([starts[1:], [array.shape[0]]])
  runs = tuple(
      Run(char=int(array[s]), exponent=int(e - s))
      for s, e in zip(starts, ends))
  offsets = np.stack([starts + 1, ends], axis=1).astype(base.COST_DTYPE)
  array.setflags(write=False)
  offsets.setflags(write=False)
  return RleString(flat=array, runs=runs, run_offsets=offsets)


def rle_decode(r: RleString) -> np.ndarray:
  """Expands the runs of `r` back into a flat array."""
  chars = np.array([run.char for run in r.runs], dtype=base.COST_DTYPE)
  exponents = np.array([run.exponent for run in r.runs], dtype=np.int64)
  return np.repeat(chars, exponents)


def rle_from_runs(runs: Iterable[Tuple[int, int]]) -> RleString:
  """Builds an `RleString` from `(char, exponent)` pairs.

  Adjacent pairs with equal characters are merged into one maximal run.

  Args:
    runs: the `(char, exponent)` pairs, every exponent at least 1.

  Returns:
    The encoded string.
  """
  runs = list(runs)
  for char, exponent in runs:
    check_character(char)
    if int(exponent) < 1:
      raise base.DynDtwError(f"run exponent must be positive, got {exponent}")
  if not runs:
    raise base.EmptyInputError("a sequence needs at least one run")
  chars = np.array([c for c, _ in runs], dtype=base.COST_DTYPE)
  exponents = np.array([e for _, e in runs], dtype=np.int64)
  return rle_encode(np.repeat(chars, exponents))


def _parse_int(token: str, line: int) -> int:
  try:
    return int(token)
  except ValueError:
    raise base.ParseError(f"not an integer: {token!r}", line) from None


def _parse_char(token: str, line: int) -> int:
  value = _parse_int(token, line)
  try:
    return check_character(value)
  except base.CharacterOutOfRangeError as e:
    raise base.ParseError(str(e), line) from None


def _parse_exponent(token: str, line: int) -> int:
  value = _parse_int(token, line)
  if not 1 <= value <= _MAX_EXPONENT:
    raise base.ParseError(
        f"exponent must lie in [1, {_MAX_EXPONENT}], got {value}", line)
  return value


def parse_sequence(text: str) -> RleString:
  """Parses the text of a sequence file.

  The flat form lists whitespace separated integers; the RLE form has one
  `char exponent` pair per line. A leading `# format: flat` or
  `# format: rle` comment selects the form, otherwise the RLE form is chosen
  when the first non-comment line holds exactly two integers.

  Args:
    text: the file contents.

  Returns:
    The parsed string.

  Raises:
    ParseError: a token is not an integer, a character or an exponent is
      out of range, or an RLE line is malformed.
    EmptyInputError: the file holds no characters.
  """
  rle = None
  lines = []
  for number, raw in enumerate(text.splitlines(), start=1):
    stripped = raw.strip()
    if stripped.startswith("#"):
      if rle is None and not lines:
        header = " ".join(stripped.split())
        if header == _RLE_HEADER:
          rle = True
        elif header == _FLAT_HEADER:
          rle = False
      continue
    if stripped:
      lines.append((number, stripped.split()))
  if not lines:
    raise base.EmptyInputError("the sequence file holds no characters")
  if rle is None:
    rle = len(lines[0][1]) == 2

  if not rle:
    return rle_encode(np.array(
        [_parse_char(t, number) for number, tokens in lines for t in tokens],
        dtype=np.int64))

  runs = []
  for number, tokens in lines:
    if len(tokens) != 2:
      raise base.ParseError("expected `char exponent`", number)
    runs.append((_parse_char(tokens[0], number),
                 _parse_exponent(tokens[1], number)))
  return rle_from_runs(runs)


def read_sequence_file(path: str) -> RleString:
  """Reads and parses a UTF-8 sequence file.

  Raises:
    ParseError: the file is not UTF-8 text or its contents are malformed.
    OSError: the file cannot be read.
  """
  try:
    with open(path, encoding="utf-8") as f:
      text = f.read()
  except UnicodeDecodeError as e:
    raise base.ParseError(f"{path} is not UTF-8 text: {e.reason}") from None
  return parse_sequence(text)


def format_sequence(r: RleString, rle: bool = False) -> str:
  """Formats `r` as sequence file text, newline terminated."""
  if rle:
    body = [f"{run.char} {run.exponent}" for run in r.runs]
    return "\n".join([_RLE_HEADER] + body) + "\n"
  return _FLAT_HEADER + "\n" + " ".join(str(int(c)) for c in r.flat) + "\n"
