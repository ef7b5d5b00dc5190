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
"""Instance generators: random strings and worst-case families."""

from typing import List, Optional, Sequence, Tuple

import chex
import numpy as np

from dyndtw._src import base
from dyndtw._src import core_types
from dyndtw._src import dynamic_update


@chex.dataclass(frozen=True)
class RandomSpec:
  """A random string of exact length and RLE size.

  length: the number of characters `m`.
  rle_size: the number of maximal runs `M`.
  alphabet_size: characters are drawn from `1..alphabet_size`.
  seed: seeds the generator when none is passed explicitly.
  """
  length: int
  rle_size: int
  alphabet_size: int = base.DEFAULT_ALPHABET_SIZE
  seed: int = 0


@chex.dataclass(frozen=True)
class AdversarialSpec:
  """A pair whose first-character deletion changes many cells.

  a_runs: `M`, the number of runs of `A`; run characters strictly decrease.
  b_runs: `N`, the number of runs of `B`; run characters strictly increase.
  k: the exponent of every run of `A`.
  l: the exponent of every run of `B`.
  """
  a_runs: int
  b_runs: int
  k: int = 1
  l: int = 1


def gen_random(
    spec: RandomSpec,
    rng: Optional[np.random.Generator] = None) -> core_types.RleString:
  """Draws a string of exactly the requested length and RLE size.

  Run lengths come from `M - 1` distinct cut points among the `m - 1` gaps.
  Each run character is uniform over the alphabet minus the character of the
  previous run, so adjacent runs never merge.

  Args:
    spec: the shape of the string.
    rng: the generator to draw from; defaults to one seeded by `spec.seed`.

  Returns:
    The generated string.

  Raises:
    InfeasibleSpecError: the shape cannot be realised.
  """
  m, size, alphabet = spec.length, spec.rle_size, spec.alphabet_size
  if m < 1 or size < 1 or size > m:
    raise base.InfeasibleSpecError(
        f"cannot split {m} characters into {size} runs")
  if alphabet < 1 or (size >= 2 and alphabet < 2):
    raise base.InfeasibleSpecError(
        f"{size} runs need at least two characters, got {alphabet}")
  if alphabet > base.CHARACTER_BOUND:
    raise base.InfeasibleSpecError(f"alphabet of {alphabet} is too large")
  if rng is None:
    rng = np.random.default_rng(spec.seed)
  cuts = np.sort(rng.choice(np.arange(1, m), size=size - 1, replace=False))
  exponents = np.diff(np.concatenate([[0], cuts, [m]]))
  first = rng.integers(0, alphabet)
  steps = rng.integers(1, alphabet, size=size - 1) if size > 1 else []
  chars = (first + np.concatenate([[0], np.cumsum(steps)])) % alphabet + 1
  return core_types.rle_encode(np.repeat(chars.astype(np.int64), exponents))


def gen_adversarial(
    spec: AdversarialSpec) -> Tuple[core_types.RleString, core_types.RleString]:
  """Builds the pair `A = A_1^k ... A_M^k`, `B = B_1^l ... B_N^l`.

  `A_I = M - I + N + 1` and `B_J = J`, so the runs of `A` decrease, the runs
  of `B` increase and the last run of `A` lies above the last run of `B`.

  Args:
    spec: the run counts and exponents.

  Returns:
    `(A, B)`.

  Raises:
    InfeasibleSpecError: a count or exponent is not positive.
    CharacterOutOfRangeError: the characters do not fit the bound.
  """
  if min(spec.a_runs, spec.b_runs, spec.k, spec.l) < 1:
    raise base.InfeasibleSpecError(f"counts must be positive: {spec}")
  if spec.a_runs + spec.b_runs > base.CHARACTER_BOUND:
    raise base.CharacterOutOfRangeError(
        f"{spec.a_runs + spec.b_runs} ordered characters exceed the bound")
  a_chars = spec.a_runs - np.arange(1, spec.a_runs + 1) + spec.b_runs + 1
  b_chars = np.arange(1, spec.b_runs + 1)
  return (core_types.rle_encode(np.repeat(a_chars, spec.k)),
          core_types.rle_encode(np.repeat(b_chars, spec.l)))


def gen_prepend_script(a: core_types.RleString, b: core_types.RleString,
                       steps: int) -> List[dynamic_update.EditOp]:
  """Returns `steps` insertions at the left end of `B`.

  The `t`-th insertion uses `B[1] - t`, so every step prepends a character
  smaller than all characters of `B` at that time.

  Args:
    a: the string `A` of an adversarial pair with unit exponents.
    b: the string `B` of that pair.
    steps: the number of insertions.

  Returns:
    The script.

  Raises:
    InfeasibleSpecError: a string has a run longer than one character.
    CharacterOutOfRangeError: a character would exceed the bound.
  """
  if a.size != a.length or b.size != b.length:
    raise base.InfeasibleSpecError("the prepend script needs unit exponents")
  first = b.char_at(1)
  return [dynamic_update.insert(1, core_types.check_character(first - t))
          for t in range(1, steps + 1)]


def changed_cells_lower_bound(m: int, n: int, a_runs: int,
                              b_runs: int) -> float:
  """The lower bound `((n-2)(M-1) + (m-2)(N-1)) / 2` on changed cells."""
  return lower_bound_numerator(m, n, a_runs, b_runs) / 2


def lower_bound_numerator(m: int, n: int, a_runs: int, b_runs: int) -> int:
  return (n - 2) * (a_runs - 1) + (m - 2) * (b_runs - 1)


def meets_lower_bound(chg: int, m: int, n: int, a_runs: int,
                      b_runs: int) -> bool:
  return 2 * chg >= lower_bound_numerator(m, n, a_runs, b_runs)


def random_edit(
    rng: np.random.Generator,
    b: core_types.RleString,
    kinds: Sequence[dynamic_update.EditKind] = dynamic_update.SINGLE_KINDS,
    alphabet_size: int = base.DEFAULT_ALPHABET_SIZE) -> dynamic_update.EditOp:
  """Draws a uniformly positioned single-character edit of `B`.

  Deletions are left out when `B` has a single character.
  """
  n = b.length
  kinds = [k for k in kinds
           if not (k == dynamic_update.EditKind.DELETE_CHAR and n == 1)]
  kind = kinds[rng.integers(len(kinds))]
  char = int(rng.integers(1, alphabet_size + 1))
  if kind == dynamic_update.EditKind.INSERT_CHAR:
    return dynamic_update.insert(int(rng.integers(1, n + 2)), char)
  position = int(rng.integers(1, n + 1))
  if kind == dynamic_update.EditKind.DELETE_CHAR:
    return dynamic_update.delete(position)
  return dynamic_update.substitute(position, char)


def random_script(
    rng: np.random.Generator, b: core_types.RleString, steps: int,
    alphabet_size: int = base.DEFAULT_ALPHABET_SIZE
) -> List[dynamic_update.EditOp]:
  """Draws `steps` random edits, each valid for the string left by the last."""
  script = []
  for _ in range(steps):
    op = random_edit(rng, b, alphabet_size=alphabet_size)
    start, removed, inserted = dynamic_update.splice_of(op)
    b = b.splice(start, removed, inserted)
    script.append(op)
  return script


def random_batched_edit(
    rng: np.random.Generator, b: core_types.RleString,
    max_run: int = 4,
    alphabet_size: int = base.DEFAULT_ALPHABET_SIZE) -> dynamic_update.EditOp:
  """Draws a run-wise edit whose removed segment lies inside one run of `B`."""
  n = b.length
  char = int(rng.integers(1, alphabet_size + 1))
  inserted = int(rng.integers(1, max_run + 1))
  kind = rng.integers(3)
  if kind == 0:
    return dynamic_update.insert_run(int(rng.integers(1, n + 2)), char,
                                     inserted)
  run = int(rng.integers(b.size))
  left, right = (int(t) for t in b.run_offsets[run])
  start = int(rng.integers(left, right + 1))
  removed = int(rng.integers(1, right - start + 2))
  if kind == 1 and removed < n:
    return dynamic_update.delete_run(start, removed)
  return dynamic_update.substitute_run(start, removed, char, inserted)
