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
"""Dense reference tables for DTW, used as ground truth."""

import math
from typing import Iterator, Sequence, Tuple, Union

import chex
import numpy as np

from dyndtw._src import base
from dyndtw._src import core_types

# Deliberate cap: a 7x7 grid already has 8,989 warping paths.
_MAX_ENUMERATION_LENGTH = 7

StringLike = Union[core_types.RleString, Sequence[int], np.ndarray]


@chex.dataclass(frozen=True)
class DenseDp:
  """The full table of squared prefix DTW costs.

  m: the length of `A`.
  n: the length of `B`.
  cells: `[m, n]` where `cells[i - 1, j - 1]` is `D[i, j]`.
  """
  m: int
  n: int
  cells: chex.Array

  @property
  def squared_distance(self) -> int:
    return int(self.cells[-1, -1])

  def at(self, i: int, j: int) -> int:
    return int(self.cells[i - 1, j - 1])


@chex.dataclass(frozen=True)
class DenseDr:
  """The full differential table.

  m: the length of `A`.
  n: the length of `B`.
  cells: `[m, n, 2]` where `cells[i - 1, j - 1]` is `(U, L)` of cell `(i, j)`.
  """
  m: int
  n: int
  cells: chex.Array

  def at(self, i: int, j: int) -> Tuple[int, int]:
    u, l = self.cells[i - 1, j - 1]
    return int(u), int(l)


@chex.dataclass(frozen=True)
class WarpingPath:
  """A monotone path from `(1, 1)` to `(m, n)`.

  steps: the visited 1-based `(i, j)` vertices in order.
  """
  steps: Tuple[base.Coordinate, ...]


def as_rle(s: StringLike) -> core_types.RleString:
  if isinstance(s, core_types.RleString):
    return s
  return core_types.rle_encode(s)


def local_costs(a: StringLike, b: StringLike) -> np.ndarray:
  """Returns the `[m, n]` table of squared character differences."""
  a, b = as_rle(a), as_rle(b)
  diff = a.flat[:, None] - b.flat[None, :]
  return diff * diff


def dense_dtw(a: StringLike, b: StringLike) -> DenseDp:
  """Fills the dense DP table of squared DTW prefix costs.

  Each row is one min-plus prefix scan: with `best[j]` the cheaper of the two
  cells above, `D[i, j] = min_{k <= j} best[k] + cost[i, k..j]`.

  Args:
    a: the string `A` (length `m`).
    b: the string `B` (length `n`).

  Returns:
    The table `D`.
  """
  cost = local_costs(a, b)
  m, n = cost.shape
  d = np.empty_like(cost)
  d[0] = np.cumsum(cost[0])
  for i in range(1, m):
    prev = d[i - 1]
    best = prev.copy()
    best[1:] = np.minimum(prev[1:], prev[:-1])
    row = np.cumsum(cost[i])
    shifted = np.concatenate([[0], row[:-1]])
    d[i] = row + np.minimum.accumulate(best - shifted)
  chex.assert_shape(d, (m, n))
  return DenseDp(m=m, n=n, cells=d)


def dense_dr(d: DenseDp) -> DenseDr:
  """Derives `(U, L)` for every cell by subtracting adjacent `D` values."""
  cells = np.zeros((d.m, d.n, 2), dtype=base.COST_DTYPE)
  cells[1:, :, 0] = d.cells[1:] - d.cells[:-1]
  cells[:, 1:, 1] = d.cells[:, 1:] - d.cells[:, :-1]
  return DenseDr(m=d.m, n=d.n, cells=cells)


def dense_dr_recursive(a: StringLike, b: StringLike) -> DenseDr:
  """Computes `(U, L)` for every cell from the differences alone.

  With `x = DR[i-1, j].L`, `y = DR[i, j-1].U` and `c` the local cost,
  `z = min(x, y, 0) + c` is `D[i, j] - D[i-1, j-1]`, so `U = z - x` and
  `L = z - y`. No value of `D` is ever formed.

  Args:
    a: the string `A`.
    b: the string `B`.

  Returns:
    The differential table.
  """
  cost = local_costs(a, b).tolist()
  m, n = len(cost), len(cost[0])
  u = [[0] * n for _ in range(m)]
  l = [[0] * n for _ in range(m)]
  for i in range(m):
    for j in range(n):
      c = cost[i][j]
      if i == 0 and j == 0:
        continue
      if i == 0:
        l[i][j] = c
      elif j == 0:
        u[i][j] = c
      else:
        x, y = l[i - 1][j], u[i][j - 1]
        z = min(x, y, 0) + c
        u[i][j], l[i][j] = z - x, z - y
  cells = np.stack([np.array(u), np.array(l)], axis=-1).astype(base.COST_DTYPE)
  return DenseDr(m=m, n=n, cells=cells)


def backtrack_path(d: DenseDp, a: StringLike, b: StringLike) -> WarpingPath:
  """Recovers an optimal warping path from the dense table.

  Ties are broken towards the diagonal, then the left, then the upper
  predecessor.

  Args:
    d: the table of `dense_dtw(a, b)`.
    a: the string `A`.
    b: the string `B`.

  Returns:
    A path whose cost is `D[m, n]`.
  """
  cost = local_costs(a, b)
  table = d.cells
  i, j = d.m, d.n
  steps = [(i, j)]
  while (i, j) != (1, 1):
    if i == 1:
      j -= 1
    elif j == 1:
      i -= 1
    else:
      target = table[i - 1, j - 1] - cost[i - 1, j - 1]
      if table[i - 2, j - 2] == target:
        i, j = i - 1, j - 1
      elif table[i - 1, j - 2] == target:
        j -= 1
      else:
        i -= 1
    steps.append((i, j))
  return WarpingPath(steps=tuple(reversed(steps)))


def dtw_distance(a: StringLike, b: StringLike) -> float:
  return math.sqrt(dense_dtw(a, b).squared_distance)


def path_cost(path: WarpingPath, a: StringLike, b: StringLike) -> int:
  a, b = as_rle(a), as_rle(b)
  return sum(
      (a.char_at(i) - b.char_at(j))**2 for i, j in path.steps)


def is_valid_path(path: WarpingPath, m: int, n: int) -> bool:
  """Checks the endpoints and the step rule of a warping path."""
  steps = path.steps
  if not steps or steps[0] != (1, 1) or steps[-1] != (m, n):
    return False
  for (i0, j0), (i1, j1) in zip(steps, steps[1:]):
    if (i1 - i0, j1 - j0) not in ((1, 0), (0, 1), (1, 1)):
      return False
  return True


def _all_paths(m: int, n: int) -> Iterator[Tuple[base.Coordinate, ...]]:
  def extend(prefix):
    i, j = prefix[-1]
    if (i, j) == (m, n):
      yield tuple(prefix)
      return
    for di, dj in ((1, 0), (0, 1), (1, 1)):
      if i + di <= m and j + dj <= n:
        prefix.append((i + di, j + dj))
        yield from extend(prefix)
        prefix.pop()
  yield from extend([(1, 1)])


def min_path_cost_by_enumeration(a: StringLike, b: StringLike) -> int:
  """Minimizes the cost over every warping path of a tiny instance.

  Enumeration is deliberately capped at strings of length 7, at most 8,989
  paths per pair; longer strings go through `dense_dtw` instead.

  Raises:
    ValueError: either string is longer than the cap.
  """
  a, b = as_rle(a), as_rle(b)
  if max(a.length, b.length) > _MAX_ENUMERATION_LENGTH:
    raise ValueError(
        f"enumeration is limited to length {_MAX_ENUMERATION_LENGTH}")
  cost = local_costs(a, b)
  return min(
      int(sum(cost[i - 1, j - 1] for i, j in steps))
      for steps in _all_paths(a.length, b.length))
