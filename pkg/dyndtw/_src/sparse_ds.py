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
"""The sparse differential table of two run-length encoded strings.

Only the boundary rows and columns of the boxes formed by intersecting a run
of `A` with a run of `B` are stored. Every stored cell holds the vertical
difference `U = D[i, j] - D[i-1, j]` and the horizontal difference
`L = D[i, j] - D[i, j-1]`, four links to the nearest stored cell in each
direction and a diagonal link to the first stored cell `(i+h, j+h)`, `h >= 1`.

Cells on the top row or left column of their box are evaluated from their
upper and left neighbours. Every other stored cell of a box lies on its bottom
row or right column and is the exit of exactly one diagonal that starts on the
top row or left column of the same box; since the local cost is constant
inside a box its value follows from the start of that diagonal.

Cells live in a flat arena of parallel lists indexed by handle; `DsCell` is a
view of one handle.
"""

import collections.abc
import io
import itertools
from typing import (Dict, Iterator, List, Mapping, NamedTuple, Optional,
                    Sequence, Tuple)

from absl import logging
import numpy as np

from dyndtw._src import base
from dyndtw._src import core_types
from dyndtw._src import oracle

NO_LINK = base.NO_LINK

Dump = Dict[base.Coordinate, Tuple[int, int]]

# Arena lists besides `cell_row` and `cell_column`, with their initial value.
_ARENA_FIELDS = (("cell_u", 0), ("cell_l", 0), ("cell_up", NO_LINK),
                 ("cell_down", NO_LINK), ("cell_left", NO_LINK),
                 ("cell_right", NO_LINK), ("cell_diag", NO_LINK))


def _arena_field(name: str, writable: bool = True) -> property:
  def get(self):
    return getattr(self.ds, name)[self.handle]

  def put(self, value):
    getattr(self.ds, name)[self.handle] = value

  return property(get, put if writable else None)


class DsCell:
  """A stored cell of the sparse table.

  Attributes:
    handle: the stable arena handle of the cell.
    i: the row of the cell; rows never move.
    column: the `Column` holding the cell; its `j` moves on edits.
    u: `D[i, j] - D[i-1, j]`, zero on the first row.
    l: `D[i, j] - D[i, j-1]`, zero on the first column.
    up, down, left, right: handles of the nearest stored cell in each
      direction, or `NO_LINK`.
    diag: handle of the first stored cell `(i+h, j+h)` with `h >= 1`, or
      `NO_LINK` when the diagonal leaves the table.
  """
  __slots__ = ("ds", "handle")

  i = _arena_field("cell_row", writable=False)
  column = _arena_field("cell_column", writable=False)
  u = _arena_field("cell_u")
  l = _arena_field("cell_l")
  up = _arena_field("cell_up")
  down = _arena_field("cell_down")
  left = _arena_field("cell_left")
  right = _arena_field("cell_right")
  diag = _arena_field("cell_diag")

  def __init__(self, ds: "SparseDs", handle: base.Handle):
    self.ds = ds
    self.handle = handle

  @property
  def j(self) -> int:
    return self.ds.cell_column[self.handle].j

  def __repr__(self):
    return f"DsCell(({self.i}, {self.j}), U={self.u}, L={self.l})"


class Column:
  """The stored cells of one column of the table.

  A boundary column holds one handle per row; any other column holds one
  handle per boundary row, ordered by row.
  """
  __slots__ = ("j", "boundary", "handles")

  def __init__(self, j: int, boundary: bool,
               handles: Optional[List[base.Handle]] = None):
    self.j = j
    self.boundary = boundary
    self.handles: List[base.Handle] = handles or []


class _CellTable(collections.abc.Mapping):
  """The live cells of a table, keyed by handle."""

  def __init__(self, ds: "SparseDs"):
    self._ds = ds

  def __contains__(self, handle) -> bool:
    columns = self._ds.cell_column
    return 0 <= handle < len(columns) and columns[handle] is not None

  def __getitem__(self, handle: base.Handle) -> DsCell:
    if handle not in self:
      raise KeyError(handle)
    return DsCell(self._ds, handle)

  def __iter__(self) -> Iterator[base.Handle]:
    for handle, column in enumerate(self._ds.cell_column):
      if column is not None:
        yield handle

  def __len__(self) -> int:
    return self._ds.live


class Lines(NamedTuple):
  """Run geometry of one string as arrays indexed by 1-based position.

  Attributes:
    boundary: `[length + 2]` whether the position starts or ends a run.
    run: `[length + 1]` the 0-based run holding each position.
    first: `[length + 1]` the first position of that run.
    lines: the sorted boundary positions.
    slot: `[length + 2]` the index of a position in `lines`, or -1.
    prev: `[length + 1]` the nearest boundary position before, or 0.
    next: `[length + 1]` the nearest boundary position after, or 0.
  """
  boundary: np.ndarray
  run: np.ndarray
  first: np.ndarray
  lines: np.ndarray
  slot: np.ndarray
  prev: np.ndarray
  next: np.ndarray


def lines_of(r: core_types.RleString) -> Lines:
  length = r.length
  offsets = np.asarray(r.run_offsets, dtype=np.int64)
  run = np.zeros(length + 1, np.int64)
  run[1:] = np.repeat(np.arange(r.size), offsets[:, 1] - offsets[:, 0] + 1)
  first = np.zeros(length + 1, np.int64)
  first[1:] = offsets[run[1:], 0]
  last = np.zeros(length + 1, np.int64)
  last[1:] = offsets[run[1:], 1]
  boundary = np.zeros(length + 2, bool)
  boundary[offsets[:, 0]] = True
  boundary[offsets[:, 1]] = True
  lines = np.flatnonzero(boundary)
  slot = np.full(length + 2, -1, np.int64)
  slot[lines] = np.arange(len(lines))
  before = np.arange(1, length)
  prev = np.zeros(length + 1, np.int64)
  prev[2:] = np.where(boundary[before], before, first[before])
  after = np.arange(2, length + 1)
  nxt = np.zeros(length + 1, np.int64)
  nxt[1:length] = np.where(boundary[after], after, last[after])
  return Lines(boundary=boundary, run=run, first=first, lines=lines,
               slot=slot, prev=prev, next=nxt)


class SparseDs:
  """The sparse table together with the run structure of `A` and `B`.

  The instance is mutated in place by `dynamic_update`; it is single writer.
  """

  def __init__(self, a: core_types.RleString, b: core_types.RleString):
    self.a = a
    self.b = b
    self.cells = _CellTable(self)
    self.live = 0
    self.cell_row: List[int] = []
    self.cell_column: List[Optional[Column]] = []
    for name, _ in _ARENA_FIELDS:
      setattr(self, name, [])

    # Rows are fixed: edits only ever touch `B`.
    self.row_lines = lines_of(a)
    self.a_chars = [0] + a.flat.tolist()
    self.run_top = a.run_offsets[:, 0].tolist()
    self.run_bottom = a.run_offsets[:, 1].tolist()
    self.row_run = self.row_lines.run.tolist()
    self.boundary_rows = self.row_lines.lines.tolist()
    self.row_slot = {i: slot for slot, i in enumerate(self.boundary_rows)}
    self.row_is_boundary = self.row_lines.boundary.tolist()

    self.col_lines: Optional[Lines] = None
    self.b_chars: List[int] = []
    self.col_run: List[int] = []
    self.run_left: List[int] = []
    self.run_right: List[int] = []
    self.rebuild_column_index()
    self.columns: List[Column] = []

  @property
  def m(self) -> int:
    return self.a.length

  @property
  def n(self) -> int:
    return self.b.length

  @property
  def size(self) -> int:
    """The number of stored cells."""
    return self.live

  def rebuild_column_index(self):
    """Recomputes the per-column run lookup tables from `self.b`."""
    b = self.b
    self.col_lines = lines_of(b)
    self.b_chars = [0] + b.flat.tolist()
    self.run_left = b.run_offsets[:, 0].tolist()
    self.run_right = b.run_offsets[:, 1].tolist()
    self.col_run = self.col_lines.run.tolist()

  # Run geometry.

  def is_boundary_col(self, j: int) -> bool:
    run = self.col_run[j]
    return j == self.run_left[run] or j == self.run_right[run]

  def next_row(self, i: int) -> Optional[int]:
    """The first boundary row below row `i`."""
    if i >= self.m:
      return None
    if self.row_is_boundary[i + 1]:
      return i + 1
    return self.run_bottom[self.row_run[i + 1]]

  def prev_row(self, i: int) -> Optional[int]:
    if i <= 1:
      return None
    if self.row_is_boundary[i - 1]:
      return i - 1
    return self.run_top[self.row_run[i - 1]]

  def next_col(self, j: int) -> Optional[int]:
    """The first boundary column right of column `j`."""
    if j >= self.n:
      return None
    if self.is_boundary_col(j + 1):
      return j + 1
    return self.run_right[self.col_run[j + 1]]

  def prev_col(self, j: int) -> Optional[int]:
    if j <= 1:
      return None
    if self.is_boundary_col(j - 1):
      return j - 1
    return self.run_left[self.col_run[j - 1]]

  def box_of(self, i: int, j: int) -> Tuple[int, int]:
    """The 0-based `(I, J)` of the box holding cell `(i, j)`."""
    return self.row_run[i], self.col_run[j]

  def box_bounds(self, box: Tuple[int, int]) -> Tuple[int, int, int, int]:
    """Returns `(i_T, i_B, j_L, j_R)` of a box."""
    row_run, col_run = box
    return (self.run_top[row_run], self.run_bottom[row_run],
            self.run_left[col_run], self.run_right[col_run])

  def cost(self, i: int, j: int) -> int:
    diff = self.a_chars[i] - self.b_chars[j]
    return diff * diff

  def is_exit(self, i: int, j: int) -> bool:
    """Whether `(i, j)` lies below the top row and right of the left column."""
    return (i > self.run_top[self.row_run[i]] and
            j > self.run_left[self.col_run[j]])

  def start_of(self, i: int, j: int) -> Tuple[int, int, int]:
    """Returns `(i_s, j_s, k)`: where the diagonal into `(i, j)` starts.

    Args:
      i: the row of a cell for which `is_exit` holds.
      j: its column.

    Returns:
      The start on the top row or left column of the box and the number of
      diagonal steps from there to `(i, j)`.
    """
    t = i - self.run_top[self.row_run[i]]
    s = j - self.run_left[self.col_run[j]]
    if s >= t:
      return i - t, j - t, t
    return i - s, j - s, s

  # Arena.

  def handle_at(self, i: int, j: int) -> base.Handle:
    column = self.columns[j - 1]
    if column.boundary:
      return column.handles[i - 1]
    slot = self.row_slot.get(i)
    if slot is None:
      return NO_LINK
    return column.handles[slot]

  def cell_at(self, i: int, j: int) -> Optional[DsCell]:
    handle = self.handle_at(i, j)
    if handle == NO_LINK:
      return None
    return DsCell(self, handle)

  def new_cell(self, i: int, column: Column) -> base.Handle:
    handle = len(self.cell_row)
    self.cell_row.append(i)
    self.cell_column.append(column)
    for name, initial in _ARENA_FIELDS:
      getattr(self, name).append(initial)
    self.live += 1
    return handle

  def drop_cell(self, handle: base.Handle):
    if self.cell_column[handle] is None:
      raise KeyError(handle)
    self.cell_column[handle] = None
    self.live -= 1

  def adopt(self, columns: List[Column], rows: Sequence[int],
            fields: Mapping[str, Sequence[int]]):
    """Replaces the arena with cells laid out column by column.

    Args:
      columns: the columns, whose `handles` index into the new arena.
      rows: the row of every handle.
      fields: a full list for each of `cell_u`, `cell_l` and the five links.
    """
    self.columns = columns
    self.cell_row = list(rows)
    self.cell_column = list(itertools.chain.from_iterable(
        itertools.repeat(column, len(column.handles)) for column in columns))
    for name, _ in _ARENA_FIELDS:
      setattr(self, name, list(fields[name]))
    self.live = len(self.cell_row)

  def populate(self, column: Column) -> List[base.Handle]:
    """Creates the cells of an empty column and returns their handles."""
    rows = range(1, self.m + 1) if column.boundary else self.boundary_rows
    column.handles = [self.new_cell(i, column) for i in rows]
    return list(column.handles)

  def convert(self, column: Column,
              boundary: bool) -> Tuple[List[base.Handle], List[base.Handle]]:
    """Switches a column between boundary and non-boundary storage.

    Cells on boundary rows keep their handles.

    Args:
      column: the column to convert.
      boundary: the new status.

    Returns:
      The handles created and the handles destroyed.
    """
    created, destroyed = [], []
    if boundary == column.boundary:
      return created, destroyed
    if boundary:
      handles = []
      for i in range(1, self.m + 1):
        slot = self.row_slot.get(i)
        if slot is None:
          handle = self.new_cell(i, column)
          created.append(handle)
        else:
          handle = column.handles[slot]
        handles.append(handle)
    else:
      handles = []
      for i, handle in enumerate(column.handles, start=1):
        if self.row_is_boundary[i]:
          handles.append(handle)
        else:
          self.drop_cell(handle)
          destroyed.append(handle)
    column.boundary = boundary
    column.handles = handles
    return created, destroyed

  def link(self, cell: DsCell):
    """Recomputes all five links of `cell` from the current geometry."""
    i, j = cell.i, cell.j
    col_boundary = self.columns[j - 1].boundary
    row_boundary = self.row_is_boundary[i]

    above = i - 1 if col_boundary else self.prev_row(i)
    below = i + 1 if col_boundary else self.next_row(i)
    cell.up = NO_LINK if not above else self.handle_at(above, j)
    cell.down = (NO_LINK if below is None or below > self.m
                 else self.handle_at(below, j))

    before = j - 1 if row_boundary else self.prev_col(j)
    after = j + 1 if row_boundary else self.next_col(j)
    cell.left = NO_LINK if not before else self.handle_at(i, before)
    cell.right = (NO_LINK if after is None or after > self.n
                  else self.handle_at(i, after))

    next_row, next_col = self.next_row(i), self.next_col(j)
    if next_row is None or next_col is None:
      cell.diag = NO_LINK
    else:
      h = min(next_row - i, next_col - j)
      cell.diag = self.handle_at(i + h, j + h)

  # Evaluation.

  def eval_neighbours(self, cell: DsCell) -> Tuple[int, int]:
    """`(U, L)` of a top-row or left-column cell from its up and left cells."""
    i, j = cell.i, cell.j
    c = self.cost(i, j)
    if i == 1:
      return (0, 0) if j == 1 else (0, c)
    if j == 1:
      return c, 0
    x = self.cell_l[cell.up]
    y = self.cell_u[cell.left]
    z = min(x, y, 0) + c
    return z - x, z - y

  def eval_exit(self, start: DsCell) -> Tuple[DsCell, int, int]:
    """Evaluates the exit of the diagonal beginning at `start`.

    Args:
      start: a cell on the top row or left column of a box whose diagonal
        stays inside the box for at least one step.

    Returns:
      The exit cell and its new `(U, L)`.
    """
    i, j = start.i, start.j
    top = i == self.run_top[self.row_run[i]]
    left = j == self.run_left[self.col_run[j]]
    c = self.cost(i, j)
    u = start.u if not top else c - self.cell_l[start.right]
    l = start.l if not left else c - self.cell_u[start.down]
    return self.cells[start.diag], u, l

  def starts(self, box: Tuple[int, int]) -> Iterator[DsCell]:
    """Yields the cells of a box whose diagonal has an exit in the box."""
    i_t, i_b, j_l, j_r = self.box_bounds(box)
    if i_b == i_t or j_r == j_l:
      return
    for d in range(j_l, j_r):
      yield self.cell_at(i_t, d)
    for d in range(i_t + 1, i_b):
      yield self.cell_at(d, j_l)


def _sweep(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
  """Solves `x[p] = min(alpha[p], x[p-1] + beta[p])` for every `p`."""
  acc = np.cumsum(beta)
  return acc + np.minimum.accumulate(alpha - acc)


def _with_previous(x: np.ndarray) -> np.ndarray:
  """`min(x[p], x[p-1])`, and `x[0]` for the first entry."""
  return np.minimum(x, np.concatenate([x[:1], x[:-1]]))


def _boundary_values(a: core_types.RleString, b: core_types.RleString,
                     rows: Lines,
                     cols: Lines) -> Tuple[np.ndarray, np.ndarray]:
  """Computes `D` on every boundary row and every boundary column.

  A boundary row follows from the boundary row above it by the usual prefix
  sweep. Inside a run of `A` only the boundary columns are swept: a left
  column takes its three neighbours, while a right column of a wider box is
  reached along its diagonal from the top row or from the left column, which
  is an upper bound for the step from the left column of the same box.

  Returns:
    `[boundary rows, n]` and `[m, boundary columns]` arrays of `D`.
  """
  m, n = a.length, b.length
  b_flat = np.asarray(b.flat, dtype=base.COST_DTYPE)
  bcols = cols.lines
  left = cols.first[bcols]
  width = np.asarray(b.run_offsets, dtype=np.int64)[cols.run[bcols], 1] - left
  is_left = bcols == left
  left_slot = cols.slot[left]
  j = np.arange(1, n + 1)
  offset = j - cols.first[1:]
  offset_slot = cols.slot[cols.first[1:]]

  row_d = np.empty((len(rows.lines), n), base.COST_DTYPE)
  col_d = np.empty((m, len(bcols)), base.COST_DTYPE)
  previous = None
  for top, bottom in a.run_offsets.tolist():
    cost = (int(a.flat[top - 1]) - b_flat) ** 2
    if previous is None:
      first = np.cumsum(cost)
    else:
      first = _sweep(cost + _with_previous(previous), cost)
    row_d[rows.slot[top]] = first
    col_d[top - 1] = first[bcols - 1]
    height = bottom - top
    if not height:
      previous = first
      continue
    c = cost[bcols - 1]
    for k in range(1, height + 1):
      above = col_d[top + k - 2]
      along_top = first[np.maximum(bcols - k - 1, 0)] + k * c
      along_left = (col_d[np.maximum(top + k - width - 1, top - 1), left_slot]
                    + width * c)
      right = np.where(width >= k, along_top, along_left)
      col_d[top + k - 1] = _sweep(
          np.where(is_left, c + _with_previous(above), right),
          np.where(is_left, c, width * c))
    last = np.where(
        offset >= height,
        first[np.maximum(j - height - 1, 0)] + height * cost,
        col_d[np.maximum(bottom - offset - 1, top - 1), offset_slot]
        + offset * cost)
    row_d[rows.slot[bottom]] = last
    previous = last
  return row_d, col_d


def _values_at(a: core_types.RleString, b: core_types.RleString,
               rows: Lines, cols: Lines, row_d: np.ndarray, col_d: np.ndarray,
               i: np.ndarray, j: np.ndarray) -> np.ndarray:
  """`D` at arbitrary cells, bridging box interiors along their diagonal."""
  out = np.empty(i.shape, base.COST_DTYPE)
  on_row = rows.boundary[i]
  on_col = cols.boundary[j]
  inside = ~(on_row | on_col)
  on_col &= ~on_row
  out[on_row] = row_d[rows.slot[i[on_row]], j[on_row] - 1]
  out[on_col] = col_d[i[on_col] - 1, cols.slot[j[on_col]]]
  ii, jj = i[inside], j[inside]
  top, left = rows.first[ii], cols.first[jj]
  t, s = ii - top, jj - left
  c = (np.asarray(a.flat, dtype=base.COST_DTYPE)[ii - 1]
       - np.asarray(b.flat, dtype=base.COST_DTYPE)[jj - 1]) ** 2
  out[inside] = np.where(
      s >= t,
      row_d[rows.slot[top], np.maximum(jj - t - 1, 0)] + t * c,
      col_d[np.maximum(ii - s - 1, 0), cols.slot[left]] + s * c)
  return out


def build_ds(a: oracle.StringLike, b: oracle.StringLike) -> SparseDs:
  """Builds the sparse table of `A` and `B`.

  `D` is swept over the boundary rows and columns one run of `A` at a time,
  the differences of every stored cell are read off it and the links are laid
  out column by column, all with array operations.

  Args:
    a: the string `A`.
    b: the string `B`.

  Returns:
    The populated sparse table.

  Raises:
    EmptyInputError: either string is empty.
  """
  ds = SparseDs(oracle.as_rle(a), oracle.as_rle(b))
  m, n = ds.m, ds.n
  rows, cols = ds.row_lines, ds.col_lines
  row_d, col_d = _boundary_values(ds.a, ds.b, rows, cols)

  column_boundary = cols.boundary[1:n + 1]
  counts = np.where(column_boundary, m, len(rows.lines))
  first_handle = np.zeros(n + 1, np.int64)
  first_handle[1:] = np.cumsum(counts) - counts
  every_row = np.arange(1, m + 1)
  i = np.concatenate([every_row if flag else rows.lines
                      for flag in column_boundary.tolist()])
  j = np.repeat(np.arange(1, n + 1), counts)
  handle = np.arange(len(i))
  slot = handle - first_handle[j]

  def handles(ii, jj):
    return first_handle[jj] + np.where(cols.boundary[jj], ii - 1,
                                       rows.slot[ii])

  def values(ii, jj):
    return _values_at(ds.a, ds.b, rows, cols, row_d, col_d, ii, jj)

  d = values(i, j)
  u = np.where(i > 1, d - values(np.maximum(i - 1, 1), j), 0)
  l = np.where(j > 1, d - values(i, np.maximum(j - 1, 1)), 0)

  on_row = rows.boundary[i]
  before = np.where(on_row, j - 1, cols.prev[j])
  after = np.where(on_row, np.where(j < n, j + 1, 0), cols.next[j])
  below, beyond = rows.next[i], cols.next[j]
  reach = (below > 0) & (beyond > 0)
  h = np.minimum(below - i, beyond - j)
  fields = {
      "cell_u": u,
      "cell_l": l,
      "cell_up": np.where(slot > 0, handle - 1, NO_LINK),
      "cell_down": np.where(slot < counts[j - 1] - 1, handle + 1, NO_LINK),
      "cell_left": np.where(
          before > 0, handles(i, np.maximum(before, 1)), NO_LINK),
      "cell_right": np.where(
          after > 0, handles(i, np.maximum(after, 1)), NO_LINK),
      "cell_diag": np.where(
          reach, handles(np.where(reach, i + h, 1), np.where(reach, j + h, 1)),
          NO_LINK),
  }
  layout = zip(column_boundary.tolist(), first_handle[1:].tolist(),
               counts.tolist())
  columns = [Column(col, flag, list(range(start, start + count)))
             for col, (flag, start, count) in enumerate(layout, start=1)]
  ds.adopt(columns, i.tolist(),
           {name: value.tolist() for name, value in fields.items()})
  logging.vlog(1, "Built sparse table: m=%d n=%d M=%d N=%d cells=%d",
               ds.m, ds.n, ds.a.size, ds.b.size, ds.size)
  return ds


def ds_value(ds: SparseDs) -> base.Cost:
  """Returns `D[m, n]` by summing `L` along row 1 and `U` down column `n`."""
  total = ds.cost(1, 1)
  handle = ds.handle_at(1, 1)
  while ds.cell_right[handle] != NO_LINK:
    handle = ds.cell_right[handle]
    total += ds.cell_l[handle]
  while ds.cell_down[handle] != NO_LINK:
    handle = ds.cell_down[handle]
    total += ds.cell_u[handle]
  return total


def ds_cell_at(ds: SparseDs, i: int, j: int) -> Tuple[int, int]:
  """Returns the stored `(U, L)` of cell `(i, j)`.

  Raises:
    NotABoundaryCellError: `(i, j)` is outside the table or not stored.
  """
  cell = None
  if 1 <= i <= ds.m and 1 <= j <= ds.n:
    cell = ds.cell_at(i, j)
  if cell is None:
    raise base.NotABoundaryCellError(f"cell ({i}, {j}) is not stored")
  return cell.u, cell.l


def ds_path(ds: SparseDs) -> oracle.WarpingPath:
  """Recovers an optimal warping path from the sparse table.

  The walk keeps the exact `D` of its current cell. On a top-row or left-column
  cell the three predecessors are stored, and the one whose `D` plus the local
  cost gives the current `D` is taken, preferring the diagonal, then the left,
  then the upper cell. Any other cell is reached optimally along the diagonal
  from the start of its box diagonal, which is followed directly.

  Args:
    ds: the sparse table.

  Returns:
    A warping path whose cost is `D[m, n]`.
  """
  d = ds_value(ds)
  i, j = ds.m, ds.n
  steps = [(i, j)]
  while (i, j) != (1, 1):
    if i == 1:
      d -= ds.cell_at(i, j).l
      j -= 1
      steps.append((i, j))
    elif j == 1:
      d -= ds.cell_at(i, j).u
      i -= 1
      steps.append((i, j))
    elif ds.is_exit(i, j):
      c = ds.cost(i, j)
      _, _, k = ds.start_of(i, j)
      for _ in range(k):
        i, j = i - 1, j - 1
        steps.append((i, j))
      d -= k * c
    else:
      cell = ds.cell_at(i, j)
      target = d - ds.cost(i, j)
      d_up = d - cell.u
      d_left = d - cell.l
      d_diag = d_up - ds.cell_l[cell.up]
      if d_diag == target:
        i, j, d = i - 1, j - 1, d_diag
      elif d_left == target:
        j, d = j - 1, d_left
      else:
        i, d = i - 1, d_up
      steps.append((i, j))
  return oracle.WarpingPath(steps=tuple(reversed(steps)))


def dump_cells(ds: SparseDs) -> Dump:
  """Returns `{(i, j): (U, L)}` for every stored cell."""
  rows, us, ls = ds.cell_row, ds.cell_u, ds.cell_l
  return {(rows[handle], column.j): (us[handle], ls[handle])
          for handle, column in enumerate(ds.cell_column)
          if column is not None}


def ds_dump(ds: SparseDs) -> str:
  """Formats every stored cell as `i,j,U,L` CSV sorted by `(i, j)`."""
  out = io.StringIO()
  out.write("i,j,U,L\n")
  for (i, j), (u, l) in sorted(dump_cells(ds).items()):
    out.write(f"{i},{j},{u},{l}\n")
  return out.getvalue()


def parse_dump(text: str) -> Dump:
  """Inverse of `ds_dump`."""
  dump = {}
  for line in text.splitlines()[1:]:
    if line:
      i, j, u, l = (int(t) for t in line.split(","))
      dump[(i, j)] = (u, l)
  return dump


DiffEntry = Tuple[int, int, Optional[Tuple[int, int]], Tuple[int, int]]


def diff_dumps(before: Mapping[base.Coordinate, Tuple[int, int]],
               after: Mapping[base.Coordinate, Tuple[int, int]],
               start: int, removed: int, inserted: int) -> List[DiffEntry]:
  """Lists the cells of `after` that are new or differ from `before`.

  Column `j` of the edited table corresponds to column `j` of the original for
  `j < start + min(removed, inserted)`: a replaced column keeps its place. The
  remaining inserted columns have no counterpart, and any column after them
  corresponds to column `j + removed - inserted`.

  Args:
    before: the dump before the edit.
    after: the dump after the edit.
    start: the 1-based position of the edit in `B`.
    removed: the number of characters removed at `start`.
    inserted: the number of characters inserted at `start`.

  Returns:
    `(i, j, old, new)` for every changed cell of `after`, sorted, with `old`
    set to `None` for cells without a counterpart.
  """
  shift = removed - inserted
  kept = start + min(removed, inserted)
  changed = []
  for (i, j), new in sorted(after.items()):
    if j < kept:
      old = before.get((i, j))
    elif j < start + inserted:
      old = None
    else:
      old = before.get((i, j + shift))
    if old is None or tuple(old) != tuple(new):
      changed.append((i, j, None if old is None else tuple(old), tuple(new)))
  return changed


def _expected_stored(ds: SparseDs, i: int, j: int) -> bool:
  return ds.row_is_boundary[i] or ds.is_boundary_col(j)


def _scan(ds: SparseDs, i: int, j: int, di: int,
          dj: int) -> Optional[base.Coordinate]:
  while True:
    i, j = i + di, j + dj
    if not (1 <= i <= ds.m and 1 <= j <= ds.n):
      return None
    if _expected_stored(ds, i, j):
      return i, j


def audit_structure(ds: SparseDs) -> List[str]:
  """Checks the cell set and every link against a direct scan of the grid.

  Args:
    ds: the sparse table.

  Returns:
    Human readable problems; empty when the structure is sound.
  """
  problems = []
  seen = {}
  for index, column in enumerate(ds.columns, start=1):
    if column.j != index:
      problems.append(f"column {index} believes it is column {column.j}")
    if column.boundary != ds.is_boundary_col(index):
      problems.append(f"column {index} has the wrong boundary status")
    rows = (range(1, ds.m + 1) if column.boundary else ds.boundary_rows)
    if len(column.handles) != len(rows):
      problems.append(f"column {index} holds {len(column.handles)} cells")
      continue
    for i, handle in zip(rows, column.handles):
      if (handle not in ds.cells or ds.cell_row[handle] != i or
          ds.cell_column[handle] is not column):
        problems.append(f"cell ({i}, {index}) is missing or misplaced")
      else:
        seen[handle] = (i, index)
  if len(seen) != len(ds.cells):
    problems.append(f"{len(ds.cells) - len(seen)} orphaned cells")

  for handle, (i, j) in seen.items():
    for name, di, dj in (("up", -1, 0), ("down", 1, 0), ("left", 0, -1),
                         ("right", 0, 1), ("diag", 1, 1)):
      target = _scan(ds, i, j, di, dj)
      want = NO_LINK if target is None else ds.handle_at(*target)
      if getattr(ds, "cell_" + name)[handle] != want:
        problems.append(f"{name} link of ({i}, {j}) is wrong")
    right, down = ds.cell_right[handle], ds.cell_down[handle]
    if right in ds.cells and ds.cell_left[right] != handle:
      problems.append(f"right link of ({i}, {j}) is not reciprocal")
    if down in ds.cells and ds.cell_up[down] != handle:
      problems.append(f"down link of ({i}, {j}) is not reciprocal")
  return problems


def audit_values(ds: SparseDs,
                 dr: Optional[oracle.DenseDr] = None) -> List[str]:
  """Compares every stored cell with the dense differential table."""
  if dr is None:
    dr = oracle.dense_dr(oracle.dense_dtw(ds.a, ds.b))
  problems = []
  for (i, j), have in sorted(dump_cells(ds).items()):
    want = dr.at(i, j)
    if have != want:
      problems.append(f"cell ({i}, {j}) holds {have}, want {want}")
  return problems


def ds_size(ds: SparseDs) -> int:
  return ds.size


def expected_size(m: int, boundary_rows: int, n: int,
                  boundary_cols: int) -> int:
  """The number of cells stored for the given counts of boundary lines."""
  return boundary_cols * m + (n - boundary_cols) * boundary_rows


def verify(ds: SparseDs) -> None:
  """Raises `VerificationError` unless `ds` matches the dense oracle."""
  problems = audit_structure(ds) + audit_values(ds)
  d = oracle.dense_dtw(ds.a, ds.b)
  if ds_value(ds) != d.squared_distance:
    problems.append(
        f"ds_value {ds_value(ds)} differs from {d.squared_distance}")
  if problems:
    raise base.VerificationError("; ".join(problems[:5]))
