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
"""Repairs a sparse table after an edit of `B`.

Every edit is treated as a splice: `removed` characters at position `j*` are
replaced by the inserted characters. Columns left of `j*` keep their values.
Only the columns `j* - 1`, the inserted ones and the first column after them
can change between boundary and non-boundary storage, so the structural work
is confined to that window. Changed values are then pushed through the boxes
in row-major order: a box reads the changes of the bottom row of the box above
and of the right column of the box to its left, repairs its own top row and
left column cell by cell, and re-evaluates the diagonal exits whose start or
whose start's neighbour changed.
"""

import enum
import heapq
import time
from typing import Dict, List, Mapping, Optional, Set, Tuple

from absl import logging
import chex

from dyndtw._src import base
from dyndtw._src import core_types
from dyndtw._src import sparse_ds

Box = Tuple[int, int]


class EditKind(enum.Enum):
  INSERT_CHAR = "ins"
  DELETE_CHAR = "del"
  SUBSTITUTE_CHAR = "sub"
  INSERT_RUN = "insrun"
  DELETE_RUN = "delrun"
  SUBSTITUTE_RUN = "subrun"


SINGLE_KINDS = (EditKind.INSERT_CHAR, EditKind.DELETE_CHAR,
                EditKind.SUBSTITUTE_CHAR)
RUN_KINDS = (EditKind.INSERT_RUN, EditKind.DELETE_RUN,
             EditKind.SUBSTITUTE_RUN)


@chex.dataclass(frozen=True)
class EditOp:
  """An edit of `B`.

  kind: what the edit does.
  position: the 1-based position `j*` in `B`; for run-wise edits the first
    affected position.
  char: the inserted or substituted character, if any.
  k: the number of characters inserted by `INSERT_RUN` or removed by
    `DELETE_RUN`.
  k1: the number of characters removed by `SUBSTITUTE_RUN`.
  k2: the number of characters inserted by `SUBSTITUTE_RUN`.
  """
  kind: EditKind
  position: int
  char: Optional[int] = None
  k: int = 1
  k1: int = 1
  k2: int = 1

  @property
  def is_run_wise(self) -> bool:
    return self.kind in RUN_KINDS


def insert(position: int, char: int) -> EditOp:
  return EditOp(kind=EditKind.INSERT_CHAR, position=position, char=char)


def delete(position: int) -> EditOp:
  return EditOp(kind=EditKind.DELETE_CHAR, position=position)


def substitute(position: int, char: int) -> EditOp:
  return EditOp(kind=EditKind.SUBSTITUTE_CHAR, position=position, char=char)


def insert_run(position: int, char: int, k: int) -> EditOp:
  return EditOp(kind=EditKind.INSERT_RUN, position=position, char=char, k=k)


def delete_run(position: int, k: int) -> EditOp:
  return EditOp(kind=EditKind.DELETE_RUN, position=position, k=k)


def substitute_run(position: int, k1: int, char: int, k2: int) -> EditOp:
  return EditOp(kind=EditKind.SUBSTITUTE_RUN, position=position, char=char,
                k1=k1, k2=k2)


@chex.dataclass(frozen=True)
class OffsetEll:
  """Index correction between `B` and `B'`.

  ell: the removed minus the inserted length: -1 for an insertion, +1 for a
    deletion and 0 for a substitution. Column `j` of `B'` corresponds to
    column `j + ell` of `B` once past the inserted columns; the first
    `min(removed, inserted)` of those replace removed columns in place.
  """
  ell: int


@chex.dataclass(frozen=True)
class DeltaList:
  """The changed cells of one side of a box.

  side: one of `T`, `B`, `L`, `R`.
  box: the 0-based `(I, J)` of the box.
  entries: `(index, dprime)` pairs in increasing index order; the index is a
    column for `T`/`B` and a row for `L`/`R`, `dprime` is the new `D` there.
  """
  side: str
  box: Box
  entries: Tuple[Tuple[int, int], ...]


@chex.dataclass(frozen=True)
class UpdateStats:
  """Accounting of one edit.

  chg: the number of stored cells that are new or whose `(U, L)` changed; a
    cell of a replaced column is compared with the replaced cell.
  cells_touched: cell evaluations, the two neighbours each evaluation reads,
    the cells read for `D'` and the cells created, destroyed or relinked.
  structural_cells: the number of cells created or destroyed.
  elapsed_ns: wall-clock duration of the update.
  ell: the index offset of the edit.
  position: the normalized position `j*` of the edit.
  boxes_visited: the number of boxes that received changes.
  dprime_reads: cells read while deriving `D'` for the Δ-lists.
  delta_lists: every non-empty Δ-list, when requested.
  """
  chg: int
  cells_touched: int
  structural_cells: int
  elapsed_ns: int
  ell: int = 0
  position: int = 0
  boxes_visited: int = 0
  dprime_reads: int = 0
  delta_lists: Optional[Tuple[DeltaList, ...]] = None


def splice_of(op: EditOp) -> Tuple[int, int, Tuple[int, ...]]:
  """Returns `(start, removed, inserted characters)` of an edit."""
  kind = op.kind
  if kind == EditKind.INSERT_CHAR:
    return op.position, 0, (op.char,)
  if kind == EditKind.DELETE_CHAR:
    return op.position, 1, ()
  if kind == EditKind.SUBSTITUTE_CHAR:
    return op.position, 1, (op.char,)
  if kind == EditKind.INSERT_RUN:
    return op.position, 0, (op.char,) * op.k
  if kind == EditKind.DELETE_RUN:
    return op.position, op.k, ()
  return op.position, op.k1, (op.char,) * op.k2


def offset_for(op: EditOp) -> OffsetEll:
  _, removed, inserted = splice_of(op)
  return OffsetEll(ell=removed - len(inserted))


def validate_edit(b: core_types.RleString, op: EditOp):
  """Checks that `op` can be applied to `B`.

  Raises:
    PositionOutOfRangeError: the position or an extent is out of range.
    CharacterOutOfRangeError: the character is missing or out of range.
    NotARunError: a run-wise removal spans more than one character value.
    WouldEmptyStringError: the edit would leave `B` empty.
  """
  n = b.length
  kind = op.kind
  if kind in (EditKind.INSERT_RUN, EditKind.DELETE_RUN) and op.k < 1:
    raise base.PositionOutOfRangeError(f"run length must be positive: {op.k}")
  if kind == EditKind.SUBSTITUTE_RUN and (op.k1 < 1 or op.k2 < 1):
    raise base.PositionOutOfRangeError(
        f"run lengths must be positive: {op.k1}, {op.k2}")
  start, removed, inserted = splice_of(op)
  last = n + 1 if not removed else n - removed + 1
  if not 1 <= start <= last:
    raise base.PositionOutOfRangeError(
        f"position {start} outside [1, {last}] for `{kind.value}`")
  if kind not in (EditKind.DELETE_CHAR, EditKind.DELETE_RUN):
    if op.char is None:
      raise base.CharacterOutOfRangeError(f"`{kind.value}` needs a character")
    core_types.check_character(op.char)
  if op.is_run_wise and removed:
    segment = b.flat[start - 1:start - 1 + removed]
    if (segment != segment[0]).any():
      raise base.NotARunError(
          f"positions {start}..{start + removed - 1} are not one run")
  if n - removed + len(inserted) < 1:
    raise base.WouldEmptyStringError("the edit would leave B empty")


def normalize_edit(b: core_types.RleString, op: EditOp) -> EditOp:
  """Moves an edit inside a run to the end of that run.

  Inserting a character equal to an adjacent run is moved to just before the
  last character of that run, and deleting part of a longer run is moved so
  that it ends just before the last character of the run. Both yield the
  same `B'`; afterwards the first and last columns of the run keep their
  correspondence and the run only widens or narrows by interior columns.

  Args:
    b: the string before the edit.
    op: a validated edit.

  Returns:
    The equivalent normalized edit.
  """
  start, removed, _ = splice_of(op)
  n = b.length
  if op.kind in (EditKind.INSERT_CHAR, EditKind.INSERT_RUN):
    c = op.char
    if start <= n and b.char_at(start) == c:
      return op.replace(position=int(b.run_offsets[b.run_of(start), 1]))
    if start >= 2 and b.char_at(start - 1) == c:
      return op.replace(position=int(b.run_offsets[b.run_of(start - 1), 1]))
    return op
  if op.kind in (EditKind.DELETE_CHAR, EditKind.DELETE_RUN):
    run = b.run_of(start)
    left, right = (int(t) for t in b.run_offsets[run])
    if right - left + 1 > removed:
      return op.replace(position=right - removed)
  return op


def is_noop(b: core_types.RleString, op: EditOp) -> bool:
  start, removed, inserted = splice_of(op)
  return removed == len(inserted) and all(
      b.char_at(start + k) == c for k, c in enumerate(inserted))


class _UpdateState:
  """Bookkeeping of one update; discarded when the update returns.

  `D'` is recorded for every evaluated cell from a neighbour whose `D'` is
  already known: the Δ-list entries handed to a box, cells settled earlier in
  this update, the start of a box diagonal, or a scan along the first row.
  """

  def __init__(self, ds: sparse_ds.SparseDs, keep_deltas: bool):
    self.ds = ds
    self.created: Set[base.Handle] = set()
    # `(U, L)` of the column a recreated cell replaces, at the same row.
    self.previous: Dict[base.Handle, Tuple[int, int]] = {}
    self.destroyed = 0
    self.relinked: Set[base.Handle] = set()
    self.changed: Set[base.Handle] = set()
    self.evaluations = 0
    self.reads = 0
    self.seeds: Dict[Box, Set[base.Handle]] = {}
    self.from_above: Dict[Box, DeltaList] = {}
    self.from_left: Dict[Box, DeltaList] = {}
    self.queue: List[Box] = []
    self.queued: Set[Box] = set()
    self.boxes_visited = 0
    self.dprime: Dict[base.Coordinate, int] = {}
    self.first_row: Optional[Tuple[int, int]] = None
    self.dprime_reads = 0
    self.delta_lists: Optional[List[DeltaList]] = [] if keep_deltas else None

  def schedule(self, box: Box):
    if box not in self.queued:
      self.queued.add(box)
      heapq.heappush(self.queue, box)

  def add_seed(self, handle: base.Handle):
    cell = self.ds.cells[handle]
    box = self.ds.box_of(cell.i, cell.j)
    self.seeds.setdefault(box, set()).add(handle)
    self.schedule(box)

  def evaluate(self, cell: sparse_ds.DsCell, u: int, l: int) -> bool:
    """Stores new values and reports whether the cell changed."""
    self.evaluations += 1
    self.reads += 2
    handle = cell.handle
    old = self.previous.get(handle)
    if old is not None:
      changed = old != (u, l)
    else:
      changed = handle in self.created or cell.u != u or cell.l != l
    cell.u, cell.l = u, l
    if changed:
      self.changed.add(handle)
    return changed

  def _known(self, i: int, j: int,
             carried: Mapping[base.Coordinate, int]) -> Optional[int]:
    value = carried.get((i, j))
    if value is None:
      value = self.dprime.get((i, j))
    return value

  def settle(self, cell: sparse_ds.DsCell,
             carried: Mapping[base.Coordinate, int]):
    """Records `D'` at a cell evaluated in this update.

    Args:
      cell: the evaluated cell.
      carried: `D'` of the cells listed in the Δ-lists handed to its box.

    Raises:
      DynDtwError: the cell changed and no known `D'` leads to it.
    """
    i, j = cell.i, cell.j
    value = self._derive(i, j, cell.u, cell.l, carried)
    if value is not None:
      self.dprime[(i, j)] = value
    elif cell.handle in self.changed:
      raise base.DynDtwError(f"no known D' leads to changed cell ({i}, {j})")

  def _derive(self, i: int, j: int, u: int, l: int,
              carried: Mapping[base.Coordinate, int]) -> Optional[int]:
    ds = self.ds
    self.dprime_reads += 1
    if i == 1 and j == 1:
      return ds.cost(1, 1)
    is_exit = ds.is_exit(i, j)
    if is_exit:
      si, sj, k = ds.start_of(i, j)
      start = self._start_dprime(si, sj, carried)
      if start is not None:
        return start + k * ds.cost(i, j)
    if i > 1 and ds.handle_at(i - 1, j) != base.NO_LINK:
      up = self._known(i - 1, j, carried)
      if up is not None:
        return up + u
    if j > 1 and ds.handle_at(i, j - 1) != base.NO_LINK:
      left = self._known(i, j - 1, carried)
      if left is not None:
        return left + l
    if i == 1:
      return self._first_row(j)
    if is_exit:
      return self._along_top_row(i, j, carried)
    return None

  def _start_dprime(self, si: int, sj: int,
                    carried: Mapping[base.Coordinate, int]) -> Optional[int]:
    """`D'` at a diagonal start, possibly from its right or lower neighbour."""
    ds = self.ds
    value = self._known(si, sj, carried)
    if value is not None:
      return value
    if si == ds.run_top[ds.row_run[si]]:
      right = self._known(si, sj + 1, carried)
      if right is not None:
        self.dprime_reads += 1
        return right - ds.cell_l[ds.handle_at(si, sj + 1)]
    if sj == ds.run_left[ds.col_run[sj]]:
      below = self._known(si + 1, sj, carried)
      if below is not None:
        self.dprime_reads += 1
        return below - ds.cell_u[ds.handle_at(si + 1, sj)]
    return None

  def _first_row(self, j: int) -> int:
    """Advances a running sum of `L` along row 1 up to column `j`."""
    ds = self.ds
    if self.first_row is None or self.first_row[0] > j:
      self.first_row = (1, ds.cost(1, 1))
    at, value = self.first_row
    while at < j:
      at += 1
      value += ds.cell_l[ds.handle_at(1, at)]
      self.dprime_reads += 1
    self.first_row = (at, value)
    return value

  def _along_top_row(self, i: int, j: int,
                     carried: Mapping[base.Coordinate, int]) -> Optional[int]:
    """`D'` at an exit from the top-row cell of its column.

    Steps back along the top row, and down the left column when the diagonal
    starts there, to the start of the diagonal into `(i, j)`.
    """
    ds = self.ds
    i_t = ds.run_top[ds.row_run[i]]
    value = self._known(i_t, j, carried)
    if value is None:
      return None
    si, sj, k = ds.start_of(i, j)
    corner = sj if si == i_t else ds.run_left[ds.col_run[j]]
    for col in range(j, corner, -1):
      value -= ds.cell_l[ds.handle_at(i_t, col)]
    for row in range(i_t + 1, si + 1):
      value += ds.cell_u[ds.handle_at(row, corner)]
    self.dprime_reads += (j - corner) + (si - i_t)
    return value + k * ds.cost(i, j)

  def delta(self, side: str, box: Box, cells) -> DeltaList:
    """Builds a Δ-list from changed cells sorted by their index."""
    index = (lambda c: c.j) if side in ("T", "B") else (lambda c: c.i)
    entries = tuple((index(c), self.dprime[(c.i, c.j)])
                    for c in sorted(cells, key=index))
    result = DeltaList(side=side, box=box, entries=entries)
    if self.delta_lists is not None and entries:
      self.delta_lists.append(result)
    return result


def initial_step(ds: sparse_ds.SparseDs, op: EditOp, ell: OffsetEll,
                 keep_deltas: bool = False) -> _UpdateState:
  """Applies the structural part of an edit and seeds the propagation.

  The first `min(removed, inserted)` inserted columns replace removed columns
  in place; their cells are compared with the replaced cells of the same row.
  Every cell of a column that becomes a boundary column is seeded.

  Args:
    ds: the table, modified in place.
    op: a validated and normalized edit.
    ell: the offset of `op`.
    keep_deltas: whether to keep every Δ-list for inspection.

  Returns:
    The update state with the seeded boxes queued.
  """
  state = _UpdateState(ds, keep_deltas)
  start, removed, inserted = splice_of(op)
  chex.assert_equal(ell.ell, removed - len(inserted))
  first_after = start + removed
  first_after_was_run_start = (
      first_after <= ds.n and
      ds.run_left[ds.col_run[first_after]] == first_after)

  replaced = []
  for index, column in enumerate(ds.columns[start - 1:start - 1 + removed]):
    if index < len(inserted):
      replaced.append({ds.cell_row[h]: (ds.cell_u[h], ds.cell_l[h])
                       for h in column.handles})
    for handle in column.handles:
      ds.drop_cell(handle)
    state.destroyed += len(column.handles)

  ds.b = ds.b.splice(start, removed, inserted)
  ds.rebuild_column_index()
  fresh = [sparse_ds.Column(start + k, ds.is_boundary_col(start + k))
           for k in range(len(inserted))]
  ds.columns[start - 1:start - 1 + removed] = fresh
  for index in range(start - 1 + len(fresh), ds.n):
    ds.columns[index].j = index + 1
  for column in fresh:
    state.created.update(ds.populate(column))
  for column, values in zip(fresh, replaced):
    for handle in column.handles:
      old = values.get(ds.cell_row[handle])
      if old is not None:
        state.previous[handle] = old

  w1 = start + len(inserted)
  widened = []
  for j in (start - 1, w1):
    if 1 <= j <= ds.n:
      created, destroyed = ds.convert(ds.columns[j - 1], ds.is_boundary_col(j))
      state.created.update(created)
      state.destroyed += len(destroyed)
      if created:
        widened.append(j)

  lo, hi = max(1, start - 1), min(ds.n, w1)
  relink = set()
  for j in range(lo, hi + 1):
    relink.update(ds.columns[j - 1].handles)
  before, after = ds.prev_col(lo), ds.next_col(hi)
  for j in (before, after):
    if j is not None:
      relink.update(ds.columns[j - 1].handles)
  if before is not None:
    # Diagonals from the left may now end inside the window.
    for j in range(before, lo):
      for handle in ds.columns[j - 1].handles:
        i = ds.cell_row[handle]
        next_row = ds.next_row(i)
        if next_row is not None and j + next_row - i >= lo:
          relink.add(handle)
  for handle in relink:
    ds.link(ds.cells[handle])
  state.relinked = relink

  for handle in state.created:
    state.add_seed(handle)
  for j in widened:
    for handle in ds.columns[j - 1].handles:
      state.add_seed(handle)
  if w1 <= ds.n:
    for handle in ds.columns[w1 - 1].handles:
      state.add_seed(handle)
    _seed_reshaped_run(ds, state, w1, first_after_was_run_start)
  logging.vlog(2, "Initial step at %d: window [%d, %d], %d created, "
               "%d destroyed, %d relinked", start, lo, hi,
               len(state.created), state.destroyed, len(relink))
  return state


def _seed_reshaped_run(ds: sparse_ds.SparseDs, state: _UpdateState, w1: int,
                       was_run_start: bool):
  """Seeds the exits whose diagonal start moved with the run holding `w1`."""
  run = ds.col_run[w1]
  j_l, j_r = ds.run_left[run], ds.run_right[run]
  if j_l == w1 and was_run_start:
    return
  if j_r > w1:
    for handle in ds.columns[j_r - 1].handles:
      state.add_seed(handle)
  for top, bottom in zip(ds.run_top, ds.run_bottom):
    height = bottom - top
    for j in range(w1 + 1, min(j_r, w1 + height) + 1):
      state.add_seed(ds.handle_at(bottom, j))


def propagate_top_left(
    ds: sparse_ds.SparseDs, box: Box, above: Optional[DeltaList],
    left: Optional[DeltaList],
    state: _UpdateState) -> Tuple[DeltaList, DeltaList]:
  """Repairs the top row and the left column of a box.

  A cell is re-evaluated when the cell above or to its left changed, or when
  it was seeded by the initial step. Each scan stops at the first unchanged
  cell that has no further reason to be re-evaluated. The `D'` of a changed
  cell follows from the `D'` carried by `above` and `left` or from cells
  settled before it.

  Args:
    ds: the table.
    box: the box to repair.
    above: Δ_B of the box above, if any.
    left: Δ_R of the box to the left, if any.
    state: the update state.

  Returns:
    Δ_T and Δ_L of the box; the corner belongs to both.
  """
  i_t, i_b, j_l, j_r = ds.box_bounds(box)
  carried = {}
  top_triggers, left_triggers = set(), set()
  if above is not None:
    for j, dprime in above.entries:
      carried[(i_t - 1, j)] = dprime
      top_triggers.add(j)
  if left is not None:
    for i, dprime in left.entries:
      carried[(i, j_l - 1)] = dprime
      if i == i_t:
        top_triggers.add(j_l)
      else:
        left_triggers.add(i)
  for handle in state.seeds.get(box, ()):
    cell = ds.cells[handle]
    if cell.i == i_t:
      top_triggers.add(cell.j)
    elif cell.j == j_l:
      left_triggers.add(cell.i)

  top_changed = []
  pending = sorted(top_triggers)
  done = set()
  while pending:
    j = heapq.heappop(pending)
    if j in done:
      continue
    done.add(j)
    cell = ds.cell_at(i_t, j)
    changed = state.evaluate(cell, *ds.eval_neighbours(cell))
    state.settle(cell, carried)
    if changed:
      top_changed.append(cell)
      if j < j_r:
        heapq.heappush(pending, j + 1)

  left_changed = [c for c in top_changed if c.j == j_l]
  if left_changed and i_b > i_t:
    left_triggers.add(i_t + 1)
  pending = sorted(left_triggers)
  done = set()
  while pending:
    i = heapq.heappop(pending)
    if i in done:
      continue
    done.add(i)
    cell = ds.cell_at(i, j_l)
    changed = state.evaluate(cell, *ds.eval_neighbours(cell))
    state.settle(cell, carried)
    if changed:
      left_changed.append(cell)
      if i < i_b:
        heapq.heappush(pending, i + 1)

  return (state.delta("T", box, top_changed),
          state.delta("L", box, left_changed))


def propagate_bottom_right(
    ds: sparse_ds.SparseDs, box: Box, delta_top: DeltaList,
    delta_left: DeltaList,
    state: _UpdateState) -> Tuple[DeltaList, DeltaList]:
  """Repairs the bottom row and the right column of a box.

  An exit is re-evaluated when its start changed, when the neighbour of the
  start that its value depends on changed, or when it was seeded. Once all
  exits hold their new values, `D'` of an exit is the `D'` of its start plus
  one local cost per diagonal step.

  Args:
    ds: the table.
    box: the box to repair.
    delta_top: Δ_T of the box.
    delta_left: Δ_L of the box.
    state: the update state.

  Returns:
    Δ_B and Δ_R of the box.
  """
  i_t, i_b, j_l, j_r = ds.box_bounds(box)
  carried = {(i_t, j): dprime for j, dprime in delta_top.entries}
  carried.update({(i, j_l): dprime for i, dprime in delta_left.entries})
  exits_changed = []
  if i_b > i_t and j_r > j_l:
    starts = set()
    for j, _ in delta_top.entries:
      if j < j_r:
        starts.add((i_t, j))
      if j > j_l:
        starts.add((i_t, j - 1))
    for i, _ in delta_left.entries:
      if i == i_t:
        continue
      if i < i_b:
        starts.add((i, j_l))
      starts.add((i - 1, j_l))
    for handle in state.seeds.get(box, ()):
      cell = ds.cells[handle]
      if ds.is_exit(cell.i, cell.j):
        si, sj, _ = ds.start_of(cell.i, cell.j)
        starts.add((si, sj))
    evaluated = []
    for si, sj in sorted(starts):
      exit_cell, u, l = ds.eval_exit(ds.cell_at(si, sj))
      if state.evaluate(exit_cell, u, l):
        exits_changed.append(exit_cell)
      evaluated.append(exit_cell)
    for exit_cell in sorted(evaluated, key=lambda c: (c.i, c.j)):
      state.settle(exit_cell, carried)

  top = [ds.cell_at(i_t, j) for j, _ in delta_top.entries]
  left = [ds.cell_at(i, j_l) for i, _ in delta_left.entries]
  if i_b == i_t:
    bottom = top
  else:
    bottom = [c for c in left if c.i == i_b]
    bottom += [c for c in exits_changed if c.i == i_b]
  if j_r == j_l:
    right = left
  else:
    right = [c for c in top if c.j == j_r]
    right += [c for c in exits_changed if c.j == j_r]
  return state.delta("B", box, bottom), state.delta("R", box, right)


def _propagate(ds: sparse_ds.SparseDs, state: _UpdateState):
  rows, cols = ds.a.size, ds.b.size
  while state.queue:
    box = heapq.heappop(state.queue)
    state.boxes_visited += 1
    delta_top, delta_left = propagate_top_left(
        ds, box, state.from_above.pop(box, None),
        state.from_left.pop(box, None), state)
    delta_bottom, delta_right = propagate_bottom_right(
        ds, box, delta_top, delta_left, state)
    row_run, col_run = box
    if delta_bottom.entries and row_run + 1 < rows:
      state.from_above[(row_run + 1, col_run)] = delta_bottom
      state.schedule((row_run + 1, col_run))
    if delta_right.entries and col_run + 1 < cols:
      state.from_left[(row_run, col_run + 1)] = delta_right
      state.schedule((row_run, col_run + 1))


def _apply(ds: sparse_ds.SparseDs, op: EditOp,
           keep_deltas: bool) -> UpdateStats:
  started = time.perf_counter_ns()
  validate_edit(ds.b, op)
  op = normalize_edit(ds.b, op)
  ell = offset_for(op)
  if is_noop(ds.b, op):
    return UpdateStats(chg=0, cells_touched=0, structural_cells=0,
                       elapsed_ns=time.perf_counter_ns() - started,
                       ell=ell.ell, position=op.position,
                       delta_lists=() if keep_deltas else None)
  state = initial_step(ds, op, ell, keep_deltas)
  _propagate(ds, state)
  structural = len(state.created) + state.destroyed
  touched = (state.evaluations + state.reads + state.dprime_reads +
             structural + len(state.relinked - state.created))
  stats = UpdateStats(
      chg=len(state.changed),
      cells_touched=touched,
      structural_cells=structural,
      elapsed_ns=time.perf_counter_ns() - started,
      ell=ell.ell,
      position=op.position,
      boxes_visited=state.boxes_visited,
      dprime_reads=state.dprime_reads,
      delta_lists=(tuple(state.delta_lists)
                   if state.delta_lists is not None else None))
  logging.vlog(1, "Applied `%s` at %d: chg=%d touched=%d boxes=%d",
               op.kind.value, op.position, stats.chg, stats.cells_touched,
               stats.boxes_visited)
  return stats


def apply_edit(ds: sparse_ds.SparseDs, op: EditOp,
               keep_deltas: bool = False) -> UpdateStats:
  """Applies a single-character edit of `B` and repairs the table.

  Args:
    ds: the table, modified in place.
    op: an insertion, deletion or substitution of one character.
    keep_deltas: whether to return every Δ-list in the stats.

  Returns:
    The accounting of the update.

  Raises:
    WouldEmptyStringError: `op` deletes the last character of `B`.
    PositionOutOfRangeError: `op.position` is out of range.
    CharacterOutOfRangeError: `op.char` is out of range.
  """
  if op.kind not in SINGLE_KINDS:
    raise base.DynDtwError(f"`{op.kind.value}` is run-wise; use "
                           "apply_batched_edit")
  return _apply(ds, op, keep_deltas)


def apply_batched_edit(ds: sparse_ds.SparseDs, op: EditOp,
                       keep_deltas: bool = False) -> UpdateStats:
  """Applies a run-wise edit of `B` as one splice.

  Args:
    ds: the table, modified in place.
    op: an insertion, deletion or substitution of a run.
    keep_deltas: whether to return every Δ-list in the stats.

  Returns:
    The accounting of the update.

  Raises:
    NotARunError: the removed segment is not one repeated character.
    WouldEmptyStringError, PositionOutOfRangeError, CharacterOutOfRangeError:
      as for `apply_edit`.
  """
  if op.kind not in RUN_KINDS:
    raise base.DynDtwError(f"`{op.kind.value}` is not run-wise; use "
                           "apply_edit")
  return _apply(ds, op, keep_deltas)


def apply_any(ds: sparse_ds.SparseDs, op: EditOp,
              keep_deltas: bool = False) -> UpdateStats:
  if op.is_run_wise:
    return apply_batched_edit(ds, op, keep_deltas)
  return apply_edit(ds, op, keep_deltas)


def right_end_fastpath(ds: sparse_ds.SparseDs, op: EditOp) -> UpdateStats:
  """Applies an edit at the right end of `B`.

  No column lies right of the edit, so nothing propagates beyond the last
  box column and the general update already runs in `O(m + n)`.

  Args:
    ds: the table, modified in place.
    op: an edit at position `n` (or `n + 1` for an insertion).

  Returns:
    The accounting of the update.
  """
  start, removed, _ = splice_of(op)
  if start + max(removed, 1) - 1 < ds.n:
    raise base.PositionOutOfRangeError(
        f"position {start} is not at the right end of B (n={ds.n})")
  return apply_any(ds, op)


def within_work_bound(stats: UpdateStats, m: int, n: int,
                      constant: int = base.WORK_BOUND_CONSTANT) -> bool:
  return stats.cells_touched <= constant * (m + n + stats.chg)


def diff_for_edit(before: Mapping[base.Coordinate, Tuple[int, int]],
                  after: Mapping[base.Coordinate, Tuple[int, int]],
                  b: core_types.RleString,
                  op: EditOp) -> List[sparse_ds.DiffEntry]:
  """Diffs two dumps under the column correspondence of `op` applied to `b`."""
  op = normalize_edit(b, op)
  start, removed, inserted = splice_of(op)
  return sparse_ds.diff_dumps(before, after, start, removed, len(inserted))


def transpose_problem(ds: sparse_ds.SparseDs) -> sparse_ds.SparseDs:
  """Builds the table of `(B, A)`, for callers that need to edit `A`."""
  return sparse_ds.build_ds(ds.b, ds.a)


def as_single_edits(op: EditOp) -> List[EditOp]:
  """Expands a run-wise edit into single-character edits with the same `B'`.

  Substitutions insert before they delete, so the intermediate strings are
  never empty.
  """
  start, removed, inserted = splice_of(op)
  edits = [insert(start, c) for c in inserted]
  edits += [delete(start + len(inserted)) for _ in range(removed)]
  return edits
