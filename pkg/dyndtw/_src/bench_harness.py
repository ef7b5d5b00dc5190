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
"""Experiments comparing dynamic updates with rebuilding from scratch."""

import csv
import multiprocessing
import time
from typing import Callable, Dict, IO, Iterable, List, NamedTuple, Sequence

from absl import logging
import chex
import numpy as np

from dyndtw._src import base
from dyndtw._src import core_types
from dyndtw._src import dynamic_update
from dyndtw._src import edit_script
from dyndtw._src import instances
from dyndtw._src import oracle
from dyndtw._src import sparse_ds

CSV_COLUMNS = ("trial", "m", "n", "M", "N", "edit", "chg", "ds_size",
               "cells_touched", "update_ns", "dense_rebuild_ns",
               "sparse_rebuild_ns")
EDIT_MODES = ("first", "last", "middle", "random")


@chex.dataclass(frozen=True)
class TrialRecord:
  """The measurements of one edit on one instance.

  trial: the trial number within its experiment point.
  m, n: the lengths of `A` and `B` before the edit.
  a_runs, b_runs: the RLE sizes `M` and `N` before the edit.
  edit: the edit as a script line.
  chg: the number of changed cells.
  ds_size: the number of stored cells after the edit.
  cells_touched: the work counter of the update.
  update_ns: mean duration of the update.
  dense_rebuild_ns: mean duration of the dense table of the edited pair.
  sparse_rebuild_ns: mean duration of building the sparse table from scratch.
  """
  trial: int
  m: int
  n: int
  a_runs: int
  b_runs: int
  edit: str
  chg: int
  ds_size: int
  cells_touched: int
  update_ns: int = 0
  dense_rebuild_ns: int = 0
  sparse_rebuild_ns: int = 0

  def row(self) -> Dict[str, object]:
    return dict(zip(CSV_COLUMNS, (
        self.trial, self.m, self.n, self.a_runs, self.b_runs, self.edit,
        self.chg, self.ds_size, self.cells_touched, self.update_ns,
        self.dense_rebuild_ns, self.sparse_rebuild_ns)))


class _Task(NamedTuple):
  seed: int
  point: int
  trial: int
  m: int
  n: int
  a_runs: int
  b_runs: int
  alphabet_size: int
  edit: str
  audit_fraction: float
  timed: bool


def mean_ns(run: Callable[[], int],
            min_total_ns: int = base.MIN_TIMED_NS) -> int:
  """Repeats `run`, which returns its own duration, until enough time passed.

  Returns:
    The mean duration over all repetitions.
  """
  total, count = 0, 0
  while total < min_total_ns or not count:
    total += run()
    count += 1
  return total // count


def _timed(fn: Callable[[], object]) -> int:
  started = time.perf_counter_ns()
  fn()
  return time.perf_counter_ns() - started


def choose_edit(mode: str, rng: np.random.Generator,
                b: core_types.RleString) -> dynamic_update.EditOp:
  """Returns the edit of a trial: a fixed deletion or a random edit."""
  if mode == "first":
    return dynamic_update.delete(1)
  if mode == "last":
    return dynamic_update.delete(b.length)
  if mode == "middle":
    return dynamic_update.delete((b.length + 1) // 2)
  if mode == "random":
    return instances.random_edit(rng, b)
  raise base.DynDtwError(f"unknown edit mode {mode!r}; use one of {EDIT_MODES}")


def undo_edit(b: core_types.RleString,
              op: dynamic_update.EditOp) -> dynamic_update.EditOp:
  """Returns the edit that turns the result of `op` on `b` back into `b`."""
  start, removed, inserted = dynamic_update.splice_of(op)
  old = int(b.char_at(start)) if removed else None
  if not op.is_run_wise:
    if not removed:
      return dynamic_update.delete(start)
    if not inserted:
      return dynamic_update.insert(start, old)
    return dynamic_update.substitute(start, old)
  if not removed:
    return dynamic_update.delete_run(start, len(inserted))
  if not inserted:
    return dynamic_update.insert_run(start, old, removed)
  return dynamic_update.substitute_run(start, len(inserted), old, removed)


def measure(trial: int, a: core_types.RleString, b: core_types.RleString,
            op: dynamic_update.EditOp, audit: bool = False,
            timed: bool = True) -> TrialRecord:
  """Applies `op` to a fresh table of `(a, b)` and records the cost.

  Args:
    trial: the trial number to record.
    a: the string `A`.
    b: the string `B` before the edit.
    op: the edit.
    audit: whether to check `chg` against a diff of the cell dumps.
    timed: whether to time the update and both rebuilds.

  Returns:
    The record of the trial.

  Raises:
    VerificationError: the audit found a different number of changed cells.
  """
  ds = sparse_ds.build_ds(a, b)
  before = sparse_ds.dump_cells(ds) if audit else None
  stats = dynamic_update.apply_any(ds, op)
  if audit:
    diff = dynamic_update.diff_for_edit(
        before, sparse_ds.dump_cells(ds), b, op)
    if len(diff) != stats.chg:
      raise base.VerificationError(
          f"trial {trial}: chg={stats.chg} but the dumps differ in "
          f"{len(diff)} cells")
  update_ns = dense_ns = sparse_ns = 0
  if timed:
    edited = ds.b
    undo = undo_edit(b, op)

    def repeat_update() -> int:
      # The table is restored untimed, so no repetition rebuilds it.
      dynamic_update.apply_any(ds, undo)
      return dynamic_update.apply_any(ds, op).elapsed_ns

    update_ns = mean_ns(repeat_update)
    dense_ns = mean_ns(lambda: _timed(
        lambda: oracle.dense_dr(oracle.dense_dtw(a, edited))))
    sparse_ns = mean_ns(lambda: _timed(lambda: sparse_ds.build_ds(a, edited)))
  return TrialRecord(
      trial=trial, m=a.length, n=b.length, a_runs=a.size, b_runs=b.size,
      edit=edit_script.format_op(op), chg=stats.chg, ds_size=ds.size,
      cells_touched=stats.cells_touched, update_ns=update_ns,
      dense_rebuild_ns=dense_ns, sparse_rebuild_ns=sparse_ns)


def _run_task(task: _Task) -> tuple:
  # Workers return plain tuples so results pickle cheaply.
  rng = np.random.default_rng([task.seed, task.point, task.trial])
  a = instances.gen_random(
      instances.RandomSpec(length=task.m, rle_size=task.a_runs,
                           alphabet_size=task.alphabet_size), rng)
  b = instances.gen_random(
      instances.RandomSpec(length=task.n, rle_size=task.b_runs,
                           alphabet_size=task.alphabet_size), rng)
  audit = bool(rng.random() < task.audit_fraction)
  op = choose_edit(task.edit, rng, b)
  record = measure(task.trial, a, b, op, audit=audit, timed=task.timed)
  return tuple(record.row()[c] for c in CSV_COLUMNS)


def run_points(
    points: Sequence[tuple],
    seed: int,
    trials: int,
    edit: str = "first",
    alphabet_size: int = base.DEFAULT_ALPHABET_SIZE,
    workers: int = 1,
    audit_fraction: float = 0.05,
    timed: bool = True) -> List[TrialRecord]:
  """Runs `trials` random trials at every `(m, n, M, N)` point.

  Trial `t` of point `p` draws from `default_rng([seed, p, t])`, so results
  do not depend on the number of workers.

  Args:
    points: the `(m, n, M, N)` shapes.
    seed: the experiment seed.
    trials: the number of trials per point.
    edit: one of `EDIT_MODES`.
    alphabet_size: characters are drawn from `1..alphabet_size`.
    workers: the size of the process pool; 1 runs in process.
    audit_fraction: the expected share of trials checked against a dump diff.
    timed: whether to time updates and rebuilds.

  Returns:
    The records ordered by point and trial.
  """
  tasks = [
      _Task(seed, p, t, m, n, a_runs, b_runs, alphabet_size, edit,
            audit_fraction, timed)
      for p, (m, n, a_runs, b_runs) in enumerate(points)
      for t in range(trials)]
  if workers > 1:
    with multiprocessing.Pool(processes=workers) as pool:
      rows = pool.map(_run_task, tasks)
  else:
    rows = [_run_task(task) for task in tasks]
  records = []
  for row in rows:
    values = dict(zip(CSV_COLUMNS, row))
    records.append(TrialRecord(
        trial=values["trial"], m=values["m"], n=values["n"],
        a_runs=values["M"], b_runs=values["N"], edit=values["edit"],
        chg=values["chg"], ds_size=values["ds_size"],
        cells_touched=values["cells_touched"],
        update_ns=values["update_ns"],
        dense_rebuild_ns=values["dense_rebuild_ns"],
        sparse_rebuild_ns=values["sparse_rebuild_ns"]))
  for p, point in enumerate(points):
    logging.info("Point %d %s: %d trials done", p, point, trials)
  return records


def run_experiment_1(seed: int, trials: int = 50, rle_size: int = 50,
                     lengths: Iterable[int] = range(50, 501, 50),
                     **kwargs) -> List[TrialRecord]:
  """Fixed RLE size `M = N`, growing lengths `m = n`."""
  points = [(m, m, rle_size, rle_size) for m in lengths]
  return run_points(points, seed, trials, **kwargs)


def run_experiment_2(seed: int, trials: int = 50, length: int = 500,
                     rle_sizes: Iterable[int] = range(10, 501, 10),
                     **kwargs) -> List[TrialRecord]:
  """Fixed length `m = n`, growing RLE sizes `M = N`."""
  points = [(length, length, size, size) for size in rle_sizes]
  return run_points(points, seed, trials, **kwargs)


def _check_bound(record: TrialRecord):
  if not instances.meets_lower_bound(record.chg, record.m, record.n,
                                     record.a_runs, record.b_runs):
    bound = instances.changed_cells_lower_bound(record.m, record.n,
                                                record.a_runs, record.b_runs)
    raise base.BoundViolatedError(
        f"chg={record.chg} is below the lower bound {bound} for "
        f"m={record.m} n={record.n} M={record.a_runs} N={record.b_runs}")


def run_adversarial(a_runs: int, b_runs: int, k: int, l: int,
                    timed: bool = True) -> TrialRecord:
  """Deletes `B[1]` from the worst-case pair and checks the lower bound.

  Raises:
    BoundViolatedError: fewer cells changed than the bound allows.
  """
  a, b = instances.gen_adversarial(
      instances.AdversarialSpec(a_runs=a_runs, b_runs=b_runs, k=k, l=l))
  record = measure(0, a, b, dynamic_update.delete(1), audit=True,
                   timed=timed)
  _check_bound(record)
  logging.info("Adversarial M=%d N=%d k=%d l=%d: chg=%d of %d cells",
               a_runs, b_runs, k, l, record.chg, record.ds_size)
  return record


def run_prepend_script(m: int, steps: int) -> List[TrialRecord]:
  """Replays the prepend script on an `m x m` pair with unit exponents.

  Every step is checked against the lower bound for the dimensions before
  that step.

  Raises:
    BoundViolatedError: a step changed fewer cells than the bound allows.
  """
  a, b = instances.gen_adversarial(
      instances.AdversarialSpec(a_runs=m, b_runs=m))
  ds = sparse_ds.build_ds(a, b)
  records = []
  for step, op in enumerate(instances.gen_prepend_script(a, b, steps)):
    n, b_runs = ds.n, ds.b.size
    stats = dynamic_update.apply_edit(ds, op)
    record = TrialRecord(
        trial=step, m=ds.m, n=n, a_runs=a.size, b_runs=b_runs,
        edit=edit_script.format_op(op), chg=stats.chg, ds_size=ds.size,
        cells_touched=stats.cells_touched, update_ns=stats.elapsed_ns)
    _check_bound(record)
    records.append(record)
  return records


def summarize(records: Sequence[TrialRecord],
              key: str = "m") -> List[Dict[str, object]]:
  """Averages the numeric columns of all records sharing a `key` column.

  Returns:
    One CSV row per distinct key value, in order of first appearance, with
    `trial` set to `mean`.
  """
  groups: Dict[object, List[Dict[str, object]]] = {}
  for record in records:
    row = record.row()
    groups.setdefault(row[key], []).append(row)
  summary = []
  for rows in groups.values():
    mean = {"trial": "mean"}
    for column in CSV_COLUMNS[1:]:
      values = [row[column] for row in rows]
      if column == "edit":
        mean[column] = values[0] if len(set(values)) == 1 else "*"
      else:
        mean[column] = f"{np.mean(values):.2f}"
    summary.append(mean)
  return summary


def write_csv(records: Sequence[TrialRecord], out: IO[str],
              summary_key: str = "m"):
  """Writes the records followed by their per-point means."""
  writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
  writer.writeheader()
  for record in records:
    writer.writerow(record.row())
  for row in summarize(records, summary_key):
    writer.writerow(row)
