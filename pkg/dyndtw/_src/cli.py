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
"""The `dyndtw` command line.

Usage:
  dyndtw dtw --a=A --b=B [--path]
  dyndtw session --a=A --b=B --script=S [--verify]
  dyndtw gen --mode=random --m=500 --M=50 [--alphabet=26] [--rle] [--out=F]
  dyndtw gen --mode=adversarial --M=20 --N=20 --k=5 --l=5 --out=A --out_b=B
  dyndtw bench --experiment=1|2|adversarial|prepend [--trials=50]
      [--range=start:stop:step] [--edit=first] [--workers=1] [--out=F]
  dyndtw audit --a=A --b=B --edit="del 1"

Exit codes: 0 on success, 2 for unreadable or malformed input, 3 for a
malformed script or an edit that cannot be applied, 4 when a verification or
a lower bound fails.
"""

import contextlib
import math
import os
import sys
from typing import IO, List, Optional, Sequence, Tuple

from absl import app
from absl import flags
from absl import logging
import chex

from dyndtw._src import base
from dyndtw._src import bench_harness
from dyndtw._src import core_types
from dyndtw._src import dynamic_update
from dyndtw._src import edit_script
from dyndtw._src import instances
from dyndtw._src import oracle
from dyndtw._src import sparse_ds

COMMANDS = ("dtw", "session", "gen", "bench", "audit")
EXPERIMENTS = ("1", "2", "adversarial", "prepend")
SEED_ENV = "DYNDTW_SEED"

_A = flags.DEFINE_string("a", None, "Sequence file of A.")
_B = flags.DEFINE_string("b", None, "Sequence file of B.")
_SCRIPT = flags.DEFINE_string("script", None, "Edit script for `session`.")
_OUT = flags.DEFINE_string("out", None, "Output file; stdout when unset.")
_OUT_B = flags.DEFINE_string(
    "out_b", None, "Output file of B for `gen --mode=adversarial`.")
_SEED = flags.DEFINE_integer(
    "seed", None, f"Random seed; falls back to ${SEED_ENV}, then 0.")
_VERIFY = flags.DEFINE_bool(
    "verify", False, "Check every session step against the dense oracle.")
_PATH = flags.DEFINE_bool("path", False, "Also print a warping path.")
_MODE = flags.DEFINE_enum("mode", "random", ["random", "adversarial"],
                          "Instance family for `gen`.")
_RLE = flags.DEFINE_bool("rle", False, "Write sequences in `char exponent` "
                         "form.")
_LENGTH = flags.DEFINE_integer(
    "m", None, "Length of a random string (100), of the experiment 2 "
    "strings (500) or of the `prepend` pair (50).")
_A_RUNS = flags.DEFINE_integer(
    "M", None, "RLE size of a random string (10) or of the experiment 1 "
    "strings (50); number of runs of adversarial A (20).")
_B_RUNS = flags.DEFINE_integer(
    "N", None, "Number of runs of adversarial B (20).")
_K = flags.DEFINE_integer(
    "k", None, "Exponent of the runs of adversarial A (5).")
_L = flags.DEFINE_integer(
    "l", None, "Exponent of the runs of adversarial B (5).")
_ALPHABET = flags.DEFINE_integer("alphabet", base.DEFAULT_ALPHABET_SIZE,
                                 "Alphabet size of random strings.")
_EXPERIMENT = flags.DEFINE_enum("experiment", "1", list(EXPERIMENTS),
                                "Experiment run by `bench`.")
_TRIALS = flags.DEFINE_integer("trials", 50, "Trials per experiment point.")
_RANGE = flags.DEFINE_string(
    "range", None, "Experiment points as start:stop:step, stop inclusive.")
_EDIT = flags.DEFINE_string(
    "edit", None, "For `bench`: first, last, middle or random. For `audit`: "
    "one script line.")
_WORKERS = flags.DEFINE_integer("workers", 1, "Processes used by `bench`.")
_AUDIT_FRACTION = flags.DEFINE_float(
    "audit_fraction", 0.05, "Share of bench trials checked by a dump diff.")
_STEPS = flags.DEFINE_integer("steps", 10, "Steps of the `prepend` script.")


class InputError(base.DynDtwError):
  """An input file or flag cannot be used."""


_SCRIPT_ERRORS = (base.ScriptError, base.WouldEmptyStringError,
                  base.PositionOutOfRangeError, base.CharacterOutOfRangeError,
                  base.NotARunError)
_CHECK_ERRORS = (base.VerificationError, base.BoundViolatedError)


@chex.dataclass(frozen=True)
class CliConfig:
  """Everything a command needs, folded from the flags.

  command: one of `COMMANDS`.
  a_path, b_path: sequence files of `A` and `B`.
  script_path: the edit script of `session`.
  out_path: where results go; stdout when None.
  out_b_path: where `gen --mode=adversarial` writes `B`.
  seed: the random seed.
  verbosity: the absl logging verbosity.
  length, a_runs, b_runs, k, l: instance sizes; None selects the default of
    the command.
  """
  command: str
  a_path: Optional[str] = None
  b_path: Optional[str] = None
  script_path: Optional[str] = None
  out_path: Optional[str] = None
  out_b_path: Optional[str] = None
  seed: int = 0
  verbosity: int = 0
  verify: bool = False
  path: bool = False
  mode: str = "random"
  rle: bool = False
  length: Optional[int] = None
  a_runs: Optional[int] = None
  b_runs: Optional[int] = None
  k: Optional[int] = None
  l: Optional[int] = None
  alphabet_size: int = base.DEFAULT_ALPHABET_SIZE
  experiment: str = "1"
  trials: int = 50
  point_range: Optional[Tuple[int, int, int]] = None
  edit: Optional[str] = None
  workers: int = 1
  audit_fraction: float = 0.05
  steps: int = 10


def parse_range(text: str) -> Tuple[int, int, int]:
  """Parses `start:stop:step`; `stop` is inclusive."""
  parts = text.split(":")
  try:
    start, stop, step = (int(p) for p in parts)
  except ValueError:
    raise InputError(f"--range must be start:stop:step, got {text!r}") from None
  if step < 1 or start < 1 or stop < start:
    raise InputError(f"--range {text!r} is empty or not increasing")
  return start, stop, step


def seed_from(flag_value: Optional[int]) -> int:
  if flag_value is not None:
    return flag_value
  value = os.environ.get(SEED_ENV)
  if not value:
    return 0
  try:
    return int(value)
  except ValueError:
    raise InputError(f"${SEED_ENV} is not an integer: {value!r}") from None


def config_from_flags(argv: Sequence[str]) -> CliConfig:
  """Builds the configuration from the parsed flags and positional args.

  Raises:
    InputError: the command is missing or unknown, or flags conflict.
  """
  if len(argv) != 2 or argv[1] not in COMMANDS:
    raise InputError(f"expected one command out of {COMMANDS}, got "
                     f"{list(argv[1:])}")
  command = argv[1]
  if _SCRIPT.value is not None and command != "session":
    raise InputError("--script only applies to `session`")
  if _OUT_B.value is not None and (command != "gen" or
                                   _MODE.value != "adversarial"):
    raise InputError("--out_b only applies to `gen --mode=adversarial`")
  return CliConfig(
      command=command,
      a_path=_A.value,
      b_path=_B.value,
      script_path=_SCRIPT.value,
      out_path=_OUT.value,
      out_b_path=_OUT_B.value,
      seed=seed_from(_SEED.value),
      verbosity=flags.FLAGS.verbosity,
      verify=_VERIFY.value,
      path=_PATH.value,
      mode=_MODE.value,
      rle=_RLE.value,
      length=_LENGTH.value,
      a_runs=_A_RUNS.value,
      b_runs=_B_RUNS.value,
      k=_K.value,
      l=_L.value,
      alphabet_size=_ALPHABET.value,
      experiment=_EXPERIMENT.value,
      trials=_TRIALS.value,
      point_range=parse_range(_RANGE.value) if _RANGE.value else None,
      edit=_EDIT.value,
      workers=_WORKERS.value,
      audit_fraction=_AUDIT_FRACTION.value,
      steps=_STEPS.value)


def _or(value: Optional[int], default: int) -> int:
  return default if value is None else value


def _read_pair(
    config: CliConfig) -> Tuple[core_types.RleString, core_types.RleString]:
  if not config.a_path or not config.b_path:
    raise InputError(f"`{config.command}` needs --a and --b")
  try:
    return (core_types.read_sequence_file(config.a_path),
            core_types.read_sequence_file(config.b_path))
  except (base.DynDtwError, OSError) as e:
    raise InputError(str(e)) from e


@contextlib.contextmanager
def _output(path: Optional[str], out: IO[str]):
  if path is None:
    yield out
  else:
    with open(path, "w", encoding="utf-8") as f:
      yield f
    logging.info("Wrote %s", path)


def _distance_line(d2: int) -> str:
  return f"{d2} {math.sqrt(d2)}\n"


def _path_lines(path: oracle.WarpingPath) -> str:
  return "".join(f"{i} {j}\n" for i, j in path.steps)


def _stats_line(stats: dynamic_update.UpdateStats) -> str:
  return (f"chg={stats.chg} cells_touched={stats.cells_touched} "
          f"structural_cells={stats.structural_cells} "
          f"elapsed_ns={stats.elapsed_ns}\n")


def cmd_dtw(config: CliConfig, out: IO[str]) -> int:
  a, b = _read_pair(config)
  ds = sparse_ds.build_ds(a, b)
  out.write(_distance_line(sparse_ds.ds_value(ds)))
  if config.path:
    out.write(_path_lines(sparse_ds.ds_path(ds)))
  return 0


def _check_step(ds: sparse_ds.SparseDs, before, b: core_types.RleString,
                op: dynamic_update.EditOp,
                stats: dynamic_update.UpdateStats, line: int):
  try:
    sparse_ds.verify(ds)
  except base.VerificationError as e:
    raise base.VerificationError(f"line {line}: {e}") from e
  diff = dynamic_update.diff_for_edit(before, sparse_ds.dump_cells(ds), b, op)
  if len(diff) != stats.chg:
    raise base.VerificationError(
        f"line {line}: chg={stats.chg} but {len(diff)} cells differ")


def cmd_session(config: CliConfig, out: IO[str]) -> int:
  """Replays a script, printing the results of `query`, `path` and `stats`."""
  a, b = _read_pair(config)
  if not config.script_path:
    raise InputError("`session` needs --script")
  try:
    lines = edit_script.read_script_file(config.script_path)
  except OSError as e:
    raise InputError(str(e)) from e
  ds = sparse_ds.build_ds(a, b)
  last = dynamic_update.UpdateStats(chg=0, cells_touched=0,
                                    structural_cells=0, elapsed_ns=0)
  for line in lines:
    if line.op is not None:
      before = sparse_ds.dump_cells(ds) if config.verify else None
      b_before = ds.b
      try:
        last = dynamic_update.apply_any(ds, line.op)
      except _SCRIPT_ERRORS as e:
        raise base.ScriptError(str(e), line.line) from e
      if config.verify:
        _check_step(ds, before, b_before, line.op, last, line.line)
    elif line.command == edit_script.QUERY:
      out.write(_distance_line(sparse_ds.ds_value(ds)))
    elif line.command == edit_script.PATH:
      out.write(_path_lines(sparse_ds.ds_path(ds)))
    else:
      out.write(_stats_line(last))
  logging.info("Session replayed %d lines", len(lines))
  return 0


def _adversarial_spec(config: CliConfig) -> instances.AdversarialSpec:
  return instances.AdversarialSpec(
      a_runs=_or(config.a_runs, 20), b_runs=_or(config.b_runs, 20),
      k=_or(config.k, 5), l=_or(config.l, 5))


def cmd_gen(config: CliConfig, out: IO[str]) -> int:
  """Writes a random string, or the adversarial pair, as sequence files."""
  try:
    if config.mode == "random":
      r = instances.gen_random(instances.RandomSpec(
          length=_or(config.length, 100), rle_size=_or(config.a_runs, 10),
          alphabet_size=config.alphabet_size, seed=config.seed))
      with _output(config.out_path, out) as f:
        f.write(core_types.format_sequence(r, rle=config.rle))
      return 0
    if not config.out_b_path:
      raise InputError("`gen --mode=adversarial` needs --out_b for B")
    a, b = instances.gen_adversarial(_adversarial_spec(config))
  except base.InfeasibleSpecError as e:
    raise InputError(str(e)) from e
  with _output(config.out_path, out) as f:
    f.write(core_types.format_sequence(a, rle=config.rle))
  with _output(config.out_b_path, out) as f:
    f.write(core_types.format_sequence(b, rle=config.rle))
  return 0


def _points(config: CliConfig, default: range) -> range:
  if config.point_range is None:
    return default
  start, stop, step = config.point_range
  return range(start, stop + 1, step)


def cmd_bench(config: CliConfig, out: IO[str]) -> int:
  """Runs one experiment and writes its CSV."""
  edit = config.edit or "first"
  if edit not in bench_harness.EDIT_MODES:
    raise InputError(f"--edit must be one of {bench_harness.EDIT_MODES}")
  options = dict(edit=edit, alphabet_size=config.alphabet_size,
                 workers=config.workers,
                 audit_fraction=config.audit_fraction)
  key = "m"
  try:
    if config.experiment == "1":
      records = bench_harness.run_experiment_1(
          config.seed, config.trials, rle_size=_or(config.a_runs, 50),
          lengths=_points(config, range(50, 501, 50)), **options)
    elif config.experiment == "2":
      records = bench_harness.run_experiment_2(
          config.seed, config.trials, length=_or(config.length, 500),
          rle_sizes=_points(config, range(10, 501, 10)), **options)
      key = "M"
    elif config.experiment == "adversarial":
      spec = _adversarial_spec(config)
      records = [bench_harness.run_adversarial(spec.a_runs, spec.b_runs,
                                               spec.k, spec.l)]
    else:
      records = bench_harness.run_prepend_script(
          _or(config.length, 50), config.steps)
  except base.InfeasibleSpecError as e:
    raise InputError(str(e)) from e
  with _output(config.out_path, out) as f:
    bench_harness.write_csv(records, f, summary_key=key)
  logging.info("Experiment %s: %d records", config.experiment, len(records))
  return 0


def _field(value: Optional[Tuple[int, int]], index: int) -> str:
  return "" if value is None else str(value[index])


def cmd_audit(config: CliConfig, out: IO[str]) -> int:
  """Prints the cells changed by one edit and compares their count with chg."""
  a, b = _read_pair(config)
  line = edit_script.parse_line(config.edit or "")
  if line is None or line.op is None:
    raise base.ScriptError("--edit must be one edit command", 1)
  ds = sparse_ds.build_ds(a, b)
  before = sparse_ds.dump_cells(ds)
  stats = dynamic_update.apply_any(ds, line.op)
  diff = dynamic_update.diff_for_edit(before, sparse_ds.dump_cells(ds), b,
                                      line.op)
  rows: List[str] = ["i,j,U_old,L_old,U_new,L_new\n"]
  for i, j, old, new in diff:
    rows.append(f"{i},{j},{_field(old, 0)},{_field(old, 1)},"
                f"{new[0]},{new[1]}\n")
  rows.append(f"chg {len(diff)} stats {stats.chg}\n")
  out.write("".join(rows))
  if len(diff) != stats.chg:
    raise base.VerificationError(
        f"the dumps differ in {len(diff)} cells but chg={stats.chg}")
  return 0


_HANDLERS = {
    "dtw": cmd_dtw,
    "session": cmd_session,
    "gen": cmd_gen,
    "bench": cmd_bench,
    "audit": cmd_audit,
}


def _fail(error: Exception, code: int) -> int:
  logging.error("%s", error)
  print(f"dyndtw: {error}", file=sys.stderr)
  return code


def run(config: CliConfig, out: IO[str]) -> int:
  """Runs one command and maps its errors onto exit codes."""
  try:
    return _HANDLERS[config.command](config, out)
  except InputError as e:
    return _fail(e, 2)
  except _CHECK_ERRORS as e:
    return _fail(e, 4)
  except _SCRIPT_ERRORS as e:
    return _fail(e, 3)
  except (base.DynDtwError, OSError) as e:
    return _fail(e, 2)


def main(argv: Sequence[str]) -> int:
  try:
    config = config_from_flags(argv)
  except InputError as e:
    return _fail(e, 2)
  return run(config, sys.stdout)


def main_entry():
  app.run(main)


if __name__ == "__main__":
  main_entry()
