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
"""Dyndtw: dynamic time warping under edits of run-length encoded strings."""

from dyndtw._src.base import BoundViolatedError
from dyndtw._src.base import CharacterOutOfRangeError
from dyndtw._src.base import DynDtwError
from dyndtw._src.base import EmptyInputError
from dyndtw._src.base import InfeasibleSpecError
from dyndtw._src.base import NotABoundaryCellError
from dyndtw._src.base import NotARunError
from dyndtw._src.base import ParseError
from dyndtw._src.base import PositionOutOfRangeError
from dyndtw._src.base import ScriptError
from dyndtw._src.base import VerificationError
from dyndtw._src.base import WouldEmptyStringError
from dyndtw._src.bench_harness import run_adversarial
from dyndtw._src.bench_harness import run_experiment_1
from dyndtw._src.bench_harness import run_experiment_2
from dyndtw._src.bench_harness import run_prepend_script
from dyndtw._src.bench_harness import summarize
from dyndtw._src.bench_harness import TrialRecord
from dyndtw._src.bench_harness import write_csv
from dyndtw._src.core_types import format_sequence
from dyndtw._src.core_types import parse_sequence
from dyndtw._src.core_types import read_sequence_file
from dyndtw._src.core_types import rle_decode
from dyndtw._src.core_types import rle_encode
from dyndtw._src.core_types import rle_from_runs
from dyndtw._src.core_types import RleString
from dyndtw._src.core_types import Run
from dyndtw._src.dynamic_update import apply_any
from dyndtw._src.dynamic_update import apply_batched_edit
from dyndtw._src.dynamic_update import apply_edit
from dyndtw._src.dynamic_update import DeltaList
from dyndtw._src.dynamic_update import delete
from dyndtw._src.dynamic_update import delete_run
from dyndtw._src.dynamic_update import diff_for_edit
from dyndtw._src.dynamic_update import EditKind
from dyndtw._src.dynamic_update import EditOp
from dyndtw._src.dynamic_update import insert
from dyndtw._src.dynamic_update import insert_run
from dyndtw._src.dynamic_update import normalize_edit
from dyndtw._src.dynamic_update import offset_for
from dyndtw._src.dynamic_update import OffsetEll
from dyndtw._src.dynamic_update import right_end_fastpath
from dyndtw._src.dynamic_update import substitute
from dyndtw._src.dynamic_update import substitute_run
from dyndtw._src.dynamic_update import transpose_problem
from dyndtw._src.dynamic_update import UpdateStats
from dyndtw._src.dynamic_update import within_work_bound
from dyndtw._src.edit_script import format_script
from dyndtw._src.edit_script import parse_script
from dyndtw._src.edit_script import ScriptLine
from dyndtw._src.instances import AdversarialSpec
from dyndtw._src.instances import changed_cells_lower_bound
from dyndtw._src.instances import gen_adversarial
from dyndtw._src.instances import gen_prepend_script
from dyndtw._src.instances import gen_random
from dyndtw._src.instances import meets_lower_bound
from dyndtw._src.instances import RandomSpec
from dyndtw._src.oracle import backtrack_path
from dyndtw._src.oracle import dense_dr
from dyndtw._src.oracle import dense_dr_recursive
from dyndtw._src.oracle import dense_dtw
from dyndtw._src.oracle import DenseDp
from dyndtw._src.oracle import DenseDr
from dyndtw._src.oracle import dtw_distance
from dyndtw._src.oracle import WarpingPath
from dyndtw._src.sparse_ds import audit_structure
from dyndtw._src.sparse_ds import audit_values
from dyndtw._src.sparse_ds import build_ds
from dyndtw._src.sparse_ds import diff_dumps
from dyndtw._src.sparse_ds import ds_cell_at
from dyndtw._src.sparse_ds import ds_dump
from dyndtw._src.sparse_ds import ds_path
from dyndtw._src.sparse_ds import ds_size
from dyndtw._src.sparse_ds import ds_value
from dyndtw._src.sparse_ds import SparseDs
from dyndtw._src.sparse_ds import verify

__version__ = "0.1.0"

__all__ = (
    "AdversarialSpec",
    "BoundViolatedError",
    "CharacterOutOfRangeError",
    "DeltaList",
    "DenseDp",
    "DenseDr",
    "DynDtwError",
    "EditKind",
    "EditOp",
    "EmptyInputError",
    "InfeasibleSpecError",
    "NotABoundaryCellError",
    "NotARunError",
    "OffsetEll",
    "ParseError",
    "PositionOutOfRangeError",
    "RandomSpec",
    "RleString",
    "Run",
    "ScriptError",
    "ScriptLine",
    "SparseDs",
    "TrialRecord",
    "UpdateStats",
    "VerificationError",
    "WarpingPath",
    "WouldEmptyStringError",
    "apply_any",
    "apply_batched_edit",
    "apply_edit",
    "audit_structure",
    "audit_values",
    "backtrack_path",
    "build_ds",
    "changed_cells_lower_bound",
    "dense_dr",
    "dense_dr_recursive",
    "dense_dtw",
    "delete",
    "delete_run",
    "diff_dumps",
    "diff_for_edit",
    "ds_cell_at",
    "ds_dump",
    "ds_path",
    "ds_size",
    "ds_value",
    "dtw_distance",
    "format_script",
    "format_sequence",
    "gen_adversarial",
    "gen_prepend_script",
    "gen_random",
    "insert",
    "insert_run",
    "meets_lower_bound",
    "normalize_edit",
    "offset_for",
    "parse_script",
    "parse_sequence",
    "read_sequence_file",
    "right_end_fastpath",
    "rle_decode",
    "rle_encode",
    "rle_from_runs",
    "run_adversarial",
    "run_experiment_1",
    "run_experiment_2",
    "run_prepend_script",
    "substitute",
    "substitute_run",
    "summarize",
    "transpose_problem",
    "verify",
    "within_work_bound",
    "write_csv",
)

#  ___________________________________________
# / Please don't use symbols in `_src` they   \
# \ are not part of the Dyndtw public API.    /
#  -------------------------------------------
#         \   ^__^
#          \  (oo)\_______
#             (__)\       )\/\
#                 ||----w |
#                 ||     ||
#
