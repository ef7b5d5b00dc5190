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
"""The edit-script text format.

One command per line, `#` starts a comment:

  ins <j> <c>          insert character c before position j
  del <j>              delete the character at position j
  sub <j> <c>          substitute the character at position j by c
  insrun <j> <c> <k>   insert k copies of c before position j
  delrun <j> <k>       delete the k characters starting at position j
  subrun <j> <k1> <c> <k2>
                       replace the k1 characters starting at j by k2 copies
                       of c
  query                print the squared distance and the distance
  path                 print a warping path
  stats                print the accounting of the last edit
"""

from typing import Iterable, List, NamedTuple, Optional

from dyndtw._src import base
from dyndtw._src import dynamic_update

EditKind = dynamic_update.EditKind

QUERY = "query"
PATH = "path"
STATS = "stats"
_COMMANDS = (QUERY, PATH, STATS)

# Integer fields following each edit verb, in order.
_FIELDS = {
    EditKind.INSERT_CHAR: ("position", "char"),
    EditKind.DELETE_CHAR: ("position",),
    EditKind.SUBSTITUTE_CHAR: ("position", "char"),
    EditKind.INSERT_RUN: ("position", "char", "k"),
    EditKind.DELETE_RUN: ("position", "k"),
    EditKind.SUBSTITUTE_RUN: ("position", "k1", "char", "k2"),
}
_VERBS = {kind.value: kind for kind in EditKind}


class ScriptLine(NamedTuple):
  """One command of a script.

  Exactly one of `op` and `command` is set.
  """
  line: int
  op: Optional[dynamic_update.EditOp] = None
  command: Optional[str] = None


def parse_line(text: str, line: int = 1) -> Optional[ScriptLine]:
  """Parses one script line; returns None for blank and comment lines.

  Raises:
    ScriptError: unknown verb, wrong number of fields or a non-integer field.
  """
  tokens = text.split("#", 1)[0].split()
  if not tokens:
    return None
  verb, args = tokens[0], tokens[1:]
  if verb in _COMMANDS:
    if args:
      raise base.ScriptError(f"`{verb}` takes no arguments", line)
    return ScriptLine(line=line, command=verb)
  kind = _VERBS.get(verb)
  if kind is None:
    raise base.ScriptError(f"unknown command `{verb}`", line)
  fields = _FIELDS[kind]
  if len(args) != len(fields):
    raise base.ScriptError(
        f"`{verb}` takes {len(fields)} arguments, got {len(args)}", line)
  values = {}
  for name, token in zip(fields, args):
    try:
      values[name] = int(token)
    except ValueError:
      raise base.ScriptError(f"not an integer: {token!r}", line) from None
  return ScriptLine(line=line, op=dynamic_update.EditOp(kind=kind, **values))


def parse_script(text: str) -> List[ScriptLine]:
  """Parses a whole script, skipping blank and comment lines."""
  parsed = (parse_line(raw, number)
            for number, raw in enumerate(text.splitlines(), start=1))
  return [line for line in parsed if line is not None]


def read_script_file(path: str) -> List[ScriptLine]:
  """Reads and parses a UTF-8 edit script.

  Raises:
    ScriptError: the file is not UTF-8 text or a line is malformed.
    OSError: the file cannot be read.
  """
  try:
    with open(path, encoding="utf-8") as f:
      text = f.read()
  except UnicodeDecodeError as e:
    raise base.ScriptError(f"{path} is not UTF-8 text: {e.reason}") from None
  return parse_script(text)


def format_op(op: dynamic_update.EditOp) -> str:
  fields = (getattr(op, name) for name in _FIELDS[op.kind])
  return " ".join([op.kind.value] + [str(int(v)) for v in fields])


def format_script(lines: Iterable[ScriptLine]) -> str:
  """Formats script lines as text, newline terminated."""
  out = []
  for line in lines:
    out.append(line.command if line.op is None else format_op(line.op))
  return "".join(f"{text}\n" for text in out)
