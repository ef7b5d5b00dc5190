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
"""Tests for `cli.py`."""

import io
import os
import tempfile
from unittest import mock

from absl.testing import absltest
from absl.testing import parameterized
from dyndtw._src import cli
from dyndtw._src import core_types


class CliTest(parameterized.TestCase):

  def setUp(self):
    super().setUp()
    tmp = tempfile.TemporaryDirectory()
    self.addCleanup(tmp.cleanup)
    self._dir = tmp.name
    self._files = 0

  def _path(self):
    self._files += 1
    return os.path.join(self._dir, f"file_{self._files}.txt")

  def _file(self, content=None, raw=None):
    path = self._path()
    if content is not None:
      with open(path, "w", encoding="utf-8") as f:
        f.write(content)
    if raw is not None:
      with open(path, "wb") as f:
        f.write(raw)
    return path

  def _run(self, command, **kwargs):
    out = io.StringIO()
    code = cli.run(cli.CliConfig(command=command, **kwargs), out)
    return code, out.getvalue()

  @parameterized.named_parameters(
      ("equal", "1 1 2 2 2 3\n", "1 2 3 3\n", "0 0.0\n"),
      ("single", "5\n", "2\n", "9 3.0\n"),
      ("column", "# format: flat\n0 1\n", "0\n", "1 1.0\n"),
      ("insertion", "# format: flat\n0 2\n", "0 1 2\n", "1 1.0\n"),
  )
  def test_dtw(self, a, b, expected):
    code, text = self._run("dtw", a_path=self._file(a), b_path=self._file(b))
    self.assertEqual(0, code)
    self.assertEqual(expected, text)

  def test_dtw_path(self):
    code, text = self._run("dtw", a_path=self._file("# format: flat\n1 2\n"),
                           b_path=self._file("1 1 2\n"), path=True)
    self.assertEqual(0, code)
    lines = text.splitlines()
    self.assertEqual("0 0.0", lines[0])
    self.assertEqual("1 1", lines[1])
    self.assertEqual("2 3", lines[-1])

  def test_session(self):
    script = self._file("query\nsub 1 2\nquery\nstats\ndel 1\nquery\npath\n")
    code, text = self._run(
        "session", a_path=self._file("# format: flat\n2 3\n"),
        b_path=self._file("# format: flat\n5 3\n"), script_path=script,
        verify=True)
    self.assertEqual(0, code)
    lines = text.splitlines()
    self.assertEqual("9 3.0", lines[0])
    self.assertEqual("0 0.0", lines[1])
    self.assertTrue(lines[2].startswith("chg="))
    self.assertEqual("1 1.0", lines[3])
    self.assertEqual(["1 1", "2 1"], lines[4:])

  def test_noop_session(self):
    code, text = self._run(
        "session", a_path=self._file("3 2\n"), b_path=self._file("3 2\n"),
        script_path=self._file("sub 2 3\nquery\n"))
    self.assertEqual(0, code)
    self.assertEqual("0 0.0\n", text)

  def test_prepend_session_verifies(self):
    a_path = self._path()
    b_path = self._path()
    code, _ = self._run("gen", mode="adversarial", a_runs=8, b_runs=8, k=1,
                        l=1, out_path=a_path, out_b_path=b_path)
    self.assertEqual(0, code)
    script = self._file("ins 1 0\nins 1 -1\nins 1 -2\nquery\n")
    code, text = self._run("session", a_path=a_path, b_path=b_path,
                           script_path=script, verify=True)
    self.assertEqual(0, code)
    self.assertLen(text.splitlines(), 1)

  def test_inapplicable_edit(self):
    code, _ = self._run("session", a_path=self._file("1\n"),
                        b_path=self._file("# format: flat\n2\n"),
                        script_path=self._file("del 1\n"))
    self.assertEqual(3, code)

  def test_bad_verb(self):
    code, _ = self._run("session", a_path=self._file("1\n"),
                        b_path=self._file("2\n"),
                        script_path=self._file("query\ndrop 1\n"))
    self.assertEqual(3, code)

  def test_missing_file(self):
    missing = os.path.join(self._dir, "absent")
    code, _ = self._run("dtw", a_path=missing, b_path=self._file("2\n"))
    self.assertEqual(2, code)

  def test_malformed_sequence(self):
    code, _ = self._run("dtw", a_path=self._file("1 x\n"),
                        b_path=self._file("2\n"))
    self.assertEqual(2, code)

  @parameterized.named_parameters(
      ("flat_overflow", "# format: flat\n99999999999999999999999 1\n"),
      ("rle_overflow", "99999999999999999999999 1\n"),
      ("exponent_overflow", "1 99999999999999999999999\n"),
      ("character_bound", "# format: flat\n2000000 1\n"),
  )
  def test_out_of_range_sequence(self, content):
    code, _ = self._run("dtw", a_path=self._file(content),
                        b_path=self._file("2\n"))
    self.assertEqual(2, code)

  def test_sequence_not_utf8(self):
    code, _ = self._run("dtw", a_path=self._file(raw=b"\xff\xfe 1\n"),
                        b_path=self._file("2\n"))
    self.assertEqual(2, code)

  def test_script_not_utf8(self):
    code, _ = self._run("session", a_path=self._file("1\n"),
                        b_path=self._file("2\n"),
                        script_path=self._file(raw=b"query\n\xff\xfe\n"))
    self.assertEqual(3, code)

  def test_missing_script(self):
    code, _ = self._run("session", a_path=self._file("1\n"),
                        b_path=self._file("2\n"),
                        script_path=os.path.join(self._dir, "absent"))
    self.assertEqual(2, code)

  def test_audit_noop(self):
    code, text = self._run("audit", a_path=self._file("1 2 3\n"),
                           b_path=self._file("# format: flat\n4 5\n"),
                           edit="sub 2 5")
    self.assertEqual(0, code)
    self.assertEqual("i,j,U_old,L_old,U_new,L_new\nchg 0 stats 0\n", text)

  def test_audit_insert(self):
    code, text = self._run("audit", a_path=self._file("1 2 3\n"),
                           b_path=self._file("# format: flat\n4 5\n"),
                           edit="ins 3 1")
    self.assertEqual(0, code)
    lines = text.splitlines()
    self.assertIn("3,3,,,", text)
    self.assertRegex(lines[-1], r"^chg (\d+) stats \1$")

  @parameterized.named_parameters(
      ("same_character", "sub 5 5", 0),
      ("new_character", "sub 5 9", None),
      ("run", "subrun 4 3 1 2", None),
  )
  def test_audit_substitution(self, edit, expected):
    code, text = self._run(
        "audit", a_path=self._file("# format: flat\n5 2 2 4 4 3 3\n"),
        b_path=self._file("# format: flat\n2 2 2 5 5 5\n"), edit=edit)
    self.assertEqual(0, code)
    last = text.splitlines()[-1]
    self.assertRegex(last, r"^chg (\d+) stats \1$")
    if expected is not None:
      self.assertEqual(f"chg {expected} stats {expected}", last)

  def test_audit_adversarial_deletion(self):
    a_path = self._path()
    b_path = self._path()
    self._run("gen", mode="adversarial", a_runs=2, b_runs=2, k=2, l=2,
              out_path=a_path, out_b_path=b_path)
    code, text = self._run("audit", a_path=a_path, b_path=b_path,
                           edit="del 1")
    self.assertEqual(0, code)
    changed = int(text.splitlines()[-1].split()[1])
    self.assertGreaterEqual(changed, 2)

  def test_audit_needs_edit(self):
    code, _ = self._run("audit", a_path=self._file("1\n"),
                        b_path=self._file("2\n"), edit="query")
    self.assertEqual(3, code)

  def test_gen_random(self):
    path = self._path()
    code, _ = self._run("gen", length=30, a_runs=7, seed=4, out_path=path,
                        rle=True)
    self.assertEqual(0, code)
    r = core_types.read_sequence_file(path)
    self.assertEqual(30, r.length)
    self.assertEqual(7, r.size)

  def test_gen_infeasible(self):
    code, _ = self._run("gen", length=3, a_runs=4)
    self.assertEqual(2, code)

  def test_gen_adversarial_needs_second_file(self):
    code, _ = self._run("gen", mode="adversarial")
    self.assertEqual(2, code)

  def test_bench_prepend(self):
    code, text = self._run("bench", experiment="prepend", length=10, steps=3)
    self.assertEqual(0, code)
    lines = text.splitlines()
    self.assertTrue(lines[0].startswith("trial,m,n,M,N,edit,chg"))
    self.assertLen(lines, 1 + 3 + 1)

  def test_bench_experiment_1(self):
    code, text = self._run("bench", experiment="1", trials=2,
                           point_range=(8, 16, 8), a_runs=4,
                           audit_fraction=1.0)
    self.assertEqual(0, code)
    self.assertLen(text.splitlines(), 1 + 4 + 2)

  def test_bench_bad_edit_mode(self):
    code, _ = self._run("bench", experiment="1", edit="sideways")
    self.assertEqual(2, code)


class FlagHelpersTest(parameterized.TestCase):

  def test_parse_range(self):
    self.assertEqual((50, 500, 50), cli.parse_range("50:500:50"))

  @parameterized.parameters("50:500", "a:b:c", "10:5:1", "1:10:0")
  def test_bad_range(self, text):
    with self.assertRaises(cli.InputError):
      cli.parse_range(text)

  def test_seed(self):
    with mock.patch.dict(os.environ, {cli.SEED_ENV: "42"}):
      self.assertEqual(42, cli.seed_from(None))
      self.assertEqual(7, cli.seed_from(7))
    with mock.patch.dict(os.environ, {}, clear=True):
      self.assertEqual(0, cli.seed_from(None))
    with mock.patch.dict(os.environ, {cli.SEED_ENV: "many"}):
      with self.assertRaises(cli.InputError):
        cli.seed_from(None)


if __name__ == "__main__":
  absltest.main()
