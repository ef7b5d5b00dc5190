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
"""Tests for `instances.py`."""

from absl.testing import absltest
from absl.testing import parameterized
from dyndtw._src import base
from dyndtw._src import dynamic_update
from dyndtw._src import instances
import numpy as np


class GenRandomTest(parameterized.TestCase):

  @parameterized.parameters(
      (1, 1, 26), (10, 1, 26), (10, 10, 2), (50, 17, 3), (500, 250, 26))
  def test_exact_shape(self, length, rle_size, alphabet_size):
    spec = instances.RandomSpec(length=length, rle_size=rle_size,
                                alphabet_size=alphabet_size, seed=9)
    r = instances.gen_random(spec)
    self.assertEqual(length, r.length)
    self.assertEqual(rle_size, r.size)
    self.assertGreaterEqual(r.flat.min(), 1)
    self.assertLessEqual(r.flat.max(), alphabet_size)

  def test_seeded(self):
    spec = instances.RandomSpec(length=40, rle_size=12, seed=3)
    np.testing.assert_array_equal(instances.gen_random(spec).flat,
                                  instances.gen_random(spec).flat)
    other = instances.gen_random(spec, rng=np.random.default_rng(4))
    self.assertEqual(12, other.size)

  @parameterized.named_parameters(
      ("too_many_runs", 3, 4, 26),
      ("empty", 0, 0, 26),
      ("one_letter", 5, 2, 1),
  )
  def test_infeasible(self, length, rle_size, alphabet_size):
    with self.assertRaises(base.InfeasibleSpecError):
      instances.gen_random(instances.RandomSpec(
          length=length, rle_size=rle_size, alphabet_size=alphabet_size))


class GenAdversarialTest(absltest.TestCase):

  def test_shape(self):
    a, b = instances.gen_adversarial(
        instances.AdversarialSpec(a_runs=3, b_runs=4, k=2, l=1))
    np.testing.assert_array_equal([7, 7, 6, 6, 5, 5], a.flat)
    np.testing.assert_array_equal([1, 2, 3, 4], b.flat)

  def test_orders(self):
    a, b = instances.gen_adversarial(
        instances.AdversarialSpec(a_runs=6, b_runs=5, k=3, l=2))
    self.assertEqual(6, a.size)
    self.assertEqual(5, b.size)
    self.assertTrue(np.all(np.diff([run.char for run in a.runs]) < 0))
    self.assertTrue(np.all(np.diff([run.char for run in b.runs]) > 0))
    self.assertGreater(a.runs[-1].char, b.runs[-1].char)

  def test_invalid(self):
    with self.assertRaises(base.InfeasibleSpecError):
      instances.gen_adversarial(instances.AdversarialSpec(a_runs=0, b_runs=2))
    with self.assertRaises(base.CharacterOutOfRangeError):
      instances.gen_adversarial(
          instances.AdversarialSpec(a_runs=2**20, b_runs=2))


class PrependScriptTest(absltest.TestCase):

  def test_prepends_smaller_characters(self):
    a, b = instances.gen_adversarial(
        instances.AdversarialSpec(a_runs=4, b_runs=4))
    script = instances.gen_prepend_script(a, b, steps=3)
    self.assertEqual([dynamic_update.insert(1, 0),
                      dynamic_update.insert(1, -1),
                      dynamic_update.insert(1, -2)], script)

  def test_needs_unit_exponents(self):
    a, b = instances.gen_adversarial(
        instances.AdversarialSpec(a_runs=4, b_runs=4, l=2))
    with self.assertRaises(base.InfeasibleSpecError):
      instances.gen_prepend_script(a, b, steps=1)


class BoundTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ("square", 100, 100, 20, 20, 3724),
      ("unit", 50, 50, 50, 50, 4704),
      ("flat", 10, 3, 1, 1, 0),
  )
  def test_numerator(self, m, n, a_runs, b_runs, numerator):
    self.assertEqual(
        numerator, instances.lower_bound_numerator(m, n, a_runs, b_runs))
    self.assertEqual(numerator / 2,
                     instances.changed_cells_lower_bound(m, n, a_runs, b_runs))

  def test_meets(self):
    self.assertTrue(instances.meets_lower_bound(1862, 100, 100, 20, 20))
    self.assertFalse(instances.meets_lower_bound(1861, 100, 100, 20, 20))


class RandomEditTest(absltest.TestCase):

  def test_edits_are_valid(self):
    rng = np.random.default_rng(0)
    b = instances.gen_random(instances.RandomSpec(length=6, rle_size=3))
    for _ in range(200):
      op = instances.random_edit(rng, b, alphabet_size=4)
      dynamic_update.validate_edit(b, op)
      self.assertIn(op.kind, dynamic_update.SINGLE_KINDS)
      batched = instances.random_batched_edit(rng, b, alphabet_size=4)
      dynamic_update.validate_edit(b, batched)
      self.assertTrue(batched.is_run_wise)

  def test_single_character_is_never_deleted(self):
    rng = np.random.default_rng(1)
    b = instances.gen_random(instances.RandomSpec(length=1, rle_size=1))
    for _ in range(50):
      op = instances.random_edit(rng, b)
      self.assertNotEqual(dynamic_update.EditKind.DELETE_CHAR, op.kind)

  def test_script_stays_valid(self):
    rng = np.random.default_rng(5)
    b = instances.gen_random(instances.RandomSpec(length=3, rle_size=2))
    for op in instances.random_script(rng, b, steps=30, alphabet_size=3):
      dynamic_update.validate_edit(b, op)
      b = b.splice(*dynamic_update.splice_of(op))


if __name__ == "__main__":
  absltest.main()
