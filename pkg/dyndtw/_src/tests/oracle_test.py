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
"""Tests for `oracle.py`."""

from absl.testing import absltest
from absl.testing import parameterized
from dyndtw._src import oracle
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st
import numpy as np

_small_strings = st.lists(st.integers(0, 4), min_size=1, max_size=6)


_SHARDS = 4
_PER_SHARD = 50


def _random_runs(rng, max_runs=8, max_exponent=6, alphabet=8):
  runs = int(rng.integers(1, max_runs + 1))
  return np.repeat(rng.integers(0, alphabet, size=runs),
                   rng.integers(1, max_exponent + 1, size=runs))


def _run_starts(flat):
  """The 0-based first index of the run holding every index."""
  index = np.arange(len(flat))
  new_run = np.concatenate([[True], flat[1:] != flat[:-1]])
  return np.maximum.accumulate(np.where(new_run, index, 0))


class RunStructureTest(parameterized.TestCase):
  """Identities of `D` and `DR` inside boxes, over random run structures."""

  def _instances(self, shard):
    rng = np.random.default_rng([17, shard])
    for _ in range(_PER_SHARD):
      yield _random_runs(rng), _random_runs(rng)

  @parameterized.parameters(range(_SHARDS))
  def test_recursive_matches_subtraction(self, shard):
    for a, b in self._instances(shard):
      expected = oracle.dense_dr(oracle.dense_dtw(a, b))
      actual = oracle.dense_dr_recursive(a, b)
      np.testing.assert_array_equal(expected.cells, actual.cells)

  @parameterized.parameters(range(_SHARDS))
  def test_monotone_inside_runs(self, shard):
    for a, b in self._instances(shard):
      d = oracle.dense_dtw(a, b).cells
      same_col = _run_starts(b)[1:] < np.arange(1, len(b))
      same_row = _run_starts(a)[1:] < np.arange(1, len(a))
      self.assertTrue(np.all(d[:, 1:][:, same_col] >= d[:, :-1][:, same_col]))
      self.assertTrue(np.all(d[1:][same_row] >= d[:-1][same_row]))

  @parameterized.parameters(range(_SHARDS))
  def test_differences_inside_runs_are_non_negative(self, shard):
    for a, b in self._instances(shard):
      dr = oracle.dense_dr(oracle.dense_dtw(a, b)).cells
      in_col_run = _run_starts(b) < np.arange(len(b))
      in_row_run = _run_starts(a) < np.arange(len(a))
      self.assertTrue(np.all(dr[:, in_col_run, 1] >= 0))
      self.assertTrue(np.all(dr[in_row_run, :, 0] >= 0))

  @parameterized.parameters(range(_SHARDS))
  def test_differences_are_constant_along_interior_diagonals(self, shard):
    for a, b in self._instances(shard):
      dr = oracle.dense_dr(oracle.dense_dtw(a, b)).cells
      t = np.arange(len(a)) - _run_starts(a)
      s = np.arange(len(b)) - _run_starts(b)
      for i in np.flatnonzero(t >= 2):
        for j in np.flatnonzero(s >= 2):
          np.testing.assert_array_equal(dr[i - 1, j - 1], dr[i, j])

  @parameterized.parameters(range(_SHARDS))
  def test_interior_value_comes_from_the_box_boundary(self, shard):
    for a, b in self._instances(shard):
      d = oracle.dense_dtw(a, b).cells
      cost = oracle.local_costs(a, b)
      top, left = _run_starts(a), _run_starts(b)
      for i in range(len(a)):
        for j in range(len(b)):
          t, s = i - top[i], j - left[j]
          if t < 1 or s < 1:
            continue
          source = d[top[i] + max(t - s, 0), left[j] + max(s - t, 0)]
          self.assertEqual(source + min(s, t) * cost[i, j], d[i, j])


class DenseDtwTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ("equal", [1, 1, 2, 2, 2, 3], [1, 2, 3, 3], 0),
      ("single_characters", [5], [2], 9),
      ("one_step", [0, 1], [0], 1),
      ("row_vector", [1], [1, 2, 3], 5),
      ("column_vector", [0, 0, 2], [0], 4),
  )
  def test_known_distances(self, a, b, expected):
    d = oracle.dense_dtw(a, b)
    self.assertEqual(expected, d.squared_distance)
    self.assertAlmostEqual(np.sqrt(expected), oracle.dtw_distance(a, b))

  @given(_small_strings, _small_strings)
  @settings(max_examples=60, deadline=None)
  def test_matches_path_enumeration(self, a, b):
    d = oracle.dense_dtw(a, b)
    self.assertEqual(oracle.min_path_cost_by_enumeration(a, b),
                     d.squared_distance)

  def test_enumeration_is_limited(self):
    self.assertEqual(0, oracle.min_path_cost_by_enumeration([1] * 7, [1] * 7))
    with self.assertRaises(ValueError):
      oracle.min_path_cost_by_enumeration([1] * 8, [1])

  def test_symmetric(self):
    rng = np.random.default_rng(3)
    a = rng.integers(0, 6, size=12)
    b = rng.integers(0, 6, size=9)
    self.assertEqual(oracle.dense_dtw(a, b).squared_distance,
                     oracle.dense_dtw(b, a).squared_distance)


class DenseDrTest(parameterized.TestCase):

  @given(_small_strings, _small_strings)
  @settings(max_examples=60, deadline=None)
  def test_recursive_matches_subtraction(self, a, b):
    expected = oracle.dense_dr(oracle.dense_dtw(a, b))
    actual = oracle.dense_dr_recursive(a, b)
    np.testing.assert_array_equal(expected.cells, actual.cells)

  def test_corner_and_edges(self):
    a, b = [1, 3], [2, 4, 1]
    dr = oracle.dense_dr_recursive(a, b)
    cost = oracle.local_costs(a, b)
    self.assertEqual((0, 0), dr.at(1, 1))
    self.assertEqual((0, int(cost[0, 1])), dr.at(1, 2))
    self.assertEqual((int(cost[1, 0]), 0), dr.at(2, 1))

  def test_diagonal_step_is_the_local_cost_inside_a_box(self):
    rng = np.random.default_rng(11)
    a = np.repeat(rng.integers(0, 5, size=5), rng.integers(1, 5, size=5))
    b = np.repeat(rng.integers(0, 5, size=5), rng.integers(1, 5, size=5))
    d = oracle.dense_dtw(a, b)
    cost = oracle.local_costs(a, b)
    for i in range(1, len(a)):
      for j in range(1, len(b)):
        if a[i] == a[i - 1] and b[j] == b[j - 1]:
          self.assertEqual(d.cells[i - 1, j - 1] + cost[i, j], d.cells[i, j])

  def test_differences_are_bounded_by_the_local_cost(self):
    rng = np.random.default_rng(5)
    a = rng.integers(0, 8, size=15)
    b = rng.integers(0, 8, size=13)
    dr = oracle.dense_dr_recursive(a, b)
    cost = oracle.local_costs(a, b)
    for i in range(1, len(a) + 1):
      for j in range(1, len(b) + 1):
        u, l = dr.at(i, j)
        c = int(cost[i - 1, j - 1])
        self.assertLessEqual(u, c)
        self.assertLessEqual(l, c)


class WarpingPathTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ("square", [1, 2, 3], [1, 3, 3]),
      ("single_row", [4], [1, 2, 3, 4]),
      ("single_column", [1, 2, 2, 7], [2]),
      ("single_cell", [3], [0]),
      ("runs", [1, 1, 1, 5, 5], [5, 1, 1, 5]),
  )
  def test_backtrack_is_optimal(self, a, b):
    d = oracle.dense_dtw(a, b)
    path = oracle.backtrack_path(d, a, b)
    self.assertTrue(oracle.is_valid_path(path, len(a), len(b)))
    self.assertEqual(d.squared_distance, oracle.path_cost(path, a, b))

  def test_invalid_paths(self):
    self.assertFalse(oracle.is_valid_path(
        oracle.WarpingPath(steps=((1, 1), (2, 3))), 2, 3))
    self.assertFalse(oracle.is_valid_path(
        oracle.WarpingPath(steps=((1, 1), (2, 2))), 2, 3))
    self.assertFalse(oracle.is_valid_path(oracle.WarpingPath(steps=()), 1, 1))
    self.assertTrue(oracle.is_valid_path(
        oracle.WarpingPath(steps=((1, 1), (1, 2), (2, 3))), 2, 3))


if __name__ == "__main__":
  absltest.main()
