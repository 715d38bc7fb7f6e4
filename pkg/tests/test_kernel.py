#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         test_kernel
# Purpose:      Unit tests for the numerical kernel
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

import unittest
import sys
import os

import mpmath
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from rationalsketch.kernel import (
    InvalidInputError,
    SeededStream,
    derive_seed,
    gaussian_complex,
    gaussian_real,
    generalized_eigenvalues,
    reduce_tall,
    regularized_lower_gamma,
    smallest_right_singular_vector,
)


class TestSeededStream(unittest.TestCase):
    """Test cases for reproducible random streams."""

    def test_same_seed_replays(self):
        """Two streams with one seed produce identical draws."""
        first = SeededStream(42).standard_normal(50)
        second = SeededStream(42).standard_normal(50)
        assert_array_equal(first, second)

    def test_counter_replay(self):
        """A stream started at counter k continues where a used stream left off."""
        used = SeededStream(7)
        used.standard_normal(5)
        resumed = SeededStream(7, counter=5)
        self.assertEqual(resumed.counter, 5)
        assert_array_equal(used.standard_normal(10), resumed.standard_normal(10))

    def test_draws_are_sequential(self):
        """Drawing 3 then 4 equals drawing 7 at once."""
        split = SeededStream(3)
        pieces = np.concatenate([split.standard_normal(3), split.standard_normal(4)])
        assert_array_equal(pieces, SeededStream(3).standard_normal(7))
        self.assertEqual(split.counter, 7)

    def test_uniform_leaves_gaussian_counter(self):
        """Uniform draws come from a separate child stream."""
        stream = SeededStream(11)
        values = stream.uniform(4, -1.0, 1.0)
        self.assertEqual(stream.counter, 0)
        self.assertTrue(np.all((values >= -1.0) & (values < 1.0)))
        self.assertFalse(np.array_equal(values, stream.uniform(4, -1.0, 1.0)))
        assert_array_equal(stream.standard_normal(5), SeededStream(11).standard_normal(5))

    def test_substreams_are_distinct(self):
        """Substreams differ from each other and from the parent."""
        parent = SeededStream(5)
        a = parent.substream(0).standard_normal(8)
        b = parent.substream(1).standard_normal(8)
        self.assertFalse(np.array_equal(a, b))
        self.assertFalse(np.array_equal(a, SeededStream(5).standard_normal(8)))

    def test_invalid_seed(self):
        """Negative seeds are rejected."""
        with self.assertRaises(InvalidInputError):
            SeededStream(-1)

    def test_derive_seed(self):
        """Derived seeds are deterministic and index dependent."""
        self.assertEqual(derive_seed(9, 3), derive_seed(9, 3))
        self.assertNotEqual(derive_seed(9, 3), derive_seed(9, 4))
        self.assertNotEqual(derive_seed(9, 3), derive_seed(10, 3))
        with self.assertRaises(InvalidInputError):
            derive_seed(9, -1)


class TestGaussianVectors(unittest.TestCase):
    """Test cases for Gaussian vector helpers."""

    def test_real(self):
        assert_array_equal(gaussian_real(SeededStream(1), 6), SeededStream(1).standard_normal(6))

    def test_complex_interleaves(self):
        """Real parts use even draws and imaginary parts odd draws."""
        values = gaussian_complex(SeededStream(2), 4)
        draws = SeededStream(2).standard_normal(8)
        assert_array_equal(values.real, draws[0::2])
        assert_array_equal(values.imag, draws[1::2])

    def test_complex_moments(self):
        """Entries have mean zero, E|entry|^2 = 2 and uncorrelated parts."""
        values = gaussian_complex(SeededStream(3), 200000)
        self.assertLess(abs(np.mean(values)), 0.01)
        self.assertAlmostEqual(np.mean(np.abs(values) ** 2), 2.0, delta=0.03)
        self.assertLess(abs(np.mean(values.real * values.imag)), 0.01)
        self.assertAlmostEqual(np.var(values.real), np.var(values.imag), delta=0.02)
        self.assertLess(abs(np.mean(values ** 2)), 0.02)


class TestLinearAlgebra(unittest.TestCase):
    """Test cases for singular vectors, blocked QR and QZ."""

    def setUp(self):
        self.rng = np.random.default_rng(0)

    def test_reduce_tall_preserves_singular_values(self):
        """R from block accumulation has the singular values of the stack."""
        blocks = [self.rng.standard_normal((7, 4)) + 1j * self.rng.standard_normal((7, 4))
                  for _ in range(5)]
        r_factor = reduce_tall(blocks)
        self.assertEqual(r_factor.shape, (4, 4))
        assert_allclose(np.linalg.svd(r_factor, compute_uv=False),
                        np.linalg.svd(np.vstack(blocks), compute_uv=False), rtol=1e-12)

    def test_reduce_tall_empty(self):
        self.assertIsNone(reduce_tall([]))
        self.assertIsNone(reduce_tall([np.zeros((0, 3))]))

    def test_smallest_right_singular_vector_finds_null_vector(self):
        """A rank-deficient matrix yields its null vector with sigma near zero."""
        base = self.rng.standard_normal((20, 2))
        matrix = np.column_stack([base[:, 0], base[:, 1], base[:, 0] + base[:, 1]])
        weights, sigma = smallest_right_singular_vector(matrix)
        self.assertAlmostEqual(np.linalg.norm(weights), 1.0, places=12)
        self.assertLess(sigma, 1e-12)
        self.assertLess(np.linalg.norm(matrix @ weights), 1e-12)
        expected = np.array([1.0, 1.0, -1.0]) / np.sqrt(3.0)
        self.assertAlmostEqual(abs(np.vdot(expected, weights)), 1.0, places=10)

    def test_smallest_right_singular_vector_is_optimal(self):
        """No random unit vector does better than the returned one."""
        matrix = self.rng.standard_normal((20, 5)) + 1j * self.rng.standard_normal((20, 5))
        weights, sigma = smallest_right_singular_vector(matrix)
        trials = self.rng.standard_normal((5, 1000)) + 1j * self.rng.standard_normal((5, 1000))
        trials /= np.linalg.norm(trials, axis=0)
        self.assertAlmostEqual(np.linalg.norm(matrix @ weights), sigma, places=12)
        self.assertTrue(np.all(sigma <= np.linalg.norm(matrix @ trials, axis=0) + 1e-12))

    def test_smallest_singular_value_matches_mpmath(self):
        matrix = self.rng.standard_normal((20, 5)) + 1j * self.rng.standard_normal((20, 5))
        weights, sigma = smallest_right_singular_vector(matrix)
        with mpmath.workdps(40):
            singular = mpmath.svd_c(mpmath.matrix(matrix.tolist()), compute_uv=False)
            expected = min(float(abs(singular[i])) for i in range(singular.rows))
        self.assertAlmostEqual(sigma / expected, 1.0, places=12)
        self.assertAlmostEqual(np.linalg.norm(matrix @ weights) / expected, 1.0, places=12)

    def test_smallest_right_singular_vector_rejects_wide(self):
        with self.assertRaises(InvalidInputError):
            smallest_right_singular_vector(np.ones((2, 3)))
        with self.assertRaises(InvalidInputError):
            smallest_right_singular_vector(np.array([[np.nan], [1.0]]))

    def test_generalized_eigenvalues_diagonal(self):
        values = generalized_eigenvalues(np.diag([1.0, 2.0, 3.0]), np.eye(3))
        assert_allclose(np.sort(values.real), [1.0, 2.0, 3.0])

    def test_generalized_eigenvalues_drop_infinite(self):
        """A singular B gives an infinite eigenvalue that is dropped."""
        values = generalized_eigenvalues(np.diag([1.0, 2.0, 3.0]), np.diag([1.0, 1.0, 0.0]))
        assert_allclose(np.sort(values.real), [1.0, 2.0])

    def test_generalized_eigenvalues_standard_problem(self):
        """With B = I the pencil eigenvalues are the ordinary eigenvalues."""
        for size in (1, 2, 5, 13, 29, 50):
            with self.subTest(size=size):
                matrix = self.rng.standard_normal((size, size)) + 1j * self.rng.standard_normal((size, size))
                values = generalized_eigenvalues(matrix, np.eye(size))
                expected = np.linalg.eigvals(matrix)
                self.assertEqual(values.size, size)
                gaps = np.abs(values[:, None] - expected[None, :]).min(axis=1)
                self.assertLess(gaps.max(), 1e-9 * max(1.0, np.linalg.norm(matrix, 2)))

    def test_generalized_eigenvalues_shape_mismatch(self):
        with self.assertRaises(InvalidInputError):
            generalized_eigenvalues(np.eye(2), np.eye(3))


class TestGamma(unittest.TestCase):
    """Test cases for the regularized lower incomplete gamma function."""

    def test_matches_mpmath(self):
        for s, x in [(0.5, 0.01), (1.0, 0.02), (2.0, 0.04), (8.0, 3.5), (16.0, 40.0)]:
            expected = float(mpmath.gammainc(s, 0, x, regularized=True))
            self.assertAlmostEqual(regularized_lower_gamma(s, x), expected, delta=1e-14)

    def test_closed_form(self):
        """gamma(1, x) is 1 - exp(-x)."""
        self.assertAlmostEqual(regularized_lower_gamma(1.0, 0.02), 1.0 - np.exp(-0.02), places=15)

    def test_invalid_arguments(self):
        with self.assertRaises(InvalidInputError):
            regularized_lower_gamma(0.0, 1.0)
        with self.assertRaises(InvalidInputError):
            regularized_lower_gamma(1.0, -1.0)


if __name__ == '__main__':
    unittest.main()
