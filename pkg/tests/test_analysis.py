#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         test_analysis
# Purpose:      Unit tests for stable rank, probability bounds and the
#               Monte Carlo harness
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

import unittest
import math
import sys
import os

import mpmath
import numpy as np
from numpy.testing import assert_allclose

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from rationalsketch.aaa import AAAConfig
from rationalsketch.analysis import (
    BoundQuery,
    DegenerateResidualError,
    EmpiricalStats,
    UndefinedRankError,
    bound_overestimate,
    bound_underestimate,
    bounds_row,
    empirical_success,
    empirical_table,
    failure_probability_asymptotic,
    residual_matrix,
    singular_values_on_grid,
    stable_rank,
    tensor_bound_overestimate,
    tensor_bound_underestimate,
)
from rationalsketch.kernel import InvalidInputError, derive_seed
from rationalsketch.model import BarycentricModel, VectorValuedFunction
from rationalsketch.problems import builtin_problem
from rationalsketch.sketch import run_sketch_aaa


class TestStableRank(unittest.TestCase):
    """Test cases for the stable rank."""

    def test_identity(self):
        self.assertAlmostEqual(stable_rank(np.eye(5)), 5.0, places=12)

    def test_rank_one(self):
        rng = np.random.default_rng(0)
        outer = np.outer(rng.standard_normal(6), rng.standard_normal(4) + 1j)
        self.assertAlmostEqual(stable_rank(outer), 1.0, places=12)

    def test_bounded_by_rank(self):
        rng = np.random.default_rng(1)
        matrix = rng.standard_normal((8, 3)) @ rng.standard_normal((3, 10))
        rho = stable_rank(matrix)
        self.assertGreaterEqual(rho, 1.0)
        self.assertLessEqual(rho, 3.0 + 1e-12)

    def test_zero_matrix(self):
        with self.assertRaises(UndefinedRankError):
            stable_rank(np.zeros((3, 3)))
        with self.assertRaises(InvalidInputError):
            stable_rank(np.zeros(0))

    def test_singular_values_decrease(self):
        rng = np.random.default_rng(2)
        sigma = singular_values_on_grid(rng.standard_normal((6, 9)))
        self.assertEqual(sigma.size, 6)
        self.assertTrue(np.all(np.diff(sigma) <= 0))


class TestBounds(unittest.TestCase):
    """Test cases for the closed-form failure bounds."""

    def test_underestimate_reference_values(self):
        one = bound_underestimate(BoundQuery(tau=10.0, ell=1, rho=2.0, field='complex'))
        two = bound_underestimate(BoundQuery(tau=10.0, ell=2, rho=2.0, field='complex'))
        self.assertAlmostEqual(one, 0.019801, delta=1e-6)
        self.assertAlmostEqual(two, 7.79e-4, delta=1e-6)
        self.assertAlmostEqual(two, float(mpmath.gammainc(2, 0, 0.04, regularized=True)), delta=1e-15)
        self.assertLessEqual(bound_underestimate(BoundQuery(tau=100.0, ell=2, rho=2.0)), 8e-8)

    def test_real_field_constant(self):
        """Real probes use c = 1."""
        value = bound_underestimate(BoundQuery(tau=4.0, ell=3, rho=1.5, field='real'))
        expected = float(mpmath.gammainc(1.5, 0, 3 * 1.5 / (2 * 16.0), regularized=True))
        self.assertAlmostEqual(value, expected, delta=1e-14)

    def test_overestimate(self):
        value = bound_overestimate(BoundQuery(tau=2.0, ell=1, rho=1.0, field='complex'))
        self.assertAlmostEqual(value, math.exp(-1.0), places=15)
        self.assertLessEqual(bound_overestimate(BoundQuery(tau=1.0001, ell=1)), 1.0)

    def test_bounds_decay_in_ell(self):
        values = [bound_underestimate(BoundQuery(tau=5.0, ell=ell, rho=1.2)) for ell in (1, 2, 4, 8)]
        self.assertTrue(all(a > b for a, b in zip(values, values[1:])))

    def test_tensor_reference_values(self):
        self.assertAlmostEqual(tensor_bound_underestimate(10.0),
                               (2.0 / math.pi) * (2.0 + math.log(21.0)) / 10.0, delta=1e-15)
        self.assertAlmostEqual(tensor_bound_underestimate(10.0), 0.3211, delta=1e-4)
        self.assertAlmostEqual(tensor_bound_overestimate(10.0), math.sqrt(20.0) * math.exp(-8.0), delta=1e-15)
        self.assertAlmostEqual(tensor_bound_overestimate(10.0), 1.50e-3, delta=1e-5)

    def test_tensor_bounds_monotone(self):
        taus = np.linspace(2.0, 100.0, 400)
        under = np.array([tensor_bound_underestimate(t) for t in taus])
        over = np.array([tensor_bound_overestimate(t) for t in taus])
        self.assertTrue(np.all(np.diff(under) <= 0))
        self.assertTrue(np.all(np.diff(over) <= 0))
        self.assertTrue(np.all(np.diff(under[taus > 5.0]) < 0))
        self.assertLess(under[-1], 0.1)
        self.assertLess(over[-1], 1e-30)

    def test_asymptotic_rate(self):
        self.assertAlmostEqual(failure_probability_asymptotic(10.0, 2, 2.0),
                               (math.e * 2.0 / 100.0) ** 2, places=15)

    def test_query_validation(self):
        with self.assertRaises(InvalidInputError):
            BoundQuery(tau=1.0, ell=1)
        with self.assertRaises(InvalidInputError):
            BoundQuery(tau=2.0, ell=0)
        with self.assertRaises(InvalidInputError):
            BoundQuery(tau=2.0, ell=1, rho=0.5)
        with self.assertRaises(InvalidInputError):
            BoundQuery(tau=2.0, ell=1, field='quaternion')
        with self.assertRaises(InvalidInputError):
            tensor_bound_underestimate(0.5)

    def test_bounds_row(self):
        row = bounds_row(10.0, 1, 2.0, 'complex', tensorized=True)
        self.assertAlmostEqual(row['under'], 0.019801, delta=1e-6)
        self.assertIsNotNone(row['tensor_under'])
        row = bounds_row(10.0, 2, 2.0, 'complex', tensorized=True)
        self.assertIsNone(row['tensor_over'])
        self.assertEqual(row['ell'], 2)


class TestEmpiricalHarness(unittest.TestCase):
    """Test cases for the Monte Carlo success frequencies."""

    @classmethod
    def setUpClass(cls):
        cls.problem = builtin_problem('lowrank_residual')
        cls.grid = cls.problem.grid()
        fixed = run_sketch_aaa(cls.problem.function, cls.grid, 4, 'full', AAAConfig(reltol=1e-4),
                               seed=derive_seed(0, 1))
        cls.model = fixed.model

    def test_single_cell_respects_bounds(self):
        stats = empirical_success(self.problem.function, self.grid, self.model, ell=2, tau=3.0,
                                  n_samples=2000, seed=derive_seed(0, 2))
        self.assertEqual(stats.n_samples, 2000)
        self.assertTrue(stats.respects_bounds())
        self.assertLessEqual(stats.p_both, min(stats.p_over, stats.p_under))
        self.assertGreaterEqual(stats.rho, 1.0)

    def test_table_is_sorted_and_deterministic(self):
        rows = empirical_table(self.problem.function, self.grid, self.model, [5.0, 2.0], [2, 1],
                               n_samples=300, seed=7)
        self.assertEqual([(row.tau, row.ell) for row in rows],
                         [(2.0, 1), (2.0, 2), (5.0, 1), (5.0, 2)])
        again = empirical_table(self.problem.function, self.grid, self.model, [5.0, 2.0], [2, 1],
                                n_samples=300, seed=7)
        self.assertEqual([row.to_dict() for row in rows], [row.to_dict() for row in again])

    def test_threads_do_not_change_results(self):
        serial = empirical_success(self.problem.function, self.grid, self.model, 1, 2.0, 200, seed=3)
        threaded = empirical_success(self.problem.function, self.grid, self.model, 1, 2.0, 200, seed=3,
                                     workers=4)
        self.assertEqual(serial.to_dict(), threaded.to_dict())

    def test_invalid_requests(self):
        with self.assertRaises(InvalidInputError):
            empirical_success(self.problem.function, self.grid, self.model, 1, 2.0, 0, seed=0)
        with self.assertRaises(InvalidInputError):
            empirical_table(self.problem.function, self.grid, self.model, [1.0], [1], 10, seed=0)

    def test_residual_matrix_shape(self):
        H = residual_matrix(self.problem.function, self.model, self.grid)
        self.assertEqual(H.shape, (self.problem.function.dim_N, len(self.grid)))

    def test_exact_model_is_degenerate(self):
        zero = VectorValuedFunction(dim_N=2, evaluator=lambda z: np.zeros(2))
        model = BarycentricModel.create([0.5], [1.0], np.zeros((2, 1)))
        with self.assertRaises(DegenerateResidualError):
            empirical_success(zero, self.grid, model, 1, 2.0, 10, seed=0)

    def test_standard_error(self):
        stats = EmpiricalStats(p_over=1.0, p_under=1.0, p_both=1.0, n_samples=100,
                               bound_over=0.5, bound_under=0.5, bound_both=0.0)
        assert_allclose(stats.standard_error(0.5), 0.05)
        self.assertTrue(stats.respects_bounds())


@unittest.skipUnless(os.getenv('RATIONALSKETCH_SLOW_TESTS'), 'set RATIONALSKETCH_SLOW_TESTS=1 to run')
class TestEmpiricalAcceptance(unittest.TestCase):
    """Full Monte Carlo grid over tau and ell."""

    def test_every_cell_respects_bounds(self):
        problem = builtin_problem('lowrank_residual')
        grid = problem.grid()
        fixed = run_sketch_aaa(problem.function, grid, 4, 'full', AAAConfig(reltol=1e-4),
                               seed=derive_seed(0, 1))
        rows = empirical_table(problem.function, grid, fixed.model, [2, 3, 5, 10], [1, 2, 4, 8, 16],
                               n_samples=10000, seed=derive_seed(0, 2))
        self.assertEqual(len(rows), 20)
        for row in rows:
            self.assertTrue(row.respects_bounds(), row.to_dict())


if __name__ == '__main__':
    unittest.main()
