#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         test_sketch
# Purpose:      Unit tests for probing operators and sketched AAA
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

import unittest
import sys
import os
import time

import numpy as np
import scipy.sparse
from numpy.testing import assert_allclose, assert_array_equal

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from rationalsketch.aaa import AAAConfig, run_set_valued_baseline
from rationalsketch.analysis import residual_matrix
from rationalsketch.kernel import InvalidInputError, SeededStream
from rationalsketch.model import (
    BarycentricModel,
    DomainSpec,
    SplitForm,
    TargetGrid,
    VectorValuedFunction,
    sigma_uniform_relerr,
    vectorize,
)
from rationalsketch.problems import BUILTINS, builtin_problem
from rationalsketch.sketch import (
    FullProbe,
    SparseProbe,
    apply_probe,
    default_field,
    draw_full_probe,
    draw_probe,
    draw_tensor_probe,
    precompute_split_sketch,
    run_realizations,
    run_sketch_aaa,
    sketch_stored_samples,
    sparse_probe,
    surrogate_error_estimate,
    surrogate_samples,
)


def random_rational(seed: int, degree: int, dim: int) -> VectorValuedFunction:
    """Vector rational P(z) / q(z) of type (degree, degree) with poles well away from [-1, 1]."""
    rng = np.random.default_rng(seed)
    radii = rng.uniform(1.5, 2.5, degree)
    angles = rng.uniform(0.0, 2.0 * np.pi, degree)
    poles = radii * np.exp(1j * angles)

    def term(power):
        def scalar(z):
            z = np.asarray(z, dtype=complex)
            return z ** power / np.prod(z[..., None] - poles, axis=-1)
        return scalar

    coefficients = [rng.standard_normal((dim, 1)) + 1j * rng.standard_normal((dim, 1))
                    for _ in range(degree + 1)]
    split = SplitForm.from_pairs([(term(k), c) for k, c in enumerate(coefficients)])
    return VectorValuedFunction.from_split(split, name=f'random_rational_{seed}')


class TestProbes(unittest.TestCase):
    """Test cases for drawing and applying probes."""

    def test_full_probe_layout(self):
        """Raw complex pairs fill V column by column and are scaled by 1/sqrt(2 ell)."""
        probe = draw_full_probe(5, 3, 'complex', seed=8)
        draws = SeededStream(8).standard_normal(30)
        raw = (draws[0::2] + 1j * draws[1::2]).reshape((5, 3), order='F')
        assert_allclose(probe.matrix, raw / np.sqrt(6.0), rtol=1e-15)
        self.assertEqual((probe.dim, probe.ell, probe.mode), (5, 3, 'full'))

    def test_real_full_probe(self):
        probe = draw_full_probe(4, 2, 'real', seed=1)
        self.assertTrue(np.isrealobj(probe.matrix))
        raw = SeededStream(1).standard_normal(8).reshape((4, 2), order='F')
        assert_allclose(probe.matrix, raw / np.sqrt(2.0), rtol=1e-15)

    def test_full_probe_validation(self):
        with self.assertRaises(InvalidInputError):
            draw_full_probe(4, 0)
        with self.assertRaises(InvalidInputError):
            draw_full_probe(4, 2, 'quaternion')

    def test_tensor_probe_matches_kronecker(self):
        """u_i^T F(z) v_i equals vec(F(z))^T (v_i kron u_i)."""
        problem = builtin_problem('artificial', size=4)
        f = problem.function
        probe = draw_tensor_probe((4, 4), 3, 'complex', seed=2)
        z = 0.37
        assert_allclose(apply_probe(probe, f, z), probe.as_full().T @ f(z), rtol=1e-13, atol=1e-13)
        draws = SeededStream(2).standard_normal(8)
        assert_allclose(probe.left[:, 0], draws[0::2] + 1j * draws[1::2])

    def test_sparse_function_paths_agree(self):
        """Sparse evaluation paths agree with dense evaluation."""
        f = builtin_problem('delay', size=6).function
        z = 0.4 + 0.9j
        full = draw_full_probe(f.dim_N, 3, 'complex', seed=3)
        assert_allclose(apply_probe(full, f, z), full.matrix.T @ f(z), rtol=1e-13, atol=1e-13)
        tensor = draw_tensor_probe(f.matrix_shape, 3, 'complex', seed=3)
        assert_allclose(apply_probe(tensor, f, z), tensor.as_full().T @ f(z), rtol=1e-13, atol=1e-13)

    def test_probe_dimension_mismatch(self):
        f = builtin_problem('artificial', size=3).function
        with self.assertRaises(InvalidInputError):
            apply_probe(draw_full_probe(5, 2), f, 0.1)
        with self.assertRaises(InvalidInputError):
            apply_probe(draw_tensor_probe((2, 2), 2), f, 0.1)

    def test_draw_probe_and_default_field(self):
        f = builtin_problem('artificial', size=3).function
        self.assertEqual(default_field(f, 'full'), 'real')
        delay = builtin_problem('delay', size=3).function
        self.assertEqual(default_field(delay, 'full'), 'complex')
        self.assertEqual(default_field(delay, 'sparse'), 'real')
        self.assertIsInstance(draw_probe(f, 2, 'full', 'real', 0), FullProbe)
        vector = VectorValuedFunction(dim_N=3, evaluator=lambda z: np.ones(3))
        with self.assertRaises(InvalidInputError):
            draw_probe(vector, 2, 'tensorized', 'real', 0)
        with self.assertRaises(InvalidInputError):
            draw_probe(f, 2, 'diagonal', 'real', 0)


class TestSplitSketch(unittest.TestCase):
    """Test cases for sketching split-form coefficients once."""

    def test_precomputed_matches_direct(self):
        problem = builtin_problem('lowrank_residual', size=4)
        f = problem.function
        points = problem.grid().points[:25]
        for probe in (draw_full_probe(f.dim_N, 3, 'complex', 4),
                      draw_tensor_probe(f.matrix_shape, 3, 'complex', 4)):
            direct = surrogate_samples(probe, f, points)
            sketched = precompute_split_sketch(probe, f.split).sample(points)
            assert_allclose(sketched, direct, rtol=1e-12, atol=1e-13)

    def test_sparse_probe_cannot_be_precomputed(self):
        f = builtin_problem('delay', size=3).function
        with self.assertRaises(InvalidInputError):
            precompute_split_sketch(SparseProbe(ell=2), f.split)


class TestSparseProbe(unittest.TestCase):
    """Test cases for on-the-fly sparse probing."""

    def test_first_sample_draws_in_order(self):
        """New columns take ell consecutive draws each, in index order."""
        probe = SparseProbe(ell=2, field='real', seed=5)
        out = probe.observe([0, 2, 3], np.array([1.0, 2.0, 3.0]))
        block = SeededStream(5).standard_normal(6).reshape((2, 3), order='F') / np.sqrt(2.0)
        assert_allclose(probe.rows, block, rtol=1e-15)
        assert_allclose(out, block @ np.array([1.0, 2.0, 3.0]), rtol=1e-15)
        assert_array_equal(probe.indices, [0, 2, 3])

    def test_pattern_growth_keeps_old_columns(self):
        probe = SparseProbe(ell=3, field='real', seed=6)
        probe.observe([1, 4], np.array([1.0, 1.0]))
        old = probe.rows.copy()
        probe.observe([0, 4, 6], np.array([2.0, 1.0, 5.0]))
        assert_array_equal(probe.indices, [0, 1, 4, 6])
        assert_array_equal(probe.rows[:, [1, 2]], old)
        self.assertEqual(probe.generations, [(0, [1, 4]), (1, [0, 6])])
        self.assertTrue(probe.rows.flags['C_CONTIGUOUS'])

    def test_variable_pattern_function(self):
        """Every sample equals the final probe rows restricted to its own pattern."""
        def sparse_evaluator(z):
            position = int(round(abs(z) * 3)) % 4
            return scipy.sparse.coo_array(([z, 1.0], ([position, 0], [0, 1])), shape=(4, 2))

        f = VectorValuedFunction(dim_N=8, evaluator=lambda z: vectorize(sparse_evaluator(z).toarray()),
                                 matrix_shape=(4, 2), sparsity='variable-pattern',
                                 sparse_evaluator=sparse_evaluator)
        grid = TargetGrid(np.linspace(0.0, 1.0, 7), DomainSpec.interval(0.0, 1.0))
        vals, ind = sparse_probe(f, grid, ell=2, seed=7)
        self.assertTrue(np.all(np.diff(ind) > 0))
        probe = SparseProbe(ell=2, seed=7)
        for z in grid.points:
            apply_probe(probe, f, z)
        assert_array_equal(probe.indices, ind)
        for column, z in enumerate(grid.points):
            linear, values = f.nonzero_pattern(z)
            expected = probe.rows[:, np.searchsorted(ind, linear)] @ values
            assert_allclose(vals[:, column], expected, rtol=1e-14, atol=1e-15)

    def test_fixed_pattern_equals_restricted_full_probe(self):
        """On a fixed pattern, sparse probing equals full probing with the drawn rows."""
        problem = builtin_problem('delay', size=6)
        f = problem.function
        grid = problem.grid()
        vals, ind = sparse_probe(f, grid, ell=3, seed=9)
        probe = SparseProbe(ell=3, seed=9)
        apply_probe(probe, f, grid.points[0])
        self.assertEqual(len(probe.generations), 1)
        matrix = np.zeros((f.dim_N, 3))
        matrix[ind, :] = probe.rows.T
        full = FullProbe(matrix=matrix, field='real', seed=9)
        restricted = np.column_stack([apply_probe(full, f, z) for z in grid.points])
        assert_allclose(vals, restricted, rtol=1e-14, atol=1e-14)

    def test_stored_samples_observe_numerical_nonzeros(self):
        samples = np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 0.0]])
        probe = SparseProbe(ell=2, seed=1)
        sketch = sketch_stored_samples(probe, samples)
        assert_array_equal(probe.indices, [0, 1, 2])
        self.assertEqual(probe.generations, [(0, [0, 2]), (1, [1])])
        assert_allclose(sketch, probe.rows @ samples, rtol=1e-14)


class TestSketchAAA(unittest.TestCase):
    """Test cases for the sketched AAA driver."""

    def test_exact_recovery_of_random_rationals(self):
        """Rationals of type (d, d) are recovered at degree at most d."""
        grid = TargetGrid(np.linspace(-1, 1, 100), DomainSpec.interval())
        cfg = AAAConfig(reltol=1e-12)
        failures = []
        for seed in range(20):
            degree = 1 + seed % 6
            dim = 5 + 2 * seed
            f = random_rational(seed, degree, dim)
            ell = 1 + seed % 4
            run = run_sketch_aaa(f, grid, ell, 'full', cfg, seed=seed)
            relerr = sigma_uniform_relerr(f, run.model, grid)
            if run.model.degree > degree or relerr > 1e-11:
                failures.append((seed, degree, run.model.degree, relerr))
        self.assertEqual(failures, [])

    def test_rational_toy_all_modes(self):
        problem = builtin_problem('rational_toy', size=3)
        grid = problem.grid()
        for mode in ('full', 'tensorized', 'sparse'):
            run = run_sketch_aaa(problem.function, grid, 2, mode, AAAConfig(reltol=1e-12), seed=1)
            self.assertLessEqual(sigma_uniform_relerr(problem.function, run.model, grid), 1e-11, mode)

    def test_lift_interpolates_on_every_builtin(self):
        """Lifted models reproduce F(z_i) exactly at the supports."""
        sizes = {'synthetic_split': 6}
        for name in sorted(BUILTINS):
            problem = builtin_problem(name, size=sizes.get(name))
            grid = problem.grid()
            run = run_sketch_aaa(problem.function, grid, 3, 'full', AAAConfig(reltol=1e-6, dmax=30), seed=2)
            assert_array_equal(run.model.evaluate_many(run.model.supports),
                               problem.function.sample(run.model.supports))
            assert_array_equal(run.model.weights, run.surrogate.weights)

    def test_stored_samples_and_timings(self):
        problem = builtin_problem('lowrank_residual', size=4)
        grid = problem.grid()
        stored = problem.function.sample(grid.points)
        run = run_sketch_aaa(problem.function, grid, 3, 'full', AAAConfig(reltol=1e-8), seed=3,
                             full_samples=stored)
        self.assertEqual(set(run.timings), {'probe', 'surrogate', 'aaa', 'lift', 'total'})
        assert_array_equal(run.model.values, stored[:, run.report.support_indices])
        self.assertLessEqual(sigma_uniform_relerr(problem.function, run.model, grid), 1e-6)

    def test_deterministic_in_seed(self):
        problem = builtin_problem('lowrank_residual', size=4)
        grid = problem.grid()
        first = run_sketch_aaa(problem.function, grid, 2, 'full', AAAConfig(reltol=1e-8), seed=4)
        second = run_sketch_aaa(problem.function, grid, 2, 'full', AAAConfig(reltol=1e-8), seed=4)
        assert_array_equal(first.model.supports, second.model.supports)
        assert_array_equal(first.model.weights, second.model.weights)

    def test_commutation_with_linear_maps(self):
        """The sketch of a lifted model equals the model lifted with sketched values."""
        rng = np.random.default_rng(10)
        worst = 0.0
        for case in range(50):
            degree = 1 + case % 8
            dim = 3 + case
            supports = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
            weights = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
            values = rng.standard_normal((dim, degree + 1)) + 1j * rng.standard_normal((dim, degree + 1))
            model = BarycentricModel.create(supports, weights, values)
            probe = draw_full_probe(dim, 1 + case % 5, 'complex', seed=case)
            points = 2.0 * (rng.standard_normal(30) + 1j * rng.standard_normal(30))
            lifted_then_sketched = probe.matrix.T @ model.evaluate_many(points)
            sketched_then_lifted = model.lift(probe.matrix.T @ model.values).evaluate_many(points)
            scale = np.max(np.abs(lifted_then_sketched))
            worst = max(worst, np.max(np.abs(lifted_then_sketched - sketched_then_lifted)) / scale)
        self.assertLess(worst, 1e-13)


class TestEstimates(unittest.TestCase):
    """Test cases for a posteriori estimates and realization sweeps."""

    def test_error_estimate_within_tau(self):
        problem = builtin_problem('lowrank_residual', size=5)
        grid = problem.grid()
        run = run_sketch_aaa(problem.function, grid, 4, 'full', AAAConfig(reltol=1e-6), seed=0)
        exact = np.linalg.norm(residual_matrix(problem.function, run.model, grid))
        estimate = surrogate_error_estimate(problem.function, run.model, grid, ell=8, seed=11, tau=10.0)
        self.assertLessEqual(estimate.lower, exact)
        self.assertGreaterEqual(estimate.upper, exact)
        self.assertAlmostEqual(estimate.lower * 100.0, estimate.upper)
        with self.assertRaises(InvalidInputError):
            surrogate_error_estimate(problem.function, run.model, grid, tau=1.0)

    def test_realizations_summary(self):
        problem = builtin_problem('lowrank_residual', size=4)
        grid = problem.grid()
        summary = run_realizations(problem.function, grid, 2, 'full', AAAConfig(reltol=1e-6), seeds=range(6))
        self.assertEqual(summary.seeds, list(range(6)))
        self.assertEqual(len(summary.degrees), 6)
        low90, high90 = summary.band90
        low50, high50 = summary.band50
        self.assertTrue(low90 <= low50 <= summary.median <= high50 <= high90)
        self.assertAlmostEqual(summary.mean, float(np.mean(summary.relerrs)))
        with self.assertRaises(InvalidInputError):
            run_realizations(problem.function, grid, 2, 'full', None, seeds=[])


@unittest.skipUnless(os.getenv('RATIONALSKETCH_SLOW_TESTS'), 'set RATIONALSKETCH_SLOW_TESTS=1 to run')
class TestAcceptance(unittest.TestCase):
    """Degree windows and speedups on the built-in examples."""

    def test_artificial_sketch_degrees(self):
        problem = builtin_problem('artificial')
        grid = problem.grid()
        for reltol, expected in [(1e-8, 8), (1e-12, 18)]:
            run = run_sketch_aaa(problem.function, grid, 4, 'full', AAAConfig(reltol=reltol), seed=0)
            self.assertLessEqual(abs(run.model.degree - expected), 1)
            self.assertLessEqual(sigma_uniform_relerr(problem.function, run.model, grid), 10 * reltol)

    def test_sketch_outpaces_entrywise_baseline(self):
        problem = builtin_problem('synthetic_split')
        grid = problem.grid()
        cfg = AAAConfig(reltol=1e-8)
        started = time.perf_counter()
        run = run_sketch_aaa(problem.function, grid, 4, 'full', cfg, seed=0, precompute=True)
        sketch_seconds = time.perf_counter() - started
        started = time.perf_counter()
        baseline, _ = run_set_valued_baseline(problem.function, grid, cfg, 'entries')
        baseline_seconds = time.perf_counter() - started
        self.assertGreaterEqual(baseline_seconds / sketch_seconds, 20.0)
        sketch_error = sigma_uniform_relerr(problem.function, run.model, grid)
        baseline_error = sigma_uniform_relerr(problem.function, baseline, grid)
        self.assertLessEqual(max(sketch_error, baseline_error) / max(min(sketch_error, baseline_error), 1e-16), 10.0)


if __name__ == '__main__':
    unittest.main()
