#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Example usage of the rationalsketch Python API

This script demonstrates how to use the package components
programmatically in your own Python applications.
"""

import sys

import numpy as np

from rationalsketch.aaa import AAAConfig, run_set_valued_baseline
from rationalsketch.analysis import BoundQuery, bound_underestimate, empirical_table
from rationalsketch.kernel import derive_seed
from rationalsketch.linearize import build_pencil, pencil_eigenvalues, rational_zeros_oracle
from rationalsketch.model import sigma_uniform_relerr
from rationalsketch.problems import builtin_problem, load_problem
from rationalsketch.report import ReportExporter, RunReport
from rationalsketch.sketch import run_realizations, run_sketch_aaa


def example_sketched_approximation():
    """
    Example 1: Sketched approximation against the unsketched baselines.
    """
    print("Example 1: Sketched Approximation")
    print("-" * 50)

    problem = builtin_problem('artificial')
    grid = problem.grid()
    f = problem.function
    cfg = AAAConfig(reltol=1e-8)

    for variant in ('split', 'entries'):
        model, _ = run_set_valued_baseline(f, grid, cfg, variant)
        print(f"svaaa-{variant}: degree {model.degree}, relerr {sigma_uniform_relerr(f, model, grid):.2e}")

    for ell in (1, 4):
        run = run_sketch_aaa(f, grid, ell, 'full', cfg, seed=0)
        print(f"sketch ell={ell}: degree {run.model.degree}, "
              f"relerr {sigma_uniform_relerr(f, run.model, grid):.2e}, "
              f"{run.timings['total']:.3f} s")
    print()


def example_realizations():
    """
    Example 2: Spread of the error over probe seeds.
    """
    print("Example 2: Realizations")
    print("-" * 50)

    problem = builtin_problem('artificial')
    summary = run_realizations(problem.function, problem.grid(), 2, 'full', AAAConfig(reltol=1e-8),
                               seeds=range(20))
    print(f"Degrees: {sorted(set(summary.degrees))}")
    print(f"Median relerr {summary.median:.2e}, 90% band [{summary.band90[0]:.2e}, {summary.band90[1]:.2e}]")
    print()


def example_bounds_and_harness():
    """
    Example 3: Probability bounds next to Monte Carlo frequencies.
    """
    print("Example 3: Bounds and Monte Carlo")
    print("-" * 50)

    for ell in (1, 2, 4):
        query = BoundQuery(tau=10.0, ell=ell, rho=2.0)
        print(f"P(underestimate by 10x) <= {bound_underestimate(query):.3e} for ell={ell}")

    problem = builtin_problem('lowrank_residual')
    grid = problem.grid()
    fixed = run_sketch_aaa(problem.function, grid, 4, 'full', AAAConfig(reltol=1e-4), seed=derive_seed(0, 1))
    rows = empirical_table(problem.function, grid, fixed.model, [2.0, 5.0], [1, 4], n_samples=1000,
                           seed=derive_seed(0, 2))
    for row in rows:
        print(f"tau={row.tau:g} ell={row.ell}: p_both={row.p_both:.3f} >= {row.bound_both:.3f}")
    print()


def example_eigenvalues():
    """
    Example 4: Eigenvalues from the linearization and the zero oracle.
    """
    print("Example 4: Eigenvalues")
    print("-" * 50)

    problem = builtin_problem('rational_toy')
    grid = problem.grid()
    model, _ = run_set_valued_baseline(problem.function, grid, AAAConfig(reltol=1e-12), 'entries')
    pencil = build_pencil(model, matrix_shape=problem.function.matrix_shape)
    eigenvalues = pencil_eigenvalues(pencil, problem.domain)
    print("Pencil:", np.round(np.real(eigenvalues), 8))
    print("Oracle:", np.round(np.real(rational_zeros_oracle(model, problem.domain)), 8))
    print()


def example_problem_file(problem_path):
    """
    Example 5: Approximate a problem file and export a report.

    Args:
        problem_path: Path to a JSON problem file
    """
    print("Example 5: Problem File")
    print("-" * 50)

    problem = load_problem(problem_path)
    grid = problem.grid()
    cfg = AAAConfig(reltol=1e-10)
    run = run_sketch_aaa(problem.function, grid, 4, 'full', cfg, seed=0)
    f = problem.function
    report = RunReport.from_run(
        mode='sketch-full', ell=4, seed=0, problem=problem_path, model=run.model, report=run.report,
        relerr_max=sigma_uniform_relerr(f, run.model, grid),
        relerr_fro=sigma_uniform_relerr(f, run.model, grid, 'fro'),
        reltol=cfg.reltol, dmax=cfg.dmax, timings=run.timings,
    )
    exporter = ReportExporter()
    print(f"Generated JSON report: {exporter.export_json(report)}")
    print(f"Generated history CSV: {exporter.export_history_csv(report)}")
    print()


if __name__ == '__main__':
    example_sketched_approximation()
    example_realizations()
    example_bounds_and_harness()
    example_eigenvalues()

    if len(sys.argv) > 1:
        example_problem_file(sys.argv[1])
    else:
        print("Pass a JSON problem file to also run Example 5")
