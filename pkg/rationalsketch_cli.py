#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         rationalsketch_cli
# Purpose:      Command-line tool to run sketched rational approximations,
#               evaluate sketching bounds and drive the Monte Carlo harness
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from rationalsketch.aaa import AAAConfig, run_set_valued_aaa, run_set_valued_baseline
from rationalsketch.analysis import (
    DegenerateResidualError,
    UndefinedRankError,
    bounds_row,
    empirical_table,
)
from rationalsketch.config import RunSettings
from rationalsketch.expression import ExpressionSyntaxError
from rationalsketch.kernel import InvalidInputError, derive_seed
from rationalsketch.linearize import (
    UnsupportedDegreeError,
    WeightDegeneracyError,
    build_pencil,
    eigenvalue_residuals,
    pencil_eigenvalues,
)
from rationalsketch.model import (
    BarycentricModel,
    DomainSpec,
    PoleEvaluationError,
    SplitEvaluationError,
    ZeroFunctionError,
    sigma_uniform_relerr,
)
from rationalsketch.problems import ProblemFileError, UnknownProblemError, load_problem, make_grid
from rationalsketch.report import ReportExporter, RunReport, average_reports, encode_complex
from rationalsketch.sketch import run_sketch_aaa, surrogate_error_estimate

LOGGER = logging.getLogger('rationalsketch.cli')

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DMAX = 2
EXIT_DEGENERATE = 3

MODES = {
    'sketch-full': 'full',
    'sketch-tensor': 'tensorized',
    'sketch-sparse': 'sparse',
    'svaaa-split': 'split',
    'svaaa-entries': 'entries',
}


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"Error: {message}\n")


def _number_list(convert: Callable) -> Callable[[str], List]:
    def parse(text: str) -> List:
        try:
            values = [convert(item) for item in text.split(',') if item.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list: {text!r}") from None
        if not values:
            raise argparse.ArgumentTypeError("list must not be empty")
        return values
    return parse


def _parse_region(text: str) -> DomainSpec:
    """``disc:<center>:<radius>``, ``halfdisc:<center>:<radius>`` or ``interval:<a>:<b>``."""
    parts = text.split(':')
    if len(parts) != 3:
        raise InvalidInputError(f"Region must look like kind:a:b, got {text!r}")
    kind, first, second = parts
    try:
        if kind in ('disc', 'halfdisc'):
            return DomainSpec(kind, center=complex(first), radius=float(second))
        if kind == 'interval':
            return DomainSpec.interval(complex(first), complex(second))
    except ValueError as exc:
        raise InvalidInputError(f"Invalid region {text!r}: {exc}") from None
    raise InvalidInputError(f"Unknown region kind '{kind}'")


def _header(title: str):
    print("=" * 70)
    print(title)
    print("=" * 70)
    print()


def _load(args):
    problem = load_problem(args.problem, size=args.size, seed=args.problem_seed)
    grid = problem.grid()
    f = problem.function
    print(f"✓ {problem.name}: N={f.dim_N}, {len(grid)} grid points on a {problem.domain.kind}")
    print()
    return problem, grid


def _config(args, settings: RunSettings) -> AAAConfig:
    reltol = args.reltol if args.reltol is not None else settings.default_reltol
    dmax = args.dmax if args.dmax is not None else settings.default_dmax
    return AAAConfig(reltol=reltol, dmax=dmax)


def _fit(problem, grid, args, cfg: AAAConfig, seed: int, workers: int):
    """Run the requested mode once; returns (model, report, timings, stored samples)."""
    f = problem.function
    variant = MODES[args.mode]
    full_samples = None
    evaluate_seconds = None
    if args.precompute:
        mark = time.perf_counter()
        full_samples = f.sample(grid.points)
        evaluate_seconds = time.perf_counter() - mark

    if args.mode.startswith('sketch-'):
        run = run_sketch_aaa(f, grid, args.ell, variant, cfg, seed, field=args.field,
                             precompute=args.split_sketch, workers=workers,
                             full_samples=full_samples)
        model, report, timings = run.model, run.report, dict(run.timings)
    else:
        started = time.perf_counter()
        if variant == 'entries' and full_samples is not None:
            model, report = run_set_valued_aaa(full_samples, grid,
                                               dataclasses.replace(cfg, scale_components=False))
        else:
            model, report = run_set_valued_baseline(f, grid, cfg, variant)
        timings = {'total': time.perf_counter() - started}
    if evaluate_seconds is not None:
        timings['evaluate_excluded'] = evaluate_seconds
    return model, report, timings, full_samples


def cmd_approximate(args, settings: RunSettings) -> int:
    _header("Sketched Rational Approximation")
    print(f"[1/4] Loading problem: {args.problem}")
    problem, grid = _load(args)
    f = problem.function
    cfg = _config(args, settings)
    ell = args.ell if args.mode.startswith('sketch-') else None

    print(f"[2/4] Approximating with {args.mode}"
          + (f" (ell={ell})" if ell is not None else "")
          + f", reltol={cfg.reltol:g}, dmax={cfg.dmax}")
    exact = None
    runs: List[RunReport] = []
    for repeat in range(args.repeat):
        seed = args.seed + repeat
        model, report, timings, stored = _fit(problem, grid, args, cfg, seed, settings.threads)
        if exact is None:
            exact = stored if stored is not None else f.sample(grid.points)
        run = RunReport.from_run(
            mode=args.mode,
            ell=ell,
            seed=seed,
            problem=args.problem,
            model=model,
            report=report,
            relerr_max=sigma_uniform_relerr(f, model, grid, 'max', samples=exact),
            relerr_fro=sigma_uniform_relerr(f, model, grid, 'fro', samples=exact),
            reltol=cfg.reltol,
            dmax=cfg.dmax,
            timings=timings,
        )
        print(f"  ✓ seed {seed}: degree {run.degree}, relerr {run.relerr_max:.3e}, "
              f"{run.timings.get('total', 0.0):.3f} s ({run.terminated_by})")
        runs.append(run)
    result = runs[0] if len(runs) == 1 else average_reports(runs)
    print()

    print("[3/4] Writing report")
    exporter = ReportExporter(settings.output_dir if args.out is None else Path(args.out).parent)
    report_path = exporter.export_json(result, args.out)
    print(f"  ✓ JSON report: {report_path}")
    if args.history:
        history_path = exporter.export_history_csv(result, args.history)
        print(f"  ✓ History CSV: {history_path}")
    print()

    print("[4/4] Summary:")
    print("-" * 70)
    print(f"Degree: {result.degree:g}")
    print(f"Relative error (entrywise max): {result.relerr_max:.3e}")
    print(f"Relative error (Frobenius): {result.relerr_fro:.3e}")
    print(f"Terminated by: {result.terminated_by}")
    print()
    return EXIT_OK if result.tolerance_met else EXIT_DMAX


def cmd_bounds(args, settings: RunSettings) -> int:
    rows = []
    for tau in args.tau:
        if not tau > 1:
            raise InvalidInputError(f"tau must exceed 1, got {tau}")
        for ell in args.ell:
            rows.append(bounds_row(tau, ell, args.rho, args.field, tensorized=args.tensor))

    columns = ['tau', 'ell', 'rho', 'field', 'under', 'over', 'asymptotic']
    if args.tensor:
        columns += ['tensor_under', 'tensor_over']
    print("  ".join(f"{name:>12}" for name in columns))
    for row in rows:
        cells = []
        for name in columns:
            value = row[name]
            if value is None:
                cells.append(f"{'-':>12}")
            elif isinstance(value, str):
                cells.append(f"{value:>12}")
            else:
                cells.append(f"{value:>12.6g}")
        print("  ".join(cells))

    if args.csv:
        path = ReportExporter(Path(args.csv).parent).export_table_csv(rows, args.csv)
        print(f"✓ Bounds table: {path}")
    return EXIT_OK


def cmd_empirical(args, settings: RunSettings) -> int:
    if args.samples < 1:
        raise InvalidInputError(f"--samples must be positive, got {args.samples}")
    for tau in args.tau:
        if not tau > 1:
            raise InvalidInputError(f"tau must exceed 1, got {tau}")

    _header("Empirical Success Probabilities")
    print(f"[1/3] Loading problem: {args.problem}")
    problem, grid = _load(args)
    f = problem.function

    print(f"[2/3] Fixing the approximant with an independent sketch (ell={args.fit_ell})")
    cfg = _config(args, settings)
    fixed = run_sketch_aaa(f, grid, args.fit_ell, 'full', cfg, derive_seed(args.seed, 1))
    print(f"  ✓ degree {fixed.model.degree}")
    print()

    print(f"[3/3] Sampling {args.samples} probes per cell")
    rows = empirical_table(f, grid, fixed.model, args.tau, args.ell, args.samples,
                           derive_seed(args.seed, 2), field=args.field, workers=settings.threads)
    table = [row.to_dict() for row in rows]
    print(f"{'tau':>6} {'ell':>4} {'p_under':>9} {'bound':>9} {'p_over':>9} {'bound':>9} "
          f"{'p_both':>9} {'bound':>9}")
    for row in rows:
        print(f"{row.tau:>6g} {row.ell:>4d} {row.p_under:>9.4f} {row.bound_under:>9.4f} "
              f"{row.p_over:>9.4f} {row.bound_over:>9.4f} {row.p_both:>9.4f} {row.bound_both:>9.4f}")
    print(f"Stable rank of the residual: {rows[0].rho:.4f}")

    exporter = ReportExporter(settings.output_dir if args.out is None else Path(args.out).parent)
    path = exporter.export_json({'problem': args.problem, 'seed': args.seed, 'rows': table},
                                args.out, prefix='empirical')
    print(f"✓ JSON table: {path}")
    if args.csv:
        print(f"✓ CSV table: {exporter.export_table_csv(table, args.csv)}")
    return EXIT_OK


def cmd_eig(args, settings: RunSettings) -> int:
    _header("Eigenvalues of the Rational Approximant")
    print(f"[1/3] Loading problem: {args.problem}")
    problem, grid = _load(args)
    f = problem.function
    region = _parse_region(args.region) if args.region else problem.domain

    print(f"[2/3] Approximating with {args.mode}")
    model, report, _, _ = _fit(problem, grid, args, _config(args, settings), args.seed, settings.threads)
    print(f"  ✓ degree {model.degree} ({report.terminated_by})")

    print("[3/3] Solving the linearization")
    pencil = build_pencil(model, matrix_shape=f.matrix_shape)
    eigenvalues = pencil_eigenvalues(pencil, region)
    residuals = eigenvalue_residuals(model, eigenvalues, f.matrix_shape)
    for value, residual in zip(eigenvalues, residuals):
        print(f"  {value.real: .12e} {value.imag:+.12e}i   residual {residual:.2e}")
    if not eigenvalues:
        print("  ! No eigenvalues inside the region")

    payload = {
        'problem': args.problem,
        'mode': args.mode,
        'seed': args.seed,
        'degree': model.degree,
        'region': region.describe(),
        'eigenvalues': [
            {'value': encode_complex(value), 'residual': residual}
            for value, residual in zip(eigenvalues, residuals)
        ],
    }
    exporter = ReportExporter(settings.output_dir if args.out is None else Path(args.out).parent)
    print(f"✓ JSON eigenvalues: {exporter.export_json(payload, args.out, prefix='eigenvalues')}")
    return EXIT_OK


def cmd_estimate(args, settings: RunSettings) -> int:
    _header("A Posteriori Error Estimate")
    print(f"[1/3] Loading problem: {args.problem}")
    problem, grid = _load(args)
    f = problem.function

    if args.report:
        print(f"[2/3] Rebuilding the model from {args.report}")
        stored = ReportExporter.load_json(args.report)
        supports = stored.supports
        model = BarycentricModel.create(supports, stored.weights, f.sample(supports))
    else:
        print(f"[2/3] Approximating with {args.mode}")
        model, _, _, _ = _fit(problem, grid, args, _config(args, settings), args.seed, settings.threads)
    print(f"  ✓ degree {model.degree}")

    print(f"[3/3] Estimating with an independent sketch (ell={args.estimate_ell})")
    estimate = surrogate_error_estimate(f, model, grid, ell=args.estimate_ell,
                                        seed=derive_seed(args.seed, 1), tau=args.tau)
    print(f"Estimated ||F - R|| over the grid: {estimate.estimate:.3e}")
    print(f"Interval for tau={estimate.tau:g}: [{estimate.lower:.3e}, {estimate.upper:.3e}]")
    print(f"Relative estimate: {estimate.relative:.3e}")
    if args.out:
        exporter = ReportExporter(Path(args.out).parent)
        exporter.export_json(estimate._asdict(), args.out)
    return EXIT_OK


def cmd_grid(args, settings: RunSettings) -> int:
    problem = load_problem(args.problem, size=args.size, seed=args.problem_seed)
    spec = problem.grid_spec
    grid = make_grid(
        problem.domain,
        args.interior if args.interior is not None else spec.n_interior,
        args.boundary if args.boundary is not None else spec.n_boundary,
        args.grid_seed if args.grid_seed is not None else spec.seed,
    )
    rows = [{'re': float(z.real), 'im': float(z.imag)} for z in grid.points]
    exporter = ReportExporter(settings.output_dir if args.out is None else Path(args.out).parent)
    path = exporter.export_table_csv(rows, args.out, prefix='grid')
    print(f"✓ Wrote {len(rows)} grid points to {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog='rationalsketch',
        description='Sketched set-valued AAA approximation of large matrix-valued functions',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Sketched approximation of the artificial example with 4 probes
  python rationalsketch_cli.py approximate --problem builtin:artificial --ell 4

  # Unsketched baseline on all entries, with a plot-ready history
  python rationalsketch_cli.py approximate --problem builtin:artificial \\
      --mode svaaa-entries --history history.csv

  # Bound table for the complex field
  python rationalsketch_cli.py bounds --tau 10 --ell 1,2 --rho 2

  # Monte Carlo check of the bounds
  python rationalsketch_cli.py empirical --problem builtin:lowrank_residual \\
      --tau 2,3,5,10 --ell 1,2,4,8,16 --samples 10000

  # Eigenvalues of the delay problem inside a disc
  python rationalsketch_cli.py eig --problem builtin:delay --region disc:0:1
        """
    )
    parser.add_argument('--threads', type=int, default=None,
                        help='Worker threads (default: $RATIONALSKETCH_THREADS or 1)')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True

    problem_options = _ArgumentParser(add_help=False)
    problem_options.add_argument('--problem', required=True,
                                 help='Problem file (JSON) or builtin:<name>')
    problem_options.add_argument('--size', type=int, default=None,
                                 help='Matrix size override for built-in problems')
    problem_options.add_argument('--problem-seed', type=int, default=0,
                                 help='Seed of the random coefficients of built-in problems')

    fit_options = _ArgumentParser(add_help=False)
    fit_options.add_argument('--mode', choices=sorted(MODES), default='sketch-full',
                             help='Approximation mode (default: sketch-full)')
    fit_options.add_argument('--ell', type=int, default=4, help='Number of probing vectors (default: 4)')
    fit_options.add_argument('--reltol', type=float, default=None,
                             help='Relative stopping tolerance (default: $RATIONALSKETCH_DEFAULT_RELTOL or 1e-8)')
    fit_options.add_argument('--dmax', type=int, default=None,
                             help='Maximal degree (default: $RATIONALSKETCH_DEFAULT_DMAX or 100)')
    fit_options.add_argument('--seed', type=int, default=0, help='Probe seed (default: 0)')
    fit_options.add_argument('--field', choices=['real', 'complex'], default=None,
                             help='Probe field (default: real for real functions and sparse probing)')
    fit_options.add_argument('--precompute', action='store_true',
                             help='Evaluate F on the grid before timing starts')
    fit_options.add_argument('--split-sketch', action='store_true',
                             help='Sketch the split-form coefficients once')

    approximate = subparsers.add_parser('approximate', parents=[problem_options, fit_options],
                                        help='Run an approximation and write a JSON report')
    approximate.add_argument('--out', default=None, help='JSON report path (default: timestamped)')
    approximate.add_argument('--history', default=None, metavar='CSV',
                             help='Write the iteration history (degree,metric,seconds)')
    approximate.add_argument('--repeat', type=int, default=1,
                             help='Average over this many probe seeds (seed, seed+1, ...)')
    approximate.set_defaults(handler=cmd_approximate)

    bounds = subparsers.add_parser('bounds', help='Print failure probability bounds')
    bounds.add_argument('--tau', type=_number_list(float), required=True, help='Comma-separated tau values')
    bounds.add_argument('--ell', type=_number_list(int), default=[1], help='Comma-separated ell values')
    bounds.add_argument('--rho', type=float, default=1.0, help='Stable rank (default: 1)')
    bounds.add_argument('--field', choices=['real', 'complex'], default='complex')
    bounds.add_argument('--tensor', action='store_true', help='Add the tensorized ell=1 bounds')
    bounds.add_argument('--csv', default=None, help='Also write the table as CSV')
    bounds.set_defaults(handler=cmd_bounds)

    empirical = subparsers.add_parser('empirical', parents=[problem_options],
                                      help='Monte Carlo success probabilities against the bounds')
    empirical.add_argument('--tau', type=_number_list(float), default=[2.0, 3.0, 5.0, 10.0])
    empirical.add_argument('--ell', type=_number_list(int), default=[1, 2, 4, 8, 16])
    empirical.add_argument('--samples', type=int, default=10000, help='Probes per cell (default: 10000)')
    empirical.add_argument('--seed', type=int, default=0)
    empirical.add_argument('--field', choices=['real', 'complex'], default='complex')
    empirical.add_argument('--fit-ell', type=int, default=4, help='Probe size of the fixing run')
    empirical.add_argument('--reltol', type=float, default=None)
    empirical.add_argument('--dmax', type=int, default=None)
    empirical.add_argument('--out', default=None, help='JSON table path (default: timestamped)')
    empirical.add_argument('--csv', default=None, help='Also write the table as CSV')
    empirical.set_defaults(handler=cmd_empirical)

    eig = subparsers.add_parser('eig', parents=[problem_options, fit_options],
                                help='Eigenvalues of the approximant via its linearization')
    eig.add_argument('--region', default=None,
                     help='disc:<center>:<radius>, halfdisc:<center>:<radius> or interval:<a>:<b> '
                          '(default: problem domain)')
    eig.add_argument('--out', default=None, help='JSON output path (default: timestamped)')
    eig.set_defaults(handler=cmd_eig)

    estimate = subparsers.add_parser('estimate', parents=[problem_options, fit_options],
                                     help='A posteriori error estimate from an independent sketch')
    estimate.add_argument('--report', default=None, help='Rebuild the model from a JSON report')
    estimate.add_argument('--estimate-ell', type=int, default=4)
    estimate.add_argument('--tau', type=float, default=10.0)
    estimate.add_argument('--out', default=None)
    estimate.set_defaults(handler=cmd_estimate)

    grid = subparsers.add_parser('grid', parents=[problem_options], help='Write the target grid as CSV')
    grid.add_argument('--interior', type=int, default=None)
    grid.add_argument('--boundary', type=int, default=None)
    grid.add_argument('--grid-seed', type=int, default=None)
    grid.add_argument('--out', default=None, help='CSV path (default: timestamped)')
    grid.set_defaults(handler=cmd_grid)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the rationalsketch CLI."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    settings = RunSettings.from_environment(threads_override=args.threads)
    logging.basicConfig(level=settings.logging_level,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    if getattr(args, 'repeat', 1) < 1:
        print("Error: --repeat must be at least 1")
        return EXIT_USAGE

    try:
        return args.handler(args, settings)
    except WeightDegeneracyError as e:
        print(f"✗ Error: weight degeneracy at index {e.j}: {e}")
        return EXIT_DEGENERATE
    except (DegenerateResidualError, PoleEvaluationError, ZeroFunctionError,
            SplitEvaluationError, UndefinedRankError) as e:
        print(f"✗ Numerical error: {e}")
        return EXIT_DEGENERATE
    except UnknownProblemError as e:
        print(f"✗ Error: {e.args[0] if e.args else e}")
        return EXIT_USAGE
    except (InvalidInputError, ProblemFileError, ExpressionSyntaxError,
            UnsupportedDegreeError) as e:
        print(f"✗ Error: {e}")
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
