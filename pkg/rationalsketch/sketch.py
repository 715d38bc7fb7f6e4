#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         sketch
# Purpose:      Gaussian probing operators and the sketched AAA driver
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

"""
Random probing of vector-valued functions.

Three probe families are supported:

* ``full``: a dense N x ell Gaussian matrix scaled by 1/sqrt(c * ell)
* ``tensorized``: ell unscaled Gaussian pairs (u_i, v_i) with
  component i equal to u_i^T F(z) v_i
* ``sparse``: columns drawn on demand as the nonzero pattern of F(z) is
  discovered along the grid

``run_sketch_aaa`` probes the function on the grid, runs set-valued AAA on
the ell sketched components and lifts the result to full values.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse

from rationalsketch.aaa import AAAConfig, AAAReport, run_set_valued_aaa
from rationalsketch.kernel import (
    InvalidInputError,
    SeededStream,
    gaussian_complex,
    gaussian_real,
)
from rationalsketch.model import (
    BarycentricModel,
    SplitForm,
    TargetGrid,
    VectorValuedFunction,
    sigma_uniform_relerr,
)

LOGGER = logging.getLogger(__name__)

FIELDS = ('real', 'complex')
PROBE_MODES = ('full', 'tensorized', 'sparse')


def field_constant(field_name: str) -> int:
    """c = 1 for real probes and c = 2 for complex probes."""
    if field_name not in FIELDS:
        raise InvalidInputError(f"Unknown field '{field_name}', expected one of {FIELDS}")
    return 1 if field_name == 'real' else 2


def _draw(stream: SeededStream, count: int, field_name: str) -> np.ndarray:
    if field_name == 'real':
        return gaussian_real(stream, count)
    return gaussian_complex(stream, count)


def _check_ell(ell: int):
    if int(ell) != ell or ell < 1:
        raise InvalidInputError(f"Number of probing vectors must be a positive integer, got {ell}")


@dataclass(frozen=True)
class FullProbe:
    """Dense probing matrix V (N x ell), already scaled."""

    matrix: np.ndarray
    field: str
    seed: int

    @property
    def ell(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def mode(self) -> str:
        return 'full'


@dataclass(frozen=True)
class TensorProbe:
    """Pairs (u_i, v_i) stored as the columns of left (m x ell) and right (n x ell)."""

    left: np.ndarray
    right: np.ndarray
    field: str
    seed: int

    @property
    def ell(self) -> int:
        return int(self.left.shape[1])

    @property
    def matrix_shape(self) -> Tuple[int, int]:
        return int(self.left.shape[0]), int(self.right.shape[0])

    @property
    def mode(self) -> str:
        return 'tensorized'

    def as_full(self) -> np.ndarray:
        """Equivalent N x ell matrix with columns v_i (x) u_i."""
        return np.column_stack([
            np.kron(self.right[:, i], self.left[:, i]) for i in range(self.ell)
        ])


@dataclass
class SparseProbe:
    """
    Probe whose columns are drawn as new nonzero positions appear.

    Owned by one sampling pass; ``indices`` stays strictly increasing and
    column j of ``rows`` belongs to ``indices[j]``.
    """

    ell: int
    field: str = 'real'
    seed: int = 0
    indices: np.ndarray = dataclasses.field(default_factory=lambda: np.empty(0, dtype=np.int64))
    rows: Optional[np.ndarray] = None
    generations: List[Tuple[int, List[int]]] = dataclasses.field(default_factory=list)
    _stream: Optional[SeededStream] = dataclasses.field(default=None, repr=False, compare=False)
    _visits: int = dataclasses.field(default=0, repr=False, compare=False)

    def __post_init__(self):
        _check_ell(self.ell)
        self._scale = 1.0 / math.sqrt(field_constant(self.field) * self.ell)
        if self._stream is None:
            self._stream = SeededStream(self.seed)
        if self.rows is None:
            dtype = float if self.field == 'real' else complex
            self.rows = np.zeros((self.ell, 0), dtype=dtype)

    @property
    def mode(self) -> str:
        return 'sparse'

    def observe(self, linear, values) -> np.ndarray:
        """
        Sketch one sample given by its nonzero positions and values.

        Args:
            linear: Column-major linear indices of the stored entries
            values: Entry values

        Returns:
            Length-ell sketch of the sample
        """
        linear = np.asarray(linear, dtype=np.int64)
        values = np.asarray(values)
        new = np.setdiff1d(linear, self.indices)
        if new.size:
            draws = _draw(self._stream, self.ell * new.size, self.field)
            block = draws.reshape((self.ell, new.size), order='F') * self._scale
            indices = np.concatenate([self.indices, new])
            rows = np.hstack([self.rows, block])
            order = np.argsort(indices, kind='stable')
            self.indices = indices[order]
            self.rows = np.ascontiguousarray(rows[:, order])
            self.generations.append((self._visits, [int(i) for i in new]))
            LOGGER.debug("Sparse probe grew by %d column(s) at sample %d", new.size, self._visits)
        self._visits += 1
        restricted = np.zeros(self.indices.size, dtype=np.result_type(values, float))
        if linear.size:
            restricted[np.searchsorted(self.indices, linear)] = values
        return self.rows @ restricted


ProbingOperator = Union[FullProbe, TensorProbe, SparseProbe]


def draw_full_probe(N: int, ell: int, field: str = 'complex', seed: int = 0) -> FullProbe:
    """
    Dense Gaussian probe V = V_raw / sqrt(c * ell).

    Raw entries are drawn column by column from SeededStream(seed).

    Args:
        N: Output dimension of the probed function
        ell: Number of probing vectors
        field: ``real`` or ``complex``
        seed: Stream seed

    Returns:
        FullProbe
    """
    if int(N) != N or N < 1:
        raise InvalidInputError(f"Dimension must be a positive integer, got {N}")
    _check_ell(ell)
    scale = 1.0 / math.sqrt(field_constant(field) * ell)
    draws = _draw(SeededStream(seed), N * ell, field)
    matrix = draws.reshape((N, ell), order='F') * scale
    return FullProbe(matrix=matrix, field=field, seed=seed)


def draw_tensor_probe(matrix_shape: Tuple[int, int], ell: int, field: str = 'complex',
                      seed: int = 0) -> TensorProbe:
    """
    Unscaled Gaussian pairs (u_i, v_i), drawn in the order u_1, v_1, u_2, v_2, ...

    Args:
        matrix_shape: (m, n) of the probed matrix function
        ell: Number of pairs
        field: ``real`` or ``complex``
        seed: Stream seed

    Returns:
        TensorProbe
    """
    _check_ell(ell)
    field_constant(field)
    m, n = (int(size) for size in matrix_shape)
    stream = SeededStream(seed)
    left, right = [], []
    for _ in range(ell):
        left.append(_draw(stream, m, field))
        right.append(_draw(stream, n, field))
    return TensorProbe(left=np.column_stack(left), right=np.column_stack(right),
                       field=field, seed=seed)


def _sparse_input(f: VectorValuedFunction) -> bool:
    return f.sparse_evaluator is not None and f.sparsity != 'dense'


def apply_probe(op: ProbingOperator, f: VectorValuedFunction, z: complex) -> np.ndarray:
    """
    Sketch f(z) with a probing operator.

    Args:
        op: Probe dimensioned for f
        f: Function to probe
        z: Evaluation point

    Returns:
        Complex vector of length ell
    """
    if isinstance(op, FullProbe):
        if op.dim != f.dim_N:
            raise InvalidInputError(f"Probe has {op.dim} rows, function has dimension {f.dim_N}")
        if _sparse_input(f):
            linear, values = f.nonzero_pattern(z)
            return (op.matrix[linear, :].T @ values).astype(complex)
        return (op.matrix.T @ f(z)).astype(complex)
    if isinstance(op, TensorProbe):
        if f.matrix_shape is None or tuple(f.matrix_shape) != op.matrix_shape:
            raise InvalidInputError(
                f"Tensorized probe of shape {op.matrix_shape} needs a matrix function of that shape"
            )
        matrix = scipy.sparse.csr_array(f.sparse_matrix(z)) if _sparse_input(f) else f.matrix(z)
        projected = np.asarray(matrix @ op.right)
        return np.sum(op.left * projected, axis=0).astype(complex)
    if isinstance(op, SparseProbe):
        linear, values = f.nonzero_pattern(z)
        if linear.size and linear[-1] >= f.dim_N:
            raise InvalidInputError("Nonzero pattern exceeds the function dimension")
        return op.observe(linear, values).astype(complex)
    raise InvalidInputError(f"Unsupported probing operator {type(op).__name__}")


@dataclass(frozen=True)
class SketchedSplitForm:
    """Split form with each coefficient replaced by its ell-dimensional sketch."""

    split: SplitForm
    vectors: np.ndarray

    @property
    def ell(self) -> int:
        return int(self.vectors.shape[0])

    def __call__(self, z: complex) -> np.ndarray:
        return self.sample(np.array([z]))[:, 0]

    def sample(self, points) -> np.ndarray:
        """ell x len(points) matrix of sketched values."""
        scalars = self.split.scalar_values(points)
        if self.split.count == 0:
            return np.zeros((self.ell, scalars.shape[1]), dtype=complex)
        return self.vectors @ scalars


def precompute_split_sketch(op: ProbingOperator, sf: SplitForm) -> SketchedSplitForm:
    """
    Sketch the coefficient matrices of a split form once.

    Args:
        op: Full or tensorized probe dimensioned for the coefficient shape
        sf: Split form

    Returns:
        SketchedSplitForm whose column i is the sketch of coefficient i
    """
    if isinstance(op, FullProbe):
        if op.dim != sf.dim:
            raise InvalidInputError(f"Probe has {op.dim} rows, split form has dimension {sf.dim}")
        columns = sf.coefficient_columns()
        vectors = np.asarray((columns.T @ op.matrix).T) if sf.count else np.zeros((op.ell, 0))
    elif isinstance(op, TensorProbe):
        if op.matrix_shape != sf.shape:
            raise InvalidInputError(f"Probe shape {op.matrix_shape} does not match split form {sf.shape}")
        vectors = np.zeros((op.ell, sf.count), dtype=complex)
        for index, term in enumerate(sf.terms):
            projected = np.asarray(term.coefficient @ op.right)
            vectors[:, index] = np.sum(op.left * projected, axis=0)
    else:
        raise InvalidInputError("Only full and tensorized probes can be precomputed")
    return SketchedSplitForm(split=sf, vectors=np.asarray(vectors, dtype=complex))


def _sample_with_probe(op: ProbingOperator, f: VectorValuedFunction, points: np.ndarray,
                       workers: int = 1) -> np.ndarray:
    if workers > 1 and not isinstance(op, SparseProbe):
        with ThreadPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(lambda z: apply_probe(op, f, z), points))
    else:
        columns = [apply_probe(op, f, z) for z in points]
    if not columns:
        return np.zeros((op.ell, 0), dtype=complex)
    return np.column_stack(columns)


def sparse_probe(f: VectorValuedFunction, grid: TargetGrid, ell: int, seed: int = 0,
                 field: str = 'real') -> Tuple[np.ndarray, np.ndarray]:
    """
    Probe a sparse function on the grid, discovering its pattern on the fly.

    Args:
        f: Function exposing its nonzero positions
        grid: Target grid, visited in order
        ell: Number of probing vectors
        seed: Stream seed
        field: ``real`` (default) or ``complex``

    Returns:
        Tuple (vals, ind): the ell x |grid| samples and the final index list
    """
    probe = SparseProbe(ell=ell, field=field, seed=seed)
    vals = _sample_with_probe(probe, f, grid.points)
    LOGGER.info("Sparse probe discovered %d nonzero position(s)", probe.indices.size)
    return vals, probe.indices


def draw_probe(f: VectorValuedFunction, ell: int, mode: str, field: str, seed: int) -> ProbingOperator:
    """Draw the probe family named by mode for f."""
    if mode == 'full':
        return draw_full_probe(f.dim_N, ell, field, seed)
    if mode == 'tensorized':
        if f.matrix_shape is None:
            raise InvalidInputError("Tensorized probing requires a matrix-valued function")
        return draw_tensor_probe(f.matrix_shape, ell, field, seed)
    if mode == 'sparse':
        return SparseProbe(ell=ell, field=field, seed=seed)
    raise InvalidInputError(f"Unknown probing mode '{mode}', expected one of {PROBE_MODES}")


def default_field(f: VectorValuedFunction, mode: str) -> str:
    """Real probes for real functions and for sparse probing, complex otherwise."""
    if mode == 'sparse' or f.real_valued:
        return 'real'
    return 'complex'


def surrogate_samples(op: ProbingOperator, f: VectorValuedFunction, points,
                      precompute: bool = False, workers: int = 1) -> np.ndarray:
    """
    ell x len(points) sketch of f, via the precomputed split form when asked.
    """
    points = np.asarray(points, dtype=complex).ravel()
    if precompute and f.split is not None and not isinstance(op, SparseProbe):
        return precompute_split_sketch(op, f.split).sample(points)
    return _sample_with_probe(op, f, points, workers)


def sketch_stored_samples(op: ProbingOperator, samples) -> np.ndarray:
    """
    Sketch an N x M matrix of stored samples column by column.

    Sparse probes discover the pattern from the numerically nonzero entries.
    """
    samples = np.asarray(samples)
    if isinstance(op, FullProbe):
        return (op.matrix.T @ samples).astype(complex)
    if isinstance(op, TensorProbe):
        return (op.as_full().T @ samples).astype(complex)
    columns = []
    for column in samples.T:
        linear = np.flatnonzero(column)
        columns.append(op.observe(linear, column[linear]).astype(complex))
    return np.column_stack(columns) if columns else np.zeros((op.ell, 0), dtype=complex)


class SketchRun(NamedTuple):
    model: BarycentricModel
    report: AAAReport
    surrogate: BarycentricModel
    probe: ProbingOperator
    timings: Dict[str, float]


def run_sketch_aaa(f: VectorValuedFunction, grid: TargetGrid, ell: int, mode: str = 'full',
                   cfg: Optional[AAAConfig] = None, seed: int = 0, field: Optional[str] = None,
                   precompute: bool = False, workers: int = 1,
                   full_samples: Optional[np.ndarray] = None) -> SketchRun:
    """
    Sketch f with ell probing vectors, approximate the sketch and lift.

    Args:
        f: Function to approximate
        grid: Target grid
        ell: Number of probing vectors
        mode: ``full``, ``tensorized`` or ``sparse``
        cfg: Set-valued AAA parameters
        seed: Probe seed
        field: Probe field; defaults via ``default_field``
        precompute: Sketch the split-form coefficients once instead of
            probing every evaluation of f
        workers: Threads used for surrogate sampling
        full_samples: Optional N x |grid| samples of f evaluated beforehand;
            the surrogate is sketched from them and the lift reads them

    Returns:
        SketchRun with the lifted model (values f(z_i)), the AAA report, the
        surrogate model (sketched values), the probe and per-phase timings
    """
    cfg = cfg or AAAConfig()
    field = field or default_field(f, mode)
    timings: Dict[str, float] = {}
    started = time.perf_counter()

    probe = draw_probe(f, ell, mode, field, seed)
    timings['probe'] = time.perf_counter() - started
    LOGGER.info("Drew %s probe with ell=%d (%s)", mode, ell, field)

    mark = time.perf_counter()
    if full_samples is not None:
        samples = sketch_stored_samples(probe, full_samples)
    else:
        samples = surrogate_samples(probe, f, grid.points, precompute=precompute, workers=workers)
    timings['surrogate'] = time.perf_counter() - mark
    LOGGER.info("Sampled surrogate on %d grid points", len(grid))

    mark = time.perf_counter()
    surrogate, report = run_set_valued_aaa(samples, grid, cfg)
    timings['aaa'] = time.perf_counter() - mark

    mark = time.perf_counter()
    if full_samples is not None:
        model = surrogate.lift(np.asarray(full_samples)[:, report.support_indices])
    else:
        model = surrogate.lift(f.sample(surrogate.supports))
    timings['lift'] = time.perf_counter() - mark
    timings['total'] = time.perf_counter() - started
    LOGGER.info("Lifted degree %d model to dimension %d", model.degree, model.dim)
    return SketchRun(model, report, surrogate, probe, timings)


class ErrorEstimate(NamedTuple):
    estimate: float
    lower: float
    upper: float
    relative: float
    tau: float


def surrogate_error_estimate(f: VectorValuedFunction, model: BarycentricModel, grid: TargetGrid,
                             ell: int = 4, seed: int = 1, field: Optional[str] = None,
                             tau: float = 10.0) -> ErrorEstimate:
    """
    A posteriori estimate of ||f - R||_F over the grid from an independent sketch.

    The sketched residual V^T f - V^T R is formed without touching the full
    residual: V^T R is the model with its values replaced by V^T f(z_i).

    Args:
        f: The approximated function
        model: Lifted model with full values
        grid: Target grid
        ell: Probe size of the estimating sketch
        seed: Seed of the estimating sketch (use one not used for fitting)
        field: Probe field; defaults to complex unless f is real-valued
        tau: Width of the reported interval [est / tau, tau * est]

    Returns:
        ErrorEstimate with the absolute and relative estimate
    """
    if not tau > 1:
        raise InvalidInputError(f"tau must exceed 1, got {tau}")
    field = field or default_field(f, 'full')
    probe = draw_full_probe(f.dim_N, ell, field, seed)
    sketched = surrogate_samples(probe, f, grid.points, precompute=f.split is not None)
    sketched_model = model.lift(probe.matrix.T @ model.values)
    residual = sketched - sketched_model.evaluate_many(grid.points)
    estimate = float(np.linalg.norm(residual))
    scale = float(np.linalg.norm(sketched))
    relative = estimate / scale if scale > 0 else float('inf')
    return ErrorEstimate(estimate, estimate / tau, estimate * tau, relative, float(tau))


class RealizationSummary(NamedTuple):
    seeds: List[int]
    degrees: List[int]
    relerrs: List[float]
    mean: float
    median: float
    band50: Tuple[float, float]
    band90: Tuple[float, float]


def run_realizations(f: VectorValuedFunction, grid: TargetGrid, ell: int, mode: str,
                     cfg: Optional[AAAConfig], seeds: Sequence[int], field: Optional[str] = None,
                     precompute: bool = False) -> RealizationSummary:
    """
    Repeat the sketched run over several probe seeds and summarise the errors.

    Returns:
        RealizationSummary with per-seed degree and relative error, their
        mean and median, and the central 50% and 90% bands of the error
    """
    seeds = [int(seed) for seed in seeds]
    if not seeds:
        raise InvalidInputError("At least one seed is required")
    exact = f.sample(grid.points)
    degrees, relerrs = [], []
    for seed in seeds:
        run = run_sketch_aaa(f, grid, ell, mode, cfg, seed, field=field, precompute=precompute)
        degrees.append(run.model.degree)
        relerrs.append(sigma_uniform_relerr(f, run.model, grid, samples=exact))
    errors = np.asarray(relerrs)
    p5, p25, p50, p75, p95 = np.percentile(errors, [5, 25, 50, 75, 95])
    return RealizationSummary(
        seeds=seeds,
        degrees=degrees,
        relerrs=relerrs,
        mean=float(errors.mean()),
        median=float(p50),
        band50=(float(p25), float(p75)),
        band90=(float(p5), float(p95)),
    )
