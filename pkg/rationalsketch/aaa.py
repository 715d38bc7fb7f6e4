#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         aaa
# Purpose:      Set-valued AAA engine with block Loewner weights and
#               greedy max-norm support selection
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from rationalsketch.kernel import InvalidInputError, reduce_tall, smallest_right_singular_vector
from rationalsketch.model import BarycentricModel, TargetGrid, VectorValuedFunction

LOGGER = logging.getLogger(__name__)

TIE_BREAK_RULES = ('lowest-index',)
BASELINE_VARIANTS = ('split', 'entries')

# Upper bound on complex entries held by one Loewner row block.
LOEWNER_BLOCK_ENTRIES = 1 << 22


class GridExhaustedError(RuntimeError):
    """Raised when no grid points remain outside the support set."""


@dataclass(frozen=True)
class AAAConfig:
    """Stopping and scaling parameters for the set-valued AAA iteration."""

    reltol: float = 1e-8
    dmax: int = 100
    scale_components: bool = False
    tie_break: str = 'lowest-index'

    def __post_init__(self):
        if not self.reltol > 0:
            raise InvalidInputError(f"reltol must be positive, got {self.reltol}")
        if int(self.dmax) != self.dmax or self.dmax < 1:
            raise InvalidInputError(f"dmax must be a positive integer, got {self.dmax}")
        if self.tie_break not in TIE_BREAK_RULES:
            raise InvalidInputError(f"Unsupported tie-break rule '{self.tie_break}'")


@dataclass(frozen=True)
class IterationRecord:
    """One accepted support point."""

    degree: int
    index: int
    max_residual: float
    metric: float
    seconds: float = 0.0


@dataclass
class AAAReport:
    """Iteration history of a set-valued AAA run."""

    records: List[IterationRecord] = field(default_factory=list)
    terminated_by: str = 'dmax'
    grid_exhausted: bool = False

    @property
    def degree(self) -> int:
        return len(self.records) - 1

    @property
    def metrics(self) -> List[float]:
        return [record.metric for record in self.records]

    @property
    def support_indices(self) -> List[int]:
        return [record.index for record in self.records]

    @property
    def final_metric(self) -> float:
        return self.records[-1].metric if self.records else float('inf')

    @property
    def seconds(self) -> float:
        return float(sum(record.seconds for record in self.records))


def _loewner_blocks(samples: np.ndarray, points: np.ndarray, support_indices: Sequence[int],
                    remaining: np.ndarray) -> Iterator[np.ndarray]:
    """Row blocks of the block Loewner matrix, a whole number of grid points each."""
    support_indices = np.asarray(support_indices, dtype=np.int64)
    n_components = samples.shape[0]
    n_columns = support_indices.size
    per_point = max(1, n_components * n_columns)
    chunk = max(1, LOEWNER_BLOCK_ENTRIES // per_point)
    support_points = points[support_indices]
    support_values = samples[:, support_indices]
    for start in range(0, remaining.size, chunk):
        rows = remaining[start:start + chunk]
        cauchy = 1.0 / (points[rows][:, None] - support_points[None, :])
        # (points, components, supports) -> point-major, then component
        block = (samples[:, rows].T[:, :, None] - support_values[None, :, :]) * cauchy[:, None, :]
        yield block.reshape(-1, n_columns)


def _remaining_indices(n_points: int, support_indices: Sequence[int]) -> np.ndarray:
    mask = np.ones(n_points, dtype=bool)
    mask[np.asarray(support_indices, dtype=np.int64)] = False
    return np.flatnonzero(mask)


def _validate_supports(n_points: int, support_indices: Sequence[int]):
    indices = np.asarray(support_indices, dtype=np.int64)
    if indices.size == 0:
        raise InvalidInputError("At least one support index is required")
    if np.unique(indices).size != indices.size:
        raise InvalidInputError("Support indices must be distinct")
    if indices.min() < 0 or indices.max() >= n_points:
        raise InvalidInputError(f"Support indices must lie in [0, {n_points})")
    if n_points <= indices.size:
        raise GridExhaustedError(
            f"Grid of {n_points} points leaves no rows for {indices.size} supports"
        )


def build_block_loewner(samples, grid: TargetGrid, support_indices: Sequence[int]) -> np.ndarray:
    """
    Assemble the block Loewner matrix of a set of sampled functions.

    Args:
        samples: L x |grid| matrix, one row per component
        grid: Target grid the samples were taken on
        support_indices: Grid indices of the supports, in selection order

    Returns:
        L * (|grid| - d - 1) x (d + 1) matrix; rows run over the non-support
        points in grid order and, within a point, over the components
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=complex))
    if samples.shape[1] != len(grid):
        raise InvalidInputError(
            f"Samples have {samples.shape[1]} columns for a grid of {len(grid)} points"
        )
    _validate_supports(len(grid), support_indices)
    remaining = _remaining_indices(len(grid), support_indices)
    return np.vstack(list(_loewner_blocks(samples, grid.points, support_indices, remaining)))


def greedy_select(residual, active_indices: Optional[Sequence[int]] = None) -> int:
    """
    Pick the grid point with the largest residual.

    Args:
        residual: Per-point maximal residual over the active points
        active_indices: Grid indices the residual entries belong to
            (defaults to 0..len(residual)-1)

    Returns:
        Grid index of the maximum; ties go to the lowest index
    """
    residual = np.asarray(residual, dtype=float).ravel()
    if residual.size == 0:
        raise InvalidInputError("Residual vector is empty")
    residual = np.where(np.isnan(residual), np.inf, residual)
    position = int(np.argmax(residual))
    if active_indices is None:
        return position
    active_indices = np.asarray(active_indices, dtype=np.int64)
    if active_indices.size != residual.size:
        raise InvalidInputError("Residual and active index lists differ in length")
    return int(active_indices[position])


def _component_scales(samples: np.ndarray) -> np.ndarray:
    scales = np.max(np.abs(samples), axis=1)
    return np.where(scales > 0, scales, 1.0)


def _solve_weights(samples: np.ndarray, points: np.ndarray, support_indices: List[int],
                   remaining: np.ndarray) -> np.ndarray:
    n_columns = len(support_indices)
    n_rows = samples.shape[0] * remaining.size
    blocks = _loewner_blocks(samples, points, support_indices, remaining)
    if n_rows < n_columns:
        loewner = np.vstack(list(blocks))
        loewner = np.vstack([loewner, np.zeros((n_columns - n_rows, n_columns), dtype=complex)])
    else:
        loewner = reduce_tall(blocks)
    weights, sigma_min = smallest_right_singular_vector(loewner)
    LOGGER.debug("Loewner system %dx%d, sigma_min=%.3e", n_rows, n_columns, sigma_min)
    return weights


def _quotient_on(points: np.ndarray, supports: np.ndarray, weights: np.ndarray,
                 values: np.ndarray) -> np.ndarray:
    """Barycentric quotient at points disjoint from the supports (components x points)."""
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        cauchy = 1.0 / (points[:, None] - supports[None, :])
        numerator = cauchy @ (weights[:, None] * values.T)
        denominator = cauchy @ weights
        return (numerator / denominator[:, None]).T


def run_set_valued_aaa(samples, grid: TargetGrid,
                       cfg: Optional[AAAConfig] = None) -> Tuple[BarycentricModel, AAAReport]:
    """
    Approximate a set of sampled functions by rationals sharing supports and weights.

    Args:
        samples: L x |grid| matrix of finite samples, one row per component
        grid: Target grid
        cfg: Stopping and scaling parameters

    Returns:
        Tuple (model whose values are the unscaled samples at the supports, report)
    """
    cfg = cfg or AAAConfig()
    samples = np.atleast_2d(np.asarray(samples, dtype=complex))
    n_points = len(grid)
    if samples.shape[1] != n_points:
        raise InvalidInputError(
            f"Samples have {samples.shape[1]} columns for a grid of {n_points} points"
        )
    if n_points < 2:
        raise InvalidInputError("Set-valued AAA needs at least two grid points")
    if not np.all(np.isfinite(samples)):
        raise InvalidInputError("Samples contain non-finite values")

    working = samples / _component_scales(samples)[:, None] if cfg.scale_components else samples
    points = grid.points
    reference = float(np.max(np.abs(working)))

    report = AAAReport()
    support_indices: List[int] = []
    weights = np.ones(1, dtype=complex)
    approximation = np.repeat(working.mean(axis=1, keepdims=True), n_points, axis=1)

    while True:
        started = time.perf_counter()
        if len(support_indices) + 1 >= n_points and support_indices:
            report.grid_exhausted = True
            report.terminated_by = 'dmax'
            LOGGER.warning("Grid exhausted at degree %d", len(support_indices) - 1)
            break

        remaining = _remaining_indices(n_points, support_indices) if support_indices else np.arange(n_points)
        residual = np.abs(working[:, remaining] - approximation[:, remaining])
        residual = np.where(np.isfinite(residual), residual, np.inf).max(axis=0)
        chosen = greedy_select(residual, remaining)
        max_residual = float(residual[np.searchsorted(remaining, chosen)])
        support_indices.append(chosen)
        remaining = _remaining_indices(n_points, support_indices)

        weights = _solve_weights(working, points, support_indices, remaining)
        supports = points[support_indices]
        approximation = np.array(working, copy=True)
        approximation[:, remaining] = _quotient_on(
            points[remaining], supports, weights, working[:, support_indices]
        )

        error = np.abs(working[:, remaining] - approximation[:, remaining])
        error = np.where(np.isfinite(error), error, np.inf)
        if reference == 0.0:
            metric = 0.0
        else:
            metric = float(error.max()) / reference if error.size else 0.0

        degree = len(support_indices) - 1
        record = IterationRecord(degree, chosen, max_residual, metric, time.perf_counter() - started)
        report.records.append(record)
        LOGGER.debug("degree=%d index=%d metric=%.3e", degree, chosen, metric)

        if metric <= cfg.reltol:
            report.terminated_by = 'tolerance'
            break
        if degree >= cfg.dmax:
            report.terminated_by = 'dmax'
            break

    zero_weights = int(np.count_nonzero(weights == 0))
    if zero_weights:
        LOGGER.warning("Keeping %d support point(s) with zero weight", zero_weights)

    model = BarycentricModel.create(points[support_indices], weights, samples[:, support_indices])
    LOGGER.info("Set-valued AAA finished at degree %d (%s)", model.degree, report.terminated_by)
    return model, report


def run_set_valued_baseline(f: VectorValuedFunction, grid: TargetGrid, cfg: Optional[AAAConfig] = None,
                            variant: str = 'split') -> Tuple[BarycentricModel, AAAReport]:
    """
    Unsketched set-valued AAA, lifted to full matrix values.

    Args:
        f: Function to approximate
        grid: Target grid
        cfg: Stopping parameters (component scaling is forced by the variant)
        variant: ``split`` approximates the split-form scalar functions with
            component scaling; ``entries`` approximates all N entries unscaled

    Returns:
        Tuple (model with full values F(z_i), report)
    """
    cfg = cfg or AAAConfig()
    if variant not in BASELINE_VARIANTS:
        raise InvalidInputError(f"Unknown baseline variant '{variant}'")
    if variant == 'split':
        if f.split is None:
            raise InvalidInputError(f"Function '{f.name}' has no split form")
        scalars = f.split.scalar_values(grid.points)
        surrogate, report = run_set_valued_aaa(
            scalars, grid, dataclasses.replace(cfg, scale_components=True)
        )
        model = surrogate.lift(f.sample(surrogate.supports))
    else:
        model, report = run_set_valued_aaa(
            f.sample(grid.points), grid, dataclasses.replace(cfg, scale_components=False)
        )
    return model, report
