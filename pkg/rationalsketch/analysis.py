#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         analysis
# Purpose:      Stable rank, sketching probability bounds and the Monte Carlo
#               harness that checks them
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg

from rationalsketch.kernel import InvalidInputError, derive_seed, regularized_lower_gamma
from rationalsketch.model import BarycentricModel, TargetGrid, VectorValuedFunction
from rationalsketch.sketch import draw_full_probe, field_constant

LOGGER = logging.getLogger(__name__)


class UndefinedRankError(ValueError):
    """Raised when the stable rank of a zero matrix is requested."""


class DegenerateResidualError(RuntimeError):
    """Raised when the fixed model reproduces the function exactly on the grid."""


@dataclass(frozen=True)
class BoundQuery:
    """Parameters of the full-probe failure bounds."""

    tau: float
    ell: int
    rho: float = 1.0
    field: str = 'complex'

    def __post_init__(self):
        if not self.tau > 1:
            raise InvalidInputError(f"tau must exceed 1, got {self.tau}")
        if int(self.ell) != self.ell or self.ell < 1:
            raise InvalidInputError(f"ell must be a positive integer, got {self.ell}")
        if not self.rho >= 1:
            raise InvalidInputError(f"Stable rank must be at least 1, got {self.rho}")
        field_constant(self.field)

    @property
    def c(self) -> int:
        return field_constant(self.field)


@dataclass(frozen=True)
class EmpiricalStats:
    """Observed success frequencies next to the lower bounds they should respect."""

    p_over: float
    p_under: float
    p_both: float
    n_samples: int
    bound_over: float
    bound_under: float
    bound_both: float
    rho: float = 1.0
    tau: float = 0.0
    ell: int = 0

    def standard_error(self, p: float) -> float:
        """Monte Carlo standard error of a frequency p."""
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.n_samples)

    def respects_bounds(self, slack: float = 3.0) -> bool:
        """True when every frequency is at least its bound minus ``slack`` standard errors."""
        pairs = (
            (self.p_over, self.bound_over),
            (self.p_under, self.bound_under),
            (self.p_both, self.bound_both),
        )
        return all(p >= bound - slack * self.standard_error(bound) for p, bound in pairs)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def stable_rank(H) -> float:
    """
    Squared Frobenius norm over squared spectral norm.

    Args:
        H: Complex matrix

    Returns:
        Stable rank (>= 1)
    """
    matrix = np.asarray(H)
    if matrix.ndim != 2 or matrix.size == 0:
        raise InvalidInputError("Stable rank needs a non-empty matrix")
    sigma = scipy.linalg.svdvals(matrix)
    if sigma[0] == 0:
        raise UndefinedRankError("Stable rank of the zero matrix is undefined")
    return float(np.sum(sigma ** 2) / sigma[0] ** 2)


def singular_values_on_grid(H) -> np.ndarray:
    """Singular values of the sample matrix H, in decreasing order."""
    matrix = np.asarray(H)
    if matrix.ndim != 2:
        raise InvalidInputError("Sample matrix must be two-dimensional")
    return scipy.linalg.svdvals(matrix)


def bound_underestimate(q: BoundQuery) -> float:
    """
    Probability bound for the surrogate error underestimating by more than tau.

    Returns:
        gamma(c*ell/2, c*ell*rho/(2*tau^2)) / Gamma(c*ell/2)
    """
    shape = q.c * q.ell / 2.0
    argument = q.c * q.ell * q.rho / (2.0 * q.tau ** 2)
    return regularized_lower_gamma(shape, argument)


def bound_overestimate(q: BoundQuery) -> float:
    """Probability bound for the surrogate error overestimating by more than tau."""
    return min(1.0, math.exp(-q.c * q.ell * q.rho * (q.tau - 1.0) ** 2 / 2.0))


def _check_tau(tau: float):
    if not tau > 1:
        raise InvalidInputError(f"tau must exceed 1, got {tau}")


def tensor_bound_underestimate(tau: float) -> float:
    """Rank-one tensorized underestimation bound (event carries a sqrt(rho) factor)."""
    _check_tau(tau)
    return min(1.0, (2.0 / math.pi) * (2.0 + math.log(1.0 + 2.0 * tau)) / tau)


def tensor_bound_overestimate(tau: float) -> float:
    """Rank-one tensorized overestimation bound."""
    _check_tau(tau)
    return min(1.0, math.sqrt(2.0 * tau) * math.exp(-tau + 2.0))


def failure_probability_asymptotic(tau: float, ell: int, rho: float) -> float:
    """
    Small-argument rate (e * rho / tau^2) ** ell of the underestimation bound.

    Only below 1, and thus decaying in ell, when tau > sqrt(e * rho).
    """
    query = BoundQuery(tau=tau, ell=ell, rho=rho)
    return float((math.e * query.rho / query.tau ** 2) ** query.ell)


def residual_matrix(f: VectorValuedFunction, model: BarycentricModel, grid: TargetGrid) -> np.ndarray:
    """N x |grid| matrix with columns f(z) - R(z)."""
    if model.dim != f.dim_N:
        raise InvalidInputError(
            f"Model dimension {model.dim} does not match function dimension {f.dim_N}"
        )
    return f.sample(grid.points) - model.evaluate_many(grid.points)


def _residual_factor(H: np.ndarray) -> np.ndarray:
    """K = U * S from a thin SVD of H, so ||V^T H||_F = ||V^T K||_F."""
    u, sigma, _ = scipy.linalg.svd(H, full_matrices=False)
    keep = sigma > sigma[0] * np.finfo(float).eps * max(H.shape)
    return u[:, keep] * sigma[keep]


def _sample_estimates(factor: np.ndarray, ell: int, n_samples: int, seed: int,
                      field: str, workers: int = 1) -> np.ndarray:
    """Estimates ||V_k^T H||_F for probes V_k seeded by (seed, k)."""
    dim = factor.shape[0]

    def estimate(index: int) -> float:
        probe = draw_full_probe(dim, ell, field, derive_seed(seed, index))
        return float(np.linalg.norm(probe.matrix.T @ factor))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.fromiter(pool.map(estimate, range(n_samples)), dtype=float, count=n_samples)
    return np.fromiter((estimate(index) for index in range(n_samples)), dtype=float, count=n_samples)


def _stats_from_estimates(estimates: np.ndarray, exact: float, rho: float, tau: float,
                          ell: int, field: str) -> EmpiricalStats:
    under = estimates > exact / tau
    over = estimates < tau * exact
    query = BoundQuery(tau=tau, ell=ell, rho=rho, field=field)
    bound_under = 1.0 - bound_underestimate(query)
    bound_over = 1.0 - bound_overestimate(query)
    return EmpiricalStats(
        p_over=float(np.mean(over)),
        p_under=float(np.mean(under)),
        p_both=float(np.mean(over & under)),
        n_samples=int(estimates.size),
        bound_over=bound_over,
        bound_under=bound_under,
        bound_both=max(0.0, bound_over + bound_under - 1.0),
        rho=rho,
        tau=float(tau),
        ell=int(ell),
    )


def _prepare_residual(f: VectorValuedFunction, grid: TargetGrid, fixed_model: BarycentricModel):
    H = residual_matrix(f, fixed_model, grid)
    exact = float(np.linalg.norm(H))
    if exact == 0.0:
        raise DegenerateResidualError("Fixed model reproduces the function exactly on the grid")
    rho = stable_rank(H)
    LOGGER.info("Residual norm %.3e with stable rank %.3f", exact, rho)
    return _residual_factor(H), exact, rho


def empirical_success(f: VectorValuedFunction, grid: TargetGrid, fixed_model: BarycentricModel,
                      ell: int, tau: float, n_samples: int, seed: int, field: str = 'complex',
                      workers: int = 1) -> EmpiricalStats:
    """
    Monte Carlo success frequencies of the sketched residual norm.

    Args:
        f: Function approximated by fixed_model
        grid: Target grid
        fixed_model: Model built independently of the sampled probes
        ell: Probe size
        tau: Tolerance factor (> 1)
        n_samples: Number of independent probes
        seed: Base seed; sample k uses a seed derived from (seed, k)
        field: Probe field
        workers: Threads used for sampling

    Returns:
        EmpiricalStats for under-, over- and two-sided success
    """
    if n_samples < 1:
        raise InvalidInputError(f"n_samples must be positive, got {n_samples}")
    _check_tau(tau)
    factor, exact, rho = _prepare_residual(f, grid, fixed_model)
    estimates = _sample_estimates(factor, ell, n_samples, seed, field, workers)
    return _stats_from_estimates(estimates, exact, rho, tau, ell, field)


def empirical_table(f: VectorValuedFunction, grid: TargetGrid, fixed_model: BarycentricModel,
                    taus: Sequence[float], ells: Sequence[int], n_samples: int, seed: int,
                    field: str = 'complex', workers: int = 1) -> List[EmpiricalStats]:
    """
    Empirical success statistics for every (tau, ell) pair.

    The probes for one ell are shared by all tau values.
    """
    if n_samples < 1:
        raise InvalidInputError(f"n_samples must be positive, got {n_samples}")
    for tau in taus:
        _check_tau(tau)
    factor, exact, rho = _prepare_residual(f, grid, fixed_model)
    rows: List[EmpiricalStats] = []
    for ell in ells:
        estimates = _sample_estimates(factor, ell, n_samples, seed, field, workers)
        for tau in taus:
            rows.append(_stats_from_estimates(estimates, exact, rho, tau, ell, field))
    LOGGER.info("Computed %d empirical rows from %d samples each", len(rows), n_samples)
    return sorted(rows, key=lambda row: (row.tau, row.ell))


def bounds_row(tau: float, ell: int, rho: float, field: str = 'complex',
               tensorized: bool = False) -> Dict[str, Optional[float]]:
    """Bound values for one parameter set, as reported by the command line."""
    query = BoundQuery(tau=tau, ell=ell, rho=rho, field=field)
    row: Dict[str, Optional[float]] = {
        'tau': float(tau),
        'ell': int(ell),
        'rho': float(rho),
        'field': field,
        'under': bound_underestimate(query),
        'over': bound_overestimate(query),
        'asymptotic': failure_probability_asymptotic(tau, ell, rho),
        'tensor_under': None,
        'tensor_over': None,
    }
    if tensorized and ell == 1:
        row['tensor_under'] = tensor_bound_underestimate(tau)
        row['tensor_over'] = tensor_bound_overestimate(tau)
    return row
