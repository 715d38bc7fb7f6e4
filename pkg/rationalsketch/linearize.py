#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         linearize
# Purpose:      Linearization pencil of a barycentric matrix model and a
#               sampling/Newton oracle for scalar rational zeros
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.ndimage

from rationalsketch.kernel import InvalidInputError, generalized_eigenvalues
from rationalsketch.model import BarycentricModel, DomainSpec, devectorize, eval_barycentric

LOGGER = logging.getLogger(__name__)

WEIGHT_TOL = 1e-14

# Oracle settings
INTERVAL_POINTS_PER_UNIT = 1000
LATTICE_POINTS_PER_SIDE = 400
NEWTON_TOL = 1e-12
NEWTON_MAX_STEPS = 100
ZERO_RESIDUAL_TOL = 1e-10


class WeightDegeneracyError(RuntimeError):
    """Raised when a barycentric weight vanishes and the pencil is undefined."""

    def __init__(self, j: int, weight: complex):
        self.j = j
        self.weight = weight
        super().__init__(f"Weight w_{j} = {weight!r} is numerically zero")


class UnsupportedDegreeError(ValueError):
    """Raised for models whose degree is below two."""


@dataclass(frozen=True)
class PencilPair:
    """
    The nd x nd pencil A - zB together with its free parameters.

    beta, h and k are indexed j = 1..d and stored at positions 0..d-1.
    """

    A: np.ndarray
    B: np.ndarray
    beta: np.ndarray
    h: np.ndarray
    k: np.ndarray
    n: int
    d: int
    supports: np.ndarray
    weights: np.ndarray

    def constraint_residual(self) -> float:
        """Largest violation of beta_j k_j = -w_{j-1}/w_j and beta_j h_j = -z_j w_{j-1}/w_j."""
        ratio = self.weights[:-1] / self.weights[1:]
        k_residual = np.abs(self.beta * self.k + ratio)
        h_residual = np.abs(self.beta * self.h + self.supports[1:] * ratio)
        return float(max(k_residual.max(), h_residual.max()))


def _square_size(model: BarycentricModel, matrix_shape: Optional[Tuple[int, int]]) -> int:
    if matrix_shape is not None:
        m, n = matrix_shape
        if m != n or m * n != model.dim:
            raise InvalidInputError(f"Model values must be square matrices, got shape {matrix_shape}")
        return int(n)
    n = math.isqrt(model.dim)
    if n * n != model.dim:
        raise InvalidInputError(f"Model dimension {model.dim} is not a square matrix size")
    return n


def build_pencil(model: BarycentricModel, beta: Optional[Sequence[float]] = None,
                 matrix_shape: Optional[Tuple[int, int]] = None) -> PencilPair:
    """
    Assemble the linearization pencil of a matrix-valued barycentric model.

    The eigenvalues of A - zB are the zeros of the model's numerator
    sum_i w_i F(z_i) / (z - z_i).

    Args:
        model: Model of degree d >= 2 with values vec(F(z_i))
        beta: Optional beta_1..beta_d (defaults to ones)
        matrix_shape: Optional (n, n); inferred from the model dimension otherwise

    Returns:
        PencilPair
    """
    d = model.degree
    if d < 2:
        raise UnsupportedDegreeError(f"Linearization needs degree at least 2, got {d}")
    n = _square_size(model, matrix_shape)
    weights = np.asarray(model.weights)
    supports = np.asarray(model.supports)
    for j, weight in enumerate(weights):
        if abs(weight) <= WEIGHT_TOL:
            raise WeightDegeneracyError(j, complex(weight))

    beta = np.ones(d) if beta is None else np.asarray(beta, dtype=complex).ravel()
    if beta.size != d or np.any(beta == 0):
        raise InvalidInputError(f"beta must hold {d} nonzero entries")
    ratio = weights[:-1] / weights[1:]
    k = -ratio / beta
    h = -supports[1:] * ratio / beta

    blocks = [devectorize(model.values[:, c], (n, n)) for c in range(d + 1)]
    identity = np.eye(n)
    a_matrix = np.zeros((n * d, n * d), dtype=complex)
    b_matrix = np.zeros((n * d, n * d), dtype=complex)

    def block(row: int, col: int) -> Tuple[slice, slice]:
        return slice(row * n, (row + 1) * n), slice(col * n, (col + 1) * n)

    h_d, k_d, beta_d = h[d - 1], k[d - 1], beta[d - 1]
    for col in range(d):
        a_matrix[block(0, col)] = h_d * blocks[col]
        b_matrix[block(0, col)] = k_d * blocks[col]
    a_matrix[block(0, d - 1)] -= supports[d - 1] * blocks[d] / beta_d
    b_matrix[block(0, d - 1)] -= blocks[d] / beta_d

    for row in range(1, d):
        a_matrix[block(row, row - 1)] = supports[row - 1] * identity
        b_matrix[block(row, row - 1)] = identity
        a_matrix[block(row, row)] = beta[row - 1] * h[row - 1] * identity
        b_matrix[block(row, row)] = beta[row - 1] * k[row - 1] * identity

    LOGGER.debug("Built %dx%d pencil for degree %d", n * d, n * d, d)
    return PencilPair(a_matrix, b_matrix, beta, h, k, n, d, supports, weights)


def pencil_eigenvalues(p: PencilPair, region: Optional[DomainSpec] = None,
                       tol: float = 1e-8) -> List[complex]:
    """
    Finite eigenvalues of the pencil inside the closed region.

    Args:
        p: Pencil
        region: Filtering region (None keeps every finite eigenvalue)
        tol: Relative slack on the region boundary

    Returns:
        Eigenvalues sorted by real then imaginary part
    """
    eigenvalues = generalized_eigenvalues(p.A, p.B)
    if region is not None:
        eigenvalues = eigenvalues[region.contains(eigenvalues, tol=tol)]
    return sorted((complex(value) for value in eigenvalues), key=lambda v: (v.real, v.imag))


def eigenvalue_residuals(model: BarycentricModel, eigenvalues: Sequence[complex],
                         matrix_shape: Optional[Tuple[int, int]] = None) -> List[float]:
    """sigma_min(R(lambda)) / ||R(lambda)||_2 for each eigenvalue."""
    n = _square_size(model, matrix_shape)
    residuals = []
    for value in eigenvalues:
        sigma = scipy.linalg.svdvals(devectorize(eval_barycentric(model, value), (n, n)))
        residuals.append(float(sigma[-1] / sigma[0]) if sigma[0] > 0 else 0.0)
    return residuals


class OracleZero(NamedTuple):
    value: complex
    residual: float
    converged: bool


def _abs_rational(model: BarycentricModel, z: np.ndarray) -> np.ndarray:
    coefficients = model.weights * model.values[0]
    differences = z[:, None] - model.supports[None, :]
    hit_rows, hit_cols = np.nonzero(differences == 0)
    differences[hit_rows, hit_cols] = 1.0
    cauchy = 1.0 / differences
    cauchy[hit_rows, hit_cols] = 0.0
    with np.errstate(divide='ignore', invalid='ignore'):
        magnitude = np.abs((cauchy @ coefficients) / (cauchy @ model.weights))
    magnitude[hit_rows] = np.abs(model.values[0, hit_cols])
    return np.where(np.isfinite(magnitude), magnitude, np.inf)


def _factored_numerator(model: BarycentricModel, z: complex) -> Tuple[complex, complex, float]:
    """
    The numerator N(z) = sum_i c_i prod_{k != i} (z - z_k), c_i = w_i v_i,
    divided by prod_{k != j} (z - z_k) for the support z_j nearest to z.

    Returns (g, slope, scale) with g = N / prod, slope = N' / prod
    and scale the magnitude sum used for relative residuals. Only supports
    other than z_j appear in denominators.
    """
    coefficients = model.weights * model.values[0]
    differences = z - model.supports
    j = int(np.argmin(np.abs(differences)))
    e = differences[j]
    others = np.delete(differences, j)
    rest = np.delete(coefficients, j)
    inverse = 1.0 / others
    partial = np.sum(rest * inverse)
    partial_slope = -np.sum(rest * inverse ** 2)
    g = coefficients[j] + e * partial
    slope = g * np.sum(inverse) + partial + e * partial_slope
    scale = float(abs(coefficients[j]) + abs(e) * np.sum(np.abs(rest * inverse)))
    return complex(g), complex(slope), scale


def _newton(model: BarycentricModel, start: complex,
            deflate: Sequence[complex] = ()) -> Tuple[complex, bool]:
    """Newton on the numerator, deflated by already known zeros."""
    z = complex(start)
    known = np.asarray(deflate, dtype=complex)
    for _ in range(NEWTON_MAX_STEPS):
        g, slope, _ = _factored_numerator(model, z)
        if g == 0:
            return z, True
        log_slope = slope / g
        if known.size:
            gaps = z - known
            if np.any(gaps == 0):
                return z, False
            log_slope -= np.sum(1.0 / gaps)
        if log_slope == 0 or not np.isfinite(log_slope):
            return z, False
        step = 1.0 / log_slope
        z -= step
        if abs(step) <= NEWTON_TOL * max(1.0, abs(z)):
            return z, True
    return z, False


def _relative_residual(model: BarycentricModel, z: complex) -> float:
    g, _, scale = _factored_numerator(model, z)
    if g == 0:
        return 0.0
    if not np.isfinite(scale) or scale == 0:
        return float('inf')
    return float(abs(g) / scale)


def _starting_points(model: BarycentricModel, region: DomainSpec) -> np.ndarray:
    if region.kind == 'interval':
        a, b = (complex(e) for e in region.endpoints)
        count = max(INTERVAL_POINTS_PER_UNIT, int(math.ceil(INTERVAL_POINTS_PER_UNIT * abs(b - a)))) + 1
        points = a + np.linspace(0.0, 1.0, count) * (b - a)
        magnitude = _abs_rational(model, points)
        padded = np.concatenate([[np.inf], magnitude, [np.inf]])
        minima = (padded[1:-1] <= padded[:-2]) & (padded[1:-1] <= padded[2:])
        return points[minima & np.isfinite(magnitude)]
    if region.kind not in ('disc', 'halfdisc'):
        raise InvalidInputError(f"Zero oracle supports interval and disc regions, got '{region.kind}'")
    axis = np.linspace(-region.radius, region.radius, LATTICE_POINTS_PER_SIDE)
    lattice = region.center + axis[None, :] + 1j * axis[:, None]
    flat = lattice.ravel()
    magnitude = np.full(flat.shape, np.inf)
    inside = region.contains(flat)
    magnitude[inside] = _abs_rational(model, flat[inside])
    magnitude = magnitude.reshape(lattice.shape)
    minima = (scipy.ndimage.minimum_filter(magnitude, size=3, mode='constant', cval=np.inf) == magnitude)
    minima &= np.isfinite(magnitude)
    return lattice[minima]


def _refine(model: BarycentricModel, start: complex, region: DomainSpec,
            deflate: Sequence[complex] = ()) -> Optional[OracleZero]:
    z, converged = _newton(model, start, deflate)
    if not np.isfinite(z) or not region.contains(z, tol=1e-10):
        return None
    residual = _relative_residual(model, z)
    if residual <= ZERO_RESIDUAL_TOL:
        return OracleZero(z, residual, converged)
    if not converged and residual < 1e3 * ZERO_RESIDUAL_TOL:
        return OracleZero(z, residual, False)
    return None


def rational_zeros_report(model: BarycentricModel, region: DomainSpec) -> List[OracleZero]:
    """
    Zeros of a scalar model located by dense sampling and Newton refinement.

    Every local minimum of |r| on a fine sampling of the region seeds a Newton
    iteration on the polynomial numerator
    N(z) = sum_i w_i v_i prod_{k != i} (z - z_k). A start that lands on a zero
    found earlier is refined again with those zeros deflated out. Supports
    with v_i = 0 are zeros by interpolation.

    Args:
        model: Scalar barycentric model
        region: Interval, disc or half disc

    Returns:
        Distinct zeros inside the region; entries with converged=False did
        not meet the Newton tolerance within the step limit
    """
    if model.dim != 1:
        raise InvalidInputError(f"Zero oracle needs a scalar model, got dimension {model.dim}")
    found: List[OracleZero] = [
        OracleZero(complex(support), 0.0, True)
        for support, value in zip(model.supports, model.values[0])
        if value == 0 and region.contains(support, tol=1e-12)
    ]
    dedupe_tol = 1e-8 * region.scale

    def is_known(candidate: OracleZero) -> bool:
        return any(abs(candidate.value - known.value) <= dedupe_tol for known in found)

    for start in _starting_points(model, region):
        candidate = _refine(model, start, region)
        if candidate is not None and is_known(candidate):
            LOGGER.debug("Start %s fell onto known zero %s, deflating", start, candidate.value)
            candidate = _refine(model, start, region, [known.value for known in found])
        if candidate is None or is_known(candidate):
            continue
        if not candidate.converged:
            LOGGER.warning("Newton did not converge near %s (residual %.2e)", candidate.value,
                           candidate.residual)
        found.append(candidate)
    return sorted(found, key=lambda zero: (zero.value.real, zero.value.imag))


def rational_zeros_oracle(model: BarycentricModel, region: DomainSpec) -> List[complex]:
    """Converged zeros of a scalar model inside the region."""
    return [zero.value for zero in rational_zeros_report(model, region) if zero.converged]
