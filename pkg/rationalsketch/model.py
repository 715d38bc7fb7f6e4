#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         model
# Purpose:      Target grids, vector-valued functions, split forms and
#               barycentric rational models
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse

from rationalsketch.kernel import InvalidInputError

LOGGER = logging.getLogger(__name__)

DOMAIN_KINDS = ('disc', 'halfdisc', 'interval', 'explicit')
SPARSITY_KINDS = ('dense', 'fixed-pattern', 'variable-pattern')
NORM_KINDS = ('max', 'fro')
# Tolerance on the unit 2-norm of stored weights.
WEIGHT_NORM_TOL = 1e-12
ROUNDING_SLACK = 8 * np.finfo(float).eps


class SplitEvaluationError(RuntimeError):
    """Raised when a split-form scalar function is not finite at a point."""

    def __init__(self, z: complex, term_index: int, value: Any = None):
        self.z = z
        self.term_index = term_index
        super().__init__(
            f"Split-form term {term_index} evaluated to {value!r} at z={z!r}"
        )


class PoleEvaluationError(ZeroDivisionError):
    """Raised when a barycentric denominator vanishes away from the supports."""

    def __init__(self, z: complex):
        self.z = z
        super().__init__(f"Barycentric denominator is zero at z={z!r}")


class ZeroFunctionError(ZeroDivisionError):
    """Raised when a relative error is requested for a function vanishing on the grid."""


@dataclass(frozen=True)
class DomainSpec:
    """
    Description of the region a target grid is drawn from.

    kind is one of ``disc``, ``halfdisc`` (the part of the disc on or above
    the horizontal diameter through the center), ``interval`` (the segment
    between two endpoints) or ``explicit`` (no geometric region).
    """

    kind: str
    center: complex = 0j
    radius: float = 1.0
    endpoints: Tuple[complex, complex] = (-1.0, 1.0)

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise InvalidInputError(f"Unknown domain kind '{self.kind}'")
        if self.kind in ('disc', 'halfdisc') and not self.radius > 0:
            raise InvalidInputError(f"Domain radius must be positive, got {self.radius}")
        if self.kind == 'interval' and self.endpoints[0] == self.endpoints[1]:
            raise InvalidInputError("Interval endpoints must be distinct")

    @classmethod
    def disc(cls, center: complex = 0j, radius: float = 1.0) -> "DomainSpec":
        return cls('disc', center=complex(center), radius=float(radius))

    @classmethod
    def halfdisc(cls, center: complex = 0j, radius: float = 1.0) -> "DomainSpec":
        return cls('halfdisc', center=complex(center), radius=float(radius))

    @classmethod
    def interval(cls, a: complex = -1.0, b: complex = 1.0) -> "DomainSpec":
        return cls('interval', endpoints=(a, b))

    @classmethod
    def explicit(cls) -> "DomainSpec":
        return cls('explicit')

    @property
    def scale(self) -> float:
        """Characteristic length of the domain."""
        if self.kind == 'interval':
            return float(abs(self.endpoints[1] - self.endpoints[0]))
        if self.kind == 'explicit':
            return 1.0
        return float(self.radius)

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        """
        Membership mask for the closed domain, enlarged by ``tol`` times its scale
        plus a few units of rounding.

        Args:
            points: Scalar or array of complex points
            tol: Relative slack

        Returns:
            Boolean array shaped like ``points``
        """
        z = np.asarray(points, dtype=complex)
        if self.kind == 'explicit':
            return np.ones(z.shape, dtype=bool)
        if self.kind == 'interval':
            a, b = complex(self.endpoints[0]), complex(self.endpoints[1])
            slack = tol * self.scale + ROUNDING_SLACK * max(1.0, abs(a), abs(b))
            direction = b - a
            t = ((z - a) / direction).real
            distance = np.abs(z - (a + np.clip(t, 0.0, 1.0) * direction))
            return distance <= slack
        slack = tol * self.scale + ROUNDING_SLACK * max(1.0, abs(self.center) + self.radius)
        inside = np.abs(z - self.center) <= self.radius + slack
        if self.kind == 'halfdisc':
            inside &= (z - self.center).imag >= -slack
        return inside

    def describe(self) -> dict:
        """JSON-friendly description."""
        if self.kind == 'interval':
            a, b = (complex(e) for e in self.endpoints)
            return {'kind': self.kind, 'endpoints': [[a.real, a.imag], [b.real, b.imag]]}
        if self.kind == 'explicit':
            return {'kind': self.kind}
        return {
            'kind': self.kind,
            'center': [self.center.real, self.center.imag],
            'radius': self.radius,
        }


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class TargetGrid:
    """The finite sampling set of complex points together with its domain."""

    points: np.ndarray
    domain: DomainSpec = field(default_factory=DomainSpec.explicit)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=complex).ravel()
        if points.size == 0:
            raise InvalidInputError("Target grid must contain at least one point")
        if not np.all(np.isfinite(points)):
            raise InvalidInputError("Target grid contains non-finite points")
        if np.unique(points).size != points.size:
            raise InvalidInputError("Target grid points must be pairwise distinct")
        if not np.all(self.domain.contains(points, tol=1e-12)):
            raise InvalidInputError(f"Target grid has points outside its {self.domain.kind} domain")
        object.__setattr__(self, 'points', _readonly(points))

    def __len__(self) -> int:
        return int(self.points.size)


def vectorize(matrix) -> np.ndarray:
    """Column-major stacking of a matrix into a vector."""
    return np.asarray(matrix).reshape(-1, order='F')


def devectorize(vector, shape: Tuple[int, int]) -> np.ndarray:
    """Inverse of ``vectorize``."""
    return np.asarray(vector).reshape(shape, order='F')


def _evaluate_scalar(function: Callable, z: complex, term_index: int) -> complex:
    value = complex(function(z))
    if not np.isfinite(value):
        raise SplitEvaluationError(z, term_index, value)
    return value


def _evaluate_scalar_many(function: Callable, points: np.ndarray, term_index: int) -> np.ndarray:
    try:
        values = np.asarray(function(points), dtype=complex)
        values = np.broadcast_to(values, points.shape)
    except (TypeError, ValueError):
        values = np.array([complex(function(z)) for z in points], dtype=complex)
    bad = ~np.isfinite(values)
    if np.any(bad):
        first = int(np.flatnonzero(bad)[0])
        raise SplitEvaluationError(complex(points[first]), term_index, values[first])
    return np.array(values)


@dataclass(frozen=True)
class SplitTerm:
    """One term f(z) * A of a split form; A is dense or a scipy sparse matrix."""

    function: Callable[[Any], Any]
    coefficient: Any
    label: str = ''

    @property
    def is_sparse(self) -> bool:
        return scipy.sparse.issparse(self.coefficient)


@dataclass(frozen=True)
class SplitForm:
    """A matrix function written as a sum of scalar functions times constant matrices."""

    terms: Tuple[SplitTerm, ...]
    shape: Tuple[int, int]

    def __post_init__(self):
        terms = tuple(self.terms)
        for index, term in enumerate(terms):
            if tuple(term.coefficient.shape) != tuple(self.shape):
                raise InvalidInputError(
                    f"Coefficient {index} has shape {term.coefficient.shape}, expected {self.shape}"
                )
        object.__setattr__(self, 'terms', terms)
        object.__setattr__(self, 'shape', (int(self.shape[0]), int(self.shape[1])))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[Callable, Any]],
                   shape: Optional[Tuple[int, int]] = None) -> "SplitForm":
        """Build a split form from (function, coefficient) pairs."""
        terms = []
        for function, coefficient in pairs:
            if not scipy.sparse.issparse(coefficient):
                coefficient = np.asarray(coefficient)
            terms.append(SplitTerm(function, coefficient))
        if shape is None:
            if not terms:
                raise InvalidInputError("Shape is required for an empty split form")
            shape = terms[0].coefficient.shape
        return cls(tuple(terms), tuple(shape))

    @property
    def count(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return self.shape[0] * self.shape[1]

    def scalar_values(self, points) -> np.ndarray:
        """Matrix of scalar function values, one row per term and one column per point."""
        z = np.asarray(points, dtype=complex).ravel()
        if not self.terms:
            return np.zeros((0, z.size), dtype=complex)
        return np.vstack([
            _evaluate_scalar_many(term.function, z, index)
            for index, term in enumerate(self.terms)
        ])

    def coefficient_columns(self):
        """N x s matrix whose columns are the vectorised coefficients (sparse if any term is)."""
        if any(term.is_sparse for term in self.terms):
            columns = [
                scipy.sparse.csc_array(term.coefficient).reshape((self.dim, 1), order='F')
                if term.is_sparse
                else scipy.sparse.csc_array(vectorize(term.coefficient).reshape(-1, 1))
                for term in self.terms
            ]
            return scipy.sparse.hstack(columns, format='csr')
        if not self.terms:
            return np.zeros((self.dim, 0), dtype=complex)
        return np.column_stack([vectorize(term.coefficient) for term in self.terms])

    def union_pattern(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Structural pattern shared by all coefficients.

        Returns:
            Tuple (rows, cols, data) where data has one row per term holding the
            coefficient entries aligned to the (rows, cols) pattern.
        """
        m, _ = self.shape
        linear_parts = []
        for term in self.terms:
            coo = scipy.sparse.coo_array(term.coefficient)
            linear_parts.append(np.asarray(coo.col, dtype=np.int64) * m + np.asarray(coo.row, dtype=np.int64))
        linear = np.unique(np.concatenate(linear_parts)) if linear_parts else np.empty(0, dtype=np.int64)
        data = np.zeros((len(self.terms), linear.size), dtype=complex)
        for index, term in enumerate(self.terms):
            coo = scipy.sparse.coo_array(term.coefficient)
            positions = np.searchsorted(linear, np.asarray(coo.col, dtype=np.int64) * m + np.asarray(coo.row, dtype=np.int64))
            np.add.at(data[index], positions, np.asarray(coo.data, dtype=complex))
        return linear % m, linear // m, data


def eval_split(split_form: SplitForm, z: complex) -> np.ndarray:
    """
    Evaluate sum_i f_i(z) A_i as a dense matrix.

    Args:
        split_form: Split form to evaluate
        z: Evaluation point

    Returns:
        Dense complex matrix of the split form's shape
    """
    result = np.zeros(split_form.shape, dtype=complex)
    for index, term in enumerate(split_form.terms):
        value = _evaluate_scalar(term.function, z, index)
        if term.is_sparse:
            result += value * term.coefficient.toarray()
        else:
            result += value * term.coefficient
    return result


class _PatternEvaluator:
    """Sparse evaluator with a pattern fixed to the union of the coefficient patterns."""

    def __init__(self, split_form: SplitForm):
        self.split_form = split_form
        self.rows, self.cols, self.data = split_form.union_pattern()

    def __call__(self, z: complex):
        scalars = np.array([
            _evaluate_scalar(term.function, z, index)
            for index, term in enumerate(self.split_form.terms)
        ], dtype=complex)
        values = scalars @ self.data if scalars.size else np.zeros(self.rows.size, dtype=complex)
        return scipy.sparse.coo_array((values, (self.rows, self.cols)), shape=self.split_form.shape)


@dataclass(frozen=True)
class VectorValuedFunction:
    """
    A map z -> C^N, optionally a vectorised m x n matrix function.

    Attributes:
        dim_N: Output length N
        evaluator: Callable returning a length-N vector
        matrix_shape: Optional (m, n) with m * n == N
        split: Optional split form the evaluator agrees with
        sparsity: ``dense``, ``fixed-pattern`` or ``variable-pattern``
        sparse_evaluator: Optional callable returning a scipy sparse m x n matrix
        real_valued: True when the function is real on its default grid and
            real probes are the natural choice
        name: Label used in logs and reports
    """

    dim_N: int
    evaluator: Callable[[complex], Any]
    matrix_shape: Optional[Tuple[int, int]] = None
    split: Optional[SplitForm] = None
    sparsity: str = 'dense'
    sparse_evaluator: Optional[Callable[[complex], Any]] = None
    real_valued: bool = False
    name: str = ''

    def __post_init__(self):
        if self.dim_N < 1:
            raise InvalidInputError(f"Output dimension must be positive, got {self.dim_N}")
        if self.matrix_shape is not None:
            m, n = self.matrix_shape
            if m * n != self.dim_N:
                raise InvalidInputError(
                    f"Matrix shape {self.matrix_shape} does not match dimension {self.dim_N}"
                )
        if self.sparsity not in SPARSITY_KINDS:
            raise InvalidInputError(f"Unknown sparsity flag '{self.sparsity}'")
        if self.sparsity != 'dense' and self.sparse_evaluator is None:
            raise InvalidInputError("Sparse functions must provide a sparse evaluator")

    @classmethod
    def from_split(cls, split_form: SplitForm, name: str = '', real_valued: bool = False,
                   sparse: Optional[bool] = None) -> "VectorValuedFunction":
        """Wrap a split form; sparse coefficients yield a fixed-pattern sparse evaluator."""
        if sparse is None:
            sparse = any(term.is_sparse for term in split_form.terms)

        def evaluator(z):
            return vectorize(eval_split(split_form, z))

        return cls(
            dim_N=split_form.dim,
            evaluator=evaluator,
            matrix_shape=split_form.shape,
            split=split_form,
            sparsity='fixed-pattern' if sparse else 'dense',
            sparse_evaluator=_PatternEvaluator(split_form) if sparse else None,
            real_valued=real_valued,
            name=name,
        )

    @classmethod
    def from_matrix_function(cls, function: Callable[[complex], Any], shape: Tuple[int, int],
                             name: str = '', real_valued: bool = False) -> "VectorValuedFunction":
        """Wrap a callable returning dense m x n matrices."""

        def evaluator(z):
            return vectorize(function(z))

        return cls(dim_N=shape[0] * shape[1], evaluator=evaluator, matrix_shape=tuple(shape),
                   real_valued=real_valued, name=name)

    def __call__(self, z: complex) -> np.ndarray:
        if self.sparse_evaluator is not None and self.sparsity != 'dense':
            value = vectorize(self.sparse_evaluator(z).toarray())
        else:
            value = np.asarray(self.evaluator(z), dtype=complex).ravel()
        if value.size != self.dim_N:
            raise InvalidInputError(
                f"Evaluator returned {value.size} entries at z={z!r}, expected {self.dim_N}"
            )
        return value.astype(complex, copy=False)

    def matrix(self, z: complex) -> np.ndarray:
        """Evaluate as an m x n matrix (requires matrix_shape)."""
        if self.matrix_shape is None:
            raise InvalidInputError(f"Function '{self.name}' has no matrix shape")
        return devectorize(self(z), self.matrix_shape)

    def sparse_matrix(self, z: complex):
        """Evaluate as a scipy sparse matrix (dense functions are converted)."""
        if self.sparse_evaluator is not None:
            return scipy.sparse.coo_array(self.sparse_evaluator(z))
        return scipy.sparse.coo_array(self.matrix(z))

    def nonzero_pattern(self, z: complex) -> Tuple[np.ndarray, np.ndarray]:
        """
        Structurally stored entries of vec(F(z)).

        Returns:
            Tuple (ascending column-major linear indices, values)
        """
        if self.sparse_evaluator is None:
            value = self(z)
            linear = np.flatnonzero(value)
            return linear, value[linear]
        coo = scipy.sparse.coo_array(self.sparse_evaluator(z))
        coo.sum_duplicates()
        m = coo.shape[0]
        linear = np.asarray(coo.col, dtype=np.int64) * m + np.asarray(coo.row, dtype=np.int64)
        order = np.argsort(linear, kind='stable')
        return linear[order], np.asarray(coo.data, dtype=complex)[order]

    def sample(self, points) -> np.ndarray:
        """
        Evaluate on many points.

        Returns:
            N x len(points) matrix, one column per point
        """
        z = np.asarray(points, dtype=complex).ravel()
        if self.split is not None:
            columns = self.split.coefficient_columns()
            scalars = self.split.scalar_values(z)
            result = columns @ scalars
            return np.asarray(result, dtype=complex)
        if z.size == 0:
            return np.zeros((self.dim_N, 0), dtype=complex)
        return np.column_stack([self(point) for point in z])


def barycentric_quotient(supports, weights, values, points) -> np.ndarray:
    """
    Evaluate a barycentric quotient for arbitrary (not necessarily unit) weights.

    Args:
        supports: Support points z_0..z_d
        weights: Weights w_0..w_d
        values: L x (d+1) matrix, column i holding the value at z_i
        points: Evaluation points

    Returns:
        L x len(points) matrix
    """
    supports = np.asarray(supports, dtype=complex)
    weights = np.asarray(weights, dtype=complex)
    values = np.asarray(values, dtype=complex)
    z = np.asarray(points, dtype=complex).ravel()

    differences = z[:, None] - supports[None, :]
    hit_rows, hit_cols = np.nonzero(differences == 0)
    differences[hit_rows, hit_cols] = 1.0
    cauchy = 1.0 / differences
    cauchy[hit_rows, hit_cols] = 0.0

    denominator = cauchy @ weights
    numerator = (cauchy * weights[None, :]) @ values.T

    hit_mask = np.zeros(z.size, dtype=bool)
    hit_mask[hit_rows] = True
    poles = (denominator == 0) & ~hit_mask
    if np.any(poles):
        raise PoleEvaluationError(complex(z[np.flatnonzero(poles)[0]]))

    safe_denominator = np.where(hit_mask, 1.0, denominator)
    result = numerator / safe_denominator[:, None]
    result[hit_rows, :] = values[:, hit_cols].T
    return result.T


@dataclass(frozen=True)
class BarycentricModel:
    """
    Rational function in barycentric form.

    values is an L x (d+1) matrix whose column i is the stored vector v_i,
    with L either the sketch size or the full output dimension.
    """

    supports: np.ndarray
    weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        supports = np.asarray(self.supports, dtype=complex).ravel()
        weights = np.asarray(self.weights, dtype=complex).ravel()
        values = np.asarray(self.values, dtype=complex)
        if values.ndim == 1:
            values = values.reshape(1, -1)
        if not (supports.size == weights.size == values.shape[1]) or supports.size == 0:
            raise InvalidInputError(
                f"Supports ({supports.size}), weights ({weights.size}) and values "
                f"({values.shape[1]}) must have equal non-zero length"
            )
        if np.unique(supports).size != supports.size:
            raise InvalidInputError("Support points must be pairwise distinct")
        if abs(np.linalg.norm(weights) - 1.0) > WEIGHT_NORM_TOL:
            raise InvalidInputError(
                f"Weights must have unit 2-norm, got {np.linalg.norm(weights):.3e}"
            )
        object.__setattr__(self, 'supports', _readonly(supports))
        object.__setattr__(self, 'weights', _readonly(weights))
        object.__setattr__(self, 'values', _readonly(values))

    @classmethod
    def create(cls, supports, weights, values) -> "BarycentricModel":
        """Build a model, normalising the weights to unit 2-norm."""
        weights = np.asarray(weights, dtype=complex)
        norm = np.linalg.norm(weights)
        if norm == 0:
            raise InvalidInputError("Weights must not all vanish")
        return cls(supports, weights / norm, values)

    @property
    def degree(self) -> int:
        return int(self.supports.size - 1)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def evaluate_many(self, points) -> np.ndarray:
        """Evaluate at many points; returns an L x len(points) matrix."""
        return barycentric_quotient(self.supports, self.weights, self.values, points)

    def __call__(self, z: complex) -> np.ndarray:
        return eval_barycentric(self, z)

    def lift(self, values) -> "BarycentricModel":
        """Same supports and weights with new stored values (L' x (d+1))."""
        return BarycentricModel(self.supports, self.weights, values)


def eval_barycentric(model: BarycentricModel, z: complex) -> np.ndarray:
    """
    Evaluate a barycentric model at a single point.

    Args:
        model: The barycentric model
        z: Evaluation point

    Returns:
        Length-L complex vector
    """
    z = complex(z)
    hits = np.flatnonzero(model.supports == z)
    if hits.size:
        return np.array(model.values[:, hits[0]])
    cauchy = model.weights / (z - model.supports)
    denominator = cauchy.sum()
    if denominator == 0:
        raise PoleEvaluationError(z)
    return (model.values @ cauchy) / denominator


def sigma_uniform_relerr(function: VectorValuedFunction, model: BarycentricModel, grid: TargetGrid,
                         norm: str = 'max', samples: Optional[np.ndarray] = None) -> float:
    """
    Relative uniform error of a full model over the target grid.

    Args:
        function: The function being approximated
        model: Model with full-dimensional values
        grid: Target grid
        norm: ``max`` (entrywise maximum) or ``fro`` (per-point Frobenius norm)
        samples: Optional precomputed N x |grid| samples of the function

    Returns:
        max_z ||F(z) - R(z)|| / max_z ||F(z)||
    """
    if norm not in NORM_KINDS:
        raise InvalidInputError(f"Unknown norm '{norm}', expected one of {NORM_KINDS}")
    if model.dim != function.dim_N:
        raise InvalidInputError(
            f"Model dimension {model.dim} does not match function dimension {function.dim_N}"
        )
    exact = function.sample(grid.points) if samples is None else np.asarray(samples)
    approx = model.evaluate_many(grid.points)
    difference = exact - approx
    if norm == 'max':
        numerator = float(np.max(np.abs(difference)))
        denominator = float(np.max(np.abs(exact)))
    else:
        numerator = float(np.max(np.linalg.norm(difference, axis=0)))
        denominator = float(np.max(np.linalg.norm(exact, axis=0)))
    if denominator == 0.0:
        raise ZeroFunctionError("Function vanishes on the whole target grid")
    return numerator / denominator


def model_from_zeros_poles(zeros: Sequence[complex], poles: Sequence[complex],
                           supports: Sequence[complex], scale: complex = 1.0) -> BarycentricModel:
    """
    Scalar barycentric model of scale * prod(z - a_k) / prod(z - p_k).

    With d+1 supports the representation is exact whenever both the number
    of zeros and the number of poles are at most d.

    Args:
        zeros: Zeros a_k
        poles: Poles p_k
        supports: Distinct support points (none of them a pole)
        scale: Leading constant

    Returns:
        Normalised BarycentricModel with one component
    """
    supports = np.asarray(supports, dtype=complex)
    zeros = np.asarray(zeros, dtype=complex)
    poles = np.asarray(poles, dtype=complex)
    d = supports.size - 1
    if zeros.size > d or poles.size > d:
        raise InvalidInputError(
            f"Degree {d} model cannot hold {zeros.size} zeros and {poles.size} poles"
        )
    numerator = scale * np.prod(supports[:, None] - zeros[None, :], axis=1)
    denominator = np.prod(supports[:, None] - poles[None, :], axis=1)
    if np.any(denominator == 0):
        raise InvalidInputError("A support point coincides with a pole")
    node_products = np.array([
        np.prod(np.delete(supports[i] - supports, i)) for i in range(supports.size)
    ])
    weights = denominator / node_products
    return BarycentricModel.create(supports, weights, (numerator / denominator).reshape(1, -1))
