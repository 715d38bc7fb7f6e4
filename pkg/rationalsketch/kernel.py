#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         kernel
# Purpose:      Dense numerical primitives shared by the approximation modules
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

"""Seeded Gaussian streams, extremal singular vectors, QZ eigenvalues and gamma."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.special

LOGGER = logging.getLogger(__name__)

UINT64_LIMIT = 2 ** 64

# Relative size of the beta component below which an eigenvalue is infinite.
INFINITE_EIGENVALUE_TOL = 1e-14


class InvalidInputError(ValueError):
    """Raised when a numerical primitive receives malformed or non-finite input."""


def derive_seed(seed: int, index: int) -> int:
    """
    Derive an independent 64-bit child seed from a parent seed and an index.

    Args:
        seed: Parent seed (0 <= seed < 2**64)
        index: Non-negative child index

    Returns:
        Child seed usable by SeededStream
    """
    if index < 0:
        raise InvalidInputError(f"Substream index must be non-negative, got {index}")
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


@dataclass
class SeededStream:
    """
    Counter-tracked stream of Gaussian draws backed by the Philox generator.

    Philox is counter based, so two streams with the same seed replay the same
    sequence bit for bit. The stream is single-owner; hand independent
    streams to concurrent tasks via ``substream``.
    """

    seed: int
    counter: int = 0
    _generator: np.random.Generator = field(init=False, repr=False, compare=False)
    _uniform_generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) < UINT64_LIMIT:
            raise InvalidInputError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.counter < 0:
            raise InvalidInputError("Stream counter must be non-negative")
        self.seed = int(self.seed)
        self._generator = np.random.Generator(np.random.Philox(key=self.seed))
        self._uniform_generator = np.random.Generator(np.random.Philox(key=derive_seed(self.seed, 0)))
        replay = self.counter
        self.counter = 0
        if replay:
            self.standard_normal(replay)

    def standard_normal(self, count: int) -> np.ndarray:
        """Draw ``count`` standard normal values and advance the counter."""
        if count < 0:
            raise InvalidInputError(f"Draw count must be non-negative, got {count}")
        draws = self._generator.standard_normal(int(count))
        self.counter += int(count)
        return draws

    def uniform(self, count: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """Draw uniform values from a dedicated child stream of this seed."""
        # Does not advance the Gaussian counter.
        return self._uniform_generator.uniform(low, high, size=int(count))

    def substream(self, index: int) -> "SeededStream":
        """Return a fresh stream whose seed is derived from this seed and ``index``."""
        return SeededStream(derive_seed(self.seed, index + 1))


def gaussian_real(stream: SeededStream, count: int) -> np.ndarray:
    """I.i.d. standard normal real vector of length ``count``."""
    return stream.standard_normal(count)


def gaussian_complex(stream: SeededStream, count: int) -> np.ndarray:
    """
    I.i.d. complex Gaussian vector with E|entry|^2 = 2.

    Each entry consumes two consecutive draws (real part first).
    """
    draws = stream.standard_normal(2 * count)
    return draws[0::2] + 1j * draws[1::2]


def _as_finite_matrix(matrix, name: str = "matrix") -> np.ndarray:
    array = np.asarray(matrix)
    if array.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return array


def reduce_tall(blocks: Iterable[np.ndarray]) -> Optional[np.ndarray]:
    """
    Accumulate the triangular QR factor of a row-stacked matrix block by block.

    The returned R has the same singular values and right singular vectors
    as the stacked matrix, without ever holding the full stack in memory.

    Args:
        blocks: Iterable of row blocks sharing the same column count

    Returns:
        Upper triangular factor, or None if no rows were supplied
    """
    r_factor: Optional[np.ndarray] = None
    for block in blocks:
        block = np.asarray(block)
        if block.shape[0] == 0:
            continue
        stacked = block if r_factor is None else np.vstack([r_factor, block])
        r_factor = np.linalg.qr(stacked, mode='r')
    return r_factor


def smallest_right_singular_vector(matrix) -> Tuple[np.ndarray, float]:
    """
    Unit vector minimising ||M w||_2 and the corresponding singular value.

    Args:
        matrix: Complex matrix with at least as many rows as columns

    Returns:
        Tuple (w, sigma_min)
    """
    m_matrix = _as_finite_matrix(matrix, "Singular value input")
    rows, cols = m_matrix.shape
    if cols == 0:
        raise InvalidInputError("Matrix must have at least one column")
    if rows < cols:
        raise InvalidInputError(
            f"Matrix must have at least as many rows as columns, got {rows}x{cols}"
        )
    if rows > 2 * cols:
        m_matrix = np.linalg.qr(m_matrix, mode='r')
    _, sigma, vh = scipy.linalg.svd(m_matrix, check_finite=False)
    weights = vh[-1, :].conj()
    return weights, float(sigma[cols - 1])


def generalized_eigenvalues(a_matrix, b_matrix) -> np.ndarray:
    """
    Finite eigenvalues of the pencil A - lambda B via the QZ algorithm.

    An eigenvalue is classified infinite when the beta part of its normalised
    homogeneous pair, measured relative to ||B||, is below 1e-14.

    Args:
        a_matrix: Square complex matrix A
        b_matrix: Square complex matrix B of the same size

    Returns:
        Array of finite eigenvalues (with multiplicity)
    """
    a_arr = _as_finite_matrix(a_matrix, "A")
    b_arr = _as_finite_matrix(b_matrix, "B")
    if a_arr.shape[0] != a_arr.shape[1] or a_arr.shape != b_arr.shape:
        raise InvalidInputError(
            f"Pencil matrices must be square and equal in size, got {a_arr.shape} and {b_arr.shape}"
        )
    if a_arr.shape[0] == 0:
        return np.empty(0, dtype=complex)

    norm_b = np.linalg.norm(b_arr)
    if norm_b == 0.0:
        return np.empty(0, dtype=complex)
    norm_a = np.linalg.norm(a_arr) or 1.0

    alpha, beta = scipy.linalg.eig(
        a_arr, b_arr, right=False, homogeneous_eigvals=True, check_finite=False
    )
    alpha_scaled = np.abs(alpha) / norm_a
    beta_scaled = np.abs(beta) / norm_b
    pair_norm = np.hypot(alpha_scaled, beta_scaled)
    finite = (pair_norm > 0) & (beta_scaled > INFINITE_EIGENVALUE_TOL * pair_norm)
    dropped = int(np.count_nonzero(~finite))
    if dropped:
        LOGGER.debug("Dropped %d infinite or indeterminate eigenvalue(s)", dropped)
    return alpha[finite] / beta[finite]


def regularized_lower_gamma(s: float, x: float) -> float:
    """
    Regularized lower incomplete gamma function gamma(s, x) / Gamma(s).

    Args:
        s: Shape parameter, s > 0
        x: Upper integration limit, x >= 0

    Returns:
        Value in [0, 1]
    """
    if not np.isfinite(s) or s <= 0:
        raise InvalidInputError(f"Gamma shape must be positive, got {s}")
    if np.isnan(x) or x < 0:
        raise InvalidInputError(f"Gamma argument must be non-negative, got {x}")
    return float(scipy.special.gammainc(s, x))
