#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         problems
# Purpose:      Target-grid generation, built-in test problems and JSON
#               problem files
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse

from rationalsketch.expression import ExpressionSyntaxError, parse_expression
from rationalsketch.kernel import InvalidInputError, SeededStream, gaussian_real
from rationalsketch.model import (
    BarycentricModel,
    DomainSpec,
    SplitForm,
    TargetGrid,
    VectorValuedFunction,
    model_from_zeros_poles,
)

LOGGER = logging.getLogger(__name__)

BUILTIN_PREFIX = 'builtin:'
LATTICE_SHRINK = 0.95

RATIONAL_TOY_POLES = (1.6, -1.8, 0.3 + 1.4j, 0.3 - 1.4j, 2.5)
RATIONAL_TOY_ZEROS = (-0.9, -0.45, 0.0, 0.45, 0.9)


class ProblemFileError(ValueError):
    """Raised for malformed problem files; cites the line or field at fault."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        suffix = f" ({', '.join(location)})" if location else ''
        super().__init__(f"{message}{suffix}")


class UnknownProblemError(KeyError):
    """Raised when a built-in problem name is not registered."""


@dataclass(frozen=True)
class GridSpec:
    """Point counts and seed for make_grid."""

    n_interior: int
    n_boundary: int = 0
    seed: int = 0


@dataclass(frozen=True)
class Problem:
    """A function together with the domain and grid it is approximated on."""

    name: str
    function: VectorValuedFunction
    domain: DomainSpec
    grid_spec: GridSpec
    metadata: Dict[str, Any] = field(default_factory=dict)

    def grid(self) -> TargetGrid:
        return make_grid(self.domain, self.grid_spec.n_interior, self.grid_spec.n_boundary,
                         self.grid_spec.seed)


# Grids -----------------------------------------------------------------------

def _interior_lattice(domain: DomainSpec, count: int) -> Tuple[np.ndarray, float]:
    """At least ``count`` lattice points strictly inside the domain, and their spacing."""
    area = math.pi * domain.radius ** 2
    if domain.kind == 'halfdisc':
        area /= 2.0
    spacing = math.sqrt(area / count)
    while True:
        steps = int(math.ceil(domain.radius / spacing))
        axis = np.arange(-steps, steps + 1) * spacing
        offsets = (axis[None, :] + 1j * axis[:, None]).ravel()
        keep = np.abs(offsets) <= domain.radius - spacing / 4.0
        if domain.kind == 'halfdisc':
            keep &= offsets.imag >= spacing / 4.0
        offsets = offsets[keep]
        if offsets.size >= count:
            return offsets, spacing
        spacing *= LATTICE_SHRINK


def _boundary_points(domain: DomainSpec, count: int) -> np.ndarray:
    if count == 0:
        return np.empty(0, dtype=complex)
    if domain.kind == 'disc':
        angles = 2.0 * np.pi * np.arange(count) / count
        return domain.center + domain.radius * np.exp(1j * angles)
    n_arc = int(round(count * math.pi / (math.pi + 2.0)))
    n_arc = min(max(n_arc, 1), count)
    n_diameter = count - n_arc
    if n_arc == 1:
        angles = np.array([np.pi / 2.0])
    else:
        angles = np.pi * np.arange(n_arc) / (n_arc - 1)
    arc = domain.radius * np.exp(1j * angles)
    arc = arc.real + 1j * np.abs(arc.imag)
    diameter = -domain.radius + 2.0 * domain.radius * np.arange(1, n_diameter + 1) / (n_diameter + 1)
    return domain.center + np.concatenate([arc, diameter.astype(complex)])


def make_grid(domain: DomainSpec, n_interior: int, n_boundary: int = 0, seed: int = 0) -> TargetGrid:
    """
    Build the target grid of a domain.

    Intervals get ``n_interior`` equidistant points including the endpoints.
    Discs and half discs get ``n_interior`` points of a regular lattice, each
    perturbed uniformly within a square of half the lattice spacing, plus
    ``n_boundary`` equiangular points on the circle (half discs split them
    between the arc and the diameter in proportion to their lengths).

    Args:
        domain: Disc, half disc or interval
        n_interior: Interior (or interval) point count
        n_boundary: Boundary point count; must be 0 for intervals
        seed: Perturbation seed

    Returns:
        TargetGrid with interior points first
    """
    if n_interior < 0 or n_boundary < 0:
        raise InvalidInputError("Point counts must be non-negative")
    if n_interior + n_boundary == 0:
        raise InvalidInputError("Grid must contain at least one point")
    if domain.kind == 'explicit':
        raise InvalidInputError("Explicit domains take their points from the caller")

    if domain.kind == 'interval':
        if n_boundary:
            raise InvalidInputError("Interval grids have no separate boundary points")
        a, b = (complex(e) for e in domain.endpoints)
        points = a + np.linspace(0.0, 1.0, n_interior) * (b - a)
        return TargetGrid(points, domain)

    interior = np.empty(0, dtype=complex)
    if n_interior:
        offsets, spacing = _interior_lattice(domain, n_interior)
        order = np.argsort(np.abs(offsets), kind='stable')
        offsets = offsets[order[:n_interior]]
        stream = SeededStream(seed)
        shifts = stream.uniform(2 * n_interior, -spacing / 4.0, spacing / 4.0)
        perturbed = offsets + shifts[0::2] + 1j * shifts[1::2]
        inside = np.abs(perturbed) < domain.radius
        if domain.kind == 'halfdisc':
            inside &= perturbed.imag > 0
        interior = domain.center + np.where(inside, perturbed, offsets)
        LOGGER.debug("Lattice spacing %.4f, %d point(s) kept unperturbed", spacing,
                     int(np.count_nonzero(~inside)))

    points = np.concatenate([interior, _boundary_points(domain, n_boundary)])
    return TargetGrid(points, domain)


# Built-in problems -----------------------------------------------------------

def _one(z):
    return np.ones(np.shape(z), dtype=complex)


def _identity(z):
    return np.asarray(z, dtype=complex)


def _sin_pi(z):
    return np.sin(np.pi * np.asarray(z, dtype=complex))


def _exp_minus(z):
    return np.exp(-np.asarray(z, dtype=complex))


def _gaussian_matrix(stream: SeededStream, shape: Tuple[int, int]) -> np.ndarray:
    return gaussian_real(stream, shape[0] * shape[1]).reshape(shape, order='F')


def _unit_spectral(matrix: np.ndarray) -> np.ndarray:
    return matrix / np.linalg.norm(matrix, 2)


def _size(size: Optional[int], default: int) -> int:
    size = default if size is None else int(size)
    if size < 1:
        raise InvalidInputError(f"Problem size must be positive, got {size}")
    return size


def artificial(size: Optional[int] = None, seed: int = 0) -> Problem:
    """|z| * 1e-8 * B + sin(pi z) * C on [-1, 1] with unit spectral norm B and C."""
    n = _size(size, 10)
    stream = SeededStream(seed)
    b_matrix = _unit_spectral(_gaussian_matrix(stream, (n, n)))
    c_matrix = _unit_spectral(_gaussian_matrix(stream, (n, n)))
    split = SplitForm.from_pairs([(np.abs, 1e-8 * b_matrix), (_sin_pi, c_matrix)])
    function = VectorValuedFunction.from_split(split, name='artificial', real_valued=True)
    return Problem('artificial', function, DomainSpec.interval(-1.0, 1.0), GridSpec(100, 0, seed),
                   {'B': b_matrix, 'C': c_matrix})


def _banded_sparse(stream: SeededStream, n: int, offsets: Tuple[int, ...]) -> scipy.sparse.csr_array:
    diagonals = [gaussian_real(stream, n - abs(offset)) / math.sqrt(len(offsets)) for offset in offsets]
    return scipy.sparse.csr_array(scipy.sparse.diags(diagonals, offsets, shape=(n, n)))


def delay(size: Optional[int] = None, seed: int = 0) -> Problem:
    """-zI + A0 + A1 exp(-z) with seeded sparse banded A0 and A1 on the disc |z| <= 3."""
    n = _size(size, 8)
    stream = SeededStream(seed)
    a0 = _banded_sparse(stream, n, (0, 1))
    a1 = _banded_sparse(stream, n, (-1, 0))
    minus_identity = scipy.sparse.csr_array(-scipy.sparse.identity(n))
    split = SplitForm.from_pairs([(_one, a0), (_identity, minus_identity), (_exp_minus, a1)])
    function = VectorValuedFunction.from_split(split, name='delay')
    return Problem('delay', function, DomainSpec.disc(0j, 3.0), GridSpec(300, 100, seed),
                   {'A0': a0, 'A1': a1})


def _rational_toy_coefficients(n: int, seed: int) -> List[np.ndarray]:
    if n == 1:
        coefficients = np.poly(RATIONAL_TOY_ZEROS)[::-1]
        return [np.array([[c]], dtype=float) for c in coefficients]
    stream = SeededStream(seed)
    return [_gaussian_matrix(stream, (n, n)) for _ in range(len(RATIONAL_TOY_POLES) + 1)]


def _toy_denominator(z):
    z = np.asarray(z, dtype=complex)
    result = np.ones(z.shape, dtype=complex)
    for pole in RATIONAL_TOY_POLES:
        result = result * (z - pole)
    return result


def _toy_term(power: int) -> Callable:
    def term(z):
        z = np.asarray(z, dtype=complex)
        return z ** power / _toy_denominator(z)
    term.__name__ = f"z^{power}/q(z)"
    return term


def rational_toy(size: Optional[int] = None, seed: int = 0) -> Problem:
    """
    Degree-5 rational matrix function P(z) / q(z) with fixed poles off [-1, 1].

    The scalar case (size 1) is the polynomial with zeros -0.9, -0.45, 0, 0.45,
    0.9 divided by q; larger sizes use seeded Gaussian coefficients.
    """
    n = _size(size, 1)
    coefficients = _rational_toy_coefficients(n, seed)
    split = SplitForm.from_pairs([(_toy_term(k), c) for k, c in enumerate(coefficients)])
    function = VectorValuedFunction.from_split(split, name='rational_toy')
    return Problem('rational_toy', function, DomainSpec.interval(-1.0, 1.0), GridSpec(100, 0, seed),
                   {'poles': list(RATIONAL_TOY_POLES), 'coefficients': coefficients})


def rational_toy_model(size: Optional[int] = None, seed: int = 0,
                       supports: Optional[np.ndarray] = None) -> BarycentricModel:
    """The barycentric model that generates rational_toy (exact at 6 supports)."""
    problem = rational_toy(size, seed)
    supports = np.linspace(-1.0, 1.0, 6) if supports is None else np.asarray(supports, dtype=complex)
    scalar = model_from_zeros_poles([], RATIONAL_TOY_POLES, supports)
    return scalar.lift(problem.function.sample(supports))


def lowrank_residual(size: Optional[int] = None, seed: int = 0) -> Problem:
    """exp(z) A1 + A2 / (z - 2) on the unit disc; residuals have small stable rank."""
    n = _size(size, 6)
    stream = SeededStream(seed)
    a1 = _unit_spectral(_gaussian_matrix(stream, (n, n)))
    a2 = _unit_spectral(_gaussian_matrix(stream, (n, n)))
    split = SplitForm.from_pairs([
        (np.exp, a1),
        (lambda z: 1.0 / (np.asarray(z, dtype=complex) - 2.0), a2),
    ])
    function = VectorValuedFunction.from_split(split, name='lowrank_residual')
    return Problem('lowrank_residual', function, DomainSpec.disc(0j, 1.0), GridSpec(300, 100, seed))


def synthetic_split(size: Optional[int] = None, seed: int = 0) -> Problem:
    """A0 + exp(z) A1 + A2 / (z - 3) with dense n x n coefficients (N = n^2, default 10^4)."""
    n = _size(size, 100)
    stream = SeededStream(seed)
    matrices = [_unit_spectral(_gaussian_matrix(stream, (n, n))) for _ in range(3)]
    split = SplitForm.from_pairs([
        (_one, matrices[0]),
        (np.exp, matrices[1]),
        (lambda z: 1.0 / (np.asarray(z, dtype=complex) - 3.0), matrices[2]),
    ])
    function = VectorValuedFunction.from_split(split, name='synthetic_split')
    return Problem('synthetic_split', function, DomainSpec.disc(0j, 1.0), GridSpec(300, 100, seed))


BUILTINS: Dict[str, Callable[..., Problem]] = {
    'artificial': artificial,
    'delay': delay,
    'rational_toy': rational_toy,
    'lowrank_residual': lowrank_residual,
    'synthetic_split': synthetic_split,
}


def builtin_problem(name: str, size: Optional[int] = None, seed: int = 0) -> Problem:
    """Look up and instantiate a built-in problem."""
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise UnknownProblemError(
            f"Unknown built-in problem '{name}'; available: {', '.join(sorted(BUILTINS))}"
        ) from None
    return factory(size, seed)


def builtin(name: str, size: Optional[int] = None, seed: int = 0) -> Tuple[VectorValuedFunction, DomainSpec]:
    """The function and default domain of a built-in problem."""
    problem = builtin_problem(name, size, seed)
    return problem.function, problem.domain


# Problem files ---------------------------------------------------------------

def _require(mapping: Any, key: str, path: str) -> Any:
    if not isinstance(mapping, dict):
        raise ProblemFileError("Expected an object", field=path or None)
    if key not in mapping:
        raise ProblemFileError("Missing required field", field=f"{path}.{key}" if path else key)
    return mapping[key]


def _complex_value(value: Any, path: str) -> complex:
    if isinstance(value, bool):
        raise ProblemFileError("Expected a number", field=path)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(part, (int, float)) and not isinstance(part, bool) for part in value):
        return complex(value[0], value[1])
    raise ProblemFileError("Expected a number or a [re, im] pair", field=path)


def _positive_int(value: Any, path: str, allow_zero: bool = False) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0 or (value == 0 and not allow_zero):
        raise ProblemFileError("Expected a positive integer" if not allow_zero
                               else "Expected a non-negative integer", field=path)
    return value


def _parse_coefficient(spec: Any, shape: Tuple[int, int], path: str):
    fmt = _require(spec, 'format', path)
    m, n = shape
    if fmt == 'dense':
        rows = _require(spec, 'rows', path)
        if not isinstance(rows, list) or len(rows) != m:
            raise ProblemFileError(f"Expected {m} rows", field=f"{path}.rows")
        matrix = np.zeros(shape, dtype=complex)
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != n:
                raise ProblemFileError(f"Expected {n} entries", field=f"{path}.rows[{i}]")
            for j, value in enumerate(row):
                matrix[i, j] = _complex_value(value, f"{path}.rows[{i}][{j}]")
        return matrix
    if fmt == 'coo':
        entries = _require(spec, 'entries', path)
        if not isinstance(entries, list):
            raise ProblemFileError("Expected a list of [row, col, re, im] entries", field=f"{path}.entries")
        rows, cols, data = [], [], []
        for k, entry in enumerate(entries):
            where = f"{path}.entries[{k}]"
            if not isinstance(entry, list) or len(entry) != 4:
                raise ProblemFileError("Expected [row, col, re, im]", field=where)
            row, col = entry[0], entry[1]
            if isinstance(row, bool) or isinstance(col, bool) or not isinstance(row, int) \
                    or not isinstance(col, int) or not (0 <= row < m and 0 <= col < n):
                raise ProblemFileError(f"Index out of range for shape {shape}", field=where)
            rows.append(row)
            cols.append(col)
            data.append(_complex_value(entry[2:], where))
        return scipy.sparse.csr_array(
            scipy.sparse.coo_array((np.asarray(data, dtype=complex), (rows, cols)), shape=shape)
        )
    raise ProblemFileError(f"Unknown coefficient format '{fmt}'", field=f"{path}.format")


def _parse_domain(spec: Any) -> DomainSpec:
    kind = _require(spec, 'kind', 'domain')
    try:
        if kind in ('disc', 'halfdisc'):
            center = _complex_value(spec.get('center', [0.0, 0.0]), 'domain.center')
            radius = _require(spec, 'radius', 'domain')
            if isinstance(radius, bool) or not isinstance(radius, (int, float)):
                raise ProblemFileError("Expected a number", field='domain.radius')
            return DomainSpec(kind, center=center, radius=float(radius))
        if kind == 'interval':
            endpoints = _require(spec, 'endpoints', 'domain')
            if not isinstance(endpoints, list) or len(endpoints) != 2:
                raise ProblemFileError("Expected two endpoints", field='domain.endpoints')
            a = _complex_value(endpoints[0], 'domain.endpoints[0]')
            b = _complex_value(endpoints[1], 'domain.endpoints[1]')
            return DomainSpec.interval(a, b)
    except InvalidInputError as exc:
        raise ProblemFileError(str(exc), field='domain') from exc
    raise ProblemFileError(f"Unknown domain kind '{kind}'", field='domain.kind')


def parse_problem(document: Dict[str, Any]) -> Problem:
    """
    Build a Problem from a decoded problem-file document.

    Raises:
        ProblemFileError: citing the offending field
    """
    if not isinstance(document, dict):
        raise ProblemFileError("Problem file must contain a JSON object", line=1)
    name = _require(document, 'name', '')
    if not isinstance(name, str):
        raise ProblemFileError("Expected a string", field='name')
    shape = _require(document, 'shape', '')
    if not isinstance(shape, list) or len(shape) != 2:
        raise ProblemFileError("Expected [m, n]", field='shape')
    shape = (_positive_int(shape[0], 'shape[0]'), _positive_int(shape[1], 'shape[1]'))

    terms = _require(document, 'terms', '')
    if not isinstance(terms, list):
        raise ProblemFileError("Expected a list of terms", field='terms')
    pairs = []
    for index, term in enumerate(terms):
        path = f"terms[{index}]"
        text = _require(term, 'f', path)
        if not isinstance(text, str):
            raise ProblemFileError("Expected an expression string", field=f"{path}.f")
        try:
            expression = parse_expression(text)
        except ExpressionSyntaxError as exc:
            raise ProblemFileError(str(exc), field=f"{path}.f") from exc
        coefficient = _parse_coefficient(_require(term, 'A', path), shape, f"{path}.A")
        pairs.append((expression, coefficient))

    domain = _parse_domain(_require(document, 'domain', ''))
    grid = document.get('grid', {})
    if not isinstance(grid, dict):
        raise ProblemFileError("Expected an object", field='grid')
    grid_spec = GridSpec(
        n_interior=_positive_int(grid.get('interior', 100), 'grid.interior', allow_zero=True),
        n_boundary=_positive_int(grid.get('boundary', 0), 'grid.boundary', allow_zero=True),
        seed=_positive_int(grid.get('seed', 0), 'grid.seed', allow_zero=True),
    )
    split = SplitForm.from_pairs(pairs, shape=shape)
    function = VectorValuedFunction.from_split(split, name=name)
    return Problem(name, function, domain, grid_spec, {'source': 'file'})


def load_problem(spec: str, size: Optional[int] = None, seed: int = 0) -> Problem:
    """
    Resolve ``builtin:<name>`` or a path to a JSON problem file.

    Args:
        spec: Problem reference
        size: Size override for built-in problems
        seed: Seed for built-in problems

    Returns:
        Problem
    """
    if spec.startswith(BUILTIN_PREFIX):
        return builtin_problem(spec[len(BUILTIN_PREFIX):], size, seed)
    path = Path(spec)
    if not path.exists():
        raise ProblemFileError(f"Problem file not found: {spec}")
    text = path.read_text(encoding='utf-8')
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"Invalid JSON: {exc.msg}", line=exc.lineno) from exc
    problem = parse_problem(document)
    LOGGER.info("Loaded problem '%s' from %s", problem.name, path)
    return problem
