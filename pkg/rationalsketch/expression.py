#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         expression
# Purpose:      Parser and evaluator for scalar functions of z used in
#               problem files
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

"""
Scalar expressions in one complex variable ``z``.

Grammar (binding power in brackets)::

    expr   := expr ('+' | '-') expr          [10, left]
            | expr ('*' | '/') expr          [20, left]
            | '-' expr                       [25, prefix]
            | expr '^' expr                  [30, right]
            | NUMBER | 'z' | 'pi' | 'i'
            | NAME '(' expr ')'
            | '(' expr ')'

Numbers accept an ``i`` or ``j`` suffix for imaginary literals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Union

import numpy as np

CONSTANTS: Dict[str, complex] = {'pi': complex(np.pi), 'i': 1j}
VARIABLE = 'z'

FUNCTIONS: Dict[str, Callable] = {
    'exp': np.exp,
    'sin': np.sin,
    'cos': np.cos,
    'tan': np.tan,
    'sinh': np.sinh,
    'cosh': np.cosh,
    'sqrt': np.sqrt,
    'log': np.log,
    'abs': np.abs,
    'conj': np.conj,
    're': np.real,
    'im': np.imag,
}

BINARY_POWER = {'+': 10, '-': 10, '*': 20, '/': 20, '^': 30}
UNARY_POWER = 25
ATOM_POWER = 100

TOKEN_PATTERN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?[ij]?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


class ExpressionSyntaxError(ValueError):
    """Raised for malformed expressions; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode('utf-8', errors='surrogatepass'))


def tokenize(text: str) -> Iterator[Token]:
    """Split text into tokens, ending with an ``end`` token; offsets count UTF-8 bytes."""
    position = 0
    while True:
        while position < len(text) and text[position].isspace():
            position += 1
        if position >= len(text):
            break
        match = TOKEN_PATTERN.match(text, position)
        if match is None or match.lastgroup is None:
            raise ExpressionSyntaxError(f"Unexpected character {text[position]!r}",
                                        _byte_offset(text, position))
        start = match.start(match.lastgroup)
        yield Token(match.lastgroup, match.group(match.lastgroup), _byte_offset(text, start))
        position = match.end()
    yield Token('end', '', _byte_offset(text, len(text)))


# Syntax tree -----------------------------------------------------------------

def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


@dataclass(frozen=True)
class Number:
    value: complex
    power: int = ATOM_POWER

    def evaluate(self, z):
        return np.full(np.shape(z), self.value, dtype=complex)

    def to_text(self) -> str:
        if self.value.imag == 0:
            return _format_number(self.value.real)
        return _format_number(self.value.imag) + 'i'


@dataclass(frozen=True)
class Constant:
    name: str
    power: int = ATOM_POWER

    def evaluate(self, z):
        return np.full(np.shape(z), CONSTANTS[self.name], dtype=complex)

    def to_text(self) -> str:
        return self.name


@dataclass(frozen=True)
class Variable:
    power: int = ATOM_POWER

    def evaluate(self, z):
        return np.asarray(z, dtype=complex)

    def to_text(self) -> str:
        return VARIABLE


@dataclass(frozen=True)
class Negate:
    operand: "Node"
    power: int = UNARY_POWER

    def evaluate(self, z):
        return -self.operand.evaluate(z)

    def to_text(self) -> str:
        inner = self.operand.to_text()
        if self.operand.power < UNARY_POWER:
            inner = f"({inner})"
        return f"-{inner}"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"

    @property
    def power(self) -> int:
        return BINARY_POWER[self.op]

    def evaluate(self, z):
        left = self.left.evaluate(z)
        right = self.right.evaluate(z)
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            if self.op == '+':
                return left + right
            if self.op == '-':
                return left - right
            if self.op == '*':
                return left * right
            if self.op == '/':
                return left / right
            return np.power(left, right)

    def to_text(self) -> str:
        left = self.left.to_text()
        right = self.right.to_text()
        if self.op == '^':
            if self.left.power <= self.power:
                left = f"({left})"
            if self.right.power < self.power:
                right = f"({right})"
        else:
            if self.left.power < self.power:
                left = f"({left})"
            if self.right.power <= self.power:
                right = f"({right})"
        return f"{left}{self.op}{right}"


@dataclass(frozen=True)
class Call:
    name: str
    argument: "Node"
    power: int = ATOM_POWER

    def evaluate(self, z):
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            return np.asarray(FUNCTIONS[self.name](self.argument.evaluate(z)), dtype=complex)

    def to_text(self) -> str:
        return f"{self.name}({self.argument.to_text()})"


Node = Union[Number, Constant, Variable, Negate, Binary, Call]


# Parser ----------------------------------------------------------------------

class _Parser:
    """Pratt parser over the token stream."""

    def __init__(self, text: str):
        self.tokens: List[Token] = list(tokenize(text))
        self.position = 0

    @property
    def token(self) -> Token:
        return self.tokens[self.position]

    def advance(self) -> Token:
        token = self.token
        self.position += 1
        return token

    def expect(self, text: str):
        if self.token.text != text or self.token.kind == 'end':
            found = 'end of input' if self.token.kind == 'end' else repr(self.token.text)
            raise ExpressionSyntaxError(f"Expected {text!r}, found {found}", self.token.offset)
        self.advance()

    def left_power(self, token: Token) -> int:
        if token.kind == 'op' and token.text in BINARY_POWER:
            return BINARY_POWER[token.text]
        return 0

    def expression(self, right_power: int = 0) -> Node:
        left = self.prefix(self.advance())
        while right_power < self.left_power(self.token):
            op = self.advance().text
            # ^ is right associative
            next_power = BINARY_POWER[op] - 1 if op == '^' else BINARY_POWER[op]
            left = Binary(op, left, self.expression(next_power))
        return left

    def prefix(self, token: Token) -> Node:
        if token.kind == 'number':
            text = token.text
            if text[-1] in 'ij':
                return Number(complex(0.0, float(text[:-1])))
            return Number(complex(float(text)))
        if token.kind == 'name':
            return self.name(token)
        if token.kind == 'op' and token.text == '-':
            return Negate(self.expression(UNARY_POWER))
        if token.kind == 'op' and token.text == '(':
            inner = self.expression()
            self.expect(')')
            return inner
        if token.kind == 'end':
            raise ExpressionSyntaxError("Unexpected end of input", token.offset)
        raise ExpressionSyntaxError(f"Unexpected {token.text!r}", token.offset)

    def name(self, token: Token) -> Node:
        if token.text == VARIABLE:
            return Variable()
        if token.text in CONSTANTS:
            return Constant(token.text)
        if token.text in FUNCTIONS:
            if self.token.text != '(':
                raise ExpressionSyntaxError(f"Function '{token.text}' needs an argument list", self.token.offset)
            self.advance()
            if self.token.text == ')':
                raise ExpressionSyntaxError(f"Function '{token.text}' expects one argument", self.token.offset)
            argument = self.expression()
            if self.token.text == ',':
                raise ExpressionSyntaxError(f"Function '{token.text}' expects one argument", self.token.offset)
            self.expect(')')
            return Call(token.text, argument)
        raise ExpressionSyntaxError(f"Unknown identifier '{token.text}'", token.offset)

    def parse(self) -> Node:
        root = self.expression()
        if self.token.kind != 'end':
            raise ExpressionSyntaxError(f"Unexpected {self.token.text!r}", self.token.offset)
        return root


@dataclass(frozen=True)
class Expression:
    """A parsed scalar expression; calling it evaluates at scalars or arrays."""

    root: Node
    source: str = ''

    def __call__(self, z):
        values = self.root.evaluate(np.asarray(z, dtype=complex))
        if np.ndim(z) == 0:
            return complex(values)
        return np.broadcast_to(values, np.shape(z)).astype(complex)

    def to_text(self) -> str:
        return self.root.to_text()

    def __str__(self) -> str:
        return self.to_text()


def parse_expression(text: str) -> Expression:
    """
    Parse text into an Expression.

    Raises:
        ExpressionSyntaxError: with the offset of the offending token
    """
    if not isinstance(text, str):
        raise ExpressionSyntaxError("Expression must be a string", 0)
    return Expression(_Parser(text).parse(), text)


def format_expression(expression: Union[Expression, str]) -> str:
    """Canonical text of an expression with minimal parentheses."""
    if isinstance(expression, str):
        expression = parse_expression(expression)
    return expression.to_text()
