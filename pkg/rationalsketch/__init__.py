"""Rational Sketch - Sketched set-valued AAA approximation of large matrix-valued functions."""

__version__ = "1.0.0"
__all__ = [
    'kernel',
    'model',
    'aaa',
    'sketch',
    'analysis',
    'linearize',
    'expression',
    'problems',
    'config',
    'report',
]
