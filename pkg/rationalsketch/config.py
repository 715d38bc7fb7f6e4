#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Environment-driven defaults for command-line runs."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Callable, Optional, TypeVar

__all__ = [
    "RunSettings",
]

LOGGER = logging.getLogger(__name__)

LOG_LEVELS = {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"}

T = TypeVar("T")


def _env_value(name: str, parse: Callable[[str], T], accept: Callable[[T], bool], default: T,
               requirement: str) -> T:
    """Parsed value of an environment variable, or ``default`` when it is unset or rejected."""
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = parse(raw.strip())
    except ValueError:
        value = None
    if value is None or not accept(value):
        LOGGER.warning("Ignoring %s=%r (expected %s); using %r", name, raw, requirement, default)
        return default
    return value


def _log_level(raw: str) -> Optional[str]:
    level = raw.upper()
    return level if level in LOG_LEVELS else None


@dataclass
class RunSettings:
    """Defaults that the command line falls back to when a flag is omitted."""

    threads: int = 1
    log_level: str = "WARNING"
    default_reltol: float = 1e-8
    default_dmax: int = 100
    output_dir: str = "./reports"

    @classmethod
    def from_environment(cls, threads_override: Optional[int] = None) -> "RunSettings":
        defaults = cls()
        if threads_override is not None:
            threads = max(1, threads_override)
        else:
            threads = _env_value("RATIONALSKETCH_THREADS", int, lambda n: n >= 1,
                                 defaults.threads, "a worker count of at least 1")
        return cls(
            threads=threads,
            log_level=_env_value("RATIONALSKETCH_LOG_LEVEL", _log_level, lambda level: level is not None,
                                 defaults.log_level, "one of " + ", ".join(sorted(LOG_LEVELS))),
            default_reltol=_env_value("RATIONALSKETCH_DEFAULT_RELTOL", float, lambda tol: 0.0 < tol < 1.0,
                                      defaults.default_reltol, "a tolerance in (0, 1)"),
            default_dmax=_env_value("RATIONALSKETCH_DEFAULT_DMAX", int, lambda d: d >= 1,
                                    defaults.default_dmax, "a degree limit of at least 1"),
            output_dir=_env_value("RATIONALSKETCH_OUTPUT_DIR", str, bool,
                                  defaults.output_dir, "a directory path"),
        )

    @property
    def logging_level(self) -> int:
        return getattr(logging, self.log_level, logging.WARNING)
