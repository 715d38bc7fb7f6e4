#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# -------------------------------------------------------------------------------
# Name:         report
# Purpose:      Run reports of approximation runs and their JSON / CSV export
#
# Author:       Watchman8925
#
# Created:      2025
# License:      MIT
# -------------------------------------------------------------------------------

"""
Run reports.

A RunReport holds everything a table row needs (degree, error, timings) plus
the supports and weights of the final model. Complex numbers are written to
JSON as ``[re, im]`` pairs so that the schema stays plain JSON; see
REPORT_FORMAT.md.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from rationalsketch.aaa import AAAReport

LOGGER = logging.getLogger(__name__)

SCHEMA_VERSION = 1
HISTORY_FIELDS = ('degree', 'metric', 'seconds')


def encode_complex(value: complex) -> List[float]:
    value = complex(value)
    return [value.real, value.imag]


def decode_complex(pair: Sequence[float]) -> complex:
    if len(pair) != 2:
        raise ValueError(f"Complex values are stored as [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


@dataclass(frozen=True)
class HistoryRow:
    """One row of the iteration history."""

    degree: int
    metric: float
    seconds: float


@dataclass
class RunReport:
    """Outcome of one approximation run (or the average of repeated runs)."""

    mode: str
    ell: Optional[int]
    seed: int
    problem: str
    degree: float
    relerr_max: float
    relerr_fro: float
    terminated_by: str
    reltol: float
    dmax: int
    history: List[HistoryRow] = field(default_factory=list)
    supports: List[complex] = field(default_factory=list)
    weights: List[complex] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    repeats: int = 1
    per_repeat: List[Dict[str, Any]] = field(default_factory=list)

    @classmethod
    def from_run(cls, *, mode: str, ell: Optional[int], seed: int, problem: str,
                 model, report: AAAReport, relerr_max: float, relerr_fro: float,
                 reltol: float, dmax: int, timings: Dict[str, float]) -> "RunReport":
        """Collect a report from a fitted model and its AAA history."""
        elapsed = 0.0
        history = []
        for record in report.records:
            elapsed += record.seconds
            history.append(HistoryRow(record.degree, record.metric, elapsed))
        return cls(
            mode=mode,
            ell=ell,
            seed=seed,
            problem=problem,
            degree=model.degree,
            relerr_max=float(relerr_max),
            relerr_fro=float(relerr_fro),
            terminated_by=report.terminated_by,
            reltol=float(reltol),
            dmax=int(dmax),
            history=history,
            supports=[complex(z) for z in model.supports],
            weights=[complex(w) for w in model.weights],
            timings={key: float(value) for key, value in timings.items()},
        )

    @property
    def tolerance_met(self) -> bool:
        return self.terminated_by == 'tolerance'

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema': SCHEMA_VERSION,
            'mode': self.mode,
            'ell': self.ell,
            'seed': self.seed,
            'problem': self.problem,
            'degree': self.degree,
            'relerr_max': self.relerr_max,
            'relerr_fro': self.relerr_fro,
            'terminated_by': self.terminated_by,
            'reltol': self.reltol,
            'dmax': self.dmax,
            'history': [asdict(row) for row in self.history],
            'supports': [encode_complex(z) for z in self.supports],
            'weights': [encode_complex(w) for w in self.weights],
            'timings': dict(self.timings),
            'repeats': self.repeats,
            'per_repeat': [dict(entry) for entry in self.per_repeat],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunReport":
        schema = data.get('schema', SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ValueError(f"Unsupported report schema {schema}")
        return cls(
            mode=data['mode'],
            ell=data.get('ell'),
            seed=int(data['seed']),
            problem=data['problem'],
            degree=data['degree'],
            relerr_max=float(data['relerr_max']),
            relerr_fro=float(data['relerr_fro']),
            terminated_by=data['terminated_by'],
            reltol=float(data['reltol']),
            dmax=int(data['dmax']),
            history=[HistoryRow(int(row['degree']), float(row['metric']), float(row['seconds']))
                     for row in data.get('history', [])],
            supports=[decode_complex(pair) for pair in data.get('supports', [])],
            weights=[decode_complex(pair) for pair in data.get('weights', [])],
            timings={key: float(value) for key, value in data.get('timings', {}).items()},
            repeats=int(data.get('repeats', 1)),
            per_repeat=[dict(entry) for entry in data.get('per_repeat', [])],
        )


def average_reports(reports: Sequence[RunReport]) -> RunReport:
    """
    Arithmetic mean of degree, errors and timings over repeated runs.

    History, supports and weights are those of the first run; every run's
    seed, degree and errors are kept under ``per_repeat``.
    """
    if not reports:
        raise ValueError("No reports to average")
    first = reports[0]
    count = len(reports)
    timing_keys = set().union(*(report.timings for report in reports))
    timings = {
        key: sum(report.timings.get(key, 0.0) for report in reports) / count
        for key in sorted(timing_keys)
    }
    terminations = {report.terminated_by for report in reports}
    return RunReport(
        mode=first.mode,
        ell=first.ell,
        seed=first.seed,
        problem=first.problem,
        degree=sum(report.degree for report in reports) / count,
        relerr_max=sum(report.relerr_max for report in reports) / count,
        relerr_fro=sum(report.relerr_fro for report in reports) / count,
        terminated_by='tolerance' if terminations == {'tolerance'} else 'dmax',
        reltol=first.reltol,
        dmax=first.dmax,
        history=list(first.history),
        supports=list(first.supports),
        weights=list(first.weights),
        timings=timings,
        repeats=count,
        per_repeat=[
            {
                'seed': report.seed,
                'degree': report.degree,
                'relerr_max': report.relerr_max,
                'relerr_fro': report.relerr_fro,
                'terminated_by': report.terminated_by,
            }
            for report in reports
        ],
    )


class ReportExporter:
    """Writes reports and tables below an output directory."""

    def __init__(self, output_dir: Union[str, Path] = "./reports"):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _target(self, output_path: Optional[Union[str, Path]], prefix: str, suffix: str) -> Path:
        if output_path is None:
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            return self.output_dir / f"{prefix}_{timestamp}.{suffix}"
        path = Path(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def export_json(self, data: Union[RunReport, Dict[str, Any], List[Any]],
                    output_path: Optional[Union[str, Path]] = None, prefix: str = "report") -> str:
        """
        Export a report (or any JSON-ready payload) as JSON.

        Args:
            data: RunReport or plain payload
            output_path: Optional specific output path

        Returns:
            Path to the JSON file
        """
        path = self._target(output_path, prefix, "json")
        payload = data.to_dict() if isinstance(data, RunReport) else data
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2)
        LOGGER.info("Wrote %s", path)
        return str(path)

    def export_history_csv(self, report: RunReport,
                           output_path: Optional[Union[str, Path]] = None) -> str:
        """Write the iteration history as CSV with header degree,metric,seconds."""
        path = self._target(output_path, "history", "csv")
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.DictWriter(f, fieldnames=list(HISTORY_FIELDS))
            writer.writeheader()
            writer.writerows(asdict(row) for row in report.history)
        return str(path)

    def export_table_csv(self, rows: Sequence[Dict[str, Any]],
                         output_path: Optional[Union[str, Path]] = None, prefix: str = "table") -> str:
        """Write dictionaries sharing one set of keys as CSV."""
        if not rows:
            raise ValueError("No rows to export")
        path = self._target(output_path, prefix, "csv")
        fieldnames = list(rows[0].keys())
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames)
            writer.writeheader()
            writer.writerows({key: ('' if row.get(key) is None else row.get(key)) for key in fieldnames}
                             for row in rows)
        return str(path)

    @staticmethod
    def load_json(path: Union[str, Path]) -> RunReport:
        with open(path, 'r', encoding='utf-8') as f:
            return RunReport.from_dict(json.load(f))
