"""Scale of importance of macroeconomic shocks toward the risk parameter.

Standardizes every series, solves the penalized problem, and reads the
risk-parameter row of Theta: each standardized coefficient measures how
sensitive the risk parameter is to that (possibly lagged) variable, all
series being on a common scale. Under the default mask only lag entries can
be nonzero in that row.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .model import ConstraintMask
from .panel import TimeSeriesPanel, build_design, standardize
from .solver import SolverConfig, fit

__all__ = [
    "Normalization",
    "ImportanceEntry",
    "ImportanceScale",
    "importance_scale",
    "scale_from_coefficients",
    "importance_to_csv",
    "importance_to_json",
]


class Normalization(Enum):
    RAW = "raw"
    UNIT_MAX = "unitmax"
    UNIT_SUM = "unitsum"


class ImportanceEntry(NamedTuple):
    variable: str
    lag: int
    score: float


@dataclass(frozen=True)
class ImportanceScale:
    """Scores per (variable, lag) with the normalization actually applied.

    When every coefficient toward the risk parameter is zero, the requested
    normalization is undefined; the scale falls back to raw zeros and sets
    ``degenerate``.
    """

    entries: tuple[ImportanceEntry, ...]
    normalization: Normalization
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(ImportanceEntry(*e) for e in self.entries))
        scores = np.array([e.score for e in self.entries])
        if scores.size and not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        if not self.degenerate and scores.size:
            if self.normalization is Normalization.UNIT_MAX and np.abs(scores).max() > 0:
                if abs(np.abs(scores).max() - 1.0) > 1e-9:
                    raise ValueError("unit-max scale must peak at 1")
            if self.normalization is Normalization.UNIT_SUM and np.abs(scores).sum() > 0:
                if abs(np.abs(scores).sum() - 1.0) > 1e-9:
                    raise ValueError("unit-sum scale must total 1")


def scale_from_coefficients(
    coeffs, names: Sequence[str], normalization: Normalization
) -> ImportanceScale:
    """Build the scale from an already-fitted coefficient set's risk row."""
    if len(names) != coeffs.p:
        raise ValueError("one name per variable is required")
    raw = []
    for lag, block in ((0, coeffs.psi), (1, coeffs.phi)):
        for j, name in enumerate(names):
            raw.append(ImportanceEntry(variable=name, lag=lag, score=float(block[0, j])))
    scores = np.array([e.score for e in raw])
    norm = np.abs(scores).max() if normalization is Normalization.UNIT_MAX else np.abs(scores).sum()
    if normalization is Normalization.RAW:
        return ImportanceScale(entries=tuple(raw), normalization=normalization)
    if norm == 0.0:
        return ImportanceScale(entries=tuple(raw), normalization=Normalization.RAW, degenerate=True)
    entries = tuple(e._replace(score=e.score / norm) for e in raw)
    return ImportanceScale(entries=entries, normalization=normalization)


def importance_scale(
    panel: TimeSeriesPanel,
    mask: ConstraintMask,
    config: SolverConfig,
    normalization: Normalization = Normalization.UNIT_MAX,
) -> ImportanceScale:
    """Standardize all series, solve at the given penalty, and score the risk row."""
    if panel.p != mask.p:
        raise ValueError("panel and mask dimensions disagree")
    std_panel, _, _ = standardize(panel)
    design = build_design(std_panel)
    coeffs, _ = fit(design, mask, config)
    return scale_from_coefficients(coeffs, panel.names, normalization)


def _export_order(scale: ImportanceScale) -> list[ImportanceEntry]:
    return sorted(scale.entries, key=lambda e: (-abs(e.score), e.variable, e.lag))


def importance_to_csv(scale: ImportanceScale) -> str:
    """Plot-ready CSV ordered by |score| descending (ties: name, then lag)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["variable", "lag", "score"])
    for e in _export_order(scale):
        writer.writerow([e.variable, e.lag, repr(e.score)])
    return buf.getvalue()


def importance_to_json(scale: ImportanceScale) -> str:
    payload = {
        "normalization": scale.normalization.value,
        "degenerate": scale.degenerate,
        "entries": [
            {"variable": e.variable, "lag": e.lag, "score": e.score}
            for e in _export_order(scale)
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
