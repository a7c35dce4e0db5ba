"""Time-series panel ingestion, risk-parameter transform, and lag-stacked design matrices.

A panel holds p series observed in level over T periods, with the risk
parameter in the first row. From a panel we build the response matrix X
(columns t = 2..T) and the stacked predictor matrix Z whose column at time t
is (X_t', X_{t-1}')'. Estimation conditions on the first observation, so the
effective sample size is Te = T - 1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import IO

import numpy as np

__all__ = [
    "Role",
    "Transform",
    "VariableMeta",
    "TimeSeriesPanel",
    "DesignMatrices",
    "PanelFormatError",
    "LogitDomainError",
    "load_csv",
    "write_csv",
    "apply_logit",
    "invert_logit",
    "standardize",
    "build_design",
]


class Role(Enum):
    RISK_PARAMETER = "risk_parameter"
    MACRO = "macro"


class Transform(Enum):
    NONE = "none"
    LOGIT = "logit"


class PanelFormatError(ValueError):
    """CSV source could not be parsed into a valid panel."""


class LogitDomainError(ValueError):
    """Risk-parameter values are outside the open unit interval."""


def _readonly(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class VariableMeta:
    """Name, role, and applied transform of one series."""

    name: str
    role: Role = Role.MACRO
    transform: Transform = Transform.NONE

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable name must be nonempty")
        if self.transform is Transform.LOGIT and self.role is not Role.RISK_PARAMETER:
            raise ValueError(
                f"logit transform is only valid for the risk parameter, not {self.name!r}"
            )


@dataclass(frozen=True)
class TimeSeriesPanel:
    """Immutable p x T observation matrix with per-variable metadata.

    Row i of ``values`` is the series of ``variables[i]``; the risk parameter
    occupies row 0. ``period_labels`` are opaque strings (no date arithmetic).
    """

    variables: tuple[VariableMeta, ...]
    values: np.ndarray
    period_labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "period_labels", tuple(str(x) for x in self.period_labels))
        values = _readonly(self.values)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ValueError("values must be a p x T matrix")
        p, T = values.shape
        if p != len(self.variables):
            raise ValueError(f"{len(self.variables)} variable metas for {p} rows")
        if T != len(self.period_labels):
            raise ValueError(f"{len(self.period_labels)} period labels for {T} columns")
        if p < 2:
            raise ValueError("panel needs the risk parameter and at least one macro series")
        if T < 3:
            raise ValueError("panel needs at least 3 observations")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        risk_rows = [i for i, v in enumerate(self.variables) if v.role is Role.RISK_PARAMETER]
        if risk_rows != [0]:
            raise ValueError("exactly one risk parameter is required, at index 0")
        if not np.all(np.isfinite(values)):
            raise ValueError("panel values must all be finite")

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        return self.values.shape[1]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def risk_name(self) -> str:
        return self.variables[0].name


@dataclass(frozen=True)
class DesignMatrices:
    """Response matrix X (p x Te) and stacked predictors Z (2p x Te).

    Column k of Z is (X at time k+2, X at time k+1) stacked, i.e. the
    contemporaneous slice over the one-period lag. ``column_means`` and
    ``column_sds`` are per-predictor statistics over the Te samples (a zero
    sd flags a predictor constant over the sample); ``response_means`` are
    the per-row means of X.
    """

    X: np.ndarray
    Z: np.ndarray
    Te: int
    column_means: np.ndarray
    column_sds: np.ndarray
    response_means: np.ndarray

    def __post_init__(self):
        for name in ("X", "Z", "column_means", "column_sds", "response_means"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        p, te = self.X.shape
        if self.Z.shape != (2 * p, te) or self.Te != te:
            raise ValueError("X and Z dimensions disagree")
        if not np.array_equal(self.Z[:p], self.X):
            raise ValueError("top block of Z must equal X")
        if self.column_means.shape != (2 * p,) or self.column_sds.shape != (2 * p,):
            raise ValueError("predictor statistics must have length 2p")
        if self.response_means.shape != (p,):
            raise ValueError("response means must have length p")
        if np.any(self.column_sds < 0):
            raise ValueError("predictor sds must be nonnegative")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.Z))):
            raise ValueError("design matrices must be finite")

    @property
    def p(self) -> int:
        return self.X.shape[0]

    @classmethod
    def from_arrays(cls, X: np.ndarray, Z: np.ndarray) -> "DesignMatrices":
        """Build a design with freshly computed statistics (used for CV folds)."""
        X = np.asarray(X, dtype=float)
        Z = np.asarray(Z, dtype=float)
        return cls(
            X=X,
            Z=Z,
            Te=X.shape[1],
            column_means=Z.mean(axis=1),
            column_sds=_row_sds(Z),
            response_means=X.mean(axis=1),
        )


def _row_sds(a: np.ndarray) -> np.ndarray:
    """Sample sd (ddof=1) per row, exactly 0.0 for exactly-constant rows."""
    constant = np.all(a == a[:, :1], axis=1)
    sds = np.where(constant, 0.0, np.std(a, axis=1, ddof=1))
    return sds


def _open_source(source) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    raise TypeError(f"unsupported CSV source {type(source)!r}")


def load_csv(source, risk_variable: str) -> TimeSeriesPanel:
    """Parse a CSV (header row; first column = period label) into a panel.

    The column named ``risk_variable`` is moved to row 0; all other columns
    keep their file order. Values are parsed as plain decimal reals, in level.
    """
    with _open_source(source) as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise PanelFormatError("empty CSV source")
    header = rows[0]
    if len(header) < 2:
        raise PanelFormatError("header must have a period-label column and variable columns")
    names = [h.strip() for h in header[1:]]
    if any(not n for n in names):
        raise PanelFormatError("variable names in the header must be nonempty")
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise PanelFormatError(f"duplicate column names: {', '.join(dupes)}")
    if risk_variable not in names:
        raise PanelFormatError(f"risk variable {risk_variable!r} not among columns {names}")
    data_rows = rows[1:]
    if len(data_rows) < 3:
        raise PanelFormatError(f"need at least 3 data rows, found {len(data_rows)}")
    if len(names) < 2:
        raise PanelFormatError("need at least one macro variable besides the risk parameter")

    labels: list[str] = []
    values = np.empty((len(names), len(data_rows)), dtype=float)
    for t, row in enumerate(data_rows):
        line_no = t + 2
        if len(row) != len(header):
            raise PanelFormatError(
                f"line {line_no}: expected {len(header)} fields, found {len(row)}"
            )
        labels.append(row[0].strip())
        for j, cell in enumerate(row[1:]):
            try:
                values[j, t] = float(cell)
            except ValueError:
                raise PanelFormatError(
                    f"line {line_no}, column {names[j]!r}: could not parse {cell.strip()!r} as a number"
                ) from None

    order = [names.index(risk_variable)] + [
        j for j, n in enumerate(names) if n != risk_variable
    ]
    variables = tuple(
        VariableMeta(
            name=names[j],
            role=Role.RISK_PARAMETER if names[j] == risk_variable else Role.MACRO,
        )
        for j in order
    )
    return TimeSeriesPanel(variables=variables, values=values[order], period_labels=tuple(labels))


def write_csv(panel: TimeSeriesPanel, destination) -> None:
    """Write a panel in the same CSV layout load_csv reads (round-trips exactly)."""
    own = isinstance(destination, (str, Path))
    fh = open(destination, "w", encoding="utf-8", newline="") if own else destination
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["period", *panel.names])
        for t in range(panel.T):
            writer.writerow([panel.period_labels[t], *(repr(v) for v in panel.values[:, t])])
    finally:
        if own:
            fh.close()


def apply_logit(panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """Replace the risk row by ln(v / (1 - v)) elementwise.

    Requires every risk value strictly inside (0, 1); other rows untouched.
    """
    if panel.variables[0].transform is Transform.LOGIT:
        raise LogitDomainError("logit transform already applied to the risk parameter")
    risk = panel.values[0]
    bad = np.flatnonzero((risk <= 0.0) | (risk >= 1.0))
    if bad.size:
        t = int(bad[0])
        raise LogitDomainError(
            f"risk value {risk[t]!r} at period {panel.period_labels[t]!r} is outside (0, 1)"
        )
    values = panel.values.copy()
    values[0] = np.log(risk / (1.0 - risk))
    variables = (replace(panel.variables[0], transform=Transform.LOGIT),) + panel.variables[1:]
    return TimeSeriesPanel(variables=variables, values=values, period_labels=panel.period_labels)


def invert_logit(panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """Undo apply_logit: risk row back to 1 / (1 + exp(-v)), for reporting."""
    if panel.variables[0].transform is not Transform.LOGIT:
        raise LogitDomainError("risk parameter does not carry the logit transform")
    values = panel.values.copy()
    values[0] = 1.0 / (1.0 + np.exp(-values[0]))
    variables = (replace(panel.variables[0], transform=Transform.NONE),) + panel.variables[1:]
    return TimeSeriesPanel(variables=variables, values=values, period_labels=panel.period_labels)


def standardize(panel: TimeSeriesPanel) -> tuple[TimeSeriesPanel, np.ndarray, np.ndarray]:
    """Center each row to mean 0 and scale to sample sd 1 (denominator T - 1).

    Constant rows are centered to all-zero and their sd is reported as 0.
    Returns the standardized panel and the per-row means and sds.
    """
    means = panel.values.mean(axis=1)
    sds = _row_sds(panel.values)
    centered = panel.values - means[:, None]
    scale = np.where(sds > 0, sds, 1.0)
    values = np.where(sds[:, None] > 0, centered / scale[:, None], 0.0)
    out = TimeSeriesPanel(variables=panel.variables, values=values, period_labels=panel.period_labels)
    return out, means, sds


def build_design(panel: TimeSeriesPanel) -> DesignMatrices:
    """Stack the contemporaneous slice over the lag-1 slice; Te = T - 1.

    The initial observation is conditioned on, not modeled: X holds columns
    t = 2..T of the panel and the lag block of Z holds columns t = 1..T-1.
    """
    if panel.T < 3:
        raise ValueError("need T >= 3 to form lagged design matrices")
    X = panel.values[:, 1:]
    Z = np.vstack([panel.values[:, 1:], panel.values[:, :-1]])
    return DesignMatrices.from_arrays(X, Z)
