"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from stn import DesignMatrices, Role, TimeSeriesPanel, VariableMeta


def random_panel(rng: np.random.Generator, p: int, T: int) -> TimeSeriesPanel:
    variables = tuple(
        VariableMeta(name="PD" if i == 0 else f"M{i}", role=Role.RISK_PARAMETER if i == 0 else Role.MACRO)
        for i in range(p)
    )
    values = rng.standard_normal((p, T))
    labels = tuple(f"t{t + 1}" for t in range(T))
    return TimeSeriesPanel(variables=variables, values=values, period_labels=labels)


def random_design(rng: np.random.Generator, p: int, Te: int) -> DesignMatrices:
    values = rng.standard_normal((p, Te + 1))
    X = values[:, 1:]
    Z = np.vstack([values[:, 1:], values[:, :-1]])
    return DesignMatrices.from_arrays(X, Z)


def quarter_labels(start_year: int = 2009, start_q: int = 2, n: int = 24) -> list[str]:
    labels = []
    year, q = start_year, start_q
    for _ in range(n):
        labels.append(f"{year}Q{q}")
        q += 1
        if q == 5:
            q, year = 1, year + 1
    return labels


def csv_text(names: list[str], values: np.ndarray, labels: list[str]) -> str:
    lines = ["period," + ",".join(names)]
    for t, label in enumerate(labels):
        lines.append(label + "," + ",".join(repr(v) for v in values[:, t]))
    return "\n".join(lines) + "\n"
