"""Penalty selection by cross-validation over time points.

Folds are built over the Te design columns. The default scheme uses
contiguous blocks, which respects serial correlation better than random
folds in short samples; an expanding-window (rolling origin) scheme is
available for strictly forward-looking validation. The lambda grid is
computed once from the full design and shared across folds; each fold
refits the warm-started path on its training columns only and scores
one-step predictions b + Theta Z_t on its validation columns.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .model import ConstraintMask
from .panel import DesignMatrices
from .solver import SolverConfig, fit, lambda_max

__all__ = [
    "FoldScheme",
    "FoldPlan",
    "CvResult",
    "make_folds",
    "cross_validate",
    "cv_to_csv",
    "cv_to_json",
]


class FoldScheme(Enum):
    KFOLD_CONTIGUOUS = "kfold"
    ROLLING_ORIGIN = "rolling"


@dataclass(frozen=True)
class FoldPlan:
    scheme: FoldScheme
    k: int
    folds: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]  # (train, validation) index sets

    def __post_init__(self):
        object.__setattr__(
            self,
            "folds",
            tuple((tuple(tr), tuple(va)) for tr, va in self.folds),
        )
        for tr, va in self.folds:
            if not tr or not va:
                raise ValueError("every train and validation set must be nonempty")
            if set(tr) & set(va):
                raise ValueError("train and validation indices must be disjoint")


def _blocks(n: int, k: int) -> list[list[int]]:
    base, rem = divmod(n, k)
    out, start = [], 0
    for m in range(k):
        size = base + (1 if m < rem else 0)
        out.append(list(range(start, start + size)))
        start += size
    return out


def make_folds(Te: int, k: int, scheme: FoldScheme) -> FoldPlan:
    """Contiguous k-fold blocks, or k expanding-window (rolling origin) splits."""
    if not (2 <= k <= Te):
        raise ValueError(f"k must be in [2, Te={Te}], got {k}")
    if scheme is FoldScheme.KFOLD_CONTIGUOUS:
        blocks = _blocks(Te, k)
        folds = []
        for m, block in enumerate(blocks):
            val = set(block)
            train = [t for t in range(Te) if t not in val]
            folds.append((tuple(train), tuple(block)))
    elif scheme is FoldScheme.ROLLING_ORIGIN:
        if Te < k + 1:
            raise ValueError(f"rolling origin needs Te >= k + 1, got Te={Te}, k={k}")
        blocks = _blocks(Te, k + 1)
        folds = []
        for block in blocks[1:]:
            folds.append((tuple(range(block[0])), tuple(block)))
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return FoldPlan(scheme=scheme, k=k, folds=tuple(folds))


@dataclass(frozen=True)
class CvResult:
    grid: tuple[tuple[float, float], ...]  # (alpha, lambda) per point
    mean_cv_error: tuple[float, ...]
    sd_cv_error: tuple[float, ...]
    best: int
    best_1se: int
    n_folds: int
    scoring: str

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple((float(a), float(l)) for a, l in self.grid))
        object.__setattr__(self, "mean_cv_error", tuple(float(v) for v in self.mean_cv_error))
        object.__setattr__(self, "sd_cv_error", tuple(float(v) for v in self.sd_cv_error))
        if any(v < 0 for v in self.mean_cv_error):
            raise ValueError("cv errors must be nonnegative")
        if self.mean_cv_error[self.best] > min(self.mean_cv_error):
            raise ValueError("best must minimize the mean cv error")

    @property
    def best_alpha(self) -> float:
        return self.grid[self.best][0]

    @property
    def best_lambda(self) -> float:
        return self.grid[self.best][1]


def _subdesign(design: DesignMatrices, cols: Sequence[int]) -> DesignMatrices:
    idx = list(cols)
    return DesignMatrices.from_arrays(design.X[:, idx], design.Z[:, idx])


def cross_validate(
    design: DesignMatrices,
    mask: ConstraintMask,
    alphas: Sequence[float],
    n_lambdas: int,
    lambda_min_ratio: float,
    plan: FoldPlan,
    scoring: str = "all",
    tol: float = 1e-7,
    max_sweeps: int = 10000,
    standardize: bool = True,
) -> CvResult:
    """Mean squared one-step prediction error per (alpha, lambda) grid point.

    ``scoring`` is "all" (error over all p responses, matching the fitted
    objective) or "risk" (risk-parameter row only, for stress-test-focused
    selection). Deterministic: identical inputs give identical results.
    """
    if not alphas:
        raise ValueError("alphas must be nonempty")
    if n_lambdas < 2:
        raise ValueError("need at least 2 lambda grid points")
    if not (0.0 < lambda_min_ratio < 1.0):
        raise ValueError("lambda_min_ratio must be in (0, 1)")
    if scoring not in ("all", "risk"):
        raise ValueError(f"scoring must be 'all' or 'risk', got {scoring!r}")
    for train, _ in plan.folds:
        if len(train) < 2:
            raise ValueError("every fold needs at least 2 training columns")

    grid: list[tuple[float, float]] = []
    for alpha in alphas:
        lmax = lambda_max(design, mask, alpha, standardize=standardize)
        if lmax > 0.0:
            lams = np.geomspace(lmax, lmax * lambda_min_ratio, n_lambdas)
        else:
            lams = np.zeros(n_lambdas)
        grid.extend((float(alpha), float(lam)) for lam in lams)

    rows = slice(0, 1) if scoring == "risk" else slice(None)
    errors = np.zeros((len(grid), len(plan.folds)))
    for f, (train, val) in enumerate(plan.folds):
        sub = _subdesign(design, train)
        X_val = design.X[rows, list(val)]
        Z_val = design.Z[:, list(val)]
        for a, alpha in enumerate(alphas):
            warm = None
            for l in range(n_lambdas):
                g = a * n_lambdas + l
                cfg = SolverConfig(
                    alpha=alpha,
                    lambda_=grid[g][1],
                    tol=tol,
                    max_sweeps=max_sweeps,
                    standardize=standardize,
                )
                coeffs, _ = fit(sub, mask, cfg, warm_start=warm)
                warm = coeffs
                pred = coeffs.intercept[:, None] + coeffs.theta @ Z_val
                diff = X_val - pred[rows]
                errors[g, f] = float(np.mean(diff * diff))

    mean = errors.mean(axis=1)
    sd = errors.std(axis=1, ddof=1)
    best = int(np.argmin(mean))
    se = sd[best] / math.sqrt(len(plan.folds))
    block = best // n_lambdas  # 1-SE choice stays on the winning alpha's path
    lo = block * n_lambdas
    threshold = mean[best] + se
    best_1se = best
    for g in range(lo, lo + n_lambdas):
        if mean[g] <= threshold:
            best_1se = g
            break
    return CvResult(
        grid=tuple(grid),
        mean_cv_error=tuple(mean),
        sd_cv_error=tuple(sd),
        best=best,
        best_1se=best_1se,
        n_folds=len(plan.folds),
        scoring=scoring,
    )


def cv_to_csv(result: CvResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "lambda", "mean_cv_error", "sd_cv_error"])
    for (alpha, lam), m, s in zip(result.grid, result.mean_cv_error, result.sd_cv_error):
        writer.writerow([repr(alpha), repr(lam), repr(m), repr(s)])
    return buf.getvalue()


def cv_to_json(result: CvResult) -> str:
    payload = {
        "grid": [list(g) for g in result.grid],
        "mean_cv_error": list(result.mean_cv_error),
        "sd_cv_error": list(result.sd_cv_error),
        "best": result.best,
        "best_1se": result.best_1se,
        "n_folds": result.n_folds,
        "scoring": result.scoring,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
