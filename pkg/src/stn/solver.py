"""Constrained penalized least squares by cyclic coordinate descent.

Solves, over the unfrozen coordinates of Theta = (Psi, Phi) and the
unpenalized intercept b,

    (1/2) ||X - b 1' - Theta Z||_F^2
        + lambda [ alpha ||Theta||_1 + (1/2)(1 - alpha) ||Theta||_2^2 ]

with alpha = 1 giving the pure L1 penalty. The objective separates across
the p rows of Theta, so the fit is p independent penalized regressions
sharing the predictor matrix Z. The intercept is handled by centering; with
``standardize`` on, predictors are additionally scaled to unit sample sd
internally (the penalty then applies to the scaled coefficients) and
coefficients are mapped back to the input scale on return.

Frozen coordinates are never visited by the solver, so they are bitwise 0.0
in every output. Predictors with zero sample sd are skipped the same way.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .model import CoefficientSet, ConstraintMask
from .panel import DesignMatrices

__all__ = [
    "SolverConfig",
    "FitReport",
    "RowFit",
    "fit",
    "fit_row",
    "fit_path",
    "objective",
    "kkt_residual",
    "lambda_max",
    "coefficients_to_json",
    "coefficients_from_json",
]


@dataclass(frozen=True)
class SolverConfig:
    """Penalty mix, strength, and iteration controls.

    ``tol`` bounds the maximum absolute coefficient change over one full
    sweep (measured on the internally scaled coefficients when
    ``standardize`` is set). ``alpha`` in (0, 1]: 1 is the pure L1 penalty.
    """

    alpha: float = 0.5
    lambda_: float = 0.0
    tol: float = 1e-7
    max_sweeps: int = 10000
    standardize: bool = True

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not (math.isfinite(self.lambda_) and self.lambda_ >= 0.0):
            raise ValueError(f"lambda must be finite and >= 0, got {self.lambda_}")
        if not (math.isfinite(self.tol) and self.tol > 0.0):
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be a positive integer")


@dataclass(frozen=True)
class FitReport:
    objective_value: float
    sweeps_used: int
    converged: bool
    kkt_residual: float
    per_row_sweeps: tuple[int, ...]


class RowFit(NamedTuple):
    theta: np.ndarray  # length 2p, on the input scale
    intercept: float
    sweeps: int
    converged: bool


class _Prepared(NamedTuple):
    W: np.ndarray       # 2p x Te centered (and scaled) working predictors
    scale: np.ndarray   # 2p: map working coefficient -> input scale is gamma / scale
    usable: np.ndarray  # 2p bool: predictor has positive sample sd
    G: np.ndarray       # 2p x 2p Gram matrix of W
    C: np.ndarray       # 2p x p cross products of W with centered responses
    Xc: np.ndarray      # p x Te centered responses


def _prepare(design: DesignMatrices, standardize: bool) -> _Prepared:
    usable = design.column_sds > 0.0
    zc = design.Z - design.column_means[:, None]
    if standardize:
        divisor = np.where(usable, design.column_sds, 1.0)
        W = np.where(usable[:, None], zc / divisor[:, None], 0.0)
        scale = np.where(usable, design.column_sds, 1.0)
    else:
        W = np.where(usable[:, None], zc, 0.0)
        scale = np.ones(design.Z.shape[0])
    Xc = design.X - design.response_means[:, None]
    return _Prepared(W=W, scale=scale, usable=usable, G=W @ W.T, C=W @ Xc.T, Xc=Xc)


def _penalty_scale(design: DesignMatrices, standardize: bool) -> np.ndarray:
    return design.column_sds if standardize else np.ones(design.Z.shape[0])


def _solve_active(Ga, ca, nrm, lam_l1, lam_l2, gamma, tol, max_sweeps, descent_probe=None):
    """Cyclic coordinate descent on one row's active coordinates, in place."""
    n = gamma.size
    for sweep in range(1, max_sweeps + 1):
        delta = 0.0
        for t in range(n):
            old = gamma[t]
            rho = ca[t] - float(Ga[t] @ gamma) + nrm[t] * old
            over = abs(rho) - lam_l1
            new = math.copysign(over, rho) / (nrm[t] + lam_l2) if over > 0.0 else 0.0
            if new != old:
                gamma[t] = new
                step = abs(new - old)
                if step > delta:
                    delta = step
        if descent_probe is not None:
            descent_probe(gamma)
        if delta < tol:
            return sweep, True
    return max_sweeps, False


def _working_objective(gamma, Ga, ca, yty, lam_l1, lam_l2) -> float:
    quad = 0.5 * (yty - 2.0 * float(ca @ gamma) + float(gamma @ (Ga @ gamma)))
    return quad + lam_l1 * float(np.abs(gamma).sum()) + 0.5 * lam_l2 * float(gamma @ gamma)


def _fit_row_core(design, mask, config, prep, row, warm_theta=None, check_descent=False):
    p2 = design.Z.shape[0]
    active = np.flatnonzero(~mask.frozen[row] & prep.usable)
    theta = np.zeros(p2)
    if active.size == 0:
        b = float(design.response_means[row])
        return theta, b, 0, True

    Ga = prep.G[np.ix_(active, active)].copy()
    ca = prep.C[active, row].copy()
    nrm = np.diag(Ga).copy()
    lam_l1 = config.lambda_ * config.alpha
    lam_l2 = config.lambda_ * (1.0 - config.alpha)

    gamma = np.zeros(active.size)
    if warm_theta is not None:
        gamma = warm_theta[active] * prep.scale[active]

    descent_probe = None
    if check_descent:
        yty = float(prep.Xc[row] @ prep.Xc[row])
        state = {"prev": _working_objective(gamma, Ga, ca, yty, lam_l1, lam_l2)}

        def descent_probe(g, _state=state):
            now = _working_objective(g, Ga, ca, yty, lam_l1, lam_l2)
            if now > _state["prev"] + 1e-9 * (1.0 + abs(_state["prev"])):
                raise RuntimeError(
                    f"coordinate sweep increased the row-{row} objective: "
                    f"{_state['prev']!r} -> {now!r}"
                )
            _state["prev"] = now

    sweeps, converged = _solve_active(
        Ga, ca, nrm, lam_l1, lam_l2, gamma, config.tol, config.max_sweeps, descent_probe
    )
    theta[active] = gamma / prep.scale[active]
    b = float(design.response_means[row] - theta @ design.column_means)
    return theta, b, sweeps, converged


def _check_dims(design: DesignMatrices, mask: ConstraintMask) -> None:
    if mask.p != design.p:
        raise ValueError(f"mask is p={mask.p} but design is p={design.p}")


def fit(
    design: DesignMatrices,
    mask: ConstraintMask,
    config: SolverConfig,
    warm_start: CoefficientSet | None = None,
    check_descent: bool = False,
) -> tuple[CoefficientSet, FitReport]:
    """Minimize the penalized objective subject to the mask's frozen zeros.

    Returns the coefficients on the input scale and a report. Exhausting
    ``max_sweeps`` is reported via ``converged=False``, not raised.
    """
    _check_dims(design, mask)
    if warm_start is not None and warm_start.p != design.p:
        raise ValueError("warm start has wrong dimension")
    p = design.p
    prep = _prepare(design, config.standardize)
    theta = np.zeros((p, 2 * p))
    intercept = np.zeros(p)
    per_row = []
    all_converged = True
    warm_theta = warm_start.theta if warm_start is not None else None
    for i in range(p):
        row_warm = warm_theta[i] if warm_theta is not None else None
        theta[i], intercept[i], sweeps, conv = _fit_row_core(
            design, mask, config, prep, i, row_warm, check_descent
        )
        per_row.append(sweeps)
        all_converged = all_converged and conv
    coeffs = CoefficientSet(psi=theta[:, :p], phi=theta[:, p:], intercept=intercept)
    report = FitReport(
        objective_value=objective(design, coeffs, config),
        sweeps_used=max(per_row),
        converged=all_converged,
        kkt_residual=kkt_residual(design, coeffs, mask, config),
        per_row_sweeps=tuple(per_row),
    )
    return coeffs, report


def fit_row(
    design: DesignMatrices,
    mask: ConstraintMask,
    config: SolverConfig,
    row: int,
    warm_start: CoefficientSet | None = None,
) -> RowFit:
    """Solve one row's problem on its own; assembling all rows equals fit()."""
    _check_dims(design, mask)
    if not (0 <= row < design.p):
        raise ValueError(f"row {row} outside 0..{design.p - 1}")
    prep = _prepare(design, config.standardize)
    warm_theta = warm_start.theta[row] if warm_start is not None else None
    theta, b, sweeps, conv = _fit_row_core(design, mask, config, prep, row, warm_theta)
    return RowFit(theta=theta, intercept=b, sweeps=sweeps, converged=conv)


def objective(design: DesignMatrices, coeffs: CoefficientSet, config: SolverConfig) -> float:
    """Exact penalized objective of the problem fit() minimizes.

    With ``standardize`` off this is literally the half squared Frobenius
    residual plus the mixed penalty on Theta; with it on, the penalty weighs
    each coordinate by its predictor's sample sd (the scaled-space penalty).
    """
    if coeffs.p != design.p:
        raise ValueError("coefficients and design dimensions disagree")
    theta = coeffs.theta
    resid = design.X - coeffs.intercept[:, None] - theta @ design.Z
    rss = 0.5 * float(np.sum(resid * resid))
    s = _penalty_scale(design, config.standardize)
    scaled = theta * s[None, :]
    l1 = float(np.abs(scaled).sum())
    l2 = float(np.sum(scaled * scaled))
    return rss + config.lambda_ * (config.alpha * l1 + 0.5 * (1.0 - config.alpha) * l2)


def kkt_residual(
    design: DesignMatrices,
    coeffs: CoefficientSet,
    mask: ConstraintMask,
    config: SolverConfig,
) -> float:
    """Worst subgradient-condition violation over the mask's unfrozen coordinates.

    For a nonzero (scaled) coefficient g_j the condition is
    grad_j + lambda (1-alpha) g_j + lambda alpha sign(g_j) = 0; for a zero
    coefficient, |grad_j| <= lambda alpha. Returns the largest absolute
    violation; 0 at an exact optimum.
    """
    _check_dims(design, mask)
    if coeffs.p != design.p:
        raise ValueError("coefficients and design dimensions disagree")
    prep = _prepare(design, config.standardize)
    theta = coeffs.theta
    resid = design.X - coeffs.intercept[:, None] - theta @ design.Z
    grad = -(prep.W @ resid.T).T  # (p, 2p): d/d gamma of the smooth part
    gamma = theta * prep.scale[None, :]
    lam_l1 = config.lambda_ * config.alpha
    lam_l2 = config.lambda_ * (1.0 - config.alpha)
    at_zero = np.maximum(0.0, np.abs(grad) - lam_l1)
    off_zero = np.abs(grad + lam_l2 * gamma + lam_l1 * np.sign(gamma))
    viol = np.where(gamma != 0.0, off_zero, at_zero)
    return float(np.where(mask.frozen, 0.0, viol).max())


def lambda_max(
    design: DesignMatrices, mask: ConstraintMask, alpha: float, standardize: bool = True
) -> float:
    """Smallest penalty at which the all-zero Theta is optimal.

    Equals the largest |<working predictor j, centered response i>| over the
    unfrozen (i, j), divided by alpha.
    """
    _check_dims(design, mask)
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    prep = _prepare(design, standardize)
    inner = np.abs(prep.W @ prep.Xc.T).T  # (p, 2p)
    unfrozen = ~mask.frozen
    if not unfrozen.any():
        return 0.0
    return float(inner[unfrozen].max()) / alpha


def fit_path(
    design: DesignMatrices,
    mask: ConstraintMask,
    config: SolverConfig,
    n_lambdas: int,
    lambda_min_ratio: float,
) -> list[tuple[float, CoefficientSet, FitReport]]:
    """Warm-started solves on a log-spaced grid from lambda_max downward.

    The grid overrides ``config.lambda_``. The first point is the full-
    shrinkage boundary, so its solution is the all-zero Theta.
    """
    if n_lambdas < 2:
        raise ValueError("need at least 2 grid points")
    if not (0.0 < lambda_min_ratio < 1.0):
        raise ValueError("lambda_min_ratio must be in (0, 1)")
    lmax = lambda_max(design, mask, config.alpha, standardize=config.standardize)
    if lmax > 0.0:
        grid = np.geomspace(lmax, lmax * lambda_min_ratio, n_lambdas)
    else:
        grid = np.zeros(n_lambdas)
    out = []
    warm: CoefficientSet | None = None
    for lam in grid:
        coeffs, report = fit(design, mask, replace(config, lambda_=float(lam)), warm_start=warm)
        warm = coeffs
        out.append((float(lam), coeffs, report))
    return out


def coefficients_to_json(
    coeffs: CoefficientSet,
    variables: Sequence[str],
    lambda_: float,
    alpha: float,
    objective_value: float,
    kkt: float,
) -> str:
    if len(variables) != coeffs.p:
        raise ValueError("one variable name per coefficient row is required")
    payload = {
        "variables": list(variables),
        "psi": [[float(v) for v in row] for row in coeffs.psi],
        "phi": [[float(v) for v in row] for row in coeffs.phi],
        "intercept": [float(v) for v in coeffs.intercept],
        "lambda": float(lambda_),
        "alpha": float(alpha),
        "objective": float(objective_value),
        "kkt_residual": float(kkt),
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def coefficients_from_json(text: str) -> tuple[CoefficientSet, dict]:
    payload = json.loads(text)
    coeffs = CoefficientSet(
        psi=np.array(payload["psi"], dtype=float),
        phi=np.array(payload["phi"], dtype=float),
        intercept=np.array(payload["intercept"], dtype=float),
    )
    meta = {k: payload[k] for k in ("variables", "lambda", "alpha", "objective", "kkt_residual")}
    return coeffs, meta
