"""Independent reference implementations the solver is checked against.

These deliberately avoid the package's coordinate-descent machinery: the
least-squares oracle goes through dense normal equations, and the pure-L1
reference is a naive residual-carrying coordinate loop.
"""

from __future__ import annotations

import numpy as np

from stn import ConstraintMask, DesignMatrices


def constrained_ols(design: DesignMatrices, mask: ConstraintMask, row: int):
    """Least squares for one row over its unfrozen predictors plus intercept."""
    active = np.flatnonzero(~mask.frozen[row] & (design.column_sds > 0))
    y = design.X[row]
    M = np.column_stack([np.ones(design.Te), design.Z[active].T])
    sol, *_ = np.linalg.lstsq(M, y, rcond=None)
    theta = np.zeros(design.Z.shape[0])
    theta[active] = sol[1:]
    return float(sol[0]), theta


def lasso_cd_reference(
    design: DesignMatrices,
    mask: ConstraintMask,
    row: int,
    lam: float,
    standardize: bool = True,
    tol: float = 1e-12,
    max_sweeps: int = 200000,
):
    """Pure-L1 solve for one row, maintaining the residual vector explicitly."""
    active = np.flatnonzero(~mask.frozen[row] & (design.column_sds > 0))
    y = design.X[row]
    ym = y.mean()
    r = y - ym
    cols = []
    for j in active:
        col = design.Z[j] - design.Z[j].mean()
        if standardize:
            col = col / design.column_sds[j]
        cols.append(col)
    norms = [float(c @ c) for c in cols]
    beta = np.zeros(len(active))
    for _ in range(max_sweeps):
        delta = 0.0
        for t in range(len(active)):
            if beta[t] != 0.0:
                r = r + beta[t] * cols[t]
            rho = float(cols[t] @ r)
            mag = abs(rho) - lam
            new = np.sign(rho) * mag / norms[t] if mag > 0 else 0.0
            if new != 0.0:
                r = r - new * cols[t]
            delta = max(delta, abs(new - beta[t]))
            beta[t] = new
        if delta < tol:
            break
    theta = np.zeros(design.Z.shape[0])
    scale = design.column_sds[active] if standardize else np.ones(len(active))
    theta[active] = beta / scale
    b = float(ym - theta @ design.column_means)
    return b, theta
