"""Structural parameter types and the frozen-zero constraint mask.

The estimated coefficient block is Theta = (Psi, Phi), p x 2p: Psi carries
contemporaneous effects, Phi one-period lag effects. Entry (i, j) of either
block is the coefficient of (lagged) variable j in the equation for variable
i, so a nonzero psi_ij / phi_ij reads as the directed edge j -> i.

Structural zeros, with the risk parameter at index 0:
  * psi_ii = 0 for all i              (no contemporaneous self-effect)
  * psi_0j = 0 for all j              (risk equation has no contemporaneous terms)
  * phi_i0 = 0 for all i              (lagged risk drives nothing)
The last entry (0, 0) of Phi can be released via ``allow_pd_self_lag`` to let
the risk parameter carry its own persistence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

__all__ = [
    "ConstraintMask",
    "CoefficientSet",
    "Violation",
    "default_mask",
    "set_pd_self_lag",
    "check_coefficients",
    "mask_to_json",
    "mask_from_json",
]


def _structural_pattern(p: int, allow_pd_self_lag: bool) -> np.ndarray:
    frozen = np.zeros((p, 2 * p), dtype=bool)
    frozen[np.arange(p), np.arange(p)] = True  # Psi diagonal
    frozen[0, :p] = True  # risk-parameter Psi row
    frozen[:, p] = True  # lagged-risk Phi column
    if allow_pd_self_lag:
        frozen[0, p] = False
    return frozen


@dataclass(frozen=True)
class ConstraintMask:
    """Boolean p x 2p pattern of coefficients frozen at exactly zero.

    Columns 0..p-1 address the Psi block, columns p..2p-1 the Phi block.
    The structural pattern is always present; users may freeze more entries
    but can only release the risk self-lag, via ``allow_pd_self_lag``.
    """

    frozen: np.ndarray
    allow_pd_self_lag: bool = False

    def __post_init__(self):
        frozen = np.array(self.frozen, dtype=bool)
        frozen.setflags(write=False)
        object.__setattr__(self, "frozen", frozen)
        if frozen.ndim != 2 or frozen.shape[1] != 2 * frozen.shape[0]:
            raise ValueError("mask must be p x 2p")
        if self.p < 2:
            raise ValueError("mask needs p >= 2")
        required = _structural_pattern(self.p, self.allow_pd_self_lag)
        if np.any(required & ~frozen):
            raise ValueError("structural zero pattern must stay frozen")

    @property
    def p(self) -> int:
        return self.frozen.shape[0]

    @property
    def n_frozen(self) -> int:
        return int(self.frozen.sum())

    def frozen_entries(self) -> list[tuple[int, int]]:
        """All frozen (row, column) pairs over the p x 2p grid, sorted."""
        return [(int(i), int(j)) for i, j in np.argwhere(self.frozen)]

    def extra_entries(self) -> list[tuple[int, int]]:
        """User-frozen pairs beyond the structural pattern, sorted."""
        extra = self.frozen & ~_structural_pattern(self.p, self.allow_pd_self_lag)
        return [(int(i), int(j)) for i, j in np.argwhere(extra)]

    def with_frozen(self, entries: Iterable[tuple[int, int]]) -> "ConstraintMask":
        """Return a mask with the given (row, column) pairs additionally frozen."""
        frozen = np.array(self.frozen)
        for i, j in entries:
            if not (0 <= i < self.p and 0 <= j < 2 * self.p):
                raise ValueError(f"entry ({i}, {j}) outside the p x 2p grid")
            frozen[i, j] = True
        return ConstraintMask(frozen=frozen, allow_pd_self_lag=self.allow_pd_self_lag)


def default_mask(p: int) -> ConstraintMask:
    """The structural pattern alone: 3p - 1 frozen entries."""
    if p < 2:
        raise ValueError("need p >= 2")
    return ConstraintMask(frozen=_structural_pattern(p, False), allow_pd_self_lag=False)


def set_pd_self_lag(mask: ConstraintMask, allow: bool) -> ConstraintMask:
    """Return mask with the risk self-lag entry (0, p) released or re-frozen."""
    frozen = np.array(mask.frozen)
    frozen[0, mask.p] = not allow
    return ConstraintMask(frozen=frozen, allow_pd_self_lag=allow)


@dataclass(frozen=True)
class CoefficientSet:
    """Estimated (Psi, Phi, b); frozen entries are bitwise 0.0 by construction."""

    psi: np.ndarray
    phi: np.ndarray
    intercept: np.ndarray

    def __post_init__(self):
        for name in ("psi", "phi", "intercept"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        p = self.psi.shape[0]
        if self.psi.shape != (p, p) or self.phi.shape != (p, p):
            raise ValueError("psi and phi must be square p x p matrices")
        if self.intercept.shape != (p,):
            raise ValueError("intercept must have length p")
        for name in ("psi", "phi", "intercept"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} must be finite")

    @property
    def p(self) -> int:
        return self.psi.shape[0]

    @property
    def theta(self) -> np.ndarray:
        """The p x 2p block (Psi, Phi)."""
        return np.hstack([self.psi, self.phi])

    @classmethod
    def zeros(cls, p: int) -> "CoefficientSet":
        return cls(psi=np.zeros((p, p)), phi=np.zeros((p, p)), intercept=np.zeros(p))


class Violation(NamedTuple):
    block: str  # "psi" or "phi"
    row: int
    col: int
    value: float


def check_coefficients(coeffs: CoefficientSet, mask: ConstraintMask) -> list[Violation]:
    """Every frozen entry whose value is not exactly 0.0; empty means compliant."""
    if coeffs.p != mask.p:
        raise ValueError(f"coefficients are p={coeffs.p} but mask is p={mask.p}")
    theta = coeffs.theta
    out = []
    for i, j in np.argwhere(mask.frozen & (theta != 0.0)):
        block, col = ("psi", int(j)) if j < mask.p else ("phi", int(j) - mask.p)
        out.append(Violation(block=block, row=int(i), col=col, value=float(theta[i, j])))
    return out


def mask_to_json(mask: ConstraintMask) -> str:
    payload = {
        "p": mask.p,
        "allow_pd_self_lag": mask.allow_pd_self_lag,
        "frozen_entries": [list(e) for e in mask.frozen_entries()],
    }
    return json.dumps(payload, sort_keys=True)


def mask_from_json(text: str) -> ConstraintMask:
    payload = json.loads(text)
    p = int(payload["p"])
    frozen = np.zeros((p, 2 * p), dtype=bool)
    for i, j in payload["frozen_entries"]:
        frozen[int(i), int(j)] = True
    return ConstraintMask(frozen=frozen, allow_pd_self_lag=bool(payload["allow_pd_self_lag"]))
