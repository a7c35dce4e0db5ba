"""Synthetic panels with known sparse structure, and support-recovery scoring.

The generator draws sparse (Psi, Phi) respecting the structural zeros, with
two extra structural choices: the contemporaneous pattern is acyclic (drawn
below a random topological order) and the risk parameter never drives a
macro variable, so generated networks have no output edge at the risk node.
The risk equation receives 2-4 lagged macro parents (clamped to p - 1) so
the candidate-set machinery downstream always has something to find.

Draws are rejected and retried until the reduced-form recursion
x_t = (I - Psi)^{-1} (Phi x_{t-1} + b + w_t) is strictly stationary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .model import CoefficientSet
from .panel import Role, TimeSeriesPanel, VariableMeta

__all__ = [
    "SynthSpec",
    "SupportCounts",
    "RecoveryMetrics",
    "StabilityMetrics",
    "generate",
    "simulate",
    "stability_metrics",
    "edge_metrics",
    "metrics_to_json",
]


def _as_tuple(value, p: int, name: str) -> tuple[float, ...]:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(p, float(arr))
    if arr.shape != (p,):
        raise ValueError(f"{name} must be a scalar or length-{p} sequence")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class SynthSpec:
    """Generative parameters for one synthetic draw."""

    p: int
    T: int
    edge_density: float = 0.15
    coef_low: float = 0.4
    coef_high: float = 0.8
    noise_sd: float | Sequence[float] = 0.1
    intercept_range: tuple[float, float] = (-0.5, 0.5)
    init_mean: float | Sequence[float] = 0.0
    init_sd: float | Sequence[float] = 1.0
    seed: int = 0
    max_retries: int = 1000

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("need p >= 2")
        if self.T < 3:
            raise ValueError("need T >= 3")
        if not (0.0 <= self.edge_density <= 1.0):
            raise ValueError("edge_density must be in [0, 1]")
        if not (0.0 < self.coef_low <= self.coef_high):
            raise ValueError("need 0 < coef_low <= coef_high")
        if self.max_retries < 1:
            raise ValueError("max_retries must be positive")
        lo, hi = self.intercept_range
        if lo > hi:
            raise ValueError("intercept_range must be ordered")
        object.__setattr__(self, "noise_sd", _as_tuple(self.noise_sd, self.p, "noise_sd"))
        object.__setattr__(self, "init_mean", _as_tuple(self.init_mean, self.p, "init_mean"))
        object.__setattr__(self, "init_sd", _as_tuple(self.init_sd, self.p, "init_sd"))
        if any(v < 0 for v in self.noise_sd) or any(v < 0 for v in self.init_sd):
            raise ValueError("noise_sd and init_sd must be nonnegative")


class StabilityMetrics(NamedTuple):
    spectral_radius: float
    condition_number: float  # of I - Psi


def stability_metrics(coeffs: CoefficientSet) -> StabilityMetrics:
    """Spectral radius of (I - Psi)^-1 Phi and conditioning of I - Psi."""
    eye = np.eye(coeffs.p)
    companion = np.linalg.solve(eye - coeffs.psi, coeffs.phi)
    radius = float(np.abs(np.linalg.eigvals(companion)).max())
    return StabilityMetrics(radius, float(np.linalg.cond(eye - coeffs.psi)))


def _draw_coef(spec: SynthSpec, rng: np.random.Generator) -> float:
    sign = 1.0 if rng.integers(0, 2) else -1.0
    return sign * float(rng.uniform(spec.coef_low, spec.coef_high))


def _draw_truth(spec: SynthSpec, rng: np.random.Generator) -> CoefficientSet:
    p = spec.p
    psi = np.zeros((p, p))
    phi = np.zeros((p, p))
    pos = np.empty(p, dtype=int)
    pos[rng.permutation(p)] = np.arange(p)  # topological positions for Psi
    for i in range(1, p):
        for j in range(1, p):
            if i != j and pos[j] < pos[i] and rng.random() < spec.edge_density:
                psi[i, j] = _draw_coef(spec, rng)
    for i in range(1, p):
        for j in range(1, p):
            if rng.random() < spec.edge_density:
                phi[i, j] = _draw_coef(spec, rng)
    hi = min(4, p - 1)
    lo = min(2, hi)
    n_parents = int(rng.integers(lo, hi + 1))
    for j in np.sort(rng.choice(np.arange(1, p), size=n_parents, replace=False)):
        phi[0, j] = _draw_coef(spec, rng)
    lo_b, hi_b = spec.intercept_range
    b = rng.uniform(lo_b, hi_b, size=p)
    return CoefficientSet(psi=psi, phi=phi, intercept=b)


def _recurse(truth: CoefficientSet, x0: np.ndarray, shocks: np.ndarray) -> np.ndarray:
    p = truth.p
    T = shocks.shape[0]
    inv = np.linalg.inv(np.eye(p) - truth.psi)
    values = np.empty((p, T))
    prev = x0
    for t in range(T):
        prev = inv @ (truth.phi @ prev + truth.intercept + shocks[t])
        values[:, t] = prev
    return values


def _default_names(p: int) -> list[str]:
    return ["PD"] + [f"M{j}" for j in range(1, p)]


def _make_panel(values: np.ndarray, names: Sequence[str] | None) -> TimeSeriesPanel:
    p, T = values.shape
    names = list(names) if names is not None else _default_names(p)
    variables = tuple(
        VariableMeta(name=n, role=Role.RISK_PARAMETER if i == 0 else Role.MACRO)
        for i, n in enumerate(names)
    )
    labels = tuple(f"t{t + 1}" for t in range(T))
    return TimeSeriesPanel(variables=variables, values=values, period_labels=labels)


def simulate(
    truth: CoefficientSet,
    T: int,
    noise_sd,
    x0,
    seed: int = 0,
    names: Sequence[str] | None = None,
) -> TimeSeriesPanel:
    """Run the recursion for T steps from x0 under a hand-built truth."""
    if T < 3:
        raise ValueError("need T >= 3")
    p = truth.p
    sd = np.asarray(_as_tuple(noise_sd, p, "noise_sd"))
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (p,):
        raise ValueError(f"x0 must have length {p}")
    shocks = np.random.default_rng(seed).standard_normal((T, p)) * sd
    return _make_panel(_recurse(truth, x0, shocks), names)


def generate(
    spec: SynthSpec, names: Sequence[str] | None = None
) -> tuple[TimeSeriesPanel, CoefficientSet]:
    """Draw a stationary sparse truth and simulate a panel; deterministic in seed."""
    rng = np.random.default_rng(spec.seed)
    truth = None
    for _ in range(spec.max_retries):
        candidate = _draw_truth(spec, rng)
        if stability_metrics(candidate).spectral_radius < 1.0:
            truth = candidate
            break
    if truth is None:
        raise RuntimeError(
            f"no stationary draw within {spec.max_retries} attempts; "
            "lower edge_density or coef_high"
        )
    x0 = rng.normal(np.asarray(spec.init_mean), np.asarray(spec.init_sd))
    shocks = rng.standard_normal((spec.T, spec.p)) * np.asarray(spec.noise_sd)
    return _make_panel(_recurse(truth, x0, shocks), names), truth


@dataclass(frozen=True)
class SupportCounts:
    true_positive: int
    false_positive: int
    false_negative: int

    @property
    def precision(self) -> float:
        found = self.true_positive + self.false_positive
        return 1.0 if found == 0 else self.true_positive / found

    @property
    def recall(self) -> float:
        real = self.true_positive + self.false_negative
        return 1.0 if real == 0 else self.true_positive / real

    @property
    def f1(self) -> float:
        s = self.precision + self.recall
        return 0.0 if s == 0 else 2.0 * self.precision * self.recall / s


@dataclass(frozen=True)
class RecoveryMetrics:
    psi: SupportCounts
    phi: SupportCounts
    combined: SupportCounts
    precision: float
    recall: float
    f1: float
    sign_agreement: float


def _block_counts(truth: np.ndarray, est: np.ndarray, threshold: float) -> SupportCounts:
    real = truth != 0.0
    found = np.abs(est) > threshold
    return SupportCounts(
        true_positive=int(np.sum(real & found)),
        false_positive=int(np.sum(~real & found)),
        false_negative=int(np.sum(real & ~found)),
    )


def edge_metrics(
    truth: CoefficientSet, estimate: CoefficientSet, threshold: float = 0.0
) -> RecoveryMetrics:
    """Coordinatewise support comparison; presence is |value| > threshold on the estimate side."""
    if truth.p != estimate.p:
        raise ValueError("truth and estimate dimensions disagree")
    psi = _block_counts(truth.psi, estimate.psi, threshold)
    phi = _block_counts(truth.phi, estimate.phi, threshold)
    combined = SupportCounts(
        true_positive=psi.true_positive + phi.true_positive,
        false_positive=psi.false_positive + phi.false_positive,
        false_negative=psi.false_negative + phi.false_negative,
    )
    tp_mask = (truth.theta != 0.0) & (np.abs(estimate.theta) > threshold)
    if tp_mask.any():
        agree = np.sign(truth.theta[tp_mask]) == np.sign(estimate.theta[tp_mask])
        sign_agreement = float(np.mean(agree))
    else:
        sign_agreement = 1.0
    return RecoveryMetrics(
        psi=psi,
        phi=phi,
        combined=combined,
        precision=combined.precision,
        recall=combined.recall,
        f1=combined.f1,
        sign_agreement=sign_agreement,
    )


def metrics_to_json(metrics: RecoveryMetrics) -> str:
    def block(c: SupportCounts) -> dict:
        return {
            "true_positive": c.true_positive,
            "false_positive": c.false_positive,
            "false_negative": c.false_negative,
            "precision": c.precision,
            "recall": c.recall,
            "f1": c.f1,
        }

    payload = {
        "psi": block(metrics.psi),
        "phi": block(metrics.phi),
        "combined": block(metrics.combined),
        "precision": metrics.precision,
        "recall": metrics.recall,
        "f1": metrics.f1,
        "sign_agreement": metrics.sign_agreement,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
