"""Prediction-powered percentile bootstrap and its power-tuned variant.

The core loop resamples the labeled and unlabeled data with replacement and
combines three estimator evaluations per iteration:

    value_b = lam * est(unlabeled features, unlabeled predictions)
              + (est(labeled features, outcomes) - lam * est(labeled features, labeled predictions))

The multiplier ``lam`` controls reliance on the predictions: 1 is the plain
combination, 0 falls back to the classical bootstrap of the labeled outcomes
(the code short-circuits to that exact path), and ``tuned`` estimates the
variance-minimizing multiplier from an initial bootstrap on disjoint streams.
The interval is the percentile interval of the retained iteration values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import LabeledDataset, UnlabeledDataset
from .errors import EstimationError
from .estimators import EstimandSpec, EstimateValue, evaluate
from .resampling import (
    PHASE_MAIN,
    PHASE_TUNING,
    RngStream,
    draw_labeled_indices,
    draw_resample,
    empirical_quantile,
)

LAMBDA_MODES = ("off", "fixed", "tuned")

# Below this, the tuning denominator is treated as zero and lambda falls back to 0.
TUNING_DENOM_FLOOR = 1e-15


@dataclass(frozen=True)
class BootstrapConfig:
    """Knobs shared by every bootstrap-based interval.

    ``lambda_mode`` is one of ``off`` (multiplier fixed at 1), ``fixed``
    (use ``lambda_value``), or ``tuned`` (estimate the multiplier from an
    initial bootstrap of ``tuning_B`` iterations, defaulting to ``B``).
    ``master_seed`` seeds the root stream wherever the caller does not pass
    an explicit stream (CLI, study harness).
    """

    B: int = 1000
    alpha: float = 0.1
    lambda_mode: str = "off"
    lambda_value: float = 1.0
    tuning_B: int | None = None
    master_seed: int = 0
    max_degenerate_retries: int = 10
    clip_lambda: bool = False

    def __post_init__(self):
        if self.B < 2:
            raise ValueError(f"B must be >= 2, got {self.B}")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie strictly inside (0, 1): got {self.alpha}")
        if self.lambda_mode not in LAMBDA_MODES:
            raise ValueError(f"lambda_mode must be one of {LAMBDA_MODES}, got {self.lambda_mode!r}")
        if self.tuning_B is not None and self.tuning_B < 2:
            raise ValueError(f"tuning_B must be >= 2, got {self.tuning_B}")
        if self.max_degenerate_retries < 0:
            raise ValueError("max_degenerate_retries must be >= 0")

    @property
    def effective_tuning_B(self) -> int:
        return self.B if self.tuning_B is None else self.tuning_B

    @classmethod
    def from_dict(cls, raw: dict) -> "BootstrapConfig":
        allowed = {
            "B", "alpha", "lambda_mode", "lambda_value", "tuning_B",
            "master_seed", "max_degenerate_retries", "clip_lambda",
        }
        unknown = set(raw) - allowed
        if unknown:
            raise ValueError(f"unknown bootstrap config keys: {sorted(unknown)}")
        return cls(**raw)


@dataclass(frozen=True)
class ConfidenceInterval:
    """Percentile (or closed-form) interval plus diagnostics."""

    lower: float
    upper: float
    point_estimate: float
    lambda_used: float
    degenerate_iterations: int
    alpha: float
    degenerate_reason: str | None = None

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True, eq=False)
class BootstrapDraws:
    """Retained per-iteration bootstrap values; dropped iterations counted."""

    values: np.ndarray
    degenerate_iterations: int


def bootstrap_values(
    B: int,
    stream: RngStream,
    max_degenerate_retries: int,
    attempt: Callable[[RngStream], EstimateValue],
) -> BootstrapDraws:
    """Run the deterministic bootstrap loop.

    Iteration ``b``, attempt ``r`` evaluates ``attempt`` on the substream at
    path ``(..., PHASE_MAIN, b, r)``, so results do not depend on execution
    order.  A degenerate attempt is redrawn up to ``max_degenerate_retries``
    times, then the iteration is dropped.
    """
    values = np.empty(B)
    kept = 0
    dropped = 0
    for b in range(B):
        for r in range(max_degenerate_retries + 1):
            est = attempt(stream.child(PHASE_MAIN, b, r))
            if est.ok:
                values[kept] = est.value
                kept += 1
                break
        else:
            dropped += 1
    return BootstrapDraws(values[:kept].copy(), dropped)


# Estimands that ignore the feature matrix; skipping the feature gather in the
# resample loop roughly halves per-iteration cost for them.
_OUTCOME_ONLY_KINDS = ("mean", "quantile")


def _classical_attempt(labeled: LabeledDataset, spec: EstimandSpec) -> Callable[[RngStream], EstimateValue]:
    X, y = labeled.features, labeled.outcomes
    n = labeled.n
    needs_features = spec.kind not in _OUTCOME_ONLY_KINDS

    def attempt(s: RngStream) -> EstimateValue:
        idx = draw_labeled_indices(n, s)
        return evaluate(spec, X[idx] if needs_features else None, y[idx])

    return attempt


def _combined_attempt(
    labeled: LabeledDataset, unlabeled: UnlabeledDataset, spec: EstimandSpec, lam: float
) -> Callable[[RngStream], EstimateValue]:
    Xl, y, fl = labeled.features, labeled.outcomes, labeled.predictions
    Xu, fu = unlabeled.features, unlabeled.predictions
    n, N = labeled.n, unlabeled.N
    needs_features = spec.kind not in _OUTCOME_ONLY_KINDS

    def attempt(s: RngStream) -> EstimateValue:
        idx = draw_resample(n, N, s)
        li, ui = idx.labeled_idx, idx.unlabeled_idx
        Xli = Xl[li] if needs_features else None
        e_lab = evaluate(spec, Xli, y[li])
        e_pred = evaluate(spec, Xli, fl[li])
        e_unl = evaluate(spec, Xu[ui] if needs_features else None, fu[ui])
        for e in (e_lab, e_pred, e_unl):
            if not e.ok:
                return e
        # Grouping the labeled difference keeps the cancellation exact when
        # predictions coincide with outcomes.
        return EstimateValue(lam * e_unl.value + (e_lab.value - lam * e_pred.value))

    return attempt


def _check_pair(labeled: LabeledDataset, unlabeled: UnlabeledDataset) -> None:
    if labeled.d != unlabeled.d:
        raise ValueError(f"feature width mismatch: labeled d={labeled.d}, unlabeled d={unlabeled.d}")


def ppboot_point_estimate(
    labeled: LabeledDataset, unlabeled: UnlabeledDataset, spec: EstimandSpec, lam: float = 1.0
) -> float:
    """Debiased point estimate on the original (non-resampled) data."""
    _check_pair(labeled, unlabeled)
    e_lab = evaluate(spec, labeled.features, labeled.outcomes)
    if not e_lab.ok:
        raise EstimationError(f"degenerate point estimate on labeled outcomes: {e_lab.reason}")
    if lam == 0.0:
        return e_lab.value
    e_pred = evaluate(spec, labeled.features, labeled.predictions)
    e_unl = evaluate(spec, unlabeled.features, unlabeled.predictions)
    for name, e in (("labeled predictions", e_pred), ("unlabeled predictions", e_unl)):
        if not e.ok:
            raise EstimationError(f"degenerate point estimate on {name}: {e.reason}")
    return lam * e_unl.value + (e_lab.value - lam * e_pred.value)


def ppboot_draws(
    labeled: LabeledDataset,
    unlabeled: UnlabeledDataset,
    spec: EstimandSpec,
    lam: float,
    B: int,
    stream: RngStream,
    max_degenerate_retries: int = 10,
) -> BootstrapDraws:
    """Collect the per-iteration combined bootstrap values.

    With ``lam == 0`` the evaluation short-circuits to the classical labeled
    bootstrap, consuming exactly the same draws as
    :func:`ppboot.baselines.classical_bootstrap_interval`.
    """
    _check_pair(labeled, unlabeled)
    if lam == 0.0:
        attempt = _classical_attempt(labeled, spec)
    else:
        attempt = _combined_attempt(labeled, unlabeled, spec, lam)
    return bootstrap_values(B, stream, max_degenerate_retries, attempt)


def require_retained(draws: BootstrapDraws, B: int) -> None:
    """Fail when fewer than half of the iterations produced usable values."""
    retained = draws.values.size
    if 2 * retained < B:
        raise EstimationError(
            f"bootstrap failure: only {retained} of {B} iterations usable "
            f"({draws.degenerate_iterations} degenerate)"
        )


def percentile_interval(
    draws: BootstrapDraws,
    alpha: float,
    B: int,
    point_estimate: float,
    lambda_used: float,
) -> ConfidenceInterval:
    """Percentile interval of the retained values; fails if too many dropped."""
    require_retained(draws, B)
    lower = empirical_quantile(draws.values, alpha / 2.0)
    upper = empirical_quantile(draws.values, 1.0 - alpha / 2.0)
    return ConfidenceInterval(
        lower=lower,
        upper=upper,
        point_estimate=point_estimate,
        lambda_used=lambda_used,
        degenerate_iterations=draws.degenerate_iterations,
        alpha=alpha,
    )


def tune_lambda(
    labeled: LabeledDataset,
    unlabeled: UnlabeledDataset,
    spec: EstimandSpec,
    tuning_B: int,
    stream: RngStream,
) -> float:
    """Estimate the variance-minimizing prediction multiplier.

    Runs an initial bootstrap collecting, per resample, the triple
    (estimate on labeled predictions, estimate on labeled outcomes, estimate
    on unlabeled predictions), then returns

        cov(pred, outcome) / (var(pred) + var(unlabeled pred))

    with unbiased sample moments over the retained triples.  Degenerate
    triples are dropped.  A denominator below ``TUNING_DENOM_FLOOR`` yields 0,
    which disables the prediction terms entirely.
    """
    _check_pair(labeled, unlabeled)
    if tuning_B < 2:
        raise ValueError(f"tuning_B must be >= 2, got {tuning_B}")
    Xl, y, fl = labeled.features, labeled.outcomes, labeled.predictions
    Xu, fu = unlabeled.features, unlabeled.predictions
    n, N = labeled.n, unlabeled.N

    needs_features = spec.kind not in _OUTCOME_ONLY_KINDS
    pred_vals, lab_vals, unl_vals = [], [], []
    for b in range(tuning_B):
        idx = draw_resample(n, N, stream.child(b))
        li, ui = idx.labeled_idx, idx.unlabeled_idx
        Xli = Xl[li] if needs_features else None
        e_pred = evaluate(spec, Xli, fl[li])
        e_lab = evaluate(spec, Xli, y[li])
        e_unl = evaluate(spec, Xu[ui] if needs_features else None, fu[ui])
        if e_pred.ok and e_lab.ok and e_unl.ok:
            pred_vals.append(e_pred.value)
            lab_vals.append(e_lab.value)
            unl_vals.append(e_unl.value)
    m = len(pred_vals)
    if m < 2:
        raise EstimationError(f"tuning failure: only {m} usable resamples out of {tuning_B}")

    a = np.asarray(pred_vals)
    b_ = np.asarray(lab_vals)
    c = np.asarray(unl_vals)
    ac = a - a.mean()
    bc = b_ - b_.mean()
    cc = c - c.mean()
    cov_ab = float(np.dot(ac, bc)) / (m - 1)
    var_a = float(np.dot(ac, ac)) / (m - 1)
    var_c = float(np.dot(cc, cc)) / (m - 1)
    denom = var_a + var_c
    if denom < TUNING_DENOM_FLOOR:
        return 0.0
    return cov_ab / denom


def resolve_lambda(
    labeled: LabeledDataset,
    unlabeled: UnlabeledDataset,
    spec: EstimandSpec,
    cfg: BootstrapConfig,
    stream: RngStream,
) -> float:
    """Resolve the active multiplier for one inference run."""
    if cfg.lambda_mode == "off":
        lam = 1.0
    elif cfg.lambda_mode == "fixed":
        lam = float(cfg.lambda_value)
    else:
        lam = tune_lambda(labeled, unlabeled, spec, cfg.effective_tuning_B, stream.child(PHASE_TUNING))
    if cfg.clip_lambda:
        lam = min(max(lam, 0.0), 1.0)
    return lam


def ppboot_interval(
    labeled: LabeledDataset,
    unlabeled: UnlabeledDataset,
    spec: EstimandSpec,
    cfg: BootstrapConfig,
    stream: RngStream,
) -> ConfidenceInterval:
    """Prediction-powered percentile bootstrap confidence interval.

    ``stream`` is the base stream for this inference; tuning draws live under
    its PHASE_TUNING child and main-loop draws under PHASE_MAIN, so a
    classical bootstrap sharing the same base stream is exactly paired.
    """
    lam = resolve_lambda(labeled, unlabeled, spec, cfg, stream)
    draws = ppboot_draws(labeled, unlabeled, spec, lam, cfg.B, stream, cfg.max_degenerate_retries)
    require_retained(draws, cfg.B)
    point = ppboot_point_estimate(labeled, unlabeled, spec, lam)
    return percentile_interval(draws, cfg.alpha, cfg.B, point, lam)


def reported_interval(ci: ConfidenceInterval, spec: EstimandSpec) -> ConfidenceInterval:
    """Apply reporting conventions: correlation clipping, then the transform.

    Correlation intervals are intersected with [-1, 1] (the combined bootstrap
    values may step outside it); ``exp`` and ``fisher_z_inverse`` map all
    three summaries monotonically, so coverage statements are unaffected.
    """
    lower, upper, point = ci.lower, ci.upper, ci.point_estimate
    if spec.kind == "pearson_corr":
        # Monotone clamp: also keeps lower <= upper when an interval sits
        # entirely outside the correlation range.
        lower = min(max(lower, -1.0), 1.0)
        upper = min(max(upper, -1.0), 1.0)
    if spec.transform == "exp":
        lower, upper, point = float(np.exp(lower)), float(np.exp(upper)), float(np.exp(point))
    elif spec.transform == "fisher_z_inverse":
        lower, upper, point = float(np.tanh(lower)), float(np.tanh(upper)), float(np.tanh(point))
    return ConfidenceInterval(
        lower=lower,
        upper=upper,
        point_estimate=point,
        lambda_used=ci.lambda_used,
        degenerate_iterations=ci.degenerate_iterations,
        alpha=ci.alpha,
        degenerate_reason=ci.degenerate_reason,
    )


def transform_value(value: float, spec: EstimandSpec) -> float:
    """Apply the reporting transform to a scalar (e.g. a ground-truth value)."""
    if spec.transform == "exp":
        return float(np.exp(value))
    if spec.transform == "fisher_z_inverse":
        return float(np.tanh(value))
    return value
